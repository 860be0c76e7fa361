"""Command-line front end.

Subcommands mirror the analysis workflow: ``prep`` (center/orient the
reference and align the trajectory), ``rmsd`` / ``distance`` (property
series), ``scan`` (lambda grid search), ``rank`` (reaction-coordinate
ranking), ``network`` (pairwise correlations), ``report`` (aggregate a
run directory) and ``synth`` (generate a planted-signal fixture).

Runs are reproducible: same config and seed give byte-identical CSV and
JSON outputs, independent of ``--threads``. Errors print a single
``error_code: message`` line on stderr and exit nonzero (2 bad input,
3 degenerate result, 1 anything else); partially written outputs are
removed on failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .align import (align_trajectory, ca_contact_distance, kabsch,
                    principal_axes_rotation, rmsd_series, translate_to_origin)
from .corrratio import CorrRatioConfig, normalize_grid
from .errors import InputError, RxcoordError
from .ingest import (PropertySeries, Structure, Trajectory, parse_pdb,
                     parse_property_csv, parse_trajectory, select_atoms,
                     write_csv, write_json, write_pdb, write_property_csv,
                     write_svg_scatter, write_trajectory_pdb)
from .kernel import LambdaTriple, theta_series
from .pca import Representation
from .pipeline import (RankedCoordinate, grid_scan, pairwise_network,
                       rank_reaction_coordinates, synth_planted)


class OutputTracker:
    """Records files as they are written so failures can clean up."""

    def __init__(self, force: bool):
        self.force = force
        self.written: list[Path] = []

    def write(self, path: Path, text: str) -> None:
        if path.exists() and not self.force:
            raise InputError(f"refusing to overwrite {path} (use --force)")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.written.append(path)

    def cleanup(self) -> None:
        for path in self.written:
            try:
                path.unlink()
            except OSError:
                pass


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"input file not found: {path}")
    return p.read_text()


def _load_structure(path: str) -> Structure:
    return parse_pdb(_read(path))


def _traj_format(path: str) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".pdb":
        return "multi-model-pdb"
    if suffix == ".xyz":
        return "xyz"
    if suffix == ".csv":
        return "csv"
    raise InputError(f"cannot infer trajectory format from {path!r} "
                     "(expected .pdb, .xyz or .csv)")


def _load_trajectory(path: str, reference: Structure | None = None) -> Trajectory:
    fmt = _traj_format(path)
    atoms = reference.atoms if (reference is not None and fmt == "csv") else None
    return parse_trajectory(_read(path), fmt, atoms=atoms)


def _load_property(path: str) -> PropertySeries:
    return parse_property_csv(_read(path))


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("RXCOORD_THREADS")
    if env and env.isdigit():
        return max(1, int(env))
    return os.cpu_count() or 1


def _corr_config(args) -> CorrRatioConfig:
    return CorrRatioConfig(n_bins=args.bins, min_bin_count=args.min_bin_count,
                           standardize=not args.no_standardize)


# --- Representation persistence ------------------------------------------


def representation_to_json(rep: Representation, selection_expr: str,
                           selection_indices: tuple[int, ...]) -> str:
    return write_json({
        "lambda": list(rep.lambda_.as_tuple()) if rep.lambda_ else None,
        "selection_expr": selection_expr,
        "selection_indices": list(selection_indices),
        "eigenvalues": rep.eigenvalues.tolist(),
        "column_means": rep.column_means.tolist(),
        "column_scales": rep.column_scales.tolist(),
        "loadings": rep.loadings.tolist(),
        "scores": rep.scores.tolist(),
        "rank_deficient": rep.rank_deficient,
    })


def representation_from_json(text: str) -> tuple[Representation, str]:
    try:
        obj = json.loads(text)
        lam = LambdaTriple(*obj["lambda"]) if obj.get("lambda") else None
        rep = Representation(
            scores=np.array(obj["scores"]),
            loadings=np.array(obj["loadings"]),
            eigenvalues=np.array(obj["eigenvalues"]),
            column_means=np.array(obj["column_means"]),
            column_scales=np.array(obj["column_scales"]),
            lambda_=lam,
            rank_deficient=bool(obj["rank_deficient"]),
        )
        return rep, obj["selection_expr"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad representation file: {exc}") from exc


# --- Subcommand implementations -------------------------------------------


def cmd_prep(args, out: OutputTracker) -> None:
    reference = _load_structure(args.reference)
    centered = translate_to_origin(reference.coords)
    rotation = principal_axes_rotation(centered)
    oriented = Structure(atoms=reference.atoms, coords=centered @ rotation.T)

    outdir = Path(args.outdir)
    out.write(outdir / "oriented_reference.pdb", write_pdb(oriented))

    if args.trajectory:
        traj = _load_trajectory(args.trajectory, oriented)
        selection = select_atoms(traj.atoms, args.selection)
        aligned = align_trajectory(traj, oriented, selection)
        out.write(outdir / "aligned_trajectory.pdb", write_trajectory_pdb(aligned))
        fits = [kabsch(traj.frames[k], oriented.coords, selection).rmsd
                for k in range(traj.n_frames)]
        out.write(outdir / "alignment_rmsd.csv", write_csv(
            ["frame", "fit_rmsd"],
            [[traj.frame_ids[k], fits[k]] for k in range(traj.n_frames)]))


def cmd_rmsd(args, out: OutputTracker) -> None:
    reference = _load_structure(args.reference)
    traj = _load_trajectory(args.trajectory, reference)
    selection = select_atoms(traj.atoms, args.selection)
    series = rmsd_series(traj, reference, selection)
    out.write(Path(args.out), write_property_csv(series))


def cmd_distance(args, out: OutputTracker) -> None:
    traj = _load_trajectory(args.trajectory)
    series = ca_contact_distance(traj, args.res_a, args.res_b)
    out.write(Path(args.out), write_property_csv(series))


def _scan_rows(result, normalized) -> list[list]:
    # normalize_grid preserves entry order.
    rows = []
    for (lam, res), (_, crn) in zip(result.entries, normalized):
        rows.append([lam.l1, lam.l2, lam.l3, res.s, res.r2, res.v, res.cr,
                     crn, res.degenerate])
    return rows


def cmd_scan(args, out: OutputTracker) -> None:
    reference = _load_structure(args.reference) if args.reference else None
    traj = _load_trajectory(args.trajectory, reference)
    prop = _load_property(args.property)
    selection = select_atoms(traj.atoms, args.selection)
    cfg = _corr_config(args)
    result = grid_scan(traj, selection, prop, cfg, step=args.lambda_step,
                       threads=_threads(args))
    normalized = normalize_grid(list(result.entries))

    outdir = Path(args.outdir)
    out.write(outdir / "grid.csv", write_csv(
        ["l1", "l2", "l3", "s", "r2", "v", "cr", "cr_normalized", "degenerate"],
        _scan_rows(result, normalized)))
    rep = result.representation
    out.write(outdir / "representation.json",
              representation_to_json(rep, args.selection, selection.indices))
    out.write(outdir / "scores.csv", write_csv(
        ["frame", "pc1", "pc2"],
        [[traj.frame_ids[k], rep.scores[k, 0], rep.scores[k, 1]]
         for k in range(traj.n_frames)]))
    if args.svg:
        lam = result.best_lambda
        title = f"K({lam.l1:g}, {lam.l2:g}, {lam.l3:g})  Cr = {result.best_cr:.4g}"
        out.write(outdir / "representation.svg",
                  write_svg_scatter(rep.scores, prop.values, ("PC1", "PC2"), title))


def cmd_rank(args, out: OutputTracker) -> None:
    traj = _load_trajectory(args.trajectory,
                            _load_structure(args.reference) if args.reference else None)
    rep, _expr = representation_from_json(_read(args.representation))
    if rep.scores.shape[0] != traj.n_frames:
        raise InputError("representation was fitted on a different frame count")
    cfg = _corr_config(args)
    ranking = rank_reaction_coordinates(traj, rep, cfg, threads=_threads(args))

    outdir = Path(args.outdir)
    out.write(outdir / "ranking.csv", write_csv(
        ["rank", "residue_seq", "residue_name", "cr"],
        [[rc.rank, rc.residue_seq, rc.residue_name, rc.cr] for rc in ranking.ranked]))
    if ranking.skipped:
        out.write(outdir / "skipped_residues.csv", write_csv(
            ["residue_seq"], [[seq] for seq in ranking.skipped]))
    if args.svg:
        for rc in ranking.ranked[:args.top_k]:
            theta = theta_series(traj, rc.residue_seq)
            out.write(outdir / f"theta_res{rc.residue_seq}.svg",
                      write_svg_scatter(rep.scores, theta.values, ("PC1", "PC2"),
                                        f"rank {rc.rank}: residue {rc.residue_seq} "
                                        f"({rc.residue_name})  Cr = {rc.cr:.4g}"))


def _load_ranking(path: str) -> list[RankedCoordinate]:
    lines = _read(path).splitlines()
    if not lines or lines[0] != "rank,residue_seq,residue_name,cr":
        raise InputError(f"bad ranking file header in {path!r}")
    ranked = []
    for row in lines[1:]:
        if not row.strip():
            continue
        rank, seq, name, cr = row.split(",")
        ranked.append(RankedCoordinate(residue_seq=int(seq), residue_name=name,
                                       cr=float(cr), rank=int(rank)))
    if not ranked:
        raise InputError(f"no ranking rows in {path!r}")
    return ranked


def cmd_network(args, out: OutputTracker) -> None:
    traj = _load_trajectory(args.trajectory,
                            _load_structure(args.reference) if args.reference else None)
    ranked = _load_ranking(args.ranking)
    prop = _load_property(args.property)
    edges = pairwise_network(traj, ranked, args.k, prop)

    nodes = sorted({rc.residue_seq for rc in sorted(ranked, key=lambda r: r.rank)[:args.k]})
    out.write(Path(args.outdir) / "network.json", write_json({
        "nodes": nodes,
        "edges": [{
            "residue_a": e.residue_a,
            "residue_b": e.residue_b,
            "pearson": e.pearson,
            "states": e.state_breakdown,
        } for e in edges],
    }))
    if args.svg:
        # One scatter per edge: theta_a vs theta_b, colored by property.
        thetas = {seq: theta_series(traj, seq).values for seq in nodes}
        for e in edges:
            pts = np.column_stack([thetas[e.residue_a], thetas[e.residue_b]])
            out.write(Path(args.outdir) / f"pair_{e.residue_a}_{e.residue_b}.svg",
                      write_svg_scatter(pts, prop.values,
                                        (f"theta res {e.residue_a} (rad)",
                                         f"theta res {e.residue_b} (rad)"),
                                        f"pearson = {e.pearson:.3f}"))


def cmd_report(args, out: OutputTracker) -> None:
    rundir = Path(args.rundir)
    if not rundir.is_dir():
        raise InputError(f"run directory not found: {args.rundir}")
    report: dict = {"run_directory": str(rundir), "artifacts": {}}

    grid = rundir / "grid.csv"
    if grid.is_file():
        rows = grid.read_text().splitlines()[1:]
        entries = []
        for row in rows:
            l1, l2, l3, s, r2, v, cr, crn, deg = row.split(",")
            entries.append({"lambda": [float(l1), float(l2), float(l3)],
                            "cr": float(cr), "cr_normalized": float(crn),
                            "degenerate": deg == "true"})
        best = max((e for e in entries if not e["degenerate"]),
                   key=lambda e: e["cr"], default=None)
        report["artifacts"]["grid"] = {"entries": entries, "best": best}

    ranking = rundir / "ranking.csv"
    if ranking.is_file():
        ranked = _load_ranking(str(ranking))
        report["artifacts"]["ranking"] = [
            {"rank": rc.rank, "residue_seq": rc.residue_seq,
             "residue_name": rc.residue_name, "cr": rc.cr} for rc in ranked]

    network = rundir / "network.json"
    if network.is_file():
        report["artifacts"]["network"] = json.loads(network.read_text())

    if not report["artifacts"]:
        raise InputError(f"no recognized artifacts in {args.rundir}")

    out.write(rundir / "report.json", write_json(report))

    lines = [f"run report: {rundir}"]
    grid_part = report["artifacts"].get("grid")
    if grid_part and grid_part["best"]:
        b = grid_part["best"]
        lines.append(f"  best kernel: lambda={tuple(b['lambda'])} cr={b['cr']:.6g}")
    rank_part = report["artifacts"].get("ranking")
    if rank_part:
        top = rank_part[0]
        lines.append(f"  top reaction coordinate: residue {top['residue_seq']} "
                     f"({top['residue_name']}) cr={top['cr']:.6g}")
    if "network" in report["artifacts"]:
        n_edges = len(report["artifacts"]["network"]["edges"])
        lines.append(f"  network edges: {n_edges}")
    out.write(rundir / "report.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))


def cmd_synth(args, out: OutputTracker) -> None:
    signal = [int(s) for s in args.signal.split(",") if s.strip()]
    traj, prop, truth = synth_planted(seed=args.seed, n_frames=args.frames,
                                      n_residues=args.residues,
                                      signal_residues=signal,
                                      noise_sigma=args.noise)
    outdir = Path(args.outdir)
    out.write(outdir / "trajectory.pdb", write_trajectory_pdb(traj))
    out.write(outdir / "property.csv", write_property_csv(prop))
    out.write(outdir / "truth.json", write_json({
        "signal_residues": truth["signal_residues"],
        "latent": truth["latent"].tolist(),
        "seed": args.seed,
    }))


# --- Argument parsing ------------------------------------------------------


def _add_corr_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bins", type=int, default=None,
                   help="number of equal-width PC1 sections (default 20)")
    p.add_argument("--min-bin-count", type=int, default=None,
                   help="drop sections with fewer frames than this (default 3)")
    p.add_argument("--no-standardize", action="store_true", default=None,
                   help="skip z-scoring PC1 and the property")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rxcoord",
        description="Kernel-PCA reaction-coordinate analysis of MD trajectories")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML config file; flags override it")
        p.add_argument("--force", action="store_true", default=None,
                       help="overwrite existing outputs")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: RXCOORD_THREADS or all cores)")
        p.add_argument("--seed", type=int, default=None, help="random seed (default 42)")

    p = sub.add_parser("prep", help="center/orient reference, align trajectory")
    p.add_argument("--reference", required=True)
    p.add_argument("--trajectory")
    p.add_argument("--selection", default=None, help="alignment selection (default backbone)")
    p.add_argument("--outdir", required=True)
    common(p)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("rmsd", help="per-frame RMSD property series")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--selection", default=None)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_rmsd)

    p = sub.add_parser("distance", help="CA contact-distance property series")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--res-a", type=int, required=True)
    p.add_argument("--res-b", type=int, required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("scan", help="lambda grid scan and best representation")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--property", required=True)
    p.add_argument("--selection", default=None)
    p.add_argument("--reference", help="PDB supplying atom names for CSV trajectories")
    p.add_argument("--lambda-step", type=float, default=None)
    p.add_argument("--outdir", required=True)
    p.add_argument("--svg", action="store_true", default=None,
                   help="emit a representation scatter plot")
    _add_corr_flags(p)
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("rank", help="rank per-residue theta reaction coordinates")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--representation", required=True,
                   help="representation.json from a scan run")
    p.add_argument("--reference")
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--outdir", required=True)
    p.add_argument("--svg", action="store_true", default=None)
    _add_corr_flags(p)
    common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("network", help="pairwise correlations among top residues")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--ranking", required=True, help="ranking.csv from a rank run")
    p.add_argument("--property", required=True)
    p.add_argument("--reference")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--outdir", required=True)
    p.add_argument("--svg", action="store_true", default=None)
    common(p)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("report", help="aggregate artifacts of a run directory")
    p.add_argument("--rundir", required=True)
    common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a planted-signal synthetic fixture")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--residues", type=int, default=None)
    p.add_argument("--signal", default=None, help="comma-separated residue numbers")
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--outdir", required=True)
    common(p)
    p.set_defaults(func=cmd_synth)

    return parser


DEFAULTS = {
    "selection": "backbone",
    "bins": 20,
    "min_bin_count": 3,
    "no_standardize": False,
    "lambda_step": 0.25,
    "top_k": 10,
    "k": 5,
    "seed": 42,
    "force": False,
    "svg": False,
    "frames": 2000,
    "residues": 20,
    "signal": "4",
    "noise": 0.05,
}


def _apply_config(args: argparse.Namespace) -> None:
    """Fill unset (None) options from the config file, then from defaults."""
    file_values: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise InputError(f"config file not found: {args.config}")
        try:
            file_values = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"bad config file: {exc}") from exc
    for key, value in vars(args).items():
        if value is not None:
            continue
        if key in file_values:
            setattr(args, key, file_values[key])
        elif key.replace("_", "-") in file_values:
            setattr(args, key, file_values[key.replace("_", "-")])
        elif key in DEFAULTS:
            setattr(args, key, DEFAULTS[key])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = OutputTracker(force=False)
    try:
        _apply_config(args)
        out.force = bool(args.force)
        args.func(args, out)
        return 0
    except RxcoordError as exc:
        out.cleanup()
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        out.cleanup()
        print(f"bad_input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - safety net
        out.cleanup()
        print(f"internal_error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
