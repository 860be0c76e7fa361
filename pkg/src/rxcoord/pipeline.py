"""End-to-end studies: hyperparameter grid scan, reaction-coordinate
ranking, CB-vs-all reduction ratio, raw-axis baselines, the pairwise
correlation network, and synthetic test data.

All operations are deterministic: parallel work items are merged by
index, so results do not depend on thread count or execution order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corrratio import CorrRatioConfig, CorrRatioResult, correlation_ratio
from .errors import AllDegenerate
from .ingest import AtomRecord, PropertySeries, Selection, Trajectory, select_atoms
from .kernel import LambdaTriple, kernel_features, lambda_grid, theta_series
from .pca import Representation, pca2


@dataclass(frozen=True)
class GridScanResult:
    entries: tuple[tuple[LambdaTriple, CorrRatioResult], ...]
    best: int
    representation: Representation

    @property
    def best_lambda(self) -> LambdaTriple:
        return self.entries[self.best][0]

    @property
    def best_cr(self) -> float:
        return self.entries[self.best][1].cr


@dataclass(frozen=True)
class RankedCoordinate:
    residue_seq: int
    residue_name: str
    cr: float
    rank: int


@dataclass(frozen=True)
class RankingResult:
    ranked: tuple[RankedCoordinate, ...]
    skipped: tuple[int, ...]  # residue_seq values without a CA atom


@dataclass(frozen=True)
class NetworkEdge:
    residue_a: int
    residue_b: int
    pearson: float
    state_breakdown: dict  # {"low" | "mid" | "high": pearson within tertile}


def grid_scan(traj: Trajectory, selection: Selection, prop: PropertySeries,
              cfg: CorrRatioConfig = CorrRatioConfig(), step: float = 0.25,
              threads: int = 1) -> GridScanResult:
    """Scan the lambda simplex and pick the representation with the best cr.

    Ties break toward the lexicographically smaller lambda (the grid is
    sorted). Raises AllDegenerate when no entry produces a usable
    correlation ratio.
    """
    if len(prop) != traj.n_frames:
        raise ValueError("property length does not match frame count")
    grid = lambda_grid(step)

    def evaluate(lam: LambdaTriple) -> tuple[Representation, CorrRatioResult]:
        rep = pca2(kernel_features(traj, selection, lam))
        return rep, correlation_ratio(rep.pc1, prop, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            evaluated = list(pool.map(evaluate, grid))
    else:
        evaluated = [evaluate(lam) for lam in grid]

    entries = tuple((lam, res) for lam, (_, res) in zip(grid, evaluated))
    best = -1
    for i, (_, res) in enumerate(entries):
        if res.degenerate:
            continue
        if best < 0 or res.cr > entries[best][1].cr:
            best = i
    if best < 0:
        raise AllDegenerate("every lambda combination gave a degenerate result")
    return GridScanResult(entries=entries, best=best,
                          representation=evaluated[best][0])


def _residues_with_ca(traj: Trajectory) -> tuple[list[tuple[int, str]], list[int]]:
    seen: dict[int, str] = {}
    has_ca: set[int] = set()
    for a in traj.atoms:
        if a.residue_seq not in seen:
            seen[a.residue_seq] = a.residue_name
        if a.name == "CA":
            has_ca.add(a.residue_seq)
    with_ca = [(seq, name) for seq, name in seen.items() if seq in has_ca]
    skipped = [seq for seq in seen if seq not in has_ca]
    with_ca.sort()
    skipped.sort()
    return with_ca, skipped


def rank_reaction_coordinates(traj: Trajectory, representation: Representation,
                              cfg: CorrRatioConfig = CorrRatioConfig(),
                              threads: int = 1) -> RankingResult:
    """Score every residue's CA theta angle against PC1 and rank by cr.

    Residues without a CA atom (ligands, ions) are skipped and
    reported. Ties break toward the lower residue number.
    """
    residues, skipped = _residues_with_ca(traj)
    pc1 = representation.pc1

    def score(entry: tuple[int, str]) -> float:
        seq, _ = entry
        theta = theta_series(traj, seq)
        return correlation_ratio(pc1, theta, cfg).cr

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            crs = list(pool.map(score, residues))
    else:
        crs = [score(entry) for entry in residues]

    order = sorted(range(len(residues)), key=lambda i: (-crs[i], residues[i][0]))
    ranked = tuple(
        RankedCoordinate(residue_seq=residues[i][0], residue_name=residues[i][1],
                         cr=crs[i], rank=rank)
        for rank, i in enumerate(order, start=1)
    )
    return RankingResult(ranked=ranked, skipped=tuple(skipped))


def cb_total_ratio(traj: Trajectory, prop: PropertySeries,
                   cfg: CorrRatioConfig = CorrRatioConfig(), step: float = 0.25,
                   threads: int = 1) -> float:
    """Best-cr ratio (percent) of the CB-only scan to the all-atom scan."""
    cb = grid_scan(traj, select_atoms(traj.atoms, "name CB"), prop, cfg, step, threads)
    total = grid_scan(traj, select_atoms(traj.atoms, "all"), prop, cfg, step, threads)
    return 100.0 * cb.best_cr / total.best_cr


def single_axis_baseline(traj: Trajectory, selection: Selection, axis: str,
                         prop: PropertySeries,
                         cfg: CorrRatioConfig = CorrRatioConfig()) -> CorrRatioResult:
    """Correlation ratio of a representation built from one raw axis.

    No kernel: the F x A matrix of raw x, y or z coordinates of the
    selected atoms goes straight into PCA.
    """
    try:
        col = {"x": 0, "y": 1, "z": 2}[axis]
    except KeyError:
        raise ValueError(f"axis must be x, y or z, not {axis!r}") from None
    matrix = traj.frames[:, list(selection.indices), col]
    rep = pca2(matrix)
    return correlation_ratio(rep.pc1, prop, cfg)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc**2) * np.sum(yc**2))
    if denom == 0.0:
        return 0.0
    return float(np.clip(np.sum(xc * yc) / denom, -1.0, 1.0))


def pairwise_network(traj: Trajectory, ranked: list[RankedCoordinate], k: int,
                     prop: PropertySeries) -> list[NetworkEdge]:
    """Pairwise theta-angle correlations among the top-k residues.

    Each edge carries the Pearson correlation over all frames plus a
    per-state breakdown, states being the low/mid/high property
    tertiles (split at the 33.3rd and 66.7th percentiles).
    """
    if k < 2:
        raise ValueError("network needs at least 2 residues")
    top = sorted(ranked, key=lambda rc: rc.rank)[:k]
    thetas = {rc.residue_seq: theta_series(traj, rc.residue_seq).values for rc in top}

    values = prop.values
    t1, t2 = np.percentile(values, [100 / 3, 200 / 3])
    states = {
        "low": values <= t1,
        "mid": (values > t1) & (values <= t2),
        "high": values > t2,
    }

    edges = []
    seqs = sorted(thetas)
    for i, a in enumerate(seqs):
        for b in seqs[i + 1:]:
            breakdown = {}
            for label, mask in states.items():
                if np.count_nonzero(mask) >= 2:
                    breakdown[label] = _pearson(thetas[a][mask], thetas[b][mask])
                else:
                    breakdown[label] = 0.0
            edges.append(NetworkEdge(residue_a=a, residue_b=b,
                                     pearson=_pearson(thetas[a], thetas[b]),
                                     state_breakdown=breakdown))
    return edges


def subsample_frames(traj: Trajectory, prop: PropertySeries, n: int,
                     seed: int) -> tuple[Trajectory, PropertySeries]:
    """Uniform without-replacement frame sampling, reproducible per seed.

    Selected frames keep their original relative order, so n = F is
    the identity.
    """
    if not 1 <= n <= traj.n_frames:
        raise ValueError(f"cannot sample {n} of {traj.n_frames} frames")
    if len(prop) != traj.n_frames:
        raise ValueError("property length does not match frame count")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(traj.n_frames, size=n, replace=False))
    sub = Trajectory(atoms=traj.atoms, frames=traj.frames[idx],
                     frame_ids=tuple(traj.frame_ids[i] for i in idx))
    return sub, PropertySeries(name=prop.name, units=prop.units,
                               values=prop.values[idx])


RESIDUE_NAMES = ("ALA", "GLY", "LEU", "SER", "VAL", "THR", "LYS", "ASP",
                 "ILE", "PRO")


def synth_planted(seed: int, n_frames: int, n_residues: int,
                  signal_residues: list[int], noise_sigma: float,
                  radial_jitter: float = 0.1, angular_jitter: float = 0.05,
                  ) -> tuple[Trajectory, PropertySeries, dict]:
    """Synthetic trajectory with a planted angular signal.

    A latent scalar in [0, 1] drives the polar angle of the planted
    residues' CA (and CB) atoms linearly; every other atom sits at a
    fixed random direction with small angular jitter. All radii carry
    multiplicative jitter, so the signal lives purely in direction
    space. The property series is the latent plus Gaussian noise.

    Returns (trajectory, property, ground_truth) where ground_truth
    holds the latent values and the planted residue numbers.
    """
    if not signal_residues:
        raise ValueError("need at least one signal residue")
    for seq in signal_residues:
        if not 1 <= seq <= n_residues:
            raise ValueError(f"signal residue {seq} outside 1..{n_residues}")
    rng = np.random.default_rng(seed)
    latent = rng.uniform(0.0, 1.0, n_frames)

    atoms = []
    serial = 1
    for seq in range(1, n_residues + 1):
        resname = RESIDUE_NAMES[(seq - 1) % len(RESIDUE_NAMES)]
        for name in ("CA", "CB"):
            atoms.append(AtomRecord(serial=serial, name=name, residue_name=resname,
                                    residue_seq=seq, chain="A", element="C"))
            serial += 1
    n_atoms = len(atoms)

    # Per-atom static direction parameters.
    phi = rng.uniform(0.0, 2 * np.pi, n_atoms)
    base_theta = rng.uniform(0.4, 2.6, n_atoms)
    signal_set = set(signal_residues)

    # theta range [0.3, 1.3] keeps sin^2(cos(theta)) monotone in theta,
    # so the kernel's z term responds monotonically to the latent.
    theta = np.empty((n_frames, n_atoms))
    for i, a in enumerate(atoms):
        if a.residue_seq in signal_set:
            offset = 0.0 if a.name == "CA" else 0.1
            theta[:, i] = 0.3 + offset + 1.0 * latent
        else:
            theta[:, i] = base_theta[i] + angular_jitter * rng.standard_normal(n_frames)
    radius = 10.0 * (1.0 + radial_jitter * rng.standard_normal((n_frames, n_atoms)))
    radius = np.maximum(radius, 1.0)

    sin_t = np.sin(theta)
    frames = np.stack([
        radius * sin_t * np.cos(phi),
        radius * sin_t * np.sin(phi),
        radius * np.cos(theta),
    ], axis=-1)

    prop_values = latent + noise_sigma * rng.standard_normal(n_frames)
    traj = Trajectory(atoms=tuple(atoms), frames=frames,
                      frame_ids=tuple(range(n_frames)))
    prop = PropertySeries(name="latent", units="", values=prop_values)
    truth = {"latent": latent, "signal_residues": list(signal_residues)}
    return traj, prop, truth
