import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from rxcoord import cli
from rxcoord.align import principal_axes_rotation
from rxcoord.ingest import (Structure, parse_pdb, parse_property_csv,
                            parse_trajectory, write_pdb, write_property_csv,
                            write_trajectory_pdb)
from rxcoord.pipeline import synth_planted


def run_cli(*argv):
    return cli.main(list(argv))


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixture")
    traj, prop, truth = synth_planted(seed=17, n_frames=400, n_residues=8,
                                      signal_residues=[3], noise_sigma=0.03)
    (root / "trajectory.pdb").write_text(write_trajectory_pdb(traj))
    (root / "property.csv").write_text(write_property_csv(prop))
    (root / "reference.pdb").write_text(
        write_pdb(Structure(atoms=traj.atoms, coords=traj.frames[0])))
    (root / "truth.json").write_text(json.dumps(
        {"signal_residues": truth["signal_residues"]}))
    return root


def test_scan_grid_has_15_rows(fixture_dir, tmp_path):
    rc = run_cli("scan", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                 "--property", str(fixture_dir / "property.csv"),
                 "--selection", "all", "--outdir", str(tmp_path / "run"),
                 "--svg")
    assert rc == 0
    grid = (tmp_path / "run" / "grid.csv").read_text().splitlines()
    assert grid[0] == "l1,l2,l3,s,r2,v,cr,cr_normalized,degenerate"
    assert len(grid) == 16
    assert (tmp_path / "run" / "representation.json").is_file()
    assert (tmp_path / "run" / "scores.csv").is_file()
    assert (tmp_path / "run" / "representation.svg").is_file()


def test_rank_recovers_planted_residue(fixture_dir, tmp_path):
    out = tmp_path / "run"
    assert run_cli("scan", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--property", str(fixture_dir / "property.csv"),
                   "--selection", "all", "--outdir", str(out)) == 0
    assert run_cli("rank", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--representation", str(out / "representation.json"),
                   "--outdir", str(out)) == 0
    rows = (out / "ranking.csv").read_text().splitlines()
    assert rows[0] == "rank,residue_seq,residue_name,cr"
    truth = json.loads((fixture_dir / "truth.json").read_text())
    top = rows[1].split(",")
    assert int(top[1]) in truth["signal_residues"]


def test_missing_input_exit_2(tmp_path, capsys):
    rc = run_cli("scan", "--trajectory", str(tmp_path / "nope.pdb"),
                 "--property", str(tmp_path / "nope.csv"),
                 "--outdir", str(tmp_path / "out"))
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("bad_input:")


def test_refuses_overwrite_without_force(fixture_dir, tmp_path):
    out = tmp_path / "run"
    args = ("scan", "--trajectory", str(fixture_dir / "trajectory.pdb"),
            "--property", str(fixture_dir / "property.csv"),
            "--selection", "all", "--outdir", str(out))
    assert run_cli(*args) == 0
    assert run_cli(*args) == 2
    assert run_cli(*args, "--force") == 0


def test_thread_count_does_not_change_bytes(fixture_dir, tmp_path):
    outs = []
    for threads in ("1", "8"):
        out = tmp_path / f"run{threads}"
        assert run_cli("scan", "--trajectory",
                       str(fixture_dir / "trajectory.pdb"),
                       "--property", str(fixture_dir / "property.csv"),
                       "--selection", "all", "--threads", threads,
                       "--outdir", str(out)) == 0
        outs.append((out / "grid.csv").read_bytes())
    assert outs[0] == outs[1]


def test_repeated_runs_byte_identical(fixture_dir, tmp_path):
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run_cli("scan", "--trajectory",
                       str(fixture_dir / "trajectory.pdb"),
                       "--property", str(fixture_dir / "property.csv"),
                       "--selection", "all", "--outdir", str(out)) == 0
        blobs.append((out / "grid.csv").read_bytes()
                     + (out / "scores.csv").read_bytes()
                     + (out / "representation.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_prep_orients_reference(fixture_dir, tmp_path):
    out = tmp_path / "prep"
    assert run_cli("prep", "--reference", str(fixture_dir / "reference.pdb"),
                   "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--selection", "all", "--outdir", str(out)) == 0
    oriented = parse_pdb((out / "oriented_reference.pdb").read_text())
    np.testing.assert_allclose(oriented.coords.mean(axis=0), [0, 0, 0],
                               atol=5e-3)  # PDB stores 3 decimals
    aligned = parse_trajectory((out / "aligned_trajectory.pdb").read_text(),
                               "multi-model-pdb")
    assert aligned.n_frames == 400


def test_rmsd_and_distance_commands(fixture_dir, tmp_path):
    rmsd_out = tmp_path / "rmsd.csv"
    assert run_cli("rmsd", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--reference", str(fixture_dir / "reference.pdb"),
                   "--selection", "all", "--out", str(rmsd_out)) == 0
    series = parse_property_csv(rmsd_out.read_text())
    assert len(series) == 400
    assert np.all(series.values >= 0)

    dist_out = tmp_path / "dist.csv"
    assert run_cli("distance", "--trajectory",
                   str(fixture_dir / "trajectory.pdb"),
                   "--res-a", "1", "--res-b", "3", "--out", str(dist_out)) == 0
    series = parse_property_csv(dist_out.read_text())
    assert np.all(series.values > 0)


def test_network_and_report(fixture_dir, tmp_path):
    out = tmp_path / "run"
    assert run_cli("scan", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--property", str(fixture_dir / "property.csv"),
                   "--selection", "all", "--outdir", str(out)) == 0
    assert run_cli("rank", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--representation", str(out / "representation.json"),
                   "--outdir", str(out)) == 0
    assert run_cli("network", "--trajectory",
                   str(fixture_dir / "trajectory.pdb"),
                   "--ranking", str(out / "ranking.csv"),
                   "--property", str(fixture_dir / "property.csv"),
                   "--k", "3", "--outdir", str(out)) == 0
    net = json.loads((out / "network.json").read_text())
    assert len(net["nodes"]) == 3
    assert len(net["edges"]) == 3
    for edge in net["edges"]:
        assert set(edge["states"]) == {"low", "mid", "high"}

    assert run_cli("report", "--rundir", str(out)) == 0
    report = json.loads((out / "report.json").read_text())
    assert {"grid", "ranking", "network"} <= set(report["artifacts"])
    assert (out / "report.txt").is_file()


def test_config_file_supplies_defaults(fixture_dir, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('selection = "all"\nbins = 10\n')
    out = tmp_path / "run"
    assert run_cli("scan", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--property", str(fixture_dir / "property.csv"),
                   "--config", str(cfg), "--outdir", str(out)) == 0
    assert (out / "grid.csv").is_file()


def test_partial_outputs_removed_on_failure(fixture_dir, tmp_path):
    out = tmp_path / "run"
    # valid scan first, then rank against a corrupt representation file
    assert run_cli("scan", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                   "--property", str(fixture_dir / "property.csv"),
                   "--selection", "all", "--outdir", str(out)) == 0
    bad_rep = tmp_path / "bad.json"
    bad_rep.write_text("{}")
    rc = run_cli("rank", "--trajectory", str(fixture_dir / "trajectory.pdb"),
                 "--representation", str(bad_rep), "--outdir", str(out))
    assert rc == 2
    assert not (out / "ranking.csv").exists()


def test_synth_subcommand_round_trips(tmp_path):
    out = tmp_path / "fix"
    assert run_cli("synth", "--outdir", str(out), "--frames", "50",
                   "--residues", "4", "--signal", "2", "--noise", "0.05",
                   "--seed", "1") == 0
    traj = parse_trajectory((out / "trajectory.pdb").read_text(),
                            "multi-model-pdb")
    assert traj.n_frames == 50
    prop = parse_property_csv((out / "property.csv").read_text())
    assert len(prop) == 50
    truth = json.loads((out / "truth.json").read_text())
    assert truth["signal_residues"] == [2]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rxcoord.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
