import numpy as np
import pytest

from rxcoord import align, errors
from rxcoord.ingest import Selection, Structure, Trajectory

from oracles import min_rmsd_grid_refine
from test_ingest import residue_atoms


def full_selection(n):
    return Selection(indices=tuple(range(n)), expr="all")


def rotation_about_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_centroid_midpoint():
    np.testing.assert_allclose(
        align.centroid(np.array([[0.0, 0, 0], [2.0, 0, 0]])), [1.0, 0, 0])


def test_centroid_single_point():
    np.testing.assert_allclose(align.centroid(np.array([[3.0, -1, 2]])), [3, -1, 2])


def test_centroid_matches_naive_sum(rng):
    pts = rng.standard_normal((100, 3)) * 5
    naive = np.array([sum(pts[:, k]) / len(pts) for k in range(3)])
    np.testing.assert_allclose(align.centroid(pts), naive, atol=1e-12)


def test_translate_to_origin(rng):
    pts = rng.standard_normal((50, 3)) + 7.0
    out = align.translate_to_origin(pts)
    np.testing.assert_allclose(align.centroid(out), [0, 0, 0], atol=1e-9)


def test_gyration_tensor_symmetric_psd(rng):
    pts = rng.standard_normal((60, 3)) * [3, 2, 1]
    g = align.gyration_tensor(pts)
    np.testing.assert_allclose(g, g.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(g) >= -1e-12)


def test_principal_axes_rod_maps_z_to_x():
    pts = np.array([[0.0, 0, 1], [0.0, 0, -1], [0.0, 0, 0.5], [0.0, 0, -0.5],
                    [0.01, 0, 0], [-0.01, 0, 0]])
    r = align.principal_axes_rotation(pts)
    rotated = pts @ r.T
    # the long (z) axis ends up along x
    spans = rotated.max(axis=0) - rotated.min(axis=0)
    assert spans[0] == pytest.approx(2.0, abs=1e-6)


def test_principal_axes_fixed_point(rng):
    # Already-oriented ellipsoid: rotation is identity up to the sign fix.
    pts = rng.standard_normal((500, 3)) * [5.0, 2.0, 1.0]
    pts -= pts.mean(axis=0)
    r = align.principal_axes_rotation(pts)
    np.testing.assert_allclose(np.abs(r), np.eye(3), atol=0.05)


def test_principal_axes_diagonalizes_random_clouds(rng):
    for _ in range(20):
        pts = rng.standard_normal((80, 3)) * rng.uniform(1, 6, 3)
        r = align.principal_axes_rotation(pts)
        # invariants on the rotation itself
        np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-9)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-9)
        # explicit recomputation of the tensor after rotating
        g = align.gyration_tensor(pts @ r.T)
        off = g - np.diag(np.diag(g))
        assert np.abs(off).max() < 1e-8
        assert g[0, 0] >= g[1, 1] >= g[2, 2]


def test_principal_axes_degenerate():
    # isotropic cloud: two largest eigenvalues coincide
    pts = np.array([[1.0, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0],
                    [0, 0, 1], [0, 0, -1]])
    with pytest.raises(errors.DegenerateAxes):
        align.principal_axes_rotation(pts)


# --- Kabsch ------------------------------------------------------------------


def test_kabsch_identity(rng):
    pts = rng.standard_normal((10, 3))
    res = align.kabsch(pts, pts, full_selection(10))
    assert res.rmsd == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(res.rotation, np.eye(3), atol=1e-9)
    np.testing.assert_allclose(res.translation, [0, 0, 0], atol=1e-9)


def test_kabsch_recovers_z_rotation(rng):
    pts = rng.standard_normal((8, 3))
    pts -= pts.mean(axis=0)
    rot = rotation_about_z(np.pi / 2)
    res = align.kabsch(pts, pts @ rot.T, full_selection(8))
    assert res.rmsd == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(res.rotation, rot, atol=1e-9)


def test_kabsch_matches_grid_refine_oracle(rng):
    mobile = rng.standard_normal((10, 3)) * 2
    target = rng.standard_normal((10, 3)) * 2
    res = align.kabsch(mobile, target, full_selection(10))
    oracle = min_rmsd_grid_refine(mobile, target)
    assert res.rmsd == pytest.approx(oracle, abs=1e-6)


def test_kabsch_invariant_under_rigid_motion_of_mobile(rng):
    mobile = rng.standard_normal((12, 3))
    target = rng.standard_normal((12, 3))
    sel = full_selection(12)
    base = align.kabsch(mobile, target, sel).rmsd
    rot = rotation_about_z(0.7) @ np.array(
        [[1, 0, 0], [0, np.cos(0.3), -np.sin(0.3)], [0, np.sin(0.3), np.cos(0.3)]])
    moved = mobile @ rot.T + np.array([5.0, -2.0, 1.0])
    assert align.kabsch(moved, target, sel).rmsd == pytest.approx(base, abs=1e-9)


def test_kabsch_too_few_atoms(rng):
    pts = rng.standard_normal((2, 3))
    with pytest.raises(errors.TooFewAtoms):
        align.kabsch(pts, pts, Selection(indices=(0, 1), expr="all"))


def test_kabsch_collinear():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0], [3.0, 0, 0]])
    with pytest.raises(errors.CollinearSelection):
        align.kabsch(pts, pts, full_selection(4))


def test_kabsch_reflection_corrected(rng):
    pts = rng.standard_normal((10, 3))
    mirrored = pts * [1.0, 1.0, -1.0]
    res = align.kabsch(pts, mirrored, full_selection(10))
    assert np.linalg.det(res.rotation) == pytest.approx(1.0, abs=1e-9)


# --- trajectory-level ops -----------------------------------------------------


def make_traj(frames, atoms=None):
    frames = np.asarray(frames, dtype=float)
    if atoms is None:
        atoms = residue_atoms(frames.shape[1] // 5)
    return Trajectory(atoms=atoms, frames=frames,
                      frame_ids=tuple(range(len(frames))))


def test_align_trajectory_idempotent(rng):
    atoms = residue_atoms(4)
    ref_coords = rng.standard_normal((len(atoms), 3)) * 3
    reference = Structure(atoms=atoms, coords=ref_coords)
    sel = full_selection(len(atoms))
    frames = np.stack([
        ref_coords @ rotation_about_z(a).T + t
        for a, t in [(0.5, [1, 2, 3]), (1.2, [-2, 0, 1]), (2.0, [0, 5, -1])]
    ])
    frames += rng.standard_normal(frames.shape) * 0.1
    traj = make_traj(frames, atoms)
    once = align.align_trajectory(traj, reference, sel)
    twice = align.align_trajectory(once, reference, sel)
    assert np.abs(twice.frames - once.frames).max() < 1e-6
    assert once.frame_ids == traj.frame_ids


def test_rmsd_series_zero_for_reference(rng):
    atoms = residue_atoms(3)
    coords = rng.standard_normal((len(atoms), 3))
    reference = Structure(atoms=atoms, coords=coords)
    traj = make_traj(np.stack([coords, coords]), atoms)
    series = align.rmsd_series(traj, reference, full_selection(len(atoms)))
    np.testing.assert_allclose(series.values, [0.0, 0.0], atol=1e-12)


def test_rmsd_series_single_displacement():
    atoms = residue_atoms(4, names=("CA",))
    coords = np.array([[0.0, 0, 0], [5, 0, 0], [0, 5, 0], [0, 0, 5]])
    reference = Structure(atoms=atoms, coords=coords)
    frame = coords.copy()
    frame[0, 0] += 2.0  # one atom moved 2 A among 4 selected
    traj = make_traj(frame[None, :, :], atoms)
    series = align.rmsd_series(traj, reference, full_selection(4))
    assert series.values[0] == pytest.approx(1.0, abs=1e-12)


def test_rmsd_series_matches_naive_loop(planted_small):
    traj, _, _ = planted_small
    reference = Structure(atoms=traj.atoms, coords=traj.frames[0])
    sel = full_selection(traj.n_atoms)
    series = align.rmsd_series(traj, reference, sel)
    for k in (0, 17, 311):
        acc = 0.0
        for i in range(traj.n_atoms):
            d = traj.frames[k, i] - reference.coords[i]
            acc += float(d @ d)
        assert series.values[k] == pytest.approx(np.sqrt(acc / traj.n_atoms),
                                                 abs=1e-12)


def test_ca_contact_distance_345():
    atoms = residue_atoms(2, names=("CA",))
    frame = np.array([[0.0, 0, 0], [3.0, 4.0, 0]])
    traj = make_traj(frame[None, :, :], atoms)
    series = align.ca_contact_distance(traj, 1, 2)
    assert series.values[0] == pytest.approx(5.0, abs=1e-12)


def test_ca_contact_distance_missing_ca():
    atoms = residue_atoms(2, names=("CB",))
    traj = make_traj(np.zeros((1, 2, 3)) + [[1, 0, 0], [0, 1, 0]], atoms)
    with pytest.raises(errors.MissingCA):
        align.ca_contact_distance(traj, 1, 2)


def test_two_state_distance_clusters():
    # Two planted states: CA pairs at 8.4 A and 14.1 A.
    atoms = residue_atoms(2, names=("CA",))
    frames = []
    for k in range(100):
        d = 8.4 if k < 50 else 14.1
        frames.append([[0.0, 0, 0], [d, 0, 0]])
    traj = make_traj(np.array(frames), atoms)
    series = align.ca_contact_distance(traj, 1, 2)
    np.testing.assert_allclose(np.unique(series.values), [8.4, 14.1], atol=1e-12)
