"""Rigid-body preprocessing: centering, principal-axes orientation,
Kabsch superposition, trajectory alignment, and geometric property series.

Everything is unit-mass (geometric centers, unweighted second moments).
Rotations act on column vectors: ``p' = R @ p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollinearSelection, DegenerateAxes, MissingCA, TooFewAtoms
from .ingest import PropertySeries, Selection, Structure, Trajectory
from .linalg import jacobi_eigh

DEGENERATE_AXES_RTOL = 1e-9
COLLINEAR_RTOL = 1e-9


@dataclass(frozen=True)
class AlignmentResult:
    rotation: np.ndarray  # (3, 3) proper rotation
    translation: np.ndarray  # (3,) Angstrom
    rmsd: float  # Angstrom


def centroid(coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    if coords.size == 0:
        raise TooFewAtoms("centroid of empty coordinate set")
    return coords.mean(axis=0)


def translate_to_origin(coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    return coords - centroid(coords)


def gyration_tensor(coords: np.ndarray) -> np.ndarray:
    """Unit-mass second-moment tensor about the geometric center."""
    centered = translate_to_origin(coords)
    return centered.T @ centered / len(centered)


def _fix_axis_signs(vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        i = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[i, j] < 0:
            vecs[:, j] = -vecs[:, j]
    return vecs


def principal_axes_rotation(coords: np.ndarray) -> np.ndarray:
    """Rotation mapping the gyration-tensor principal axes onto x, y, z.

    Axis convention: descending eigenvalues go to x, y, z. Each axis
    sign is fixed by making the eigenvector's largest-magnitude entry
    positive; if that leaves an improper rotation the third axis is
    negated.
    """
    tensor = gyration_tensor(coords)
    eigvals, eigvecs = jacobi_eigh(tensor)
    if eigvals[0] <= 0:
        raise DegenerateAxes("all points coincide; no principal axes")
    if (eigvals[0] - eigvals[1]) < DEGENERATE_AXES_RTOL * eigvals[0]:
        raise DegenerateAxes(
            "two largest gyration eigenvalues are equal; orientation underdetermined")
    rotation = _fix_axis_signs(eigvecs).T
    if np.linalg.det(rotation) < 0:
        rotation[2, :] = -rotation[2, :]
    return rotation


def kabsch(mobile: np.ndarray, target: np.ndarray,
           selection: Selection) -> AlignmentResult:
    """Optimal rigid superposition of ``mobile`` onto ``target``.

    The fit uses only the selected atoms; the returned transform
    applies to any coordinates: ``p' = R @ p + t``. Reflections are
    corrected by sign-flipping the smallest singular direction.
    """
    mobile = np.asarray(mobile, dtype=float)
    target = np.asarray(target, dtype=float)
    idx = list(selection.indices)
    if len(idx) < 3:
        raise TooFewAtoms(f"need at least 3 atoms to superpose, got {len(idx)}")
    m = mobile[idx]
    t = target[idx]
    cm = m.mean(axis=0)
    ct = t.mean(axis=0)
    mc = m - cm
    tc = t - ct
    sv = np.linalg.svd(mc, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= COLLINEAR_RTOL * sv[0]:
        raise CollinearSelection("selected atoms are (near-)collinear")
    u, s, vt = np.linalg.svd(mc.T @ tc)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    flip = np.diag([1.0, 1.0, d])
    rotation = vt.T @ flip @ u.T
    translation = ct - rotation @ cm
    moved = mc @ rotation.T
    rmsd = float(np.sqrt(np.mean(np.sum((moved - tc) ** 2, axis=1))))
    return AlignmentResult(rotation=rotation, translation=translation, rmsd=rmsd)


def align_trajectory(traj: Trajectory, reference: Structure,
                     selection: Selection) -> Trajectory:
    """Superpose every frame onto the reference via its own Kabsch fit.

    The per-frame transform is fitted on ``selection`` and applied to
    all atoms. Frames are independent; output placement is by frame
    index regardless of evaluation order.
    """
    frames = np.empty_like(traj.frames)
    for k in range(traj.n_frames):
        fit = kabsch(traj.frames[k], reference.coords, selection)
        frames[k] = traj.frames[k] @ fit.rotation.T + fit.translation
    return Trajectory(atoms=traj.atoms, frames=frames, frame_ids=traj.frame_ids)


def rmsd_series(traj: Trajectory, reference: Structure,
                selection: Selection) -> PropertySeries:
    """Per-frame RMSD over the selection, without re-fitting.

    Assumes the trajectory is already aligned; this is the property
    series used for folding-state analysis.
    """
    idx = list(selection.indices)
    diff = traj.frames[:, idx, :] - reference.coords[idx]
    values = np.sqrt(np.mean(np.sum(diff**2, axis=2), axis=1))
    return PropertySeries(name="rmsd", units="angstrom", values=values)


def _ca_index(traj: Trajectory, residue_seq: int) -> int:
    for i, a in enumerate(traj.atoms):
        if a.residue_seq == residue_seq and a.name == "CA":
            return i
    raise MissingCA(residue_seq)


def ca_contact_distance(traj: Trajectory, res_a: int, res_b: int) -> PropertySeries:
    """Per-frame distance between the CA atoms of two residues."""
    ia = _ca_index(traj, res_a)
    ib = _ca_index(traj, res_b)
    diff = traj.frames[:, ia, :] - traj.frames[:, ib, :]
    values = np.sqrt(np.sum(diff**2, axis=1))
    return PropertySeries(name=f"ca_distance_{res_a}_{res_b}",
                          units="angstrom", values=values)
