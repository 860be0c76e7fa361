"""Angular kernel feature map and theta-angle reaction coordinates.

Per atom at (x, y, z) with r = sqrt(x^2 + y^2 + z^2), the kernel value is

    l1 * cos(x/r)^2 + l2 * cos(y/r)^2 + l3 * sin(z/r)^2

with the weights constrained to the unit simplex. Arguments x/r, y/r,
z/r are dimensionless ratios in [-1, 1], treated as radians. Because
the ratios are scale-free the kernel depends only on the atom's
direction from the origin, which is why structures must be centered
first. Theta angles are arccos(z/r) in [0, pi].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import MissingCA
from .ingest import PropertySeries, Selection, Trajectory

RADIUS_EPSILON = 1e-9  # Angstrom; atoms closer to the origin are clamped


@dataclass(frozen=True)
class LambdaTriple:
    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for v in (self.l1, self.l2, self.l3):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"lambda weight {v} outside [0, 1]")
        if abs(self.l1 + self.l2 + self.l3 - 1.0) > 1e-12:
            raise ValueError("lambda weights must sum to 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # (F, A) kernel values in [0, 1]
    lambda_: LambdaTriple
    selection: Selection

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != len(self.selection):
            raise ValueError("feature matrix shape does not match selection")
        object.__setattr__(self, "values", vals)


def lambda_grid(step: float = 0.25) -> list[LambdaTriple]:
    """All weight triples on the simplex with entries in multiples of ``step``.

    Lexicographically sorted. step 0.25 yields the 15 standard
    combinations.
    """
    n = round(1.0 / step)
    if n <= 0 or abs(n * step - 1.0) > 1e-12:
        raise ValueError("1/step must be a positive integer")
    grid = []
    for i in range(n, -1, -1):
        for j in range(n - i, -1, -1):
            k = n - i - j
            grid.append(LambdaTriple(i * step, j * step, k * step))
    grid.sort(key=lambda t: t.as_tuple())
    return grid


def radial_norm(p: np.ndarray) -> float:
    """Distance from the origin, clamped below at RADIUS_EPSILON."""
    r = float(np.linalg.norm(np.asarray(p, dtype=float)))
    return max(r, RADIUS_EPSILON)


def kernel_value(p: np.ndarray, lam: LambdaTriple) -> float:
    p = np.asarray(p, dtype=float)
    r = radial_norm(p)
    return (lam.l1 * np.cos(p[0] / r) ** 2
            + lam.l2 * np.cos(p[1] / r) ** 2
            + lam.l3 * np.sin(p[2] / r) ** 2)


def _radii(coords: np.ndarray) -> np.ndarray:
    r = np.sqrt(np.sum(coords**2, axis=-1))
    n_degenerate = int(np.count_nonzero(r < RADIUS_EPSILON))
    if n_degenerate:
        warnings.warn(
            f"{n_degenerate} atom position(s) within {RADIUS_EPSILON} A of the "
            "origin; radius clamped", RuntimeWarning)
    return np.maximum(r, RADIUS_EPSILON)


def kernel_features(traj: Trajectory, selection: Selection,
                    lam: LambdaTriple) -> FeatureMatrix:
    """Kernel value of every selected atom in every frame (F x A)."""
    coords = traj.frames[:, list(selection.indices), :]
    r = _radii(coords)
    values = (lam.l1 * np.cos(coords[..., 0] / r) ** 2
              + lam.l2 * np.cos(coords[..., 1] / r) ** 2
              + lam.l3 * np.sin(coords[..., 2] / r) ** 2)
    return FeatureMatrix(values=values, lambda_=lam, selection=selection)


def theta_angle(p: np.ndarray) -> float:
    """Polar angle arccos(z/r) in [0, pi]; z/r clamped to [-1, 1]."""
    p = np.asarray(p, dtype=float)
    r = radial_norm(p)
    return float(np.arccos(np.clip(p[2] / r, -1.0, 1.0)))


def theta_series(traj: Trajectory, residue_seq: int) -> PropertySeries:
    """Per-frame theta angle of one residue's CA atom."""
    idx = None
    for i, a in enumerate(traj.atoms):
        if a.residue_seq == residue_seq and a.name == "CA":
            idx = i
            break
    if idx is None:
        raise MissingCA(residue_seq)
    coords = traj.frames[:, idx, :]
    r = _radii(coords)
    values = np.arccos(np.clip(coords[:, 2] / r, -1.0, 1.0))
    return PropertySeries(name=f"theta_ca_{residue_seq}", units="rad", values=values)
