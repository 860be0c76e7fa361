"""Correlation ratio: the binned-regression metric that scores how well
a property tracks PC1.

Procedure: optionally z-score both series, split the PC1 range into
equal-width sections, drop thin sections, fit an ordinary least-squares
line through the per-section (mean PC1, mean property) points, and take

    cr = |slope| * R^2 / sqrt(V)

where V is the mean within-section population variance of the property.
A flat or collapsed input yields a degenerate result (cr computed with
V floored at epsilon) rather than an exception, so hyperparameter scans
never abort on one bad entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllDegenerate
from .ingest import PropertySeries
from .kernel import LambdaTriple


@dataclass(frozen=True)
class CorrRatioConfig:
    n_bins: int = 20
    min_bin_count: int = 3
    standardize: bool = True
    epsilon_v: float = 1e-12

    def __post_init__(self):
        if self.n_bins < 2:
            raise ValueError("n_bins must be at least 2")
        if self.min_bin_count < 2:
            raise ValueError("min_bin_count must be at least 2")


@dataclass(frozen=True)
class CorrRatioResult:
    s: float  # |slope| of the binned fit
    r2: float
    v: float  # mean within-bin population variance
    cr: float
    bins_used: int
    degenerate: bool


def _zscore(x: np.ndarray) -> np.ndarray:
    std = float(np.std(x))
    if std <= 0.0:
        return x - np.mean(x)
    return (x - np.mean(x)) / std


def correlation_ratio(pc1: np.ndarray, prop: PropertySeries | np.ndarray,
                      cfg: CorrRatioConfig = CorrRatioConfig()) -> CorrRatioResult:
    pc1 = np.asarray(pc1, dtype=float)
    values = prop.values if isinstance(prop, PropertySeries) else np.asarray(prop, dtype=float)
    if pc1.shape != values.shape:
        raise ValueError("pc1 and property lengths differ")
    if len(pc1) < cfg.n_bins:
        raise ValueError(f"need at least n_bins={cfg.n_bins} frames, got {len(pc1)}")

    if cfg.standardize:
        pc1 = _zscore(pc1)
        values = _zscore(values)

    if values.max() == values.min():
        # Constant property: no slope, no spread, nothing to rank.
        return CorrRatioResult(s=0.0, r2=0.0, v=0.0, cr=0.0,
                               bins_used=0, degenerate=True)

    lo = float(pc1.min())
    hi = float(pc1.max())
    if hi <= lo:
        # PC1 collapsed to a point: a single bin, nothing to fit.
        return CorrRatioResult(s=0.0, r2=0.0, v=0.0, cr=0.0,
                               bins_used=1, degenerate=True)
    width = (hi - lo) / cfg.n_bins
    # Equal-width sections, right-closed last bin.
    bin_index = np.minimum(((pc1 - lo) / width).astype(int), cfg.n_bins - 1)

    bin_x = []
    bin_y = []
    bin_var = []
    for b in range(cfg.n_bins):
        mask = bin_index == b
        count = int(np.count_nonzero(mask))
        if count < cfg.min_bin_count:
            continue
        bin_x.append(float(np.mean(pc1[mask])))
        bin_y.append(float(np.mean(values[mask])))
        bin_var.append(float(np.var(values[mask])))

    bins_used = len(bin_x)
    if bins_used < 2:
        return CorrRatioResult(s=0.0, r2=0.0, v=0.0, cr=0.0,
                               bins_used=bins_used, degenerate=True)

    bx = np.array(bin_x)
    by = np.array(bin_y)
    v = float(np.mean(bin_var))

    sxx = float(np.sum((bx - bx.mean()) ** 2))
    sxy = float(np.sum((bx - bx.mean()) * (by - by.mean())))
    syy = float(np.sum((by - by.mean()) ** 2))
    slope = sxy / sxx if sxx > 0.0 else 0.0
    if syy > 0.0 and sxx > 0.0:
        resid = by - (by.mean() + slope * (bx - bx.mean()))
        r2 = 1.0 - float(np.sum(resid**2)) / syy
    else:
        r2 = 0.0

    s = abs(slope)
    cr = s * r2 / np.sqrt(max(v, cfg.epsilon_v))
    degenerate = v < cfg.epsilon_v
    return CorrRatioResult(s=s, r2=r2, v=v, cr=float(cr),
                           bins_used=bins_used, degenerate=degenerate)


def normalize_grid(results: list[tuple[LambdaTriple, CorrRatioResult]],
                   ) -> list[tuple[LambdaTriple, float]]:
    """Divide every cr by the grid maximum so the best entry reads 1.0."""
    if all(r.degenerate for _, r in results):
        raise AllDegenerate("every grid entry is degenerate; nothing to normalize")
    cr_max = max(r.cr for _, r in results)
    if cr_max <= 0.0:
        raise AllDegenerate("maximum correlation ratio is zero")
    return [(lam, r.cr / cr_max) for lam, r in results]
