"""Deterministic 2-component PCA of a feature matrix.

Columns are mean-centered only (kernel values are already commensurate
in [0, 1]); an optional unit-variance scaling flag exists for raw
coordinate inputs. The covariance uses population normalization (1/F).
When F < A the F x F Gram matrix is decomposed instead and eigenvectors
are mapped back; both paths agree to numerical precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import FeatureMatrix, LambdaTriple
from .linalg import JACOBI_MAX_DIM, jacobi_eigh, power_top_k

RANK_DEFICIENT_RTOL = 1e-12


@dataclass(frozen=True)
class Representation:
    scores: np.ndarray  # (F, 2) PC1/PC2 per frame
    loadings: np.ndarray  # (A, 2), orthonormal columns
    eigenvalues: np.ndarray  # (2,), descending
    column_means: np.ndarray  # (A,)
    column_scales: np.ndarray  # (A,), ones unless unit-variance scaling
    lambda_: LambdaTriple | None
    rank_deficient: bool

    @property
    def pc1(self) -> np.ndarray:
        return self.scores[:, 0]


def _as_matrix(features) -> tuple[np.ndarray, LambdaTriple | None]:
    if isinstance(features, FeatureMatrix):
        return features.values, features.lambda_
    return np.asarray(features, dtype=float), None


def _fix_signs(loadings: np.ndarray, scores: np.ndarray) -> None:
    for j in range(loadings.shape[1]):
        i = int(np.argmax(np.abs(loadings[:, j])))
        if loadings[i, j] < 0:
            loadings[:, j] = -loadings[:, j]
            scores[:, j] = -scores[:, j]


def pca2(features, scale: str = "none", method: str = "auto") -> Representation:
    """Project frames onto the top-2 principal components.

    ``scale`` is ``none`` (default, center only) or ``unit-variance``.
    ``method`` selects the decomposition path: ``auto`` uses the Gram
    matrix when F < A, else the covariance; ``covariance`` / ``gram``
    force one path. Loading signs follow the largest-|entry|-positive
    convention so output is deterministic.
    """
    x, lam = _as_matrix(features)
    n_frames, n_cols = x.shape
    if n_frames < 3:
        raise ValueError("need at least 3 frames for PCA")
    if n_cols < 2:
        raise ValueError("need at least 2 feature columns for PCA")
    means = x.mean(axis=0)
    xc = x - means
    if scale == "unit-variance":
        scales = np.std(xc, axis=0)
        scales[scales == 0.0] = 1.0
        xc = xc / scales
    elif scale == "none":
        scales = np.ones(n_cols)
    else:
        raise ValueError(f"unknown scaling mode {scale!r}")

    if method == "auto":
        method = "gram" if n_frames < n_cols else "covariance"
    if method == "covariance":
        cov = xc.T @ xc / n_frames
        eigvals, eigvecs = _top2(cov)
        loadings = eigvecs
    elif method == "gram":
        gram = xc @ xc.T / n_frames
        eigvals, u = _top2(gram)
        loadings = np.empty((n_cols, 2))
        for j in range(2):
            w = xc.T @ u[:, j]
            norm = np.linalg.norm(w)
            loadings[:, j] = w / norm if norm > 0 else 0.0
    else:
        raise ValueError(f"unknown method {method!r}")

    eigvals = np.maximum(eigvals, 0.0)
    scores = xc @ loadings
    _fix_signs(loadings, scores)
    rank_deficient = bool(eigvals[1] < RANK_DEFICIENT_RTOL * max(eigvals[0], 1e-300))
    return Representation(scores=scores, loadings=loadings, eigenvalues=eigvals,
                          column_means=means, column_scales=scales,
                          lambda_=lam, rank_deficient=rank_deficient)


def _top2(sym: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if sym.shape[0] <= JACOBI_MAX_DIM:
        vals, vecs = jacobi_eigh(sym)
        return vals[:2].copy(), vecs[:, :2].copy()
    return power_top_k(sym, 2)


def project(rep: Representation, features) -> np.ndarray:
    """Project (possibly held-out) frames onto a fitted basis."""
    x, _ = _as_matrix(features)
    if x.shape[1] != len(rep.column_means):
        raise ValueError("feature width does not match fitted representation")
    return (x - rep.column_means) / rep.column_scales @ rep.loadings
