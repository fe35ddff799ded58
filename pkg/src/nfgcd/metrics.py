"""Distance metrics used both for the interaction kernel and for graph building."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

EUCLIDEAN = "euclidean"
COSINE = "cosine"
MAHALANOBIS = "mahalanobis"
METRIC_KINDS = (EUCLIDEAN, COSINE, MAHALANOBIS)


@dataclass(frozen=True)
class MetricSpec:
    """Distance selector; ``precision`` is required (and only allowed) for Mahalanobis."""

    kind: str = EUCLIDEAN
    precision: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}, expected one of {METRIC_KINDS}")
        if self.kind == MAHALANOBIS:
            if self.precision is None:
                raise ValueError("mahalanobis metric requires a precision matrix")
            p = np.asarray(self.precision, dtype=float)
            if p.ndim != 2 or p.shape[0] != p.shape[1]:
                raise ValueError(f"precision matrix must be square, got shape {p.shape}")
            if not np.allclose(p, p.T, atol=1e-10):
                raise ValueError("precision matrix must be symmetric")
            try:
                np.linalg.cholesky(p)
            except np.linalg.LinAlgError:
                raise ValueError("precision matrix must be positive definite") from None
        elif self.precision is not None:
            raise ValueError(f"precision matrix only valid for mahalanobis, not {self.kind!r}")


def metric_distances(spec: MetricSpec, points: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Distances from ``query`` to every row of ``points``."""
    points = np.asarray(points, dtype=float)
    query = np.asarray(query, dtype=float)
    if points.shape[1] != query.shape[0]:
        raise ValueError(
            f"dimension mismatch: points have dim {points.shape[1]}, query has dim {query.shape[0]}"
        )
    if spec.kind == EUCLIDEAN:
        diff = points - query
        return np.sqrt(np.sum(diff * diff, axis=1))
    if spec.kind == COSINE:
        qn = np.sqrt(np.sum(query * query))
        pn = np.sqrt(np.sum(points * points, axis=1))
        if qn == 0.0 or np.any(pn == 0.0):
            raise ValueError("cosine distance undefined for zero vectors")
        sim = points @ query / (pn * qn)
        return 1.0 - sim
    diff = points - query
    q = np.einsum("ij,jk,ik->i", diff, spec.precision, diff)
    # tiny negatives from rounding are clamped before the sqrt
    return np.sqrt(np.maximum(q, 0.0))


def metric_distance(spec: MetricSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Scalar distance between two vectors under the selected metric."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(metric_distances(spec, x[None, :], y)[0])


def mahalanobis_precision(features: np.ndarray, ridge: float = 1e-3) -> np.ndarray:
    """Inverse of the ridged sample covariance.

    ``ridge`` is relative to the mean covariance diagonal. If the ridged
    matrix still fails a Cholesky factorization the ridge is doubled, up
    to 8 times, before giving up.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError(f"need at least 2 samples to estimate a covariance, got shape {x.shape}")
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")
    cov = np.cov(x, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    diag_mean = float(np.mean(np.diag(cov)))
    ridge_abs = ridge * diag_mean if diag_mean > 0 else ridge
    eye = np.eye(cov.shape[0])
    for _ in range(9):  # initial attempt + 8 doublings
        try:
            chol = scipy.linalg.cho_factor(cov + ridge_abs * eye, lower=True)
        except (scipy.linalg.LinAlgError, ValueError):
            ridge_abs *= 2.0
            continue
        prec = scipy.linalg.cho_solve(chol, eye)
        return (prec + prec.T) / 2.0
    raise ValueError(
        f"covariance singular even after ridge escalation (final ridge {ridge_abs:g})"
    )
