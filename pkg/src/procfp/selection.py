"""Feature selection and reduction: MI ranking, Q% subsets, PCA, scaling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .validation import as_labels, as_matrix, as_vector


def quantile_bins(values, bins: int) -> np.ndarray:
    """Equal-frequency bin index per sample.

    Bin assignment is a function of the value alone: tied values share the
    bin of their first rank, so the result is invariant to sample order and
    a constant feature collapses into a single bin.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    v = as_vector(values)
    n = len(v)
    order = np.argsort(v, kind="stable")
    sorted_v = v[order]
    is_new = np.empty(n, dtype=bool)
    is_new[0] = True
    is_new[1:] = sorted_v[1:] != sorted_v[:-1]
    min_rank = np.maximum.accumulate(np.where(is_new, np.arange(n), 0))
    assignment = np.empty(n, dtype=int)
    assignment[order] = min_rank * bins // n
    return assignment


def mutual_information(values, labels, bins: int = 10) -> float:
    """Plug-in mutual information (nats) between a feature and labels.

    The feature is discretized into equal-frequency bins and the joint
    histogram with the labels gives I(F;L) = sum p(f,l) ln[p(f,l)/(p(f)p(l))].
    """
    v = as_vector(values)
    y = as_labels(labels, length=len(v))
    if len(v) < 2:
        raise ValueError("need at least 2 samples")
    fb = quantile_bins(v, bins)
    _, lb = np.unique(y, return_inverse=True)
    joint = np.zeros((fb.max() + 1, lb.max() + 1))
    np.add.at(joint, (fb, lb), 1.0)
    n = float(len(v))
    pf = joint.sum(axis=1)
    pl = joint.sum(axis=0)
    nz = joint > 0
    outer = np.outer(pf, pl)
    info = np.sum(joint[nz] / n * np.log(joint[nz] * n / outer[nz]))
    return max(0.0, float(info))


@dataclass(frozen=True, eq=False)
class MiRanking:
    """Per-feature mutual information in canonical feature order."""

    mi: np.ndarray

    def __post_init__(self):
        mi = np.array(self.mi, dtype=float)
        if mi.ndim != 1 or len(mi) == 0:
            raise ValueError("ranking must hold at least one feature")
        if np.any(mi < 0):
            raise ValueError("mutual information values must be >= 0")
        mi.flags.writeable = False
        object.__setattr__(self, "mi", mi)

    @property
    def max_mi(self) -> float:
        return float(self.mi.max())


def rank_features(X, labels, bins: int = 10) -> MiRanking:
    """Mutual information of every feature column with the labels."""
    X = as_matrix(X, min_samples=2)
    y = as_labels(labels, length=X.shape[0])
    if len(np.unique(y)) < 2:
        raise ValueError("need at least 2 distinct labels to rank features")
    return MiRanking(
        np.array([mutual_information(X[:, j], y, bins) for j in range(X.shape[1])])
    )


def q_subset(ranking: MiRanking, q: int) -> np.ndarray:
    """Indices of features whose MI is at most q% below the maximum.

    The threshold is inclusive, so the result is never empty and grows
    monotonically with q.
    """
    if not 0 < q <= 100:
        raise ValueError("q must be an integer percent in (0, 100]")
    threshold = (1.0 - q / 100.0) * ranking.max_mi
    return np.flatnonzero(ranking.mi >= threshold)


class Standardizer(BaseEstimator):
    """Per-feature z-scoring with training statistics.

    Constant training columns keep scale 1 so they pass through centered;
    fitting fails only if every column is constant.
    """

    def fit(self, X, y=None):
        X = as_matrix(X, min_samples=1)
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.constant_mask_ = X.min(axis=0) == X.max(axis=0)
        if np.all(self.constant_mask_):
            raise ValueError("all feature columns are constant")
        self.scale_ = np.where(self.constant_mask_, 1.0, scale)
        return self

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = as_matrix(X[None, :] if single else X)
        if X.shape[1] != len(self.mean_):
            raise ValueError(f"expected {len(self.mean_)} features, got {X.shape[1]}")
        out = (X - self.mean_) / self.scale_
        return out[0] if single else out

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform(X)


class PrincipalComponents(BaseEstimator):
    """PCA by eigendecomposition of the covariance matrix.

    Components are rows sorted by descending eigenvalue, each signed so its
    largest-magnitude entry is positive. ``n_components_`` is the smallest
    dimension whose cumulative explained-variance fraction reaches
    ``variance_fraction`` (at least 1; zero-variance data keeps one
    component and sets ``degenerate_``).
    """

    def __init__(self, variance_fraction: float = 0.95):
        self.variance_fraction = variance_fraction

    def fit(self, X, y=None):
        if not 0 < self.variance_fraction <= 1:
            raise ValueError("variance_fraction must be in (0, 1]")
        X = as_matrix(X, min_samples=2)
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = centered.T @ centered / (X.shape[0] - 1)
        eigenvalues, eigenvectors = np.linalg.eigh(cov)
        order = np.argsort(eigenvalues, kind="stable")[::-1]
        eigenvalues = np.clip(eigenvalues[order], 0.0, None)
        components = eigenvectors[:, order].T
        for row in components:
            peak = np.argmax(np.abs(row))
            if row[peak] < 0:
                row *= -1.0

        total = float(eigenvalues.sum())
        self.degenerate_ = total == 0.0
        if self.degenerate_:
            ratios = np.zeros_like(eigenvalues)
            retained = 1
        else:
            ratios = eigenvalues / total
            cumulative = np.cumsum(ratios)
            retained = int(np.searchsorted(cumulative, self.variance_fraction - 1e-12) + 1)
            retained = min(max(retained, 1), len(eigenvalues))
        self.explained_variance_ = eigenvalues
        self.explained_variance_ratio_ = ratios
        self.components_ = components
        self.n_components_ = retained
        return self

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = as_matrix(X[None, :] if single else X)
        if X.shape[1] != len(self.mean_):
            raise ValueError(f"expected {len(self.mean_)} features, got {X.shape[1]}")
        out = (X - self.mean_) @ self.components_[: self.n_components_].T
        return out[0] if single else out

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform(X)
