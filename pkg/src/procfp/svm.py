"""Soft-margin RBF C-SVM trained by SMO, with a one-vs-one multiclass wrapper.

The binary solver optimizes the standard C-SVM dual with analytic updates
on the maximal-violating pair: at each step the pair of multipliers with
the largest KKT violation is selected and moved jointly along the equality
constraint, clipped to the box [0, C]. Convergence is declared when the
violation gap falls below ``kkt_tolerance``.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from .validation import as_labels, as_matrix, as_vector

_HARD_ITERATION_CAP = 200_000


def rbf_kernel(u, v, gamma: float) -> float:
    """exp(-gamma * ||u - v||^2) for a single pair of vectors."""
    u = as_vector(u)
    v = as_vector(v, length=len(u))
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    diff = u - v
    return float(np.exp(-gamma * float(diff @ diff)))


def rbf_kernel_matrix(A, B, gamma: float) -> np.ndarray:
    """Pairwise RBF kernel between the rows of A and the rows of B."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    sq = (
        np.sum(A**2, axis=1)[:, None]
        + np.sum(B**2, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    return np.exp(-gamma * sq)


class BinarySvc(BaseEstimator):
    """Binary soft-margin C-SVM with an RBF kernel, trained by SMO.

    Parameters
    ----------
    C : soft-margin penalty, > 0.
    gamma : RBF width, > 0.
    kkt_tolerance : KKT violation gap at which training stops.
    max_passes : consecutive no-progress pair selections tolerated before
        giving up; defaults to 10 * n_samples at fit time. Hitting the
        limit is reported with a warning, not an error.

    Fitted attributes: ``support_vectors_``, ``dual_coef_`` (alpha_i * y_i),
    ``intercept_``, ``dual_objective_``, ``converged_``, ``n_iter_``.
    """

    def __init__(self, C=1.0, gamma=1.0, kkt_tolerance=1e-3, max_passes=None):
        self.C = C
        self.gamma = gamma
        self.kkt_tolerance = kkt_tolerance
        self.max_passes = max_passes

    def fit(self, X, y):
        if self.C <= 0 or self.gamma <= 0 or self.kkt_tolerance <= 0:
            raise ValueError("C, gamma and kkt_tolerance must all be > 0")
        X = as_matrix(X, min_samples=2)
        y = np.asarray(y, dtype=int)
        if y.shape != (X.shape[0],) or not np.all(np.abs(y) == 1):
            raise ValueError("targets must be +1/-1, one per sample")
        if np.all(y == y[0]):
            raise ValueError("training data contains a single class")

        n = len(y)
        C = float(self.C)
        tol = float(self.kkt_tolerance)
        max_stall = self.max_passes if self.max_passes is not None else 10 * n

        K = rbf_kernel_matrix(X, X, self.gamma)
        yf = y.astype(float)
        alpha = np.zeros(n)
        u = np.zeros(n)  # decision values without the bias
        pos = y == 1

        converged = False
        stall = 0
        iterations = 0
        m = 1.0
        big_m = -1.0
        while iterations < _HARD_ITERATION_CAP:
            rho = yf - u
            up = (pos & (alpha < C)) | (~pos & (alpha > 0))
            low = (~pos & (alpha < C)) | (pos & (alpha > 0))
            if not up.any() or not low.any():
                break
            i = int(np.argmax(np.where(up, rho, -np.inf)))
            j = int(np.argmin(np.where(low, rho, np.inf)))
            m = rho[i]
            big_m = rho[j]
            if m - big_m <= tol:
                converged = True
                break

            ai_old = alpha[i]
            aj_old = alpha[j]
            yi = yf[i]
            yj = yf[j]
            if yi != yj:
                lo = max(0.0, aj_old - ai_old)
                hi = min(C, C + aj_old - ai_old)
            else:
                lo = max(0.0, ai_old + aj_old - C)
                hi = min(C, ai_old + aj_old)
            eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if eta > 1e-12:
                aj = aj_old + yj * (rho[j] - rho[i]) / eta
                aj = min(hi, max(lo, aj))
            else:
                # coincident points: the dual is linear along the pair, so
                # step fully to the boundary in the ascent direction
                aj = hi if yj * (rho[j] - rho[i]) > 0 else lo

            # snap to the exact bounds so stale round-off never parks a
            # multiplier infinitesimally inside the box
            snap = 1e-10 * C
            if aj < snap:
                aj = 0.0
            elif aj > C - snap:
                aj = C

            iterations += 1
            if abs(aj - aj_old) < 1e-12 * (abs(aj) + abs(aj_old) + 1.0):
                stall += 1
                if stall >= max_stall:
                    break
                continue
            stall = 0
            ai = ai_old + yi * yj * (aj_old - aj)
            ai = min(C, max(0.0, ai))
            if ai < snap:
                ai = 0.0
            elif ai > C - snap:
                ai = C
            alpha[i] = ai
            alpha[j] = aj
            u += (ai - ai_old) * yi * K[i] + (aj - aj_old) * yj * K[j]

        if not converged:
            warnings.warn(
                f"SMO stopped before reaching KKT tolerance {tol} "
                f"(gap {m - big_m:.3g} after {iterations} updates)",
                RuntimeWarning,
            )

        coef = alpha * yf
        self.dual_objective_ = float(alpha.sum() - 0.5 * coef @ K @ coef)
        keep = alpha > 1e-12 * C
        self.support_vectors_ = X[keep].copy()
        self.dual_coef_ = coef[keep]
        self.intercept_ = float((m + big_m) / 2.0)
        self.converged_ = converged
        self.n_iter_ = iterations
        return self

    def decision_function(self, X) -> np.ndarray | float:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = as_matrix(X[None, :] if single else X)
        if len(self.dual_coef_) == 0:
            values = np.full(X.shape[0], self.intercept_)
        else:
            if X.shape[1] != self.support_vectors_.shape[1]:
                raise ValueError(
                    f"expected {self.support_vectors_.shape[1]} features, got {X.shape[1]}"
                )
            values = rbf_kernel_matrix(X, self.support_vectors_, self.gamma) @ self.dual_coef_
            values += self.intercept_
        return float(values[0]) if single else values

    def predict(self, X) -> np.ndarray | int:
        decision = self.decision_function(X)
        if np.isscalar(decision):
            return 1 if decision >= 0 else -1
        return np.where(decision >= 0, 1, -1)


class MulticlassSvc(BaseEstimator):
    """One-vs-one ensemble of binary RBF SVMs.

    One binary model is trained per unordered class pair; prediction is by
    majority vote, with ties broken by the summed |decision value| margin
    and then by class order (classes are sorted lexicographically).
    """

    def __init__(self, C=1.0, gamma=1.0, kkt_tolerance=1e-3, max_passes=None):
        self.C = C
        self.gamma = gamma
        self.kkt_tolerance = kkt_tolerance
        self.max_passes = max_passes

    def fit(self, X, y):
        X = as_matrix(X, min_samples=2)
        y = as_labels(y, length=X.shape[0])
        classes = sorted(set(y))
        if len(classes) < 2:
            raise ValueError("need at least 2 classes")
        self.classes_ = tuple(classes)
        index = {c: k for k, c in enumerate(classes)}
        codes = np.array([index[label] for label in y])

        self.models_ = {}
        for a in range(len(classes)):
            for b in range(a + 1, len(classes)):
                mask = (codes == a) | (codes == b)
                targets = np.where(codes[mask] == a, 1, -1)
                model = BinarySvc(
                    C=self.C,
                    gamma=self.gamma,
                    kkt_tolerance=self.kkt_tolerance,
                    max_passes=self.max_passes,
                )
                self.models_[(a, b)] = model.fit(X[mask], targets)
        return self

    def vote(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Per-class vote counts and summed winning margins for each sample."""
        X = as_matrix(X)
        k = len(self.classes_)
        votes = np.zeros((X.shape[0], k), dtype=int)
        margins = np.zeros((X.shape[0], k))
        for (a, b), model in self.models_.items():
            decision = np.atleast_1d(model.decision_function(X))
            wins_a = decision >= 0
            votes[wins_a, a] += 1
            votes[~wins_a, b] += 1
            margins[wins_a, a] += np.abs(decision[wins_a])
            margins[~wins_a, b] += np.abs(decision[~wins_a])
        return votes, margins

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        votes, margins = self.vote(X[None, :] if single else X)
        winners = []
        for v, g in zip(votes, margins):
            best = max(range(len(self.classes_)), key=lambda c: (v[c], g[c], -c))
            winners.append(self.classes_[best])
        out = np.asarray(winners, dtype=object)
        return out[0] if single else out
