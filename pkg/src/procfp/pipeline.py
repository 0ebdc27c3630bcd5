"""End-to-end family classifier: scaling, MI subsets, PCA, RBF-SVM.

Training standardizes the fingerprint matrix, ranks features by mutual
information with the family label, and then for every Q in the grid builds
the Q% candidate subset, fits a per-Q PCA, and runs a cross-validated
(C, gamma) grid search. The Q with the best CV accuracy wins (ties go to
the smaller Q) and the final multiclass SVM is retrained on the full
training set with the winning parameters.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .model_selection import GridSearchResult, grid_search
from .selection import PrincipalComponents, Standardizer, q_subset, rank_features
from .svm import MulticlassSvc
from .validation import as_labels, as_matrix

DEFAULT_Q_GRID = (10, 15, 20, 25, 30, 35, 40, 45, 50)
DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)
DEFAULT_GAMMA_EXPONENTS = (-2, -1, 0, 1, 2)


def auto_gamma_grid(dimension: int, exponents=DEFAULT_GAMMA_EXPONENTS) -> tuple[float, ...]:
    """Gamma grid {2^j / d} scaled to the reduced dimension d."""
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    return tuple(2.0**j / dimension for j in exponents)


class FamilyClassifier(BaseEstimator):
    """Feature-selected, PCA-reduced, one-vs-one RBF C-SVM.

    Parameters mirror the training procedure: ``q_grid`` of candidate MI
    thresholds, ``bins`` for the MI histogram, PCA ``variance_fraction``,
    the ``c_grid``/``gamma_grid`` searched by ``folds``-fold CV (gamma_grid
    ``None`` means the auto grid scaled by each candidate's PCA dimension),
    and the fold-shuffle ``seed``. Everything is deterministic in
    (data, parameters).
    """

    def __init__(
        self,
        q_grid=DEFAULT_Q_GRID,
        bins=10,
        variance_fraction=0.95,
        c_grid=DEFAULT_C_GRID,
        gamma_grid=None,
        folds=5,
        kkt_tolerance=1e-3,
        max_passes=None,
        seed=0,
    ):
        self.q_grid = q_grid
        self.bins = bins
        self.variance_fraction = variance_fraction
        self.c_grid = c_grid
        self.gamma_grid = gamma_grid
        self.folds = folds
        self.kkt_tolerance = kkt_tolerance
        self.max_passes = max_passes
        self.seed = seed

    def fit(self, X, y):
        X = as_matrix(X, min_samples=2)
        y = as_labels(y, length=X.shape[0])
        if len(set(y)) < 2:
            raise ValueError("need at least 2 families")
        if not self.q_grid:
            raise ValueError("q_grid must be non-empty")

        self.standardizer_ = Standardizer().fit(X)
        Z = self.standardizer_.transform(X)
        self.ranking_ = rank_features(Z, y, bins=self.bins)

        candidates: dict[int, tuple[GridSearchResult, np.ndarray, PrincipalComponents]] = {}
        for q in sorted(int(q) for q in self.q_grid):
            indices = q_subset(self.ranking_, q)
            pca = PrincipalComponents(self.variance_fraction).fit(Z[:, indices])
            reduced = pca.transform(Z[:, indices])
            gamma_grid = (
                self.gamma_grid
                if self.gamma_grid is not None
                else auto_gamma_grid(pca.n_components_)
            )
            result = grid_search(
                reduced,
                y,
                c_grid=self.c_grid,
                gamma_grid=gamma_grid,
                k=self.folds,
                seed=self.seed,
                kkt_tolerance=self.kkt_tolerance,
                max_passes=self.max_passes,
            )
            candidates[q] = (result, indices, pca)

        best_q = None
        for q, (result, _, _) in candidates.items():
            if best_q is None or result.accuracy > candidates[best_q][0].accuracy:
                best_q = q
        result, indices, pca = candidates[best_q]

        self.q_ = best_q
        self.selected_indices_ = indices
        self.pca_ = pca
        self.cv_accuracy_ = result.accuracy
        self.cv_accuracy_by_q_ = {q: r.accuracy for q, (r, _, _) in candidates.items()}
        self.params_by_q_ = {q: (r.C, r.gamma) for q, (r, _, _) in candidates.items()}
        self.svm_ = MulticlassSvc(
            C=result.C,
            gamma=result.gamma,
            kkt_tolerance=self.kkt_tolerance,
            max_passes=self.max_passes,
        ).fit(pca.transform(Z[:, indices]), y)
        self.classes_ = self.svm_.classes_
        return self

    def reduce(self, X) -> np.ndarray:
        """Map raw fingerprints into the SVM's reduced feature space."""
        Z = self.standardizer_.transform(X)
        if Z.ndim == 1:
            return self.pca_.transform(Z[self.selected_indices_])
        return self.pca_.transform(Z[:, self.selected_indices_])

    def predict(self, X) -> np.ndarray:
        return self.svm_.predict(self.reduce(X))

    def vote(self, X) -> tuple[np.ndarray, np.ndarray]:
        """One-vs-one vote counts and margins in ``classes_`` order."""
        return self.svm_.vote(self.reduce(X))
