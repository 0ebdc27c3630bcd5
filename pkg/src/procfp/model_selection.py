"""Stratified cross-validation and hyperparameter grid search."""

from __future__ import annotations

import warnings
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import clone

from .svm import MulticlassSvc
from .validation import as_labels, as_matrix


class GridSearchResult(NamedTuple):
    C: float
    gamma: float
    accuracy: float


def stratified_folds(labels, k: int, seed: int = 0) -> np.ndarray:
    """Deterministic stratified fold assignment, one fold id per sample.

    Samples of each class are shuffled with the seeded generator and dealt
    round-robin over the k folds, so every sample lands in exactly one fold
    and class proportions stay as even as possible. Classes with fewer than
    k samples are allowed but reported with a warning.
    """
    y = as_labels(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(y) < k:
        raise ValueError(f"dataset of {len(y)} samples is smaller than k={k}")
    rng = np.random.default_rng(seed)
    fold = np.empty(len(y), dtype=int)
    for c in sorted(set(y)):
        idx = np.flatnonzero(y == c)
        if len(idx) < k:
            warnings.warn(
                f"class {c!r} has {len(idx)} samples for {k}-fold CV; "
                "folds will be as even as possible",
                RuntimeWarning,
            )
        perm = rng.permutation(idx)
        fold[perm] = np.arange(len(perm)) % k
    return fold


def cross_validate(X, y, estimator=None, k: int = 5, seed: int = 0) -> float:
    """Mean held-out accuracy over a stratified k-fold split.

    The estimator template (default ``MulticlassSvc()``) is cloned and
    refitted per fold; the same seed always produces the same folds and
    therefore the same accuracy.
    """
    X = as_matrix(X, min_samples=2)
    y = as_labels(y, length=X.shape[0])
    template = estimator if estimator is not None else MulticlassSvc()
    fold = stratified_folds(y, k, seed)
    accuracies = []
    for f in range(k):
        test = fold == f
        if not test.any():
            continue
        model = clone(template).fit(X[~test], y[~test])
        accuracies.append(float(np.mean(model.predict(X[test]) == y[test])))
    return float(np.mean(accuracies))


def grid_search(
    X,
    y,
    c_grid: Sequence[float],
    gamma_grid: Sequence[float],
    k: int = 5,
    seed: int = 0,
    kkt_tolerance: float = 1e-3,
    max_passes: int | None = None,
) -> GridSearchResult:
    """Exhaustive (C, gamma) search by cross-validated accuracy.

    Grids are evaluated in ascending order and only strictly better
    accuracy replaces the incumbent, so ties resolve to the smallest C and
    then the smallest gamma.
    """
    if len(c_grid) == 0 or len(gamma_grid) == 0:
        raise ValueError("grids must be non-empty")
    best: GridSearchResult | None = None
    for C in sorted(set(float(c) for c in c_grid)):
        for gamma in sorted(set(float(g) for g in gamma_grid)):
            accuracy = cross_validate(
                X,
                y,
                MulticlassSvc(C=C, gamma=gamma, kkt_tolerance=kkt_tolerance, max_passes=max_passes),
                k=k,
                seed=seed,
            )
            if best is None or accuracy > best.accuracy:
                best = GridSearchResult(C, gamma, accuracy)
    return best
