"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np


def as_matrix(X, min_samples: int = 1) -> np.ndarray:
    """Coerce to a 2-D float array of finite values."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={X.ndim}")
    if X.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite values")
    return X


def as_vector(x, length: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D array, got ndim={x.ndim}")
    if length is not None and len(x) != length:
        raise ValueError(f"expected length {length}, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    return x


def as_labels(y, length: int | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=object)
    if y.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if length is not None and len(y) != length:
        raise ValueError(f"expected {length} labels, got {len(y)}")
    return y
