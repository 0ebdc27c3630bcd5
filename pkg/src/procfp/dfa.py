"""Detrended fluctuation analysis.

The exponent alpha is the log-log slope of the fluctuation function F(s)
against box size s: alpha ~ 0.5 for white noise, ~ 1.0 for 1/f noise and
~ 1.5 for a Brownian path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class DfaConfig:
    """Box-size grid and detrending order for the DFA estimator."""

    min_box: int = 4
    max_box_fraction: float = 0.25
    boxes_per_decade: int = 8
    detrend_order: int = 1

    def __post_init__(self):
        if self.min_box < 4:
            raise ValueError("min_box must be >= 4")
        if not 0 < self.max_box_fraction <= 1:
            raise ValueError("max_box_fraction must be in (0, 1]")
        if self.boxes_per_decade < 4:
            raise ValueError("boxes_per_decade must be >= 4")
        if self.detrend_order < 1:
            raise ValueError("detrend_order must be >= 1")


class DfaResult(NamedTuple):
    alpha: float
    degenerate: bool


def series_values(series) -> np.ndarray:
    """Accept a TimeSeries or any 1-D array-like of finite reals."""
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if values.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    if not np.all(np.isfinite(values)):
        raise ValueError("series contains non-finite values")
    return values


def box_sizes(length: int, config: DfaConfig) -> np.ndarray:
    """Log-spaced box sizes from min_box up to floor(max_box_fraction * length).

    Sizes are rounded to integers with duplicates removed; at least 4
    distinct sizes must remain.
    """
    max_box = int(length * config.max_box_fraction)
    sizes: list[int] = []
    k = 0
    while True:
        s = round(config.min_box * 10.0 ** (k / config.boxes_per_decade))
        if s > max_box:
            break
        if not sizes or s != sizes[-1]:
            sizes.append(s)
        k += 1
    if len(sizes) < 4:
        raise ValueError(
            f"series of length {length} yields only {len(sizes)} box sizes "
            f"under {config}; need at least 4"
        )
    return np.asarray(sizes, dtype=int)


def _fluctuation(profile: np.ndarray, size: int, order: int) -> float:
    """RMS detrended fluctuation over boxes taken from both ends."""
    length = len(profile)
    n_boxes = length // size
    forward = profile[: n_boxes * size].reshape(n_boxes, size)
    backward = profile[length - n_boxes * size :].reshape(n_boxes, size)
    segments = np.concatenate([forward, backward])
    x = np.arange(size, dtype=float) / size
    design = np.vander(x, order + 1)
    coeff = segments @ np.linalg.pinv(design).T
    residuals = segments - coeff @ design.T
    return float(np.sqrt(np.mean(residuals**2)))


def dfa_exponent(series, config: DfaConfig = DfaConfig()) -> DfaResult:
    """Estimate the DFA exponent of a series.

    The mean-subtracted series is integrated into a profile, split into
    non-overlapping boxes of each size (from the start and from the end,
    pooled), detrended per box by a least-squares polynomial, and the
    exponent is the slope of ln F(s) versus ln s.

    A series whose fluctuation vanishes (constant input) yields alpha 0
    with the degenerate flag set instead of an error.
    """
    values = series_values(series)
    sizes = box_sizes(len(values), config)
    if values.min() == values.max():
        return DfaResult(0.0, True)
    profile = np.cumsum(values - values.mean())
    fluct = np.array(
        [_fluctuation(profile, int(s), config.detrend_order) for s in sizes]
    )
    if np.any(fluct == 0.0):
        return DfaResult(0.0, True)
    slope = np.polyfit(np.log(sizes.astype(float)), np.log(fluct), 1)[0]
    return DfaResult(float(slope), False)
