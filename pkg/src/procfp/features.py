"""Fingerprint features: per-metric DFA exponents plus pairwise correlations.

A trace over n metrics yields n(n+1)/2 features in a fixed canonical order:
``dfa:<metric>`` for every metric in schema order, then ``corr:<mi>:<mj>``
for every pair i < j in row-major order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dfa import DfaConfig, dfa_exponent, series_values
from .trace import MetricSchema, Trace


class PearsonResult(NamedTuple):
    r: float
    degenerate: bool


class CorrelationResult(NamedTuple):
    matrix: np.ndarray
    degenerate: np.ndarray


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Named feature values in canonical order."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or len(values) != len(self.names):
            raise ValueError("values must align one-to-one with names")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.values, other.values)


def feature_names(schema: MetricSchema) -> tuple[str, ...]:
    names = [f"dfa:{m}" for m in schema.names]
    for i in range(schema.n):
        for j in range(i + 1, schema.n):
            names.append(f"corr:{schema.names[i]}:{schema.names[j]}")
    return tuple(names)


def pearson(x, y) -> PearsonResult:
    """Pearson correlation using population moments, clamped to [-1, 1].

    A constant input on either side yields r = 0 with the degenerate flag
    set rather than a division error.
    """
    a = series_values(x)
    b = series_values(y)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("need at least 2 samples")
    if a.min() == a.max() or b.min() == b.max():
        return PearsonResult(0.0, True)
    da = a - a.mean()
    db = b - b.mean()
    va = float(da @ da)
    vb = float(db @ db)
    if va == 0.0 or vb == 0.0:
        return PearsonResult(0.0, True)
    r = float(da @ db) / math.sqrt(va * vb)
    return PearsonResult(min(1.0, max(-1.0, r)), False)


def correlation_matrix(trace: Trace) -> CorrelationResult:
    """Symmetric matrix of pairwise Pearson correlations.

    The diagonal is 1 except for constant metrics, which get 0 and a set
    entry in the boolean ``degenerate`` mask (as do all pairs touching
    them).
    """
    data = trace.matrix()
    n = trace.schema.n
    constant = data.min(axis=1) == data.max(axis=1)
    centered = data - data.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.sum(centered**2, axis=1))

    matrix = np.zeros((n, n))
    degenerate = np.zeros((n, n), dtype=bool)
    for i in range(n):
        if constant[i]:
            degenerate[i, i] = True
        else:
            matrix[i, i] = 1.0
        for j in range(i + 1, n):
            if constant[i] or constant[j]:
                degenerate[i, j] = degenerate[j, i] = True
                continue
            r = float(centered[i] @ centered[j]) / (norms[i] * norms[j])
            r = min(1.0, max(-1.0, r))
            matrix[i, j] = matrix[j, i] = r
    return CorrelationResult(matrix, degenerate)


def fingerprint(trace: Trace, config: DfaConfig = DfaConfig()) -> FeatureVector:
    """Compute the full fingerprint of a trace.

    Values are the per-metric DFA exponents followed by the upper-triangle
    correlations in row-major order; length n(n+1)/2.
    """
    alphas = [dfa_exponent(s, config).alpha for s in trace.series]
    corr = correlation_matrix(trace).matrix
    values = list(alphas)
    n = trace.schema.n
    for i in range(n):
        for j in range(i + 1, n):
            values.append(float(corr[i, j]))
    return FeatureVector(names=feature_names(trace.schema), values=np.asarray(values))


def fingerprint_csv(vector: FeatureVector) -> str:
    """Serialize a fingerprint as ``feature,value`` CSV."""
    lines = ["feature,value"]
    for name, value in zip(vector.names, vector.values):
        lines.append(f"{name},{float(value)!r}")
    return "\n".join(lines) + "\n"


def parse_fingerprint_csv(text: str) -> FeatureVector:
    lines = [line for line in text.split("\n") if line]
    if not lines or lines[0] != "feature,value":
        raise ValueError("fingerprint CSV must start with a 'feature,value' header")
    names = []
    values = []
    for line in lines[1:]:
        name, _, raw = line.partition(",")
        names.append(name)
        values.append(float(raw))
    return FeatureVector(names=tuple(names), values=np.asarray(values))


def stack_fingerprints(vectors: Sequence[FeatureVector]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Stack fingerprints sharing one canonical feature order into a matrix."""
    if not vectors:
        raise ValueError("no fingerprints given")
    names = vectors[0].names
    for k, v in enumerate(vectors[1:], start=1):
        if v.names != names:
            raise ValueError(f"fingerprint {k} has inconsistent feature names")
    return np.stack([v.values for v in vectors]), names
