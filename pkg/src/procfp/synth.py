"""Synthetic traces with controlled fractal and correlation structure.

Each metric is synthesized as power-law noise via spectral synthesis
(inverse FFT of 1/f^beta amplitudes with random phases, beta = 2*alpha - 1,
so the target DFA exponent is a direct parameter), then cross-metric
correlation is imposed by mixing with the Cholesky factor of a template
matrix, and finally per-metric amplitude and offset are applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .trace import MetricSchema, TimeSeries, Trace

_SYMMETRY_TOL = 1e-12
_EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """Generation parameters for one synthetic family.

    alpha_targets: per-metric target DFA exponent, each in (0, 2).
    correlation: symmetric PSD template with unit diagonal.
    amplitudes: per-metric scale (> 0) applied after mixing.
    offsets: per-metric baseline added last.
    metrics: optional metric names; defaults to m1..mn.
    family: optional family label used for file naming.
    """

    alpha_targets: np.ndarray
    correlation: np.ndarray
    amplitudes: np.ndarray
    offsets: np.ndarray
    metrics: tuple[str, ...] | None = None
    family: str | None = None

    def __post_init__(self):
        alpha = np.array(self.alpha_targets, dtype=float)
        corr = np.array(self.correlation, dtype=float)
        amp = np.array(self.amplitudes, dtype=float)
        off = np.array(self.offsets, dtype=float)
        n = len(alpha)
        if n < 2:
            raise ValueError("a family spec needs at least 2 metrics")
        if alpha.ndim != 1 or not np.all((alpha > 0) & (alpha < 2)):
            raise ValueError("alpha_targets must be in the open interval (0, 2)")
        if corr.shape != (n, n):
            raise ValueError(f"correlation must be {n}x{n}, got {corr.shape}")
        if np.max(np.abs(corr - corr.T)) > _SYMMETRY_TOL:
            raise ValueError("correlation template is not symmetric within 1e-12")
        if np.max(np.abs(np.diagonal(corr) - 1.0)) > _SYMMETRY_TOL:
            raise ValueError("correlation template diagonal must be 1")
        if float(np.linalg.eigvalsh(corr)[0]) < _EIGENVALUE_FLOOR:
            raise ValueError("correlation template is not positive semidefinite")
        if amp.shape != (n,) or not np.all(amp > 0):
            raise ValueError("amplitudes must be positive, one per metric")
        if off.shape != (n,):
            raise ValueError("offsets must have one entry per metric")
        if self.metrics is not None and len(self.metrics) != n:
            raise ValueError("metrics must name every metric")
        for arr in (alpha, corr, amp, off):
            arr.flags.writeable = False
        object.__setattr__(self, "alpha_targets", alpha)
        object.__setattr__(self, "correlation", corr)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "offsets", off)
        if self.metrics is not None:
            object.__setattr__(self, "metrics", tuple(self.metrics))

    @property
    def n(self) -> int:
        return len(self.alpha_targets)

    def metric_names(self) -> tuple[str, ...]:
        if self.metrics is not None:
            return self.metrics
        return tuple(f"m{i + 1}" for i in range(self.n))


def family_spec_from_json(text: str) -> FamilySpec:
    """Build a FamilySpec from its JSON document form."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid family spec JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("family spec must be a JSON object")
    for field in ("alpha_targets", "correlation", "amplitudes", "offsets"):
        if field not in doc:
            raise ValueError(f"family spec is missing field {field!r}")
    metrics = doc.get("metrics")
    return FamilySpec(
        alpha_targets=doc["alpha_targets"],
        correlation=doc["correlation"],
        amplitudes=doc["amplitudes"],
        offsets=doc["offsets"],
        metrics=tuple(metrics) if metrics is not None else None,
        family=doc.get("family"),
    )


def load_family_spec(path: str | Path) -> FamilySpec:
    spec = family_spec_from_json(Path(path).read_text())
    if spec.family is None:
        spec = FamilySpec(
            alpha_targets=spec.alpha_targets,
            correlation=spec.correlation,
            amplitudes=spec.amplitudes,
            offsets=spec.offsets,
            metrics=spec.metrics,
            family=Path(path).stem,
        )
    return spec


def family_spec_to_json(spec: FamilySpec) -> str:
    doc = {
        "alpha_targets": [float(a) for a in spec.alpha_targets],
        "correlation": [[float(v) for v in row] for row in spec.correlation],
        "amplitudes": [float(a) for a in spec.amplitudes],
        "offsets": [float(o) for o in spec.offsets],
    }
    if spec.metrics is not None:
        doc["metrics"] = list(spec.metrics)
    if spec.family is not None:
        doc["family"] = spec.family
    return json.dumps(doc, indent=2) + "\n"


def _power_law_noise(rng: np.random.Generator, length: int, beta: float) -> np.ndarray:
    """Zero-mean unit-variance noise with power spectral density ~ 1/f^beta."""
    half = length // 2
    coef = np.zeros(half + 1, dtype=complex)
    scale = np.arange(1, half, dtype=float) ** (-beta / 2.0)
    re = rng.standard_normal(half - 1)
    im = rng.standard_normal(half - 1)
    coef[1:half] = (re + 1j * im) * scale / np.sqrt(2.0)
    coef[half] = rng.standard_normal() * float(half) ** (-beta / 2.0)
    x = np.fft.irfft(coef, n=length)
    return (x - x.mean()) / x.std()


def _mixing_factor(correlation: np.ndarray) -> np.ndarray:
    """Cholesky factor of the template, tolerating round-off.

    Eigenvalues are known to be >= -1e-10 (validated at spec construction);
    tiny negatives are clamped to zero before factoring. An exactly singular
    PSD template falls back to the eigenvalue square root, which imposes the
    same covariance.
    """
    try:
        return np.linalg.cholesky(correlation)
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(correlation)
    w = np.clip(w, 0.0, None)
    rebuilt = (v * w) @ v.T
    rebuilt = (rebuilt + rebuilt.T) / 2.0
    try:
        return np.linalg.cholesky(rebuilt)
    except np.linalg.LinAlgError:
        return v[:, ::-1] * np.sqrt(w[::-1])


def generate_synthetic_trace(
    spec: FamilySpec,
    seed: int,
    length: int,
    interval: float = 0.25,
) -> Trace:
    """Deterministically generate one trace from a family spec.

    ``length`` must be a power of two >= 256 (spectral synthesis). The same
    (spec, seed, length) always yields a bit-identical trace.
    """
    if length < 256 or length & (length - 1) != 0:
        raise ValueError(f"length must be a power of two >= 256, got {length}")
    rng = np.random.default_rng(seed)
    betas = 2.0 * spec.alpha_targets - 1.0
    raw = np.stack([_power_law_noise(rng, length, b) for b in betas])
    mixed = _mixing_factor(spec.correlation) @ raw
    values = spec.offsets[:, None] + spec.amplitudes[:, None] * mixed
    schema = MetricSchema(spec.metric_names())
    series = tuple(TimeSeries(row, interval) for row in values)
    return Trace(schema=schema, series=series, run_id=f"synth:{seed}")
