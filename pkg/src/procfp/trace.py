"""Trace data model and the on-disk trace CSV format.

A trace is one execution run's worth of aligned metric time series, all
sampled at the same fixed interval. Traces are immutable after construction
and round-trip exactly through the CSV format for files produced by
``write_trace``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Shortest series a trace may contain. DFA needs at least 4 distinct box
#: sizes with a handful of boxes each; 64 is the smallest comfortable length.
MIN_SERIES_LENGTH = 64

_SPACING_RTOL = 1e-9


class TraceParseError(ValueError):
    """Malformed trace CSV content. ``line`` is the offending 1-based line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class MetricSchema:
    """Ordered list of distinct metric names monitored in a trace."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) < 2:
            raise ValueError("a schema needs at least 2 metrics")
        seen = set()
        for name in self.names:
            if not name:
                raise ValueError("metric names must be non-empty")
            if "," in name or any(ch.isspace() for ch in name):
                raise ValueError(f"metric name {name!r} contains a comma or whitespace")
            if name in seen:
                raise ValueError(f"duplicate metric name {name!r}")
            seen.add(name)

    @property
    def n(self) -> int:
        return len(self.names)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Evenly sampled sequence of finite values for one metric."""

    values: np.ndarray
    sampling_interval: float

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if len(values) < MIN_SERIES_LENGTH:
            raise ValueError(
                f"series has {len(values)} samples; need >= {MIN_SERIES_LENGTH}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite value at index {bad}")
        if not self.sampling_interval > 0:
            raise ValueError("sampling_interval must be > 0")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sampling_interval", float(self.sampling_interval))

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.sampling_interval == other.sampling_interval and np.array_equal(
            self.values, other.values
        )


@dataclass(frozen=True, eq=False)
class Trace:
    """Aligned multi-metric time series for one execution run.

    ``run_id`` is provenance only (it is not persisted by the CSV format)
    and does not participate in equality.
    """

    schema: MetricSchema
    series: tuple[TimeSeries, ...]
    run_id: str = ""

    def __post_init__(self):
        series = tuple(self.series)
        object.__setattr__(self, "series", series)
        if len(series) != self.schema.n:
            raise ValueError(
                f"got {len(series)} series for a schema of {self.schema.n} metrics"
            )
        length = len(series[0])
        interval = series[0].sampling_interval
        for name, s in zip(self.schema.names, series):
            if len(s) != length:
                raise ValueError(f"series {name!r} has length {len(s)}, expected {length}")
            if s.sampling_interval != interval:
                raise ValueError(
                    f"series {name!r} has sampling interval {s.sampling_interval}, "
                    f"expected {interval}"
                )

    @property
    def length(self) -> int:
        return len(self.series[0])

    @property
    def sampling_interval(self) -> float:
        return self.series[0].sampling_interval

    def matrix(self) -> np.ndarray:
        """Series values stacked as an (n_metrics, length) array."""
        return np.stack([s.values for s in self.series])

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.schema == other.schema and self.series == other.series


@dataclass(frozen=True)
class LabeledTrace:
    """A trace tagged with the family of the sample that produced it."""

    trace: Trace
    family: str

    def __post_init__(self):
        if not self.family:
            raise ValueError("family label must be non-empty")


def parse_trace(text: str, expected_schema: MetricSchema | None = None) -> Trace:
    """Parse trace CSV content into a Trace.

    The format is a ``timestamp,<name1>,...,<nameN>`` header followed by
    rows of decimal values. Timestamps must increase by a constant step
    (the sampling interval, taken from the first two rows) within 1e-9
    relative tolerance. When ``expected_schema`` is given the header must
    match it exactly, including order.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TraceParseError(1, "empty input")

    header = lines[0].split(",")
    if header[0] != "timestamp":
        raise TraceParseError(1, f"first header field must be 'timestamp', got {header[0]!r}")
    try:
        schema = MetricSchema(tuple(header[1:]))
    except ValueError as exc:
        raise TraceParseError(1, str(exc)) from exc
    if expected_schema is not None and schema != expected_schema:
        raise TraceParseError(
            1,
            f"schema {list(schema.names)} does not match expected {list(expected_schema.names)}",
        )

    n = schema.n
    timestamps: list[float] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != n + 1:
            raise TraceParseError(lineno, f"expected {n + 1} fields, got {len(fields)}")
        parsed = []
        for col, field in enumerate(fields):
            try:
                value = float(field)
            except ValueError:
                raise TraceParseError(
                    lineno, f"non-numeric cell {field!r} in column {col}"
                ) from None
            if not math.isfinite(value):
                raise TraceParseError(lineno, f"non-finite value {field!r} in column {col}")
            parsed.append(value)
        timestamps.append(parsed[0])
        rows.append(parsed[1:])

    if len(rows) < MIN_SERIES_LENGTH:
        raise TraceParseError(
            len(lines), f"{len(rows)} data rows; need >= {MIN_SERIES_LENGTH}"
        )

    interval = timestamps[1] - timestamps[0]
    if interval <= 0:
        raise TraceParseError(3, "timestamps must be strictly increasing")
    for k in range(1, len(timestamps)):
        step = timestamps[k] - timestamps[k - 1]
        if abs(step - interval) > _SPACING_RTOL * interval:
            raise TraceParseError(
                k + 2, f"timestamp spacing {step!r} deviates from {interval!r}"
            )

    columns = np.asarray(rows, dtype=float).T
    series = tuple(TimeSeries(col, interval) for col in columns)
    return Trace(schema=schema, series=series)


def write_trace(trace: Trace) -> str:
    """Serialize a Trace to canonical CSV.

    Timestamps are the nominal ticks ``k * sampling_interval`` starting at
    zero; values use the shortest round-trip decimal representation, so
    ``parse_trace(write_trace(t)) == t``.
    """
    interval = trace.sampling_interval
    out = ["timestamp," + ",".join(trace.schema.names)]
    columns = [s.values for s in trace.series]
    for k in range(trace.length):
        cells = [repr(k * interval)]
        cells.extend(repr(float(col[k])) for col in columns)
        out.append(",".join(cells))
    return "\n".join(out) + "\n"
