"""Periodic sampling of proc-style counters into canonical trace files.

The source is any directory tree shaped like a proc filesystem; each metric
is extracted by a rule (file path, line prefix, whitespace-token index).
Counter metrics are emitted as deltas against the previous sample, gauges
raw. Ticks are scheduled against absolute deadlines ``start + k * interval``
so jitter does not accumulate.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .trace import MetricSchema

KINDS = ("counter", "gauge")


class CollectError(RuntimeError):
    """A metric could not be extracted from the source tree."""


@dataclass(frozen=True)
class ProcRule:
    """How to pull one metric out of the tree.

    ``path`` is relative to the source root and may contain ``{pid}``,
    replaced with the configured target process. ``prefix`` selects the
    first line starting with it, ignoring leading whitespace (empty prefix
    selects the first line), and ``token`` indexes the line's
    whitespace-separated tokens.
    """

    metric: str
    path: str
    prefix: str
    token: int
    kind: str

    def __post_init__(self):
        if not self.metric:
            raise ValueError("rule metric name must be non-empty")
        if self.token < 0:
            raise ValueError(f"rule for {self.metric!r}: token index must be >= 0")
        if self.kind not in KINDS:
            raise ValueError(f"rule for {self.metric!r}: kind must be one of {KINDS}")


@dataclass(frozen=True)
class ProcSourceSpec:
    """A proc-style tree plus one extraction rule per metric."""

    root: Path
    rules: tuple[ProcRule, ...]
    process: str = "self"

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise ValueError("at least one rule is required")
        names = [r.metric for r in self.rules]
        if len(set(names)) != len(names):
            raise ValueError("rule metric names must be distinct")

    def schema(self) -> MetricSchema:
        return MetricSchema(tuple(r.metric for r in self.rules))


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling interval and run bound (sample count or duration)."""

    interval: float = 0.25
    samples: int | None = None
    duration: float | None = None
    schema: MetricSchema | None = None

    def __post_init__(self):
        if not self.interval > 0:
            raise ValueError("interval must be > 0")
        if self.samples is None and self.duration is None:
            raise ValueError("either samples or duration must be set")
        if self.samples is not None and self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.duration is not None and not self.duration > 0:
            raise ValueError("duration must be > 0")

    def resolved_samples(self) -> int:
        if self.samples is not None:
            return self.samples
        return max(1, int(round(self.duration / self.interval)))


class ProcSampler:
    """Stateful extractor: holds the previous raw values for counter deltas."""

    def __init__(self, spec: ProcSourceSpec):
        self.spec = spec
        self._previous: list[float] | None = None

    def read_raw(self) -> list[float]:
        """Extract every metric's raw value per its rule."""
        values = []
        for rule in self.spec.rules:
            path = self.spec.root / rule.path.replace("{pid}", self.spec.process)
            try:
                text = path.read_text()
            except OSError as exc:
                raise CollectError(
                    f"metric {rule.metric!r}: cannot read {path}: {exc}"
                ) from exc
            line = None
            for candidate in text.splitlines():
                if candidate.lstrip().startswith(rule.prefix):
                    line = candidate
                    break
            if line is None:
                raise CollectError(
                    f"metric {rule.metric!r}: no line starting with {rule.prefix!r} in {path}"
                )
            tokens = line.split()
            if rule.token >= len(tokens):
                raise CollectError(
                    f"metric {rule.metric!r}: line in {path} has {len(tokens)} tokens, "
                    f"rule wants index {rule.token}"
                )
            try:
                values.append(float(tokens[rule.token]))
            except ValueError:
                raise CollectError(
                    f"metric {rule.metric!r}: token {tokens[rule.token]!r} in {path} "
                    "is not numeric"
                ) from None
        return values

    def sample(self) -> list[float]:
        """One row: deltas for counters (first sample yields 0), gauges raw."""
        raw = self.read_raw()
        previous = self._previous
        self._previous = raw
        row = []
        for k, rule in enumerate(self.spec.rules):
            if rule.kind == "counter":
                row.append(0.0 if previous is None else raw[k] - previous[k])
            else:
                row.append(raw[k])
        return row


def collect(
    spec: ProcSourceSpec,
    config: SamplerConfig,
    out_path: str | Path,
    clock=time.monotonic,
    sleep=time.sleep,
) -> Path:
    """Sample on ticks k*interval and write the canonical trace CSV.

    Timestamps in the CSV are the nominal ticks; the observed scheduling
    jitter goes into a ``<out>.meta.json`` sidecar. On a sampling error the
    file is closed with the rows collected so far before the error is
    re-raised.
    """
    schema = spec.schema()
    if config.schema is not None and config.schema != schema:
        raise ValueError(
            f"configured schema {list(config.schema.names)} does not match "
            f"rules {list(schema.names)}"
        )
    count = config.resolved_samples()
    out_path = Path(out_path)
    sampler = ProcSampler(spec)
    started_wall = time.time()
    jitters: list[float] = []
    with open(out_path, "w", newline="") as fh:
        fh.write("timestamp," + ",".join(schema.names) + "\n")
        start = clock()
        for k in range(count):
            deadline = start + k * config.interval
            now = clock()
            if now < deadline:
                sleep(deadline - now)
                now = clock()
            jitters.append(now - deadline)
            row = sampler.sample()
            fh.write(
                repr(k * config.interval)
                + ","
                + ",".join(repr(float(v)) for v in row)
                + "\n"
            )
    meta = {
        "start_unix": started_wall,
        "interval": config.interval,
        "samples": count,
        "max_abs_jitter": max(abs(j) for j in jitters),
    }
    Path(str(out_path) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out_path


def rules_from_json(text: str) -> tuple[ProcRule, ...]:
    """Parse the JSON rule-file format: a list of rule objects."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid rule file JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ValueError("rule file must be a JSON list")
    rules = []
    for k, entry in enumerate(doc):
        for field in ("metric", "path", "prefix", "token", "kind"):
            if field not in entry:
                raise ValueError(f"rule {k} is missing field {field!r}")
        rules.append(
            ProcRule(
                metric=entry["metric"],
                path=entry["path"],
                prefix=entry["prefix"],
                token=int(entry["token"]),
                kind=entry["kind"],
            )
        )
    return tuple(rules)


def load_rules(path: str | Path) -> tuple[ProcRule, ...]:
    return rules_from_json(Path(path).read_text())


def rules_to_json(rules) -> str:
    doc = [
        {
            "metric": r.metric,
            "path": r.path,
            "prefix": r.prefix,
            "token": r.token,
            "kind": r.kind,
        }
        for r in rules
    ]
    return json.dumps(doc, indent=2) + "\n"


def default_rules(interface: str = "eth0") -> tuple[ProcRule, ...]:
    """The shipped 26-metric schema over a Linux-style proc tree.

    System-wide CPU/memory counters and gauges, per-process accounting for
    the target ``{pid}``, and network totals for one interface. All
    cumulative values are counters and therefore delta-encoded.
    """
    return (
        ProcRule("cpu_user", "stat", "cpu ", 1, "counter"),
        ProcRule("cpu_nice", "stat", "cpu ", 2, "counter"),
        ProcRule("cpu_system", "stat", "cpu ", 3, "counter"),
        ProcRule("cpu_idle", "stat", "cpu ", 4, "counter"),
        ProcRule("cpu_iowait", "stat", "cpu ", 5, "counter"),
        ProcRule("ctxt_switches", "stat", "ctxt", 1, "counter"),
        ProcRule("procs_running", "stat", "procs_running", 1, "gauge"),
        ProcRule("mem_free", "meminfo", "MemFree:", 1, "gauge"),
        ProcRule("mem_available", "meminfo", "MemAvailable:", 1, "gauge"),
        ProcRule("mem_buffers", "meminfo", "Buffers:", 1, "gauge"),
        ProcRule("mem_cached", "meminfo", "Cached:", 1, "gauge"),
        ProcRule("swap_free", "meminfo", "SwapFree:", 1, "gauge"),
        ProcRule("utime", "{pid}/stat", "", 13, "counter"),
        ProcRule("stime", "{pid}/stat", "", 14, "counter"),
        ProcRule("num_threads", "{pid}/stat", "", 19, "gauge"),
        ProcRule("vsize", "{pid}/stat", "", 22, "gauge"),
        ProcRule("rss", "{pid}/stat", "", 23, "gauge"),
        ProcRule("minflt", "{pid}/stat", "", 9, "counter"),
        ProcRule("majflt", "{pid}/stat", "", 11, "counter"),
        ProcRule("read_bytes", "{pid}/io", "read_bytes:", 1, "counter"),
        ProcRule("write_bytes", "{pid}/io", "write_bytes:", 1, "counter"),
        ProcRule("rx_bytes", "net/dev", f"{interface}:", 1, "counter"),
        ProcRule("tx_bytes", "net/dev", f"{interface}:", 9, "counter"),
        ProcRule("rx_packets", "net/dev", f"{interface}:", 2, "counter"),
        ProcRule("tx_packets", "net/dev", f"{interface}:", 10, "counter"),
        ProcRule("tcp_sockets_in_use", "net/sockstat", "TCP:", 2, "gauge"),
    )


def default_schema() -> MetricSchema:
    return MetricSchema(tuple(r.metric for r in default_rules()))
