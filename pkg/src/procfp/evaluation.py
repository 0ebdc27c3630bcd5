"""Classifier evaluation and DFA stability reports.

Covers confusion-matrix accounting (accuracy, per-class precision/recall),
the repeated stratified 70/30 holdout experiment, and seeded DFA stability
studies (box statistics over repeated runs, and the estimator-spread sweep
over trace lengths).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import clone

from .dfa import DfaConfig, dfa_exponent
from .features import fingerprint
from .pipeline import FamilyClassifier
from .synth import FamilySpec, generate_synthetic_trace
from .trace import LabeledTrace


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts[i, j] = samples of true class i predicted as class j."""

    classes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=int)
        k = len(self.classes)
        if counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        counts.flags.writeable = False
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


class NormalizedRows(NamedTuple):
    matrix: np.ndarray
    zero_rows: np.ndarray


def confusion(truths, predictions, classes: Sequence[str]) -> ConfusionMatrix:
    truths = list(truths)
    predictions = list(predictions)
    if len(truths) != len(predictions):
        raise ValueError("truths and predictions must have equal length")
    index = {c: k for k, c in enumerate(classes)}
    counts = np.zeros((len(index), len(index)), dtype=int)
    for t, p in zip(truths, predictions):
        if t not in index:
            raise ValueError(f"unknown true label {t!r}")
        if p not in index:
            raise ValueError(f"unknown predicted label {p!r}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(tuple(classes), counts)


def accuracy(matrix: ConfusionMatrix) -> float:
    if matrix.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(matrix.counts) / matrix.total)


def precision(matrix: ConfusionMatrix, i: int) -> float | None:
    """Precision of class i, or None when the class was never predicted."""
    column = int(matrix.counts[:, i].sum())
    if column == 0:
        return None
    return float(matrix.counts[i, i] / column)


def recall(matrix: ConfusionMatrix, i: int) -> float | None:
    """Recall of class i, or None when the class has no true samples."""
    row = int(matrix.counts[i, :].sum())
    if row == 0:
        return None
    return float(matrix.counts[i, i] / row)


def normalize_rows(matrix: ConfusionMatrix) -> NormalizedRows:
    counts = matrix.counts.astype(float)
    sums = counts.sum(axis=1)
    zero = sums == 0.0
    out = np.zeros_like(counts)
    nz = ~zero
    out[nz] = counts[nz] / sums[nz, None]
    return NormalizedRows(out, zero)


def tukey_quartiles(values) -> tuple[float, float, float]:
    """(Q1, median, Q3) by Tukey's inclusive hinges.

    Each hinge is the median of its half of the sorted data, with the
    overall median included in both halves when the count is odd. For two
    points this makes Q1 the minimum and Q3 the maximum.
    """
    xs = np.sort(np.asarray(values, dtype=float))
    n = len(xs)
    if n < 2:
        raise ValueError("need at least 2 values")

    def med(a: np.ndarray) -> float:
        m = len(a)
        return float((a[(m - 1) // 2] + a[m // 2]) / 2.0)

    lower = xs[: (n + 1) // 2]
    upper = xs[n // 2 :]
    return med(lower), med(xs), med(upper)


@dataclass(frozen=True)
class BoxStats:
    """Five-number summary with 1.5 IQR outliers for one metric."""

    metric: str
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    iqr: float
    outliers: tuple[float, ...]


def box_stats(metric: str, values) -> BoxStats:
    xs = np.sort(np.asarray(values, dtype=float))
    q1, median, q3 = tukey_quartiles(xs)
    iqr = q3 - q1
    lo = q1 - 1.5 * iqr
    hi = q3 + 1.5 * iqr
    outliers = tuple(float(v) for v in xs if v < lo or v > hi)
    return BoxStats(
        metric=metric,
        minimum=float(xs[0]),
        q1=q1,
        median=median,
        q3=q3,
        maximum=float(xs[-1]),
        iqr=iqr,
        outliers=outliers,
    )


@dataclass(frozen=True)
class LabeledSample:
    """One sample's q execution runs, which must never straddle a split."""

    family: str
    traces: tuple


def group_runs(dataset: Sequence[LabeledTrace], q: int) -> list[LabeledSample]:
    """Group traces into samples of q runs each, per family in input order."""
    if q < 1:
        raise ValueError("q must be >= 1")
    by_family: dict[str, list] = {}
    order: list[str] = []
    for item in dataset:
        if item.family not in by_family:
            by_family[item.family] = []
            order.append(item.family)
        by_family[item.family].append(item.trace)
    samples = []
    for family in order:
        traces = by_family[family]
        if len(traces) % q != 0:
            raise ValueError(
                f"family {family!r} has {len(traces)} traces, not a multiple of q={q}"
            )
        for k in range(0, len(traces), q):
            samples.append(LabeledSample(family, tuple(traces[k : k + q])))
    return samples


def stratified_sample_split(
    per_family: dict[str, list[int]],
    train_fraction: float,
    rng: np.random.Generator,
) -> tuple[list[int], list[int]]:
    """Split sample ids train/test, stratified per family.

    Each family contributes ``round(train_fraction * n)`` training samples,
    clamped so both sides stay non-empty. Families are visited in sorted
    order so the generator consumption is reproducible.
    """
    train_ids: list[int] = []
    test_ids: list[int] = []
    for family in sorted(per_family):
        members = np.asarray(per_family[family])
        perm = rng.permutation(members)
        n_train = int(round(train_fraction * len(members)))
        n_train = min(max(n_train, 1), len(members) - 1)
        train_ids.extend(int(i) for i in perm[:n_train])
        test_ids.extend(int(i) for i in perm[n_train:])
    return train_ids, test_ids


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Aggregated results of the repeated holdout experiment."""

    classes: tuple[str, ...]
    accuracies: tuple[float, ...]
    accuracy_mean: float
    accuracy_std: float
    precision_mean: np.ndarray
    precision_std: np.ndarray
    precision_undefined: tuple[int, ...]
    recall_mean: np.ndarray
    recall_std: np.ndarray
    recall_undefined: tuple[int, ...]
    confusion_counts: np.ndarray
    confusion_normalized: np.ndarray
    zero_rows: np.ndarray


def _aggregate_metric(per_rep: list[list[float | None]]) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """Mean/std per class, skipping undefined entries and counting them."""
    k = len(per_rep[0])
    means = np.full(k, np.nan)
    stds = np.full(k, np.nan)
    undefined = []
    for c in range(k):
        defined = [rep[c] for rep in per_rep if rep[c] is not None]
        undefined.append(len(per_rep) - len(defined))
        if defined:
            means[c] = float(np.mean(defined))
            stds[c] = float(np.std(defined))
    return means, stds, tuple(undefined)


def repeated_holdout(
    dataset: Sequence[LabeledTrace],
    repetitions: int = 20,
    train_fraction: float = 0.7,
    q: int = 2,
    classifier: FamilyClassifier | None = None,
    dfa: DfaConfig = DfaConfig(),
    seed: int = 0,
) -> ExperimentReport:
    """Repeated stratified holdout over samples of q fingerprints each.

    For every repetition the samples of each family are split
    train/test (the per-family train count is ``round(train_fraction * n)``
    clamped to keep both sides non-empty, so all q runs of a sample stay on
    one side), the pipeline is trained on the training fingerprints, and
    the test fingerprints are classified independently. Accuracy and
    per-class precision/recall are aggregated with mean and population
    standard deviation; everything is deterministic in ``seed``.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    template = classifier if classifier is not None else FamilyClassifier()

    samples = group_runs(dataset, q)
    classes = tuple(sorted({s.family for s in samples}))
    per_family: dict[str, list[int]] = {c: [] for c in classes}
    for idx, sample in enumerate(samples):
        per_family[sample.family].append(idx)
    for family, members in per_family.items():
        if len(members) < 2:
            raise ValueError(f"family {family!r} has {len(members)} samples; need >= 2")

    prints = [
        [fingerprint(t, dfa).values for t in sample.traces] for sample in samples
    ]
    accuracies: list[float] = []
    precision_reps: list[list[float | None]] = []
    recall_reps: list[list[float | None]] = []
    total_counts = np.zeros((len(classes), len(classes)), dtype=int)

    for rep in range(repetitions):
        rng = np.random.default_rng([seed, rep])
        train_ids, test_ids = stratified_sample_split(per_family, train_fraction, rng)

        X_train = np.stack([fp for sid in train_ids for fp in prints[sid]])
        y_train = np.asarray(
            [samples[sid].family for sid in train_ids for _ in prints[sid]], dtype=object
        )
        X_test = np.stack([fp for sid in test_ids for fp in prints[sid]])
        y_test = [samples[sid].family for sid in test_ids for _ in prints[sid]]

        model = clone(template).fit(X_train, y_train)
        predictions = model.predict(X_test)
        cm = confusion(y_test, predictions, classes)
        total_counts += cm.counts
        accuracies.append(accuracy(cm))
        precision_reps.append([precision(cm, i) for i in range(len(classes))])
        recall_reps.append([recall(cm, i) for i in range(len(classes))])

    p_mean, p_std, p_undef = _aggregate_metric(precision_reps)
    r_mean, r_std, r_undef = _aggregate_metric(recall_reps)
    aggregate = ConfusionMatrix(classes, total_counts)
    normalized = normalize_rows(aggregate)
    return ExperimentReport(
        classes=classes,
        accuracies=tuple(accuracies),
        accuracy_mean=float(np.mean(accuracies)),
        accuracy_std=float(np.std(accuracies)),
        precision_mean=p_mean,
        precision_std=p_std,
        precision_undefined=p_undef,
        recall_mean=r_mean,
        recall_std=r_std,
        recall_undefined=r_undef,
        confusion_counts=total_counts,
        confusion_normalized=normalized.matrix,
        zero_rows=normalized.zero_rows,
    )


def dfa_stability_report(
    spec: FamilySpec,
    runs: int = 30,
    length: int = 8192,
    config: DfaConfig = DfaConfig(),
    seed: int = 0,
) -> list[BoxStats]:
    """Box statistics of the DFA exponent per metric over seeded runs."""
    if runs < 2:
        raise ValueError("runs must be >= 2")
    names = spec.metric_names()
    alphas = np.empty((runs, spec.n))
    for r in range(runs):
        trace = generate_synthetic_trace(spec, seed + r, length)
        alphas[r] = [dfa_exponent(s, config).alpha for s in trace.series]
    return [box_stats(names[i], alphas[:, i]) for i in range(spec.n)]


@dataclass(frozen=True)
class SweepPoint:
    metric: str
    length: int
    alpha_mean: float
    alpha_std: float


def dfa_length_sweep(
    spec: FamilySpec,
    lengths: Sequence[int],
    runs_per_length: int = 5,
    config: DfaConfig = DfaConfig(),
    seed: int = 0,
) -> list[SweepPoint]:
    """Mean and spread of the DFA exponent per metric at each trace length."""
    lengths = [int(t) for t in lengths]
    if not lengths:
        raise ValueError("lengths must be non-empty")
    if any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise ValueError("lengths must be strictly ascending")
    if lengths[0] < 256:
        raise ValueError("every length must be >= 256")
    if runs_per_length < 1:
        raise ValueError("runs_per_length must be >= 1")
    names = spec.metric_names()
    points = []
    for li, length in enumerate(lengths):
        alphas = np.empty((runs_per_length, spec.n))
        for r in range(runs_per_length):
            trace = generate_synthetic_trace(
                spec, seed + li * runs_per_length + r, length
            )
            alphas[r] = [dfa_exponent(s, config).alpha for s in trace.series]
        for i in range(spec.n):
            points.append(
                SweepPoint(
                    metric=names[i],
                    length=length,
                    alpha_mean=float(alphas[:, i].mean()),
                    alpha_std=float(alphas[:, i].std()),
                )
            )
    return points


def stability_box_csv(stats: Sequence[BoxStats]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["metric", "min", "q1", "median", "q3", "max", "iqr", "outliers"])
    for s in stats:
        writer.writerow(
            [
                s.metric,
                repr(s.minimum),
                repr(s.q1),
                repr(s.median),
                repr(s.q3),
                repr(s.maximum),
                repr(s.iqr),
                ";".join(repr(v) for v in s.outliers),
            ]
        )
    return out.getvalue()


def length_sweep_csv(points: Sequence[SweepPoint]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["metric", "length", "alpha_mean", "alpha_std"])
    for p in points:
        writer.writerow([p.metric, p.length, repr(p.alpha_mean), repr(p.alpha_std)])
    return out.getvalue()


def write_experiment_report(report: ExperimentReport, out_dir: str | Path) -> None:
    """Write summary.json plus the plot-ready CSVs for an experiment."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    summary = {
        "classes": list(report.classes),
        "repetitions": len(report.accuracies),
        "accuracy_mean": report.accuracy_mean,
        "accuracy_std": report.accuracy_std,
        "precision_undefined_counts": list(report.precision_undefined),
        "recall_undefined_counts": list(report.recall_undefined),
        "zero_support_rows": [c for c, z in zip(report.classes, report.zero_rows) if z],
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    with open(out_dir / "repetitions.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["repetition", "accuracy"])
        for k, acc in enumerate(report.accuracies):
            writer.writerow([k, repr(acc)])

    with open(out_dir / "confusion.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class"] + list(report.classes))
        for name, row in zip(report.classes, report.confusion_normalized):
            writer.writerow([name] + [repr(float(v)) for v in row])

    def fmt(value: float) -> str:
        return "" if np.isnan(value) else repr(float(value))

    with open(out_dir / "precision_recall.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["class", "precision_mean", "precision_std", "recall_mean", "recall_std"]
        )
        for i, name in enumerate(report.classes):
            writer.writerow(
                [
                    name,
                    fmt(report.precision_mean[i]),
                    fmt(report.precision_std[i]),
                    fmt(report.recall_mean[i]),
                    fmt(report.recall_std[i]),
                ]
            )
