"""Command-line frontend for the trace fingerprinting pipeline.

Subcommands: synth, collect, fingerprint, train, classify, evaluate,
stability. Data goes to stdout or files, diagnostics to stderr; every
command is deterministic given its flags and seed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .collector import CollectError, ProcSourceSpec, SamplerConfig, collect, load_rules
from .dfa import DfaConfig
from .evaluation import (
    dfa_length_sweep,
    dfa_stability_report,
    length_sweep_csv,
    repeated_holdout,
    stability_box_csv,
    write_experiment_report,
)
from .features import fingerprint, fingerprint_csv, stack_fingerprints
from .modelfile import ModelFile, load_model, save_model
from .pipeline import DEFAULT_C_GRID, DEFAULT_Q_GRID, FamilyClassifier
from .synth import generate_synthetic_trace, load_family_spec
from .trace import LabeledTrace, MetricSchema, parse_trace


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _gamma_grid(text: str):
    if text == "auto":
        return None
    return _float_list(text)


def _add_dfa_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("dfa")
    group.add_argument("--min-box", type=int, default=4)
    group.add_argument("--max-box-fraction", type=float, default=0.25)
    group.add_argument("--boxes-per-decade", type=int, default=8)
    group.add_argument("--detrend-order", type=int, default=1)


def _dfa_config(args) -> DfaConfig:
    return DfaConfig(
        min_box=args.min_box,
        max_box_fraction=args.max_box_fraction,
        boxes_per_decade=args.boxes_per_decade,
        detrend_order=args.detrend_order,
    )


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline")
    group.add_argument("--q-grid", type=_int_list, default=DEFAULT_Q_GRID)
    group.add_argument("--bins", type=int, default=10)
    group.add_argument("--variance-fraction", type=float, default=0.95)
    group.add_argument("--c-grid", type=_float_list, default=DEFAULT_C_GRID)
    group.add_argument(
        "--gamma-grid",
        type=_gamma_grid,
        default=None,
        help="comma-separated values, or 'auto' to scale by the PCA dimension",
    )
    group.add_argument("--folds", type=int, default=5)


def _classifier(args) -> FamilyClassifier:
    return FamilyClassifier(
        q_grid=args.q_grid,
        bins=args.bins,
        variance_fraction=args.variance_fraction,
        c_grid=args.c_grid,
        gamma_grid=args.gamma_grid,
        folds=args.folds,
        seed=args.seed,
    )


def _load_manifest(path: Path) -> list[tuple[Path, str]]:
    """Manifest rows are ``path,family``; paths resolve against the manifest."""
    entries = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'path,family', got {row!r}")
            trace_path = (path.parent / row[0]).resolve()
            if not trace_path.exists():
                raise ValueError(f"{path}:{lineno}: trace file {trace_path} does not exist")
            entries.append((trace_path, row[1]))
    if not entries:
        raise ValueError(f"manifest {path} is empty")
    return entries


def _load_labeled_traces(path: Path) -> list[LabeledTrace]:
    dataset = []
    schema = None
    for trace_path, family in _load_manifest(path):
        trace = parse_trace(trace_path.read_text(), expected_schema=schema)
        schema = trace.schema
        dataset.append(LabeledTrace(trace=trace, family=family))
    return dataset


def cmd_synth(args) -> int:
    spec = load_family_spec(args.spec)
    family = spec.family or Path(args.spec).stem
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .trace import write_trace

    for k in range(args.count):
        seed = args.seed + k
        trace = generate_synthetic_trace(spec, seed, args.length, interval=args.interval)
        (out_dir / f"{family}_{seed}.csv").write_text(write_trace(trace))
    print(f"wrote {args.count} traces to {out_dir}", file=sys.stderr)
    return 0


def cmd_collect(args) -> int:
    rules = load_rules(args.rules)
    spec = ProcSourceSpec(root=Path(args.root), rules=rules, process=args.pid)
    schema = MetricSchema(tuple(args.schema.split(","))) if args.schema else None
    config = SamplerConfig(
        interval=args.interval,
        samples=args.samples,
        duration=args.duration,
        schema=schema,
    )
    out = collect(spec, config, args.out)
    print(f"wrote {out}", file=sys.stderr)
    return 0


def cmd_fingerprint(args) -> int:
    trace = parse_trace(Path(args.trace).read_text())
    vector = fingerprint(trace, _dfa_config(args))
    sys.stdout.write(fingerprint_csv(vector))
    return 0


def cmd_train(args) -> int:
    dataset = _load_labeled_traces(Path(args.manifest))
    families = {item.family for item in dataset}
    if len(families) < 2:
        raise ValueError(f"manifest contains a single family {families!r}")
    config = _dfa_config(args)
    prints = [fingerprint(item.trace, config) for item in dataset]
    X, _ = stack_fingerprints(prints)
    y = [item.family for item in dataset]
    classifier = _classifier(args).fit(X, y)
    save_model(
        ModelFile(schema=dataset[0].trace.schema, dfa=config, classifier=classifier),
        args.out,
    )
    print(f"q={classifier.q_}")
    print(f"C={classifier.svm_.C!r}")
    print(f"gamma={classifier.svm_.gamma!r}")
    print(f"cv_accuracy={classifier.cv_accuracy_!r}")
    return 0


def cmd_classify(args) -> int:
    model = load_model(args.model)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["path", "predicted"] + [f"votes_{c}" for c in model.classifier.classes_])
    for trace_path in args.traces:
        trace = parse_trace(Path(trace_path).read_text())
        if trace.schema != model.schema:
            raise ValueError(
                f"{trace_path}: trace schema {list(trace.schema.names)} does not match "
                f"model schema {list(model.schema.names)}"
            )
        vector = fingerprint(trace, model.dfa)
        votes, _ = model.classifier.vote(vector.values[None, :])
        predicted = model.classifier.predict(vector.values[None, :])[0]
        writer.writerow([trace_path, predicted] + [int(v) for v in votes[0]])
    return 0


def cmd_evaluate(args) -> int:
    dataset = _load_labeled_traces(Path(args.manifest))
    report = repeated_holdout(
        dataset,
        repetitions=args.repetitions,
        train_fraction=args.train_fraction,
        q=args.q_runs,
        classifier=_classifier(args),
        dfa=_dfa_config(args),
        seed=args.seed,
    )
    write_experiment_report(report, args.out_dir)
    print(f"accuracy_mean={report.accuracy_mean!r}")
    print(f"accuracy_std={report.accuracy_std!r}")
    return 0


def cmd_stability(args) -> int:
    spec = load_family_spec(args.spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = _dfa_config(args)
    if args.mode == "box":
        stats = dfa_stability_report(
            spec, runs=args.runs, length=args.length, config=config, seed=args.seed
        )
        (out_dir / "stability_box.csv").write_text(stability_box_csv(stats))
        print(f"wrote {out_dir / 'stability_box.csv'}", file=sys.stderr)
    else:
        points = dfa_length_sweep(
            spec,
            lengths=args.lengths,
            runs_per_length=args.runs_per_length,
            config=config,
            seed=args.seed,
        )
        (out_dir / "length_sweep.csv").write_text(length_sweep_csv(points))
        print(f"wrote {out_dir / 'length_sweep.csv'}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procfp",
        description="Trace fingerprints from DFA exponents and metric correlations, "
        "with SVM family classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic traces from a family spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=4096)
    p.add_argument("--interval", type=float, default=0.25)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("collect", help="sample a proc-style tree into a trace file")
    p.add_argument("--rules", required=True)
    p.add_argument("--root", default="/proc")
    p.add_argument("--pid", default="self")
    p.add_argument("--interval", type=float, default=0.25)
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--schema", default=None, help="comma-separated expected metric names")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("fingerprint", help="print a trace's fingerprint CSV")
    p.add_argument("trace")
    _add_dfa_flags(p)
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("train", help="train a model from a labeled manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_pipeline_flags(p)
    _add_dfa_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify traces with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("traces", nargs="+")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="repeated holdout experiment over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--repetitions", type=int, default=20)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--q-runs", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    _add_pipeline_flags(p)
    _add_dfa_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stability", help="DFA stability reports for a family spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--mode", choices=("box", "sweep"), required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--length", type=int, default=8192)
    p.add_argument("--lengths", type=_int_list, default=(512, 1024, 2048, 4096, 8192, 16384))
    p.add_argument("--runs-per-length", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _add_dfa_flags(p)
    p.set_defaults(func=cmd_stability)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, CollectError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
