import csv
import json

import numpy as np

from procfp.cli import main
from procfp.features import fingerprint, fingerprint_csv
from procfp.synth import FamilySpec, family_spec_to_json, generate_synthetic_trace
from procfp.trace import parse_trace, write_trace


def write_spec(path, alpha, n=2, family=None, correlation=None):
    corr = np.eye(n) if correlation is None else np.asarray(correlation)
    spec = FamilySpec(
        alpha_targets=[alpha] * n,
        correlation=corr,
        amplitudes=[1.0] * n,
        offsets=[0.0] * n,
        family=family,
    )
    path.write_text(family_spec_to_json(spec))
    return spec


def make_manifest(tmp_path, families, samples_per_family=3, q=2, length=256):
    """Synthesize traces for several families and write a manifest CSV."""
    rows = []
    seed = 0
    for family, alpha in families.items():
        spec = FamilySpec([alpha] * 2, np.eye(2), [1.0] * 2, [0.0] * 2)
        for _ in range(samples_per_family * q):
            trace = generate_synthetic_trace(spec, seed, length)
            name = f"{family}_{seed}.csv"
            (tmp_path / name).write_text(write_trace(trace))
            rows.append(f"{name},{family}")
            seed += 1
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("\n".join(rows) + "\n")
    return manifest


FAST_FLAGS = [
    "--q-grid", "50",
    "--c-grid", "10.0",
    "--gamma-grid", "0.5",
    "--folds", "2",
]


class TestSynth:
    def test_writes_deterministic_files(self, tmp_path, capsys):
        spec_path = tmp_path / "fam_a.json"
        write_spec(spec_path, 0.5, family="fam_a")
        args = [
            "synth", "--spec", str(spec_path), "--count", "3", "--seed", "7",
            "--length", "256", "--out-dir", str(tmp_path / "out"),
        ]
        assert main(args) == 0
        files = sorted(p.name for p in (tmp_path / "out").iterdir())
        assert files == ["fam_a_7.csv", "fam_a_8.csv", "fam_a_9.csv"]
        first = [(tmp_path / "out" / f).read_bytes() for f in files]
        assert main(args) == 0
        second = [(tmp_path / "out" / f).read_bytes() for f in files]
        assert first == second

    def test_family_defaults_to_spec_stem(self, tmp_path):
        spec_path = tmp_path / "myfam.json"
        write_spec(spec_path, 0.5)
        assert main(["synth", "--spec", str(spec_path), "--out-dir", str(tmp_path / "o"),
                     "--length", "256"]) == 0
        assert (tmp_path / "o" / "myfam_0.csv").exists()

    def test_invalid_spec_names_field(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"alpha_targets": [0.5, 0.5]}))
        assert main(["synth", "--spec", str(bad), "--out-dir", str(tmp_path)]) == 1
        assert "correlation" in capsys.readouterr().err


class TestFingerprint:
    def test_matches_library(self, tmp_path, capsys):
        spec = FamilySpec([0.5, 0.9], np.eye(2), [1.0, 1.0], [0.0, 0.0])
        trace = generate_synthetic_trace(spec, 3, 512)
        trace_path = tmp_path / "t.csv"
        trace_path.write_text(write_trace(trace))
        assert main(["fingerprint", str(trace_path)]) == 0
        out = capsys.readouterr().out
        assert out == fingerprint_csv(fingerprint(parse_trace(trace_path.read_text())))
        assert out.count("\n") == 4  # header + 3 features

    def test_missing_file(self, tmp_path, capsys):
        assert main(["fingerprint", str(tmp_path / "nope.csv")]) == 1
        assert "error" in capsys.readouterr().err


class TestTrainClassify:
    def test_end_to_end(self, tmp_path, capsys):
        manifest = make_manifest(tmp_path, {"low": 0.4, "high": 1.5})
        model_path = tmp_path / "model.json"
        assert main(["train", "--manifest", str(manifest), "--out", str(model_path),
                     "--seed", "1", *FAST_FLAGS]) == 0
        out = capsys.readouterr().out
        assert "q=50" in out and "cv_accuracy=" in out

        # classify every training trace; separable by construction
        traces = sorted(str(p) for p in tmp_path.glob("low_*.csv"))
        assert main(["classify", "--model", str(model_path), *traces]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        assert rows[0] == ["path", "predicted", "votes_high", "votes_low"]
        assert all(row[1] == "low" for row in rows[1:])

    def test_three_families_self_accuracy_bounds_cv(self, tmp_path, capsys):
        manifest = make_manifest(
            tmp_path, {"low": 0.4, "mid": 0.95, "high": 1.5}, samples_per_family=4
        )
        model_path = tmp_path / "model.json"
        assert main(["train", "--manifest", str(manifest), "--out", str(model_path),
                     "--seed", "2", *FAST_FLAGS]) == 0
        printed = capsys.readouterr().out
        cv_accuracy = float(printed.split("cv_accuracy=")[1].splitlines()[0])

        traces = [row.split(",")[0] for row in
                  (tmp_path / "manifest.csv").read_text().splitlines()]
        families = [row.split(",")[1] for row in
                    (tmp_path / "manifest.csv").read_text().splitlines()]
        assert main(["classify", "--model", str(model_path),
                     *(str(tmp_path / t) for t in traces)]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))[1:]
        train_accuracy = np.mean([row[1] == fam for row, fam in zip(rows, families)])
        assert train_accuracy >= cv_accuracy - 0.1

    def test_train_deterministic_model_bytes(self, tmp_path):
        manifest = make_manifest(tmp_path, {"low": 0.4, "high": 1.5})
        for name in ("a.json", "b.json"):
            assert main(["train", "--manifest", str(manifest), "--out",
                         str(tmp_path / name), "--seed", "3", *FAST_FLAGS]) == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_single_family_rejected(self, tmp_path, capsys):
        manifest = make_manifest(tmp_path, {"only": 0.5})
        assert main(["train", "--manifest", str(manifest), "--out",
                     str(tmp_path / "m.json"), *FAST_FLAGS]) == 1
        assert "single family" in capsys.readouterr().err

    def test_manifest_missing_file_rejected(self, tmp_path, capsys):
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("ghost.csv,fam\n")
        assert main(["train", "--manifest", str(manifest), "--out",
                     str(tmp_path / "m.json")]) == 1
        assert "ghost.csv" in capsys.readouterr().err

    def test_classify_schema_mismatch_names_both(self, tmp_path, capsys):
        manifest = make_manifest(tmp_path, {"low": 0.4, "high": 1.5})
        model_path = tmp_path / "model.json"
        assert main(["train", "--manifest", str(manifest), "--out", str(model_path),
                     *FAST_FLAGS]) == 0
        other = generate_synthetic_trace(
            FamilySpec([0.5] * 3, np.eye(3), [1.0] * 3, [0.0] * 3,
                       metrics=("x", "y", "z")), 0, 256)
        other_path = tmp_path / "other.csv"
        other_path.write_text(write_trace(other))
        assert main(["classify", "--model", str(model_path), str(other_path)]) == 1
        err = capsys.readouterr().err
        assert "m1" in err and "x" in err

    def test_classify_same_trace_twice_identical(self, tmp_path, capsys):
        manifest = make_manifest(tmp_path, {"low": 0.4, "high": 1.5})
        model_path = tmp_path / "model.json"
        main(["train", "--manifest", str(manifest), "--out", str(model_path), *FAST_FLAGS])
        capsys.readouterr()
        trace = str(next(tmp_path.glob("low_*.csv")))
        main(["classify", "--model", str(model_path), trace])
        first = capsys.readouterr().out
        main(["classify", "--model", str(model_path), trace])
        assert capsys.readouterr().out == first


class TestEvaluate:
    def test_report_files_and_determinism(self, tmp_path, capsys):
        manifest = make_manifest(tmp_path, {"low": 0.4, "high": 1.5},
                                 samples_per_family=4)
        out_a = tmp_path / "report_a"
        args = ["evaluate", "--manifest", str(manifest), "--repetitions", "2",
                "--q-runs", "2", "--seed", "5", *FAST_FLAGS]
        assert main([*args, "--out-dir", str(out_a)]) == 0
        printed = capsys.readouterr().out
        assert "accuracy_mean=" in printed

        summary = json.loads((out_a / "summary.json").read_text())
        assert summary["repetitions"] == 2
        assert summary["accuracy_mean"] == 1.0  # separable by construction
        for name in ("repetitions.csv", "confusion.csv", "precision_recall.csv"):
            assert (out_a / name).exists()

        out_b = tmp_path / "report_b"
        assert main([*args, "--out-dir", str(out_b)]) == 0
        for name in ("summary.json", "repetitions.csv", "confusion.csv",
                     "precision_recall.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


class TestStability:
    def test_box_mode(self, tmp_path):
        spec_path = tmp_path / "fam.json"
        write_spec(spec_path, 0.5)
        args = ["stability", "--spec", str(spec_path), "--mode", "box",
                "--runs", "5", "--length", "512", "--seed", "2",
                "--out-dir", str(tmp_path / "box")]
        assert main(args) == 0
        text = (tmp_path / "box" / "stability_box.csv").read_text()
        assert text.splitlines()[0] == "metric,min,q1,median,q3,max,iqr,outliers"
        assert main(args) == 0
        assert (tmp_path / "box" / "stability_box.csv").read_text() == text

    def test_sweep_mode_row_per_metric_length(self, tmp_path):
        spec_path = tmp_path / "fam.json"
        write_spec(spec_path, 0.5)
        assert main(["stability", "--spec", str(spec_path), "--mode", "sweep",
                     "--lengths", "256,512", "--runs-per-length", "2",
                     "--out-dir", str(tmp_path / "sweep")]) == 0
        lines = (tmp_path / "sweep" / "length_sweep.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 2  # header + metrics x lengths


class TestCollectCommand:
    def test_collect_then_fingerprint(self, tmp_path, capsys):
        root = tmp_path / "proc"
        root.mkdir()
        (root / "stat").write_text("cpu 100 0 50 800\n")
        (root / "meminfo").write_text("MemFree: 4096 kB\n")
        rules = [
            {"metric": "cpu_user", "path": "stat", "prefix": "cpu ", "token": 1,
             "kind": "counter"},
            {"metric": "mem_free", "path": "meminfo", "prefix": "MemFree:", "token": 1,
             "kind": "gauge"},
        ]
        rules_path = tmp_path / "rules.json"
        rules_path.write_text(json.dumps(rules))
        out = tmp_path / "trace.csv"
        assert main(["collect", "--rules", str(rules_path), "--root", str(root),
                     "--interval", "0.001", "--samples", "64", "--out", str(out)]) == 0
        assert main(["fingerprint", str(out)]) == 0
        assert capsys.readouterr().out.startswith("feature,value\n")

    def test_missing_rule_file(self, tmp_path, capsys):
        assert main(["collect", "--rules", str(tmp_path / "none.json"),
                     "--samples", "4", "--out", str(tmp_path / "t.csv")]) == 1
        assert "error" in capsys.readouterr().err
