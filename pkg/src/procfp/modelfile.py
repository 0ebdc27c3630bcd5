"""Versioned JSON persistence for trained models.

The file holds everything classification needs: the metric schema, the DFA
configuration the fingerprints were computed with, the standardization
statistics, the MI ranking, the selected subset plus its PCA, the one-vs-one
SVM ensemble, and the training metadata. Floats are serialized with their
shortest round-trip representation, so a reloaded model predicts
bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dfa import DfaConfig
from .pipeline import FamilyClassifier
from .selection import MiRanking, PrincipalComponents, Standardizer
from .svm import BinarySvc, MulticlassSvc
from .trace import MetricSchema

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelFile:
    """A trained classifier plus the context needed to apply it."""

    schema: MetricSchema
    dfa: DfaConfig
    classifier: FamilyClassifier


def _floats(values) -> list:
    return [float(v) for v in np.asarray(values, dtype=float).ravel()]


def _matrix(values) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.asarray(values, dtype=float)]


def _binary_to_dict(model: BinarySvc) -> dict:
    return {
        "support_vectors": _matrix(model.support_vectors_),
        "dual_coef": _floats(model.dual_coef_),
        "intercept": float(model.intercept_),
        "converged": bool(model.converged_),
    }


def _binary_from_dict(doc: dict, params: dict) -> BinarySvc:
    model = BinarySvc(**params)
    model.support_vectors_ = np.asarray(doc["support_vectors"], dtype=float)
    if model.support_vectors_.size == 0:
        model.support_vectors_ = model.support_vectors_.reshape(0, 0)
    model.dual_coef_ = np.asarray(doc["dual_coef"], dtype=float)
    model.intercept_ = float(doc["intercept"])
    model.converged_ = bool(doc["converged"])
    model.n_iter_ = 0
    model.dual_objective_ = 0.0
    return model


def model_to_dict(model: ModelFile) -> dict:
    clf = model.classifier
    svm_params = {
        "C": clf.svm_.C,
        "gamma": clf.svm_.gamma,
        "kkt_tolerance": clf.svm_.kkt_tolerance,
        "max_passes": clf.svm_.max_passes,
    }
    return {
        "format_version": FORMAT_VERSION,
        "schema": list(model.schema.names),
        "dfa": {
            "min_box": model.dfa.min_box,
            "max_box_fraction": model.dfa.max_box_fraction,
            "boxes_per_decade": model.dfa.boxes_per_decade,
            "detrend_order": model.dfa.detrend_order,
        },
        "standardizer": {
            "mean": _floats(clf.standardizer_.mean_),
            "scale": _floats(clf.standardizer_.scale_),
            "constant": [bool(b) for b in clf.standardizer_.constant_mask_],
        },
        "ranking": _floats(clf.ranking_.mi),
        "selection": {
            "q": int(clf.q_),
            "indices": [int(i) for i in clf.selected_indices_],
            "pca": {
                "variance_fraction": clf.pca_.variance_fraction,
                "mean": _floats(clf.pca_.mean_),
                "components": _matrix(clf.pca_.components_[: clf.pca_.n_components_]),
                "explained_variance_ratio": _floats(
                    clf.pca_.explained_variance_ratio_[: clf.pca_.n_components_]
                ),
                "n_components": int(clf.pca_.n_components_),
                "degenerate": bool(clf.pca_.degenerate_),
            },
        },
        "svm": {
            "params": svm_params,
            "classes": list(clf.classes_),
            "pairs": [
                {
                    "positive": int(a),
                    "negative": int(b),
                    "model": _binary_to_dict(binary),
                }
                for (a, b), binary in sorted(clf.svm_.models_.items())
            ],
        },
        "metadata": {
            "seed": clf.seed,
            "q_grid": [int(q) for q in clf.q_grid],
            "bins": clf.bins,
            "variance_fraction": clf.variance_fraction,
            "c_grid": [float(c) for c in clf.c_grid],
            "gamma_grid": (
                None if clf.gamma_grid is None else [float(g) for g in clf.gamma_grid]
            ),
            "folds": clf.folds,
            "cv_accuracy_by_q": {str(q): acc for q, acc in clf.cv_accuracy_by_q_.items()},
            "params_by_q": {
                str(q): {"C": c, "gamma": g} for q, (c, g) in clf.params_by_q_.items()
            },
            "chosen": {
                "q": int(clf.q_),
                "C": svm_params["C"],
                "gamma": svm_params["gamma"],
                "cv_accuracy": clf.cv_accuracy_,
            },
        },
    }


def model_from_dict(doc: dict) -> ModelFile:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    schema = MetricSchema(tuple(doc["schema"]))
    dfa = DfaConfig(**doc["dfa"])

    meta = doc["metadata"]
    clf = FamilyClassifier(
        q_grid=tuple(meta["q_grid"]),
        bins=meta["bins"],
        variance_fraction=meta["variance_fraction"],
        c_grid=tuple(meta["c_grid"]),
        gamma_grid=None if meta["gamma_grid"] is None else tuple(meta["gamma_grid"]),
        folds=meta["folds"],
        seed=meta["seed"],
    )

    standardizer = Standardizer()
    standardizer.mean_ = np.asarray(doc["standardizer"]["mean"], dtype=float)
    standardizer.scale_ = np.asarray(doc["standardizer"]["scale"], dtype=float)
    standardizer.constant_mask_ = np.asarray(doc["standardizer"]["constant"], dtype=bool)
    clf.standardizer_ = standardizer

    clf.ranking_ = MiRanking(np.asarray(doc["ranking"], dtype=float))

    selection = doc["selection"]
    clf.q_ = int(selection["q"])
    clf.selected_indices_ = np.asarray(selection["indices"], dtype=int)
    pca_doc = selection["pca"]
    pca = PrincipalComponents(pca_doc["variance_fraction"])
    pca.mean_ = np.asarray(pca_doc["mean"], dtype=float)
    pca.components_ = np.asarray(pca_doc["components"], dtype=float)
    pca.explained_variance_ratio_ = np.asarray(
        pca_doc["explained_variance_ratio"], dtype=float
    )
    pca.explained_variance_ = pca.explained_variance_ratio_.copy()
    pca.n_components_ = int(pca_doc["n_components"])
    pca.degenerate_ = bool(pca_doc["degenerate"])
    clf.pca_ = pca

    svm_doc = doc["svm"]
    params = dict(svm_doc["params"])
    svm = MulticlassSvc(**params)
    svm.classes_ = tuple(svm_doc["classes"])
    svm.models_ = {
        (pair["positive"], pair["negative"]): _binary_from_dict(pair["model"], params)
        for pair in svm_doc["pairs"]
    }
    clf.svm_ = svm
    clf.classes_ = svm.classes_
    clf.cv_accuracy_ = float(meta["chosen"]["cv_accuracy"])
    clf.cv_accuracy_by_q_ = {int(q): float(a) for q, a in meta["cv_accuracy_by_q"].items()}
    clf.params_by_q_ = {
        int(q): (float(v["C"]), float(v["gamma"])) for q, v in meta["params_by_q"].items()
    }

    return ModelFile(schema=schema, dfa=dfa, classifier=clf)


def save_model(model: ModelFile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path: str | Path) -> ModelFile:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid model file: {exc}") from exc
    return model_from_dict(doc)
