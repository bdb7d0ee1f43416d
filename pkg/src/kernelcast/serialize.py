"""Versioned JSON documents for models, ensembles, and search reports.

Every document carries ``version`` and ``kind``.  Matrices serialize as
row-major nested lists; non-finite scores (failed configurations, unknown
cv_ber) serialize as null.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .classify import GnbModel, KnnModel, KnnParams
from .data import ScalerSpec
from .ensemble import Ensemble
from .modelsel import Configuration, EvalOutcome, KmsModel, SearchReport
from .sampling import ReferenceSet

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Unrecognized or malformed document."""


def _matrix(a) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def _score(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _unscore(value) -> float:
    return math.inf if value is None else float(value)


def scaler_to_doc(spec: ScalerSpec) -> dict:
    return {
        "kind": spec.kind,
        "offset": _matrix(spec.offset),
        "scale": _matrix(spec.scale),
        "active": [bool(x) for x in spec.active],
    }


def scaler_from_doc(doc: dict) -> ScalerSpec:
    return ScalerSpec(doc["kind"], np.asarray(doc["offset"], dtype=np.float64),
                      np.asarray(doc["scale"], dtype=np.float64),
                      np.asarray(doc["active"], dtype=bool))


def refs_to_doc(refs: ReferenceSet) -> dict:
    return {
        "refs": _matrix(refs.refs),
        "sigmas": _matrix(refs.sigmas),
        "kind_used": refs.kind_used,
        "distance_used": refs.distance_used,
        "ref_type": refs.ref_type,
    }


def refs_from_doc(doc: dict) -> ReferenceSet:
    return ReferenceSet(np.asarray(doc["refs"], dtype=np.float64),
                        np.asarray(doc["sigmas"], dtype=np.float64),
                        doc["kind_used"], doc["distance_used"], doc["ref_type"])


def _inner_to_doc(inner) -> dict:
    if isinstance(inner, KnnModel):
        return {
            "kind": "knn",
            "features": _matrix(inner.features),
            "labels": [int(x) for x in inner.labels],
            "neighbors": inner.params.neighbors,
            "weighting": inner.params.weighting,
            "distance": inner.params.distance,
            "n_classes": inner.n_classes,
        }
    if isinstance(inner, GnbModel):
        return {
            "kind": "gnb",
            "class_ids": [int(x) for x in inner.class_ids],
            "priors": _matrix(inner.priors),
            "means": _matrix(inner.means),
            "variances": _matrix(inner.variances),
            "n_classes": inner.n_classes,
        }
    raise FormatError(f"cannot serialize inner model of type {type(inner).__name__}")


def _inner_from_doc(doc: dict):
    if doc["kind"] == "knn":
        params = KnnParams(int(doc["neighbors"]), doc["weighting"], doc["distance"])
        return KnnModel(np.asarray(doc["features"], dtype=np.float64),
                        np.asarray(doc["labels"], dtype=np.int64),
                        params, int(doc["n_classes"]))
    if doc["kind"] == "gnb":
        return GnbModel(np.asarray(doc["class_ids"], dtype=np.int64),
                        np.asarray(doc["priors"], dtype=np.float64),
                        np.asarray(doc["means"], dtype=np.float64),
                        np.asarray(doc["variances"], dtype=np.float64),
                        int(doc["n_classes"]))
    raise FormatError(f"unknown inner model kind {doc['kind']!r}")


def kms_to_doc(model: KmsModel) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "kms_model",
        "config": model.config.to_dict(),
        "scaler": scaler_to_doc(model.scaler),
        "references": refs_to_doc(model.refs),
        "inner": _inner_to_doc(model.inner),
        "label_names": list(model.label_names),
        "cv_ber": _score(model.cv_ber),
    }


def kms_from_doc(doc: dict) -> KmsModel:
    cv = doc.get("cv_ber")
    return KmsModel(Configuration.from_dict(doc["config"]),
                    scaler_from_doc(doc["scaler"]),
                    refs_from_doc(doc["references"]),
                    _inner_from_doc(doc["inner"]),
                    list(doc["label_names"]),
                    None if cv is None else float(cv))


def ensemble_to_doc(ens: Ensemble) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "ensemble",
        "vote_seed": ens.vote_seed,
        "members": [kms_to_doc(m) for m in ens.members],
    }


def ensemble_from_doc(doc: dict) -> Ensemble:
    return Ensemble([kms_from_doc(m) for m in doc["members"]], int(doc["vote_seed"]))


def report_to_doc(report: SearchReport) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "search_report",
        "master_seed": report.master_seed,
        "fold_count": report.fold_count,
        "scaler": report.scaler,
        "mode": report.mode,
        "sampler_filter": report.sampler_filter,
        "data_shape": list(report.data_shape),
        "fold_of": [int(x) for x in report.fold_of],
        "best_index": report.best_index,
        "evaluated": [
            {
                "config": e.config.to_dict(),
                "cv_ber": _score(e.cv_ber),
                "seed": e.seed,
                "wall_time": e.wall_time,
                "error": e.error,
            }
            for e in report.entries
        ],
    }


def report_from_doc(doc: dict) -> SearchReport:
    entries = [
        EvalOutcome(Configuration.from_dict(e["config"]), _unscore(e["cv_ber"]),
                    int(e["seed"]), float(e["wall_time"]), e.get("error"))
        for e in doc["evaluated"]
    ]
    return SearchReport(entries, int(doc["best_index"]), int(doc["master_seed"]),
                        int(doc["fold_count"]), doc["scaler"], doc["mode"],
                        doc["sampler_filter"], tuple(doc["data_shape"]),
                        np.asarray(doc["fold_of"], dtype=np.int64))


_WRITERS = {
    KmsModel: kms_to_doc,
    Ensemble: ensemble_to_doc,
    SearchReport: report_to_doc,
}

_READERS = {
    "kms_model": kms_from_doc,
    "ensemble": ensemble_from_doc,
    "search_report": report_from_doc,
}


def to_json(obj) -> str:
    """Serialize a model, ensemble, or report deterministically."""
    writer = _WRITERS.get(type(obj))
    if writer is None:
        raise FormatError(f"cannot serialize object of type {type(obj).__name__}")
    return json.dumps(writer(obj), sort_keys=True, indent=2) + "\n"


def from_json(text: str):
    """Parse any document written by to_json, dispatching on its kind."""
    doc = json.loads(text)
    if not isinstance(doc, dict) or "kind" not in doc:
        raise FormatError("document is missing its kind")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported document version {doc.get('version')!r}")
    reader = _READERS.get(doc["kind"])
    if reader is None:
        raise FormatError(f"unknown document kind {doc['kind']!r}")
    return reader(doc)


def save(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(obj))


def load(path):
    with open(path, encoding="utf-8") as fh:
        return from_json(fh.read())
