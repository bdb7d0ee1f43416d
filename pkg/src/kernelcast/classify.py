"""Internal classifiers operating on kernel-mapped features.

Two small, fully deterministic classifiers: k-nearest neighbors with uniform
or inverse-distance vote weighting, and Gaussian naive Bayes.  All ties break
toward the lowest label id so repeated runs agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .kernelmap import MappedDataset

KNN_WEIGHTINGS = ("uniform", "distance")

# Inverse-distance vote weight is 1 / (eps + d); eps guards exact hits.
_WEIGHT_EPS = 1e-9

# Per-feature variance floor factor for naive Bayes, relative to the mean
# feature variance of the training matrix.
_VAR_FLOOR_FACTOR = 1e-9


class ClassifierError(ValueError):
    """Invalid classifier parameters or inputs."""


@dataclass(frozen=True)
class KnnParams:
    """kNN hyperparameters: neighbor count, vote weighting, distance kind."""

    neighbors: int
    weighting: str
    distance: str

    def __post_init__(self):
        if self.neighbors < 1:
            raise ClassifierError("neighbors must be at least 1")
        if self.weighting not in KNN_WEIGHTINGS:
            raise ClassifierError(f"unknown weighting {self.weighting!r}")
        if self.distance not in geometry.DISTANCE_KINDS:
            raise ClassifierError(f"unknown distance {self.distance!r}")


@dataclass
class KnnModel:
    """Stored training matrix in mapped space plus its labels."""

    features: np.ndarray
    labels: np.ndarray
    params: KnnParams
    n_classes: int


@dataclass
class GnbModel:
    """Per-class priors and per-feature Gaussian moments.

    class_ids lists the label ids seen in training, ascending; priors, means
    and variances are aligned with it.
    """

    class_ids: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    n_classes: int


def _require_labeled(mds: MappedDataset) -> np.ndarray:
    if mds.labels is None:
        raise ClassifierError("training data must be labeled")
    if mds.n < 1:
        raise ClassifierError("training data must not be empty")
    return mds.labels


def knn_fit(mds: MappedDataset, params: KnnParams, n_classes: int | None = None) -> KnnModel:
    """Store the mapped training matrix; kNN does all work at predict time."""
    labels = _require_labeled(mds)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    return KnnModel(mds.features.copy(), labels.copy(), params, int(n_classes))


def _query_features(queries) -> np.ndarray:
    feats = queries.features if isinstance(queries, MappedDataset) else queries
    return np.asarray(feats, dtype=np.float64)


def knn_predict(model: KnnModel, queries) -> np.ndarray:
    """Predict label ids for mapped query rows.

    Neighbor rank ties break toward the lower training-row index; vote ties
    break toward the lower label id.
    """
    feats = _query_features(queries)
    dists = geometry.pairwise(model.params.distance, feats, model.features)
    k = min(model.params.neighbors, model.features.shape[0])
    order = np.argsort(dists, axis=1, kind="stable")[:, :k]
    rows = np.arange(feats.shape[0])[:, None]
    votes = model.labels[order]
    if model.params.weighting == "uniform":
        weights = np.ones_like(votes, dtype=np.float64)
    else:
        weights = 1.0 / (_WEIGHT_EPS + dists[rows, order])
    scores = np.zeros((feats.shape[0], model.n_classes))
    np.add.at(scores, (np.broadcast_to(rows, votes.shape), votes), weights)
    return np.argmax(scores, axis=1).astype(np.int64)


def gnb_fit(mds: MappedDataset, n_classes: int | None = None) -> GnbModel:
    """Fit per-class priors and per-feature Gaussian moments.

    Variances are floored at 1e-9 times the mean feature variance of the full
    training matrix so constant mapped columns cannot produce singular
    likelihoods.
    """
    labels = _require_labeled(mds)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    feats = mds.features
    base = float(feats.var(axis=0).mean())
    floor = _VAR_FLOOR_FACTOR * base if base > 0.0 else _VAR_FLOOR_FACTOR
    class_ids = np.unique(labels)
    priors = np.empty(class_ids.size)
    means = np.empty((class_ids.size, feats.shape[1]))
    variances = np.empty_like(means)
    for i, c in enumerate(class_ids):
        rows = feats[labels == c]
        priors[i] = rows.shape[0] / feats.shape[0]
        means[i] = rows.mean(axis=0)
        variances[i] = np.maximum(rows.var(axis=0), floor)
    return GnbModel(class_ids, priors, means, variances, int(n_classes))


def gnb_predict(model: GnbModel, queries) -> np.ndarray:
    """Argmax of log prior plus summed per-feature Gaussian log densities.

    Ties break toward the lowest label id (class_ids is ascending).
    """
    feats = _query_features(queries)
    if feats.shape[1] != model.means.shape[1]:
        raise ClassifierError("query width does not match the fitted model")
    scores = np.empty((feats.shape[0], model.class_ids.size))
    for i in range(model.class_ids.size):
        dev = feats - model.means[i]
        loglik = -0.5 * (np.log(2.0 * np.pi * model.variances[i]) +
                         dev * dev / model.variances[i]).sum(axis=1)
        scores[:, i] = np.log(model.priors[i]) + loglik
    return model.class_ids[np.argmax(scores, axis=1)].astype(np.int64)
