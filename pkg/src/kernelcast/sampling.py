"""Prototype (reference point) samplers.

Four strategies pick k reference points from a training set: uniform random
rows, k-means centroids, density-net removal, and farthest-first traversal.
Each reference also gets a scale sigma_c used later by the kernel transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry, rand

SAMPLER_KINDS = ("density", "fft", "kmeans", "random")
REF_TYPES = ("centers", "centroids")


class SamplingError(ValueError):
    """Invalid sampler parameters for the given dataset."""


@dataclass
class RegionAssignment:
    """Maps each training row to the ordinal of the reference owning it."""

    region_of: np.ndarray

    def __post_init__(self):
        self.region_of = np.asarray(self.region_of, dtype=np.int64)

    def members(self, ordinal: int) -> np.ndarray:
        return np.flatnonzero(self.region_of == ordinal)


@dataclass
class ReferenceSet:
    """Reference points plus their per-reference scales.

    refs : (k, d) reference vectors (training rows or centroids).
    sigmas : (k,) strictly positive scales; degenerate regions were repaired.
    kind_used / distance_used / ref_type : how the set was produced.
    """

    refs: np.ndarray
    sigmas: np.ndarray
    kind_used: str
    distance_used: str
    ref_type: str

    def __post_init__(self):
        self.refs = np.asarray(self.refs, dtype=np.float64)
        self.sigmas = np.asarray(self.sigmas, dtype=np.float64)
        if self.refs.ndim != 2 or self.refs.shape[0] < 1:
            raise SamplingError("reference set must hold at least one row vector")
        if self.sigmas.shape != (self.refs.shape[0],):
            raise SamplingError("need exactly one sigma per reference")
        if not np.isfinite(self.sigmas).all() or (self.sigmas <= 0).any():
            raise SamplingError("sigmas must be finite and strictly positive")
        if self.kind_used not in SAMPLER_KINDS:
            raise SamplingError(f"unknown sampler kind {self.kind_used!r}")
        if self.distance_used not in geometry.DISTANCE_KINDS:
            raise SamplingError(f"unknown distance {self.distance_used!r}")
        if self.ref_type not in REF_TYPES:
            raise SamplingError(f"unknown reference type {self.ref_type!r}")

    @property
    def k(self) -> int:
        return self.refs.shape[0]

    @property
    def dim(self) -> int:
        return self.refs.shape[1]


def _check_k(k: int, n: int) -> None:
    if k < 1:
        raise SamplingError("k must be at least 1")
    if k > n:
        raise SamplingError(f"cannot pick {k} references from {n} rows")


def sample_random(ds, k: int, seed: int) -> list[int]:
    """Pick k distinct row indices uniformly at random."""
    _check_k(k, ds.n)
    rng = rand.derive(seed, rand.SAMPLER)
    return [int(i) for i in rng.choice(ds.n, size=k, replace=False)]


def _kmeanspp_seed(features: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = features.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.square(features - features[chosen[0]]).sum(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total > 0.0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # All remaining mass sits on already-chosen positions (duplicate
            # rows); fall back to a uniform pick among unchosen indices.
            remaining = np.setdiff1d(np.arange(n), np.asarray(chosen))
            nxt = int(remaining[rng.integers(remaining.size)])
        chosen.append(nxt)
        d2 = np.minimum(d2, np.square(features - features[nxt]).sum(axis=1))
    return features[chosen].astype(np.float64).copy()


def lloyd(features: np.ndarray, k: int, rng: np.random.Generator,
          max_iters: int = 100) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """k-means++ seeding followed by Lloyd iterations to a fixpoint.

    Returns (centroids, assignments, inertia_history) where the history holds
    the sum of squared distances to the assigned centroid after every
    assignment step.  Stops when assignments stop changing or after
    ``max_iters`` iterations.  An empty cluster is reseeded at the point
    farthest from its current (stale) centroid.
    """
    features = np.asarray(features, dtype=np.float64)
    centroids = _kmeanspp_seed(features, k, rng)
    prev = None
    history: list[float] = []
    for _ in range(max_iters):
        dists = geometry.pairwise("euclidean", features, centroids)
        assign = np.argmin(dists, axis=1)
        history.append(float(np.square(dists[np.arange(len(features)), assign]).sum()))
        if prev is not None and np.array_equal(assign, prev):
            break
        new = centroids.copy()
        used_far: list[int] = []
        for j in range(k):
            members = features[assign == j]
            if members.shape[0]:
                new[j] = members.mean(axis=0)
            else:
                column = dists[:, j].copy()
                if used_far:
                    column[used_far] = -1.0
                far = int(np.argmax(column))
                used_far.append(far)
                new[j] = features[far]
        centroids = new
        prev = assign
    return centroids, assign, history


def sample_kmeans(ds, k: int, seed: int, max_iters: int = 100) -> ReferenceSet:
    """References are the centroids of a k-means run (euclidean only)."""
    _check_k(k, ds.n)
    rng = rand.derive(seed, rand.SAMPLER)
    centroids, _, _ = lloyd(ds.features, k, rng, max_iters=max_iters)
    sigmas = _region_sigmas(ds.features, centroids, "euclidean")
    return ReferenceSet(centroids, _repair_sigmas(sigmas), "kmeans", "euclidean", "centroids")


def sample_density(ds, k: int, dist: str, seed: int) -> tuple[list[int], RegionAssignment]:
    """Density-net sampling by batch removal.

    With region size l = ceil(n / k), repeatedly pick a random remaining row,
    record it as a center, and remove it together with its l-1 nearest
    remaining neighbors.  Yields ceil(n / l) centers, which can be fewer
    than k; each removal batch is that center's region.
    """
    _check_k(k, ds.n)
    n = ds.n
    region_size = math.ceil(n / k)
    rng = rand.derive(seed, rand.SAMPLER)
    remaining = np.arange(n)
    centers: list[int] = []
    region_of = np.full(n, -1, dtype=np.int64)
    while remaining.size:
        c = int(remaining[rng.integers(remaining.size)])
        others = remaining[remaining != c]
        take = others[:0]
        if others.size and region_size > 1:
            dvec = geometry.pairwise(dist, ds.features[[c]], ds.features[others])[0]
            # Stable sort: equal distances resolve to the lowest row index
            # because `remaining` is kept in ascending order.
            take = others[np.argsort(dvec, kind="stable")[:region_size - 1]]
        batch = np.concatenate(([c], take))
        region_of[batch] = len(centers)
        centers.append(c)
        remaining = np.setdiff1d(remaining, batch, assume_unique=True)
    return centers, RegionAssignment(region_of)


def fft_traverse(features: np.ndarray, k: int, dist: str,
                 first: int) -> tuple[list[int], list[float]]:
    """Farthest-first traversal from a given start row.

    Returns the picked row indices and the selection radii: radii[i] is the
    min-distance-to-chosen of the (i+2)-th pick at the moment it was chosen.
    The radii sequence is non-increasing.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    centers = [int(first)]
    picked = np.zeros(n, dtype=bool)
    picked[first] = True
    dmin = geometry.pairwise(dist, features, features[[first]])[:, 0]
    radii: list[float] = []
    while len(centers) < k:
        masked = np.where(picked, -np.inf, dmin)
        w = int(np.argmax(masked))
        radii.append(float(dmin[w]))
        picked[w] = True
        centers.append(w)
        dmin = np.minimum(dmin, geometry.pairwise(dist, features, features[[w]])[:, 0])
    return centers, radii


def sample_fft(ds, k: int, dist: str, seed: int) -> tuple[list[int], float | None]:
    """Farthest-first traversal from a random start.

    Returns the picked indices and the last selection radius r (None when
    k = 1).  The picked set is r-separated and covers the dataset within r.
    """
    _check_k(k, ds.n)
    rng = rand.derive(seed, rand.SAMPLER)
    first = int(rng.integers(ds.n))
    centers, radii = fft_traverse(ds.features, k, dist, first)
    return centers, (radii[-1] if radii else None)


def _region_sigmas(features: np.ndarray, refs: np.ndarray, dist: str) -> np.ndarray:
    """Max distance from each reference to the training rows nearest to it."""
    dists = geometry.pairwise(dist, features, refs)
    assign = np.argmin(dists, axis=1)
    sigmas = np.zeros(refs.shape[0])
    for j in range(refs.shape[0]):
        mask = assign == j
        if mask.any():
            sigmas[j] = float(dists[mask, j].max())
    return sigmas


def _repair_sigmas(sigmas: np.ndarray) -> np.ndarray:
    """Replace degenerate (zero) scales with the mean of the positive ones."""
    positive = sigmas[sigmas > 0.0]
    fill = float(positive.mean()) if positive.size else 1.0
    return np.where(sigmas > 0.0, sigmas, fill)


def assign_regions(dist: str, features: np.ndarray, refs: np.ndarray) -> RegionAssignment:
    """Voronoi assignment of rows to references (ties to the lowest index)."""
    dists = geometry.pairwise(dist, features, refs)
    return RegionAssignment(np.argmin(dists, axis=1))


def finalize_references(ds, picked: list[int], ref_type: str, dist: str, sampler: str,
                        fft_radius: float | None = None,
                        fft_shared_sigma: bool = False) -> ReferenceSet:
    """Turn picked row indices into a ReferenceSet with per-reference scales.

    With ref_type "centroids" each picked row is replaced by the centroid of
    its Voronoi region over the full training set (empty regions keep the
    original row).  sigma_c is the maximum distance from reference c to the
    training rows whose nearest reference is c; an FFT set may instead share
    the final traversal radius across all references.
    """
    if ref_type not in REF_TYPES:
        raise SamplingError(f"unknown reference type {ref_type!r}")
    refs = ds.features[np.asarray(picked, dtype=np.int64)].astype(np.float64).copy()
    if ref_type == "centroids":
        assign = assign_regions(dist, ds.features, refs).region_of
        converted = refs.copy()
        for j in range(refs.shape[0]):
            members = ds.features[assign == j]
            if members.shape[0]:
                converted[j] = members.mean(axis=0)
        refs = converted
    if fft_shared_sigma and sampler == "fft" and fft_radius is not None and fft_radius > 0.0:
        sigmas = np.full(refs.shape[0], float(fft_radius))
    else:
        sigmas = _region_sigmas(ds.features, refs, dist)
    return ReferenceSet(refs, _repair_sigmas(sigmas), sampler, dist, ref_type)


def make_reference_set(ds, sampler: str, k: int, dist: str, ref_type: str, seed: int,
                       fft_shared_sigma: bool = False, max_iters: int = 100) -> ReferenceSet:
    """Run one sampler end to end and return its ReferenceSet.

    k-means only supports euclidean distance and centroid references.
    """
    if sampler not in SAMPLER_KINDS:
        raise SamplingError(f"unknown sampler {sampler!r}; expected one of {SAMPLER_KINDS}")
    if dist not in geometry.DISTANCE_KINDS:
        raise SamplingError(f"unknown distance {dist!r}")
    if sampler == "kmeans":
        if dist != "euclidean" or ref_type != "centroids":
            raise SamplingError("kmeans sampling requires euclidean distance and centroid references")
        return sample_kmeans(ds, k, seed, max_iters=max_iters)
    if sampler == "random":
        picked = sample_random(ds, k, seed)
        return finalize_references(ds, picked, ref_type, dist, sampler)
    if sampler == "density":
        picked, _ = sample_density(ds, k, dist, seed)
        return finalize_references(ds, picked, ref_type, dist, sampler)
    picked, radius = sample_fft(ds, k, dist, seed)
    return finalize_references(ds, picked, ref_type, dist, sampler,
                               fft_radius=radius, fft_shared_sigma=fft_shared_sigma)
