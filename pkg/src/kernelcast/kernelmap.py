"""Kernel feature mapping.

A sample x becomes the vector of kernel responses to each reference point:
column j of the mapped matrix is kernel(d(x, c_j), sigma_j).  The mapped
space has one dimension per reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .sampling import ReferenceSet

KERNEL_KINDS = ("linear", "gaussian", "sigmoid", "cauchy")

# exp() saturates rather than overflows: arguments are clamped to this range.
_EXP_CLAMP = 700.0


class KernelError(ValueError):
    """Invalid kernel parameters."""


@dataclass
class MappedDataset:
    """Kernel-space feature matrix with the original labels carried over."""

    features: np.ndarray
    labels: np.ndarray | None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise KernelError("mapped features must be a 2-d matrix")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def kernel_matrix(kind: str, dists: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    """Apply one kernel columnwise to a distance matrix.

    kinds:
      linear   k(d, s) = d
      gaussian k(d, s) = exp(-d / s)
      sigmoid  k(d, s) = 1 / (1 + exp(s - d))   (increases with distance)
      cauchy   k(d, s) = 1 / (1 + d / s)
    """
    if kind not in KERNEL_KINDS:
        raise KernelError(f"unknown kernel {kind!r}; expected one of {KERNEL_KINDS}")
    dists = np.asarray(dists, dtype=np.float64)
    sigmas = np.asarray(sigmas, dtype=np.float64)
    if not np.isfinite(sigmas).all() or (sigmas <= 0.0).any():
        raise KernelError("sigma must be finite and strictly positive")
    if kind == "linear":
        return dists.copy()
    if kind == "gaussian":
        return np.exp(np.clip(-dists / sigmas, -_EXP_CLAMP, _EXP_CLAMP))
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(np.clip(sigmas - dists, -_EXP_CLAMP, _EXP_CLAMP)))
    return 1.0 / (1.0 + dists / sigmas)


def kernel_value(kind: str, dist: float, sigma: float) -> float:
    """Scalar kernel response for one distance/scale pair."""
    if dist < 0.0 or not np.isfinite(dist):
        raise KernelError("distance must be finite and non-negative")
    return float(kernel_matrix(kind, np.array([[dist]]), np.array([sigma]))[0, 0])


def map_matrix(features: np.ndarray, refs: ReferenceSet, kernel: str) -> np.ndarray:
    """Map a raw feature matrix into kernel space against a reference set."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != refs.dim:
        raise KernelError(
            f"feature width {features.shape[-1]} does not match reference width {refs.dim}")
    dists = geometry.pairwise(refs.distance_used, features, refs.refs)
    return kernel_matrix(kernel, dists, refs.sigmas)


def map_dataset(ds, refs: ReferenceSet, kernel: str) -> MappedDataset:
    """Map a Dataset into kernel space, carrying labels through unchanged."""
    return MappedDataset(map_matrix(ds.features, refs, kernel), ds.labels)
