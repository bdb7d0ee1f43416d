import math
import warnings

import numpy as np
import pytest

from kernelcast.data import Dataset
from kernelcast.kernelmap import (KERNEL_KINDS, KernelError, kernel_matrix,
                                  kernel_value, map_dataset, map_matrix)
from kernelcast.sampling import ReferenceSet


def refs_of(points, sigmas, dist="euclidean"):
    return ReferenceSet(np.asarray(points, dtype=float),
                        np.asarray(sigmas, dtype=float),
                        "random", dist, "centers")


def test_gaussian_zero_distance_is_one():
    assert kernel_value("gaussian", 0.0, 3.0) == 1.0


def test_gaussian_at_sigma():
    assert kernel_value("gaussian", 2.0, 2.0) == pytest.approx(math.exp(-1.0))


def test_cauchy_at_sigma_is_half():
    assert kernel_value("cauchy", 7.0, 7.0) == pytest.approx(0.5)


def test_sigmoid_at_sigma_is_half():
    assert kernel_value("sigmoid", 1.5, 1.5) == pytest.approx(0.5)


def test_sigmoid_increases_with_distance():
    # this kernel grows as the point moves away from the reference
    lo = kernel_value("sigmoid", 0.0, 1.0)
    hi = kernel_value("sigmoid", 5.0, 1.0)
    assert lo < 0.5 < hi


def test_linear_passes_distance_through():
    assert kernel_value("linear", 4.25, 99.0) == 4.25


def test_cauchy_worked_example():
    feats = np.array([[0.0, 0.0]])
    refs = refs_of([[3.0, 4.0], [0.0, 1.0]], [5.0, 1.0])
    mapped = map_matrix(feats, refs, "cauchy")
    # distances (5, 1) with sigmas (5, 1) -> 1/(1+1) each
    assert np.allclose(mapped, [[0.5, 0.5]])


def test_mapped_shape_is_n_by_k():
    rng = np.random.default_rng(0)
    feats = rng.normal(size=(17, 3))
    refs = refs_of(rng.normal(size=(5, 3)), np.ones(5))
    for kernel in KERNEL_KINDS:
        assert map_matrix(feats, refs, kernel).shape == (17, 5)


def test_map_dataset_keeps_labels():
    feats = np.array([[0.0], [1.0], [2.0]])
    ds = Dataset(feats, np.array([0, 1, 0]), ["a", "b"])
    refs = refs_of([[0.0]], [1.0])
    mds = map_dataset(ds, refs, "gaussian")
    assert np.array_equal(mds.labels, ds.labels)
    assert mds.features.shape == (3, 1)


@pytest.mark.parametrize("kernel,decreasing", [
    ("gaussian", True), ("cauchy", True), ("sigmoid", False),
])
def test_monotone_in_distance(kernel, decreasing):
    dists = np.linspace(0.0, 20.0, 50).reshape(-1, 1)
    values = kernel_matrix(kernel, dists, np.array([2.0])).ravel()
    diffs = np.diff(values)
    assert np.all(diffs < 0) if decreasing else np.all(diffs > 0)


@pytest.mark.parametrize("kernel", ["gaussian", "sigmoid", "cauchy"])
def test_bounded_kernels_stay_in_unit_interval(kernel):
    rng = np.random.default_rng(1)
    dists = rng.uniform(0.0, 1e6, size=(40, 3))
    sigmas = rng.uniform(1e-3, 1e3, size=3)
    values = kernel_matrix(kernel, dists, sigmas)
    assert np.all(values >= 0.0) and np.all(values <= 1.0)


def test_no_overflow_at_extreme_arguments():
    # ratios reach 1e300; without the exponent clamp the sigmoid/gaussian
    # paths would trip numpy overflow warnings
    dists = np.array([[0.0, 1e150], [1e150, 0.0]])
    sigmas = np.array([1e-150, 1e150])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for kernel in KERNEL_KINDS:
            values = kernel_matrix(kernel, dists, sigmas)
            assert np.all(np.isfinite(values))


def test_single_row_matches_batch_row():
    rng = np.random.default_rng(2)
    feats = rng.normal(size=(6, 2))
    refs = refs_of(rng.normal(size=(3, 2)), rng.uniform(0.5, 2.0, size=3))
    for kernel in KERNEL_KINDS:
        batch = map_matrix(feats, refs, kernel)
        for i in range(6):
            one = map_matrix(feats[i:i + 1], refs, kernel)
            assert np.array_equal(one[0], batch[i])


def test_angle_distance_respected():
    feats = np.array([[1.0, 0.0]])
    refs = refs_of([[0.0, 1.0]], [math.pi / 2], dist="angle")
    mapped = map_matrix(feats, refs, "cauchy")
    # angle pi/2 equals sigma -> 0.5
    assert mapped[0, 0] == pytest.approx(0.5)


def test_rejects_nonpositive_sigma():
    with pytest.raises(KernelError):
        kernel_value("gaussian", 1.0, 0.0)
    with pytest.raises(KernelError):
        kernel_matrix("cauchy", np.ones((2, 2)), np.array([1.0, -3.0]))


def test_rejects_negative_distance():
    with pytest.raises(KernelError):
        kernel_value("gaussian", -0.5, 1.0)


def test_rejects_unknown_kernel():
    with pytest.raises(KernelError):
        kernel_value("rbf", 1.0, 1.0)
