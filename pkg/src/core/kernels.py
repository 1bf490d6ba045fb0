"""Kernel functions and batch evaluation between point sets.

Points are 1-d arrays of length p. Dictionaries are stored row-wise as (M, p)
arrays, one atom per row.
"""
import numpy as np
from scipy.spatial.distance import cdist

from src.core.exceptions import ArgumentError
from src.core.models import KernelFamily, KernelSpec


def as_point(x) -> np.ndarray:
    point = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if point.ndim != 1:
        raise ArgumentError(f"expected a point, got array of shape {point.shape}")
    return point


def as_dictionary(D, dim: int = None) -> np.ndarray:
    points = np.asarray(D, dtype=np.float64)
    if points.ndim == 1:
        # a flat list of scalars is a 1-d dictionary
        points = points.reshape(-1, 1) if dim in (None, 1) else points.reshape(-1, dim)
    if points.ndim != 2:
        raise ArgumentError(f"expected an (M, p) dictionary, got shape {points.shape}")
    if dim is not None and points.shape[0] > 0 and points.shape[1] != dim:
        raise ArgumentError(f"dictionary has dimension {points.shape[1]}, expected {dim}")
    return points


def _profile(spec: KernelSpec, sq_dist: np.ndarray) -> np.ndarray:
    if spec.family == KernelFamily.GAUSSIAN:
        return np.exp(-sq_dist / (2.0 * spec.bandwidth ** 2))
    raise ArgumentError(f"unsupported kernel family {spec.family}")


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    x, x2 = as_point(x), as_point(x2)
    if x.shape != x2.shape:
        raise ArgumentError(f"dimension mismatch: {x.shape[0]} vs {x2.shape[0]}")
    diff = x - x2
    return float(_profile(spec, np.dot(diff, diff)))


def kernel_matrix(spec: KernelSpec, D, D2) -> np.ndarray:
    """Cross-kernel matrix with entry (m, n) = k(D[m], D2[n])."""
    D, D2 = as_dictionary(D), as_dictionary(D2)
    if D.shape[0] == 0 or D2.shape[0] == 0:
        return np.zeros((D.shape[0], D2.shape[0]))
    if D.shape[1] != D2.shape[1]:
        raise ArgumentError(f"dimension mismatch: {D.shape[1]} vs {D2.shape[1]}")
    return _profile(spec, cdist(D, D2, metric="sqeuclidean"))


def kernel_vector(spec: KernelSpec, D, x) -> np.ndarray:
    x = as_point(x)
    D = as_dictionary(D, dim=x.shape[0])
    if D.shape[0] == 0:
        return np.zeros(0)
    return kernel_matrix(spec, D, x.reshape(1, -1))[:, 0]
