"""Kernel expansions f(.) = sum_m w_m k(d_m, .) and Hilbert-space arithmetic on them.

Expansions are immutable values; every operation returns a new expansion.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import List

import numpy as np

from src.core.exceptions import ArgumentError, ContractError
from src.core.kernels import as_dictionary, as_point, kernel_matrix, kernel_vector
from src.core.models import KernelFamily, KernelSpec


@dataclass(frozen=True, eq=False)
class KernelExpansion:
    spec: KernelSpec
    dictionary: np.ndarray  # (M, p)
    weights: np.ndarray  # (M,)
    version: int = field(default=0, compare=False)

    def __post_init__(self):
        D = np.array(as_dictionary(self.dictionary), copy=True)
        w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        if D.shape[0] != w.shape[0]:
            raise ArgumentError(f"{D.shape[0]} atoms but {w.shape[0]} weights")
        D.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "dictionary", D)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zero(cls, spec: KernelSpec, dim: int) -> "KernelExpansion":
        return cls(spec, np.zeros((0, dim)), np.zeros(0))

    @property
    def model_order(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self.dictionary.shape[1])

    @cached_property
    def gram(self) -> np.ndarray:
        # cached per instance; a new dictionary is always a new instance
        return kernel_matrix(self.spec, self.dictionary, self.dictionary)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def with_spec(self, spec: KernelSpec) -> "KernelExpansion":
        """Reinterpret the same atoms and weights under another kernel."""
        return KernelExpansion(spec, self.dictionary, self.weights, self.version + 1)


def _check_dim(f: KernelExpansion, x: np.ndarray) -> None:
    if x.shape[0] != f.dim:
        raise ArgumentError(f"point has dimension {x.shape[0]}, expansion has {f.dim}")


def _check_same_space(f: KernelExpansion, g: KernelExpansion) -> None:
    if f.spec != g.spec:
        raise ContractError(f"kernel specs differ: {f.spec} vs {g.spec}")
    if f.dim != g.dim:
        raise ArgumentError(f"dimension mismatch: {f.dim} vs {g.dim}")


def evaluate(f: KernelExpansion, x) -> float:
    x = as_point(x)
    _check_dim(f, x)
    if f.model_order == 0:
        return 0.0
    return float(np.dot(f.weights, kernel_vector(f.spec, f.dictionary, x)))


def evaluate_many(f: KernelExpansion, X) -> np.ndarray:
    X = as_dictionary(X, dim=f.dim)
    if f.model_order == 0:
        return np.zeros(X.shape[0])
    return kernel_matrix(f.spec, X, f.dictionary) @ f.weights


def hilbert_inner(f: KernelExpansion, g: KernelExpansion) -> float:
    _check_same_space(f, g)
    if f.model_order == 0 or g.model_order == 0:
        return 0.0
    if f is g:
        return float(f.weights @ f.gram @ f.weights)
    cross = kernel_matrix(f.spec, f.dictionary, g.dictionary)
    return float(f.weights @ cross @ g.weights)


def hilbert_norm(f: KernelExpansion) -> float:
    """sqrt(w^T K w); a slightly negative radicand from round-off is clamped to 0."""
    if f.model_order == 0:
        return 0.0
    return float(np.sqrt(max(hilbert_inner(f, f), 0.0)))


def scale_weights(f: KernelExpansion, c: float) -> KernelExpansion:
    return KernelExpansion(f.spec, f.dictionary, f.weights * c, f.version + 1)


def append_atom(f: KernelExpansion, x, w_new: float) -> KernelExpansion:
    x = as_point(x)
    _check_dim(f, x)
    D = np.vstack([f.dictionary, x.reshape(1, -1)])
    w = np.append(f.weights, float(w_new))
    return KernelExpansion(f.spec, D, w, f.version + 1)


def ball_project(f: KernelExpansion, radius: float) -> KernelExpansion:
    if radius <= 0:
        raise ArgumentError(f"radius must be positive, got {radius}")
    norm = hilbert_norm(f)
    if norm <= radius:
        return f
    return scale_weights(f, radius / norm)


def difference(f: KernelExpansion, g: KernelExpansion) -> KernelExpansion:
    """f - g as one expansion over the concatenated dictionaries."""
    _check_same_space(f, g)
    D = np.vstack([f.dictionary, g.dictionary])
    w = np.concatenate([f.weights, -g.weights])
    return KernelExpansion(f.spec, D, w)


def square_root_factor(gram: np.ndarray) -> np.ndarray:
    """Factor F with F^T F = gram, eigenvalues below the numerical rank cut set to zero.

    Norms of F @ w avoid the cancellation of sqrt(w^T K w) when atoms repeat.
    """
    if gram.shape[0] == 0:
        return np.zeros((0, 0))
    eigvals, eigvecs = np.linalg.eigh(gram)
    cutoff = max(eigvals.max(), 0.0) * gram.shape[0] * np.finfo(np.float64).eps
    eigvals = np.where(eigvals > cutoff, eigvals, 0.0)
    return np.sqrt(eigvals)[:, None] * eigvecs.T


def residual_norm(f: KernelExpansion, g: KernelExpansion) -> float:
    """||f - g||_H, computed through a square-root factor of the joint Gram."""
    diff = difference(f, g)
    if diff.model_order == 0:
        return 0.0
    factor = square_root_factor(diff.gram)
    return float(np.linalg.norm(factor @ diff.weights))


# -- flat text records -------------------------------------------------------------

def to_record(f: KernelExpansion) -> str:
    """One line: p M sigma, then D row-major, then w."""
    values: List[str] = [str(f.dim), str(f.model_order), repr(float(f.spec.bandwidth))]
    values += [repr(float(v)) for v in f.dictionary.reshape(-1)]
    values += [repr(float(v)) for v in f.weights]
    return " ".join(values)


def from_record(record: str) -> KernelExpansion:
    tokens = record.split()
    if len(tokens) < 3:
        raise ArgumentError("record too short")
    p, M, sigma = int(tokens[0]), int(tokens[1]), float(tokens[2])
    body = np.array([float(v) for v in tokens[3:]])
    if body.shape[0] != p * M + M:
        raise ArgumentError(f"record holds {body.shape[0]} values, expected {p * M + M}")
    D = body[: p * M].reshape(M, p)
    w = body[p * M:]
    return KernelExpansion(KernelSpec(family=KernelFamily.GAUSSIAN, bandwidth=sigma), D, w)
