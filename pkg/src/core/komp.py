"""Destructive kernel orthogonal matching pursuit.

Atoms are removed one at a time from the candidate dictionary while the
best achievable Hilbert-norm error of the refit stays within the budget.
"""
import logging
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lstsq

from src.core.exceptions import ArgumentError, NumericError
from src.core.kernels import as_dictionary, kernel_matrix
from src.core.models import KompBudget
from src.core.rkhs import KernelExpansion, hilbert_norm, square_root_factor

logger = logging.getLogger(__name__)

MAX_JITTER = 1e-4


class KompResult(NamedTuple):
    expansion: KernelExpansion
    pruned_count: int
    residual: float  # ||expansion - target||_H
    kept: List[int]


def _jitter_schedule(jitter: float):
    if jitter == 0:
        yield 0.0
        jitter = 1e-10
    exponent = 0
    while jitter * 10 ** exponent <= MAX_JITTER * (1 + 1e-9):
        yield jitter * 10 ** exponent
        exponent += 1


def solve_gram(gram: np.ndarray, rhs: np.ndarray, jitter: float = 1e-10) -> np.ndarray:
    """Solve (gram + jitter I) w = rhs, raising the ridge x10 up to 1e-4 on failure."""
    identity = np.eye(gram.shape[0])
    for attempt, ridge in enumerate(_jitter_schedule(jitter)):
        try:
            factor = cho_factor(gram + ridge * identity, lower=True, check_finite=True)
        except LinAlgError:
            continue
        if attempt > 0:
            logger.debug(f"Gram solve needed ridge {ridge:.1e} (size {gram.shape[0]})")
        return cho_solve(factor, rhs)
    condition = float(np.linalg.cond(gram))
    raise NumericError(
        f"Gram matrix of size {gram.shape[0]} is singular even with ridge {MAX_JITTER:.0e}",
        condition=condition,
    )


def refit_weights(target: KernelExpansion, D, jitter: float = 1e-10) -> np.ndarray:
    """Least-squares weights on dictionary D that best approximate target in H."""
    D = as_dictionary(D, dim=target.dim)
    if D.shape[0] == 0:
        raise ArgumentError("cannot refit on an empty dictionary")
    gram = kernel_matrix(target.spec, D, D)
    if target.model_order == 0:
        return np.zeros(D.shape[0])
    rhs = kernel_matrix(target.spec, D, target.dictionary) @ target.weights
    return solve_gram(gram, rhs, jitter)


class _SubsetFitter:
    """Refits and residuals for subsets of the target's own atoms."""

    def __init__(self, target: KernelExpansion, jitter: float):
        self.target = target
        self.jitter = jitter
        self.gram = target.gram
        self.factor = square_root_factor(self.gram)
        self.image = self.factor @ target.weights
        self.norm = hilbert_norm(target)

    def refit(self, keep: Sequence[int]) -> np.ndarray:
        keep = list(keep)
        rhs = self.gram[keep] @ self.target.weights
        return solve_gram(self.gram[np.ix_(keep, keep)], rhs, self.jitter)

    def error(self, keep: Sequence[int]) -> float:
        # exact least-squares residual, no ridge
        keep = list(keep)
        if not keep:
            return self.norm
        columns = self.factor[:, keep]
        try:
            weights = lstsq(columns, self.image)[0]
        except LinAlgError as e:
            raise NumericError(f"least-squares refit on {len(keep)} atoms failed: {e}") from e
        return float(np.linalg.norm(self.image - columns @ weights))


def removal_error(target: KernelExpansion, keep_indices: Sequence[int], jitter: float = 1e-10) -> float:
    """Hilbert norm of the least-squares residual of target on the kept atoms."""
    keep = sorted(set(int(k) for k in keep_indices))
    if any(k < 0 or k >= target.model_order for k in keep):
        raise ArgumentError(f"keep indices {keep} out of range for {target.model_order} atoms")
    if not keep:
        return hilbert_norm(target)
    return _SubsetFitter(target, jitter).error(keep)


def komp_compress(target: KernelExpansion, budget: KompBudget) -> KompResult:
    size = target.model_order
    if size == 0:
        return KompResult(target, 0, 0.0, [])

    fitter = _SubsetFitter(target, budget.jitter)
    threshold = budget.epsilon + budget.tolerance
    keep = list(range(size))
    residual = 0.0

    while keep:
        errors = [fitter.error(keep[:pos] + keep[pos + 1:]) for pos in range(len(keep))]
        best = int(np.argmin(errors))  # first minimum, i.e. smallest atom index
        if errors[best] > threshold:
            break
        residual = errors[best]
        del keep[best]

    pruned = size - len(keep)
    if pruned == 0:
        return KompResult(target, 0, 0.0, keep)
    logger.debug(f"KOMP pruned {pruned} of {size} atoms, residual {residual:.3e}")
    if not keep:
        return KompResult(KernelExpansion.zero(target.spec, target.dim), pruned, residual, keep)
    weights = fitter.refit(keep)
    compressed = KernelExpansion(target.spec, target.dictionary[keep], weights, target.version + 1)
    return KompResult(compressed, pruned, residual, keep)


def komp_prune(target: KernelExpansion, budget: KompBudget):
    """Returns (compressed expansion, number of atoms removed)."""
    result = komp_compress(target, budget)
    return result.expansion, result.pruned_count
