"""Runtime checks of the convergence analysis: one-sided bounds (observed <= bound)
and the log-log decay rate of the averaged sub-optimality.
"""
import logging
from typing import Mapping, NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import lstsq

from src.core.agent import AgentState, Sample, gradient_coefficient
from src.core.exceptions import ArgumentError
from src.core.kernels import as_dictionary, kernel_eval, kernel_matrix
from src.core.models import HyperParams, KernelSpec, TheoryConstants
from src.core.objectives import get_proximity
from src.core.rkhs import KernelExpansion, hilbert_norm, residual_norm
from src.simulator.metrics import RoundMetrics

logger = logging.getLogger(__name__)

PROJECTION_SLACK = 1e-8
RATE_THRESHOLD = -0.35


class BoundCheck(NamedTuple):
    observed: float
    bound: float
    ok: bool


class RateFit(NamedTuple):
    slope: float
    intercept: float
    ok: bool


def _dual_sq_norm(states: Sequence[AgentState]) -> float:
    return float(sum(mu ** 2 for state in states for mu in state.out_duals.values()))


def agent_gradient_sq_norm(state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
                           hp: HyperParams) -> float:
    """||coef * k(x, .) + lam * f||_H^2 for one agent's stochastic primal gradient."""
    coef = gradient_coefficient(state, sample, neighbor_evals)
    kxx = kernel_eval(state.spec, sample.x, sample.x)
    fx = state.predict(sample.x)
    return coef ** 2 * kxx + 2 * hp.lam * coef * fx + hp.lam ** 2 * hilbert_norm(state.f) ** 2


def gradient_norm_bound(states: Sequence[AgentState], samples: Sequence[Sample],
                        neighbor_evals: Sequence[Mapping[int, float]], hp: HyperParams,
                        constants: TheoryConstants) -> BoundCheck:
    """Network primal gradient against 4VX^2C^2 + 4VX^2 L_h^2 E ||mu||^2 + 2V lam^2 R_B^2."""
    observed = 0.0
    for state, sample, evals in zip(states, samples, neighbor_evals):
        observed += agent_gradient_sq_norm(state, sample, evals, hp)
    V, X, C = constants.n_agents, constants.kernel_sup, constants.lipschitz_c
    bound = (4 * V * X ** 2 * C ** 2
             + 4 * V * X ** 2 * constants.lipschitz_lh ** 2 * constants.n_edges * _dual_sq_norm(states)
             + 2 * V * constants.lam ** 2 * constants.radius_rb ** 2)
    return BoundCheck(observed, bound, observed <= bound)


def dual_gradient_bound(states: Sequence[AgentState], samples: Sequence[Sample],
                        neighbor_evals: Sequence[Mapping[int, float]],
                        gamma: Sequence[Mapping[int, float]], hp: HyperParams,
                        constants: TheoryConstants) -> BoundCheck:
    """sum_ij (h_ij - gamma_ij + nu - delta*eta*mu_ij)^2 against
    E (2 K1 + 2 L_h^2 X^2 R_B^2 + 2 delta^2 eta^2 ||mu||^2)."""
    observed = 0.0
    for state, sample, evals, tolerances in zip(states, samples, neighbor_evals, gamma):
        prox = get_proximity(state.prox)
        fx = state.predict(sample.x)
        for j in sorted(state.out_duals):
            grad = (prox.value(fx, evals[j]) - tolerances[j] + hp.nu
                    - hp.delta * hp.eta * state.out_duals[j])
            observed += grad ** 2
    X, R = constants.kernel_sup, constants.radius_rb
    bound = constants.n_edges * (2 * constants.k1 + 2 * constants.lipschitz_lh ** 2 * X ** 2 * R ** 2
                                 + 2 * hp.delta ** 2 * hp.eta ** 2 * _dual_sq_norm(states))
    return BoundCheck(observed, bound, observed <= bound)


def projection_error_bound(before: KernelExpansion, after: KernelExpansion, hp: HyperParams) -> BoundCheck:
    """||after - before||_H <= epsilon for one compression step."""
    observed = residual_norm(after, before)
    bound = hp.budget
    return BoundCheck(observed, bound, observed <= bound + PROJECTION_SLACK)


def rate_regression(series: Union[Sequence[RoundMetrics], Sequence[float]], optimum: float = 0.0,
                    floor: float = 0.0) -> RateFit:
    """Slope of log(avg objective - optimum - floor) against log t over the second half.

    `series` is either a metrics stream (its avg_loss is used) or the averaged
    objective values themselves, one per round starting at t = 1.
    """
    values = np.array([m.avg_loss if isinstance(m, RoundMetrics) else m for m in series], dtype=np.float64)
    if values.shape[0] < 4:
        raise ArgumentError(f"need at least 4 rounds for a rate fit, got {values.shape[0]}")
    t = np.arange(1, values.shape[0] + 1, dtype=np.float64)
    gap = values - optimum - floor
    half = slice(values.shape[0] // 2, None)
    t, gap = t[half], gap[half]
    positive = gap > 0
    if positive.sum() < 2:
        raise ArgumentError("sub-optimality gap is not positive over the second half")
    slope, intercept = np.polyfit(np.log(t[positive]), np.log(gap[positive]), 1)
    return RateFit(float(slope), float(intercept), bool(slope <= RATE_THRESHOLD))


def batch_optimum_squared_loss(X, Y, spec: KernelSpec, lam: float,
                               grid) -> Tuple[float, KernelExpansion]:
    """min_f (1/n) sum 0.5 (f(x_n) - y_n)^2 + (lam/2) ||f||^2 over the span of grid atoms.

    Solved densely from the normal equations; the returned value is the
    regularized empirical objective at the optimum.
    """
    X = as_dictionary(X)
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    G = as_dictionary(grid, dim=X.shape[1])
    n = X.shape[0]
    K_xg = kernel_matrix(spec, X, G)
    K_gg = kernel_matrix(spec, G, G)
    lhs = K_xg.T @ K_xg / n + lam * K_gg
    rhs = K_xg.T @ Y / n
    weights = lstsq(lhs, rhs)[0]
    f = KernelExpansion(spec, G, weights)
    residual = K_xg @ weights - Y
    value = 0.5 * float(residual @ residual) / n + 0.5 * lam * hilbert_norm(f) ** 2
    return value, f
