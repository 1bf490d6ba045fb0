"""Model-order envelope M_{i,t} <= beta * (R_{M,i,t} / alpha)^(2p) with
R_{M,i,t} = C + L_h * E * max_j mu_{ij,t}, E the number of undirected edges.

beta is existential, so it is fitted as the largest observed ratio; the check
then asks whether that fit is stable over the second half of the run.
"""
import logging
from typing import List, NamedTuple, Sequence

import numpy as np

from src.core.exceptions import ArgumentError
from src.simulator.metrics import RoundMetrics

logger = logging.getLogger(__name__)

STABILITY_FACTOR = 2.0


class ModelOrderBound(NamedTuple):
    beta: float
    envelope: List[float]  # per round, max over agents of the bound
    beta_third_quarter: float
    beta_fourth_quarter: float
    ok: bool


def check_model_order_bound(history: Sequence[RoundMetrics], alpha: float, p: int,
                            lipschitz_c: float, lipschitz_lh: float,
                            n_edges: int) -> ModelOrderBound:
    if not history:
        raise ArgumentError("empty metrics history")
    return model_order_bound_from_traces([m.model_orders for m in history], [m.max_duals for m in history],
                                         alpha, p, lipschitz_c, lipschitz_lh, n_edges)


def model_order_bound_from_traces(model_orders, max_duals, alpha: float, p: int, lipschitz_c: float,
                                  lipschitz_lh: float, n_edges: int) -> ModelOrderBound:
    """Same check on (rounds, agents) arrays of model orders and largest outgoing duals."""
    if alpha <= 0:
        raise ArgumentError(f"alpha must be positive, got {alpha}")
    if p < 1:
        raise ArgumentError(f"feature dimension must be positive, got {p}")
    orders = np.asarray(model_orders, dtype=np.float64)
    max_duals = np.asarray(max_duals, dtype=np.float64)
    if orders.ndim != 2 or orders.shape[0] == 0 or orders.shape != max_duals.shape:
        raise ArgumentError(f"traces must be non-empty and aligned, got {orders.shape} and {max_duals.shape}")
    if n_edges < 0:
        raise ArgumentError(f"edge count must be non-negative, got {n_edges}")
    radius = lipschitz_c + lipschitz_lh * n_edges * max_duals
    scale = (radius / alpha) ** (2 * p)
    ratios = orders / scale
    per_round = ratios.max(axis=1)

    beta = float(per_round.max())
    envelope = (beta * scale).max(axis=1)
    T = orders.shape[0]
    third = per_round[T // 2: (3 * T) // 4]
    fourth = per_round[(3 * T) // 4:]
    beta3 = float(third.max()) if third.size else 0.0
    beta4 = float(fourth.max()) if fourth.size else 0.0

    finite = bool(np.all(np.isfinite(orders)) and np.isfinite(beta))
    if min(beta3, beta4) > 0:
        stable = max(beta3, beta4) / min(beta3, beta4) <= STABILITY_FACTOR
    else:
        stable = beta3 == beta4
    ok = finite and stable and bool(np.all(orders.max(axis=1) <= envelope * (1 + 1e-12)))
    if not ok:
        logger.warning(f"Model-order bound check failed: beta {beta:.3e}, "
                       f"second-half fits {beta3:.3e} / {beta4:.3e}")
    return ModelOrderBound(beta, envelope.tolist(), beta3, beta4, ok)
