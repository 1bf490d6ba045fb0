"""Per-agent HALK updates: functional gradient step, KOMP compression, dual ascent
and the optional online bandwidth adaptation.

The primal and dual steps of a round both read the round-start function f_{i,t}
and duals mu_{ij,t}; callers pass the neighbor evaluations f_{j,t}(x_{i,t})
collected during the exchange.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Mapping, NamedTuple, Optional

import numpy as np
from scipy.spatial.distance import cdist

from src.core.exceptions import ArgumentError, ProtocolError
from src.core.kernels import as_dictionary
from src.core.komp import komp_compress
from src.core.models import HyperParams, KernelSpec, LossSpec, ProximitySpec, TheoryConstants
from src.core.objectives import get_loss, get_proximity
from src.core.rkhs import KernelExpansion, append_atom, ball_project, scale_weights

logger = logging.getLogger(__name__)


class Sample(NamedTuple):
    x: np.ndarray
    y: float


@dataclass(frozen=True)
class AgentState:
    agent_id: int
    f: KernelExpansion
    out_duals: Dict[int, float]
    spec: KernelSpec
    loss: LossSpec
    prox: ProximitySpec
    compression_error: float = 0.0
    pruned: int = 0

    @property
    def neighbors(self):
        return sorted(self.out_duals)

    @property
    def model_order(self) -> int:
        return self.f.model_order

    def predict(self, x) -> float:
        return self.f(x)


def initial_state(agent_id: int, dim: int, spec: KernelSpec, loss: LossSpec,
                  prox: ProximitySpec, neighbors=()) -> AgentState:
    """f_{i,0} = 0 with all outgoing duals at 0."""
    return AgentState(
        agent_id=agent_id,
        f=KernelExpansion.zero(spec, dim),
        out_duals={int(j): 0.0 for j in neighbors},
        spec=spec,
        loss=loss,
        prox=prox,
    )


def _require_evals(state: AgentState, neighbor_evals: Mapping[int, float]) -> None:
    missing = [j for j in state.out_duals if j not in neighbor_evals]
    if missing:
        raise ProtocolError(f"agent {state.agent_id} is missing evaluations from neighbors {missing}")


def gradient_coefficient(state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
                         multipliers: Optional[Mapping[int, float]] = None) -> float:
    """l'(f_i(x), y) + sum_j mu_ij h'(f_i(x), f_j(x)); multipliers override the duals."""
    _require_evals(state, neighbor_evals)
    weights = state.out_duals if multipliers is None else multipliers
    fx = state.predict(sample.x)
    loss_fn = get_loss(state.loss)
    prox_fn = get_proximity(state.prox)
    coef = loss_fn.derivative(fx, sample.y)
    for j in sorted(state.out_duals):
        coef += weights[j] * prox_fn.derivative_first(fx, neighbor_evals[j])
    return coef


def primal_uncompressed(state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
                        hp: HyperParams, multipliers: Optional[Mapping[int, float]] = None) -> KernelExpansion:
    """f~_{i,t+1} = (1 - eta*lam) f_{i,t} - eta * coef * k(x_{i,t}, .)"""
    coef = gradient_coefficient(state, sample, neighbor_evals, multipliers)
    shrunk = scale_weights(state.f, 1.0 - hp.eta * hp.lam)
    return append_atom(shrunk, sample.x, -hp.eta * coef)


def primal_step(state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
                hp: HyperParams, multipliers: Optional[Mapping[int, float]] = None) -> AgentState:
    candidate = primal_uncompressed(state, sample, neighbor_evals, hp, multipliers)
    spec = state.spec
    if hp.adapt_bandwidth:
        # the expansion keeps its weights under the new kernel
        spec = adapt_bandwidth(spec, candidate.dictionary)
        candidate = candidate.with_spec(spec)
    result = komp_compress(candidate, hp.komp_budget())
    f_next = ball_project(result.expansion, hp.radius_rb)
    return replace(state, f=f_next, spec=spec, compression_error=result.residual,
                   pruned=result.pruned_count)


def dual_step(state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
              gamma: Mapping[int, float], hp: HyperParams) -> Dict[int, float]:
    """mu_{ij,t+1} = [mu_{ij,t}(1 - delta*eta^2) + eta(h_ij - gamma_ij + nu)]_+"""
    _require_evals(state, neighbor_evals)
    prox_fn = get_proximity(state.prox)
    fx = state.predict(sample.x)
    decay = 1.0 - hp.delta * hp.eta ** 2
    updated = {}
    for j in sorted(state.out_duals):
        slack = prox_fn.value(fx, neighbor_evals[j]) - gamma[j] + hp.nu
        updated[j] = max(state.out_duals[j] * decay + hp.eta * slack, 0.0)
    return updated


def halk_round(state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
               gamma: Mapping[int, float], hp: HyperParams) -> AgentState:
    """One simultaneous primal-dual update from the round-t snapshot."""
    duals = dual_step(state, sample, neighbor_evals, gamma, hp)
    stepped = primal_step(state, sample, neighbor_evals, hp)
    return replace(stepped, out_duals=duals)


def adapt_bandwidth(spec: KernelSpec, dictionary) -> KernelSpec:
    """Kernel-weighted mean squared spacing of the (pre-compression) dictionary atoms."""
    D = as_dictionary(dictionary)
    if D.shape[0] < 2:
        return spec
    sq_dist = cdist(D, D, metric="sqeuclidean")
    logits = -sq_dist / (2.0 * spec.bandwidth ** 2)
    np.fill_diagonal(logits, -np.inf)
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    per_atom = (weights * sq_dist).sum(axis=1) / weights.sum(axis=1)
    bandwidth = float(np.sqrt(per_atom.mean()))
    if not np.isfinite(bandwidth) or bandwidth <= 0.0:
        logger.warning(f"Degenerate dictionary for bandwidth update, keeping {spec.bandwidth}")
        return spec
    return spec.model_copy(update={"bandwidth": bandwidth})


def compute_nu(constants: TheoryConstants, T: int, alpha: float) -> float:
    """Constraint tightening nu = zeta / sqrt(T) + Lambda * alpha at the lower bounds."""
    if constants.slater_xi <= 0:
        raise ArgumentError(f"Slater margin xi must be positive, got {constants.slater_xi}")
    if T < 1:
        raise ArgumentError(f"horizon T must be positive, got {T}")
    V, R, C, X = constants.n_agents, constants.radius_rb, constants.lipschitz_c, constants.kernel_sup
    lam, E = constants.lam, constants.n_edges
    K = (8 * V * X ** 2 * C ** 2 + 4 * V * lam ** 2 * R ** 2
         + 2 * E * constants.k1 + 2 * E * constants.lipschitz_lh ** 2 * X ** 2 * R ** 2)
    dual_radius = 4 * V * R * (C * X + lam * R) / constants.slater_xi
    zeta = 0.5 * (R ** 2 + (1 + constants.delta) * (2 + 2 * dual_radius ** 2) + K)
    big_lambda = 4 * V * R
    return zeta / math.sqrt(T) + big_lambda * alpha
