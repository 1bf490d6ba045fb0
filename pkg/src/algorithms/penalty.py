from dataclasses import replace
from typing import Mapping, Sequence

from src.algorithms import LearningAlgorithm
from src.core.agent import AgentState, Sample, initial_state, primal_step
from src.core.exceptions import ArgumentError
from src.core.models import HyperParams, KernelSpec, LossSpec, ProximitySpec


class PenaltyAlgorithm(LearningAlgorithm):
    """Primal-only updates with every multiplier pinned at the penalty coefficient c."""

    def __init__(self, hp: HyperParams, spec: KernelSpec, loss: LossSpec, prox: ProximitySpec,
                 penalty_c: float = 0.08):
        super().__init__(hp, spec, loss, prox)
        if penalty_c < 0:
            raise ArgumentError(f"penalty coefficient must be non-negative, got {penalty_c}")
        self.penalty_c = float(penalty_c)

    def initial_state(self, agent_id: int, dim: int, neighbors: Sequence[int]) -> AgentState:
        state = initial_state(agent_id, dim, self.spec, self.loss, self.prox, neighbors)
        return replace(state, out_duals={j: self.penalty_c for j in state.out_duals})

    def step(self, state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
             gamma: Mapping[int, float]) -> AgentState:
        return primal_step(state, sample, neighbor_evals, self.hp)
