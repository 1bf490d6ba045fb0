from typing import Mapping, Sequence

from src.algorithms import LearningAlgorithm
from src.core.agent import AgentState, Sample, halk_round, initial_state


class HalkAlgorithm(LearningAlgorithm):
    def initial_state(self, agent_id: int, dim: int, neighbors: Sequence[int]) -> AgentState:
        return initial_state(agent_id, dim, self.spec, self.loss, self.prox, neighbors)

    def step(self, state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
             gamma: Mapping[int, float]) -> AgentState:
        return halk_round(state, sample, neighbor_evals, gamma, self.hp)
