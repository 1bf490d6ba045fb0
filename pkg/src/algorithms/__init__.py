from abc import ABC, abstractmethod
from typing import Mapping, Sequence

from src.core.agent import AgentState, Sample
from src.core.models import HyperParams, KernelSpec, LossSpec, ProximitySpec


class LearningAlgorithm(ABC):
    """Per-agent update rule driven by the round engine."""

    def __init__(self, hp: HyperParams, spec: KernelSpec, loss: LossSpec, prox: ProximitySpec):
        self.hp = hp
        self.spec = spec
        self.loss = loss
        self.prox = prox

    @abstractmethod
    def initial_state(self, agent_id: int, dim: int, neighbors: Sequence[int]) -> AgentState:
        """State of an agent before its first sample."""
        pass

    @abstractmethod
    def step(self, state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
             gamma: Mapping[int, float]) -> AgentState:
        """One round for one agent, reading only the round-start snapshot."""
        pass
