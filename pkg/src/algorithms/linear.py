"""Linear-in-parameters baseline: f(x) = w^T phi(x) with a fixed feature map,
trained with the same primal-dual recursion as the kernel methods.
"""
from dataclasses import dataclass, replace
from typing import Callable, Dict, Mapping, Sequence

import numpy as np

from src.algorithms import LearningAlgorithm
from src.core.agent import AgentState, Sample, dual_step, gradient_coefficient, initial_state
from src.core.exceptions import ArgumentError
from src.core.kernels import as_point
from src.core.models import FeatureMap, HyperParams, KernelSpec, LossSpec, ProximitySpec


def _poly(degree: int) -> Callable[[np.ndarray, float], np.ndarray]:
    def features(x: np.ndarray, frequency: float) -> np.ndarray:
        return np.concatenate([[1.0]] + [x ** k for k in range(1, degree + 1)])
    return features


def _sine(x: np.ndarray, frequency: float) -> np.ndarray:
    # a * t + b * sin(omega t) per input coordinate
    return np.concatenate([x, np.sin(frequency * x)])


_FEATURE_MAPS: Dict[FeatureMap, Callable[[np.ndarray, float], np.ndarray]] = {
    FeatureMap.POLY2: _poly(2),
    FeatureMap.POLY3: _poly(3),
    FeatureMap.SINE: _sine,
}


def feature_count(feature_map: FeatureMap, dim: int) -> int:
    return {FeatureMap.POLY2: 1 + 2 * dim, FeatureMap.POLY3: 1 + 3 * dim,
            FeatureMap.SINE: 2 * dim}[FeatureMap(feature_map)]


@dataclass(frozen=True, eq=False)
class LinearModel:
    feature_map: FeatureMap
    weights: np.ndarray
    dim: int
    frequency: float = 1.0

    @property
    def model_order(self) -> int:
        return int(self.weights.shape[0])

    def features(self, x) -> np.ndarray:
        x = as_point(x)
        if x.shape[0] != self.dim:
            raise ArgumentError(f"point has dimension {x.shape[0]}, model has {self.dim}")
        return _FEATURE_MAPS[self.feature_map](x, self.frequency)

    def __call__(self, x) -> float:
        return float(self.weights @ self.features(x))


class LinearAlgorithm(LearningAlgorithm):
    def __init__(self, hp: HyperParams, spec: KernelSpec, loss: LossSpec, prox: ProximitySpec,
                 feature_map: FeatureMap = FeatureMap.SINE, frequency: float = 1.0):
        super().__init__(hp, spec, loss, prox)
        if feature_map not in _FEATURE_MAPS:
            raise ArgumentError(f"Feature map '{feature_map}' not supported")
        self.feature_map = FeatureMap(feature_map)
        self.frequency = float(frequency)

    def initial_state(self, agent_id: int, dim: int, neighbors: Sequence[int]) -> AgentState:
        state = initial_state(agent_id, dim, self.spec, self.loss, self.prox, neighbors)
        weights = np.zeros(feature_count(self.feature_map, dim))
        return replace(state, f=LinearModel(self.feature_map, weights, dim, self.frequency))

    def step(self, state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
             gamma: Mapping[int, float]) -> AgentState:
        duals = dual_step(state, sample, neighbor_evals, gamma, self.hp)
        coef = gradient_coefficient(state, sample, neighbor_evals)
        model: LinearModel = state.f
        weights = (1.0 - self.hp.eta * self.hp.lam) * model.weights - self.hp.eta * coef * model.features(sample.x)
        norm = float(np.linalg.norm(weights))
        if norm > self.hp.radius_rb:
            weights = weights * (self.hp.radius_rb / norm)
        return replace(state, f=replace(model, weights=weights), out_duals=duals)
