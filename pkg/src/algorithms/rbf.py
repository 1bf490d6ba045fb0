"""Fixed-dictionary RBF baseline: the dictionary is chosen up front and never grows.

Each round takes the uncompressed functional step and projects it back onto
the span of the fixed atoms by least squares in H.
"""
import itertools
import math
from dataclasses import replace
from typing import Mapping, Sequence

import numpy as np

from src.algorithms import LearningAlgorithm
from src.core.agent import AgentState, Sample, dual_step, initial_state, primal_uncompressed
from src.core.exceptions import ArgumentError
from src.core.kernels import as_dictionary
from src.core.komp import refit_weights
from src.core.models import HyperParams, KernelSpec, LossSpec, ProximitySpec, RbfPlacement
from src.core.rkhs import KernelExpansion, ball_project

RBF_STREAM = 3


def build_rbf_dictionary(size: int, low, high, placement: RbfPlacement = RbfPlacement.GRID,
                         seed: int = 0) -> np.ndarray:
    """`size` atoms in the box [low, high]: a regular grid or uniform random draws."""
    low = np.atleast_1d(np.asarray(low, dtype=np.float64))
    high = np.atleast_1d(np.asarray(high, dtype=np.float64))
    if low.shape != high.shape or np.any(high < low):
        raise ArgumentError(f"invalid box [{low}, {high}]")
    if size < 0:
        raise ArgumentError(f"dictionary size must be non-negative, got {size}")
    dim = low.shape[0]
    if size == 0:
        return np.zeros((0, dim))
    if RbfPlacement(placement) == RbfPlacement.UNIFORM:
        rng = np.random.default_rng([seed, RBF_STREAM])
        return rng.uniform(low, high, size=(size, dim))
    per_axis = math.ceil(size ** (1.0 / dim) - 1e-9)
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(low, high)]
    grid = np.array(list(itertools.product(*axes)))
    # evenly spaced picks keep both corners of the box
    picks = np.round(np.linspace(0, len(grid) - 1, size)).astype(int)
    return grid[picks]


class RbfAlgorithm(LearningAlgorithm):
    def __init__(self, hp: HyperParams, spec: KernelSpec, loss: LossSpec, prox: ProximitySpec,
                 dictionary=None):
        super().__init__(hp, spec, loss, prox)
        if dictionary is None:
            raise ArgumentError("the RBF baseline needs a fixed dictionary")
        self.dictionary = as_dictionary(dictionary)

    def initial_state(self, agent_id: int, dim: int, neighbors: Sequence[int]) -> AgentState:
        state = initial_state(agent_id, dim, self.spec, self.loss, self.prox, neighbors)
        if self.dictionary.shape[0] == 0:
            return state
        D = as_dictionary(self.dictionary, dim=dim)
        return replace(state, f=KernelExpansion(self.spec, D, np.zeros(D.shape[0])))

    def step(self, state: AgentState, sample: Sample, neighbor_evals: Mapping[int, float],
             gamma: Mapping[int, float]) -> AgentState:
        duals = dual_step(state, sample, neighbor_evals, gamma, self.hp)
        if state.model_order == 0:
            return replace(state, out_duals=duals)
        candidate = primal_uncompressed(state, sample, neighbor_evals, self.hp)
        weights = refit_weights(candidate, state.f.dictionary)
        projected = KernelExpansion(self.spec, state.f.dictionary, weights, state.f.version + 1)
        return replace(state, f=ball_project(projected, self.hp.radius_rb), out_duals=duals)
