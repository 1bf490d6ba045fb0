"""Synthetic spatio-temporal correlated Gaussian field.

s_t = pi + C^T (1 sin(omega t) + v_t),   y_{i,t} = s_{i,t} + n_{i,t}

with C^T C = R_s, [R_s]_ij = exp(-|l_i - l_j|) on positions normalized to the
unit square, v_t ~ N(0, 0.1 I) and n_{i,t} ~ N(0, 0.5); second arguments are variances.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from src.core.agent import Sample
from src.core.exceptions import ArgumentError, NumericError
from src.data import DataSource

logger = logging.getLogger(__name__)

POSITIONS_STREAM = 0
ROUND_STREAM = 1


@dataclass(frozen=True, eq=False)
class FieldModel:
    positions: np.ndarray  # (V, 2) in metres
    correlation: np.ndarray  # R_s
    chol: np.ndarray  # upper triangular C with C^T C = R_s
    mean: np.ndarray  # pi = (1/V, 2/V, ..., 1)
    omega: float
    process_noise_var: float
    obs_noise_var: float
    seed: int
    area: float
    time_scale: float

    @property
    def n_agents(self) -> int:
        return int(self.positions.shape[0])


def field_correlation(positions, area: float) -> np.ndarray:
    unit = np.asarray(positions, dtype=np.float64) / area
    return np.exp(-cdist(unit, unit))


def cholesky_with_jitter(matrix: np.ndarray, jitter: float = 1e-10, max_jitter: float = 1e-4) -> np.ndarray:
    """Lower Cholesky factor, adding a growing ridge when the matrix is singular."""
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        pass
    ridge = jitter
    identity = np.eye(matrix.shape[0])
    while ridge <= max_jitter * (1 + 1e-9):
        try:
            factor = np.linalg.cholesky(matrix + ridge * identity)
            logger.info(f"Correlation Cholesky needed ridge {ridge:.1e}")
            return factor
        except np.linalg.LinAlgError:
            ridge *= 10.0
    raise NumericError("correlation matrix is not positive definite", condition=float(np.linalg.cond(matrix)))


def build_field(n_agents: int, area: float = 100.0, omega: float = 2.0, seed: int = 0,
                positions: Optional[np.ndarray] = None, process_noise_var: float = 0.1,
                obs_noise_var: float = 0.5, time_scale: float = 1e-3) -> FieldModel:
    if n_agents < 2:
        raise ArgumentError(f"a field needs at least two nodes, got {n_agents}")
    if seed < 0:
        raise ArgumentError(f"seed must be non-negative, got {seed}")
    if positions is None:
        rng = np.random.default_rng([seed, POSITIONS_STREAM])
        positions = rng.uniform(0.0, area, size=(n_agents, 2))
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape != (n_agents, 2):
        raise ArgumentError(f"positions must have shape ({n_agents}, 2), got {positions.shape}")
    correlation = field_correlation(positions, area)
    lower = cholesky_with_jitter(correlation)
    mean = np.arange(1, n_agents + 1) / n_agents
    return FieldModel(positions, correlation, lower.T, mean, omega, process_noise_var,
                      obs_noise_var, seed, area, time_scale)


def sample_round(model: FieldModel, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """Field values s and noisy observations y at round t; a pure function of (seed, t)."""
    if t < 0:
        raise ArgumentError(f"round index must be non-negative, got {t}")
    rng = np.random.default_rng([model.seed, ROUND_STREAM, t])
    V = model.n_agents
    v = rng.normal(0.0, np.sqrt(model.process_noise_var), size=V)
    noise = rng.normal(0.0, np.sqrt(model.obs_noise_var), size=V)
    s = model.mean + model.chol.T @ (np.ones(V) * np.sin(model.omega * t) + v)
    return s, s + noise


class FieldDataSource(DataSource):
    """Every agent observes its own field value; the feature is the scaled round index."""

    def __init__(self, model: FieldModel):
        self.model = model
        self.n_agents = model.n_agents
        self.dim = 1

    def sample(self, t: int) -> List[Sample]:
        _, y = sample_round(self.model, t)
        x = np.array([t * self.model.time_scale])
        return [Sample(x, float(y[i])) for i in range(self.n_agents)]
