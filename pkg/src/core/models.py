from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator


class KernelFamily(str, Enum):
    GAUSSIAN = "gaussian"


class LossFamily(str, Enum):
    SQUARED_ERROR = "squared"
    HUBER = "huber"


class ProximityFamily(str, Enum):
    ABSOLUTE_DIFFERENCE = "absolute"
    SQUARED_DIFFERENCE = "squared"


class KernelSpec(BaseModel):
    """Kernel family and hyper-parameters; every kernel evaluation goes through one of these."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: KernelFamily = KernelFamily.GAUSSIAN
    bandwidth: PositiveFloat = 0.05

    @property
    def sup_norm(self) -> float:
        """sup_x sqrt(k(x, x)); the Gaussian kernel is normalized."""
        return 1.0


class LossSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: LossFamily = LossFamily.HUBER
    threshold: PositiveFloat = 1e4  # Huber phi
    # Declared derivative bound. Huber derives it from the threshold; for the
    # squared loss it only holds on a bounded residual domain.
    lipschitz_c: Optional[PositiveFloat] = None

    @property
    def lipschitz(self) -> float:
        if self.lipschitz_c is not None:
            return self.lipschitz_c
        if self.family == LossFamily.HUBER:
            return self.threshold
        return float("inf")


class ProximitySpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: ProximityFamily = ProximityFamily.ABSOLUTE_DIFFERENCE
    lipschitz_lh: PositiveFloat = 1.0


class KompBudget(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilon: float = Field(default=0.0, ge=0.0)
    jitter: float = Field(default=1e-10, ge=0.0)
    # slack of the stopping rule; epsilon = 0 still drops exactly redundant atoms
    tolerance: float = Field(default=1e-10, ge=0.0)


class HyperParams(BaseModel):
    """Step size, regularizers and compression settings shared by every agent."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    eta: PositiveFloat = 0.01
    lam: PositiveFloat = Field(default=1e-5, alias="lambda")
    delta: float = Field(default=1e-5, ge=0.0)
    nu: float = Field(default=0.0, ge=0.0)
    parsimony: float = Field(default=8.0, ge=0.0)
    epsilon: Optional[float] = Field(default=None, ge=0.0)
    radius_rb: PositiveFloat = 1e3
    adapt_bandwidth: bool = False

    @model_validator(mode="after")
    def _check_step_size(self) -> "HyperParams":
        if self.eta * self.lam >= 1.0:
            raise ValueError(f"step size eta={self.eta} must be below 1/lambda={1.0 / self.lam}")
        return self

    @property
    def budget(self) -> float:
        """Compression budget; an explicit epsilon wins over P * eta^2."""
        if self.epsilon is not None:
            return self.epsilon
        return self.parsimony * self.eta ** 2

    @property
    def alpha(self) -> float:
        return self.budget / self.eta

    def komp_budget(self) -> KompBudget:
        return KompBudget(epsilon=self.budget)


class TheoryConstants(BaseModel):
    """Constants of the convergence analysis. xi and k1 are existential and user supplied."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    radius_rb: PositiveFloat
    n_agents: int = Field(ge=1)
    lipschitz_c: PositiveFloat
    kernel_sup: PositiveFloat = 1.0
    lam: PositiveFloat
    slater_xi: float
    lipschitz_lh: PositiveFloat
    n_edges: int = Field(ge=0)
    k1: PositiveFloat
    delta: float = Field(default=0.0, ge=0.0)


class Method(str, Enum):
    HALK = "halk"
    PENALTY = "penalty"
    RBF = "rbf"
    CENTRALIZED = "centralized"
    LINEAR = "linear"


class RbfPlacement(str, Enum):
    GRID = "grid"
    UNIFORM = "uniform"


class FeatureMap(str, Enum):
    SINE = "sine"
    POLY2 = "poly2"
    POLY3 = "poly3"
