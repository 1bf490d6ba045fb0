import logging
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError

from src.core.exceptions import ConfigError
from src.core.models import (FeatureMap, HyperParams, KernelSpec, LossSpec, ProximitySpec,
                             RbfPlacement)
from src.data.node_csv import ReplayMode
from src.network.topology import DistanceMetric, GammaRule

CONFIG: Optional["ExperimentConfig"] = None
logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ExperimentSection(_Section):
    T: int = Field(default=1500, ge=0)
    seed: int = Field(default=0, ge=0)
    out: str = "runs/field"
    workers: int = Field(default=1, ge=1)


class TopologySection(_Section):
    connect_radius: PositiveFloat = 40.0
    gamma_rule: GammaRule = GammaRule.CORRELATION
    scale: Optional[PositiveFloat] = None  # correlation rule defaults to the field side
    gamma_value: float = Field(default=1.0, ge=0.0)
    distance: DistanceMetric = DistanceMetric.EUCLIDEAN


class FieldSection(_Section):
    n_agents: int = Field(default=40, ge=2)
    area: PositiveFloat = 100.0
    omega: float = 2.0
    process_noise_var: float = Field(default=0.1, ge=0.0)
    obs_noise_var: float = Field(default=0.5, ge=0.0)
    time_scale: PositiveFloat = 1e-3


class DataSection(_Section):
    path: Optional[str] = None
    target_column: str = "y"
    feature_columns: Optional[List[str]] = None
    replay: ReplayMode = ReplayMode.SAMPLE


class BaselineSection(_Section):
    penalty_c: float = Field(default=0.08, ge=0.0)
    rbf_size: int = Field(default=26, ge=0)
    rbf_placement: RbfPlacement = RbfPlacement.GRID
    linear_features: FeatureMap = FeatureMap.SINE
    centralized_parsimony: float = Field(default=0.001, ge=0.0)


class LoggingSection(_Section):
    level: str = "INFO"
    file: Optional[str] = None


class ExperimentConfig(_Section):
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    hyper: HyperParams = Field(default_factory=HyperParams)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    loss: LossSpec = Field(default_factory=LossSpec)
    proximity: ProximitySpec = Field(default_factory=ProximitySpec)
    topology: TopologySection = Field(default_factory=TopologySection)
    field: FieldSection = Field(default_factory=FieldSection)
    data: DataSection = Field(default_factory=DataSection)
    baseline: BaselineSection = Field(default_factory=BaselineSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def parse_config(raw: Optional[Dict[str, Any]]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(raw or {})
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def apply_overrides(config: ExperimentConfig, overrides: Dict[str, Dict[str, Any]]) -> ExperimentConfig:
    """Re-validated copy with `{section: {key: value}}` applied; None values are skipped."""
    raw = config.to_dict()
    for section, values in overrides.items():
        if section not in raw:
            raise ConfigError(f"unknown configuration section '{section}'")
        raw[section].update({k: v for k, v in values.items() if v is not None})
    return parse_config(raw)


def load_config(path: str = 'config.yaml') -> ExperimentConfig:
    """Loads configuration from a YAML file."""
    global CONFIG
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"Configuration file '{path}' not found.")
    except yaml.YAMLError as e:
        raise ConfigError(f"Error parsing configuration file '{path}': {e}")
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(f"Configuration file '{path}' must hold a mapping")
    CONFIG = parse_config(raw)
    logger.debug(f"Loaded configuration from {path}")
    return CONFIG


def dump_config(config: ExperimentConfig, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(config.to_dict(), f, sort_keys=False)


def get_config() -> ExperimentConfig:
    """Returns the loaded configuration."""
    if CONFIG is None:
        load_config()  # Load if not already loaded
    return CONFIG
