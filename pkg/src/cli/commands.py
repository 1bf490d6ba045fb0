"""Subcommand implementations. Each returns a process exit code:
0 success, 1 user error (config, data, arguments, topology), 2 numeric failure.
"""
import functools
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import yaml

import src
from src.algorithms.rbf import build_rbf_dictionary
from src.core.exceptions import (ArgumentError, ConfigError, DataError, HalkError, NumericError,
                                 TopologyError)
from src.core.models import Method
from src.data import DataSource
from src.data.field import FieldDataSource, build_field
from src.data.node_csv import CsvDataSource, load_node_csv
from src.network.topology import GammaRule, Topology, build_geometric
from src.simulator.bounds import model_order_bound_from_traces
from src.simulator.engine import (SimulationResult, run_centralized_baseline, run_halk,
                                  run_linear_baseline, run_penalty_baseline, run_rbf_baseline)
from src.simulator.metrics import read_metrics_csv, write_agent_trace_csv, write_metrics_csv
from src.theory.checks import PROJECTION_SLACK, rate_regression
from src.utils.config import ExperimentConfig, apply_overrides

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_NUMERIC_ERROR = 2

METRICS_FILE = "metrics.csv"
MANIFEST_FILE = "manifest.yaml"
AGENT_TRACES = {
    "model_orders": "model_orders.csv",
    "bandwidths": "bandwidths.csv",
    "max_duals": "max_duals.csv",
    "compression_errors": "compression_errors.csv",
}
DATA_GAMMA_SCALE = 1000.0

BASELINES = (Method.PENALTY, Method.RBF, Method.CENTRALIZED, Method.LINEAR)


def exit_codes(func: Callable[..., int]) -> Callable[..., int]:
    """Map the error hierarchy onto exit codes, reporting on stderr and in the log."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except (ConfigError, DataError, ArgumentError, TopologyError, FileNotFoundError) as e:
            logger.error(f"{func.__name__}: {e}")
            print(f"Error: {e}", file=sys.stderr)
            return EXIT_USER_ERROR
        except (NumericError, HalkError) as e:
            logger.error(f"{func.__name__}: numeric failure: {e}")
            print(f"Numeric failure: {e}", file=sys.stderr)
            return EXIT_NUMERIC_ERROR

    return wrapper


# -- building runs ----------------------------------------------------------------

def build_topology(config: ExperimentConfig, positions, default_scale: float) -> Topology:
    section = config.topology
    scale = section.scale if section.scale is not None else default_scale
    return build_geometric(positions, section.connect_radius, section.gamma_rule, scale,
                           section.gamma_value, section.distance)


def build_field_run(config: ExperimentConfig) -> Tuple[Topology, FieldDataSource]:
    """Field benchmark; the correlation rule puts gamma_ij on the field correlation."""
    f = config.field
    model = build_field(f.n_agents, f.area, f.omega, config.experiment.seed,
                        process_noise_var=f.process_noise_var, obs_noise_var=f.obs_noise_var,
                        time_scale=f.time_scale)
    default_scale = f.area if config.topology.gamma_rule == GammaRule.CORRELATION else 1.0
    return build_topology(config, model.positions, default_scale), FieldDataSource(model)


def build_data_run(config: ExperimentConfig) -> Tuple[Topology, CsvDataSource]:
    if not config.data.path:
        raise ConfigError("data.path is not set")
    dataset = load_node_csv(config.data.path, config.data.target_column, config.data.feature_columns)
    source = CsvDataSource(dataset, config.data.replay, config.experiment.seed)
    return build_topology(config, dataset.positions, DATA_GAMMA_SCALE), source


def _feature_box(config: ExperimentConfig, source: DataSource) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(source, CsvDataSource):
        stacked = np.vstack(source.dataset.features)
        return stacked.min(axis=0), stacked.max(axis=0)
    T = max(config.experiment.T, 1)
    return np.zeros(1), np.array([(T - 1) * config.field.time_scale])


def _frequency(config: ExperimentConfig, source: DataSource) -> float:
    # sin(t) over the round index for the field feature x = t * time_scale
    if isinstance(source, FieldDataSource):
        return 1.0 / config.field.time_scale
    return 1.0


def execute(config: ExperimentConfig, method: Method, topology: Topology,
            source: DataSource) -> SimulationResult:
    common = dict(spec=config.kernel, loss=config.loss, prox=config.proximity)
    hp, T, workers = config.hyper, config.experiment.T, config.experiment.workers
    if method == Method.HALK:
        return run_halk(topology, source, hp, T, workers=workers, **common)
    if method == Method.PENALTY:
        return run_penalty_baseline(topology, source, hp, T, config.baseline.penalty_c,
                                    workers=workers, **common)
    if method == Method.RBF:
        low, high = _feature_box(config, source)
        dictionary = build_rbf_dictionary(config.baseline.rbf_size, low, high,
                                          config.baseline.rbf_placement, config.experiment.seed)
        return run_rbf_baseline(topology, source, hp, T, dictionary, workers=workers, **common)
    if method == Method.LINEAR:
        return run_linear_baseline(topology, source, hp, T, config.baseline.linear_features,
                                   _frequency(config, source), workers=workers, **common)
    if method == Method.CENTRALIZED:
        return run_centralized_baseline(source, hp, T, parsimony=config.baseline.centralized_parsimony,
                                        **common)
    raise ArgumentError(f"Method '{method}' not supported")


# -- outputs ----------------------------------------------------------------------

def write_manifest(path: str, config: ExperimentConfig, result: SimulationResult, topology: Topology,
                   source_kind: str, dim: int) -> None:
    hp = config.hyper
    if result.method == Method.CENTRALIZED:
        n_edges = 0
        hp = hp.model_copy(update={"parsimony": config.baseline.centralized_parsimony, "epsilon": None})
    else:
        n_edges = len(topology.edges)
    manifest: Dict[str, Any] = {
        "version": src.__version__,
        "method": result.method.value,
        "source": source_kind,
        "seed": config.experiment.seed,
        "T": config.experiment.T,
        "rounds": result.rounds,
        "stopped_early": result.stopped_early,
        "dim": dim,
        "n_edges": n_edges,
        "epsilon": hp.budget,
        "alpha": hp.alpha,
        "config": config.to_dict(),
    }
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest, f, sort_keys=False)
    os.replace(tmp_path, path)


def write_outputs(out_dir: str, config: ExperimentConfig, result: SimulationResult, topology: Topology,
                  source_kind: str, dim: int) -> str:
    os.makedirs(out_dir, exist_ok=True)
    metrics_path = os.path.join(out_dir, METRICS_FILE)
    write_metrics_csv(metrics_path, result.metrics)
    for field, filename in AGENT_TRACES.items():
        write_agent_trace_csv(os.path.join(out_dir, filename), result.metrics, field)
    write_manifest(os.path.join(out_dir, MANIFEST_FILE), config, result, topology, source_kind, dim)
    logger.info(f"Run outputs written to {out_dir}")
    return metrics_path


def _report(result: SimulationResult, metrics_path: str) -> None:
    if result.metrics:
        last = result.metrics[-1]
        print(f"{result.method.value}: {result.rounds} rounds, avg loss {last.avg_loss:.6g}, "
              f"avg violation {last.avg_violation:.6g}, max model order {last.max_model_order}")
    if result.stopped_early:
        print(f"Warning: data exhausted after {result.rounds} rounds", file=sys.stderr)
    print(f"Metrics written to {metrics_path}")


# -- subcommands ------------------------------------------------------------------

@exit_codes
def cmd_simulate_field(config: ExperimentConfig) -> int:
    topology, source = build_field_run(config)
    result = execute(config, Method.HALK, topology, source)
    _report(result, write_outputs(config.experiment.out, config, result, topology, "field", source.dim))
    return EXIT_OK


@exit_codes
def cmd_run_data(config: ExperimentConfig, csv_path: Optional[str] = None,
                 target_column: Optional[str] = None) -> int:
    config = apply_overrides(config, {"data": {"path": csv_path, "target_column": target_column}})
    topology, source = build_data_run(config)
    result = execute(config, Method.HALK, topology, source)
    _report(result, write_outputs(config.experiment.out, config, result, topology, "data", source.dim))
    return EXIT_OK


@exit_codes
def cmd_baseline(config: ExperimentConfig, method: str, method_params: Optional[Dict[str, Any]] = None,
                 use_data: bool = False) -> int:
    try:
        method = Method(method)
    except ValueError:
        raise ArgumentError(f"Method '{method}' not supported; choose from "
                            f"{', '.join(m.value for m in BASELINES)}")
    if method not in BASELINES:
        raise ArgumentError(f"'{method.value}' is not a baseline")
    config = apply_overrides(config, {"baseline": method_params or {}})
    topology, source = build_data_run(config) if use_data else build_field_run(config)
    result = execute(config, method, topology, source)
    kind = "data" if use_data else "field"
    _report(result, write_outputs(config.experiment.out, config, result, topology, kind, source.dim))
    return EXIT_OK


def _trace(run_dir: str, field: str) -> Optional[np.ndarray]:
    path = os.path.join(run_dir, AGENT_TRACES[field])
    if not os.path.exists(path):
        return None
    frame = pd.read_csv(path, float_precision="round_trip")
    return frame.drop(columns=["t"]).to_numpy(dtype=np.float64)


@exit_codes
def cmd_check_bounds(config: ExperimentConfig, metrics_path: str, optimum: Optional[float] = None) -> int:
    """Print pass/fail for every check the recorded run supports.

    The decay-rate fit needs the optimum of the problem, so it only runs when one is given.
    """
    frame = read_metrics_csv(metrics_path)
    if frame.empty:
        raise DataError(f"{metrics_path}: no data rows")
    run_dir = os.path.dirname(os.path.abspath(metrics_path))
    manifest: Dict[str, Any] = {}
    manifest_path = os.path.join(run_dir, MANIFEST_FILE)
    if os.path.exists(manifest_path):
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = yaml.safe_load(f) or {}

    epsilon = float(manifest.get("epsilon", config.hyper.budget))
    alpha = float(manifest.get("alpha", config.hyper.alpha))
    results: List[Tuple[str, bool, str]] = []

    errors = _trace(run_dir, "compression_errors")
    if errors is not None:
        worst = float(np.nanmax(errors)) if errors.size else 0.0
        results.append(("compression_budget", worst <= epsilon + PROJECTION_SLACK,
                        f"max error {worst:.3e} vs epsilon {epsilon:.3e}"))

    orders, duals = _trace(run_dir, "model_orders"), _trace(run_dir, "max_duals")
    if (orders is not None and duals is not None and "n_edges" in manifest and alpha > 0
            and np.isfinite(config.loss.lipschitz)):
        bound = model_order_bound_from_traces(orders, duals, alpha, int(manifest.get("dim", 1)),
                                              config.loss.lipschitz, config.proximity.lipschitz_lh,
                                              int(manifest["n_edges"]))
        results.append(("model_order_bound", bound.ok,
                        f"beta {bound.beta:.3e}, quarter fits {bound.beta_third_quarter:.3e} / "
                        f"{bound.beta_fourth_quarter:.3e}"))

    avg_violation = frame["avg_violation"].to_numpy()
    mid = avg_violation[len(avg_violation) // 2]
    results.append(("average_violation", bool(avg_violation[-1] <= max(mid, 0.0)),
                    f"time-averaged slack {avg_violation[-1]:.3e} (half-way {mid:.3e})"))

    if optimum is not None:
        try:
            fit = rate_regression(frame["avg_loss"].tolist(), optimum=optimum)
            results.append(("suboptimality_rate", fit.ok, f"log-log slope {fit.slope:.3f}"))
        except ArgumentError as e:
            results.append(("suboptimality_rate", False, str(e)))

    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            logger.warning(f"Bound check {name} failed: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC_ERROR
