"""Per-round metrics, their running averages and the CSV files a run produces."""
import logging
import os
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.core.agent import AgentState
from src.core.exceptions import DataError

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [
    "t", "global_loss", "avg_loss", "max_violation", "avg_violation",
    "mean_violation_pos", "total_model_order", "max_model_order", "dual_norm",
]
FLOAT_FORMAT = "%.17g"


class RoundMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: int
    global_loss: float
    avg_loss: float
    max_violation: float
    avg_violation: float
    mean_violation_pos: float
    total_model_order: int
    max_model_order: int
    dual_norm: float
    # per directed edge, in Topology.directed_edges order
    edge_slack: List[float] = Field(default_factory=list)
    avg_edge_slack: List[float] = Field(default_factory=list)
    # per agent, after the round's update
    model_orders: List[int] = Field(default_factory=list)
    max_duals: List[float] = Field(default_factory=list)
    bandwidths: List[float] = Field(default_factory=list)
    compression_errors: List[float] = Field(default_factory=list)
    messages: int = 0


class MetricsTracker:
    """Keeps the prefix sums behind the running averages."""

    def __init__(self, n_edges: int = 0):
        self.rounds = 0
        self.loss_sum = 0.0
        self.slack_sums = np.zeros(n_edges)

    def record(self, t: int, losses: Sequence[float], slacks: Sequence[float],
               states: Sequence[AgentState], duals: np.ndarray, messages: int = 0) -> RoundMetrics:
        # fixed agent order for every reduction
        global_loss = 0.0
        for value in losses:
            global_loss += value
        slacks = np.asarray(slacks, dtype=np.float64)
        self.rounds += 1
        self.loss_sum += global_loss
        self.slack_sums = self.slack_sums + slacks
        avg_slack = self.slack_sums / self.rounds
        orders = [state.model_order for state in states]
        has_edges = slacks.shape[0] > 0
        return RoundMetrics(
            t=t,
            global_loss=global_loss,
            avg_loss=self.loss_sum / self.rounds,
            max_violation=float(slacks.max()) if has_edges else 0.0,
            avg_violation=float(avg_slack.max()) if has_edges else 0.0,
            mean_violation_pos=float(np.maximum(slacks, 0.0).mean()) if has_edges else 0.0,
            total_model_order=int(sum(orders)),
            max_model_order=int(max(orders)),
            dual_norm=float(np.linalg.norm(duals)),
            edge_slack=slacks.tolist(),
            avg_edge_slack=avg_slack.tolist(),
            model_orders=orders,
            max_duals=[max(state.out_duals.values(), default=0.0) for state in states],
            bandwidths=[float(state.spec.bandwidth) for state in states],
            compression_errors=[state.compression_error for state in states],
            messages=messages,
        )


def aggregate_rounds(steps: Sequence[RoundMetrics], group_size: int) -> List[RoundMetrics]:
    """Fold a pooled single-agent stream into one record per group of `group_size` steps.

    An incomplete trailing group is dropped.
    """
    if group_size == 1:
        return list(steps)
    rounds: List[RoundMetrics] = []
    loss_sum = 0.0
    for start in range(0, len(steps) - group_size + 1, group_size):
        group = steps[start:start + group_size]
        global_loss = 0.0
        for step in group:
            global_loss += step.global_loss
        loss_sum += global_loss
        last = group[-1]
        rounds.append(last.model_copy(update={
            "t": len(rounds),
            "global_loss": global_loss,
            "avg_loss": loss_sum / (len(rounds) + 1),
            "compression_errors": [max(e for step in group for e in step.compression_errors)],
            "messages": 0,
        }))
    return rounds


def _write_frame(path: str, frame: pd.DataFrame) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = f"{path}.tmp"
    frame.to_csv(tmp_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    os.replace(tmp_path, path)


def write_metrics_csv(path: str, metrics: Sequence[RoundMetrics]) -> None:
    """Metrics CSV, one row per round, floats with 17 significant digits; written atomically."""
    rows = [{column: getattr(m, column) for column in METRIC_COLUMNS} for m in metrics]
    frame = pd.DataFrame(rows, columns=METRIC_COLUMNS)
    _write_frame(path, frame)
    logger.info(f"Wrote {len(rows)} metric rows to {path}")


def read_metrics_csv(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in METRIC_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path} is missing metric columns: {', '.join(missing)}")
    return frame


def write_agent_trace_csv(path: str, metrics: Sequence[RoundMetrics], field: str) -> None:
    """Per-agent trace (model_orders, bandwidths, ...) as columns agent_0..agent_{V-1}."""
    rows: List[Dict[str, float]] = []
    for m in metrics:
        row = {"t": m.t}
        row.update({f"agent_{i}": value for i, value in enumerate(getattr(m, field))})
        rows.append(row)
    _write_frame(path, pd.DataFrame(rows))
