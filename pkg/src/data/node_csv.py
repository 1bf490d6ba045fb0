"""Per-node observational data from CSV.

Schema: header row `node_id,pos_x,pos_y,x0..x{p-1},y`, UTF-8, `.` decimal separator,
one observation per row. Extra columns are ignored; the target column can be renamed.
For lat/long data pos_x is the longitude and pos_y the latitude, in degrees.
"""
import logging
import os
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.core.agent import Sample
from src.core.exceptions import DataError
from src.data import DataSource

logger = logging.getLogger(__name__)

ID_COLUMN = "node_id"
POSITION_COLUMNS = ("pos_x", "pos_y")
FEATURE_PATTERN = re.compile(r"^x(\d+)$")


class ReplayMode(str, Enum):
    SAMPLE = "sample"  # seeded draw with replacement per (agent, round)
    CYCLE = "cycle"
    ONCE = "once"


@dataclass(frozen=True, eq=False)
class NodeDataset:
    node_ids: List[str]
    positions: np.ndarray  # (V, 2)
    features: List[np.ndarray]  # per node (n_i, p)
    targets: List[np.ndarray]  # per node (n_i,)

    @property
    def n_agents(self) -> int:
        return len(self.node_ids)

    @property
    def dim(self) -> int:
        return int(self.features[0].shape[1])

    @property
    def streams(self) -> Dict[str, List[Sample]]:
        return {
            node: [Sample(x, float(y)) for x, y in zip(X, Y)]
            for node, X, Y in zip(self.node_ids, self.features, self.targets)
        }


def _node_sort_key(node_id: str):
    return (0, int(node_id), "") if node_id.lstrip("-").isdigit() else (1, 0, node_id)


def _read_frame(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DataError(f"{path} is empty")
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise DataError(f"cannot parse {path}: {e}", line=int(match.group(1)) if match else None)
    frame.columns = [c.strip() for c in frame.columns]
    if frame.empty:
        raise DataError(f"{path}: no data rows")
    return frame


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = values.isna().to_numpy().nonzero()[0]
    if bad.size:
        row = int(bad[0])
        # header is line 1
        raise DataError(f"column '{column}' has non-numeric value '{frame[column].iloc[row]}'", line=row + 2)
    return values.to_numpy(dtype=np.float64)


def _require(frame: pd.DataFrame, columns: Sequence[str]) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise DataError(f"missing required columns: {', '.join(missing)}")


def load_node_csv(path: str, target_column: str = "y", feature_columns: Optional[Sequence[str]] = None,
                  expected_nodes: Optional[Sequence[str]] = None) -> NodeDataset:
    frame = _read_frame(path)
    if feature_columns is None:
        matched = [(int(m.group(1)), c) for c in frame.columns if (m := FEATURE_PATTERN.match(c))]
        feature_columns = [c for _, c in sorted(matched)]
    if not feature_columns:
        raise DataError("no feature columns (x0, x1, ...) found")
    _require(frame, [ID_COLUMN, *POSITION_COLUMNS, *feature_columns, target_column])

    ids = frame[ID_COLUMN].str.strip()
    coords = np.column_stack([_numeric(frame, c) for c in POSITION_COLUMNS])
    X = np.column_stack([_numeric(frame, c) for c in feature_columns])
    Y = _numeric(frame, target_column)

    node_ids = sorted(ids.unique(), key=_node_sort_key)
    if expected_nodes is not None:
        empty = [str(n) for n in expected_nodes if str(n) not in set(node_ids)]
        if empty:
            raise DataError(f"nodes without data rows: {', '.join(empty)}")

    positions, features, targets = [], [], []
    for node in node_ids:
        rows = (ids == node).to_numpy()
        positions.append(coords[rows][0])
        features.append(X[rows])
        targets.append(Y[rows])
    logger.info(f"Loaded {len(frame)} rows for {len(node_ids)} nodes from {path}")
    return NodeDataset(node_ids, np.array(positions), features, targets)


def read_positions(path: str) -> np.ndarray:
    """Positions per node, ordered by node id; accepts `node_id,pos_x,pos_y` or `id,x,y`."""
    frame = _read_frame(path)
    if ID_COLUMN in frame.columns:
        id_col, x_col, y_col = ID_COLUMN, *POSITION_COLUMNS
    else:
        id_col, x_col, y_col = "id", "x", "y"
    _require(frame, [id_col, x_col, y_col])
    ids = frame[id_col].str.strip()
    coords = np.column_stack([_numeric(frame, x_col), _numeric(frame, y_col)])
    first = {}
    for node, row in zip(ids, coords):
        first.setdefault(node, row)
    return np.array([first[node] for node in sorted(first, key=_node_sort_key)])


def write_node_csv(path: str, dataset: NodeDataset, target_column: str = "y") -> None:
    records = []
    for node, pos, X, Y in zip(dataset.node_ids, dataset.positions, dataset.features, dataset.targets):
        for x, y in zip(X, Y):
            row = {ID_COLUMN: node, POSITION_COLUMNS[0]: pos[0], POSITION_COLUMNS[1]: pos[1]}
            row.update({f"x{k}": v for k, v in enumerate(x)})
            row[target_column] = y
            records.append(row)
    pd.DataFrame.from_records(records).to_csv(path, index=False, float_format="%.17g")


class CsvDataSource(DataSource):
    def __init__(self, dataset: NodeDataset, replay: ReplayMode = ReplayMode.SAMPLE, seed: int = 0):
        self.dataset = dataset
        self.replay = ReplayMode(replay)
        self.seed = seed
        self.n_agents = dataset.n_agents
        self.dim = dataset.dim

    def _index(self, agent: int, t: int, length: int) -> Optional[int]:
        if self.replay == ReplayMode.ONCE:
            return t if t < length else None
        if self.replay == ReplayMode.CYCLE:
            return t % length
        rng = np.random.default_rng([self.seed, 2, agent, t])
        return int(rng.integers(length))

    def sample(self, t: int) -> Optional[List[Sample]]:
        samples = []
        for agent, (X, Y) in enumerate(zip(self.dataset.features, self.dataset.targets)):
            index = self._index(agent, t, len(Y))
            if index is None:
                return None
            samples.append(Sample(X[index], float(Y[index])))
        return samples
