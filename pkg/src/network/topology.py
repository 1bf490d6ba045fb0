"""Agent network: undirected connected graph with per-directed-edge tolerances and duals.

Every undirected edge {i, j} carries two directed constraints (i -> j) and (j -> i);
each direction owns its own dual variable.
"""
import logging
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order
from scipy.spatial.distance import cdist

from src.core.exceptions import ArgumentError, TopologyError
from src.data.node_csv import read_positions

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088

Edge = Tuple[int, int]


class GammaRule(str, Enum):
    CORRELATION = "correlation"
    EXP_DISTANCE = "exp_distance"
    CONSTANT = "constant"


class DistanceMetric(str, Enum):
    EUCLIDEAN = "euclidean"
    HAVERSINE = "haversine"


class Topology:
    def __init__(self, n_agents: int, edges: Iterable[Edge], gamma: Dict[Edge, float]):
        if n_agents < 1:
            raise ArgumentError(f"need at least one agent, got {n_agents}")
        self.n_agents = int(n_agents)
        undirected = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < n_agents and 0 <= j < n_agents):
                raise ArgumentError(f"invalid edge ({i}, {j}) for {n_agents} agents")
            undirected.add((min(i, j), max(i, j)))
        self.edges: List[Edge] = sorted(undirected)

        self._neighbors: Dict[int, List[int]] = {i: [] for i in range(self.n_agents)}
        for i, j in self.edges:
            self._neighbors[i].append(j)
            self._neighbors[j].append(i)
        for i in self._neighbors:
            self._neighbors[i].sort()

        self.gamma: Dict[Edge, float] = {}
        for i, j in self.edges:
            value = gamma.get((i, j), gamma.get((j, i)))
            if value is None or value < 0:
                raise ArgumentError(f"edge ({i}, {j}) needs a non-negative tolerance, got {value}")
            if (j, i) in gamma and (i, j) in gamma and gamma[(i, j)] != gamma[(j, i)]:
                raise ArgumentError(f"tolerance of edge ({i}, {j}) is not symmetric")
            self.gamma[(i, j)] = self.gamma[(j, i)] = float(value)

        self.duals: Dict[Edge, float] = {edge: 0.0 for edge in self.directed_edges}
        self._check_connected()

    @property
    def directed_edges(self) -> List[Edge]:
        return sorted([(i, j) for i, j in self.edges] + [(j, i) for i, j in self.edges])

    def _check_connected(self) -> None:
        if self.n_agents == 1:
            return
        rows = [i for i, j in self.edges] + [j for i, j in self.edges]
        cols = [j for i, j in self.edges] + [i for i, j in self.edges]
        adjacency = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n_agents, self.n_agents))
        reached = set(int(v) for v in breadth_first_order(adjacency, 0, directed=False,
                                                           return_predecessors=False))
        if len(reached) < self.n_agents:
            isolated = sorted(set(range(self.n_agents)) - reached)
            raise TopologyError(
                f"graph is disconnected: nodes {isolated} are unreachable from node 0",
                component=isolated,
            )

    def neighbors(self, i: int) -> List[int]:
        if not 0 <= i < self.n_agents:
            raise ArgumentError(f"agent id {i} out of range [0, {self.n_agents})")
        return list(self._neighbors[i])

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def gamma_of(self, i: int) -> Dict[int, float]:
        return {j: self.gamma[(i, j)] for j in self.neighbors(i)}

    def duals_of(self, i: int) -> Dict[int, float]:
        return {j: self.duals[(i, j)] for j in self.neighbors(i)}

    def update_duals(self, i: int, out_duals: Dict[int, float]) -> None:
        """Write agent i's outgoing duals; i is the only writer of (i -> j)."""
        for j, value in out_duals.items():
            if (i, j) not in self.duals:
                raise ArgumentError(f"({i}, {j}) is not an edge")
            if value < 0:
                raise ArgumentError(f"dual ({i}, {j}) must be non-negative, got {value}")
            self.duals[(i, j)] = float(value)

    def dual_vector(self) -> np.ndarray:
        return np.array([self.duals[edge] for edge in self.directed_edges])

    def __repr__(self) -> str:
        return f"Topology(n_agents={self.n_agents}, edges={len(self.edges)})"


def pairwise_distances(positions, metric: DistanceMetric = DistanceMetric.EUCLIDEAN) -> np.ndarray:
    """Planar distances, or great-circle kilometres for (longitude, latitude) degrees."""
    positions = np.asarray(positions, dtype=np.float64)
    if metric == DistanceMetric.EUCLIDEAN:
        return cdist(positions, positions)
    lon, lat = np.radians(positions[:, 0]), np.radians(positions[:, 1])
    dlat = lat[:, None] - lat[None, :]
    dlon = lon[:, None] - lon[None, :]
    a = np.sin(dlat / 2) ** 2 + np.cos(lat[:, None]) * np.cos(lat[None, :]) * np.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def build_geometric(positions, connect_radius: float, gamma_rule: GammaRule = GammaRule.EXP_DISTANCE,
                    scale: float = 1.0, gamma_value: float = 1.0,
                    distance: DistanceMetric = DistanceMetric.EUCLIDEAN) -> Topology:
    """Edge {i, j} iff dist < connect_radius; gamma_ij = exp(-dist / scale).

    The correlation rule uses the same form with `scale` set to the side of the
    deployment area, so gamma_ij equals the field correlation e^{-|l_i - l_j|}
    on unit-square positions.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 2 or positions.shape[0] < 2:
        raise ArgumentError(f"need at least two positions, got shape {positions.shape}")
    if connect_radius <= 0 or scale <= 0:
        raise ArgumentError("connect_radius and scale must be positive")
    dist = pairwise_distances(positions, DistanceMetric(distance))
    n_agents = positions.shape[0]
    edges, gamma = [], {}
    for i in range(n_agents):
        for j in range(i + 1, n_agents):
            if dist[i, j] < connect_radius:
                edges.append((i, j))
                if GammaRule(gamma_rule) == GammaRule.CONSTANT:
                    gamma[(i, j)] = gamma_value
                else:
                    gamma[(i, j)] = float(np.exp(-dist[i, j] / scale))
    topology = Topology(n_agents, edges, gamma)
    logger.info(f"Built geometric topology: {n_agents} agents, {len(edges)} edges")
    return topology


def from_edges(n_agents: int, edges: Sequence[Edge], gamma: float = 0.0) -> Topology:
    return Topology(n_agents, edges, {edge: gamma for edge in edges})


def path(n_agents: int, gamma: float = 0.0) -> Topology:
    return from_edges(n_agents, [(i, i + 1) for i in range(n_agents - 1)], gamma)


def complete(n_agents: int, gamma: float = 0.0) -> Topology:
    return from_edges(n_agents, [(i, j) for i in range(n_agents) for j in range(i + 1, n_agents)], gamma)


def load_positions_csv(csv_path: str) -> np.ndarray:
    """Node positions from a coordinates CSV, ordered by node id."""
    return read_positions(csv_path)
