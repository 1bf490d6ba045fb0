"""Synchronous round engine.

Each round: every agent draws its sample, neighbors exchange evaluations of
their round-start functions at the sender's point, all agents update from that
snapshot, then the round's metrics are recorded.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from src.algorithms import LearningAlgorithm
from src.algorithms.algorithm_factory import AlgorithmFactory
from src.core.agent import AgentState, Sample
from src.core.exceptions import ArgumentError
from src.core.models import FeatureMap, HyperParams, KernelSpec, LossSpec, Method, ProximitySpec
from src.core.objectives import get_loss, get_proximity
from src.data import DataSource
from src.data.pooled import PooledDataSource
from src.network.topology import Topology
from src.simulator.metrics import MetricsTracker, RoundMetrics, aggregate_rounds

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 100

Observer = Callable[[int, Sequence[AgentState], RoundMetrics], None]


@dataclass
class SimulationResult:
    metrics: List[RoundMetrics]
    states: List[AgentState]
    rounds: int
    stopped_early: bool = False
    method: Method = Method.HALK
    extras: Dict[str, object] = field(default_factory=dict)


class Simulator:
    def __init__(self, topology: Topology, algorithm: LearningAlgorithm, data_source: DataSource,
                 workers: int = 1, agents: Optional[Sequence[AgentState]] = None,
                 observer: Optional[Observer] = None):
        if data_source.n_agents != topology.n_agents:
            raise ArgumentError(
                f"data source has {data_source.n_agents} agents, topology has {topology.n_agents}")
        if workers < 1:
            raise ArgumentError(f"workers must be at least 1, got {workers}")
        self.topology = topology
        self.algorithm = algorithm
        self.data_source = data_source
        self.workers = workers
        self.observer = observer
        if agents is None:
            agents = [algorithm.initial_state(i, data_source.dim, topology.neighbors(i))
                      for i in range(topology.n_agents)]
        self.states: List[AgentState] = list(agents)
        for state in self.states:
            topology.update_duals(state.agent_id, state.out_duals)
        self.loss_fn = get_loss(algorithm.loss)
        self.prox_fn = get_proximity(algorithm.prox)

    def exchange(self, samples: Sequence[Sample]) -> List[Dict[int, float]]:
        """f_j(x_i) for every directed edge (i -> j), from the round-start functions."""
        return [
            {j: self.states[j].predict(samples[i].x) for j in self.topology.neighbors(i)}
            for i in range(self.topology.n_agents)
        ]

    def _slacks(self, samples: Sequence[Sample], evals: Sequence[Dict[int, float]]) -> List[float]:
        slacks = []
        for i, j in self.topology.directed_edges:
            fi = self.states[i].predict(samples[i].x)
            slacks.append(self.prox_fn.value(fi, evals[i][j]) - self.topology.gamma[(i, j)])
        return slacks

    def _step(self, i: int, samples, evals) -> AgentState:
        return self.algorithm.step(self.states[i], samples[i], evals[i], self.topology.gamma_of(i))

    def run(self, T: int) -> SimulationResult:
        if T < 0:
            raise ArgumentError(f"horizon T must be non-negative, got {T}")
        tracker = MetricsTracker(len(self.topology.directed_edges))
        metrics: List[RoundMetrics] = []
        stopped_early = False
        n_agents = self.topology.n_agents
        pool = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
        try:
            for t in range(T):
                samples = self.data_source.sample(t)
                if samples is None:
                    logger.warning(f"Data exhausted after {t} of {T} rounds, stopping early")
                    stopped_early = True
                    break
                evals = self.exchange(samples)
                messages = sum(len(e) for e in evals)
                losses = [self.loss_fn.value(self.states[i].predict(samples[i].x), samples[i].y)
                          for i in range(n_agents)]
                slacks = self._slacks(samples, evals)

                if pool is None:
                    updated = [self._step(i, samples, evals) for i in range(n_agents)]
                else:
                    # map keeps agent order
                    updated = list(pool.map(lambda i: self._step(i, samples, evals), range(n_agents)))

                self.states = updated
                for state in updated:
                    self.topology.update_duals(state.agent_id, state.out_duals)
                record = tracker.record(t, losses, slacks, updated, self.topology.dual_vector(), messages)
                metrics.append(record)
                if self.observer is not None:
                    self.observer(t, updated, record)
                if (t + 1) % PROGRESS_EVERY == 0:
                    logger.info(f"Round {t + 1}/{T}: avg loss {record.avg_loss:.6g}, "
                                f"max model order {record.max_model_order}, dual norm {record.dual_norm:.4g}")
        finally:
            if pool is not None:
                pool.shutdown(wait=True)
        return SimulationResult(metrics, list(self.states), len(metrics), stopped_early)


def _run(method: Method, topology: Topology, data_source: DataSource, hp: HyperParams, T: int,
         spec: KernelSpec, loss: LossSpec, prox: ProximitySpec, workers: int,
         observer: Optional[Observer], **params) -> SimulationResult:
    algorithm = AlgorithmFactory.get_algorithm(method, hp, spec, loss, prox, **params)
    logger.info(f"Running {method.value} on {topology} for {T} rounds")
    result = Simulator(topology, algorithm, data_source, workers=workers, observer=observer).run(T)
    result.method = method
    return result


def run_halk(topology: Topology, data_source: DataSource, hp: HyperParams, T: int,
             spec: KernelSpec = KernelSpec(), loss: LossSpec = LossSpec(),
             prox: ProximitySpec = ProximitySpec(), workers: int = 1,
             observer: Optional[Observer] = None) -> SimulationResult:
    return _run(Method.HALK, topology, data_source, hp, T, spec, loss, prox, workers, observer)


def run_penalty_baseline(topology: Topology, data_source: DataSource, hp: HyperParams, T: int,
                         penalty_c: float = 0.08, spec: KernelSpec = KernelSpec(),
                         loss: LossSpec = LossSpec(), prox: ProximitySpec = ProximitySpec(),
                         workers: int = 1, observer: Optional[Observer] = None) -> SimulationResult:
    return _run(Method.PENALTY, topology, data_source, hp, T, spec, loss, prox, workers, observer,
                penalty_c=penalty_c)


def run_rbf_baseline(topology: Topology, data_source: DataSource, hp: HyperParams, T: int,
                     dictionary, spec: KernelSpec = KernelSpec(), loss: LossSpec = LossSpec(),
                     prox: ProximitySpec = ProximitySpec(), workers: int = 1,
                     observer: Optional[Observer] = None) -> SimulationResult:
    return _run(Method.RBF, topology, data_source, hp, T, spec, loss, prox, workers, observer,
                dictionary=dictionary)


def run_linear_baseline(topology: Topology, data_source: DataSource, hp: HyperParams, T: int,
                        feature_map: FeatureMap = FeatureMap.SINE, frequency: float = 1.0,
                        spec: KernelSpec = KernelSpec(), loss: LossSpec = LossSpec(),
                        prox: ProximitySpec = ProximitySpec(), workers: int = 1,
                        observer: Optional[Observer] = None) -> SimulationResult:
    return _run(Method.LINEAR, topology, data_source, hp, T, spec, loss, prox, workers, observer,
                feature_map=feature_map, frequency=frequency)


def run_centralized_baseline(data_source: DataSource, hp: HyperParams, T: int,
                             spec: KernelSpec = KernelSpec(), loss: LossSpec = LossSpec(),
                             prox: ProximitySpec = ProximitySpec(),
                             parsimony: Optional[float] = None,
                             observer: Optional[Observer] = None) -> SimulationResult:
    """One learner over all agents' samples pooled into a stream of V*T steps.

    Metrics are folded back to one record per round of V samples.
    """
    if parsimony is not None:
        hp = hp.model_copy(update={"parsimony": parsimony, "epsilon": None})
    pooled = PooledDataSource(data_source)
    single = Topology(1, [], {})
    steps = _run(Method.CENTRALIZED, single, pooled, hp, T * pooled.group_size, spec, loss, prox, 1,
                 observer)
    metrics = aggregate_rounds(steps.metrics, pooled.group_size)
    return SimulationResult(metrics, steps.states, len(metrics), steps.stopped_early, Method.CENTRALIZED,
                            {"steps": steps.rounds})
