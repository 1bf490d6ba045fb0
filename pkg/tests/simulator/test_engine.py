import numpy as np
import pytest
from unittest.mock import MagicMock

from src.algorithms.halk import HalkAlgorithm
from src.core.agent import Sample, compute_nu, initial_state, primal_step
from src.core.exceptions import ArgumentError
from src.core.models import (HyperParams, KernelSpec, LossFamily, LossSpec, Method, ProximitySpec,
                             TheoryConstants)
from src.data import DataSource
from src.data.field import FieldDataSource, build_field, sample_round
from src.data.pooled import PooledDataSource
from src.network.topology import Topology, complete, from_edges, path
from src.simulator.engine import (Simulator, run_centralized_baseline, run_halk, run_linear_baseline,
                                  run_penalty_baseline, run_rbf_baseline)

SQUARED = LossSpec(family=LossFamily.SQUARED_ERROR)
HUBER_TENTH = LossSpec(family=LossFamily.HUBER, threshold=0.1)


class RoundsSource(DataSource):
    """Replays a fixed list of rounds, then reports exhaustion"""

    def __init__(self, rounds):
        self.rounds = rounds
        self.n_agents = len(rounds[0])
        self.dim = 1

    def sample(self, t):
        if t >= len(self.rounds):
            return None
        return [Sample(np.array([x]), y) for x, y in self.rounds[t]]


class ConstantSource(DataSource):
    """Every round repeats the point x = 0 with one fixed target per agent"""

    def __init__(self, targets):
        self.targets = list(targets)
        self.n_agents = len(self.targets)
        self.dim = 1

    def sample(self, t):
        return [Sample(np.array([0.0]), y) for y in self.targets]


@pytest.fixture
def hp():
    return HyperParams(eta=0.1, lam=1e-3, delta=1e-5, parsimony=8.0)


@pytest.fixture
def field_source():
    return FieldDataSource(build_field(n_agents=3, seed=7))


def test_single_agent_is_projected_sgd(hp, unit_spec):
    """Test that one agent without edges runs plain compressed functional SGD"""
    rounds = [[(0.1 * t, np.sin(t))] for t in range(15)]
    result = run_halk(Topology(1, [], {}), RoundsSource(rounds), hp, 15, spec=unit_spec, loss=SQUARED)
    state = initial_state(0, 1, unit_spec, SQUARED, result.states[0].prox)
    for (x, y), in rounds:
        state = primal_step(state, Sample(np.array([x]), y), {}, hp)
    np.testing.assert_array_equal(result.states[0].f.weights, state.f.weights)
    assert all(m.max_violation == 0.0 and m.dual_norm == 0.0 for m in result.metrics)


def test_identical_agents_keep_zero_duals(hp, unit_spec):
    """Test that agents with equal data never violate a generous tolerance"""
    rounds = [[(0.2 * t, 1.0 + t), (0.2 * t, 1.0 + t)] for t in range(3)]
    topology = from_edges(2, [(0, 1)], gamma=10.0)
    result = run_halk(topology, RoundsSource(rounds), hp, 3, spec=unit_spec, loss=SQUARED)
    assert topology.duals == {(0, 1): 0.0, (1, 0): 0.0}
    for m in result.metrics:
        assert m.edge_slack == [-10.0, -10.0]
        assert m.max_duals == [0.0, 0.0]


def test_serial_and_parallel_runs_match(hp, field_source):
    """Test that worker threads do not change a single bit of the metrics"""
    serial = run_halk(complete(3), field_source, hp, 40, workers=1)
    parallel = run_halk(complete(3), field_source, hp, 40, workers=3)
    assert [m.model_dump() for m in serial.metrics] == [m.model_dump() for m in parallel.metrics]


def test_messages_per_round(hp, field_source):
    """Test that each round exchanges one evaluation per directed edge"""
    result = run_halk(path(3), field_source, hp, 2)
    assert [m.messages for m in result.metrics] == [4, 4]


def test_exchange_uses_round_start_functions(hp, unit_spec):
    """Test that evaluations come from the functions before the round's update"""
    topology = from_edges(2, [(0, 1)])
    algorithm = HalkAlgorithm(hp, unit_spec, SQUARED, ProximitySpec())
    simulator = Simulator(topology, algorithm, RoundsSource([[(0.0, 1.0), (1.0, 2.0)]]))
    samples = simulator.data_source.sample(0)
    assert simulator.exchange(samples) == [{1: 0.0}, {0: 0.0}]
    simulator.run(1)
    evals = simulator.exchange(samples)
    assert evals[0][1] == simulator.states[1].predict([0.0])
    assert evals[1][0] == simulator.states[0].predict([1.0])


def test_stops_early_when_data_runs_out(hp, unit_spec, caplog):
    rounds = [[(0.0, 1.0), (0.5, 1.0)], [(0.1, 1.0), (0.6, 1.0)]]
    result = run_halk(from_edges(2, [(0, 1)]), RoundsSource(rounds), hp, 10, spec=unit_spec)
    assert result.rounds == 2
    assert result.stopped_early
    assert "stopping early" in caplog.text


def test_observer_sees_every_round(hp, field_source):
    observer = MagicMock()
    run_halk(complete(3), field_source, hp, 5, observer=observer)
    assert observer.call_count == 5
    t, states, record = observer.call_args[0]
    assert t == 4 and len(states) == 3 and record.t == 4


def test_agent_count_mismatch(hp, field_source):
    with pytest.raises(ArgumentError):
        run_halk(complete(2), field_source, hp, 5)


def test_invalid_workers_and_horizon(hp, field_source):
    with pytest.raises(ArgumentError):
        run_halk(complete(3), field_source, hp, 5, workers=0)
    with pytest.raises(ArgumentError):
        run_halk(complete(3), field_source, hp, -1)


def test_zero_rounds(hp, field_source):
    result = run_halk(complete(3), field_source, hp, 0)
    assert result.rounds == 0 and result.metrics == []


def test_penalty_baseline_keeps_fixed_duals(hp, field_source):
    result = run_penalty_baseline(complete(3), field_source, hp, 5, penalty_c=0.08)
    assert result.method == Method.PENALTY
    assert all(m.max_duals == [0.08] * 3 for m in result.metrics)


def test_rbf_baseline_has_constant_order(hp, field_source):
    dictionary = np.linspace(0.0, 0.3, 4).reshape(-1, 1)
    result = run_rbf_baseline(complete(3), field_source, hp, 10, dictionary=dictionary)
    assert all(m.model_orders == [4, 4, 4] for m in result.metrics)


def test_rbf_baseline_with_empty_dictionary(hp, field_source):
    """Test that without atoms every prediction and loss stays at the zero function's"""
    result = run_rbf_baseline(complete(3), field_source, hp, 5, dictionary=np.zeros((0, 1)), loss=SQUARED)
    model = field_source.model
    for m in result.metrics:
        _, y = sample_round(model, m.t)
        assert m.global_loss == pytest.approx(sum(0.5 * v ** 2 for v in y), rel=1e-12)
        assert m.total_model_order == 0


def test_linear_baseline_runs(hp, field_source):
    result = run_linear_baseline(complete(3), field_source, hp, 10, frequency=1000.0)
    assert result.method == Method.LINEAR
    assert all(m.max_model_order == 2 for m in result.metrics)


def test_centralized_single_agent_matches_halk(hp, unit_spec):
    rounds = [[(0.05 * t, np.cos(t))] for t in range(12)]
    central = run_centralized_baseline(RoundsSource(rounds), hp, 12, spec=unit_spec)
    local = run_halk(Topology(1, [], {}), RoundsSource(rounds), hp, 12, spec=unit_spec)
    assert [m.avg_loss for m in central.metrics] == [m.avg_loss for m in local.metrics]


def test_centralized_pools_all_samples(hp, field_source):
    central = run_centralized_baseline(field_source, hp, 6)
    assert central.extras == {"steps": 18}
    assert central.rounds == 6
    assert central.method == Method.CENTRALIZED
    pooled = run_halk(Topology(1, [], {}), PooledDataSource(field_source), hp, 18)
    for t, m in enumerate(central.metrics):
        expected = sum(step.global_loss for step in pooled.metrics[3 * t:3 * t + 3])
        assert m.global_loss == pytest.approx(expected, rel=1e-12)


def test_centralized_parsimony_override(hp, field_source):
    loose = run_centralized_baseline(field_source, hp, 20, parsimony=1e6)
    assert loose.states[0].model_order <= 1


def _two_agent_run(nu, T=10000):
    hp = HyperParams(eta=0.05, lam=1e-3, delta=1e-5, nu=nu, epsilon=1e-4, radius_rb=1.5)
    topology = from_edges(2, [(0, 1)], gamma=1.0)
    return run_halk(topology, ConstantSource([0.0, 1.06]), hp, T, spec=KernelSpec(bandwidth=1.0),
                    loss=HUBER_TENTH)


@pytest.mark.slow
def test_tightened_constraints_are_met_on_average():
    """Test that nu from the analysis constants keeps both edges' averaged slack non-positive"""
    constants = TheoryConstants(radius_rb=1.5, n_agents=2, lipschitz_c=0.1, lam=1e-3, slater_xi=1.0,
                                lipschitz_lh=1.0, n_edges=1, k1=0.5, delta=1e-5)
    nu = compute_nu(constants, 10000, 1e-4 / 0.05)
    assert 0.0 < nu < 0.2
    final = _two_agent_run(nu).metrics[-1]
    assert len(final.avg_edge_slack) == 2
    assert all(slack <= 0.0 for slack in final.avg_edge_slack)
    assert final.dual_norm > 0.0


@pytest.mark.slow
def test_violation_decays_without_tightening():
    """Test that with nu = 0 the averaged positive violation shrinks fivefold between t = 1000 and 10000"""
    metrics = _two_agent_run(0.0).metrics
    positive = np.cumsum([m.mean_violation_pos for m in metrics]) / np.arange(1, len(metrics) + 1)
    assert positive[999] > 0.0
    assert positive[9999] <= 0.2 * positive[999]


@pytest.mark.slow
def test_compression_stays_within_budget_on_field_run():
    hp = HyperParams(eta=0.01, lam=1e-5, delta=1e-5, parsimony=8.0)
    source = FieldDataSource(build_field(n_agents=10, seed=0))
    result = run_halk(complete(10), source, hp, 500, spec=KernelSpec(bandwidth=0.05))
    assert result.rounds == 500
    for m in result.metrics:
        assert max(m.compression_errors) <= hp.budget + 1e-8


def _bridged_cliques():
    """Cliques {0, 1, 2} and {3, 4, 5} joined by the edge (2, 3), the only edge with a tight tolerance"""
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
    gamma = {edge: 10.0 for edge in edges}
    gamma[(2, 3)] = 0.0
    return Topology(6, edges, gamma)


@pytest.mark.slow
def test_halk_beats_penalty_on_loss_and_disagreement():
    """Test that HALK has lower averaged loss and disagreement than the c = 0.08 penalty on most seeds"""
    hp = HyperParams(eta=0.01, lam=1e-5, delta=1e-5, parsimony=8.0)
    spec = KernelSpec(bandwidth=0.05)
    wins = 0
    for seed in range(3):
        source = FieldDataSource(build_field(n_agents=6, seed=seed))
        halk = run_halk(_bridged_cliques(), source, hp, 1500, spec=spec)
        penalty = run_penalty_baseline(_bridged_cliques(), source, hp, 1500, penalty_c=0.08, spec=spec)
        halk_disagreement = np.mean([m.mean_violation_pos for m in halk.metrics])
        penalty_disagreement = np.mean([m.mean_violation_pos for m in penalty.metrics])
        assert halk_disagreement > 0.0
        assert max(halk.states[2].out_duals[3], halk.states[3].out_duals[2]) > 0.08
        if (halk.metrics[-1].avg_loss <= penalty.metrics[-1].avg_loss
                and halk_disagreement <= penalty_disagreement):
            wins += 1
    assert wins >= 2
