import numpy as np
import pytest
from unittest.mock import patch

from src.core.exceptions import ArgumentError, NumericError
from src.core.komp import komp_compress, komp_prune, refit_weights, removal_error, solve_gram
from src.core.models import KernelSpec, KompBudget
from src.core.rkhs import KernelExpansion, difference, evaluate, hilbert_norm, residual_norm


def _greedy_oracle(target, epsilon, tolerance=1e-10):
    """Independent greedy: recompute every removal error each pass, drop the first minimum."""
    K = target.gram
    w = target.weights
    total = float(w @ K @ w)
    keep = list(range(target.model_order))
    while keep:
        errors = []
        for pos in range(len(keep)):
            rest = keep[:pos] + keep[pos + 1:]
            if not rest:
                errors.append(np.sqrt(max(total, 0.0)))
                continue
            b = K[rest] @ w
            coef = np.linalg.solve(K[np.ix_(rest, rest)], b)
            errors.append(np.sqrt(max(total - b @ coef, 0.0)))
        best = int(np.argmin(errors))
        if errors[best] > epsilon + tolerance:
            break
        del keep[best]
    return keep


def test_refit_on_own_dictionary(make_expansion):
    f = make_expansion(4, seed=1)
    np.testing.assert_allclose(refit_weights(f, f.dictionary), f.weights, atol=1e-8)


def test_refit_single_atom(unit_spec):
    f = KernelExpansion(unit_spec, [[0.2]], [1.7])
    assert refit_weights(f, [[0.2]])[0] == pytest.approx(1.7, abs=1e-8)


def test_refit_beats_random_weights(unit_spec, rng):
    f = KernelExpansion(unit_spec, [[-1.0], [0.0], [1.2]], [1.0, -0.5, 2.0])
    D = np.array([[-0.8], [0.9]])
    best = KernelExpansion(unit_spec, D, refit_weights(f, D))
    best_error = hilbert_norm(difference(f, best))
    for _ in range(1000):
        candidate = KernelExpansion(unit_spec, D, rng.normal(scale=3.0, size=2))
        assert best_error <= hilbert_norm(difference(f, candidate)) + 1e-9


def test_refit_empty_dictionary(make_expansion):
    with pytest.raises(ArgumentError):
        refit_weights(make_expansion(2), np.zeros((0, 1)))


def test_solve_gram_escalates_jitter():
    gram = np.ones((2, 2))
    w = solve_gram(gram, np.array([2.0, 2.0]), jitter=0.0)
    np.testing.assert_allclose(gram @ w, [2.0, 2.0], atol=1e-6)


def test_solve_gram_gives_up():
    with pytest.raises(NumericError) as exc:
        solve_gram(-np.eye(2), np.ones(2))
    assert exc.value.condition is not None


def test_removal_error_keep_all(make_expansion):
    f = make_expansion(4, seed=2)
    assert removal_error(f, range(4)) == pytest.approx(0.0, abs=1e-6)


def test_removal_error_keep_none(make_expansion):
    f = make_expansion(3, seed=3)
    assert removal_error(f, []) == hilbert_norm(f)


def test_removal_error_duplicate_atom(unit_spec):
    f = KernelExpansion(unit_spec, [[0.5], [0.5], [-1.0]], [1.0, 2.0, 0.3])
    assert removal_error(f, [0, 2]) == pytest.approx(0.0, abs=1e-8)


def test_removal_error_quadratic_form(make_expansion):
    f = make_expansion(4, seed=4)
    keep = [0, 1, 3]
    K = f.gram
    b = K[keep] @ f.weights
    expected = np.sqrt(f.weights @ K @ f.weights - b @ np.linalg.solve(K[np.ix_(keep, keep)], b))
    assert removal_error(f, keep) == pytest.approx(expected, abs=1e-6)


def test_removal_error_bad_index(make_expansion):
    with pytest.raises(ArgumentError):
        removal_error(make_expansion(2), [0, 5])


def test_prune_empty_target(unit_spec):
    result, pruned = komp_prune(KernelExpansion.zero(unit_spec, 1), KompBudget(epsilon=1.0))
    assert result.model_order == 0
    assert pruned == 0


def test_prune_zero_budget_distinct_atoms(unit_spec):
    f = KernelExpansion(unit_spec, [[-2.0], [0.0], [2.0]], [1.0, -1.0, 0.5])
    result, pruned = komp_prune(f, KompBudget(epsilon=0.0))
    assert pruned == 0
    assert result is f


def test_zero_budget_keeps_nearly_redundant_atom(unit_spec):
    """Test that a removal error of a few 1e-9 is not treated as redundancy"""
    f = KernelExpansion(unit_spec, [[0.0], [1e-3]], [1.0, 2e-6])
    assert removal_error(f, [0]) == pytest.approx(2e-9, rel=1e-3)
    result, pruned = komp_prune(f, KompBudget(epsilon=0.0))
    assert pruned == 0
    assert result is f


def test_prune_duplicate_atoms(unit_spec):
    f = KernelExpansion(unit_spec, [[0.7], [0.7]], [1.0, 2.0])
    for epsilon in (0.0, 0.5):
        result = komp_compress(f, KompBudget(epsilon=epsilon))
        assert result.expansion.model_order == 1
        assert result.expansion.weights[0] == pytest.approx(3.0, abs=1e-6)
        assert result.residual == pytest.approx(0.0, abs=1e-8)


def test_prune_everything_within_budget(unit_spec):
    f = KernelExpansion(unit_spec, [[0.0], [3.0]], [0.01, -0.01])
    result = komp_compress(f, KompBudget(epsilon=1.0))
    assert result.expansion.model_order == 0
    assert result.residual == pytest.approx(hilbert_norm(f), abs=1e-12)


def test_prune_respects_budget():
    spec = KernelSpec(bandwidth=0.5)
    for seed in range(20):
        gen = np.random.default_rng(seed)
        f = KernelExpansion(spec, gen.uniform(0, 2, size=(8, 1)), gen.normal(size=8))
        result, _ = komp_prune(f, KompBudget(epsilon=0.3))
        assert residual_norm(result, f) <= 0.3 + 1e-8


def test_prune_matches_greedy_oracle():
    spec = KernelSpec(bandwidth=0.5)
    for seed in range(200):
        gen = np.random.default_rng(seed)
        f = KernelExpansion(spec, gen.uniform(0, 2, size=(5, 1)), gen.normal(size=5))
        result = komp_compress(f, KompBudget(epsilon=0.3))
        assert result.kept == _greedy_oracle(f, 0.3)


def test_prune_is_monotone_in_budget():
    spec = KernelSpec(bandwidth=0.5)
    for seed in range(20):
        gen = np.random.default_rng(seed)
        f = KernelExpansion(spec, gen.uniform(0, 2, size=(6, 1)), gen.normal(size=6))
        orders = [komp_prune(f, KompBudget(epsilon=e))[0].model_order for e in (0.05, 0.2, 0.5, 1.0)]
        assert orders == sorted(orders, reverse=True)


def test_prune_is_idempotent_on_exact_redundancy(unit_spec):
    f = KernelExpansion(unit_spec, [[0.0], [0.0], [1.5], [1.5], [3.0]], [1.0, 0.5, -1.0, 0.2, 0.8])
    once, pruned = komp_prune(f, KompBudget(epsilon=0.0))
    assert pruned == 2
    _, again = komp_prune(once, KompBudget(epsilon=0.0))
    assert again == 0


def test_prune_keeps_function_values_close(unit_spec, rng):
    f = KernelExpansion(unit_spec, rng.uniform(0, 1, size=(10, 1)), rng.normal(size=10))
    result, _ = komp_prune(f, KompBudget(epsilon=0.1))
    # |f(x) - g(x)| <= ||f - g||_H since k(x, x) = 1
    for x in rng.uniform(0, 1, size=20):
        assert abs(evaluate(result, [x]) - evaluate(f, [x])) <= 0.1 + 1e-8


def test_numeric_error_propagates(unit_spec):
    f = KernelExpansion(unit_spec, [[0.0], [0.0], [1.0]], [1.0, 2.0, 0.5])
    with patch('src.core.komp.solve_gram', side_effect=NumericError("singular", condition=1e20)):
        with pytest.raises(NumericError):
            komp_prune(f, KompBudget(epsilon=0.0))
