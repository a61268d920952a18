import numpy as np
import pytest

from conftest import make_dataset
from kqic import (
    KernelSpec,
    bootstrap_distribution,
    build_M,
    kqic_statistic,
    rademacher_weights,
    run_test,
    validate,
)
from kqic.bootstrap import empirical_threshold

GAUSS = KernelSpec.gaussian(1.0)
CONST = KernelSpec.constant()


def test_rademacher_determinism_and_streams():
    a = rademacher_weights(7, 3, 64)
    b = rademacher_weights(7, 3, 64)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {-1.0, 1.0}
    c = rademacher_weights(7, 4, 64)
    assert not np.array_equal(a, c)


def test_rademacher_mean():
    w = rademacher_weights(123, 0, 100_000)
    assert abs(w.mean()) < 0.02


def test_all_ones_weights_reproduce_statistic_exactly():
    rng = np.random.default_rng(1)
    ds = make_dataset(rng, 40)
    M = build_M(ds, GAUSS, GAUSS)
    stat = kqic_statistic(ds, GAUSS, GAUSS)
    rep = bootstrap_distribution(M, 1, 0, weights=np.ones((1, ds.n)))
    assert rep[0] == stat


def test_sign_flip_symmetry():
    rng = np.random.default_rng(2)
    ds = make_dataset(rng, 30)
    M = build_M(ds, GAUSS, GAUSS)
    w = rademacher_weights(5, 9, ds.n)
    plus = bootstrap_distribution(M, 1, 0, weights=w[None, :])
    minus = bootstrap_distribution(M, 1, 0, weights=-w[None, :])
    assert plus[0] == minus[0]


def test_replicate_matches_double_loop_on_hand_dataset():
    d3c = validate([(1, 4, 1), (2, 5, 0), (3, 6, 1)])
    M = build_M(d3c, CONST, CONST).values
    w = np.array([1.0, -1.0, 1.0])
    by_loop = sum(w[i] * w[j] * M[i, j] for i in range(3) for j in range(3))
    rep = bootstrap_distribution(M, 1, 0, weights=w[None, :])
    assert rep[0] == pytest.approx(by_loop, abs=1e-15)


def test_seeded_replicates_bitwise_identical():
    rng = np.random.default_rng(3)
    ds = make_dataset(rng, 25)
    M = build_M(ds, GAUSS, GAUSS)
    r1 = bootstrap_distribution(M, 64, seed=11)
    r2 = bootstrap_distribution(M, 64, seed=11)
    assert np.array_equal(r1, r2)
    assert not np.array_equal(r1, bootstrap_distribution(M, 64, seed=12))


def test_run_test_all_censored():
    ds = validate([(0, 1, 0), (0.5, 2, 0), (1, 3, 0)])
    out = run_test(ds, GAUSS, GAUSS, draws=50, alpha=0.05, seed=0)
    assert out.statistic == 0.0
    assert np.all(out.replicates == 0.0)
    assert out.p_value == 1.0
    assert out.reject is False


def test_run_test_deterministic():
    rng = np.random.default_rng(4)
    ds = make_dataset(rng, 30)
    a = run_test(ds, GAUSS, GAUSS, draws=100, alpha=0.05, seed=5)
    b = run_test(ds, GAUSS, GAUSS, draws=100, alpha=0.05, seed=5)
    assert a.statistic == b.statistic
    assert np.array_equal(a.replicates, b.replicates)
    assert (a.p_value, a.threshold, a.reject) == (b.p_value, b.threshold, b.reject)


def test_p_value_bounds_and_reject_invariant():
    rng = np.random.default_rng(6)
    for _ in range(10):
        ds = make_dataset(rng, int(rng.integers(5, 25)))
        out = run_test(ds, GAUSS, GAUSS, draws=40, alpha=0.1, seed=int(rng.integers(1000)))
        assert 1 / 41 <= out.p_value <= 1.0
        assert out.reject == (out.statistic > out.threshold)


def test_alpha_monotonicity():
    rng = np.random.default_rng(7)
    ds = make_dataset(rng, 30)
    reps = run_test(ds, GAUSS, GAUSS, draws=200, alpha=0.05, seed=1).replicates
    stat = kqic_statistic(ds, GAUSS, GAUSS)
    alphas = np.linspace(0.01, 0.5, 25)
    rejected = [stat > empirical_threshold(reps, a) for a in alphas]
    # once rejected at some alpha, rejected at every larger alpha
    first = next((i for i, r in enumerate(rejected) if r), len(rejected))
    assert all(rejected[first:])


def test_run_test_validation():
    ds = validate([(0, 1, 1), (0.5, 2, 1)])
    with pytest.raises(ValueError):
        run_test(ds, GAUSS, GAUSS, draws=10, alpha=1.5, seed=0)
    one = validate([(0, 1, 1)])
    with pytest.raises(ValueError):
        run_test(one, GAUSS, GAUSS)
    with pytest.raises(ValueError):
        bootstrap_distribution(build_M(ds, GAUSS, GAUSS), 0, 0)
