import itertools
import math

import numpy as np
import pytest

from conftest import make_dataset, make_loose_dataset
from kqic import (
    FeasibilityError,
    KernelSpec,
    kaplan_meier,
    kqic_statistic,
    mb_test,
    minp_test,
    truncation_permutation,
    two_sample_logrank,
    validate,
    weight_sc,
    wlr_statistic,
    wlr_test,
)
from kqic.baselines import RiskSetWeight, _minp_value, _subject_terms

D3 = validate([(1, 4, 1), (2, 5, 1), (3, 6, 1)])
D3C = validate([(1, 4, 1), (2, 5, 0), (3, 6, 1)])


# --- Kaplan-Meier -----------------------------------------------------------


def test_kaplan_meier_hand_example():
    s = kaplan_meier([1.0, 2.0, 3.0], [True, True, False])
    assert s(0.5) == 1.0
    assert s.left_limit(1.0) == 1.0
    assert s(1.5) == pytest.approx(2 / 3)
    assert s.left_limit(2.0) == pytest.approx(2 / 3)
    assert s(2.5) == pytest.approx(1 / 3)
    assert s(100.0) == pytest.approx(1 / 3)


def test_kaplan_meier_all_censored():
    s = kaplan_meier([1.0, 2.0, 3.0], [False, False, False])
    assert s(0.1) == s(5.0) == 1.0


def test_kaplan_meier_single_event():
    s = kaplan_meier([1.0], [True])
    assert s.left_limit(1.0) == 1.0
    assert s(1.0) == 0.0


def test_kaplan_meier_no_censoring_is_empirical_survival():
    rng = np.random.default_rng(3)
    t = rng.exponential(1.0, 40)
    s = kaplan_meier(t, np.ones(40, bool))
    for q in rng.uniform(0, 3, 20):
        # right-continuous version estimates P(T > q)
        assert s(q) == pytest.approx(np.mean(t > q), abs=1e-12)


def test_kaplan_meier_errors():
    with pytest.raises(ValueError):
        kaplan_meier([], [])
    with pytest.raises(ValueError):
        kaplan_meier([0.0, 1.0], [True, True])


# --- Weighted log-rank ------------------------------------------------------


def test_wlr_statistic_risk_weight_hand():
    assert wlr_statistic(D3, RiskSetWeight(D3)) == pytest.approx(-3.0, abs=1e-12)


def test_wlr_statistic_all_censored():
    ds = validate([(0, 1, 0), (0.5, 2, 0)])
    assert wlr_statistic(ds, RiskSetWeight(ds)) == 0.0


def test_wlr_kqic_bridge():
    rng = np.random.default_rng(8)
    const = KernelSpec.constant()
    for _ in range(15):
        ds = make_dataset(rng, int(rng.integers(3, 40)))
        lw = wlr_statistic(ds, RiskSetWeight(ds))
        assert abs((lw / ds.n**2) ** 2 - kqic_statistic(ds, const, const)) <= 1e-10


def test_weight_sc_reduces_to_pi_hat_without_censoring():
    rng = np.random.default_rng(9)
    ds = make_dataset(rng, 25, censor_prob=0.0)
    w = weight_sc(ds)
    grid = w.grid(ds.entry, ds.observed)
    base = RiskSetWeight(ds).grid(ds.entry, ds.observed) / ds.n
    assert np.allclose(grid, base, atol=1e-12)


def test_weight_sc_hand_values():
    # residual times (3, 3, 3) with one event -> survival drops to 2/3 at 3;
    # every indicator-true term evaluates the left limit at or before the
    # jump, so the rescaling stays at 1 here
    w = weight_sc(D3C)
    assert w.km.left_limit(3.0) == 1.0
    assert w.km(3.0) == pytest.approx(2 / 3)
    assert w(2.0, 5.0) == pytest.approx(1 / 3)
    assert w(3.0, 6.0) == pytest.approx(1 / 3)
    assert w(3.0, 4.0) == pytest.approx(1.0)


def test_weight_sc_rescales_beyond_jump():
    # residuals (1, 3) with the short one an event in the flipped flags:
    # survival halves at 1, doubling later contributions
    ds = validate([(0.0, 1.0, 0), (0.0, 3.0, 1)])
    w = weight_sc(ds)
    assert w.km(1.0) == pytest.approx(0.5)
    assert w(0.0, 2.5) == pytest.approx(1.0)  # (1/2) * (1 / 0.5)


def test_subject_terms_sum_to_statistic():
    rng = np.random.default_rng(10)
    for _ in range(10):
        ds = make_dataset(rng, int(rng.integers(4, 40)))
        w = weight_sc(ds)
        assert np.sum(_subject_terms(ds, w)) == pytest.approx(wlr_statistic(ds, w), abs=1e-10)


def test_wlr_test_variants():
    rng = np.random.default_rng(11)
    ds = make_dataset(rng, 40)
    r = wlr_test(ds, "R_weight", draws=100, seed=4)
    assert r.method == "WLR" and r.calibration == "kqic_equivalent"
    assert 1 / 101 <= r.p_value <= 1.0
    const = KernelSpec.constant()
    lw = wlr_statistic(ds, RiskSetWeight(ds))
    assert r.statistic == pytest.approx((lw / ds.n**2) ** 2, abs=1e-12)
    assert r.statistic == pytest.approx(kqic_statistic(ds, const, const), abs=1e-10)

    sc = wlr_test(ds, "SC_weight", draws=100, seed=4)
    assert sc.method == "WLR_SC" and sc.calibration == "wild_multiplier"
    assert 1 / 101 <= sc.p_value <= 1.0
    again = wlr_test(ds, "SC_weight", draws=100, seed=4)
    assert sc.statistic == again.statistic and sc.p_value == again.p_value

    with pytest.raises(ValueError):
        wlr_test(ds, "other")


# --- Conditional Kendall's tau ----------------------------------------------


def test_mb_uncensored_matches_kendall():
    out = mb_test(D3)
    assert out.statistic == 3.0
    assert out.calibration == "normal_approx"


def test_mb_no_comparable_pairs():
    ds = validate([(0, 1, 1), (2, 3, 1)])
    out = mb_test(ds)
    assert out.statistic == 0.0 and out.p_value == 1.0 and out.reject is False
    assert out.note == "no comparable pairs"


def test_mb_statistic_order_invariant():
    rng = np.random.default_rng(12)
    ds = make_dataset(rng, 30)
    base = mb_test(ds).statistic
    for _ in range(3):
        assert mb_test(ds.subset(rng.permutation(ds.n))).statistic == base


def test_mb_censoring_rules():
    # smaller observed time censored -> pair not orderable
    ds = validate([(0.0, 2.0, 0), (0.1, 3.0, 1)])
    assert mb_test(ds).statistic == 0.0
    # smaller observed time an event, larger censored -> orderable
    ds2 = validate([(0.0, 2.0, 1), (0.1, 3.0, 0)])
    assert mb_test(ds2).statistic == 1.0


# --- Two-sample log-rank ----------------------------------------------------


def test_logrank_hand_example():
    a = validate([(0, 1, 1)])
    b = validate([(0, 2, 1)])
    res = two_sample_logrank(a, b)
    assert res.u == pytest.approx(0.5)
    assert res.variance == pytest.approx(0.25)
    assert res.statistic == pytest.approx(1.0)
    assert res.p_value == pytest.approx(0.3173, abs=2e-4)


def test_logrank_antisymmetry():
    rng = np.random.default_rng(13)
    a = make_dataset(rng, 15)
    b = make_dataset(rng, 12)
    ab = two_sample_logrank(a, b)
    ba = two_sample_logrank(b, a)
    assert ab.u == pytest.approx(-ba.u, abs=1e-12)
    assert ab.p_value == pytest.approx(ba.p_value, abs=1e-12)


def test_logrank_mirrored_groups_u_zero():
    rng = np.random.default_rng(14)
    g = make_dataset(rng, 10)
    res = two_sample_logrank(g, g)
    assert res.u == pytest.approx(0.0, abs=1e-12)


def test_logrank_no_overlap_zero_variance():
    a = validate([(0, 1, 1)])
    b = validate([(5, 6, 1)])
    res = two_sample_logrank(a, b)
    assert res.variance == 0.0 and res.p_value == 1.0


def test_logrank_needs_events():
    a = validate([(0, 1, 0)])
    b = validate([(0, 2, 0)])
    with pytest.raises(ValueError):
        two_sample_logrank(a, b)


# --- MinP tests --------------------------------------------------------------


def test_minp_too_few_events():
    ds = validate([(0.1 * i, 0.1 * i + 1.0, int(i < 4)) for i in range(12)])
    out = minp_test(ds, "MinP1", min_events=5, permutations=10, seed=0)
    assert out.p_value == 1.0 and out.note == "no admissible split"
    out2 = minp_test(ds, "MinP2", min_events=5, permutations=10, seed=0)
    assert out2.p_value == 1.0


def _cluster_dataset():
    # three early entries with long survival, three late entries dying fast
    return validate(
        [(0.1, 10, 1), (0.2, 11, 1), (0.3, 12, 1), (1.0, 2, 1), (1.1, 2.5, 1), (1.2, 3, 1)]
    )


def test_minp1_matches_exhaustive_cut_enumeration():
    ds = _cluster_dataset()
    E = 2
    observed, admissible = _minp_value(ds.entry, ds.observed, ds.event, "MinP1", E)
    assert admissible
    # reference: loop every cut through the public two-sample test
    best = 1.0
    per_cut = {}
    for m in range(ds.n):
        members = ds.entry <= ds.entry[m]
        d_in = int(np.count_nonzero(ds.event[members]))
        d_out = int(np.count_nonzero(ds.event[~members]))
        if d_in < E or d_out < E:
            per_cut[m] = 1.0
            continue
        res = two_sample_logrank(ds.subset(np.flatnonzero(members)), ds.subset(np.flatnonzero(~members)))
        per_cut[m] = res.p_value
        best = min(best, res.p_value)
    assert observed == pytest.approx(best, abs=1e-12)
    # the smallest p-value sits at the cut separating the cluster
    separating = int(np.argmax(ds.entry == 0.3))
    assert per_cut[separating] == pytest.approx(best, abs=1e-12)


def test_minp_deterministic_and_bounds():
    rng = np.random.default_rng(15)
    ds = make_loose_dataset(rng, 30, censor_prob=0.2)
    a = minp_test(ds, "MinP1", min_events=3, permutations=60, seed=9)
    b = minp_test(ds, "MinP1", min_events=3, permutations=60, seed=9)
    assert (a.statistic, a.p_value) == (b.statistic, b.p_value)
    assert 0.0 < a.statistic <= 1.0
    assert 1 / 61 <= a.p_value <= 1.0


def test_minp2_runs_and_is_deterministic():
    rng = np.random.default_rng(16)
    ds = make_loose_dataset(rng, 30, censor_prob=0.2)
    a = minp_test(ds, "MinP2", min_events=3, permutations=40, seed=2)
    b = minp_test(ds, "MinP2", min_events=3, permutations=40, seed=2)
    assert (a.statistic, a.p_value) == (b.statistic, b.p_value)


def test_minp_unknown_variant():
    with pytest.raises(ValueError):
        minp_test(D3, "MinP3", min_events=1, permutations=5, seed=0)


# --- Truncation-respecting permutation ---------------------------------------


def test_permutation_always_valid_and_multiset_preserving():
    rng = np.random.default_rng(17)
    ds = make_loose_dataset(rng, 25)
    for b in range(10):
        perm = truncation_permutation(ds, 3, b)
        assert np.all(perm.entry < perm.observed)
        assert sorted(perm.entry.tolist()) == sorted(ds.entry.tolist())
        assert np.array_equal(perm.observed, ds.observed)
        assert np.array_equal(perm.event, ds.event)


def test_permutation_first_draw_accepted_when_unconstrained():
    # all entries below all observed times: every permutation is valid
    ds = validate([(0.1, 2.5, 1), (0.5, 2.1, 1), (0.9, 3.0, 0)])
    perm = truncation_permutation(ds, 12, 0)
    assert np.all(perm.entry < perm.observed)


def test_permutation_uniform_over_valid_set_d3():
    # max entry 3 < min observed 4: all 6 orderings valid
    counts = {}
    for b in range(1200):
        perm = truncation_permutation(D3, 7, b)
        counts[tuple(perm.entry.tolist())] = counts.get(tuple(perm.entry.tolist()), 0) + 1
    assert len(counts) == 6
    assert min(counts.values()) > 120


def test_permutation_respects_chain_constraints():
    chain = validate([(0, 1.5, 1), (1, 2.5, 1), (2, 3.5, 1)])
    valid = set()
    for x in itertools.permutations([0.0, 1.0, 2.0]):
        if all(a < b for a, b in zip(x, [1.5, 2.5, 3.5])):
            valid.add(x)
    assert len(valid) == 4
    seen = set()
    for b in range(400):
        perm = truncation_permutation(chain, 5, b)
        seen.add(tuple(perm.entry.tolist()))
    assert seen == valid


def test_permutation_feasibility_error():
    # strict chain: only the identity is valid, so rejection sampling gives up
    n = 40
    ds = validate([(float(i), float(i) + 1.0, 1) for i in range(n)])
    with pytest.raises(FeasibilityError):
        truncation_permutation(ds, 0, 0)
