import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wtail.core import (
    EstimatorSpec,
    Family,
    SortedSample,
    excesses,
    hill,
    hp,
    pm,
    t_seq_g,
    t_seq_g_curve,
    wtc,
    wtc_curve,
)
from wtail.errors import DomainError, KRangeError, ParameterError

from conftest import E, all_family_specs, draw, naive_curve


# ---------------------------------------------------------------------------
# SortedSample
# ---------------------------------------------------------------------------

def test_sample_sorts_and_validates():
    s = SortedSample([3.0, 1.0, 2.0])
    assert np.array_equal(s.values, [1.0, 2.0, 3.0])
    assert s.n == 3
    with pytest.raises(DomainError):
        SortedSample([1.0])
    with pytest.raises(DomainError):
        SortedSample([0.0, 1.0])
    with pytest.raises(DomainError):
        SortedSample([-1.0, 2.0])
    with pytest.raises(DomainError):
        SortedSample([1.0, np.inf])
    with pytest.raises(DomainError):
        SortedSample([1.0, np.nan])


def test_sample_immutable():
    s = SortedSample([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_permutation_invariance():
    rng = np.random.default_rng(7)
    raw = rng.exponential(size=40)
    s1 = SortedSample(raw)
    s2 = SortedSample(rng.permutation(raw))
    spec = EstimatorSpec(Family.TILDE_GG, 0.5)
    for k in (1, 7, 39):
        assert wtc(s1, k, spec) == wtc(s2, k, spec)


# ---------------------------------------------------------------------------
# excesses
# ---------------------------------------------------------------------------

def test_excesses_geometric(geometric_sample):
    ev = excesses(geometric_sample, 3)
    assert ev.k == 3
    np.testing.assert_allclose(ev.V, [3.0, 2.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(ev.U, [E**3, E**2, E], rtol=1e-14)
    np.testing.assert_allclose(ev.V, np.log(ev.U), atol=1e-12)


def test_excesses_all_ties():
    ev = excesses(SortedSample([5.0, 5.0, 5.0, 5.0]), 2)
    np.testing.assert_array_equal(ev.V, [0.0, 0.0])
    np.testing.assert_array_equal(ev.U, [1.0, 1.0])


def test_excesses_scale_invariant(geometric_sample):
    ev = excesses(geometric_sample, 3)
    ev7 = excesses(geometric_sample.scaled(7.0), 3)
    np.testing.assert_allclose(ev7.V, ev.V, atol=1e-12)
    np.testing.assert_allclose(ev7.U, ev.U, rtol=1e-12)


def test_excesses_monotone_structure():
    s = draw("gamma(0.75,1)", 60, seed=3)
    ev = excesses(s, 30)
    assert (np.diff(ev.V) <= 0).all() and (ev.V >= 0).all()
    assert (np.diff(ev.U) <= 0).all() and (ev.U >= 1).all()


def test_excesses_k_range(geometric_sample):
    with pytest.raises(KRangeError):
        excesses(geometric_sample, 0)
    with pytest.raises(KRangeError):
        excesses(geometric_sample, 4)


# ---------------------------------------------------------------------------
# hill
# ---------------------------------------------------------------------------

def test_hill_examples(geometric_sample):
    assert hill(geometric_sample, 3) == pytest.approx(2.0, abs=1e-14)
    assert hill(SortedSample([2.0, 2.0, 2.0, 2.0]), 3) == 0.0
    assert hill(geometric_sample.scaled(0.037), 3) == pytest.approx(2.0, abs=1e-12)


def test_hill_equals_log_geometric_mean_of_relative_excesses():
    for seed in range(5):
        s = draw("exponential", 80, seed=seed)
        for k in (1, 10, 79):
            u = excesses(s, k).U
            geo = math.log(float(np.exp(np.mean(np.log(u)))))
            assert hill(s, k) == pytest.approx(geo, abs=1e-12)


# ---------------------------------------------------------------------------
# pm
# ---------------------------------------------------------------------------

def test_pm_geometric_examples(geometric_sample):
    assert pm(geometric_sample, 3, 2.0) == pytest.approx(math.sqrt(7.0 / 3.0), abs=1e-12)
    assert pm(geometric_sample, 3, 1.0) == hill(geometric_sample, 3)
    # direct one-line evaluation of the defining formula at p = 0.5
    direct = (np.mean(np.array([3.0, 2.0, 1.0]) ** 0.5) / math.gamma(1.5)) ** 2
    assert direct == pytest.approx(2.432100900698127, abs=1e-12)
    assert pm(geometric_sample, 3, 0.5) == pytest.approx(direct, rel=1e-12)


def test_pm_domain():
    s = SortedSample(np.linspace(1.0, 9.0, 12))
    for bad in (0.0, -1.0, -2.5):
        with pytest.raises(ParameterError):
            pm(s, 5, bad)
    tied = SortedSample([1.0, 3.0, 3.0, 4.0])  # tie right at the k=2 threshold
    with pytest.raises(DomainError):
        pm(tied, 2, -0.5)
    # ties are harmless for positive exponents
    assert pm(tied, 2, 2.0) >= 0.0


def test_pm_matches_direct_evaluation_random():
    s = draw("weibull(2,1)", 70, seed=11)
    for p in (-0.5, 0.25, 1.75, 3.5):
        v = excesses(s, 33).V
        direct = (np.mean(v**p) / math.gamma(p + 1.0)) ** (1.0 / p)
        assert pm(s, 33, p) == pytest.approx(direct, rel=1e-12)


# ---------------------------------------------------------------------------
# hp
# ---------------------------------------------------------------------------

def test_hp_geometric_examples(geometric_sample):
    mean_inv = np.mean([E**-3, E**-2, E**-1])
    assert mean_inv == pytest.approx(0.18433393092530634, abs=1e-15)
    expected = (1.0 - 1.0 / mean_inv) / (-1.0)
    assert expected == pytest.approx(4.424937204888277, abs=1e-12)
    assert hp(geometric_sample, 3, -1.0) == pytest.approx(expected, rel=1e-12)
    assert hp(geometric_sample, 3, 0.0) == 2.0
    direct_p1 = 1.0 - 3.0 / (E + E**2 + E**3)
    assert direct_p1 == pytest.approx(0.9006388091612074, abs=1e-14)
    assert hp(geometric_sample, 3, 1.0) == pytest.approx(direct_p1, rel=1e-12)


def test_hp_continuity_at_zero():
    for seed in range(4):
        s = draw("half-normal", 90, seed=seed)
        for k in (5, 40, 89):
            h0 = hill(s, k)
            for eps in (1e-6, -1e-6):
                assert abs(hp(s, k, eps) - h0) < 1e-4


def test_hp_extreme_exponents():
    s = draw("gumbel", 150, seed=1)
    for p in (-25.0, -10.0, 10.0):
        value = hp(s, 40, p)
        assert math.isfinite(value)
        assert value > 0.0


# ---------------------------------------------------------------------------
# normalizing sequence
# ---------------------------------------------------------------------------

def test_t_seq_g_frozen_values():
    # term-by-term oracle for n=4, k=3
    terms = [math.log(math.log(5.0 / i)) for i in (1, 2, 3)]
    direct = sum(terms) / 3.0 - math.log(math.log(5.0 / 4.0))
    assert direct == pytest.approx(1.4055187972409267, abs=1e-14)
    assert t_seq_g(4, 3) == pytest.approx(direct, abs=1e-14)
    one_term = math.log(math.log(101.0)) - math.log(math.log(101.0 / 2.0))
    assert t_seq_g(100, 1) == pytest.approx(one_term, abs=1e-14)
    assert one_term == pytest.approx(0.16274305252168486, abs=1e-14)


@pytest.mark.parametrize("n", [2, 5, 37, 200])
def test_t_seq_g_positive_and_curve_consistent(n):
    curve = t_seq_g_curve(n)
    assert (curve > 0.0).all()
    for k in range(1, n):
        assert t_seq_g(n, k) == pytest.approx(curve[k - 1], rel=1e-12)


def test_t_seq_g_errors():
    with pytest.raises(KRangeError):
        t_seq_g(10, 0)
    with pytest.raises(KRangeError):
        t_seq_g(10, 10)


# ---------------------------------------------------------------------------
# wtc
# ---------------------------------------------------------------------------

def test_wtc_geometric_examples(geometric_sample):
    s = geometric_sample
    assert wtc(s, 3, EstimatorSpec(Family.HAT_GG, 0.0)) == pytest.approx(
        0.5753641449035617, abs=1e-12
    )
    tg1 = wtc(s, 3, EstimatorSpec(Family.TILDE_G, 1.0))
    assert tg1 == pytest.approx(1.4229621147195306, abs=1e-12)
    assert tg1 == wtc(s, 3, EstimatorSpec(Family.HAT_G, 0.0))
    assert wtc(s, 3, EstimatorSpec(Family.TILDE_GG, 2.0)) == pytest.approx(
        0.4394416243640187, abs=1e-12
    )


def test_identity_web_random_samples():
    for mid in ("exponential", "weibull(2,1)", "gumbel"):
        s = draw(mid, 120, seed=5)
        n = s.n
        for k in (1, 2, n // 3, n - 2, n - 1):
            h = hill(s, k)
            assert pm(s, k, 1.0) == h
            assert hp(s, k, 0.0) == h
            gg_tilde = wtc(s, k, EstimatorSpec(Family.TILDE_GG, 1.0))
            assert gg_tilde == wtc(s, k, EstimatorSpec(Family.HAT_GG, 0.0))
            assert abs(gg_tilde - math.log(n / k) * h) <= 1e-12
            assert wtc(s, k, EstimatorSpec(Family.TILDE_G, 1.0)) == wtc(
                s, k, EstimatorSpec(Family.HAT_G, 0.0)
            )


def test_hat_families_share_the_same_mean():
    s = draw("gamma(0.75,1)", 75, seed=2)
    for p in (-3.0, 0.5, 2.0):
        for k in (4, 30, 74):
            lhs = wtc(s, k, EstimatorSpec(Family.HAT_G, p)) * t_seq_g(s.n, k)
            rhs = wtc(s, k, EstimatorSpec(Family.HAT_GG, p)) / math.log(s.n / k)
            assert lhs == pytest.approx(rhs, abs=1e-12)


def test_wtc_rejects_k_equal_n(geometric_sample):
    with pytest.raises(KRangeError):
        wtc(geometric_sample, 4, EstimatorSpec(Family.HAT_GG, 0.0))


# ---------------------------------------------------------------------------
# estimator specs
# ---------------------------------------------------------------------------

def test_estimator_spec_labels():
    assert EstimatorSpec(Family.TILDE_G, 1.0).label == "tildeG_p1"
    assert EstimatorSpec(Family.HAT_GG, -10.0).label == "hatGG_p-10"
    assert EstimatorSpec(Family.TILDE_GG, 0.75).label == "tildeGG_p0.75"
    for text in ("tildeG_p1", "hatGG_p-10", "hatG_p0.25", "tildeGG_p3.5"):
        assert EstimatorSpec.from_label(text).label == text


def test_estimator_spec_validation():
    with pytest.raises(ParameterError):
        EstimatorSpec(Family.TILDE_G, 0.0)
    with pytest.raises(ParameterError):
        EstimatorSpec(Family.TILDE_GG, -1.0)
    with pytest.raises(ParameterError):
        EstimatorSpec.from_label("sausage_p1")
    with pytest.raises(ParameterError):
        EstimatorSpec.from_label("tildeG_pX")
    # hat families accept any real p
    EstimatorSpec(Family.HAT_GG, -25.0)


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def test_curve_matches_three_calls(geometric_sample):
    spec = EstimatorSpec(Family.HAT_GG, 0.0)
    curve = wtc_curve(geometric_sample, spec)
    expected = [wtc(geometric_sample, k, spec) for k in (1, 2, 3)]
    np.testing.assert_allclose(curve, expected, rtol=1e-9)


def test_curve_constant_sample():
    s = SortedSample([4.0] * 10)
    hill_based = [
        EstimatorSpec(Family.HAT_GG, 0.0),
        EstimatorSpec(Family.HAT_G, 0.0),
        EstimatorSpec(Family.TILDE_G, 1.0),
    ]
    for spec in hill_based:
        np.testing.assert_array_equal(wtc_curve(s, spec), np.zeros(9))
    # negative tilde exponent is undefined on ties: NaN, not zero
    assert np.isnan(wtc_curve(s, EstimatorSpec(Family.TILDE_G, -0.5))).all()


@pytest.mark.parametrize("mid", ["exponential", "half-normal", "gumbel"])
def test_curve_vs_naive_n50(mid):
    s = draw(mid, 50, seed=9)
    for spec in all_family_specs((-2.0, -0.25, 0.25, 1.0, 2.0, 3.5)):
        curve = wtc_curve(s, spec)
        naive = naive_curve(s, spec)
        np.testing.assert_allclose(curve, naive, rtol=1e-9, atol=0.0)


def test_curve_k_range(geometric_sample):
    spec = EstimatorSpec(Family.TILDE_GG, 2.0)
    full = wtc_curve(geometric_sample, spec)
    np.testing.assert_array_equal(wtc_curve(geometric_sample, spec, (2, 3)), full[1:])
    with pytest.raises(KRangeError):
        wtc_curve(geometric_sample, spec, (0, 3))
    with pytest.raises(KRangeError):
        wtc_curve(geometric_sample, spec, (3, 2))


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    scale=st.floats(1e-6, 1e6),
    family=st.sampled_from(list(Family)),
    p=st.floats(-0.9, 4.0),
)
def test_scale_invariance_property(seed, scale, family, p):
    if p == 0.0 and family.is_tilde:
        p = 0.5
    rng = np.random.default_rng(seed)
    s = SortedSample(rng.exponential(size=30) + 1e-9)
    spec = EstimatorSpec(family, p)
    k = int(rng.integers(1, 30))
    base = wtc(s, k, spec)
    scaled = wtc(s.scaled(scale), k, spec)
    assert abs(scaled - base) <= 1e-10 * (1.0 + abs(base))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(5, 60))
def test_curve_agrees_with_scalar_property(seed, n):
    rng = np.random.default_rng(seed)
    s = SortedSample(rng.gamma(0.75, size=n) + 1e-12)
    spec = EstimatorSpec(Family.TILDE_GG, 0.25)
    curve = wtc_curve(s, spec)
    k = int(rng.integers(1, n))
    assert curve[k - 1] == pytest.approx(wtc(s, k, spec), rel=1e-9)
