import math

import numpy as np
import pytest
from scipy import stats

from wtail.errors import DegenerateSampleError, DomainError, ParameterError
from wtail.models import (
    MODEL_IDS,
    SecondOrder,
    SeededStream,
    _raw_draws,
    cdf,
    get_model,
    quantile,
    sample,
    second_order_info,
    true_theta,
)

KS_CRIT_0001 = math.sqrt(-0.5 * math.log(0.0005))  # ~1.9495, scaled by sqrt(N)


def test_true_theta_table():
    expected = {
        "exponential": 1.0,
        "weibull(2,1)": 0.5,
        "gamma(0.75,1)": 1.0,
        "half-normal": 0.5,
        "gumbel": 1.0,
        "half-logistic": 1.0,
        "logistic": 1.0,
    }
    for mid, theta in expected.items():
        assert true_theta(get_model(mid)) == theta


def test_second_order_classes():
    cls, alpha, beta = second_order_info(get_model("logistic"))
    assert cls is SecondOrder.B_ALPHA_OVER_T
    assert alpha == pytest.approx(-math.log(2.0), abs=1e-15)
    assert beta == -1.0

    cls, alpha, beta = second_order_info(get_model("gumbel(mu=-1)"))
    assert cls is SecondOrder.B_ALPHA_OVER_T and alpha == 1.0 and beta == -1.0

    cls, alpha, beta = second_order_info(get_model("gumbel"))
    assert cls is SecondOrder.B_ALPHA_OVER_T and alpha == 0.0

    for mid in ("weibull(2,1)", "exponential"):
        cls, alpha, beta = second_order_info(get_model(mid))
        assert cls is SecondOrder.B_ZERO and alpha is None and beta == -math.inf

    for mid in ("gamma(0.75,1)", "half-normal"):
        cls, alpha, beta = second_order_info(get_model(mid))
        assert cls is SecondOrder.B_LOG_OVER_T and alpha is None and beta == -1.0

    cls, alpha, beta = second_order_info(get_model("half-logistic"))
    assert cls is SecondOrder.B_ALPHA_OVER_T and alpha is None


def test_get_model_parsing():
    assert get_model(" Weibull(2,1) ").id == "weibull(2,1)"
    assert get_model("gumbel(mu=-1)").mu == -1.0
    assert get_model("gumbel(mu=0)").id == "gumbel"
    with pytest.raises(ParameterError):
        get_model("cauchy")


def test_quantile_examples():
    assert quantile(get_model("exponential"), 0.5) == pytest.approx(
        math.log(2.0), abs=1e-15
    )
    assert quantile(get_model("weibull(2,1)"), 1.0 - math.exp(-1.0)) == pytest.approx(
        1.0, rel=1e-14
    )
    with pytest.raises(ParameterError):
        quantile(get_model("gamma(0.75,1)"), 0.5)
    with pytest.raises(DomainError):
        quantile(get_model("exponential"), 1.5)


@pytest.mark.parametrize(
    "mid", ["exponential", "weibull(2,1)", "gumbel", "gumbel(mu=-1)",
            "half-logistic", "logistic"]
)
def test_quantile_cdf_roundtrip(mid):
    model = get_model(mid)
    u = np.arange(0.01, 1.0, 0.01)
    np.testing.assert_allclose(cdf(model, quantile(model, u)), u, atol=1e-10)


@pytest.mark.parametrize("mid", [m for m in MODEL_IDS])
def test_kolmogorov_smirnov_smoke(mid):
    model = get_model(mid)
    rng = SeededStream(20260810, 17).generator()
    n = 100_000
    draws = _raw_draws(model, rng, n)
    stat = stats.kstest(draws, lambda x: cdf(model, x)).statistic
    assert stat < KS_CRIT_0001 / math.sqrt(n)


def test_half_normal_matches_abs_normal_mean():
    rng = SeededStream(5, 0).generator()
    draws = _raw_draws(get_model("half-normal"), rng, 100_000)
    target = math.sqrt(2.0 / math.pi)
    se = math.sqrt(1.0 - 2.0 / math.pi) / math.sqrt(draws.size)
    assert abs(draws.mean() - target) < 3.0 * se


def test_sampling_determinism_bytes(model):
    a = sample(model, 64, SeededStream(99, 3))
    b = sample(model, 64, SeededStream(99, 3))
    assert a.values.tobytes() == b.values.tobytes()
    c = sample(model, 64, SeededStream(99, 4))
    assert a.values.tobytes() != c.values.tobytes()


def test_streams_are_pure_and_distinct():
    s = SeededStream(123, 0)
    assert np.array_equal(s.generator().random(8), s.generator().random(8))
    other = SeededStream(123, 1)
    assert not np.array_equal(s.generator().random(8), other.generator().random(8))
    with pytest.raises(ParameterError):
        SeededStream(1, -1)


def test_samples_sorted_positive(model):
    s = sample(model, 50, SeededStream(7, 0))
    assert (np.diff(s.values) >= 0).all()
    assert s.values[0] > 0.0
    assert s.origin == (model.id, (7, 0))


def test_gumbel_truncation():
    # F(0) = exp(-1), so roughly a third of the draws are discarded
    s = sample(get_model("gumbel"), 300, SeededStream(11, 0))
    assert s.n < 300
    assert s.values[0] > 0.0
    # frozen stream where both of the two draws are non-positive
    with pytest.raises(DegenerateSampleError):
        sample(get_model("gumbel"), 2, SeededStream(0, 0))


def test_logistic_truncation():
    s = sample(get_model("logistic"), 400, SeededStream(3, 0))
    assert 100 < s.n < 300  # about half the mass sits below zero
    assert s.values[0] > 0.0


def test_positive_support_models_keep_all_draws(model):
    if model.truncate_nonpositive:
        pytest.skip("truncating model")
    s = sample(model, 128, SeededStream(21, 5))
    assert s.n == 128
