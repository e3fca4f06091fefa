import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reactive_paths.analytic import (SADDLE_MIXTURE, LimitLaw, conditional_tau0_cdf, gaussian_tail,
                                     gumbel_law)
from reactive_paths.model import WallModel1D
from reactive_paths.rng import make_rng
from reactive_paths.samplers import (gaussian_tail_draws, resolve_xi, sample_gaussian_tail,
                                     sample_limit, sample_log_overshoot, sample_R,
                                     sample_tau0_given_hit)
from reactive_paths.stats import dkw_bound, ks_one_sample


def mills(a):
    return math.exp(-a * a / 2) / math.sqrt(2 * math.pi) / gaussian_tail(a)


def test_tail_support():
    x = sample_gaussian_tail(2.0, make_rng(1), 1_000_000)
    assert x.min() > 2.0


@pytest.mark.parametrize("a", [2.0, 0.3, 6.0, 30.0])
def test_tail_mean_matches_mills_ratio(a):
    n = 1_000_000
    x = sample_gaussian_tail(a, make_rng(2), n)
    assert abs(x.mean() - mills(a)) < 5 * x.std() / math.sqrt(n)


def test_very_negative_threshold_is_unconditioned():
    n = 200_000
    x = sample_gaussian_tail(-40.0, make_rng(3), n)
    assert abs(x.mean()) < 4 / math.sqrt(n)


@given(st.floats(0.5, 200.0), st.integers(0, 2**32))
def test_overshoot_is_exact_and_positive(a, seed):
    values, over, proposals = gaussian_tail_draws(a, 50, make_rng(seed))
    assert np.all(over > 0) and np.all(values > a)
    assert np.allclose(values - a, over, rtol=0, atol=4 * np.spacing(values))
    assert proposals >= 50


def test_scalar_draw_and_bad_threshold():
    assert isinstance(sample_gaussian_tail(1.0, make_rng(0)), float)
    with pytest.raises(ValueError):
        sample_gaussian_tail(math.nan, make_rng(0))


@pytest.mark.parametrize("lam, x0, eps", [(1.0, -0.5, 0.35), (2.0, -0.3, 0.05), (0.5, -0.9, 0.6)])
def test_tau0_sampler_matches_exact_cdf(lam, x0, eps):
    m = WallModel1D(lam, eps, x0)
    t = sample_tau0_given_hit(m, make_rng(4), 100_000)
    assert np.all(t > 0)
    assert ks_one_sample(t, lambda s: conditional_tau0_cdf(m, s)) < dkw_bound(100_000)


def test_tau0_sampler_deep_tail():
    # a ~ 57: the hitting probability underflows but the conditional law is fine
    m = WallModel1D(1.0, 0.01, -0.4)
    t = sample_tau0_given_hit(m, make_rng(5), 20_000)
    assert np.all(np.isfinite(t)) and np.all(t > 0)
    assert ks_one_sample(t, lambda s: conditional_tau0_cdf(m, s)) < dkw_bound(20_000)


def test_log_overshoot_median_moves_down_to_gumbel_median():
    # a (N - a) is stochastically below Exp(1) at moderate a, so R starts high
    rng = make_rng(6)
    r2 = sample_log_overshoot(2.0, rng, 100_000)
    r20 = sample_log_overshoot(20.0, rng, 100_000)
    assert np.all(np.isfinite(r2)) and np.all(np.isfinite(r20))
    assert np.median(r20) < np.median(r2)
    assert np.median(r20) == pytest.approx(-math.log(math.log(2.0)), abs=0.02)


def test_sample_r_uses_model_threshold():
    m = WallModel1D(1.0, 0.1, -0.5)
    x = sample_R(m, make_rng(7), 10)
    y = sample_log_overshoot(m.a, make_rng(7), 10)
    assert np.array_equal(x, y)
    with pytest.raises(ValueError):
        sample_log_overshoot(0.0, make_rng(7))


def test_gumbel_sampler_mass_at_zero():
    n = 1_000_000
    z = sample_limit(gumbel_law(), make_rng(8), n)
    p = math.exp(-1.0)
    assert abs((z <= 0).mean() - p) < 5 * math.sqrt(p * (1 - p) / n)
    v = np.exp(-z)
    assert abs(v.mean() - 1.0) < 5 * v.std() / math.sqrt(n)


def test_saddle_mixture_variance_gaussian_only():
    law = LimitLaw(SADDLE_MIXTURE, gaussian_scale=1 / math.sqrt(2 * 3.0), use_gaussian=True)
    x = sample_limit(law, make_rng(9), 400_000)
    assert x.var() == pytest.approx(1 / 6.0, rel=0.01)


def test_xi_samplers():
    rng = make_rng(10)
    assert np.all(resolve_xi("one")(rng, 5) == 1.0)
    assert set(resolve_xi("sign")(rng, 1000)) == {-1.0, 1.0}
    custom = lambda rng, n: np.full(n, 3.0)
    assert resolve_xi(custom) is custom
    with pytest.raises(ValueError):
        resolve_xi("cauchy")
