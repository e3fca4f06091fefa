import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reactive_paths.model import (NEVER, BrownianClock, WallModel1D, drift_1d,
                                  inverse_time_change, path_position, time_change)

lams = st.floats(0.05, 20.0)


def test_derived_threshold_is_exact():
    m = WallModel1D(lam=2.0, eps=0.3, x0=-0.7)
    assert m.a == abs(-0.7) * math.sqrt(4.0) / 0.3
    assert m.zero_level == pytest.approx(0.7 / 0.3, rel=1e-15)
    assert m.s_max == 0.25


@pytest.mark.parametrize("kwargs", [
    dict(lam=0.0, eps=0.1, x0=-0.5),
    dict(lam=1.0, eps=-0.1, x0=-0.5),
    dict(lam=1.0, eps=0.1, x0=0.2),
    dict(lam=1.0, eps=0.1, x0=-2.0),
    dict(lam=1.0, eps=0.1, x0=-0.5, q_plus=-0.1),
    dict(lam=1.0, eps=0.1, x0=0.0, q_plus=0.0),
])
def test_invalid_models_rejected(kwargs):
    with pytest.raises(ValueError):
        WallModel1D(**kwargs)


def test_start_at_unstable_point_allowed_beyond_the_wall():
    assert WallModel1D(1.0, 0.2, 0.0, q_plus=0.5).a == 0.0


@pytest.mark.parametrize("lam, x, expected", [(1, 0, 0), (2, 3, 6), (1, -1, -1)])
def test_drift_examples(lam, x, expected):
    assert drift_1d(WallModel1D(lam, 0.1, -0.5), x) == expected


@given(st.floats(-5, 5), lams)
def test_drift_is_odd_and_signed(x, lam):
    m = WallModel1D(lam, 0.1, -0.5)
    assert drift_1d(m, -x) == -drift_1d(m, x)
    assert np.sign(drift_1d(m, x)) == np.sign(x)


def test_time_change_examples():
    assert time_change(1.0, 0.0) == 0.0
    assert time_change(1.0, NEVER) == 0.5
    assert time_change(0.5, 1.0) == pytest.approx(0.6321205588285577, rel=1e-14)
    with pytest.raises(ValueError):
        time_change(1.0, -0.1)


@given(lams, st.floats(0, 50), st.floats(0, 50))
def test_time_change_increasing_and_bounded(lam, t1, t2):
    lo, hi = sorted((t1, t2))
    s_lo, s_hi = time_change(lam, lo), time_change(lam, hi)
    assert s_lo <= s_hi <= 1.0 / (2.0 * lam)


@given(lams, st.floats(0.0, 1.0 - 1e-6))
def test_inverse_round_trips_to_twelve_digits(lam, frac):
    s = frac / (2.0 * lam)
    back = time_change(lam, inverse_time_change(lam, s))
    assert back == pytest.approx(s, rel=1e-12, abs=1e-300)


def test_clock_terminal_time():
    clock = BrownianClock(4.0)
    assert clock.s_max == 0.125
    assert clock.s(math.inf) == 0.125
    assert clock.t(0.125) == math.inf


def test_path_position_examples():
    m = WallModel1D(1.0, 0.2, -0.5)
    assert path_position(m, 0.0, 0.0) == -0.5
    assert path_position(m, 2.5, 3.7) == pytest.approx(0.0, abs=1e-15)
    assert path_position(m, 3.0, math.log(2.0)) == pytest.approx(0.2, rel=1e-12)


@given(st.floats(-50, 50))
def test_path_position_at_time_zero(u):
    m = WallModel1D(1.3, 0.25, -0.4)
    assert path_position(m, u, 0.0) == pytest.approx(-0.4 + 0.25 * u, abs=1e-12)
