import math
import warnings

import numpy as np
import pytest

from reactive_paths.analytic import gaussian_tail, hit_probability
from reactive_paths.model import PathOutcome, WallModel1D
from reactive_paths.pathsim import (BudgetExceeded, GridSpec, NoConditioningEvents, StepSizeError,
                                    check_ito_isometry_identity, doob_conditioned_drift,
                                    empirical_hit_probability, equivalence_ratio,
                                    estimate_equivalence_ratio, exit_right_probability,
                                    htransform_exit_times, q_statistic, q_statistics,
                                    rejection_exit_times, sample_exit_conditioned_htransform,
                                    sample_exit_conditioned_rejection, simulate_path,
                                    simulate_paths)
from reactive_paths.rng import make_rng
from reactive_paths.stats import ks_two_sample, median_ci

GRID = GridSpec(1000)
BASE = WallModel1D(1.0, 0.4, -0.3, q_minus=-1.0, q_plus=0.5)


@pytest.fixture(scope="module")
def base_paths():
    return simulate_paths(BASE, GRID, 100_000, seed=11)


def within(p_hat, p, n, k=3.0):
    return abs(p_hat - p) <= k * math.sqrt(p * (1 - p) / n)


# ---------------------------------------------------------------- unconditioned paths

def test_event_inclusions(base_paths):
    p = base_paths
    assert not np.any(p.C & ~p.D)
    assert not np.any(p.F & ~p.D)
    assert not np.any(p.F & ~p.E)
    assert not np.any(p.C & ~p.E)
    assert np.all(p.exit_side[p.C] == 1)
    assert not np.any(p.truncated)


def test_probability_of_ending_positive(base_paths):
    assert within(base_paths.F.mean(), gaussian_tail(BASE.a), base_paths.n)


def test_probability_of_reaching_zero(base_paths):
    assert within(base_paths.D.mean(), 2 * gaussian_tail(BASE.a), base_paths.n)


@pytest.mark.parametrize("r", [0.5, 1.0, math.inf])
def test_finite_horizon_hits(base_paths, r):
    p_hat, se = empirical_hit_probability(base_paths, r)
    assert abs(p_hat - hit_probability(BASE, abs(BASE.x0), r)) < 3 * se


def test_grid_refinement_leaves_hit_probability_unchanged():
    coarse = simulate_paths(BASE, GridSpec(250), 40_000, seed=12)
    fine = simulate_paths(BASE, GridSpec(1000), 40_000, seed=13)
    pc, pf = coarse.D.mean(), fine.D.mean()
    se = math.sqrt(pc * (1 - pc) / coarse.n + pf * (1 - pf) / fine.n)
    assert abs(pc - pf) < 2.5758 * se


def test_single_path_record():
    out = simulate_path(BASE, GRID, make_rng(14))
    assert isinstance(out, PathOutcome)
    assert out.exit_side in ("left", "right")
    if out.F:
        assert math.isfinite(out.theta)


def test_coarse_grid_warns():
    with pytest.warns(RuntimeWarning):
        simulate_paths(WallModel1D(1.0, 0.9, -0.3), GridSpec(10), 10, seed=1)


def test_paths_independent_of_worker_count():
    a = simulate_paths(BASE, GRID, 5000, seed=15, workers=1, chunk=700)
    b = simulate_paths(BASE, GRID, 5000, seed=15, workers=3, chunk=700)
    for name in ("exit_time", "tau0", "theta", "u_inf", "C", "D", "E", "F"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


# ---------------------------------------------------------------- conditioned exits

def test_rejection_returns_right_exits_after_zero():
    m = WallModel1D(1.0, 0.35, -0.25)
    rng = make_rng(16)
    for _ in range(20):
        tau, out, attempts = sample_exit_conditioned_rejection(m, GRID, rng)
        assert out.exit_side == "right" and out.C and attempts >= 1
        assert tau > out.tau0


def test_rejection_budget_is_reported():
    m = WallModel1D(1.0, 0.05, -0.5)  # P(C) ~ 1e-45
    with pytest.raises(BudgetExceeded) as info:
        sample_exit_conditioned_rejection(m, GRID, make_rng(17), max_paths=200)
    assert info.value.attempts == 200


def test_rejection_acceptance_rate_tracks_ending_positive():
    m = WallModel1D(1.0, 0.35, -0.25)
    draws = rejection_exit_times(m, GRID, 4000, seed=18)
    rate = draws.acceptance
    p = gaussian_tail(m.a)
    # C and F differ by the measured symmetric-difference ratio; widen by it
    paths = simulate_paths(m, GRID, 20_000, seed=19)
    gap = equivalence_ratio(paths, ("F", "C")).ratio * p
    assert abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / draws.attempts) + gap


def test_doob_drift_repels_from_left_boundary():
    m = WallModel1D(1.0, 0.3, -0.5, q_minus=-1.0, q_plus=0.5)
    assert doob_conditioned_drift(m, -1.0 + 1e-6) > 1e3
    with pytest.raises(ValueError):
        doob_conditioned_drift(m, -1.0)
    with pytest.raises(ValueError):
        doob_conditioned_drift(m, 0.6)


@pytest.mark.parametrize("lam, eps", [(1.0, 0.3), (4.0, 0.2), (0.5, 0.1)])
def test_doob_drift_close_to_plain_drift_past_the_wall(lam, eps):
    m = WallModel1D(lam, eps, -0.2, q_minus=-1.0, q_plus=1.0)
    x = 2.0 * eps / math.sqrt(lam)
    assert doob_conditioned_drift(m, x) == pytest.approx(lam * x, rel=0.01)


def test_doob_drift_matches_finite_difference_of_h():
    m = WallModel1D(1.0, 0.3, -0.5, q_minus=-1.0, q_plus=0.5)
    for x in (-0.9, -0.4, 0.0, 0.3):
        h = 1e-6
        ratio = (exit_right_probability(m, x + h) - exit_right_probability(m, x - h)) / (2 * h)
        ratio /= exit_right_probability(m, x)
        assert doob_conditioned_drift(m, x) == pytest.approx(m.lam * x + m.eps ** 2 * ratio, rel=1e-5)


def test_exit_probability_symmetry():
    m = WallModel1D(1.0, 0.3, -0.5, q_minus=-0.7, q_plus=0.7)
    assert exit_right_probability(m, 0.0) == pytest.approx(0.5, abs=1e-15)


def test_htransform_left_exits_rare_at_fine_step():
    m = WallModel1D(1.0, 0.3, -0.25)
    draws = htransform_exit_times(m, 1e-4, 1000, seed=20)
    assert draws.left_exits / draws.attempts < 0.01
    assert draws.attempts == 1000 + draws.left_exits
    assert draws.guarded_steps <= 1e-4 * draws.steps


def test_htransform_coarse_step_fails_loudly():
    # one step of noise is larger than the distance to q_minus
    m = WallModel1D(1.0, 0.3, -0.95)
    with pytest.raises(StepSizeError):
        htransform_exit_times(m, 0.05, 500, seed=21)


def test_htransform_single_draw_and_precondition():
    m = WallModel1D(1.0, 0.3, -0.25)
    assert sample_exit_conditioned_htransform(m, 1e-3, make_rng(22)) > 0
    with pytest.raises(ValueError):
        htransform_exit_times(WallModel1D(1.0, 0.3, -0.25, q_plus=0.0), 1e-3, 10, seed=1)


@pytest.mark.slow
def test_htransform_agrees_with_rejection_at_a_second_parameter_pair():
    m = WallModel1D(2.0, 0.3, -0.25, q_minus=-1.0, q_plus=0.5)
    h = htransform_exit_times(m, 5e-4, 5000, seed=23)
    r = rejection_exit_times(m, GridSpec(2000), 5000, seed=24)
    stat, thr = ks_two_sample(h.taus, r.taus)
    assert stat < thr


# ---------------------------------------------------------------- equivalence ratios

def test_cd_pair_counts_only_d_without_c():
    m = WallModel1D(1.0, 0.45, -0.3, q_plus=0.0)
    paths = simulate_paths(m, GRID, 20_000, seed=25)
    assert not np.any(paths.C & ~paths.D)
    est = equivalence_ratio(paths, ("C", "D"))
    assert est.count_sym_diff == int((paths.D & ~paths.C).sum())
    assert est.ratio >= 0


def test_equivalence_guards():
    m = WallModel1D(1.0, 0.05, -0.5)
    paths = simulate_paths(m, GRID, 1000, seed=26)
    with pytest.raises(NoConditioningEvents):
        equivalence_ratio(paths, ("C", "E"))
    with pytest.raises(ValueError):
        estimate_equivalence_ratio(m, GRID, 1, 100, ("C", "E"))


def test_ef_ratio_is_the_one_sided_tail():
    # after theta the path must fall back from q_plus to 0: P = 1 - Phi(q_plus sqrt(2 lam) / eps)
    m = WallModel1D(1.0, 0.35, -0.3)
    est = estimate_equivalence_ratio(m, GRID, 27, 100_000, ("E", "F"))
    target = gaussian_tail(m.q_plus * math.sqrt(2 * m.lam) / m.eps)
    assert abs(est.ratio - target) < 3 * est.ci_halfwidth / 2.5758


# ---------------------------------------------------------------- identities

def test_second_moment_identity_at_each_stopping_time(base_paths):
    iso = check_ito_isometry_identity(BASE, GRID, 0, base_paths.n, paths=base_paths)
    assert iso.rhs == pytest.approx(BASE.eps ** 2 * iso.p_d / (2 * BASE.lam))
    assert abs(iso.ratio - 1) <= iso.ratio_ci
    assert abs(iso.ratio_theta - 1) <= iso.ratio_theta_ci
    assert abs(iso.d_over_f - 2) <= iso.d_over_f_ci


def test_theta_delta_integrated_over_d_gives_p_e(base_paths):
    # Delta built at theta vanishes off E, so against P(D) the ratio is P(E)/P(D) ~ 1/2
    iso = check_ito_isometry_identity(BASE, GRID, 0, base_paths.n, paths=base_paths)
    lit = iso.lhs_theta / iso.rhs
    assert lit == pytest.approx(iso.p_e / iso.p_d, rel=0.05)
    assert lit < 0.7


def test_q_statistic_examples(base_paths):
    m = BASE
    theta = 2.0
    u_theta = (m.q_plus * math.exp(-m.lam * theta) - m.x0) / m.eps
    rec = PathOutcome(theta, "right", 1.0, theta, u_theta, u_theta, True, True, True, True)
    assert q_statistic(rec, m) == pytest.approx(0.0, abs=1e-12)
    never = PathOutcome(math.inf, "left", math.inf, math.inf, math.nan, -1.0, False, False, False, False)
    with pytest.raises(ValueError):
        q_statistic(never, m)
    q = q_statistics(base_paths)
    assert q.size == int(base_paths.F.sum()) and np.all(np.isfinite(q))
    i = int(np.flatnonzero(base_paths.F)[0])
    assert q_statistic(base_paths.outcome(i), m) == pytest.approx(q[0], rel=1e-9)


@pytest.mark.slow
def test_q_statistic_concentrates():
    meds = []
    for k, eps in enumerate((0.5, 0.25)):
        paths = simulate_paths(BASE.with_eps(eps), GRID, 60_000, seed=28 + k)
        meds.append(median_ci(np.abs(q_statistics(paths))))
    (m1, lo1, hi1), (m2, lo2, hi2) = meds
    assert hi2 < lo1


@pytest.mark.slow
def test_exit_and_hitting_time_laws_merge():
    dists = []
    for k, eps in enumerate((0.5, 0.3)):
        m = WallModel1D(1.0, eps, -0.25)
        p = simulate_paths(m, GRID, 60_000, seed=30 + k)
        shift = 2 * math.log(1 / eps)
        dists.append(ks_two_sample(p.exit_time[p.C] - shift, p.theta[p.F] - shift)[0])
    assert dists[1] < dists[0]
