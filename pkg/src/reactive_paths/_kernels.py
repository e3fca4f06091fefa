"""Compiled inner loops.  All randomness comes from the ``Generator`` passed in."""
import math

import numba
import numpy as np

_SQRT_PI = math.sqrt(math.pi)
# (a - B) / sd(remaining) above this means P(ever reaching a) < 1e-13
_FAR_BELOW = 7.6


# ---------------------------------------------------------------- tails

@numba.njit(cache=True, nogil=True)
def tail_draw(a, rng):
    """One draw of ``N | N > a``; returns ``(value, overshoot, proposals)``."""
    if a < 0.5:
        k = 0
        while True:
            k += 1
            z = rng.standard_normal()
            if z > a:
                return z, z - a, k
    rate = 0.5 * (a + math.sqrt(a * a + 4.0))
    k = 0
    while True:
        k += 1
        y = rng.standard_exponential() / rate
        z = a + y
        d = z - rate
        if rng.random() <= math.exp(-0.5 * d * d):
            return z, y, k


@numba.njit(cache=True, nogil=True)
def tail_draws(a, n, rng, values, overshoots):
    proposals = 0
    for i in range(n):
        z, y, k = tail_draw(a, rng)
        values[i] = z
        overshoots[i] = y
        proposals += k
    return proposals


# ---------------------------------------------------------------- h-transform

@numba.njit(cache=True, nogil=True)
def log_erfc(w):
    if w < 25.0:
        return math.log(math.erfc(w))
    w2 = w * w
    series = 1.0 - 0.5 / w2 + 0.75 / w2 ** 2 - 1.875 / w2 ** 3 + 6.5625 / w2 ** 4
    return -w2 - math.log(w * _SQRT_PI) + math.log(series)


@numba.njit(cache=True, nogil=True)
def doob_ratio(x, lam, eps, qm):
    """``h'(x) / h(x)`` for the exit-right probability ``h`` (independent of ``q_plus``)."""
    scale = math.sqrt(lam) / eps
    u = scale * x
    v = scale * qm
    c = 0.5 * _SQRT_PI / scale
    delta = x - qm
    if lam * delta * delta / (eps * eps) < 1e-8:
        # integral over [qm, x] ~ exp(-u^2) * expm1(k delta) / k
        k = 2.0 * lam * x / (eps * eps)
        if k == 0.0:
            return 1.0 / delta
        return k / math.expm1(k * delta)
    if u >= 0.0:
        return math.exp(-u * u) / (c * (math.erf(u) + math.erf(-v)))
    lu = log_erfc(-u)
    lv = log_erfc(-v)
    return 1.0 / (c * math.exp(lu + u * u) * (-math.expm1(lv - lu)))


@numba.njit(cache=True, nogil=True)
def htransform_chunk(rng, n, lam, eps, x0, qm, qp, dt, max_steps, guard, taus):
    """Fill ``taus`` with ``n`` exit times of the diffusion conditioned to exit at ``qp``.

    Euler-Maruyama on the h-transformed drift with a Brownian-bridge check of
    the right boundary inside each step.  Returns
    ``(left_exits, stalled, guarded_steps, total_steps)``.
    """
    sq = eps * math.sqrt(dt)
    var = eps * eps * dt
    floor = qm + guard
    left = 0
    stalled = 0
    guarded = 0
    total = 0
    i = 0
    while i < n:
        x = x0
        k = 0
        done = False
        while k < max_steps:
            drift = lam * x + eps * eps * doob_ratio(x, lam, eps, qm)
            xn = x + drift * dt + sq * rng.standard_normal()
            k += 1
            if xn >= qp:
                done = True
                break
            p = math.exp(-2.0 * (qp - x) * (qp - xn) / var)
            if p > 1e-14 and rng.random() < p:
                done = True
                break
            if xn <= qm:
                break
            if xn < floor:
                xn = floor
                guarded += 1
            x = xn
        total += k
        if done:
            taus[i] = k * dt
            i += 1
        elif k >= max_steps:
            stalled += 1
        else:
            left += 1
    return left, stalled, guarded, total


# ---------------------------------------------------------------- path simulation

@numba.njit(cache=True, nogil=True)
def paths_chunk(rng, n, lam, eps, x0, qm, qp, dt, k_max, bridge, stop_at_exit,
                exit_time, exit_side, tau0, theta, b_tau0, b_theta, u_inf, flags, truncated):
    """Simulate ``n`` paths of ``B`` on the Brownian clock.

    The grid is the image of ``t_k = k dt`` (``k <= k_max``) plus one final
    cell that runs to the terminal clock time ``1/(2 lam)``.  Boundaries in
    ``B``-space: ``zero = |x0|/eps`` (X hits 0), ``g+ = (qp e^{-lam t} + |x0|)/eps``
    and ``g- = (|x0| - |qm| e^{-lam t})/eps``.  A path jumps to the final cell
    as soon as no undecided event can still occur (up to 1e-13).

    ``flags[:, 0..3]`` are C, D, E, F.  Returns the number of cells simulated.
    """
    ax0 = -x0
    aqm = -qm
    zero = ax0 / eps
    two_lam = 2.0 * lam
    ds_unit = -math.expm1(-two_lam * dt) / two_lam
    decay = math.exp(-lam * dt)
    cells = 0
    for i in range(n):
        b = 0.0
        e1 = 1.0  # exp(-lam t) at the left end of the current cell
        k = 0
        exited = False
        side = 0
        t_exit = np.inf
        d_hit = zero <= 0.0
        t0 = 0.0 if d_hit else np.inf
        bt0 = 0.0
        e_hit = False
        th = np.inf
        bth = np.nan
        trunc = False
        while True:
            final = k >= k_max
            if not final and exited:
                if d_hit and e_hit:
                    final = True
                elif (zero - b) * math.sqrt(two_lam) > _FAR_BELOW * e1:
                    final = True
            if final:
                e2 = 0.0
                ds = e1 * e1 / two_lam
                t_end = k * dt
            else:
                e2 = e1 * decay
                ds = e1 * e1 * ds_unit
                t_end = (k + 1) * dt
            b2 = b + math.sqrt(ds) * rng.standard_normal()
            cells += 1
            u_hi = -1.0
            cross_d = False
            if not d_hit:
                if b2 >= zero:
                    cross_d = True
                elif bridge:
                    p = math.exp(-2.0 * (zero - b) * (zero - b2) / ds)
                    if p > 1e-300:
                        u_hi = rng.random()
                        cross_d = u_hi < p
            cross_e = False
            p_e = 0.0
            if not e_hit:
                g1 = (qp * e1 + ax0) / eps
                g2 = (qp * e2 + ax0) / eps
                if b2 >= g2:
                    cross_e = True
                    p_e = 1.0
                elif bridge and (d_hit or cross_d):
                    p_e = math.exp(-2.0 * (g1 - b) * (g2 - b2) / ds)
                    if p_e > 1e-300:
                        if u_hi < 0.0:
                            u_hi = rng.random()
                        cross_e = u_hi < p_e
            cross_l = False
            p_l = 0.0
            if not exited:
                m1 = (ax0 - aqm * e1) / eps
                m2 = (ax0 - aqm * e2) / eps
                if b2 <= m2:
                    cross_l = True
                    p_l = 1.0
                elif bridge:
                    p_l = math.exp(-2.0 * (b - m1) * (b2 - m2) / ds)
                    if p_l > 1e-300:
                        cross_l = rng.random() < p_l
            if final and (cross_d or cross_e or (not exited and (cross_l or cross_e))):
                trunc = True
            if cross_d:
                d_hit = True
                t0 = t_end
                bt0 = b2
            if cross_e:
                e_hit = True
                th = t_end
                bth = b2
            if not exited and (cross_e or cross_l):
                exited = True
                t_exit = t_end
                if cross_e and cross_l:
                    side = 1 if p_e >= p_l else -1
                else:
                    side = 1 if cross_e else -1
            b = b2
            e1 = e2
            k += 1
            if final or (stop_at_exit and exited):
                break
        exit_time[i] = t_exit
        exit_side[i] = side
        tau0[i] = t0
        theta[i] = th
        b_tau0[i] = bt0
        b_theta[i] = bth
        u_inf[i] = b
        flags[i, 0] = side == 1
        flags[i, 1] = d_hit
        flags[i, 2] = e_hit
        flags[i, 3] = b > zero
        truncated[i] = trunc
    return cells
