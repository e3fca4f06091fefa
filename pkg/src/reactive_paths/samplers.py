"""Exact samplers that need no path simulation."""
from __future__ import annotations

import math
from typing import Callable, Union

import numpy as np
from scipy import special

from . import _kernels
from .analytic import (GUMBEL, NEG_LOG_ABS_NORMAL, SADDLE_MIXTURE, LimitLaw,
                       gaussian_quantile_log)
from .model import WallModel1D


def sample_gaussian_tail(a: float, rng: np.random.Generator, size: int | None = None):
    """Draw ``N | N > a``.

    Plain rejection below ``a = 0.5``; above it, a shifted exponential proposal
    with the rate ``(a + sqrt(a^2 + 4)) / 2`` that maximises acceptance.
    """
    if not math.isfinite(a):
        raise ValueError("threshold must be finite")
    if size is None:
        return _kernels.tail_draw(float(a), rng)[0]
    values, _, _ = gaussian_tail_draws(a, size, rng)
    return values


def gaussian_tail_draws(a: float, n: int, rng: np.random.Generator):
    """``(values, overshoots, proposals)`` for ``n`` draws of ``N | N > a``.

    ``overshoots = values - a`` is returned exactly (no cancellation), which
    matters for log-overshoot statistics at large ``a``.
    """
    values = np.empty(n)
    overshoots = np.empty(n)
    proposals = _kernels.tail_draws(float(a), n, rng, values, overshoots)
    return values, overshoots, proposals


def sample_tau0_given_hit(model: WallModel1D, rng: np.random.Generator, size: int | None = None):
    """Hitting time of 0 conditioned on it being finite, by inverting its CDF.

    With ``u`` uniform, ``s`` solves ``1 - Phi(s) = u (1 - Phi(a))`` (so ``s >= a``)
    and ``t = -ln(1 - a^2/s^2) / (2 lam)``.  The inversion runs on log tails so
    it works for any ``a``.
    """
    n = 1 if size is None else size
    a = model.a
    u = 1.0 - rng.random(n)  # (0, 1]
    s = gaussian_quantile_log(np.log(u) + special.log_ndtr(-a))
    s = np.maximum(s, a)
    with np.errstate(divide="ignore"):
        t = np.log(s * s / ((s - a) * (s + a))) / (2.0 * model.lam)
    return float(t[0]) if size is None else t


def sample_R(model: WallModel1D, rng: np.random.Generator, size: int | None = None):
    """Log-overshoot statistic ``-ln(N - a) - ln(a)`` with ``N`` conditioned on ``N > a``."""
    return sample_log_overshoot(model.a, rng, size)


def sample_log_overshoot(a: float, rng: np.random.Generator, size: int | None = None):
    if not a > 0:
        raise ValueError(f"log-overshoot needs a > 0, got {a}")
    _, over, _ = gaussian_tail_draws(a, 1 if size is None else size, rng)
    r = -np.log(over) - math.log(a)
    return float(r[0]) if size is None else r


# ---------------------------------------------------------------- xi samplers

XiSampler = Callable[[np.random.Generator, int], np.ndarray]

XI_SAMPLERS: dict[str, XiSampler] = {
    "one": lambda rng, n: np.ones(n),
    "uniform": lambda rng, n: rng.random(n),
    "gaussian": lambda rng, n: rng.standard_normal(n),
    "sign": lambda rng, n: np.where(rng.random(n) < 0.5, -1.0, 1.0),
    "zero": lambda rng, n: np.zeros(n),
}


def resolve_xi(xi: Union[str, XiSampler]) -> XiSampler:
    if callable(xi):
        return xi
    try:
        return XI_SAMPLERS[xi]
    except KeyError:
        raise ValueError(f"unknown xi sampler {xi!r}; choose from {sorted(XI_SAMPLERS)}") from None


# ---------------------------------------------------------------- limit laws

def _standard_gumbel(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random(n)
    return -np.log(-np.log(u))


def sample_limit(law: LimitLaw, rng: np.random.Generator, size: int | None = None):
    n = 1 if size is None else size
    if law.kind == GUMBEL:
        out = law.location + law.scale * _standard_gumbel(rng, n)
    elif law.kind == NEG_LOG_ABS_NORMAL:
        out = law.location - law.scale * np.log(np.abs(rng.standard_normal(n)))
    elif law.kind == SADDLE_MIXTURE:
        out = np.zeros(n)
        if law.use_mixture:
            v = np.exp(-_standard_gumbel(rng, n))
            xi = resolve_xi(law.xi_sampler)(rng, n)
            out += law.mixture_coefficient * v ** law.mixture_power * xi
        if law.use_gaussian:
            out += law.gaussian_scale * rng.standard_normal(n)
    else:  # pragma: no cover - LimitLaw validates kind
        raise ValueError(law.kind)
    return float(out[0]) if size is None else out
