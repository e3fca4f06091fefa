"""Closed-form probabilities, limit laws and their characteristic functions."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from .model import WallModel1D, time_change

SQRT2PI = math.sqrt(2.0 * math.pi)
LN_SQRT_PI = 0.5 * math.log(math.pi)


# --------------------------------------------------------------------------
# Gaussian tails
# --------------------------------------------------------------------------

def gaussian_tail(x):
    """``1 - Phi(x)`` without cancellation (``ndtr(-x)``)."""
    out = special.ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def log_gaussian_tail(x):
    """``ln(1 - Phi(x))``, accurate far into the tail."""
    out = special.log_ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _log_phi(x):
    return -0.5 * x * x - 0.5 * math.log(2.0 * math.pi)


def _newton_log_tail(x, lp, n_iter):
    for _ in range(n_iter):
        ok = np.isfinite(x)
        xa = x[ok]
        f = special.log_ndtr(-xa) - lp[ok]
        # d/dx ln(1 - Phi(x)) = -phi(x) / (1 - Phi(x))
        slope = -np.exp(_log_phi(xa) - special.log_ndtr(-xa))
        x[ok] = xa - f / slope
    return x


def gaussian_quantile_log(log_p):
    """Upper quantile from a log tail probability: solves ``ln(1 - Phi(x)) = log_p``.

    Starts from the rational inverse (``ndtri``) where ``exp(log_p)`` is
    representable and from the asymptotic tail expansion otherwise, then
    polishes with Newton steps on the log scale.
    """
    lp = np.atleast_1d(np.asarray(log_p, dtype=float))
    if np.any(lp > 0) or np.any(np.isnan(lp)):
        raise ValueError("log probability must be <= 0")
    x = np.empty_like(lp)
    deep = lp < -700.0
    with np.errstate(divide="ignore"):
        x[~deep] = -special.ndtri(np.exp(lp[~deep]))
    if np.any(deep):
        # 1 - Phi(y) ~ phi(y) / y
        y = np.sqrt(-2.0 * lp[deep])
        for _ in range(3):
            y = np.sqrt(-2.0 * lp[deep] - 2.0 * np.log(y * SQRT2PI))
        x[deep] = y
    x = _newton_log_tail(x, lp, 4 if np.any(deep) else 1)
    return float(x[0]) if np.ndim(log_p) == 0 else x


def gaussian_quantile(p):
    """Upper quantile: the ``x`` with ``1 - Phi(x) = p``.

    Defined as the inverse of :func:`gaussian_tail`, so
    ``gaussian_tail(gaussian_quantile(p)) == p`` up to rounding.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0) or np.any(p_arr >= 1):
        raise ValueError("p must lie strictly inside (0, 1)")
    with np.errstate(divide="ignore"):
        x = -special.ndtri(p_arr)
        slope = -np.exp(_log_phi(x) - special.log_ndtr(-x))
        x = x - (special.log_ndtr(-x) - np.log(p_arr)) / slope
    return float(x) if x.ndim == 0 else x


# --------------------------------------------------------------------------
# Reflection-principle probabilities
# --------------------------------------------------------------------------

def hit_probability(model: WallModel1D, z: float, r: float) -> float:
    """Probability that ``eps U`` reaches ``z`` before time ``r`` (``r`` may be inf)."""
    if r < 0 or math.isnan(r):
        raise ValueError("r must be nonnegative")
    if z == 0:
        return 1.0 if r > 0 else 0.0
    if r == 0:
        return 0.0
    frac = -math.expm1(-2.0 * model.lam * r) if math.isfinite(r) else 1.0
    arg = abs(z) * math.sqrt(2.0 * model.lam) / (model.eps * math.sqrt(frac))
    return 2.0 * gaussian_tail(arg)


def conditional_tau0_cdf(model: WallModel1D, t):
    """``P(tau0 <= t | tau0 < inf)`` for the first hitting time of 0.

    Evaluated as a difference of log tails so that it stays accurate when
    both tail probabilities underflow.
    """
    a = model.a
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(np.isnan(t_arr)):
        raise ValueError("t must be nonnegative")
    frac = -np.expm1(-2.0 * model.lam * t_arr)
    with np.errstate(divide="ignore"):
        arg = a / np.sqrt(frac)
        out = np.exp(special.log_ndtr(-arg) - special.log_ndtr(-a))
    out = np.where(t_arr == 0, 0.0, np.minimum(out, 1.0))
    return float(out) if out.ndim == 0 else out


def hit_probability_before(model: WallModel1D, t) -> float:
    """Unconditional ``P(tau0 < t)``; same as ``hit_probability(model, |x0|, t)``."""
    return hit_probability(model, abs(model.x0), t)


# --------------------------------------------------------------------------
# Complex log-gamma
# --------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_loggamma(z: complex) -> complex:
    # log Gamma(z) for Re z >= 0.5 via Lanczos (g=7, n=9)
    z = z - 1.0
    acc = _LANCZOS[0]
    for k in range(1, 9):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _LN_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def complex_log_gamma(z) -> complex:
    """Log-gamma on the standard branch (analytic off the nonpositive real axis).

    Lanczos with ``g = 7``; for ``Re z < 0.5`` the argument is shifted up with
    the recurrence ``ln Gamma(z) = ln Gamma(z + n) - sum ln(z + k)``, which keeps
    the branch continuous where the reflection formula would jump by ``2 pi i``.
    """
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise ValueError(f"log-gamma has a pole at {z.real}")
    if z.real >= 0.5:
        return _lanczos_loggamma(z)
    n = int(math.ceil(0.5 - z.real))
    shift = 0j
    for k in range(n):
        shift += cmath.log(z + k)
    return _lanczos_loggamma(z + n) - shift


def duplication_residual(z: complex) -> float:
    """Relative defect of ``Gamma(z) Gamma(z + 1/2) = 2^(1-2z) sqrt(pi) Gamma(2z)``."""
    lhs = complex_log_gamma(z) + complex_log_gamma(z + 0.5)
    rhs = (1.0 - 2.0 * z) * math.log(2.0) + LN_SQRT_PI + complex_log_gamma(2.0 * z)
    return abs(cmath.exp(lhs - rhs) - 1.0)


# --------------------------------------------------------------------------
# Limit laws
# --------------------------------------------------------------------------

GUMBEL = "gumbel"
NEG_LOG_ABS_NORMAL = "neg-log-abs-normal-affine"
SADDLE_MIXTURE = "saddle-mixture"


@dataclass(frozen=True)
class LimitLaw:
    """A limiting law of ``statistic - centering_coefficient * ln(1/eps)``.

    ``gumbel``: ``location + scale * Z``. ``neg-log-abs-normal-affine``:
    ``location - scale * ln|N|``. ``saddle-mixture``: the exit-location
    mixture, described by the extra fields and only available as a sampler.
    """

    kind: str
    location: float = 0.0
    scale: float = 1.0
    centering_coefficient: float = 0.0
    # saddle-mixture only
    mixture_coefficient: float = 0.0
    mixture_power: float = 0.0
    gaussian_scale: float = 0.0
    use_mixture: bool = False
    use_gaussian: bool = False
    xi_sampler: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (GUMBEL, NEG_LOG_ABS_NORMAL, SADDLE_MIXTURE):
            raise ValueError(f"unknown law kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def centering(self, eps: float) -> float:
        return self.centering_coefficient * math.log(1.0 / eps)


def gumbel_law(location: float = 0.0, scale: float = 1.0, centering_coefficient: float = 0.0) -> LimitLaw:
    return LimitLaw(GUMBEL, location, scale, centering_coefficient)


def limit_law_for(theorem: str, model: WallModel1D) -> LimitLaw:
    """Limit of the recentred conditional exit time.

    ``th2``: exit beyond the wall (``q_plus > 0``), ``th3``: exit through the
    characteristic boundary, ``th4``: start at the unstable point.
    """
    lam = model.lam
    if theorem == "th2":
        if not (model.q_plus > 0 and model.x0 < 0):
            raise ValueError("th2 needs q_plus > 0 and x0 < 0")
        loc = math.log(2.0 * lam * model.q_plus * abs(model.x0)) / lam
        return LimitLaw(GUMBEL, loc, 1.0 / lam, 2.0 / lam)
    if theorem == "th3":
        if not model.x0 < 0:
            raise ValueError("th3 needs x0 < 0")
        loc = math.log(model.x0 ** 2 * lam) / (2.0 * lam)
        return LimitLaw(GUMBEL, loc, 1.0 / (2.0 * lam), 1.0 / lam)
    if theorem == "th4":
        if not model.q_plus > 0:
            raise ValueError("th4 needs q_plus > 0")
        shift = math.log(model.q_plus) / lam + math.log(2.0 * lam) / (2.0 * lam)
        return LimitLaw(NEG_LOG_ABS_NORMAL, shift, 1.0 / lam, 1.0 / lam)
    raise ValueError(f"unknown theorem {theorem!r}")


def _require_closed_form(law: LimitLaw):
    if law.kind == SADDLE_MIXTURE:
        raise ValueError("the saddle mixture has no closed form; compare samples instead")


def limit_cdf(law: LimitLaw, x):
    _require_closed_form(law)
    y = (np.asarray(x, dtype=float) - law.location) / law.scale
    with np.errstate(over="ignore"):
        if law.kind == GUMBEL:
            out = np.exp(-np.exp(-y))
        else:
            # P(-ln|N| <= y) = P(|N| >= exp(-y))
            out = 2.0 * special.ndtr(-np.exp(-y))
    return float(out) if out.ndim == 0 else out


def limit_quantile(law: LimitLaw, p):
    _require_closed_form(law)
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0) or np.any(p_arr >= 1):
        raise ValueError("p must lie strictly inside (0, 1)")
    if law.kind == GUMBEL:
        out = law.location - law.scale * np.log(-np.log(p_arr))
    else:
        out = law.location - law.scale * np.log(gaussian_quantile(p_arr / 2.0))
    return float(out) if out.ndim == 0 else out


def _log_abs_normal_moment(p: complex) -> complex:
    # ln E|N|^p = (p/2) ln 2 + ln Gamma((p+1)/2) - ln sqrt(pi)
    return 0.5 * p * math.log(2.0) + complex_log_gamma((p + 1.0) / 2.0) - LN_SQRT_PI


def limit_cf(law: LimitLaw, t: float) -> complex:
    """Characteristic function ``E exp(i t Y)`` of the limit variable."""
    _require_closed_form(law)
    if t == 0:
        return 1.0 + 0j
    if law.kind == GUMBEL:
        # E exp(i t s Z) = Gamma(1 - i t s)
        return cmath.exp(1j * t * law.location + complex_log_gamma(1.0 - 1j * t * law.scale))
    # E exp(-i t s ln|N|) = E|N|^(-i t s)
    return cmath.exp(1j * t * law.location + _log_abs_normal_moment(-1j * t * law.scale))


def convolution_residual(model: WallModel1D, t: float) -> complex:
    """CF of the beyond-the-wall limit minus the product of the two-stage limits.

    Reaching ``q_plus`` means first reaching 0 and then running from 0 to
    ``q_plus``; the centerings ``2/lam`` and ``1/lam + 1/lam`` agree, so the
    difference should vanish for every ``t``.
    """
    th2 = limit_law_for("th2", model)
    th3 = limit_law_for("th3", model)
    th4 = limit_law_for("th4", model)
    return limit_cf(th2, t) - limit_cf(th3, t) * limit_cf(th4, t)


def th3_sup_distance(model: WallModel1D, n_grid: int = 10_000, width: float = 12.0) -> float:
    """Sup distance between the recentred exact ``tau0 | D`` law and its Gumbel limit.

    The grid is ``n_grid`` equispaced points covering ``location +- width``
    scale units of the limit law.
    """
    law = limit_law_for("th3", model)
    r = np.linspace(law.location - width * law.scale, law.location + 2 * width * law.scale, n_grid)
    t = r + law.centering(model.eps)
    exact = np.where(t > 0, conditional_tau0_cdf(model, np.maximum(t, 0.0)), 0.0)
    return float(np.max(np.abs(exact - limit_cdf(law, r))))


__all__ = [
    "gaussian_tail", "log_gaussian_tail", "gaussian_quantile", "gaussian_quantile_log",
    "hit_probability", "conditional_tau0_cdf", "LimitLaw", "gumbel_law", "limit_law_for",
    "limit_cdf", "limit_quantile", "limit_cf", "complex_log_gamma", "duplication_residual",
    "convolution_residual", "th3_sup_distance", "time_change",
]
