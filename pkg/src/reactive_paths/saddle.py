"""Exit location from a neighbourhood of a linear saddle, conditioned on crossing the wall.

The system is ``dX1 = lam X1 dt + eps dW1``, ``dX2 = -mu X2 dt + eps dW2``
with ``X1(0) = x1 < 0`` and ``X2(0) = eps^alpha xi``.  The coordinates are
independent and the conditioning only involves ``X1``, so ``tau`` comes from
the one-dimensional conditioned sampler and, given ``tau``,

    X2(tau) = exp(-mu tau) eps^alpha xi + eps sqrt((1 - exp(-2 mu tau)) / (2 mu)) N

exactly in distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .analytic import SADDLE_MIXTURE, LimitLaw
from .model import WallModel1D
from .pathsim import GridSpec, htransform_exit_times, rejection_exit_times
from .rng import make_rng
from .samplers import resolve_xi
from .stats import EmpiricalSample

GAUSSIAN_ONLY = "gaussian-only"
MIXTURE_ONLY = "mixture-only"
INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class SaddleModel2D:
    lam: float
    mu: float
    eps: float
    x1: float
    alpha: float = 0.0
    xi: Union[str, Callable] = field(default="gaussian", compare=False)
    q_minus: float = -1.0
    q_plus: float = 0.5

    def __post_init__(self):
        if not (self.lam > 0 and self.mu > 0 and self.eps > 0):
            raise ValueError("lam, mu and eps must be positive")
        if not (self.q_minus < self.x1 < 0 < self.q_plus):
            raise ValueError("need q_minus < x1 < 0 < q_plus")
        resolve_xi(self.xi)

    @property
    def exponent(self) -> float:
        return 2.0 * self.mu / self.lam + self.alpha

    @property
    def beta(self) -> float:
        return min(1.0, self.exponent)

    @property
    def regime(self) -> str:
        return beta_exponent(self)[1]

    @property
    def unstable(self) -> WallModel1D:
        return WallModel1D(self.lam, self.eps, self.x1, self.q_minus, self.q_plus)

    def with_eps(self, eps: float) -> "SaddleModel2D":
        return SaddleModel2D(self.lam, self.mu, eps, self.x1, self.alpha, self.xi,
                             self.q_minus, self.q_plus)


def beta_exponent(params: SaddleModel2D, tol: float = 1e-12) -> tuple[float, str]:
    """``beta = min(1, 2 mu/lam + alpha)`` and which limit terms survive."""
    k = params.exponent
    if abs(k - 1.0) <= tol:
        return 1.0, INTERMEDIATE
    return (1.0, GAUSSIAN_ONLY) if k > 1.0 else (k, MIXTURE_ONLY)


def saddle_limit_law(params: SaddleModel2D) -> LimitLaw:
    """Limit of ``X2(tau) / eps^beta`` given the exit through ``q_plus``."""
    _, regime = beta_exponent(params)
    rho = params.mu / params.lam
    return LimitLaw(
        SADDLE_MIXTURE,
        mixture_coefficient=(2.0 * params.lam * params.q_plus * abs(params.x1)) ** (-rho),
        mixture_power=rho,
        gaussian_scale=1.0 / math.sqrt(2.0 * params.mu),
        use_mixture=regime != GAUSSIAN_ONLY,
        use_gaussian=regime != MIXTURE_ONLY,
        xi_sampler=resolve_xi(params.xi),
    )


def x2_at_exit(params: SaddleModel2D, tau, xi, normal):
    """Second coordinate at the exit time as a deterministic function of ``(tau, xi, N)``."""
    tau = np.asarray(tau, dtype=float)
    mu, eps = params.mu, params.eps
    start = np.exp(-mu * tau) * eps ** params.alpha * np.asarray(xi, dtype=float)
    noise = eps * np.sqrt(-np.expm1(-2.0 * mu * tau) / (2.0 * mu)) * np.asarray(normal, dtype=float)
    return start + noise


def conditioned_exit_times(params: SaddleModel2D, n: int, seed: int, method: str = "htransform",
                           workers: int = 1, dt: float | None = None, grid: GridSpec | None = None):
    model = params.unstable
    if method == "htransform":
        step = dt if dt is not None else 1e-3 / params.lam
        return htransform_exit_times(model, step, n, seed, workers, key=(5,))
    if method == "rejection":
        return rejection_exit_times(model, grid or GridSpec(int(1000 * params.lam)), n, seed,
                                    workers, key=(5,))
    raise ValueError(f"unknown method {method!r}")


def sample_saddle_exit_conditioned(params: SaddleModel2D, rng: np.random.Generator,
                                   method: str = "htransform", size: int | None = None,
                                   seed: int | None = None, workers: int = 1):
    """``(tau, x2_exit)`` pairs drawn from the law conditioned on exiting through ``q_plus``.

    ``tau`` comes from the one-dimensional sampler seeded from ``rng`` (or
    ``seed``); ``xi`` and ``N`` are drawn from ``rng`` independently of it.
    """
    n = 1 if size is None else size
    if seed is None:
        seed = int(rng.integers(2**63))
    taus = conditioned_exit_times(params, n, seed, method, workers).taus
    xi = resolve_xi(params.xi)(rng, n)
    normal = rng.standard_normal(n)
    x2 = x2_at_exit(params, taus, xi, normal)
    if size is None:
        return float(taus[0]), float(x2[0])
    return taus, x2


def rescaled_exit_sample(params: SaddleModel2D, seed: int, n: int, method: str = "htransform",
                         workers: int = 1) -> EmpiricalSample:
    """``n`` draws of ``X2(tau) / eps^beta`` given the exit through ``q_plus``."""
    if n < 1000:
        raise ValueError("use at least 10^3 draws")
    _, x2 = sample_saddle_exit_conditioned(params, make_rng(seed, (6,)), method, size=n,
                                           seed=seed, workers=workers)
    return EmpiricalSample.of(x2 / params.eps ** params.beta)


@dataclass(frozen=True)
class CfCheck:
    r_grid: tuple
    estimates: tuple
    ci: tuple
    limits: tuple
    deviation: float
    deviation_ci: float


def conditional_cf_check(params: SaddleModel2D, seed: int, n: int, r_grid=(0.5, 1.0, 2.0, 4.0),
                         method: str = "htransform", workers: int = 1,
                         taus: np.ndarray | None = None) -> CfCheck:
    """Compare ``E[exp(-r^2 (1 - e^{-2 mu tau}) / (4 mu)) | C]`` with ``exp(-r^2 / (4 mu))``.

    The left side is the characteristic function of the noise part of the
    exit location at ``r``; ``deviation`` is its largest gap over ``r_grid``.
    """
    if n < 10_000:
        raise ValueError("use at least 10^4 draws")
    if taus is None:
        taus = conditioned_exit_times(params, n, seed, method, workers).taus
    mu = params.mu
    keep = -np.expm1(-2.0 * mu * taus)
    est, ci, lim = [], [], []
    for r in r_grid:
        vals = np.exp(-r * r * keep / (4.0 * mu))
        est.append(float(vals.mean()))
        ci.append(2.5758293035489004 * float(vals.std(ddof=1)) / math.sqrt(len(vals)) if r else 0.0)
        lim.append(math.exp(-r * r / (4.0 * mu)))
    gaps = [abs(e - l) for e, l in zip(est, lim)]
    j = int(np.argmax(gaps))
    return CfCheck(tuple(r_grid), tuple(est), tuple(ci), tuple(lim), gaps[j], ci[j])
