"""Problem instances for the linear one-dimensional wall-crossing model.

The process is ``dX = lam * X dt + eps dW`` started at ``x0 < 0`` and
stopped on leaving ``(q_minus, q_plus)``.  Its explicit solution is
``X(t) = exp(lam t) (x0 + eps U(t))`` where ``U(t) = B(s(t))`` for a standard
Brownian motion ``B`` run on the compact clock ``s(t) = (1 - exp(-2 lam t)) / (2 lam)``.
Everything downstream is built on that representation.

Times that never occur are represented by ``math.inf``; the Brownian clock
maps ``t = inf`` to the finite terminal time ``1 / (2 lam)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEVER = math.inf


@dataclass(frozen=True)
class WallModel1D:
    """Linear drift ``lam * x`` with additive noise of size ``eps``.

    ``q_plus == 0`` is the characteristic-boundary case (exit through the
    unstable point itself); ``q_plus > 0`` puts the exit point beyond the wall.
    ``x0 == 0`` is allowed so that exits started at the unstable point can be
    simulated.
    """

    lam: float
    eps: float
    x0: float
    q_minus: float = -1.0
    q_plus: float = 0.5

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not (self.q_minus < self.x0 <= 0 <= self.q_plus):
            raise ValueError(
                "need q_minus < x0 <= 0 <= q_plus, got "
                f"q_minus={self.q_minus}, x0={self.x0}, q_plus={self.q_plus}"
            )
        if self.x0 == 0 and self.q_plus == 0:
            raise ValueError("x0 = 0 already sits on the exit point q_plus = 0")

    @property
    def a(self) -> float:
        """Tail threshold ``|x0| sqrt(2 lam) / eps`` of the rare event."""
        return abs(self.x0) * math.sqrt(2.0 * self.lam) / self.eps

    @property
    def zero_level(self) -> float:
        """Level ``|x0| / eps`` that ``U`` must reach for ``X`` to hit 0."""
        return abs(self.x0) / self.eps

    @property
    def s_max(self) -> float:
        return 1.0 / (2.0 * self.lam)

    def with_eps(self, eps: float) -> "WallModel1D":
        return WallModel1D(self.lam, eps, self.x0, self.q_minus, self.q_plus)


@dataclass(frozen=True)
class BrownianClock:
    """Deterministic time change ``t -> s(t)`` for a given expansion rate."""

    lam: float

    @property
    def s_max(self) -> float:
        return 1.0 / (2.0 * self.lam)

    def s(self, t):
        return time_change(self.lam, t)

    def t(self, s):
        return inverse_time_change(self.lam, s)


@dataclass(frozen=True)
class PathOutcome:
    """Everything recorded about one trajectory.

    Event flags follow the usual notation: ``C`` exit through ``q_plus``,
    ``D`` the path ever reaches 0, ``E`` it ever reaches ``q_plus`` (exit or
    not), ``F`` it ends on the positive side, ``x0 + eps U(inf) > 0``.
    """

    exit_time: float
    exit_side: str  # 'left', 'right' or 'none'
    tau0: float
    theta: float
    u_at_theta: float
    u_infinity: float
    C: bool
    D: bool
    E: bool
    F: bool


def drift_1d(model: WallModel1D, x):
    return model.lam * x


def _lam_of(model_or_lam) -> float:
    if isinstance(model_or_lam, (WallModel1D, BrownianClock)):
        return model_or_lam.lam
    return float(model_or_lam)


def time_change(model, t):
    """Brownian-clock time ``(1 - exp(-2 lam t)) / (2 lam)``; ``inf`` maps to ``1/(2 lam)``.

    Accepts a model, a clock, or a bare ``lam``; ``t`` may be scalar or array.
    """
    lam = _lam_of(model)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(np.isnan(t_arr)):
        raise ValueError("time must be nonnegative")
    s = -np.expm1(-2.0 * lam * t_arr) / (2.0 * lam)
    return float(s) if s.ndim == 0 else s


def inverse_time_change(model, s):
    """Inverse ``t(s) = -ln(1 - 2 lam s) / (2 lam)`` on ``[0, 1/(2 lam)]``."""
    lam = _lam_of(model)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(s_arr > 1.0 / (2.0 * lam)):
        raise ValueError("clock time must lie in [0, 1/(2 lam)]")
    with np.errstate(divide="ignore"):
        t = -np.log1p(-2.0 * lam * s_arr) / (2.0 * lam)
    return float(t) if t.ndim == 0 else t


def path_position(model: WallModel1D, u, t):
    """Solution ``exp(lam t) (x0 + eps u)`` given the Brownian value ``u = U(t)``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be nonnegative")
    x = np.exp(model.lam * t_arr) * (model.x0 + model.eps * np.asarray(u, dtype=float))
    return float(x) if x.ndim == 0 else x
