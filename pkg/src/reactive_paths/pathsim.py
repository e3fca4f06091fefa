"""Trajectory-level simulation on the Brownian clock.

``B`` is simulated exactly at the grid points; crossings of the three
levels (0, ``q_plus`` and ``q_minus`` in ``X``-space) inside a cell are
detected with the Brownian-bridge crossing probability, so the "ever"
events ``D`` and ``F`` are decided exactly and the exit/hitting times carry
at most one cell of delay.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .analytic import gaussian_tail, hit_probability
from .model import NEVER, PathOutcome, WallModel1D
from .rng import DEFAULT_CHUNK, chunk_sizes, collect_until, map_chunks

Z99 = 2.5758293035489004


class BudgetExceeded(RuntimeError):
    def __init__(self, attempts: int, accepted: int = 0):
        super().__init__(f"rejection budget exhausted after {attempts} paths ({accepted} accepted)")
        self.attempts = attempts
        self.accepted = accepted


class NoConditioningEvents(ValueError):
    pass


class StepSizeError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Time grid: ``n_steps`` cells per unit of real time ``t``.

    The cells are mapped onto the Brownian clock; after ``horizon`` (or
    earlier, once nothing undecided can still happen) a single cell covers
    the rest of the clock up to ``1/(2 lam)``, so the grid always reaches the
    terminal clock time.  ``horizon=None`` picks one from the model.
    """

    n_steps: int = 1000
    bridge_correction: bool = True
    horizon: Optional[float] = None

    def __post_init__(self):
        if self.n_steps <= 0:
            raise ValueError("n_steps must be positive")

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps

    def horizon_for(self, model: WallModel1D) -> float:
        if self.horizon is not None:
            return self.horizon
        # beyond this the band between the exit levels is < 1e-9 Brownian units
        width = (model.q_plus - model.q_minus) / model.eps
        return max(1.0, math.log(width / 1e-9) / model.lam)


@dataclass
class PathBatch:
    """Per-path arrays; ``exit_side`` is -1 (left), +1 (right) or 0."""

    model: WallModel1D
    exit_time: np.ndarray
    exit_side: np.ndarray
    tau0: np.ndarray
    theta: np.ndarray
    b_tau0: np.ndarray
    b_theta: np.ndarray
    u_inf: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    truncated: np.ndarray
    cells: int

    @property
    def n(self) -> int:
        return len(self.exit_time)

    @property
    def u_theta(self) -> np.ndarray:
        """``U(theta)`` from the hitting relation ``x0 + eps U(theta) = q_plus exp(-lam theta)``."""
        m = self.model
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(np.isfinite(self.theta),
                            (m.q_plus * np.exp(-m.lam * self.theta) - m.x0) / m.eps, np.nan)

    def outcome(self, i: int) -> PathOutcome:
        side = {-1: "left", 1: "right", 0: "none"}[int(self.exit_side[i])]
        return PathOutcome(
            exit_time=float(self.exit_time[i]), exit_side=side, tau0=float(self.tau0[i]),
            theta=float(self.theta[i]), u_at_theta=float(self.u_theta[i]),
            u_infinity=float(self.u_inf[i]), C=bool(self.C[i]), D=bool(self.D[i]),
            E=bool(self.E[i]), F=bool(self.F[i]),
        )

    @classmethod
    def concat(cls, parts: list["PathBatch"]) -> "PathBatch":
        fields = ["exit_time", "exit_side", "tau0", "theta", "b_tau0", "b_theta", "u_inf",
                  "C", "D", "E", "F", "truncated"]
        merged = {f: np.concatenate([getattr(p, f) for p in parts]) for f in fields}
        return cls(model=parts[0].model, cells=sum(p.cells for p in parts), **merged)


def _check_grid(model: WallModel1D, grid: GridSpec):
    step = model.eps * math.sqrt(grid.dt)
    if step > (model.q_plus - model.q_minus) / 20.0:
        warnings.warn(
            f"grid is coarse for eps={model.eps}: per-step noise {step:.3g} exceeds 1/20 of the interval",
            RuntimeWarning, stacklevel=3)


def _simulate_chunk(model: WallModel1D, grid: GridSpec, rng: np.random.Generator, n: int,
                    stop_at_exit: bool = False) -> PathBatch:
    k_max = int(math.ceil(grid.horizon_for(model) / grid.dt))
    exit_time = np.empty(n)
    exit_side = np.empty(n, dtype=np.int8)
    tau0 = np.empty(n)
    theta = np.empty(n)
    b_tau0 = np.empty(n)
    b_theta = np.empty(n)
    u_inf = np.empty(n)
    flags = np.zeros((n, 4), dtype=np.bool_)
    truncated = np.zeros(n, dtype=np.bool_)
    cells = _kernels.paths_chunk(
        rng, n, model.lam, model.eps, model.x0, model.q_minus, model.q_plus, grid.dt, k_max,
        grid.bridge_correction, stop_at_exit, exit_time, exit_side, tau0, theta, b_tau0,
        b_theta, u_inf, flags, truncated)
    return PathBatch(model, exit_time, exit_side, tau0, theta, b_tau0, b_theta, u_inf,
                     flags[:, 0].copy(), flags[:, 1].copy(), flags[:, 2].copy(),
                     flags[:, 3].copy(), truncated, int(cells))


def simulate_path(model: WallModel1D, grid: GridSpec, rng: np.random.Generator) -> PathOutcome:
    _check_grid(model, grid)
    return _simulate_chunk(model, grid, rng, 1).outcome(0)


def simulate_paths(model: WallModel1D, grid: GridSpec, n_paths: int, seed: int,
                   workers: int = 1, key=(), chunk: int = DEFAULT_CHUNK) -> PathBatch:
    """``n_paths`` independent paths, reproducible for any number of workers."""
    _check_grid(model, grid)
    parts = map_chunks(lambda rng, size, _: _simulate_chunk(model, grid, rng, size),
                       seed, chunk_sizes(n_paths, chunk), key=(1, *key), workers=workers)
    return PathBatch.concat(parts)


# ---------------------------------------------------------------- conditioned exits

def sample_exit_conditioned_rejection(model: WallModel1D, grid: GridSpec, rng: np.random.Generator,
                                      max_paths: int = 1_000_000, batch: int = 64):
    """First simulated path that exits through ``q_plus``.

    Returns ``(tau, outcome, attempts)``; raises :class:`BudgetExceeded`.
    """
    _check_grid(model, grid)
    attempts = 0
    while attempts < max_paths:
        size = min(batch, max_paths - attempts)
        paths = _simulate_chunk(model, grid, rng, size)
        hits = np.flatnonzero(paths.C)
        if hits.size:
            i = int(hits[0])
            return float(paths.exit_time[i]), paths.outcome(i), attempts + i + 1
        attempts += size
    raise BudgetExceeded(attempts)


@dataclass
class ConditionedSample:
    """Exit times conditioned on ``C`` plus the accounting of how they were obtained."""

    taus: np.ndarray
    attempts: int
    left_exits: int = 0
    guarded_steps: int = 0
    steps: int = 0
    budget_exceeded: bool = False

    @property
    def acceptance(self) -> float:
        return len(self.taus) / self.attempts if self.attempts else float("nan")


def rejection_exit_times(model: WallModel1D, grid: GridSpec, n: int, seed: int, workers: int = 1,
                         max_paths: int = 50_000_000, chunk: int = DEFAULT_CHUNK, key=(),
                         strict: bool = True) -> ConditionedSample:
    """``n`` draws of ``tau | C`` by plain rejection of simulated paths."""
    _check_grid(model, grid)

    def run(rng, size, _):
        paths = _simulate_chunk(model, grid, rng, size, stop_at_exit=True)
        return paths.exit_time[paths.C], paths.C, paths.cells

    max_chunks = max(1, -(-max_paths // chunk))
    parts = collect_until(run, seed, chunk, lambda res: sum(len(r[0]) for r in res) >= n,
                          key=(2, *key), workers=workers, max_chunks=max_chunks)
    taus, attempts, steps = [], 0, 0
    need = n
    for acc, mask, cells in parts:
        steps += cells
        if len(acc) >= need:
            # attempts up to and including the path giving the n-th acceptance
            attempts += int(np.flatnonzero(mask)[need - 1]) + 1
            taus.append(acc[:need])
            need = 0
            break
        taus.append(acc)
        need -= len(acc)
        attempts += len(mask)
    out = ConditionedSample(np.concatenate(taus) if taus else np.empty(0), attempts, steps=steps,
                            budget_exceeded=need > 0)
    if need > 0 and strict:
        raise BudgetExceeded(attempts, len(out.taus))
    return out


def exit_right_probability(model: WallModel1D, x):
    """``h(x) = P_x(exit through q_plus)`` from the scale function."""
    from scipy import special
    r = math.sqrt(model.lam) / model.eps
    num = special.erf(r * np.asarray(x, dtype=float)) - special.erf(r * model.q_minus)
    den = special.erf(r * model.q_plus) - special.erf(r * model.q_minus)
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def doob_conditioned_drift(model: WallModel1D, x: float) -> float:
    """Drift ``lam x + eps^2 h'(x)/h(x)`` of the diffusion conditioned to exit at ``q_plus``."""
    if not (model.q_minus < x < model.q_plus):
        raise ValueError(f"x={x} outside ({model.q_minus}, {model.q_plus})")
    if not model.q_plus > 0:
        raise ValueError("the h-transform sampler needs q_plus > 0")
    return model.lam * x + model.eps ** 2 * _kernels.doob_ratio(x, model.lam, model.eps, model.q_minus)


GUARD = 1e-9


def _htransform_chunk(model: WallModel1D, dt: float, rng, size: int, max_time: float):
    taus = np.empty(size)
    max_steps = int(math.ceil(max_time / dt))
    left, stalled, guarded, total = _kernels.htransform_chunk(
        rng, size, model.lam, model.eps, model.x0, model.q_minus, model.q_plus, dt, max_steps,
        GUARD, taus)
    return taus, int(left), int(stalled), int(guarded), int(total)


def _max_time(model: WallModel1D) -> float:
    return 50.0 / model.lam + 4.0 * math.log(1.0 / model.eps) / model.lam


def sample_exit_conditioned_htransform(model: WallModel1D, dt: float, rng: np.random.Generator) -> float:
    if not model.q_plus > 0:
        raise ValueError("the h-transform sampler needs q_plus > 0")
    taus, *_ = _htransform_chunk(model, dt, rng, 1, _max_time(model))
    return float(taus[0])


def htransform_exit_times(model: WallModel1D, dt: float, n: int, seed: int, workers: int = 1,
                          chunk: int = 512, key=(), max_left_fraction: float = 0.01) -> ConditionedSample:
    """``n`` draws of ``tau | C`` from Euler-Maruyama on the h-transformed SDE.

    Left exits can only come from discretisation; they are discarded and
    counted, and more than ``max_left_fraction`` of them raises
    :class:`StepSizeError`.
    """
    if not model.q_plus > 0:
        raise ValueError("the h-transform sampler needs q_plus > 0")
    max_time = _max_time(model)
    parts = map_chunks(lambda rng, size, _: _htransform_chunk(model, dt, rng, size, max_time),
                       seed, chunk_sizes(n, chunk), key=(3, *key), workers=workers)
    taus = np.concatenate([p[0] for p in parts])
    left = sum(p[1] for p in parts)
    stalled = sum(p[2] for p in parts)
    guarded = sum(p[3] for p in parts)
    steps = sum(p[4] for p in parts)
    out = ConditionedSample(taus, n + left + stalled, left, guarded, steps)
    if left / out.attempts > max_left_fraction:
        raise StepSizeError(f"{left} of {out.attempts} h-transform paths left through q_minus; reduce dt")
    return out


# ---------------------------------------------------------------- event statistics

@dataclass(frozen=True)
class EquivalenceEstimate:
    pair: tuple[str, str]
    n_paths: int
    ratio: float
    ci_halfwidth: float
    count_a: int
    count_sym_diff: int


def equivalence_ratio(paths: PathBatch, pair: tuple[str, str]) -> EquivalenceEstimate:
    a_name, b_name = pair
    a = getattr(paths, a_name)
    b = getattr(paths, b_name)
    n_a = int(a.sum())
    if n_a == 0:
        raise NoConditioningEvents(f"no paths in event {a_name} among {paths.n}")
    n_diff = int((a ^ b).sum())
    # ratio of means: delta-method variance of sum(1_{A^B}) / sum(1_A)
    n = paths.n
    ratio = n_diff / n_a
    resid = (a ^ b).astype(float) - ratio * a.astype(float)
    se = math.sqrt(resid.var() * n) / n_a
    # with no symmetric-difference paths the normal interval collapses; use the
    # exact one-sided 99% Poisson bound -ln(0.01) / #A instead
    half = Z99 * se if n_diff else -math.log(0.01) / n_a
    return EquivalenceEstimate((a_name, b_name), n, ratio, half, n_a, n_diff)


def estimate_equivalence_ratio(model: WallModel1D, grid: GridSpec, seed: int, n_paths: int,
                               pair: tuple[str, str], workers: int = 1) -> EquivalenceEstimate:
    """Estimate ``P(A sym-diff B) / P(A)`` for an event pair such as ``("E", "F")``."""
    if n_paths < 10_000:
        raise ValueError("use at least 10^4 paths")
    return equivalence_ratio(simulate_paths(model, grid, n_paths, seed, workers), pair)


def _ratio_ci(y: np.ndarray, x: np.ndarray) -> tuple[float, float]:
    """Ratio of sample means ``sum(y)/sum(x)`` and its 99% delta-method half-width."""
    sx = x.sum()
    if sx == 0:
        raise NoConditioningEvents("empty conditioning event")
    r = y.sum() / sx
    n = len(x)
    se = math.sqrt(np.var(y - r * x) * n) / sx
    return float(r), Z99 * se


@dataclass(frozen=True)
class IsometryCheck:
    """Monte Carlo check of the second-moment identity after a stopping time.

    ``lhs``/``rhs``: ``E[Delta^2 1_D]`` with ``Delta = e^{lam tau0} eps (U(inf) - U(tau0))``
    against ``eps^2 P(D) / (2 lam)``; ``ratio = lhs / rhs`` with 99% half-width
    ``ratio_ci``.  The ``*_theta`` fields repeat this with the hitting time of
    ``q_plus``, which is finite on ``E`` only, so the matching right side is
    ``eps^2 P(E) / (2 lam)``.  ``d_over_f`` compares ``P(D)`` with ``2 P(F)``.
    """

    lhs: float
    rhs: float
    ci: float
    ratio: float
    ratio_ci: float
    lhs_theta: float
    rhs_theta: float
    ratio_theta: float
    ratio_theta_ci: float
    p_d: float
    p_e: float
    p_f: float
    d_over_f: float
    d_over_f_ci: float
    n_paths: int


def check_ito_isometry_identity(model: WallModel1D, grid: GridSpec, seed: int, n_paths: int,
                                workers: int = 1, paths: PathBatch | None = None) -> IsometryCheck:
    if n_paths < 10_000:
        raise ValueError("use at least 10^4 paths")
    if paths is None:
        paths = simulate_paths(model, grid, n_paths, seed, workers)
    lam, eps = model.lam, model.eps
    unit = eps * eps / (2.0 * lam)
    with np.errstate(over="ignore", invalid="ignore"):
        delta0 = np.where(paths.D, np.exp(lam * paths.tau0) * eps * (paths.u_inf - paths.b_tau0), 0.0)
        delta_th = np.where(paths.E, np.exp(lam * paths.theta) * eps * (paths.u_inf - paths.b_theta), 0.0)
    d = paths.D.astype(float)
    e = paths.E.astype(float)
    f = paths.F.astype(float)
    n = paths.n
    y0 = delta0 ** 2
    ratio, ratio_ci = _ratio_ci(y0 / unit, d)
    ratio_th, ratio_th_ci = _ratio_ci(delta_th ** 2 / unit, e)
    dof, dof_ci = _ratio_ci(d, f)
    lhs = float(y0.mean())
    return IsometryCheck(
        lhs=lhs, rhs=unit * d.mean(), ci=Z99 * float(y0.std()) / math.sqrt(n),
        ratio=ratio, ratio_ci=ratio_ci,
        lhs_theta=float((delta_th ** 2).mean()), rhs_theta=unit * e.mean(),
        ratio_theta=ratio_th, ratio_theta_ci=ratio_th_ci,
        p_d=float(d.mean()), p_e=float(e.mean()), p_f=float(f.mean()),
        d_over_f=dof, d_over_f_ci=dof_ci, n_paths=n)


def q_statistic(outcome: PathOutcome, model: WallModel1D) -> float:
    """``(1/lam) ln[(x0 + eps U(inf)) / (x0 + eps U(theta))]`` on a path with ``F``."""
    if not math.isfinite(outcome.theta):
        raise ValueError("q statistic needs a finite hitting time of q_plus")
    num = model.x0 + model.eps * outcome.u_infinity
    den = model.x0 + model.eps * outcome.u_at_theta
    return math.log(num / den) / model.lam


def q_statistics(paths: PathBatch) -> np.ndarray:
    """Vectorised :func:`q_statistic` over the ``F`` paths of a batch."""
    m = paths.model
    sel = paths.F & np.isfinite(paths.theta)
    num = m.x0 + m.eps * paths.u_inf[sel]
    den = m.q_plus * np.exp(-m.lam * paths.theta[sel])
    return np.log(num / den) / m.lam


def empirical_hit_probability(paths: PathBatch, r: float) -> tuple[float, float]:
    """Fraction of paths with ``tau0 < r`` and its binomial standard error."""
    # tau0 is the right end of the detecting cell, so hits on [0, r) have tau0 <= r
    hits = paths.tau0 <= r * (1 + 1e-9) if math.isfinite(r) else paths.D
    p = float(hits.mean())
    return p, math.sqrt(p * (1 - p) / paths.n)


__all__ = [
    "GridSpec", "PathBatch", "BudgetExceeded", "NoConditioningEvents", "StepSizeError",
    "simulate_path", "simulate_paths", "sample_exit_conditioned_rejection", "rejection_exit_times",
    "ConditionedSample", "exit_right_probability", "doob_conditioned_drift",
    "sample_exit_conditioned_htransform", "htransform_exit_times", "EquivalenceEstimate",
    "equivalence_ratio", "estimate_equivalence_ratio", "IsometryCheck",
    "check_ito_isometry_identity", "q_statistic", "q_statistics", "empirical_hit_probability",
    "NEVER", "gaussian_tail", "hit_probability",
]
