"""Empirical distribution tools: ECDF, Kolmogorov-Smirnov distances, DKW bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# asymptotic two-sample KS critical constant c(alpha) at alpha = 0.01
KS_C_1PCT = 1.628


@dataclass(frozen=True)
class EmpiricalSample:
    values: np.ndarray  # sorted ascending

    @classmethod
    def of(cls, values) -> "EmpiricalSample":
        arr = np.sort(np.asarray(values, dtype=float).ravel())
        if np.any(np.isnan(arr)):
            raise ValueError("sample contains NaN")
        return cls(arr)

    @property
    def n(self) -> int:
        return len(self.values)

    def ecdf(self, x):
        """Right-continuous ECDF ``#{v <= x} / n``."""
        out = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, p):
        return np.quantile(self.values, p)


def _as_sample(s) -> EmpiricalSample:
    return s if isinstance(s, EmpiricalSample) else EmpiricalSample.of(s)


def ks_one_sample(sample, cdf: Callable) -> float:
    """``sup_x |F_n(x) - F(x)|`` evaluated at the jump points of the ECDF."""
    s = _as_sample(sample)
    if s.n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(s.values), dtype=float)
    i = np.arange(1, s.n + 1)
    return float(max(np.max(np.abs(i / s.n - f)), np.max(np.abs((i - 1) / s.n - f))))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample KS statistic and its 1%-level critical value."""
    sa, sb = _as_sample(a), _as_sample(b)
    if sa.n == 0 or sb.n == 0:
        raise ValueError("empty sample")
    grid = np.concatenate([sa.values, sb.values])
    stat = float(np.max(np.abs(sa.ecdf(grid) - sb.ecdf(grid))))
    threshold = KS_C_1PCT * math.sqrt((sa.n + sb.n) / (sa.n * sb.n))
    return stat, threshold


def dkw_bound(n: int, alpha: float = 0.01) -> float:
    """Half-width ``sqrt(ln(2/alpha) / (2n))`` of the DKW confidence band."""
    if n < 1 or not (0 < alpha < 1):
        raise ValueError("need n >= 1 and 0 < alpha < 1")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def mean_ci(x, z: float = 2.5758293035489004) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), z * float(x.std(ddof=1)) / math.sqrt(len(x))


def median_ci(x, z: float = 2.5758293035489004) -> tuple[float, float, float]:
    """Sample median with a distribution-free order-statistic interval."""
    v = np.sort(np.asarray(x, dtype=float))
    n = len(v)
    half = z * math.sqrt(n) / 2.0
    lo = max(0, int(math.floor(n / 2 - half)) - 1)
    hi = min(n - 1, int(math.ceil(n / 2 + half)))
    return float(np.median(v)), float(v[lo]), float(v[hi])
