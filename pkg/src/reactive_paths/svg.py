"""Standalone SVG diagnostics written as plain markup: QQ plots and CDF overlays."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .analytic import SADDLE_MIXTURE, LimitLaw, limit_quantile
from .stats import EmpiricalSample

WIDTH, HEIGHT, PAD = 480, 400, 48


def _fmt(x: float) -> str:
    return f"{x:.6g}"


class _Frame:
    """Maps data coordinates onto the plotting rectangle."""

    def __init__(self, xs: np.ndarray, ys: np.ndarray):
        self.x0, self.x1 = self._range(xs)
        self.y0, self.y1 = self._range(ys)

    @staticmethod
    def _range(v: np.ndarray) -> tuple[float, float]:
        v = v[np.isfinite(v)]
        if v.size == 0:
            return 0.0, 1.0
        lo, hi = float(v.min()), float(v.max())
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.03 * (hi - lo)
        return lo - pad, hi + pad

    def px(self, x):
        return PAD + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * PAD)

    def py(self, y):
        return HEIGHT - PAD - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * PAD)


def _document(frame: _Frame, title: str, xlabel: str, ylabel: str, body: list[str]) -> str:
    left, right, top, bottom = PAD, WIDTH - PAD, PAD, HEIGHT - PAD
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
        'fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>',
        f'<text x="{left}" y="{bottom + 14}" text-anchor="start">{_fmt(frame.x0)}</text>',
        f'<text x="{right}" y="{bottom + 14}" text-anchor="end">{_fmt(frame.x1)}</text>',
        f'<text x="{left - 4}" y="{bottom}" text-anchor="end">{_fmt(frame.y0)}</text>',
        f'<text x="{left - 4}" y="{top + 8}" text-anchor="end">{_fmt(frame.y1)}</text>',
    ]
    return "\n".join(parts + body + ["</svg>", ""])


def _polyline(frame: _Frame, x, y, colour: str, dash: bool = False) -> str:
    pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(frame.px(x), frame.py(y)))
    style = ' stroke-dasharray="5,3"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"{style}/>'


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def qq_points(sample: EmpiricalSample, law: LimitLaw | None = None,
              reference: Sequence[float] | None = None, max_points: int = 400):
    """Sample quantiles against law quantiles at levels ``(i - 0.5) / n``.

    Long samples are thinned to ``max_points`` evenly spaced order statistics.
    The saddle mixture has no quantile function, so it needs ``reference``.
    """
    n = sample.n
    idx = np.unique(np.linspace(0, n - 1, min(n, max_points)).round().astype(int))
    levels = (idx + 0.5) / n
    if law is not None and law.kind != SADDLE_MIXTURE:
        theo = limit_quantile(law, levels)
    elif reference is not None:
        theo = np.quantile(np.asarray(reference, dtype=float), levels)
    else:
        raise ValueError("this law has no quantile function; pass a reference sample")
    return np.atleast_1d(theo), sample.values[idx]


def emit_qq_svg(sample: EmpiricalSample, law: LimitLaw | None, path, title: str = "QQ plot",
                reference: Sequence[float] | None = None) -> int:
    """Write a QQ plot with the identity line; returns 0 on success."""
    theo, emp = qq_points(sample, law, reference)
    both = np.concatenate([theo, emp])
    frame = _Frame(both, both)
    lo, hi = max(frame.x0, frame.y0), min(frame.x1, frame.y1)
    body = [_polyline(frame, [lo, hi], [lo, hi], "grey", dash=True)]
    body += [f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2" fill="steelblue"/>'
             for cx, cy in zip(frame.px(theo), frame.py(emp))]
    _write(path, _document(frame, title, "limit-law quantile", "sample quantile", body))
    return 0


def emit_cdf_svg(curves: dict[str, tuple[np.ndarray, np.ndarray]], path, title: str = "CDF overlay",
                 xlabel: str = "x") -> int:
    """Overlay several ``name -> (x, F(x))`` curves on one set of axes."""
    colours = ["steelblue", "firebrick", "darkgreen", "darkorange"]
    xs = np.concatenate([np.asarray(c[0], dtype=float) for c in curves.values()])
    frame = _Frame(xs, np.array([0.0, 1.0]))
    body = []
    for k, (name, (x, y)) in enumerate(curves.items()):
        colour = colours[k % len(colours)]
        body.append(_polyline(frame, x, y, colour, dash=k > 0))
        body.append(f'<text x="{PAD + 8}" y="{PAD + 16 + 14 * k}" fill="{colour}">{escape(name)}</text>')
    _write(path, _document(frame, title, xlabel, "CDF", body))
    return 0


def ecdf_curve(sample: EmpiricalSample, max_points: int = 400):
    idx = np.unique(np.linspace(0, sample.n - 1, min(sample.n, max_points)).round().astype(int))
    return sample.values[idx], (idx + 1) / sample.n
