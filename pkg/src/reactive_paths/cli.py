"""``reactive-paths`` command-line driver.

    reactive-paths <experiment> [--config FILE] [--seed U64] [--samples N]
                   [--eps LIST] [--workers N] [--out DIR] [--check]

Writes ``results.csv``, ``manifest.txt`` and one SVG per plot into ``--out``.
Exit status: 0 success, 1 config error, 2 rejection budget exceeded,
3 a check failed (only with ``--check``).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (EXPERIMENTS, ConfigError, ExperimentConfig, ExperimentResult,
                          make_config, run)
from .svg import emit_cdf_svg, emit_qq_svg

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_CHECK = 0, 1, 2, 3

SCHEMA = "#schema=1"
COLUMNS = ("experiment", "eps", "n", "metric", "statistic", "threshold", "pass", "attempts", "runtime")

_ALIASES = {"eps": "eps_list", "out": "out_dir"}


# ---------------------------------------------------------------- config files

def _field_types() -> dict[str, type]:
    types = {}
    for f in fields(ExperimentConfig):
        default = f.default
        types[f.name] = tuple if f.name == "eps_list" else type(default)
    return types


def parse_eps(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"cannot parse eps list {text!r}") from None


def _convert(key: str, raw: str, kind: type):
    if kind is tuple:
        return parse_eps(raw)
    if kind is int:
        try:
            return int(float(raw)) if "e" in raw.lower() else int(raw, 0)
        except ValueError:
            raise ConfigError(f"{key} expects an integer, got {raw!r}") from None
    if kind is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key} expects a number, got {raw!r}") from None
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Errors name the line."""
    types = _field_types()
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in types:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if not raw:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        try:
            out[key] = _convert(key, raw, types[key])
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return out


# ---------------------------------------------------------------- output

def _num(x) -> str:
    if x is None:
        return "na"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def results_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in result.rows:
        writer.writerow([r.experiment, _num(r.eps), _num(int(r.n)), r.metric, _num(r.statistic),
                         _num(r.threshold), _num(r.passed), _num(int(r.attempts)), _num(int(r.runtime))])
    return buf.getvalue()


def config_text(cfg: ExperimentConfig) -> str:
    lines = []
    for key, value in cfg.items():
        if key == "eps_list":
            value = ",".join(_num(e) for e in value)
        elif isinstance(value, float):
            value = _num(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def content_hash(text: str) -> str:
    """Git blob hash of ``text``."""
    data = text.encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def write_outputs(result: ExperimentResult, out_dir: Path, wall_seconds: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.csv").write_text(results_csv(result), encoding="utf-8", newline="\n")
    for plot in result.plots:
        path = out_dir / plot.filename
        if plot.kind == "qq":
            emit_qq_svg(plot.sample, plot.law, path, plot.title, reference=plot.reference)
        else:
            emit_cdf_svg(plot.curves, path, plot.title, plot.xlabel)
    cfg_text = config_text(result.config)
    checks = "".join(f"check {'pass' if ok else 'FAIL'}: {name}\n" for name, ok in result.checks.items())
    manifest = (f"reactive-paths {__version__}\n"
                f"experiment = {result.config.experiment}\n"
                f"seed = {result.config.seed}\n"
                f"inputs hash = {content_hash(cfg_text)}\n"
                f"wall clock seconds = {wall_seconds:.3f}\n"
                f"budget exceeded = {str(result.budget_exceeded).lower()}\n"
                f"\n[config]\n{cfg_text}\n[checks]\n{checks}")
    (out_dir / "manifest.txt").write_text(manifest, encoding="utf-8", newline="\n")


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are config errors, not the budget code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="reactive-paths", description="Run a seeded convergence experiment.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="key = value file")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--eps", help="comma-separated, strictly decreasing")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--check", action="store_true", help="exit with status 3 if a check fails")
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    params: dict = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        params = parse_config_text(text, str(args.config))
        named = params.pop("experiment", args.experiment)
        if named != args.experiment:
            raise ConfigError(f"{args.config}: config is for {named!r}, not {args.experiment!r}")
    for key, value in (("seed", args.seed), ("samples", args.samples), ("workers", args.workers),
                       ("out_dir", args.out)):
        if value is not None:
            params[key] = value
    if args.eps is not None:
        params["eps_list"] = parse_eps(args.eps)
    return make_config(args.experiment, **params)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"reactive-paths: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        result = run(cfg)
    except ValueError as exc:  # model validation, e.g. q_minus >= x0
        print(f"reactive-paths: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_outputs(result, Path(cfg.out_dir), time.perf_counter() - start)
    for name, ok in result.checks.items():
        print(f"{'pass' if ok else 'FAIL'}  {name}")
    if result.budget_exceeded:
        print("reactive-paths: rejection budget exceeded; partial results written", file=sys.stderr)
        return EXIT_BUDGET
    if args.check and not result.ok:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
