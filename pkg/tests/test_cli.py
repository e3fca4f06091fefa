import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from reactive_paths.analytic import gumbel_law, limit_cdf
from reactive_paths.cli import (COLUMNS, EXIT_BUDGET, EXIT_CHECK, EXIT_CONFIG, EXIT_OK,
                                content_hash, main, parse_config_text)
from reactive_paths.experiments import ConfigError, make_config
from reactive_paths.rng import make_rng
from reactive_paths.samplers import sample_limit
from reactive_paths.stats import EmpiricalSample, dkw_bound
from reactive_paths.svg import emit_cdf_svg, emit_qq_svg, qq_points


def read_rows(path):
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == "#schema=1"
    assert lines[1] == ",".join(COLUMNS)
    return [line.split(",") for line in lines[2:] if line]


# ---------------------------------------------------------------- config

def test_config_parsing_and_aliases():
    cfg = parse_config_text("# comment\nexperiment = th2-convergence\neps = 0.5, 0.3\n"
                            "samples = 2e4\nseed=7  # trailing\nlam = 2\nxi = one\n")
    assert cfg == dict(experiment="th2-convergence", eps_list=(0.5, 0.3), samples=20000, seed=7,
                       lam=2.0, xi="one")


@pytest.mark.parametrize("text, line", [
    ("samples = 10\nbogus = 1\n", 2),
    ("\n\nsamples = ten\n", 3),
    ("lam 2\n", 1),
    ("seed =\n", 1),
])
def test_config_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError, match=f":{line}:"):
        parse_config_text(text, "cfg.txt")


@pytest.mark.parametrize("overrides", [
    dict(eps_list=(0.2, 0.3)),
    dict(eps_list=()),
    dict(samples=10),
    dict(workers=0),
    dict(seed=2**64),
    dict(xi="cauchy"),
    dict(colour="red"),
])
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        make_config("th2-convergence", **overrides)


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("samples = 5000\nfoo = 1\n")
    assert main(["th3-convergence", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "bad.txt:2:" in capsys.readouterr().err
    assert main(["th3-convergence", "--eps", "0.1,0.2", "--out", str(tmp_path)]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as info:
        main(["no-such-experiment"])
    assert info.value.code == EXIT_CONFIG


def test_model_error_is_a_config_error(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("x0 = -3\n")
    assert main(["th3-convergence", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


# ---------------------------------------------------------------- outputs

def test_th3_run_writes_decreasing_sup_distance(tmp_path):
    out = tmp_path / "th3"
    assert main(["th3-convergence", "--out", str(out), "--check"]) == EXIT_OK
    rows = read_rows(out / "results.csv")
    assert len(rows) == 4 and all(r[3] == "sup_dist" for r in rows)
    dists = [float(r[4]) for r in rows]
    assert dists == sorted(dists, reverse=True)
    assert rows[0][1] == "0.40000000000000002"  # 17 significant digits
    assert len(list(out.glob("*.svg"))) == 4
    manifest = (out / "manifest.txt").read_text()
    assert "seed = 2024" in manifest and "inputs hash = " in manifest and "wall clock" in manifest


def test_failed_check_exit_code(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("ks_threshold = 1e-6\n")
    assert main(["th3-convergence", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert main(["th3-convergence", "--config", str(cfg), "--out", str(tmp_path), "--check"]) == EXIT_CHECK


def test_budget_exceeded_exit_code(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("eps = 0.35\ncross_check_eps = 0.35\nmax_paths = 3000\nsamples = 1000\n")
    out = tmp_path / "o"
    assert main(["th2-convergence", "--config", str(cfg), "--out", str(out)]) == EXIT_BUDGET
    rows = read_rows(out / "results.csv")
    flagged = [r for r in rows if r[3] == "budget_exceeded"]
    assert flagged and flagged[0][6] == "false" and int(flagged[0][7]) >= 3000


def test_same_seed_same_bytes_any_worker_count(tmp_path):
    args = ["th4-convergence", "--samples", "2000", "--eps", "0.5,0.3"]
    for name, workers in (("a", "1"), ("b", "1"), ("c", "4")):
        assert main(args + ["--workers", workers, "--out", str(tmp_path / name)]) == EXIT_OK
    ref = (tmp_path / "a" / "results.csv").read_bytes()
    assert (tmp_path / "b" / "results.csv").read_bytes() == ref
    assert (tmp_path / "c" / "results.csv").read_bytes() == ref
    assert b"\r" not in ref


def test_content_hash_is_git_blob_hash():
    # `git hash-object` of "hello\n"
    assert content_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


# ---------------------------------------------------------------- svg

def test_qq_svg_well_formed(tmp_path):
    s = EmpiricalSample.of(sample_limit(gumbel_law(), make_rng(1), 500))
    path = tmp_path / "qq.svg"
    assert emit_qq_svg(s, gumbel_law(), path) == 0
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    assert len(root.findall("{http://www.w3.org/2000/svg}circle")) == 400


def test_qq_single_point(tmp_path):
    path = tmp_path / "one.svg"
    assert emit_qq_svg(EmpiricalSample.of([0.3]), gumbel_law(), path) == 0
    assert len(ET.parse(path).getroot().findall("{http://www.w3.org/2000/svg}circle")) == 1


def test_qq_points_inside_dkw_band():
    law = gumbel_law(0.5, 2.0)
    n = 5000
    s = EmpiricalSample.of(sample_limit(law, make_rng(2), n))
    _, emp = qq_points(s, law, max_points=n)
    levels = (np.arange(n) + 0.5) / n
    inside = np.abs(limit_cdf(law, emp) - levels) <= dkw_bound(n)
    assert inside.mean() >= 0.95


def test_mixture_needs_reference(tmp_path):
    from reactive_paths.analytic import SADDLE_MIXTURE, LimitLaw
    law = LimitLaw(SADDLE_MIXTURE, gaussian_scale=1.0, use_gaussian=True)
    s = EmpiricalSample.of(make_rng(3).standard_normal(100))
    with pytest.raises(ValueError):
        emit_qq_svg(s, law, tmp_path / "x.svg")
    assert emit_qq_svg(s, law, tmp_path / "x.svg", reference=make_rng(4).standard_normal(100)) == 0


def test_cdf_overlay(tmp_path):
    x = np.linspace(-2, 2, 50)
    path = tmp_path / "cdf.svg"
    emit_cdf_svg({"a": (x, 1 / (1 + np.exp(-x))), "b <&>": (x, np.clip(x, 0, 1))}, path)
    assert len(ET.parse(path).getroot().findall("{http://www.w3.org/2000/svg}polyline")) == 2


def test_unwritable_path(tmp_path):
    s = EmpiricalSample.of([0.1, 0.2])
    with pytest.raises(OSError):
        emit_qq_svg(s, gumbel_law(), tmp_path / "missing" / "x.svg")
