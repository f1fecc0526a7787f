import csv
import json

import pytest
from click.testing import CliRunner

from product_cauchy import checks
from product_cauchy.cli import fmt, main
from product_cauchy.config import RunConfig, load_config
from product_cauchy.errors import ConfigError

SMALL = {"grid": {"X": 2.0, "h": 0.125}, "surface": {"curve1": {"family": "sine", "lambda": 0.5}}}


def run(tmp_path, args, cfg=None):
    argv = ["--out", str(tmp_path / "out")]
    if cfg is not None:
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        argv += ["--config", str(p)]
    return CliRunner().invoke(main, argv + args)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_fmt_round_trips():
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(True) == "true" and fmt(3) == "3"


def test_verify_list(tmp_path):
    r = run(tmp_path, ["verify", "--list"])
    assert r.exit_code == 0
    assert len(r.output.strip().splitlines()) == 14


def test_verify_default_suite(tmp_path):
    r = run(tmp_path, ["verify"], SMALL)
    assert r.exit_code == 0, r.output
    assert "[PASS]" in r.output and "[FAIL]" not in r.output
    rep = json.loads((tmp_path / "out" / "verify_report.json").read_text())
    assert rep["passed"] and len(rep["config_hash"]) == 16
    assert read_csv(tmp_path / "out" / "verify.csv")[0] == ["name", "value", "threshold", "passed"]


def test_verify_target(tmp_path):
    r = run(tmp_path, ["verify", "--target", "4"])
    assert r.exit_code == 0
    assert "poisson_mass" in r.output


def test_verify_unknown_target_exits_2(tmp_path):
    r = run(tmp_path, ["verify", "--target", "99"])
    assert r.exit_code == 2


@pytest.mark.parametrize("bad", [
    {"surface": {"curve1": {"family": "sine", "lambda": 1.2}}},
    {"grid": {"X": 1.0, "h": 2.0}},
    {"t_schedule": []},
    {"p": 1.0},
    {"unknown_key": 1},
])
def test_bad_config_exits_2(tmp_path, bad):
    r = run(tmp_path, ["verify"], bad)
    assert r.exit_code == 2
    assert "config error" in r.output


def test_unwritable_out_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    r = CliRunner().invoke(main, ["--out", str(blocker / "sub"), "verify", "--list"])
    assert r.exit_code == 2


def test_sweep_t_is_monotone_and_deterministic(tmp_path):
    cfg = dict(SMALL, t_schedule=[0.25, 0.125, 0.0625, 0.03125], selector="PP")
    r1 = run(tmp_path, ["sweep", "--kind", "t"], cfg)
    assert r1.exit_code == 0, r1.output
    first = (tmp_path / "out" / "sweep.csv").read_bytes()
    assert json.loads(r1.output)["monotone"]
    r2 = run(tmp_path, ["sweep", "--kind", "t"], cfg)
    assert r2.exit_code == 0
    assert (tmp_path / "out" / "sweep.csv").read_bytes() == first
    rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert rows[0] == ["t1", "t2", "l2_error", "max_error"] and len(rows) == 5


def test_sweep_tb(tmp_path):
    r = run(tmp_path, ["sweep", "--kind", "tb"], dict(SMALL, R_schedule=[1.0, 4.0, 16.0, 64.0]))
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["monotone"]
    assert read_csv(tmp_path / "out" / "sweep.csv")[0] == ["R", "abs_pairing", "sup_F_deviation"]


def test_sweep_reproducing(tmp_path):
    cfg = dict(SMALL, grid={"X": 2.0, "h": 2.0**-9}, kmax=4)
    r = run(tmp_path, ["sweep", "--kind", "reproducing"], cfg)
    assert r.exit_code == 0, r.output
    summary = json.loads(r.output)
    assert summary["e_plus_decreasing"] and summary["e_minus_decreasing"]
    assert len(read_csv(tmp_path / "out" / "sweep.csv")) == 5


def test_extend(tmp_path):
    cfg = dict(SMALL, t1_lattice=[0.5, 0.1], t2_lattice=[0.25])
    r = run(tmp_path, ["extend"], cfg)
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["max_residual"] <= 1e-10
    rows = read_csv(tmp_path / "out" / "extend.csv")
    assert len(rows) == 1 + 2 * 1 * 4 * 2
    sums = read_csv(tmp_path / "out" / "extend_sums.csv")
    head = sums[0]
    for row in sums[1:]:
        v = dict(zip(head, map(float, row)))
        assert v["jump_re"] == pytest.approx(v["P_re"], abs=1e-14)
        assert v["minus_total_re"] == pytest.approx(v["C_re"], abs=1e-14)


def test_tb_probe_command(tmp_path):
    r = run(tmp_path, ["tb-probe"], SMALL)
    assert r.exit_code == 0, r.output
    verdicts = json.loads(r.output)
    assert all(verdicts.values())
    assert read_csv(tmp_path / "out" / "tb_probe.csv")[0] == ["probe_id", "parameter", "value"]


def test_lp_stats(tmp_path):
    cfg = dict(SMALL, grid={"X": 4.0, "h": 1 / 32})
    r = run(tmp_path, ["lp-stats"], cfg)
    assert r.exit_code == 0, r.output
    s = json.loads(r.output)
    assert s["ratio"] > 0 and s["scales"] == [0, 3]
    assert len(read_csv(tmp_path / "out" / "lp_stats.csv")) == 1 + 16


def test_oracle(tmp_path):
    cfg = {"grid": {"X": 4.0, "h": 0.125}, "field": {"width": [1.5, 1.5]},
           "t_schedule": [0.25, 0.0625, 0.015625]}
    r = run(tmp_path, ["oracle"], cfg)
    assert r.exit_code == 0, r.output
    errs = [float(row[1]) for row in read_csv(tmp_path / "out" / "oracle.csv")[1:]]
    assert errs[0] > errs[1] > errs[2]


def test_fast_flag_coarsens_grid(tmp_path):
    cfg = RunConfig.model_validate(SMALL)
    g = cfg.build_grid(fast=True)
    assert (g.X, g.h) == (1.0, 0.25)


def test_config_hash_depends_on_content():
    a = load_config(overrides={"seed": 1})
    b = load_config(overrides={"seed": 2})
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == load_config(overrides={"seed": 1}).config_hash()


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


@pytest.mark.parametrize("num", range(1, 15))
def test_resolve_target_by_number_and_name(num):
    name = checks.CRITERIA[num][0]
    assert checks.resolve_target(str(num)) == checks.resolve_target(name) == num
