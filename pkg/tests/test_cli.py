import csv
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfline_walk import cli, verify
from halfline_walk.config import RunConfig, build_distribution, dump_config, parse_config
from halfline_walk.errors import ConfigError, HalflineWalkError
from halfline_walk.lattice_walk import heavy_tail, simple_walk
from halfline_walk.montecarlo import SimConfig, SurvivalCurve, simulate_survival
from halfline_walk.report import (
    RATIO_COLUMNS,
    SURVIVAL_COLUMNS,
    emit_ratio_csv,
    emit_survival_csv,
    slope_from_columns,
    written_slope,
)
from halfline_walk.wiener_hopf import halfplane, ratio_curve

RATIO_LAMBDAS = [1 - 2.0 ** -k for k in range(6, 15)]


def _write(tmp_path, doc, name="walk.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_survival_csv(tmp_path):
    c = simulate_survival(simple_walk(), SimConfig(n_paths=2000, horizon=256, seed=1))
    rows = _rows(emit_survival_csv(c, tmp_path / "s.csv"))
    assert tuple(rows[0]) == SURVIVAL_COLUMNS
    p = [float(r[2]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(p, p[1:]))
    assert rows[1][2] == f"{c.p_hat[0]:.12g}"


def test_survival_csv_header_only(tmp_path):
    empty = SurvivalCurve([], [], [], [], 0)
    assert _rows(emit_survival_csv(empty, tmp_path / "e.csv")) == [list(SURVIVAL_COLUMNS)]


def test_survival_csv_rejects_increasing(tmp_path):
    bad = SurvivalCurve([1, 2], [1, 2], [0.5, 0.6], [0.1, 0.1], 10)
    with pytest.raises(HalflineWalkError):
        emit_survival_csv(bad, tmp_path / "b.csv")


def test_io_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_ratio_csv(None, blocker / "sub" / "r.csv")


def test_ratio_csv_slope_recomputable(tmp_path):
    rc = ratio_curve(heavy_tail(1.5), RATIO_LAMBDAS)
    rows = _rows(emit_ratio_csv(rc, tmp_path / "r.csv"))
    assert tuple(rows[0]) == RATIO_COLUMNS
    recomputed = slope_from_columns([float(r[1]) for r in rows[1:]], [float(r[2]) for r in rows[1:]])
    assert abs(recomputed - written_slope(rc)) <= 1e-12
    assert abs(recomputed - rc.slope_vs_log1mlam) <= 1e-6


def test_config_round_trip():
    doc = {"schema_version": 1,
           "distribution": {"type": "table", "atoms": [[1, 0, "1/4"], [-1, 0, "1/4"], [0, 1, "1/4"],
                                                      [0, -1, "1/4"]]},
           "simulate": {"n_paths": 10, "horizon": 10}}
    cfg = parse_config(json.dumps(doc))
    assert parse_config(dump_config(cfg)) == cfg
    assert dump_config(parse_config(dump_config(cfg))) == dump_config(cfg)


_dist_docs = st.one_of(
    st.just({"type": "simple"}),
    st.builds(lambda a, m: {"type": "heavy_tail", "alpha": a, "mirrored": m},
              st.floats(1.05, 1.95), st.booleans()),
    st.just({"type": "product", "x1": [[1, 1]], "x2": [[-1, "1/2"], [1, "1/2"]]}),
)


@given(_dist_docs, st.integers(0, 2 ** 31), st.lists(st.floats(0.51, 0.999), min_size=1, max_size=4))
def test_config_round_trip_property(dist, seed, lams):
    doc = {"schema_version": 1, "distribution": dist, "seed": seed, "wiener_hopf": {"lambdas": lams}}
    cfg = parse_config(json.dumps(doc))
    assert parse_config(dump_config(cfg)) == cfg


def test_config_errors():
    with pytest.raises(ConfigError):
        parse_config("{not json")
    with pytest.raises(ConfigError):
        parse_config(json.dumps({"schema_version": 1, "extra": 1}))
    with pytest.raises(ConfigError):
        parse_config(json.dumps({"schema_version": 2}))
    with pytest.raises(ConfigError):
        parse_config(json.dumps({"schema_version": 1, "verify": {"criteria": [13]}}))
    cfg = parse_config(json.dumps({"schema_version": 1, "distribution": {
        "type": "table", "atoms": [[1, 0, "1/2"], [0, 1, "1/4"]]}}))
    with pytest.raises(ConfigError):
        build_distribution(cfg.distribution)


def test_analyze_simple_walk(tmp_path):
    path = _write(tmp_path, {"schema_version": 1, "output_dir": str(tmp_path / "out")})
    assert cli.main(["analyze", "--config", path]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["result"]["survival_exponent"] == pytest.approx(0.25, abs=1e-3)
    assert (tmp_path / "out" / "profile.csv").exists()


def test_periodic_support_exit_1(tmp_path, capsys):
    q = "1/4"
    path = _write(tmp_path, {"schema_version": 1, "output_dir": str(tmp_path / "o"), "distribution": {
        "type": "table", "atoms": [[2, 0, q], [-2, 0, q], [0, 2, q], [0, -2, q]]}})
    assert cli.main(["validate", "--config", path]) == 1
    assert "condition (a)" in capsys.readouterr().err
    assert cli.main(["simulate", "--config", path]) == 1


def test_config_error_exit_3(tmp_path):
    assert cli.main(["analyze", "--config", str(tmp_path / "missing.json")]) == 3
    bad = _write(tmp_path, {"schema_version": 1, "bogus": True})
    assert cli.main(["analyze", "--config", bad]) == 3
    nn = _write(tmp_path, {"schema_version": 1, "distribution": {"type": "table", "atoms": [[1, 0, 0.5]]}})
    assert cli.main(["validate", "--config", nn]) == 3
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus", "--config", bad])
    assert exc.value.code == 3


def test_numeric_failure_exit_2(tmp_path):
    # a horizon far too short for lambda = 0.99 cannot resolve the estimate
    path = _write(tmp_path, {"schema_version": 1, "output_dir": str(tmp_path / "o"),
                             "geometric": {"lambdas": [0.99], "n_paths": 10000, "horizon": 5}})
    assert cli.main(["geometric", "--config", path]) == 2


def test_exit_code_exhaustive():
    from halfline_walk import errors

    classes = [getattr(errors, n) for n in dir(errors)
               if isinstance(getattr(errors, n), type) and issubclass(getattr(errors, n), Exception)]
    for cls in classes + [cli.AssumptionViolated, OSError]:
        assert cli.exit_code(cls("x")) in (1, 2, 3)
    assert cli.exit_code(errors.DivergentMoment("x")) == 1
    assert cli.exit_code(errors.QuadratureNonConvergent("x")) == 2
    assert cli.exit_code(errors.DegenerateK("x")) == 2
    assert cli.exit_code(errors.NotNormalized("x")) == 3


def test_simulate_and_reproducible(tmp_path, monkeypatch):
    doc = {"schema_version": 1, "output_dir": str(tmp_path / "a"),
           "simulate": {"n_paths": 5000, "horizon": 4096}}
    path = _write(tmp_path, doc)
    assert cli.main(["simulate", "--config", path, "--threads", "1"]) == 0
    monkeypatch.setenv("HALFLINE_WALK_THREADS", "2")
    first = (tmp_path / "a" / "summary.json").read_bytes()
    csv_first = (tmp_path / "a" / "survival.csv").read_bytes()
    assert cli.main(["simulate", "--config", path]) == 0
    assert (tmp_path / "a" / "summary.json").read_bytes() == first
    assert (tmp_path / "a" / "survival.csv").read_bytes() == csv_first
    assert cli.main(["simulate", "--config", path, "--seed", "9", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b" / "survival.csv").read_bytes() != csv_first
    s = json.loads(first)
    assert s["result"]["fit"]["slope"] == pytest.approx(-0.25, abs=0.1)


def test_other_commands(tmp_path):
    doc = {"schema_version": 1, "output_dir": str(tmp_path / "o"),
           "geometric": {"lambdas": [0.9], "n_paths": 5000, "horizon": 300, "targets": ["U", "V_minus"]},
           "wiener_hopf": {"lambdas": [0.9, 0.95]},
           "ladder": {"mc_samples": 5000, "l_values": [-1, 0, 1]}}
    path = _write(tmp_path, doc)
    for cmd in ("geometric", "wiener-hopf", "ladder"):
        assert cli.main([cmd, "--config", path]) == 0, cmd
    out = tmp_path / "o"
    assert len(_rows(out / "geometric.csv")) == 3
    assert _rows(out / "ratio.csv")[1][2] == "0"
    assert len(_rows(out / "ladder.csv")) == 4


def test_verify_command(tmp_path, capsys):
    doc = {"schema_version": 1, "output_dir": str(tmp_path / "v"),
           "verify": {"criteria": [9, 10], "paths_scale": 0.01}}
    assert cli.main(["verify", "--config", _write(tmp_path, doc)]) == 0
    out = capsys.readouterr().out
    assert "criterion  9 PASS" in out and "reduced" in out
    rows = _rows(tmp_path / "v" / "verify.csv")
    assert [r[0] for r in rows[1:]] == ["9", "10"]


def test_verify_rerun_identical():
    a = verify.verify_suite([9, 10], seed=5)
    b = verify.verify_suite([9, 10], seed=5)
    assert [r.measured for r in a] == [r.measured for r in b]


def test_verify_exit_nonzero_on_failure(tmp_path, monkeypatch):
    monkeypatch.setitem(verify.CRITERIA, 9, lambda ctx: verify.CriterionResult(
        9, "forced", "-", "-", "-", False))
    doc = {"schema_version": 1, "output_dir": str(tmp_path / "v"), "verify": {"criteria": [9]}}
    assert cli.main(["verify", "--config", _write(tmp_path, doc)]) != 0


def test_mutated_b_tilde_fails_ratio_slope(monkeypatch):
    original = halfplane.ab_closed_bd

    def flipped(dist, theta1, lam):
        a, b = original(dist, theta1, lam)
        return a, -b

    monkeypatch.setattr(halfplane, "ab_closed_bd", flipped)
    res = verify.run_criterion(11, verify.Context())
    assert not res.passed
    assert res.details["closed_form_slope"] > 0


def test_criterion_errors_are_collected(monkeypatch):
    def boom(ctx):
        raise ConfigError("injected")

    monkeypatch.setitem(verify.CRITERIA, 4, boom)
    rows = verify.verify_suite([4, 9])
    assert not rows[0].passed and "injected" in rows[0].measured
    assert rows[1].passed


def test_default_config_is_valid():
    cfg = RunConfig(schema_version=1)
    assert math.isclose(cfg.wiener_hopf.lambdas[0], 1 - 2 ** -6)
