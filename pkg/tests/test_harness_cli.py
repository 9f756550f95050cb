"""Harness core (bounds, fits, CSVs), the experiment registry, and the CLI."""

import json
import math
import subprocess
import sys
from types import SimpleNamespace

import numpy as np
import pytest

from convexkit import problems
from convexkit.harness import registry
from convexkit.harness.cli import main
from convexkit.harness.core import (
    BoundSpec,
    BoundViolation,
    MissingOptimum,
    NonPositiveGap,
    RunTrace,
    TraceRecorder,
    check_bound,
    checkpoints,
    fit_rate,
    write_cut_trace_csv,
    write_first_order_csv,
    write_trace_csv,
)
from convexkit.harness.registry import ConfigError, bound_from_trace


def _trace(iters, gaps, meta=None):
    tr = RunTrace(meta=meta or {})
    for t, g in zip(iters, gaps):
        tr.iters.append(int(t))
        tr.f_values.append(g)
        tr.gaps.append(g)
        tr.avg_gaps.append(g)
        tr.dist_to_opt.append(math.nan)
        tr.grad_norms.append(math.nan)
        tr.bound_values.append(math.nan)
        tr.bound_satisfied.append(True)
        tr.oracle_zeroth.append(0)
        tr.oracle_first.append(int(t))
    return tr


# ------------------------------------------------------------------ bound spec

def test_bound_spec_slack_and_grace_period():
    b = BoundSpec("b", lambda t: 1.0 / t, t_min=3, slack=1.5)
    assert b.value(4) == 0.25
    assert b.holds_at(2, 1e9)  # below t_min nothing is claimed
    assert b.holds_at(4, 0.374)
    assert not b.holds_at(4, 0.376)


def test_check_bound_reports_margin():
    ts = range(1, 21)
    tr = _trace(ts, [0.5 / t for t in ts])
    res = check_bound(tr, BoundSpec("b", lambda t: 1.0 / t))
    assert res.passed and bool(res)
    assert res.n_checked == 20
    assert res.first_violation is None
    assert res.max_ratio == pytest.approx(0.5)


def test_check_bound_locates_first_violation():
    ts = range(1, 21)
    gaps = [1.0 / t for t in ts]
    gaps[6] = 1.2 / 7.0  # iteration 7
    res = check_bound(_trace(ts, gaps), BoundSpec("b", lambda t: 1.0 / t))
    assert not res.passed
    assert res.first_violation == 7
    assert res.max_ratio == pytest.approx(1.2)


def test_check_bound_averages_the_ensemble():
    ts = range(1, 11)
    hot = _trace(ts, [1.8 / t for t in ts])  # violates alone
    cold = _trace(ts, [0.1 / t for t in ts])
    spec = BoundSpec("b", lambda t: 1.0 / t)
    assert not check_bound(hot, spec).passed
    assert check_bound([hot, cold], spec).passed

    offgrid = _trace(range(2, 12), [0.1] * 10)
    with pytest.raises(ValueError):
        check_bound([hot, offgrid], spec)
    with pytest.raises(ValueError):
        check_bound([], spec)
    nan_tr = _trace(ts, [math.nan] * 10)
    with pytest.raises(MissingOptimum):
        check_bound(nan_tr, spec)


def test_trace_recorder_enforcement_and_meta():
    oracle = problems.make_l1_on_ball(2).oracle
    with pytest.raises(MissingOptimum):
        TraceRecorder(oracle, None)

    spec = BoundSpec("tiny", lambda t: 0.1, slack=1.0, t_min=1)
    rec = TraceRecorder(oracle, 0.0, spec, record_iters=[2, 3], enforce=True)
    assert rec.trace.meta["bound_id"] == "tiny"
    assert rec.trace.meta["slack"] == 1.0
    assert rec.trace.meta["expectation"] is False

    x = np.array([0.01, 0.02])
    rec.record(1, x)  # not on the record grid
    assert len(rec.trace) == 0
    rec.record(2, x)
    assert rec.trace.bound_satisfied == [True]
    rec.set_dist(0.5)
    assert rec.trace.dist_to_opt == [0.5]
    with pytest.raises(BoundViolation):
        rec.record(3, np.array([0.3, 0.4]))  # gap 0.7 > 0.1

    # checked= overrides the recorded quantity entirely
    rec2 = TraceRecorder(oracle, 0.0, spec, enforce=True)
    rec2.record(1, np.array([0.3, 0.4]), checked=0.05)
    assert rec2.trace.avg_gaps == [0.05]
    assert rec2.trace.gaps[0] == pytest.approx(0.7)


# ------------------------------------------------------------------- rate fits

def test_fit_rate_power_law():
    ts = np.arange(1, 61)
    fit = fit_rate(ts, 3.0 / ts)
    assert fit.kind == "power"
    assert fit.slope == pytest.approx(-1.0, abs=1e-9)
    assert fit.ci_low <= -1.0 <= fit.ci_high
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-9)


def test_fit_rate_geometric():
    ts = np.arange(1, 41)
    fit = fit_rate(ts, 5.0 * 0.9**ts, kind="linear")
    assert fit.contraction == pytest.approx(0.9, abs=1e-12)
    assert fit.window == max(10, len(ts) // 3)


def test_fit_rate_input_guards():
    with pytest.raises(ValueError):
        fit_rate(np.arange(1, 6), np.ones(5))  # too short
    bad = np.concatenate([np.ones(30), [0.0]])
    with pytest.raises(NonPositiveGap):
        fit_rate(np.arange(1, 32), bad)
    with pytest.raises(ValueError):
        fit_rate(np.arange(1, 31), np.ones(30), kind="nope")


def test_checkpoints_grids():
    assert checkpoints(50) == list(range(1, 51))
    cp = checkpoints(10_000)
    assert len(cp) <= 200
    assert cp[0] == 1 and cp[-1] == 10_000
    assert all(b > a for a, b in zip(cp, cp[1:]))


# ------------------------------------------------------------------ CSV output

def test_trace_csv_format_and_stability(tmp_path):
    tr = _trace([1, 2], [0.5, float("nan")])
    tr.bound_satisfied[1] = False
    path = tmp_path / "t.csv"
    write_trace_csv(path, tr)
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == ("iter,f_value,gap,avg_gap,bound_value,bound_satisfied,"
                        "oracle_zeroth,oracle_first")
    assert lines[1].split(",") == ["1", "0.5", "0.5", "0.5", "nan", "1", "0", "1"]
    assert lines[2].split(",")[5] == "0"  # False renders as 0
    assert "nan" in lines[2]

    write_trace_csv(path, tr)
    assert path.read_text() == text  # rewriting is byte-identical

    fo_path = tmp_path / "fo.csv"
    write_first_order_csv(fo_path, tr)
    assert fo_path.read_text().splitlines()[0] == (
        "iter,f_value,gap,avg_gap,dist_to_opt,grad_norm,bound_value,"
        "bound_satisfied")


def test_cut_trace_csv(tmp_path):
    cut = SimpleNamespace(iters=[1, 2], feasible_flags=[False, True],
                          best_values=[0.9, 0.4], log_volume_proxy=[0.0, -0.5],
                          oracle_calls=[1, 2])
    path = tmp_path / "cut.csv"
    write_cut_trace_csv(path, cut)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,feasible_flag,best_value,log_volume_proxy,oracle_calls"
    assert lines[1] == "1,0,0.9,0.0,1"
    assert lines[2] == "2,1,0.4,-0.5,2"


# -------------------------------------------------------------------- registry

GD_CFG = {
    "problem": {"kind": "quadratic",
                "params": {"dim": 8, "alpha": 0.5, "beta": 4.0}, "seed": 8},
    "algorithm": {"id": "gd_smooth"},
    "horizon": 80,
}


def test_validate_config_rejects_bad_shapes():
    good = dict(GD_CFG)
    assert registry.validate_config(good) is good
    for breakage in (
        {**GD_CFG, "extra": 1},
        {k: v for k, v in GD_CFG.items() if k != "horizon"},
        {**GD_CFG, "algorithm": {"id": "no_such_algorithm"}},
        {**GD_CFG, "algorithm": {"id": "gd_smooth", "nope": {}}},
        {**GD_CFG, "horizon": 0},
        {**GD_CFG, "horizon": "soon"},
        {**GD_CFG, "seeds": 0},
        {**GD_CFG, "bound": {"id": "gd_smooth", "tolerance": 2}},
        "not a dict",
    ):
        with pytest.raises(ConfigError):
            registry.validate_config(breakage)
    with pytest.raises(ConfigError):
        registry.build_problem({"kind": "no_such_problem"})


def test_bound_from_trace_reconstructs_curve():
    result = registry.run_experiment(GD_CFG)
    tr = result.traces[0]
    spec = bound_from_trace(tr)
    assert spec.bound_id == "gd_smooth"
    assert spec.slack == tr.meta["slack"]
    for t, bv in zip(tr.iters, tr.bound_values):
        assert spec.value(t) == bv
    assert bound_from_trace(tr, slack=2.0).slack == 2.0
    with pytest.raises(ConfigError):
        bound_from_trace(RunTrace())


def test_run_experiment_collapses_deterministic_seeds():
    res = registry.run_experiment({**GD_CFG, "seeds": 5})
    assert res.seeds == 1 and len(res.traces) == 1
    assert any("collapse" in n for n in res.notes)
    assert res.passed is True
    s = res.summary()
    assert s["bound"]["id"] == "gd_smooth"
    assert s["bound"]["passed"] is True
    assert s["oracle_calls"]["first"] > 0
    assert "final_gap_mean" in s


def test_run_experiment_bound_id_mismatch():
    with pytest.raises(ConfigError):
        registry.run_experiment({**GD_CFG, "bound": {"id": "agd_smooth"}})


def test_run_experiment_stochastic_replicates():
    cfg = {
        "problem": {"kind": "quadratic",
                    "params": {"dim": 6, "alpha": 1.0, "beta": 4.0,
                               "constraint": {"kind": "ball", "dim": 6, "R": 1.0}},
                    "seed": 7},
        "algorithm": {"id": "sgd",
                      "params": {"sigma": 0.5, "B": 7.0,
                                 "mode": "strongly_convex"}},
        "horizon": 150,
        "seeds": 4,
    }
    res = registry.run_experiment(cfg)
    assert res.seeds == 4 and len(res.traces) == 4
    assert res.passed is True, "ensemble mean exceeded the expectation bound"
    # replicate streams differ
    assert res.traces[0].avg_gaps != res.traces[1].avg_gaps


def test_run_experiment_cut_traces():
    cfg = {
        "problem": {"kind": "l1_on_ball", "params": {"dim": 4}},
        "algorithm": {"id": "ellipsoid"},
        "horizon": 40,
    }
    res = registry.run_experiment(cfg)
    assert res.trace_kind == "cut"
    assert any("in-run" in n for n in res.notes)
    s = res.summary()
    assert s["bound"] is None
    assert "separation_or_value" in s["oracle_calls"]
    assert "best_value" in s and "feasible" in s
    with pytest.raises(ConfigError):
        registry.run_experiment({**cfg, "bound": {"id": "ellipsoid_value"}})


def test_run_experiment_lp_certificates():
    cfg = {
        "problem": {"kind": "lp", "params": {"n": 3, "extra_rows": 4}, "seed": 2},
        "algorithm": {"id": "lp_path_follow"},
        "horizon": 1,
    }
    res = registry.run_experiment(cfg)
    assert res.passed is True
    tr = res.traces[0]
    assert tr.meta["bound_id"] == "ipm_certificate"
    assert "optimum" in tr.meta
    # the certificate 2 nu / t dominates the true gap on every recorded state
    for gap, cert in zip(tr.avg_gaps, tr.bound_values):
        assert gap <= cert + 1e-9


def test_write_artifacts_layout(tmp_path):
    res = registry.run_experiment(GD_CFG)
    paths = registry.write_artifacts(res, tmp_path / "out")
    names = sorted(p.split("/")[-1] for p in paths)
    assert names == ["result.json", "trace_0.csv"]
    with open(tmp_path / "out" / "result.json", "r", encoding="utf-8") as fh:
        data = json.load(fh)
    assert data["algorithm"] == "gd_smooth"


# ------------------------------------------------------------------------- CLI

def test_cli_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "guarantee" in out
    assert "ellipsoid" in out and "svrg" in out


def test_cli_run_writes_artifacts(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(GD_CFG))
    out_dir = tmp_path / "artifacts"
    assert main(["run", "--config", str(cfg_path), "--out", str(out_dir)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["bound"]["passed"] is True
    assert sorted(summary["artifacts"]) == ["result.json", "trace_0.csv"]
    assert (out_dir / "trace_0.csv").is_file()
    assert (out_dir / "result.json").is_file()


def test_cli_run_cut_trace_exits_ok(tmp_path, capsys):
    # no bound block, passed is None: that is not a bound failure
    cfg = {"problem": {"kind": "quadratic",
                       "params": {"dim": 4, "alpha": 0.5, "beta": 2.0,
                                  "constraint": {"kind": "ball", "dim": 4, "R": 1.0}},
                       "seed": 3},
           "algorithm": {"id": "ellipsoid", "params": {"B": 3.0}},
           "horizon": 40}
    cfg_path = tmp_path / "cut.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cfg_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["trace_kind"] == "cut"
    assert summary["bound"] is None


def test_cli_run_exit_codes(tmp_path):
    bad_json = tmp_path / "broken.json"
    bad_json.write_text("{nope")
    assert main(["run", "--config", str(bad_json)]) == 2

    bad_cfg = tmp_path / "bad.json"
    bad_cfg.write_text(json.dumps({"algorithm": {"id": "gd_smooth"}}))
    assert main(["run", "--config", str(bad_cfg)]) == 2

    # an absurd slack makes the re-check fail without raising
    squeezed = tmp_path / "squeezed.json"
    squeezed.write_text(json.dumps({**GD_CFG, "bound": {"slack": 1e-9}}))
    assert main(["run", "--config", str(squeezed)]) == 1


def test_cli_suite_filter_miss():
    assert main(["suite", "--filter", "zzz-no-such-criterion"]) == 2


def test_cli_report_roundtrip(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(GD_CFG))
    out_dir = tmp_path / "res"
    assert main(["run", "--config", str(cfg_path), "--out", str(out_dir)]) == 0
    capsys.readouterr()

    assert main(["report", "--in", str(out_dir)]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "| algorithm | rate verified | iterations | oracle calls |"
    row = [c.strip() for c in lines[2].split("|")]
    assert row[1] == "gd_smooth"
    assert row[2] == "gd_smooth"  # verified, so the bound id is shown


def test_cli_report_blank_when_unverified(tmp_path, capsys):
    sub = tmp_path / "r0"
    sub.mkdir()
    (sub / "result.json").write_text(json.dumps({
        "algorithm": "mystery", "iterations": 10,
        "oracle_calls": {"first": 10, "zeroth": 0},
        "bound": {"id": "some_bound", "passed": False},
    }))
    assert main(["report", "--in", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    row = [c.strip() for c in lines[2].split("|")]
    assert row[1] == "mystery"
    assert row[2] == ""  # unverified rates never make the table


def test_cli_report_missing_inputs(tmp_path):
    assert main(["report", "--in", str(tmp_path / "missing")]) == 2
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["report", "--in", str(empty)]) == 2


def test_module_entrypoint():
    proc = subprocess.run([sys.executable, "-m", "convexkit", "list"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "ellipsoid" in proc.stdout
