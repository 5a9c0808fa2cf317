"""Measurement helpers, the scenario registry, and report plumbing."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fracflow import (
    Affine,
    GridFunction,
    ScenarioConfig,
    cached_expander,
    decay_fit,
    from_callable,
    graph_distance,
    holder_modulus,
    run_scenario,
)
from fracflow.flow import Trajectory


def _const_field(value, L=1.0, h=0.25):
    return from_callable(lambda x: np.full_like(x, value), 1, L, h,
                         Affine((0.0,), value))


def test_graph_distance_basics():
    u = _const_field(0.3)
    v = _const_field(0.5)
    assert graph_distance(u, u) == 0.0
    assert_allclose(graph_distance(u, v), 0.2, rtol=1e-15)
    w = _const_field(0.5, h=0.5)
    with pytest.raises(ValueError):
        graph_distance(u, w)


def test_decay_fit_recovers_an_exact_exponential():
    traj = Trajectory()
    for t in np.linspace(0.0, 2.0, 40):
        q = 3.0 * np.exp(-1.7 * t)
        traj.append(time=t, sup=q, inf=-q, oscillation=2 * q,
                    lipschitz=1.0, sup_w=0.0)
    rate, r2 = decay_fit(traj, "oscillation")
    assert_allclose(rate, -1.7, rtol=1e-12)
    assert r2 > 1.0 - 1e-12


def test_decay_fit_input_validation():
    traj = Trajectory()
    for t in (0.0, 1.0):
        traj.append(time=t, sup=1.0, inf=0.0, oscillation=1.0,
                    lipschitz=1.0, sup_w=0.0)
    with pytest.raises(ValueError):
        decay_fit(traj, "sup")
    traj2 = Trajectory()
    for t in np.linspace(0.0, 1.0, 12):
        traj2.append(time=t, sup=-1.0, inf=0.0, oscillation=1.0,
                     lipschitz=1.0, sup_w=0.0)
    with pytest.raises(ValueError):
        decay_fit(traj2, "sup")


def test_holder_modulus_on_an_exact_power_law():
    # u(t) = 2 t^(2/3) * 1: every pair against t=0 realizes the constant
    snaps = {t: _const_field(2.0 * t ** (2.0 / 3.0)) for t in (0.0, 1.0, 8.0)}
    mod = holder_modulus(snaps, 2.0 / 3.0)
    assert_allclose(mod, 2.0, rtol=1e-14)


def test_holder_modulus_window_restriction():
    L, h = 2.0, 0.5
    base = from_callable(lambda x: np.zeros_like(x), 1, L, h, Affine((0.0,), 0.0))
    snaps = {0.0: base}
    for t in (1.0, 4.0):
        vals = np.full(base.npoints, 0.1 * t ** 0.5)
        vals[np.abs(base.coords()) > 0.5 * L] = 50.0  # junk outside the window
        snaps[t] = GridFunction(1, L, h, vals, Affine((0.0,), 0.0),
                                matching_tol=100.0)
    inside = holder_modulus(snaps, 0.5, window=0.5)
    assert_allclose(inside, 0.1, rtol=1e-14)
    assert holder_modulus(snaps, 0.5) > 1.0  # unwindowed sees the junk


def test_holder_modulus_needs_three_snapshots():
    snaps = {0.0: _const_field(0.0), 1.0: _const_field(1.0)}
    with pytest.raises(ValueError):
        holder_modulus(snaps, 0.5)


def test_scenario_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(name="no_such_scenario")
    with pytest.raises(ValueError):
        ScenarioConfig(name="plane_stability", s=1.0)
    with pytest.raises(ValueError):
        ScenarioConfig(name="plane_stability", n=2)
    with pytest.raises(ValueError):
        ScenarioConfig(name="plane_stability", cfl=0.0)
    with pytest.raises(ValueError):
        ScenarioConfig(name="plane_stability", threads=0)
    with pytest.raises(ValueError):
        ScenarioConfig(name="plane_stability", L=-1.0)
    with pytest.raises(ValueError):
        ScenarioConfig(name="plane_stability", extras={"slope": 0.5})
    with pytest.raises(ValueError):
        ScenarioConfig(name="bump_decay", extras={"epsilon": 0.0})
    cfg = ScenarioConfig(name="plane_stability", extras={"amplitude": 1})
    assert cfg.extras == {"amplitude": 1.0}
    assert isinstance(cfg.extras["amplitude"], float)


def test_cached_expander_reuses_solves():
    a = cached_expander(0.5, 0.5, 2.0, 2.0 ** -5, tol=1e-3)
    b = cached_expander(0.5, 0.5, 2.0, 2.0 ** -5, tol=1e-3)
    assert a is b
    # the warm-start chain already solved (and cached) the coarse level
    base = cached_expander(0.5, 0.5, 2.0, 2.0 ** -4, tol=1e-3)
    assert base.profile.h == 2.0 ** -4
    assert abs(base.value_at_origin - a.value_at_origin) < 0.05


def test_run_scenario_writes_report_and_artifacts(tmp_path):
    cfg = ScenarioConfig(name="periodic_decay", h=2.0 ** -5, horizon=0.3,
                         out_dir=tmp_path / "run")
    v = run_scenario(cfg)
    assert v.scenario == "periodic_decay"
    assert set(v.bounds) <= set(v.measured)
    assert v.passed == all(v.measured[k] <= v.bounds[k] for k in v.bounds)
    assert "monitors.csv" in v.artifacts
    assert (tmp_path / "run" / "monitors.csv").exists()
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert set(report) == {"scenario", "params", "measured", "bounds", "pass",
                           "artifacts"}
    assert report["pass"] == v.passed
    assert report["params"]["h"] == 2.0 ** -5
    assert report["params"]["horizon"] == 0.3
    # thread count and output location must not leak into the report
    assert "threads" not in report["params"]
    assert "out_dir" not in report["params"]


def test_reports_are_byte_identical_across_threads(tmp_path):
    reports = []
    for threads, sub in ((1, "a"), (4, "b")):
        cfg = ScenarioConfig(name="periodic_decay", h=2.0 ** -5, horizon=0.3,
                             threads=threads, out_dir=tmp_path / sub)
        run_scenario(cfg)
        reports.append((tmp_path / sub / "report.json").read_bytes())
    assert reports[0] == reports[1]


def test_scenario_failures_wrap_into_runtime_error(monkeypatch):
    import fracflow.experiments as ex

    def boom(cfg, r):
        raise ValueError("synthetic failure")

    monkeypatch.setitem(ex._RUNNERS, "periodic_decay", boom)
    with pytest.raises(RuntimeError,
                       match="periodic_decay failed: synthetic failure"):
        run_scenario(ScenarioConfig(name="periodic_decay"))


def test_shrinker_scan_artifact(tmp_path):
    cfg = ScenarioConfig(name="shrinker_rigidity", L=1.5, h=2.0 ** -4,
                         out_dir=tmp_path,
                         extras={"solver_tol": 1e-3, "c_step": 0.5})
    v = run_scenario(cfg)
    assert "scan.csv" in v.artifacts
    lines = (tmp_path / "scan.csv").read_text().strip().splitlines()
    assert lines[0] == "c,sup_residual"
    assert len(lines) == 1 + len(np.arange(0.0, 2.0 + 1e-9, 0.5))


def test_convergence_study_orders():
    from fracflow.cli import convergence_study

    with pytest.raises(ValueError):
        convergence_study(ScenarioConfig(name="periodic_decay"), 1)
    base = ScenarioConfig(name="periodic_decay", h=2.0 ** -4, horizon=0.3)
    report = convergence_study(base, 2)
    assert [lv["h"] for lv in report["levels"]] == [2.0 ** -4, 2.0 ** -5]
    assert report["scenario"] == "periodic_decay"
    for key, order in report["orders"].items():
        assert (order == "exact" or order is None
                or (isinstance(order, list) and len(order) == 1))
