"""Expanding profiles: residuals, the relaxation solver, shrinker scans,
and the homothety checker."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fracflow import (
    Affine,
    Cone,
    ConvergenceError,
    FlowState,
    KernelParams,
    QuadratureConfig,
    expander_residual,
    from_callable,
    homothety_check,
    load_expander_profile,
    save_expander_profile,
    scan_shrinker,
    shrinker_residual,
    solve_expander,
    step,
)

P1 = KernelParams(n=1, s=0.5)
CONE_HALF = Cone(profile_values=np.array([0.5, 0.5]))


def _affine(a, b, L=2.0, h=2.0 ** -6):
    return from_callable(lambda x: a * x + b, 1, L, h, Affine((a,), b))


def test_affine_residual_is_the_offset():
    # u - y u' kills the slope and leaves b; the curvature term is rounding
    f = _affine(0.3, 0.2)
    res = expander_residual(P1, f, QuadratureConfig(outer_radius=16.0))
    assert_allclose(res, 0.2, rtol=0, atol=1e-10)


def test_raw_cone_residual_is_negative_off_the_tip():
    f = from_callable(lambda x: 0.5 * np.abs(x), 1, 2.0, 2.0 ** -5, CONE_HALF)
    res = expander_residual(P1, f, QuadratureConfig(outer_radius=16.0))
    ys = f.coords()
    off = np.abs(ys) >= 0.25
    assert np.all(res[off] < 0.0)


def test_accurate_step_rate_is_minus_the_residual():
    # the relaxation's stopping rate doubles as the equation residual
    f = from_callable(
        lambda x: 0.5 * np.abs(x) + 0.3 * np.exp(-(x ** 2)),
        1, 2.0, 2.0 ** -5, CONE_HALF, matching_tol=0.5,
    )
    dt = 1e-6
    new = step(FlowState(P1, f, rescaled=True), dt, None, "accurate")
    rate = (new.f.values - f.values) / dt
    res = expander_residual(P1, f)
    assert_allclose(rate, -res, rtol=0, atol=1e-8)


def test_solver_converges_on_the_half_slope_cone():
    prof = solve_expander(P1, CONE_HALF, 2.0, 2.0 ** -4, tol=1e-3)
    assert prof.residual_sup <= 1e-3
    assert prof.iterations > 0
    # frozen regression value for this exact configuration
    assert_allclose(prof.value_at_origin, 1.253684282684423, rtol=1e-12)
    gap = prof.profile.values - 0.5 * np.abs(prof.profile.coords())
    assert float(np.min(gap)) > 0.0
    ys = prof.profile.coords()
    assert float(np.min(gap[np.abs(ys) <= 1.0])) > 0.5


def test_solver_runs_out_of_iterations():
    with pytest.raises(ConvergenceError) as err:
        solve_expander(P1, CONE_HALF, 2.0, 2.0 ** -4, tol=1e-3, max_iter=3)
    assert err.value.last_rate > 1e-3


def test_solver_input_validation():
    with pytest.raises(ValueError):
        solve_expander(P1, CONE_HALF, 2.0, 2.0 ** -4, tol=0.0)
    bad = from_callable(lambda x, y: 0.1 * x + 0.1 * y, 2, 1.0, 0.25,
                        Affine((0.1, 0.1), 0.0))
    with pytest.raises(ValueError):
        solve_expander(P1, CONE_HALF, 2.0, 2.0 ** -4, u0=bad)


def test_shrinker_rejects_negative_coefficient():
    f = _affine(0.1, 0.0, h=2.0 ** -4)
    with pytest.raises(ValueError):
        shrinker_residual(P1, f, -0.5)


def test_shrinker_scan_on_affine_data_bottoms_out_at_zero():
    # geom is the constant b/sqrt(1+a^2) and H_s is rounding noise, so the
    # sup residual grows linearly in c from a floor at c = 0
    f = _affine(0.3, 0.2, h=2.0 ** -5)
    scan = scan_shrinker(P1, f, cfg=QuadratureConfig(outer_radius=16.0))
    assert int(np.argmin(scan.sup_residuals)) == 0
    assert scan.min_sup < 1e-8
    assert np.all(np.diff(scan.sup_residuals) > 0)


def test_shrinker_scan_matches_pointwise_residual():
    f = from_callable(lambda x: np.exp(-(x ** 2)), 1, 2.0, 2.0 ** -5,
                      Affine((0.0,), 0.0), matching_tol=0.05)
    cfg = QuadratureConfig(outer_radius=16.0)
    cs = [0.0, 0.5, 1.0]
    scan = scan_shrinker(P1, f, cs=cs, cfg=cfg, window=0.5)
    mask = np.abs(f.coords()) <= 0.5 * f.L + 1e-12
    for c, sup in zip(cs, scan.sup_residuals):
        direct = np.max(np.abs(shrinker_residual(P1, f, c, cfg)[mask]))
        assert_allclose(sup, direct, rtol=1e-13)


def test_homothety_check_is_exact_on_synthetic_dilations():
    from fracflow import GridFunction, evaluate

    prof = solve_expander(P1, CONE_HALF, 2.0, 2.0 ** -4, tol=1e-3)
    f = prof.profile
    xs = f.coords()
    snaps = {}
    for t in (1.0, 2.0, 3.5):
        lam = (1.5 * (t - 1.0) + 1.0) ** (1.0 / 1.5)
        snaps[t] = GridFunction(1, f.L, f.h, lam * evaluate(f, xs / lam),
                                CONE_HALF, matching_tol=5.0)
    dev = homothety_check(P1, f, snaps, c=1.0, t_start=1.0, window=0.5)
    assert set(dev) == {1.0, 2.0, 3.5}
    assert max(dev.values()) <= 1e-15


def test_profile_save_load_round_trip(tmp_path):
    prof = solve_expander(P1, CONE_HALF, 2.0, 2.0 ** -4, tol=1e-3)
    csv_path, json_path = save_expander_profile(prof, tmp_path / "prof")
    assert csv_path.exists() and json_path.exists()
    back = load_expander_profile(tmp_path / "prof")
    assert np.array_equal(back.profile.values, prof.profile.values)
    assert back.profile.L == prof.profile.L
    assert back.profile.h == prof.profile.h
    assert back.residual_sup == prof.residual_sup
    assert back.iterations == prof.iterations
    assert back.value_at_origin == prof.value_at_origin
    assert np.array_equal(back.source_cone.profile_values,
                          prof.source_cone.profile_values)
    assert back.params.s == prof.params.s
