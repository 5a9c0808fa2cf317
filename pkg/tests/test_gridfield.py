"""Grid containers, far-field models, interpolation, and disk round trips."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from fracflow import (
    Affine,
    Cone,
    GridFunction,
    Periodic,
    evaluate,
    from_callable,
    gradient,
    gradient_field,
    lipschitz_constant,
    load_gridfunction,
    oscillation,
    from_callable as _fc,
    save_gridfunction,
)


def gaussian(L=2.0, h=0.25):
    return from_callable(lambda x: np.exp(-(x**2)), 1, L, h, Affine((0.0,), 0.0),
                         matching_tol=0.05)


def test_grid_layout():
    f = gaussian()
    assert f.npoints == 17
    xs = f.coords()
    assert xs[0] == -2.0 and xs[-1] == 2.0
    assert_allclose(np.diff(xs), 0.25)
    assert_allclose(f.values[8], 1.0)


def test_far_field_mismatch_raises():
    # gaussian boundary value ~ e^-4 disagrees with the zero model at L=2
    with pytest.raises(ValueError, match="far-field mismatch"):
        from_callable(lambda x: np.exp(-(x**2)), 1, 2.0, 0.25, Affine((0.0,), 0.0))


def test_periodic_window_must_fit_period():
    with pytest.raises(ValueError, match="period"):
        from_callable(lambda x: np.sin(2 * np.pi * x), 1, 0.7, 0.1, Periodic(period=1.0))


def test_cone_validation():
    with pytest.raises(ValueError):
        GridFunction(1, 1.0, 0.5, np.abs(np.linspace(-1, 1, 5)),
                     Cone(profile_values=np.array([1.0])))


def test_evaluate_inside_and_outside():
    f = from_callable(lambda x: 0.5 * np.abs(x), 1, 2.0, 0.25,
                      Cone(profile_values=np.array([0.5, 0.5])))
    # exact at lattice points, linear between, cone model outside
    assert evaluate(f, 0.25) == f.values[9]
    assert_allclose(evaluate(f, 0.375), 0.5 * (f.values[9] + f.values[10]))
    assert_allclose(evaluate(f, 10.0), 5.0)
    assert_allclose(evaluate(f, -8.0), 4.0)
    out = evaluate(f, np.array([0.0, 3.0, -4.0]))
    assert_allclose(out, [0.0, 1.5, 2.0])


def test_evaluate_periodic_wrap():
    f = from_callable(lambda x: np.sin(2 * np.pi * x), 1, 0.5, 2.0**-6,
                      Periodic(period=1.0))
    assert_allclose(evaluate(f, 1.25), evaluate(f, 0.25), atol=1e-15)
    assert_allclose(evaluate(f, -7.375), evaluate(f, 0.625), atol=1e-15)


def test_affine_evaluate_far():
    f = from_callable(lambda x: 0.7 * x + 0.3, 1, 1.0, 0.125, Affine((0.7,), 0.3))
    assert_allclose(evaluate(f, 50.0), 0.7 * 50 + 0.3, rtol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=9, max_size=9),
       st.lists(st.floats(0.0, 1.0), min_size=9, max_size=9),
       st.floats(-0.99, 0.99))
def test_evaluate_monotone_in_nodal_values(base, bump, x):
    # multilinear interpolation must preserve nodal ordering
    a = np.array(base)
    b = np.array(base) + np.array(bump)
    a[-1], b[-1] = a[0], b[0]  # wrap-consistent endpoints
    u = GridFunction(1, 1.0, 0.25, a, Periodic(period=2.0))
    v = GridFunction(1, 1.0, 0.25, b, Periodic(period=2.0))
    assert evaluate(u, x) <= evaluate(v, x) + 1e-12


def test_gradient_and_lipschitz():
    f = from_callable(lambda x: 0.7 * x + 0.3, 1, 1.0, 0.125, Affine((0.7,), 0.3))
    assert_allclose(gradient_field(f), 0.7, rtol=1e-12)
    assert_allclose(gradient(f, 4), [0.7], rtol=1e-12)
    assert_allclose(lipschitz_constant(f), 0.7, rtol=1e-12)
    g = from_callable(lambda x: 0.5 * np.abs(x), 1, 2.0, 0.25,
                      Cone(profile_values=np.array([0.5, 0.5])))
    assert_allclose(lipschitz_constant(g), 0.5, rtol=1e-12)
    # centered difference straddling the kink sees zero slope
    assert_allclose(gradient_field(g)[8], 0.0, atol=1e-15)


def test_oscillation():
    f = gaussian()
    lo, hi = oscillation(f)
    assert lo == float(np.min(f.values))
    assert hi == 1.0


def test_save_load_round_trip(tmp_path):
    for f in (
        gaussian(),
        from_callable(lambda x: np.sin(2 * np.pi * x), 1, 0.5, 2.0**-5,
                      Periodic(period=1.0)),
        from_callable(lambda x: 0.5 * np.abs(x) + 0.1, 1, 2.0, 0.25,
                      Cone(profile_values=np.array([0.5, 0.5]), envelope=(0.1, 1.0)),
                      matching_tol=0.5),
    ):
        paths = save_gridfunction(f, tmp_path / "field")
        assert all(p.exists() for p in paths)
        g = load_gridfunction(tmp_path / "field")
        assert g.n == f.n and g.L == f.L and g.h == f.h
        assert np.array_equal(g.values, f.values)  # fmt17 round-trips exactly
        assert type(g.far_field) is type(f.far_field)


def test_two_dimensional_layout():
    f = from_callable(lambda x, y: 0.1 * x + 0.2 * y + 0.3, 2, 1.0, 0.25,
                      Affine((0.1, 0.2), 0.3))
    assert f.values.shape == (9, 9)
    assert_allclose(gradient(f, (4, 4)), [0.1, 0.2], atol=1e-12)
    assert_allclose(evaluate(f, np.array([[3.0, -2.0]])), [0.1 * 3 - 0.2 * 2 + 0.3])
