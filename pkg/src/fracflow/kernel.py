"""Profile function G_s and the scalar kernel constants everything else consumes.

The graphical fractional curvature of order s in (0,1), graph dimension n, is
built from the odd, bounded, strictly increasing profile

    G_s(t) = int_0^t (1 + w^2)^(-(n+1+s)/2) dw,

its derivative G_s'(t) = (1+t^2)^(-(n+1+s)/2) (closed form), the finite limit
G_s(inf), and the fractional curvature of the round ball, which calibrates the
shrinking-ball barrier used by the stability experiments.

G_s sits inside a double loop over grid points and kernel offsets, so hot-path
evaluation goes through a precomputed table: asinh-spaced nodes on [0, 50]
(uniform near 0, geometric further out), node values integrated by fixed
Gauss-Legendre panels, monotone cubic (PCHIP) interpolation in between, and a
three-term asymptotic tail beyond t = 50.  Direct adaptive quadrature stays
available behind ``method="quadrature"`` for validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

__all__ = [
    "KernelParams",
    "GsTable",
    "build_gs_table",
    "get_gs_table",
    "gs_value",
    "gs_prime",
    "gs_infinity",
    "unit_ball_curvature",
    "sphere_area",
]

_TABLE_T_MAX = 50.0
_TABLE_INTERVALS = 23040  # asinh-uniform; ~2.0e-4 node spacing near 0


@dataclass(frozen=True)
class KernelParams:
    """Graph dimension n >= 1 and fractional order s in (0,1)."""

    n: int
    s: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not (isinstance(self.s, (float, int, np.floating)) and 0.0 < float(self.s) < 1.0):
            raise ValueError(f"s must lie in (0, 1), got {self.s!r}")
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "n", int(self.n))

    @property
    def exponent(self) -> float:
        """Kernel decay exponent (n+1+s)/2, always derived, never stored."""
        return (self.n + 1 + self.s) / 2.0


@dataclass(frozen=True, eq=False)
class GsTable:
    """Immutable sampled representation of G_s on [0, t_max].

    ``coeffs[j]`` holds the cubic (a3, a2, a1, a0) on [nodes[j], nodes[j+1]]
    in the local variable dx = t - nodes[j]; index j recovered from
    floor(asinh(t)/da).  Safe to share across threads.
    """

    params: KernelParams
    nodes: np.ndarray
    values: np.ndarray
    limit_at_infinity: float
    coeffs: np.ndarray = field(repr=False)
    da: float = field(repr=False)
    t_max: float = field(repr=False)

    def __post_init__(self):
        if not np.all(np.diff(self.values) > 0):
            raise ValueError("GsTable values must be strictly increasing")
        if self.values[0] != 0.0:
            raise ValueError("GsTable must start at G_s(0) = 0")
        if not np.all(self.values < self.limit_at_infinity):
            raise ValueError("GsTable values must stay below the limit at infinity")

    def packed(self):
        """Plain-array view (nodes, coeffs, da, t_max, limit, exponent) for jitted code."""
        return (
            self.nodes,
            self.coeffs,
            self.da,
            self.t_max,
            self.limit_at_infinity,
            self.params.exponent,
        )


def _integrand(params: KernelParams, w):
    return (1.0 + w * w) ** (-params.exponent)


@lru_cache(maxsize=None)
def _gl_panel(order: int = 20):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def build_gs_table(
    params: KernelParams,
    t_max: float = _TABLE_T_MAX,
    intervals: int = _TABLE_INTERVALS,
) -> GsTable:
    """Integrate G_s cumulatively on asinh-uniform nodes and fit monotone cubics."""
    da = math.asinh(t_max) / intervals
    nodes = np.sinh(da * np.arange(intervals + 1))
    nodes[0] = 0.0
    nodes[-1] = t_max
    # fixed Gauss-Legendre panel per interval, vectorized over all intervals
    gx, gw = _gl_panel()
    a = nodes[:-1][:, None]
    b = nodes[1:][:, None]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    samples = _integrand(params, mid + half * gx[None, :])
    increments = (half[:, 0]) * (samples @ gw)
    values = np.concatenate(([0.0], np.cumsum(increments)))
    limit = gs_infinity(params)
    pchip = PchipInterpolator(nodes, values, extrapolate=True)
    coeffs = np.ascontiguousarray(pchip.c.T)  # (intervals, 4), highest degree first
    return GsTable(
        params=params,
        nodes=nodes,
        values=values,
        limit_at_infinity=limit,
        coeffs=coeffs,
        da=da,
        t_max=t_max,
    )


_TABLE_CACHE: dict[tuple[int, float], GsTable] = {}


def get_gs_table(params: KernelParams) -> GsTable:
    key = (params.n, params.s)
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = build_gs_table(params)
        _TABLE_CACHE[key] = table
    return table


def _tail_above(params: KernelParams, t):
    """int_t^inf (1+w^2)^(-e) dw by 3-term asymptotics; t >= 50 only."""
    e = params.exponent
    p = 2.0 * e - 1.0
    inv2 = 1.0 / (t * t)
    term0 = t ** (-p) / p
    term1 = e * t ** (-p) * inv2 / (p + 2.0)
    term2 = 0.5 * e * (e + 1.0) * t ** (-p) * inv2 * inv2 / (p + 4.0)
    return term0 - term1 + term2


def _table_eval(table: GsTable, t: np.ndarray) -> np.ndarray:
    at = np.abs(t)
    out = np.empty_like(at)
    inside = at <= table.t_max
    if np.any(inside):
        ai = at[inside]
        j = np.minimum(
            (np.arcsinh(ai) / table.da).astype(np.int64), len(table.nodes) - 2
        )
        dx = ai - table.nodes[j]
        c = table.coeffs
        out[inside] = ((c[j, 0] * dx + c[j, 1]) * dx + c[j, 2]) * dx + c[j, 3]
    if not np.all(inside):
        ao = at[~inside]
        out[~inside] = table.limit_at_infinity - _tail_above(table.params, ao)
    return np.copysign(out, t)


def gs_value(params: KernelParams, t, method: str = "table"):
    """G_s(t); odd, strictly increasing, |G_s(t)| < G_s(inf).

    ``t`` may be a scalar or an ndarray.  ``method="quadrature"`` bypasses the
    table and integrates adaptively (validation path, slow).
    """
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("invalid argument: t must be finite")
    if method == "table":
        res = _table_eval(get_gs_table(params), np.atleast_1d(arr))
    elif method == "quadrature":
        flat = np.atleast_1d(arr).ravel()
        vals = np.empty_like(flat)
        for i, ti in enumerate(flat):
            v, _ = integrate.quad(
                lambda w: _integrand(params, w), 0.0, abs(ti),
                epsabs=1e-13, epsrel=1e-12, limit=200,
            )
            vals[i] = math.copysign(v, ti)
        res = vals.reshape(np.atleast_1d(arr).shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(res[0]) if arr.ndim == 0 else res.reshape(arr.shape)


def gs_prime(params: KernelParams, t):
    """G_s'(t) = (1+t^2)^(-(n+1+s)/2); even, in (0, 1], closed form."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("invalid argument: t must be finite")
    res = (1.0 + arr * arr) ** (-params.exponent)
    return float(res) if arr.ndim == 0 else res


@lru_cache(maxsize=None)
def _gs_infinity_cached(n: int, s: float) -> float:
    # substitution w = tan(theta): int_0^(pi/2) cos(theta)^(n-1+s) d(theta)
    e = n - 1 + s
    val, err = integrate.quad(
        lambda th: math.cos(th) ** e, 0.0, math.pi / 2.0,
        epsabs=1e-14, epsrel=1e-13, limit=200,
    )
    if err > 1e-10:
        raise RuntimeError(f"G_s(inf) quadrature did not converge (err={err:g})")
    return val


def gs_infinity(params: KernelParams) -> float:
    """lim_{t->inf} G_s(t), finite and positive."""
    return _gs_infinity_cached(params.n, params.s)


def sphere_area(k: int) -> float:
    """Surface measure of the unit sphere S^{k-1} in R^k (k=1 gives 2 points)."""
    if k < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * math.pi ** (k / 2.0) / math.gamma(k / 2.0)


def unit_ball_curvature(ambient_dim: int, s: float, radius: float = 1.0) -> float:
    """Fractional curvature of the radius-R ball in R^d at any boundary point.

    The principal value is realized by pairing each ray from the boundary
    point with its mirror through the tangent plane: the paired signed
    contributions cancel along the chord and double outside it, leaving

        c_bar = (2/s) * (2R)^(-s) * |S^(d-2)| * int_0^1 xi^(-s) (1-xi^2)^((d-3)/2) dxi,

    where xi is the cosine of the ray angle to the inward normal.  The radial
    integral along each paired ray is elementary (the chord length is
    2R*xi), so only the angular integral is quadratured; its algebraic
    endpoint singularities are handled with a weighted Gauss-Kronrod rule.
    Positive: the complement dominates near a convex boundary point.
    """
    if not isinstance(ambient_dim, (int, np.integer)) or ambient_dim < 2:
        raise ValueError(f"ambient_dim must be an integer >= 2, got {ambient_dim!r}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s!r}")
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    d = int(ambient_dim)
    beta = (d - 3) / 2.0
    val, err = integrate.quad(
        lambda xi: (1.0 + xi) ** beta,
        0.0,
        1.0,
        weight="alg",
        wvar=(-s, beta),
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    if err > 1e-9:
        raise RuntimeError(f"ball-curvature quadrature did not converge (err={err:g})")
    return (2.0 / s) * (2.0 * radius) ** (-s) * sphere_area(d - 1) * val
