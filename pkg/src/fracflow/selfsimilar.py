"""Expanding self-similar profiles, their residuals, and shrinker scans.

The rescaled flow is autonomous, so an expanding profile is just its fixed
point: u - y . Du + sqrt(1 + |Du|^2) H_s[u] = 0.  The time-1 slice of the
same homothetic solution solves the equivalent equation with prefactor
(1 + s) on the curvature term; the two differ by the fixed dilation
(1+s)^(1/(1+s)), i.e. the stored profile is the time-1/(1+s) slice.  Under
the unrescaled flow the stored profile evolves homothetically with
lambda(t) = (1 + (1+s)(t - 1))^(1/(1+s)).

Profiles are computed by relaxation: run the rescaled flow from the cone
until the sup-norm change per unit tau drops below tol.  The stopping rate
*is* the profile-equation residual (the accurate-mode step rate equals minus
the residual), so the reported residual_sup lands at the tolerance level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._fmt import fmt17, json_dumps
from .curvature import QuadratureConfig, hs_field
from .flow import FlowState, StepControl, stable_dt, step
from .gridfield import (
    Affine,
    Cone,
    GridFunction,
    _cone_value,
    evaluate,
    gradient_field,
    save_gridfunction,
)
from .kernel import KernelParams

__all__ = [
    "ConvergenceError",
    "ExpanderProfile",
    "solve_expander",
    "expander_residual",
    "shrinker_residual",
    "ShrinkerScan",
    "scan_shrinker",
    "homothety_check",
    "save_expander_profile",
    "load_expander_profile",
]


class ConvergenceError(RuntimeError):
    """Relaxation ran out of iterations; carries the last sup-rate."""

    def __init__(self, message: str, last_rate: float):
        super().__init__(message)
        self.last_rate = last_rate


@dataclass(frozen=True)
class ExpanderProfile:
    """Converged fixed point of the rescaled flow over a cone."""

    profile: GridFunction
    residual_sup: float
    iterations: int
    source_cone: Cone
    params: KernelParams

    @property
    def value_at_origin(self) -> float:
        c = self.profile.npoints // 2
        if self.profile.n == 1:
            return float(self.profile.values[c])
        return float(self.profile.values[c, c])


def _half_window_mask(f: GridFunction, window: float) -> np.ndarray:
    xs = f.coords()
    keep = np.abs(xs) <= window * f.L + 1e-12
    if f.n == 1:
        return keep
    return keep[:, None] & keep[None, :]


def expander_residual(params: KernelParams, f: GridFunction,
                      cfg: QuadratureConfig | None = None,
                      threads: int = 1) -> np.ndarray:
    """Pointwise u - y . Du + sqrt(1 + |Du|^2) H_s[u] (centered gradients).

    Zero at an expanding profile; for an affine u = a.x + b it collapses to
    the constant b, and on a raw cone it equals sqrt(1 + C^2) H_s < 0 away
    from the tip.
    """
    field = hs_field(params, f, cfg, threads=threads)
    grad = gradient_field(f)
    xs = f.coords()
    if f.n == 1:
        radial = xs * grad
        slope2 = grad * grad
    else:
        radial = xs[:, None] * grad[..., 0] + xs[None, :] * grad[..., 1]
        slope2 = grad[..., 0] ** 2 + grad[..., 1] ** 2
    return f.values - radial + np.sqrt(1.0 + slope2) * field.values


def shrinker_residual(params: KernelParams, f: GridFunction, c: float,
                      cfg: QuadratureConfig | None = None,
                      threads: int = 1) -> np.ndarray:
    """Pointwise c (u - x . Du)/sqrt(1 + |Du|^2) - H_s[u]."""
    if c < 0:
        raise ValueError(f"shrinker coefficient must be >= 0, got {c!r}")
    field = hs_field(params, f, cfg, threads=threads)
    grad = gradient_field(f)
    xs = f.coords()
    if f.n == 1:
        radial = xs * grad
        slope2 = grad * grad
    else:
        radial = xs[:, None] * grad[..., 0] + xs[None, :] * grad[..., 1]
        slope2 = grad[..., 0] ** 2 + grad[..., 1] ** 2
    geom = (f.values - radial) / np.sqrt(1.0 + slope2)
    return c * geom - field.values


def solve_expander(params: KernelParams, cone: Cone, L: float, h: float, *,
                   tol: float = 2e-4, max_iter: int = 500_000,
                   control: StepControl = StepControl(),
                   cfg: QuadratureConfig | None = None,
                   u0: GridFunction | None = None,
                   matching_tol: float = 0.5,
                   refresh_every: int = 500,
                   threads: int = 1) -> ExpanderProfile:
    """Relax the rescaled flow from the cone to its fixed point.

    Stops when the sup-norm change per unit tau falls below tol (the Cauchy
    rate, which for the explicit step equals the profile-equation residual);
    u0 warm-starts the relaxation from e.g. a coarser solve.  Raises
    ConvergenceError carrying the last rate if max_iter is exhausted.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if u0 is None:
        f0 = GridFunction(
            n=params.n, L=L, h=h,
            values=_cone_value(cone, _grid_points(params.n, L, h), params.n),
            far_field=cone, matching_tol=matching_tol,
        )
    else:
        if u0.n != params.n:
            raise ValueError("warm start has the wrong dimension")
        f0 = GridFunction(
            n=params.n, L=L, h=h,
            values=_resample(u0, L, h),
            far_field=cone, matching_tol=matching_tol,
        )
    state = FlowState(params=params, f=f0, time=0.0, rescaled=True)
    dt = stable_dt(state, control, "accurate")
    rate = math.inf
    iterations = 0
    while iterations < max_iter:
        if refresh_every > 0 and iterations > 0 and iterations % refresh_every == 0:
            dt = stable_dt(state, control, "accurate")
        new = step(state, dt, cfg, "accurate", threads)
        rate = float(np.max(np.abs(new.f.values - state.f.values))) / dt
        state = new
        iterations += 1
        if rate < tol:
            break
    else:
        raise ConvergenceError(
            f"expander relaxation still moving at rate {rate:g} > tol {tol:g} "
            f"after {max_iter} steps", rate,
        )
    resid = expander_residual(params, state.f, cfg, threads=threads)
    mask = _half_window_mask(state.f, 0.5)
    return ExpanderProfile(
        profile=state.f,
        residual_sup=float(np.max(np.abs(resid[mask]))),
        iterations=iterations,
        source_cone=cone,
        params=params,
    )


def _grid_points(n: int, L: float, h: float):
    npts = int(round(2 * L / h)) + 1
    xs = -L + h * np.arange(npts)
    if n == 1:
        return xs
    X0, X1 = np.meshgrid(xs, xs, indexing="ij")
    return np.stack([X0, X1], axis=-1)


def _resample(f: GridFunction, L: float, h: float) -> np.ndarray:
    return evaluate(f, _grid_points(f.n, L, h))


@dataclass(frozen=True)
class ShrinkerScan:
    """Sup residual of the shrinker equation over a sweep of c."""

    cs: np.ndarray
    sup_residuals: np.ndarray
    curvature_scale: float
    window: float

    @property
    def min_sup(self) -> float:
        return float(np.min(self.sup_residuals))


def scan_shrinker(params: KernelParams, f: GridFunction,
                  cs=None, cfg: QuadratureConfig | None = None,
                  window: float = 0.5, threads: int = 1) -> ShrinkerScan:
    """Sweep c over [0, 2] (step 0.05 by default): sup |c geom - H_s| on the
    half window, plus the curvature scale sup|H_s| the rigidity test is
    measured against.  H_s is evaluated once; the sweep is vectorized."""
    if cs is None:
        cs = np.arange(0.0, 2.0 + 1e-9, 0.05)
    cs = np.asarray(cs, dtype=float)
    field = hs_field(params, f, cfg, threads=threads)
    grad = gradient_field(f)
    xs = f.coords()
    if f.n == 1:
        radial = xs * grad
        slope2 = grad * grad
    else:
        radial = xs[:, None] * grad[..., 0] + xs[None, :] * grad[..., 1]
        slope2 = grad[..., 0] ** 2 + grad[..., 1] ** 2
    geom = (f.values - radial) / np.sqrt(1.0 + slope2)
    mask = _half_window_mask(f, window)
    g = geom[mask]
    hv = field.values[mask]
    sups = np.array([float(np.max(np.abs(c * g - hv))) for c in cs])
    return ShrinkerScan(
        cs=cs, sup_residuals=sups,
        curvature_scale=float(np.max(np.abs(hv))), window=window,
    )


def homothety_check(params: KernelParams, profile: GridFunction, snapshots, *,
                    c: float = 1.0, t_start: float = 1.0,
                    window: float = 0.5) -> dict:
    """Sup deviation of each snapshot from lambda(t) profile(x/lambda(t)),
    lambda(t) = (c (s+1)(t - t_start) + 1)^(1/(s+1)), on the half window."""
    s = params.s
    out = {}
    for t in sorted(snapshots):
        g = snapshots[t]
        lam = (c * (s + 1.0) * (t - t_start) + 1.0) ** (1.0 / (s + 1.0))
        mask = _half_window_mask(g, window)
        pts = _grid_points(g.n, g.L, g.h)
        ref = lam * evaluate(profile, pts / lam)
        out[t] = float(np.max(np.abs((g.values - ref)[mask])))
    return out


def save_expander_profile(prof: ExpanderProfile, basepath) -> tuple:
    """Write basepath.csv (grid samples) + basepath.json (cone, s, n,
    residual_sup, iterations, profile_at_origin, grid header)."""
    base = Path(basepath)
    csv_path, _ = save_gridfunction(prof.profile, base)
    meta = {
        "source_cone": [float(v) for v in prof.source_cone.profile_values],
        "s": prof.params.s,
        "n": prof.params.n,
        "L": prof.profile.L,
        "h": prof.profile.h,
        "matching_tol": prof.profile.matching_tol,
        "residual_sup": prof.residual_sup,
        "iterations": prof.iterations,
        "profile_at_origin": prof.value_at_origin,
    }
    json_path = base.with_suffix(".json")
    json_path.write_text(json_dumps(meta) + "\n")
    return csv_path, json_path


def load_expander_profile(basepath) -> ExpanderProfile:
    base = Path(basepath)
    meta = json.loads(base.with_suffix(".json").read_text())
    n = meta["n"]
    npts = int(round(2 * meta["L"] / meta["h"])) + 1
    raw = np.loadtxt(base.with_suffix(".csv"), delimiter=",", skiprows=1)
    vals = raw[:, -1].reshape((npts,) if n == 1 else (npts, npts))
    cone = Cone(profile_values=np.asarray(meta["source_cone"], dtype=float))
    f = GridFunction(
        n=n, L=meta["L"], h=meta["h"], values=vals, far_field=cone,
        matching_tol=meta["matching_tol"],
    )
    return ExpanderProfile(
        profile=f,
        residual_sup=meta["residual_sup"],
        iterations=meta["iterations"],
        source_cone=cone,
        params=KernelParams(n=n, s=meta["s"]),
    )
