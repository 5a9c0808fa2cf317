"""Named desk-scale scenarios with pass/fail verdicts.

Each scenario builds data, evolves it, measures monitor quantities and
compares them against theorem-shaped bounds; ``pass`` means every bounded
quantity landed at or under its bound.  ``measured`` may carry extra
informational entries with no bound attached.

Conventions shared by the scenarios: "locally uniform" quantities are
measured on the half window |x| <= L/2; C^1 closeness is sup-norm of the
difference plus sup-norm of the centered-gradient difference; the subgraph
Hausdorff distance is replaced by its sup-norm upper proxy (graph_distance).
Strict-decrease claims are recorded as violation counts with bound 0, and
monotone-decay checks stop at a small floor (quantization or solver
tolerance) below which consecutive differences are pure rounding noise.

Reports deliberately omit the thread count and output directory: identical
scenario configs must produce byte-identical reports regardless of either.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from ._fmt import fmt17, json_dumps
from .kernel import KernelParams, unit_ball_curvature
from .gridfield import (
    Affine,
    Cone,
    GridFunction,
    Periodic,
    evaluate,
    from_callable,
    gradient_field,
    save_gridfunction,
)
from .curvature import QuadratureConfig, hs_at, hs_field
from .flow import FlowState, StepControl, Trajectory, evolve, time_rescale
from .selfsimilar import ExpanderProfile, scan_shrinker, solve_expander

__all__ = [
    "SCENARIOS",
    "ScenarioConfig",
    "Verdict",
    "run_scenario",
    "graph_distance",
    "decay_fit",
    "holder_modulus",
    "cached_expander",
]

SCENARIOS = (
    "plane_stability",
    "periodic_decay",
    "bump_decay",
    "cone_convergence",
    "straight_perturbation",
    "convex_cone_unrescaled",
    "shrinker_rigidity",
    "holder_modulus",
)

# Per-scenario defaults: window, spacing, horizon (plain time, or the
# rescaled time for the rescaled pipelines), snapshot cadence, extras.
_DEFAULTS = {
    "plane_stability": dict(
        L=4.5, h=2.0 ** -6, horizon=1.0, snapshot_spacing=None,
        extras=dict(amplitude=1.0),
    ),
    "periodic_decay": dict(
        L=0.5, h=2.0 ** -7, horizon=5.0, snapshot_spacing=None,
        extras=dict(amplitude=0.5),
    ),
    "bump_decay": dict(
        L=4.5, h=2.0 ** -6, horizon=0.5, snapshot_spacing=0.05,
        extras=dict(amplitude=1.0, epsilon=0.05),
    ),
    "cone_convergence": dict(
        L=3.0, h=2.0 ** -5, horizon=6.0, snapshot_spacing=0.5,
        extras=dict(slope=0.5, solver_tol=2e-4),
    ),
    "straight_perturbation": dict(
        L=3.0, h=2.0 ** -5, horizon=6.0, snapshot_spacing=0.5,
        extras=dict(slope=0.5, solver_tol=2e-4, pert_K=0.5, pert_delta=1.0),
    ),
    "convex_cone_unrescaled": dict(
        L=3.0, h=2.0 ** -5, horizon=4.0, snapshot_spacing=None,
        extras=dict(slope=0.5, solver_tol=2e-4),
    ),
    "shrinker_rigidity": dict(
        L=3.0, h=2.0 ** -5, horizon=0.0, snapshot_spacing=None,
        extras=dict(slope=0.5, solver_tol=2e-4, c_max=2.0, c_step=0.05),
    ),
    "holder_modulus": dict(
        L=3.0, h=2.0 ** -5, horizon=2.0, snapshot_spacing=0.25,
        extras=dict(slope=0.5),
    ),
}

_EXTRA_RANGES = {
    "amplitude": lambda v: v >= 0,
    "epsilon": lambda v: v > 0,
    "slope": lambda v: v > 0,
    "solver_tol": lambda v: v > 0,
    "pert_K": lambda v: v >= 0,
    "pert_delta": lambda v: 0 < v <= 1,
    "c_max": lambda v: v > 0,
    "c_step": lambda v: v > 0,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """One named run; None fields fall back to the scenario defaults."""

    name: str
    s: float = 0.5
    n: int = 1
    L: float | None = None
    h: float | None = None
    horizon: float | None = None
    cfl: float = 0.5
    outer_radius: float | None = None
    snapshot_spacing: float | None = None
    threads: int = 1
    out_dir: str | Path | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.name!r}; expected one of {', '.join(SCENARIOS)}"
            )
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0,1), got {self.s!r}")
        if self.n != 1:
            raise ValueError("scenario pipelines are one-dimensional (n=1); "
                             "n=2 is exercised at the operator level")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0,1], got {self.cfl!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads!r}")
        for name in ("L", "h", "horizon", "outer_radius", "snapshot_spacing"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        allowed = set(_DEFAULTS[self.name]["extras"])
        for k, v in self.extras.items():
            if k not in allowed:
                raise ValueError(
                    f"unknown extra {k!r} for {self.name}; allowed: {sorted(allowed)}"
                )
            if not _EXTRA_RANGES[k](float(v)):
                raise ValueError(f"extra {k}={v!r} out of range")
        object.__setattr__(self, "extras", {k: float(v) for k, v in self.extras.items()})


@dataclass(frozen=True)
class Verdict:
    """pass <=> every quantity with a bound satisfies measured <= bound."""

    scenario: str
    params: dict
    measured: dict
    bounds: dict
    artifacts: tuple
    passed: bool


def _resolved(cfg: ScenarioConfig) -> SimpleNamespace:
    d = _DEFAULTS[cfg.name]
    extras = dict(d["extras"])
    extras.update(cfg.extras)
    return SimpleNamespace(
        L=cfg.L if cfg.L is not None else d["L"],
        h=cfg.h if cfg.h is not None else d["h"],
        horizon=cfg.horizon if cfg.horizon is not None else d["horizon"],
        snapshot_spacing=(cfg.snapshot_spacing if cfg.snapshot_spacing is not None
                          else d["snapshot_spacing"]),
        outer_radius=cfg.outer_radius,
        extras=extras,
    )


def _qcfg(outer_radius) -> QuadratureConfig | None:
    return None if outer_radius is None else QuadratureConfig(outer_radius=outer_radius)


def _params_echo(cfg: ScenarioConfig, r: SimpleNamespace) -> dict:
    # thread count and out_dir intentionally omitted (byte-identical reports).
    return {
        "name": cfg.name, "s": cfg.s, "n": cfg.n, "L": r.L, "h": r.h,
        "horizon": r.horizon, "cfl": cfg.cfl, "outer_radius": r.outer_radius,
        "snapshot_spacing": r.snapshot_spacing,
        "extras": {k: r.extras[k] for k in sorted(r.extras)},
    }


def _window_mask(f: GridFunction, frac: float) -> np.ndarray:
    xs = f.coords()
    if f.n == 1:
        return np.abs(xs) <= frac * f.L + 1e-12
    rr = np.hypot(xs[:, None], xs[None, :])
    return rr <= frac * f.L + 1e-12


def _pins() -> dict | None:
    path = Path(__file__).parent / "data" / "oracle_pins.json"
    if not path.exists():
        return None
    return json.loads(path.read_text())


def _pin_hs(pins, case: str, x: float, s: float) -> float | None:
    for row in pins.get("hs", ()):
        if row["case"] == case and row["x"] == x and row["s"] == s:
            return float(row["value"])
    return None


def _pin_cbar(pins, dim: int, s: float) -> float | None:
    for row in pins.get("cbar", ()):
        if row["ambient_dim"] == dim and row["s"] == s and row["radius"] == 1.0:
            return float(row["value"])
    return None


# ---------------------------------------------------------------------------
# measurement ops


def graph_distance(u: GridFunction, v: GridFunction) -> float:
    """sup |u - v| over the shared grid (upper proxy for subgraph Hausdorff)."""
    if (u.n, u.L, u.h) != (v.n, v.L, v.h) or u.values.shape != v.values.shape:
        raise ValueError(
            f"grid mismatch: (n,L,h)=({u.n},{u.L:g},{u.h:g}) vs ({v.n},{v.L:g},{v.h:g})"
        )
    return float(np.max(np.abs(u.values - v.values)))


def decay_fit(traj: Trajectory, quantity: str) -> tuple:
    """Least-squares slope of log(quantity) against time -> (rate, r^2)."""
    t = traj.column("time")
    q = traj.column(quantity)
    if len(q) < 10:
        raise ValueError(f"decay_fit needs at least 10 samples, got {len(q)}")
    if np.any(q <= 0):
        raise ValueError(f"decay_fit({quantity}): nonpositive samples present")
    logq = np.log(q)
    slope, intercept = np.polyfit(t, logq, 1)
    resid = logq - (slope * t + intercept)
    sstot = float(np.sum((logq - logq.mean()) ** 2))
    r2 = 1.0 if sstot < 1e-28 else 1.0 - float(np.sum(resid ** 2)) / sstot
    return float(slope), float(r2)


def holder_modulus(snapshots, exponent: float, *, window: float | None = None) -> float:
    """max over snapshot pairs of sup|u(t) - u(r)| / |t - r|^exponent.

    window (fraction of L) restricts the sup to |x| <= window*L.
    """
    if len(snapshots) < 3:
        raise ValueError(f"holder_modulus needs at least 3 snapshots, got {len(snapshots)}")
    items = sorted(snapshots.items())
    fields = [f.f if isinstance(f, FlowState) else f for _, f in items]
    mask = None if window is None else _window_mask(fields[0], window)
    best = 0.0
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            dt = abs(items[j][0] - items[i][0])
            if dt == 0.0:
                continue
            diff = np.abs(fields[j].values - fields[i].values)
            sup = float(np.max(diff if mask is None else diff[mask]))
            best = max(best, sup / dt ** exponent)
    return best


# ---------------------------------------------------------------------------
# expander profile cache (one pinned relaxation schedule, warm-started in h)

_PROFILE_CACHE: dict = {}
_SOLVER_CFL = 0.9
_COARSEST_H = 2.0 ** -4


def cached_expander(s: float, slope: float, L: float, h: float, *,
                    tol: float = 2e-4, outer_radius: float | None = None,
                    threads: int = 1) -> ExpanderProfile:
    """Expander of slope*|x| on the (L, h) grid, warm-started down from h=2^-4.

    The relaxation schedule (cfl, warm-start chain, tolerance) is pinned so
    the stored profile is reproducible; results are cached per parameter key.
    """
    key = (round(s, 12), round(slope, 12), round(L, 12), round(h, 12), tol,
           outer_radius)
    if key in _PROFILE_CACHE:
        return _PROFILE_CACHE[key]
    cone = Cone(profile_values=np.array([slope, slope]))
    cfg = _qcfg(outer_radius)
    control = StepControl(cfl=_SOLVER_CFL)
    hs = [h]
    while hs[-1] < _COARSEST_H - 1e-15:
        hs.append(hs[-1] * 2.0)
    warm = None
    for level in reversed(hs):
        lkey = (key[0], key[1], key[2], round(level, 12), tol, outer_radius)
        if lkey in _PROFILE_CACHE:
            prof = _PROFILE_CACHE[lkey]
        else:
            prof = solve_expander(KernelParams(n=1, s=s), cone, L=L, h=level,
                                  tol=tol, cfg=cfg, control=control, u0=warm,
                                  matching_tol=5.0, threads=threads)
            _PROFILE_CACHE[lkey] = prof
        warm = prof.profile
    return _PROFILE_CACHE[key]


# ---------------------------------------------------------------------------
# scenario pipelines


# Evolved states legitimately drift away from the asymptotic model near the
# window rim (truncation), so scenario data carries a run-sized matching
# tolerance instead of the tight construction default; gross model errors
# are still O(1) and still caught.
_RUN_MATCHING_TOL = 0.05
_CONE_MATCHING_TOL = 0.5  # rim gap of the relaxed profile, ~0.05 at L=3, x10


def _gaussian(amp: float, L: float, h: float) -> GridFunction:
    return from_callable(lambda x: amp * np.exp(-(x ** 2)), 1, L, h,
                         Affine((0.0,), 0.0), matching_tol=_RUN_MATCHING_TOL)


def _cone_field(slope: float, L: float, h: float) -> GridFunction:
    cone = Cone(profile_values=np.array([slope, slope]))
    return from_callable(lambda x: slope * np.abs(x), 1, L, h, cone,
                         matching_tol=_CONE_MATCHING_TOL)


def _lipschitz_excess(traj: Trajectory, h: float) -> float:
    lip = traj.column("lipschitz")
    return float(max(0.0, np.max(lip) - (lip[0] + 10.0 * h)))


def _plane_stability(cfg, r):
    p = KernelParams(n=1, s=cfg.s)
    amp = r.extras["amplitude"]
    f0 = _gaussian(amp, r.L, r.h)
    qcfg = _qcfg(r.outer_radius)
    final, traj, _ = evolve(FlowState(p, f0), r.horizon, StepControl(cfl=cfg.cfl),
                            qcfg, mode="monotone", refresh_every=50,
                            threads=cfg.threads)
    sup = traj.column("sup")
    inf = traj.column("inf")
    measured = {
        "sup_increase_count": float(np.sum(np.diff(sup) > 0.0)),
        # the flat plane is itself a discrete solution sharing the window's
        # ghost values, so staying above it is exact; the infimum itself
        # legitimately drifts back toward the far-field height as the bump
        # spreads, so only undershoot below the plane is a violation.
        "inf_undershoot": float(max(0.0, -np.min(inf))),
        "lipschitz_excess": _lipschitz_excess(traj, r.h),
        "sup_final": float(sup[-1]),
    }
    bounds = {"sup_increase_count": 0.0, "inf_undershoot": 1e-12,
              "lipschitz_excess": 0.0}

    pins = _pins()
    center = f0.npoints // 2
    if pins is not None and amp == 1.0:
        pin = _pin_hs(pins, "gaussian", 0.0, cfg.s)
        if pin is not None:
            measured["err_hs_origin"] = abs(hs_at(p, f0, center, qcfg) - pin)
            if r.h <= 2.0 ** -6 + 1e-15:
                bounds["err_hs_origin"] = 1e-4

    # dilation consistency at the origin: x -> x/2 halves the window and
    # maps the scheme onto itself, so this difference is a pure refinement
    # gap and must shrink with h.
    if f0.npoints % 4 == 1:
        vals_half = f0.values[::2] / 2.0
        sub_r = None if r.outer_radius is None else r.outer_radius / 2.0
        fh = GridFunction(1, r.L / 2.0, r.h, vals_half, Affine((0.0,), 0.0))
        measured["err_scaling"] = abs(
            hs_at(p, fh, fh.npoints // 2, _qcfg(sub_r))
            - 2.0 ** cfg.s * hs_at(p, f0, center, qcfg))
    return measured, bounds, traj, {}


def _periodic_decay(cfg, r):
    p = KernelParams(n=1, s=cfg.s)
    amp = r.extras["amplitude"]
    f0 = from_callable(lambda x: amp * np.sin(2.0 * math.pi * x), 1, r.L, r.h,
                       Periodic(period=2.0 * r.L))
    final, traj, _ = evolve(FlowState(p, f0), r.horizon, StepControl(cfl=cfg.cfl),
                            _qcfg(r.outer_radius), mode="monotone",
                            refresh_every=200, threads=cfg.threads)
    osc = traj.column("oscillation")
    # below ~1e-12 consecutive oscillation differences are rounding noise
    live = int(np.argmax(osc <= 1e-12)) if np.any(osc <= 1e-12) else len(osc)
    live = max(live, 2)
    sup_abs = np.maximum(np.abs(traj.column("sup")), np.abs(traj.column("inf")))
    measured = {
        "osc_increase_count": float(np.sum(np.diff(osc[:live]) >= 0.0)),
        "lipschitz_excess": _lipschitz_excess(traj, r.h),
        "final_sup": float(sup_abs[-1]),
        "osc_final": float(osc[-1]),
        "plateau_rows": float(len(osc) - live),
    }
    bounds = {"osc_increase_count": 0.0, "lipschitz_excess": 0.0,
              "final_sup": 1e-2}
    if live >= 10:
        fit = Trajectory(rows=list(traj.rows[:live]), columns=traj.columns)
        rate, r2 = decay_fit(fit, "oscillation")
        measured["fit_rate"] = rate
        measured["fit_r2_deficit"] = 0.99 - r2
        bounds["fit_rate"] = 0.0
        bounds["fit_r2_deficit"] = 0.0
    return measured, bounds, traj, {}


def _bump_decay(cfg, r):
    p = KernelParams(n=1, s=cfg.s)
    amp, eps = r.extras["amplitude"], r.extras["epsilon"]
    f0 = _gaussian(amp, r.L, r.h)
    qcfg = _qcfg(r.outer_radius)
    times = np.arange(r.snapshot_spacing, r.horizon + 1e-12, r.snapshot_spacing)
    final, traj, snaps = evolve(FlowState(p, f0), r.horizon,
                                StepControl(cfl=cfg.cfl), qcfg, mode="monotone",
                                refresh_every=0, snapshot_times=times,
                                threads=cfg.threads)

    xs = f0.coords()
    over = np.abs(f0.values) > eps
    radius = float(np.max(np.abs(xs[over]))) if np.any(over) else 0.0

    pins = _pins()
    cbar_fast = unit_ball_curvature(cfg.n + 1, cfg.s)
    cbar_pin = _pin_cbar(pins, cfg.n + 1, cfg.s) if pins is not None else None
    cbar = cbar_pin if cbar_pin is not None else cbar_fast

    # pointwise barrier above radius: u <= eps + cbar 2^{s/(s+1)} t/(|x|-R)^s
    # for t up to (|x|-R)^{s+1} / (2 (s+1) cbar)
    s = cfg.s
    violations = 0
    checked = 0
    gap = np.abs(xs) - radius
    sel = gap > 0
    tmax = np.zeros_like(gap)
    tmax[sel] = gap[sel] ** (1.0 + s) / (2.0 * (1.0 + s) * cbar)
    for t, g in sorted(snaps.items()):
        valid = sel & (t <= tmax)
        rhs = eps + cbar * 2.0 ** (s / (s + 1.0)) * t / np.where(valid, gap, 1.0) ** s
        violations += int(np.sum(g.values[valid] > rhs[valid] + 1e-12))
        checked += int(np.sum(valid))

    supw = traj.column("sup_w")[1:]
    measured = {
        "barrier_violations": float(violations),
        "barrier_points": float(checked),
        "barrier_radius": radius,
        "cbar": cbar,
        "supw_increase_excess": float(max(0.0, np.max(np.diff(supw))))
        if len(supw) > 1 else 0.0,
        "lipschitz_excess": _lipschitz_excess(traj, r.h),
        "sup_final": float(traj.column("sup")[-1]),
    }
    bounds = {"barrier_violations": 0.0, "supw_increase_excess": 1e-6,
              "lipschitz_excess": 0.0}
    if cbar_pin is not None:
        measured["cbar_vs_fast"] = abs(cbar_pin - cbar_fast)
        bounds["cbar_vs_fast"] = 1e-8
    return measured, bounds, traj, {f"t{t:.6f}": g for t, g in snaps.items()}


def _rescaled_to_profile(cfg, r, f0, prof):
    """Shared rescaled-relaxation leg: evolve f0, track distance to profile."""
    p = KernelParams(n=1, s=cfg.s)
    qcfg = _qcfg(r.outer_radius)
    times = np.arange(0.0, r.horizon + 1e-12, r.snapshot_spacing)
    final, traj, snaps = evolve(FlowState(p, f0, rescaled=True), r.horizon,
                                StepControl(cfl=cfg.cfl), qcfg, mode="accurate",
                                refresh_every=200, snapshot_times=times,
                                threads=cfg.threads)
    mask = _window_mask(prof.profile, 0.5)
    dists, grad_dists = {}, {}
    gp = gradient_field(prof.profile)
    for tau, g in sorted(snaps.items()):
        diff = np.abs(g.values - prof.profile.values)
        dists[tau] = float(np.max(diff[mask]))
        gdiff = np.abs(gradient_field(g) - gp)
        grad_dists[tau] = float(np.max(gdiff[mask]))

    taus = sorted(dists)
    floor = 5.0 * r.extras["solver_tol"]
    inc = 0
    for a, b in zip(taus, taus[1:]):
        if a >= 1.0 - 1e-12 and max(dists[a], dists[b]) > floor:
            inc += int(dists[b] > dists[a])
    measured = {
        "dist_initial": dists[taus[0]],
        "dist_final": dists[taus[-1]],
        "grad_dist_final": grad_dists[taus[-1]],
        "dist_increase_count_after_1": float(inc),
        "lipschitz_excess": _lipschitz_excess(traj, r.h),
        "profile_residual": prof.residual_sup,
        "profile_origin": prof.value_at_origin,
    }
    for tau in taus:
        measured[f"dist_tau{tau:g}"] = dists[tau]
    bounds = {"dist_final": 1e-2, "dist_increase_count_after_1": 0.0,
              "lipschitz_excess": 0.0, "grad_dist_final": 1e-3}
    snap_fields = {f"tau{t:.6f}": g for t, g in snaps.items()}
    return measured, bounds, traj, snap_fields, dists


def _cone_convergence(cfg, r):
    prof = cached_expander(cfg.s, r.extras["slope"], r.L, r.h,
                           tol=r.extras["solver_tol"],
                           outer_radius=r.outer_radius, threads=cfg.threads)
    f0 = _cone_field(r.extras["slope"], r.L, r.h)
    measured, bounds, traj, snaps, _ = _rescaled_to_profile(cfg, r, f0, prof)
    return measured, bounds, traj, snaps


def _perturbed_cone(slope, K, delta, L, h) -> GridFunction:
    r1, r2 = L / 6.0, 0.4 * L
    cone = Cone(profile_values=np.array([slope, slope]),
                envelope=(K, delta) if K > 0 else None)

    def data(x):
        a = np.abs(x)
        ramp = np.clip((a - r1) / (r2 - r1), 0.0, 1.0)
        taper = np.cos(0.5 * math.pi * ramp) ** 2
        return slope * a + K * (1.0 + a) ** (1.0 - delta) * taper

    return from_callable(data, 1, L, h, cone, matching_tol=_CONE_MATCHING_TOL)


def _straight_perturbation(cfg, r):
    prof = cached_expander(cfg.s, r.extras["slope"], r.L, r.h,
                           tol=r.extras["solver_tol"],
                           outer_radius=r.outer_radius, threads=cfg.threads)
    f0 = _perturbed_cone(r.extras["slope"], r.extras["pert_K"],
                         r.extras["pert_delta"], r.L, r.h)
    measured, bounds, traj, snaps, _ = _rescaled_to_profile(cfg, r, f0, prof)
    return measured, bounds, traj, snaps


def _convex_cone_unrescaled(cfg, r):
    # A plain-time run of an expanding cone on a fixed window is inconsistent:
    # the graph rises like lam(t) while the window's far-field model stays
    # put, so the rim mismatch grows without bound.  Everything here is
    # therefore computed in the self-similar chart, where the cone far field
    # is consistent for all tau, and plain-time quantities come out of the
    # exact identity u(x, t) = lam * u~(x/lam, tau(t)).
    p = KernelParams(n=1, s=cfg.s)
    s = cfg.s
    slope = r.extras["slope"]
    qcfg = _qcfg(r.outer_radius)
    prof = cached_expander(s, slope, r.L, r.h, tol=r.extras["solver_tol"],
                           outer_radius=r.outer_radius, threads=cfg.threads)
    f0 = _cone_field(slope, r.L, r.h)

    # a straight cone is globally convex, ghosts included, so the
    # dropped-cell curvature starts out nonpositive at every node exactly
    drop_cfg = (replace(qcfg, singular_cell_mode="drop") if qcfg is not None
                else QuadratureConfig(singular_cell_mode="drop"))
    hs_sup_initial = float(
        np.max(hs_field(p, f0, drop_cfg, threads=cfg.threads).values))

    # leg 1, order-preserving scheme: the damping/drift pair vanishes on
    # cones, so the first update moves nowhere down, and induction through
    # the monotone update keeps every later state above the previous one -
    # the one-directional-motion claim, configuration by configuration.
    t_marks = [0.5, 1.0, 2.0, r.horizon]
    taus = [time_rescale(t, s) for t in t_marks]
    final_m, traj_m, snaps_m = evolve(FlowState(p, f0, rescaled=True),
                                      taus[-1], StepControl(cfl=cfg.cfl),
                                      qcfg, mode="monotone",
                                      refresh_every=100,
                                      snapshot_times=taus,
                                      threads=cfg.threads)
    fields_m = [f0] + [snaps_m[tau] for tau in taus]
    drops = 0
    for a, b in zip(fields_m, fields_m[1:]):
        drops += int(np.sum(b.values < a.values))
    hs_sup_relaxed = max(
        float(np.max(hs_field(p, g, drop_cfg, threads=cfg.threads)
                     .values[_window_mask(g, 0.5)]))
        for g in fields_m[1:])

    # leg 2, accurate scheme: quantitative homothety tracking against the
    # stored profile (itself the accurate scheme's fixed point; the dropped
    # -cell leg relaxes to a slightly different state, so distances are
    # measured mode-consistently here); this is also the reported run
    final, traj, snaps = evolve(FlowState(p, f0, rescaled=True), taus[-1],
                                StepControl(cfl=cfg.cfl), qcfg,
                                mode="accurate", refresh_every=100,
                                snapshot_times=taus, threads=cfg.threads)

    # homothety distance and the curvature band in plain-time units
    W = 0.5 * r.L
    ys = prof.profile.coords()
    dists, band = {}, {}
    for t, tau in zip(t_marks, taus):
        lam = (1.0 + (1.0 + s) * t) ** (1.0 / (1.0 + s))
        g = snaps[tau]
        mask = np.abs(ys) <= W / lam + 1e-12
        dists[t] = lam * float(np.max(np.abs(g.values - prof.profile.values)[mask]))
        vals = np.abs(hs_field(p, g, qcfg, threads=cfg.threads).values)
        band[t] = lam ** (-s) * float(np.max(vals[mask])) * t ** (s / (1.0 + s))

    seq = [dists[t] for t in t_marks]
    measured = {
        "pointwise_decrease_count": float(drops),
        "hs_sup_initial": hs_sup_initial,
        "hs_sup_relaxed": hs_sup_relaxed,
        "band_ratio": max(band.values()) / min(band.values()),
        "dist_increase_count": float(sum(b > a for a, b in zip(seq, seq[1:]))),
        "dist_final": seq[-1],
        "lipschitz_excess": _lipschitz_excess(traj, r.h),
        "lipschitz_excess_monotone": _lipschitz_excess(traj_m, r.h),
    }
    for t in t_marks:
        measured[f"dist_t{t:g}"] = dists[t]
    bounds = {"pointwise_decrease_count": 0.0, "hs_sup_initial": 1e-12,
              "hs_sup_relaxed": 2e-3, "band_ratio": 2.0,
              "dist_increase_count": 0.0, "dist_final": 5e-2,
              "lipschitz_excess": 0.0, "lipschitz_excess_monotone": 0.0}
    snap_fields = {f"tau{tau:.6f}": snaps[tau] for tau in taus}
    return measured, bounds, traj, snap_fields


def _shrinker_rigidity(cfg, r):
    p = KernelParams(n=1, s=cfg.s)
    prof = cached_expander(cfg.s, r.extras["slope"], r.L, r.h,
                           tol=r.extras["solver_tol"],
                           outer_radius=r.outer_radius, threads=cfg.threads)
    cs = np.arange(0.0, r.extras["c_max"] + 1e-9, r.extras["c_step"])
    qcfg = _qcfg(r.outer_radius)
    scan = scan_shrinker(p, prof.profile, cs=cs, cfg=qcfg, window=0.5,
                         threads=cfg.threads)
    f_aff = from_callable(lambda x: 0.3 * x + 0.2, 1, r.L, r.h,
                          Affine((0.3,), 0.2))
    scan_aff = scan_shrinker(p, f_aff, cs=cs, cfg=qcfg, window=0.5,
                             threads=cfg.threads)
    ratio = scan.min_sup / scan.curvature_scale
    measured = {
        "rigidity_deficit": max(0.0, 0.1 - ratio),
        "min_over_scale": ratio,
        "curvature_scale": scan.curvature_scale,
        "affine_min_sup": scan_aff.min_sup,
    }
    bounds = {"rigidity_deficit": 0.0, "affine_min_sup": 1e-8}
    scan_rows = list(zip(scan.cs, scan.sup_residuals))
    return measured, bounds, None, {}, scan_rows


def _holder_modulus(cfg, r):
    # run in the self-similar chart (the plain-time window is inconsistent
    # for expanding data, see _convex_cone_unrescaled) and map the snapshots
    # back through u(x, t) = lam * u~(x/lam, tau(t)); near the tip the true
    # solution sits far above the asymptotic cone, so the mapped fields carry
    # a wide matching tolerance.
    p = KernelParams(n=1, s=cfg.s)
    s = cfg.s
    slope = r.extras["slope"]
    # the tip-speed constant is strongly window-limited: truncating the
    # profile equation to |y| <= L biases the origin value down (measured
    # 1.25 / 1.55 / 2.04 / 2.17 for L = 2 / 3 / 8 / 16 at s = 1/2), while
    # refining h barely moves it, so the constant comes from a wide coarse
    # solve rather than from this scenario's own window
    wide = cached_expander(s, slope, 16.0, 2.0 ** -4, tol=1e-3,
                           outer_radius=32.0, threads=cfg.threads)
    f0 = _cone_field(slope, r.L, r.h)
    times = np.arange(r.snapshot_spacing, r.horizon + 1e-12, r.snapshot_spacing)
    taus = [time_rescale(t, s) for t in times]
    final, traj, snaps = evolve(FlowState(p, f0, rescaled=True), taus[-1],
                                StepControl(cfl=cfg.cfl), _qcfg(r.outer_radius),
                                mode="accurate", refresh_every=200,
                                snapshot_times=taus, threads=cfg.threads)
    xs = f0.coords()
    cone_ff = Cone(profile_values=np.array([slope, slope]))
    fields = {0.0: f0}
    for t, tau in zip(times, taus):
        lam = (1.0 + (1.0 + s) * t) ** (1.0 / (1.0 + s))
        vals = lam * evaluate(snaps[tau], xs / lam)
        fields[float(t)] = GridFunction(1, r.L, r.h, vals, cone_ff,
                                        matching_tol=10.0)
    modulus = holder_modulus(fields, 1.0 / (1.0 + s), window=0.5)
    # v(0) for the pure-power expander u = t^b P(x t^-b): P(0) equals
    # (1+s)^(1/(1+s)) times the chart fixed point's origin value
    v_origin = (1.0 + s) ** (1.0 / (1.0 + s)) * wide.value_at_origin
    measured = {
        "modulus": modulus,
        "tip_speed_scale": v_origin,
        "holder_excess": modulus - 1.1 * v_origin,
        "lipschitz_excess": _lipschitz_excess(traj, r.h),
    }
    bounds = {"holder_excess": 0.0, "lipschitz_excess": 0.0}
    return measured, bounds, traj, {f"t{t:.6f}": g for t, g in fields.items()
                                    if t > 0.0}


_RUNNERS = {
    "plane_stability": _plane_stability,
    "periodic_decay": _periodic_decay,
    "bump_decay": _bump_decay,
    "cone_convergence": _cone_convergence,
    "straight_perturbation": _straight_perturbation,
    "convex_cone_unrescaled": _convex_cone_unrescaled,
    "shrinker_rigidity": _shrinker_rigidity,
    "holder_modulus": _holder_modulus,
}


def run_scenario(cfg: ScenarioConfig) -> Verdict:
    """Build -> evolve -> measure -> compare; optionally emit artifacts."""
    r = _resolved(cfg)
    try:
        out = _RUNNERS[cfg.name](cfg, r)
    except Exception as exc:
        raise RuntimeError(f"scenario {cfg.name} failed: {exc}") from exc
    measured, bounds, traj, snap_fields = out[:4]
    scan_rows = out[4] if len(out) > 4 else None

    missing = set(bounds) - set(measured)
    if missing:
        raise RuntimeError(f"scenario {cfg.name}: bounds without measurements {missing}")
    passed = all(measured[k] <= bounds[k] for k in bounds)

    artifacts = []
    if cfg.out_dir is not None:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if traj is not None:
            traj.save_csv(out_dir / "monitors.csv")
            artifacts.append("monitors.csv")
        for name in sorted(snap_fields):
            save_gridfunction(snap_fields[name], out_dir / "snapshots" / name)
            artifacts.append(f"snapshots/{name}.csv")
        if scan_rows is not None:
            lines = ["c,sup_residual"]
            lines += [f"{fmt17(c)},{fmt17(v)}" for c, v in scan_rows]
            (out_dir / "scan.csv").write_text("\n".join(lines) + "\n")
            artifacts.append("scan.csv")

    verdict = Verdict(scenario=cfg.name, params=_params_echo(cfg, r),
                      measured=measured, bounds=bounds,
                      artifacts=tuple(artifacts), passed=passed)
    if cfg.out_dir is not None:
        report = {
            "scenario": verdict.scenario, "params": verdict.params,
            "measured": verdict.measured, "bounds": verdict.bounds,
            "pass": verdict.passed, "artifacts": list(verdict.artifacts),
        }
        (Path(cfg.out_dir) / "report.json").write_text(json_dumps(report) + "\n")
    return verdict
