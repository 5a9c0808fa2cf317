"""Lipschitz graphs as uniform-grid samples with an explicit far-field model.

A GridFunction stores samples of u on the lattice {-L, -L+h, ..., L}^n
together with a rule for evaluating u outside the window: periodic wrap,
affine continuation, or a positively 1-homogeneous cone profile.  The
curvature quadrature reads exterior values through that rule, so a mismatch
between the stored boundary values and the far-field model silently corrupts
tail integrals — construction therefore measures the mismatch and aborts when
it exceeds the declared matching tolerance (default 1e-8*(1+L)).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from ._fmt import fmt17, json_dumps

__all__ = [
    "Periodic",
    "Affine",
    "Cone",
    "FarFieldModel",
    "GridFunction",
    "from_callable",
    "evaluate",
    "gradient",
    "gradient_field",
    "lipschitz_constant",
    "oscillation",
    "save_gridfunction",
    "load_gridfunction",
]


@dataclass(frozen=True)
class Periodic:
    """Periodic extension; the window must span an integer number of periods."""

    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period!r}")


@dataclass(frozen=True)
class Affine:
    """u(x) = slope . x + offset outside the window."""

    slope: tuple
    offset: float = 0.0

    def __post_init__(self):
        slope = self.slope
        if isinstance(slope, (int, float, np.floating)):
            slope = (float(slope),)
        object.__setattr__(self, "slope", tuple(float(a) for a in slope))
        object.__setattr__(self, "offset", float(self.offset))


@dataclass(frozen=True, eq=False)
class Cone:
    """Positively 1-homogeneous extension u0(x) = |x| * profile(x/|x|).

    n=1: ``profile_values`` = (profile(+1), profile(-1)).
    n=2: values of the profile at m uniform angles 2*pi*j/m, interpolated
    linearly in angle.  ``envelope=(K, delta)`` records a straight-at-infinity
    perturbation bound |u0 - data| <= K*(1+|x|)^(1-delta); it is reporting
    metadata only and is never added during evaluation.
    """

    profile_values: np.ndarray
    envelope: tuple | None = None

    def __post_init__(self):
        vals = np.asarray(self.profile_values, dtype=float)
        if vals.ndim != 1 or len(vals) < 2 or not np.all(np.isfinite(vals)):
            raise ValueError("cone profile needs a finite 1-d sample table")
        object.__setattr__(self, "profile_values", vals)
        if self.envelope is not None:
            k, delta = self.envelope
            if not (k > 0 and 0 < delta <= 1):
                raise ValueError(
                    f"cone envelope needs K>0 and delta in (0,1], got {self.envelope!r}"
                )
            object.__setattr__(self, "envelope", (float(k), float(delta)))


FarFieldModel = Union[Periodic, Affine, Cone]


def _cone_value(cone: Cone, x: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        right, left = cone.profile_values[0], cone.profile_values[1]
        return np.where(x >= 0, x * right, -x * left)
    r = np.hypot(x[..., 0], x[..., 1])
    theta = np.arctan2(x[..., 1], x[..., 0]) % (2.0 * math.pi)
    m = len(cone.profile_values)
    pos = theta * m / (2.0 * math.pi)
    j = np.floor(pos).astype(np.int64) % m
    frac = pos - np.floor(pos)
    vals = cone.profile_values
    prof = vals[j] * (1.0 - frac) + vals[(j + 1) % m] * frac
    return r * prof


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples over {-L..L}^n plus the far-field model; immutable once built."""

    n: int
    L: float
    h: float
    values: np.ndarray
    far_field: FarFieldModel
    matching_tol: float | None = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n!r}")
        if not (self.L > 0 and self.h > 0):
            raise ValueError("window halfwidth and spacing must be positive")
        ratio = 2.0 * self.L / self.h
        npts = int(round(ratio))
        if abs(ratio - npts) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"2L/h = {ratio} is not an integer")
        vals = np.asarray(self.values, dtype=float)
        want = (npts + 1,) if self.n == 1 else (npts + 1, npts + 1)
        if vals.shape != want:
            raise ValueError(f"values shape {vals.shape} != lattice shape {want}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", vals)
        if self.matching_tol is None:
            object.__setattr__(self, "matching_tol", 1e-8 * (1.0 + self.L))
        ff = self.far_field
        if isinstance(ff, Periodic):
            cycles = 2.0 * self.L / ff.period
            if abs(cycles - round(cycles)) > 1e-9 * max(1.0, cycles):
                raise ValueError(
                    f"window length {2*self.L} is not a multiple of the period {ff.period}"
                )
        elif isinstance(ff, Affine):
            if len(ff.slope) != self.n:
                raise ValueError("affine slope dimension mismatch")
        elif isinstance(ff, Cone):
            if self.n == 1 and len(ff.profile_values) != 2:
                raise ValueError("n=1 cone stores (profile(+1), profile(-1))")
            if self.n == 2 and len(ff.profile_values) < 8:
                raise ValueError("n=2 cone needs at least 8 angle samples")
        else:
            raise ValueError(f"unknown far-field model {ff!r}")
        mismatch = _boundary_mismatch(self)
        object.__setattr__(self, "boundary_mismatch", mismatch)
        if mismatch > self.matching_tol:
            raise ValueError(
                "far-field mismatch: boundary disagrees with the far-field model "
                f"by {mismatch:g} > matching tolerance {self.matching_tol:g}"
            )

    @property
    def npoints(self) -> int:
        return self.values.shape[0]

    def coords(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.npoints)

    def with_values(self, values: np.ndarray, matching_tol: float | None = None) -> "GridFunction":
        return GridFunction(
            n=self.n, L=self.L, h=self.h, values=values,
            far_field=self.far_field,
            matching_tol=self.matching_tol if matching_tol is None else matching_tol,
        )


def _ff_eval(f: GridFunction, x: np.ndarray) -> np.ndarray:
    """Far-field model evaluated at arbitrary points (no window involved)."""
    ff = f.far_field
    if isinstance(ff, Affine):
        if f.n == 1:
            return ff.slope[0] * x + ff.offset
        return x[..., 0] * ff.slope[0] + x[..., 1] * ff.slope[1] + ff.offset
    if isinstance(ff, Cone):
        return _cone_value(ff, x, f.n)
    raise AssertionError("periodic far field has no free-space formula")


def _boundary_mismatch(f: GridFunction) -> float:
    v = f.values
    if isinstance(f.far_field, Periodic):
        if f.n == 1:
            return abs(v[0] - v[-1])
        return max(
            float(np.max(np.abs(v[0, :] - v[-1, :]))),
            float(np.max(np.abs(v[:, 0] - v[:, -1]))),
        )
    xs = f.coords()
    if f.n == 1:
        pts = np.array([xs[0], xs[-1]])
        return float(np.max(np.abs(v[[0, -1]] - _ff_eval(f, pts))))
    rim_idx = [(0, slice(None)), (-1, slice(None)), (slice(None), 0), (slice(None), -1)]
    worst = 0.0
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    P = np.stack([X, Y], axis=-1)
    for ij in rim_idx:
        worst = max(worst, float(np.max(np.abs(v[ij] - _ff_eval(f, P[ij])))))
    return worst


def from_callable(fn, n, L, h, far_field, matching_tol=None) -> GridFunction:
    npts = int(round(2 * L / h)) + 1
    xs = -L + h * np.arange(npts)
    if n == 1:
        vals = np.asarray(fn(xs), dtype=float)
    else:
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        vals = np.asarray(fn(X, Y), dtype=float)
    return GridFunction(n=n, L=L, h=h, values=vals, far_field=far_field,
                        matching_tol=matching_tol)


def evaluate(f: GridFunction, x):
    """u at arbitrary points: multilinear inside, far-field model outside.

    Multilinear interpolation is monotone in the nodal values, which the
    flow's comparison tests rely on.  Exact at lattice points.
    """
    if f.n == 1:
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        pts = np.atleast_1d(arr).astype(float)
        xs = f.coords()
        if isinstance(f.far_field, Periodic):
            width = 2.0 * f.L
            wrapped = ((pts + f.L) % width) - f.L
            out = np.interp(wrapped, xs, f.values)
        else:
            out = np.interp(np.clip(pts, -f.L, f.L), xs, f.values)
            outside = np.abs(pts) > f.L
            if np.any(outside):
                out = np.where(outside, _ff_eval(f, pts), out)
        return float(out[0]) if scalar else out.reshape(arr.shape)
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1
    P = np.atleast_2d(pts).astype(float).reshape(-1, 2)
    if isinstance(f.far_field, Periodic):
        width = 2.0 * f.L
        Q = ((P + f.L) % width) - f.L
        out = _bilinear(f, Q)
    else:
        inside = np.max(np.abs(P), axis=1) <= f.L
        out = np.empty(len(P))
        if np.any(inside):
            out[inside] = _bilinear(f, P[inside])
        if not np.all(inside):
            out[~inside] = _ff_eval(f, P[~inside])
    if scalar:
        return float(out[0])
    return out.reshape(pts.shape[:-1])


def _bilinear(f: GridFunction, P: np.ndarray) -> np.ndarray:
    g = (P + f.L) / f.h
    nmax = f.npoints - 2
    i = np.clip(np.floor(g[:, 0]).astype(np.int64), 0, nmax)
    j = np.clip(np.floor(g[:, 1]).astype(np.int64), 0, nmax)
    fx = g[:, 0] - i
    fy = g[:, 1] - j
    v = f.values
    return (
        v[i, j] * (1 - fx) * (1 - fy)
        + v[i + 1, j] * fx * (1 - fy)
        + v[i, j + 1] * (1 - fx) * fy
        + v[i + 1, j + 1] * fx * fy
    )


def _padded(f: GridFunction) -> np.ndarray:
    """values extended by one ghost layer from the far-field rule."""
    v = f.values
    if f.n == 1:
        if isinstance(f.far_field, Periodic):
            return np.concatenate(([v[-2]], v, [v[1]]))
        lo = float(_ff_eval(f, np.array([-f.L - f.h]))[0])
        hi = float(_ff_eval(f, np.array([f.L + f.h]))[0])
        return np.concatenate(([lo], v, [hi]))
    npts = f.npoints
    pad = np.empty((npts + 2, npts + 2))
    pad[1:-1, 1:-1] = v
    if isinstance(f.far_field, Periodic):
        pad[0, 1:-1] = v[-2, :]
        pad[-1, 1:-1] = v[1, :]
        pad[1:-1, 0] = v[:, -2]
        pad[1:-1, -1] = v[:, 1]
        pad[0, 0] = v[-2, -2]
        pad[0, -1] = v[-2, 1]
        pad[-1, 0] = v[1, -2]
        pad[-1, -1] = v[1, 1]
        return pad
    xs = f.coords()
    ext = np.concatenate(([-f.L - f.h], xs, [f.L + f.h]))
    X, Y = np.meshgrid(ext, ext, indexing="ij")
    Pts = np.stack([X, Y], axis=-1)
    for ij in [(0, slice(None)), (-1, slice(None)), (slice(None), 0), (slice(None), -1)]:
        pad[ij] = _ff_eval(f, Pts[ij])
    return pad


def gradient_field(f: GridFunction) -> np.ndarray:
    """Centered differences at every node, far-field ghosts at the edges.

    Shape (N,) for n=1 and (N,N,2) for n=2.
    """
    pad = _padded(f)
    inv2h = 0.5 / f.h
    if f.n == 1:
        return (pad[2:] - pad[:-2]) * inv2h
    gx = (pad[2:, 1:-1] - pad[:-2, 1:-1]) * inv2h
    gy = (pad[1:-1, 2:] - pad[1:-1, :-2]) * inv2h
    return np.stack([gx, gy], axis=-1)


def gradient(f: GridFunction, index) -> np.ndarray:
    """Gradient vector at one lattice index (int for n=1, pair for n=2)."""
    g = gradient_field(f)
    if f.n == 1:
        return np.array([g[int(index)]])
    i, j = index
    return g[int(i), int(j)].copy()


def lipschitz_constant(f: GridFunction) -> float:
    """Max edge difference quotient, including one boundary layer vs the far field."""
    pad = _padded(f)
    if f.n == 1:
        return float(np.max(np.abs(np.diff(pad)))) / f.h
    dx = np.abs(np.diff(pad[:, 1:-1], axis=0))
    dy = np.abs(np.diff(pad[1:-1, :], axis=1))
    return float(max(dx.max(), dy.max())) / f.h


def oscillation(f: GridFunction) -> tuple:
    """(smallest, largest) stored value."""
    return float(np.min(f.values)), float(np.max(f.values))


def _ff_descriptor(ff: FarFieldModel) -> dict:
    if isinstance(ff, Periodic):
        return {"kind": "periodic", "period": ff.period}
    if isinstance(ff, Affine):
        return {"kind": "affine", "slope": list(ff.slope), "offset": ff.offset}
    d = {"kind": "cone", "profile_values": ff.profile_values}
    if ff.envelope is not None:
        d["envelope"] = {"K": ff.envelope[0], "delta": ff.envelope[1]}
    return d


def _ff_from_descriptor(d: dict) -> FarFieldModel:
    kind = d["kind"]
    if kind == "periodic":
        return Periodic(period=d["period"])
    if kind == "affine":
        return Affine(slope=tuple(d["slope"]), offset=d["offset"])
    if kind == "cone":
        env = d.get("envelope")
        return Cone(
            profile_values=np.asarray(d["profile_values"], dtype=float),
            envelope=(env["K"], env["delta"]) if env else None,
        )
    raise ValueError(f"unknown far-field kind {kind!r}")


def save_gridfunction(f: GridFunction, basepath) -> tuple:
    """Write basepath.csv (coordinates, value) + basepath.json (header)."""
    base = Path(basepath)
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = base.with_suffix(".csv")
    json_path = base.with_suffix(".json")
    xs = f.coords()
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        if f.n == 1:
            w.writerow(["x", "value"])
            for xi, vi in zip(xs, f.values):
                w.writerow([fmt17(xi), fmt17(vi)])
        else:
            w.writerow(["x", "y", "value"])
            for i, xi in enumerate(xs):
                for j, yj in enumerate(xs):
                    w.writerow([fmt17(xi), fmt17(yj), fmt17(f.values[i, j])])
    header = {
        "n": f.n,
        "L": f.L,
        "h": f.h,
        "matching_tol": f.matching_tol,
        "boundary_mismatch": f.boundary_mismatch,
        "far_field": _ff_descriptor(f.far_field),
    }
    json_path.write_text(json_dumps(header) + "\n")
    return csv_path, json_path


def load_gridfunction(basepath) -> GridFunction:
    import json

    base = Path(basepath)
    header = json.loads(base.with_suffix(".json").read_text())
    n = header["n"]
    npts = int(round(2 * header["L"] / header["h"])) + 1
    raw = np.loadtxt(base.with_suffix(".csv"), delimiter=",", skiprows=1)
    vals = raw[:, -1].reshape((npts,) if n == 1 else (npts, npts))
    return GridFunction(
        n=n,
        L=header["L"],
        h=header["h"],
        values=vals,
        far_field=_ff_from_descriptor(header["far_field"]),
        matching_tol=header["matching_tol"],
    )
