"""Command line front end.

Subcommands: simulate (one named scenario), expander (solve and store a
profile), study (scenario at h, h/2, ..., with observed orders), and
pin-oracles (regenerate the oracle pin table).

Config handling: --config FILE reads KEY=VALUE lines (# comments allowed);
explicit flags override file entries; keys that are not recognized flags are
passed through as scenario extras and validated by the scenario registry.
Exit codes: 0 pass/success, 1 scenario failure, 2 usage or config error.
Errors end with a machine-parsable JSON line on stderr.  All floats are
printed with 17 significant digits so reports round-trip losslessly.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ._fmt import fmt17, json_dumps
from .experiments import SCENARIOS, ScenarioConfig, run_scenario

_FLAG_KEYS = {
    "scenario": str, "s": float, "n": int, "h": float, "L": float, "T": float,
    "cfl": float, "rout": float, "snapshots": float, "threads": int,
    "out": str, "cone": str, "tol": float, "refinements": int,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _json_fail(kind: str, message: str, code: int, **extra) -> int:
    payload = {"kind": kind, "error": message, "exit_code": code}
    payload.update(extra)
    sys.stderr.write(json_dumps(payload) + "\n")
    return code


def _read_config(path: str) -> dict:
    text = Path(path).read_text()
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"{path}:{lineno}: expected KEY=VALUE, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key] = value
    return entries


def _merge(args: argparse.Namespace, file_entries: dict) -> dict:
    merged = {}
    for key, value in file_entries.items():
        caster = _FLAG_KEYS.get(key, float)
        try:
            merged[key] = caster(value)
        except ValueError as exc:
            raise _UsageError(f"config key {key}: {exc}")
    for key in _FLAG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _scenario_config(merged: dict, out_dir=None) -> ScenarioConfig:
    extras = {k: v for k, v in merged.items() if k not in _FLAG_KEYS}
    return ScenarioConfig(
        name=merged.get("scenario", ""),
        s=merged.get("s", 0.5),
        n=merged.get("n", 1),
        L=merged.get("L"),
        h=merged.get("h"),
        horizon=merged.get("T"),
        cfl=merged.get("cfl", 0.5),
        outer_radius=merged.get("rout"),
        snapshot_spacing=merged.get("snapshots"),
        threads=merged.get("threads", 1),
        out_dir=out_dir,
        extras=extras,
    )


def _print_verdict(v) -> None:
    print(f"scenario {v.scenario}: {'PASS' if v.passed else 'FAIL'}")
    for key in sorted(v.measured):
        line = f"  {key} = {fmt17(v.measured[key])}"
        if key in v.bounds:
            line += f"  (bound {fmt17(v.bounds[key])})"
        print(line)


def _cmd_simulate(args) -> int:
    merged = _merge(args, _read_config(args.config) if args.config else {})
    if not merged.get("scenario"):
        raise _UsageError("simulate needs --scenario (or scenario= in --config)")
    out = merged.get("out")
    try:
        cfg = _scenario_config(merged, out_dir=out)
    except ValueError as exc:
        raise _UsageError(str(exc))
    verdict = run_scenario(cfg)
    _print_verdict(verdict)
    if out:
        print(f"report: {Path(out) / 'report.json'}")
    if not verdict.passed:
        failed = sorted(k for k in verdict.bounds
                        if verdict.measured[k] > verdict.bounds[k])
        return _json_fail("scenario", f"{verdict.scenario} failed", 1,
                          scenario=verdict.scenario, failed=failed)
    return 0


def convergence_study(base: ScenarioConfig, refinements: int) -> dict:
    """Run the scenario at h, h/2, ..., h/2^(k-1); report observed orders.

    Orders are between consecutive levels, log2(m_i / m_{i+1}); a quantity
    that stays below 1e-12 at every level reports "exact"; quantities whose
    sign or zeros make the ratio meaningless report null.
    """
    if refinements < 2:
        raise ValueError(f"refinements must be >= 2, got {refinements}")
    from .experiments import _DEFAULTS  # registry defaults

    h0 = base.h if base.h is not None else _DEFAULTS[base.name]["h"]
    levels = []
    for i in range(refinements):
        cfg = ScenarioConfig(
            name=base.name, s=base.s, n=base.n, L=base.L, h=h0 / 2 ** i,
            horizon=base.horizon, cfl=base.cfl, outer_radius=base.outer_radius,
            snapshot_spacing=base.snapshot_spacing, threads=base.threads,
            out_dir=None, extras=dict(base.extras),
        )
        verdict = run_scenario(cfg)
        levels.append({"h": h0 / 2 ** i, "measured": verdict.measured})

    keys = sorted(set.intersection(*(set(lv["measured"]) for lv in levels)))
    orders = {}
    for key in keys:
        vals = [lv["measured"][key] for lv in levels]
        if all(abs(v) < 1e-12 for v in vals):
            orders[key] = "exact"
        elif all(v > 1e-300 for v in vals):
            orders[key] = [float(np.log2(a / b)) for a, b in zip(vals, vals[1:])]
        else:
            orders[key] = None
    return {"scenario": base.name, "levels": levels, "orders": orders}


def _cmd_study(args) -> int:
    merged = _merge(args, _read_config(args.config) if args.config else {})
    if not merged.get("scenario"):
        raise _UsageError("study needs --scenario (or scenario= in --config)")
    try:
        base = _scenario_config(merged)
    except ValueError as exc:
        raise _UsageError(str(exc))
    k = merged.get("refinements", 3)
    try:
        report = convergence_study(base, k)
    except ValueError as exc:
        raise _UsageError(str(exc))
    print(f"study {report['scenario']}: {k} levels from h={fmt17(report['levels'][0]['h'])}")
    for key, order in sorted(report["orders"].items()):
        if isinstance(order, list):
            print(f"  {key}: orders " + ", ".join(f"{o:.3f}" for o in order))
        else:
            print(f"  {key}: {order}")
    out_name = merged.get("out")
    if out_name:
        out = Path(out_name)
        out.mkdir(parents=True, exist_ok=True)
        (out / "study.json").write_text(json_dumps(report) + "\n")
        print(f"report: {out / 'study.json'}")
    return 0


def _cmd_expander(args) -> int:
    merged = _merge(args, _read_config(args.config) if args.config else {})
    from .kernel import KernelParams
    from .gridfield import Cone
    from .curvature import QuadratureConfig
    from .selfsimilar import solve_expander, save_expander_profile

    slopes = [float(part) for part in merged.get("cone", "0.5,0.5").split(",")]
    if len(slopes) == 1:
        slopes = slopes * 2
    s = merged.get("s", 0.5)
    L = merged.get("L", 3.0)
    h = merged.get("h", 2.0 ** -5)
    tol = merged.get("tol", 2e-4)
    cfg = None
    if merged.get("rout") is not None:
        cfg = QuadratureConfig(outer_radius=merged["rout"])
    prof = solve_expander(KernelParams(n=1, s=s), Cone(np.array(slopes)),
                          L=L, h=h, tol=tol, cfg=cfg, matching_tol=5.0,
                          threads=merged.get("threads", 1))
    print(f"expander over cone {slopes}: {prof.iterations} iterations, "
          f"residual {fmt17(prof.residual_sup)}, "
          f"origin {fmt17(prof.value_at_origin)}")
    out_name = merged.get("out")
    if out_name:
        paths = save_expander_profile(prof, out_name)
        print(f"profile: {paths[0]}")
    return 0


def _cmd_pin_oracles(args) -> int:
    from .oracle import write_pins

    path = write_pins(args.out) if args.out else write_pins()
    print(f"pins: {path}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="fracflow", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", choices=SCENARIOS)
        p.add_argument("--s", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--h", type=float)
        p.add_argument("--L", type=float)
        p.add_argument("--T", type=float, help="time horizon")
        p.add_argument("--cfl", type=float)
        p.add_argument("--rout", type=float, help="quadrature outer radius")
        p.add_argument("--snapshots", type=float, help="snapshot spacing")
        p.add_argument("--threads", type=int)
        p.add_argument("--out", type=str, help="output directory")
        p.add_argument("--config", type=str, help="KEY=VALUE config file")

    p_sim = sub.add_parser("simulate", help="run one scenario")
    add_common(p_sim)

    p_study = sub.add_parser("study", help="refinement study of a scenario")
    add_common(p_study)
    p_study.add_argument("--refinements", type=int, help="levels (default 3)")

    p_exp = sub.add_parser("expander", help="solve an expanding profile")
    add_common(p_exp)
    p_exp.add_argument("--cone", type=str, help="cone slopes 'right,left'")
    p_exp.add_argument("--tol", type=float, help="relaxation stopping rate")

    p_pin = sub.add_parser("pin-oracles", help="regenerate oracle pins")
    p_pin.add_argument("--out", type=str, help="pins JSON path")
    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "study": _cmd_study,
    "expander": _cmd_expander,
    "pin-oracles": _cmd_pin_oracles,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return _json_fail("usage", str(exc), 2)
    except FileNotFoundError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return _json_fail("usage", str(exc), 2)
    except RuntimeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _json_fail("scenario", str(exc), 1)


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
