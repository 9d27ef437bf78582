"""Command-line entry point: ``setguard {sets compute,sets attenuate,simulate,check}``.

Exit codes: 0 ok, 2 input error, 3 non-convergence, 4 infeasible attenuation,
5 safety violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from setguard import __version__
from setguard.design import CartDesign, with_input_limit
from setguard.invariant import AttenuationError, InvariantError, attenuate, compute_max_invariant
from setguard.lti import ControlDesignError, FeedbackGain, closed_loop, euler_discretize, place_poles
from setguard.numlin import LinAlgError
from setguard.polytope import PolytopeError, contains, is_subset, load, save, vertices_2d
from setguard.scenario import ScenarioError, load_model, load_scenario, max_abs_position, run_scenario, write_trace
from setguard.supervisor import SupervisorConfig, SupervisorConfigError, monitor

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_ATTENUATION = 4
EXIT_UNSAFE = 5

INPUT_ERRORS = (
    OSError,
    ScenarioError,
    PolytopeError,
    LinAlgError,
    ControlDesignError,
    InvariantError,
    SupervisorConfigError,
    ValueError,
)


class InputError(Exception):
    pass


def write_manifest(out: Path, command: str, inputs: Sequence[str], outputs: Sequence[str], config: dict) -> Path:
    path = out.with_name(out.name + ".manifest.json")
    manifest = {
        "command": command,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "config_echo": config,
        "tool_version": __version__,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _design(args) -> CartDesign:
    design = load_model(args.model)
    kw = {}
    if getattr(args, "poles", None):
        kw["poles"] = tuple(args.poles)
    if getattr(args, "dt", None) is not None:
        kw["dt"] = args.dt
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    if getattr(args, "umax", None) is not None:
        kw["u_max"] = args.umax
    if getattr(args, "input_constraint", False):
        kw["constrain_input"] = True
    if kw:
        design = CartDesign(**{**design.__dict__, **kw})
    if any(abs(p) >= 1.0 for p in design.poles):
        raise InputError(f"poles {list(design.poles)} are not strictly inside the unit circle")
    return design


def _echo(design: CartDesign) -> dict:
    return {
        "a_c": [list(r) for r in design.a_c],
        "b_c": [list(r) for r in design.b_c],
        "dt": design.dt,
        "poles": list(design.poles),
        "state_lower": [str(v) for v in design.state_lower],
        "state_upper": [str(v) for v in design.state_upper],
        "umax": design.u_max,
        "max_iter": design.max_iter,
        "input_constraint": design.constrain_input,
    }


def cmd_compute_sets(args) -> int:
    design = _design(args)
    plant = euler_discretize(design.continuous(), design.dt)
    gain = place_poles(plant, design.poles)
    a_cl = closed_loop(plant, gain).a
    x_set = design.constraint_set()
    if design.constrain_input:
        x_set = with_input_limit(x_set, gain, design.u_max)
    res = compute_max_invariant(x_set, a_cl, design.max_iter)
    out = Path(args.out)
    save(res.o_inf, out)
    config = {**_echo(design), "gain": gain.k[0].tolist(), "iterations": res.iterations, "converged": res.converged}
    write_manifest(out, "sets compute", [args.model], [str(out)], config)
    print(f"K = {np.array2string(gain.k[0], precision=6)}")
    print(f"iterations: {res.iterations}  converged: {str(res.converged).lower()}  facets: {res.o_inf.n_rows}")
    if not res.converged:
        print("warning: recursion hit the iteration cap; set written but not certified invariant", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_attenuate(args) -> int:
    if args.umax < 0:
        raise InputError("--umax must be non-negative")
    design = _design(args)
    o_inf = load(args.oinf)
    plant = euler_discretize(design.continuous(), design.dt)
    if args.closed_loop:
        plant = closed_loop(plant, place_poles(plant, design.poles))
    try:
        res = attenuate(o_inf, plant, args.umax)
    except AttenuationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ATTENUATION
    out = Path(args.out)
    save(res.s_inf, out)
    config = {**_echo(design), "umax": args.umax, "closed_loop": args.closed_loop, "alpha": res.alpha}
    write_manifest(out, "sets attenuate", [args.oinf, args.model], [str(out)], config)
    print(f"alpha: {res.alpha!r}")
    print("facet margins: " + " ".join(f"{m:.6g}" for m in res.facet_margins))
    return EXIT_OK


def _write_xy(path: Path, pts) -> None:
    path.write_text("".join(f"{float(v[0])!r} {float(v[1])!r}\n" for v in pts), encoding="utf-8")


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    trace = run_scenario(sc, sc.supervisor)
    out = Path(args.trace)
    write_trace(trace, out)
    outputs = [str(out)]
    if args.emit_sets:
        if sc.supervisor is None:
            raise InputError("--emit-sets needs a scenario with a supervisor")
        for name, poly in (("oinf", sc.supervisor.o_inf), ("sinf", sc.supervisor.s_inf)):
            p = out.with_name(f"{out.stem}.{name}.xy")
            _write_xy(p, vertices_2d(poly))
            outputs.append(str(p))
    peak = max_abs_position(trace)
    last = trace[-1]
    config = {
        "scenario": sc.name,
        "plant": sc.plant,
        "controller": sc.controller.kind,
        "horizon": sc.horizon,
        "seed": sc.seed,
        "supervised": sc.supervisor is not None,
        "max_abs_position": peak,
        "flags": last.flags,
        "final_mode": last.mode.value,
    }
    write_manifest(out, "simulate", [args.scenario], outputs, config)
    print(f"ticks: {len(trace)}  flags: {last.flags}  final mode: {last.mode.value}  max |position|: {peak:.6f}")
    if peak >= sc.track_limit:
        print(f"SAFETY VIOLATION: |position| reached {peak:.6f} >= {sc.track_limit}", file=sys.stderr)
        return EXIT_UNSAFE
    return EXIT_OK


def cmd_check(args) -> int:
    a, b = load(args.set_a), load(args.set_b)
    print(f"subset: {str(is_subset(a, b)).lower()}")
    if args.point is not None:
        x = np.array(args.point, dtype=float)
        print(f"in A: {str(contains(a, x)).lower()}  in B: {str(contains(b, x)).lower()}")
        if a.dim == b.dim and x.size == a.dim:
            # only membership matters for the zone, so the override gain is a placeholder
            cfg = SupervisorConfig(a, b, FeedbackGain(np.zeros((1, a.dim))), safe_point=np.zeros(a.dim), validate=False)
            print(monitor(cfg, x).value)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="setguard", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sets = sub.add_parser("sets", help="offline set computations")
    sets_sub = sets.add_subparsers(dest="sets_command", required=True)

    comp = sets_sub.add_parser("compute", help="maximal positive invariant set")
    comp.add_argument("--model", required=True)
    comp.add_argument("--poles", type=float, nargs="+")
    comp.add_argument("--dt", type=float)
    comp.add_argument("--max-iter", type=int, dest="max_iter")
    comp.add_argument("--umax", type=float, help="actuator limit (used with --input-constraint)")
    comp.add_argument("--input-constraint", action="store_true", help="also require |K x| <= umax")
    comp.add_argument("--out", required=True)
    comp.set_defaults(func=cmd_compute_sets)

    att = sets_sub.add_parser("attenuate", help="scale the invariant set into the safe set")
    att.add_argument("--oinf", required=True)
    att.add_argument("--model", required=True)
    att.add_argument("--umax", type=float, required=True)
    att.add_argument("--poles", type=float, nargs="+")
    att.add_argument("--dt", type=float)
    att.add_argument("--closed-loop", action="store_true", help="check with A - BK instead of the open-loop A")
    att.add_argument("--out", required=True)
    att.set_defaults(func=cmd_attenuate)

    sim = sub.add_parser("simulate", help="run a scenario file")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--trace", required=True)
    sim.add_argument("--emit-sets", action="store_true", dest="emit_sets")
    sim.set_defaults(func=cmd_simulate)

    chk = sub.add_parser("check", help="subset relation and point classification")
    chk.add_argument("set_a")
    chk.add_argument("set_b")
    chk.add_argument("--point", type=float, nargs="+")
    chk.set_defaults(func=cmd_check)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
