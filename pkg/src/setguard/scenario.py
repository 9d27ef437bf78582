"""Scenario files, the fixed-step supervised simulation loop and CSV traces.

Scenario files are INI-style text with sections ``plant``, ``controller``,
``disturbance.N``, ``supervisor`` and ``run``; relative set paths resolve
against the scenario file's directory.
"""
from __future__ import annotations

import configparser
import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from setguard.design import SUPERVISOR_DESIGN, TRACK_LIMIT, CartDesign, design_sets
from setguard.plant import (
    CART,
    CART_PENDULUM,
    CartParams,
    CartPendulumParams,
    StudentController,
    step_cart,
    step_cart_pendulum,
)
from setguard.polytope import HPolytope, load
from setguard.supervisor import Mode, SupervisorConfig, SupervisorState, clamp, supervise_step

PLANTS = ("Cart2D", "CartPendulum4D")
TARGETS = {"cart_velocity": 1, "pendulum_angular_velocity": 3}
TRACE_HEADER = ["time", "x1", "x2", "x3", "x4", "u_student", "u_applied", "mode", "flags"]


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Disturbance:
    """Instantaneous velocity increment applied right after the plant step of tick ``round(time/dt)``."""

    time: float
    target: str
    magnitude: float

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ScenarioError(f"unknown disturbance target {self.target!r}")


@dataclass(frozen=True)
class Scenario:
    plant: str
    controller: StudentController
    initial_state: tuple
    horizon: float
    disturbances: tuple = ()
    seed: int = 0
    dt: float = 0.002
    input_noise: float = 0.0
    track_limit: float = TRACK_LIMIT
    cart_params: CartParams = CART
    pendulum_params: CartPendulumParams = CART_PENDULUM
    supervisor: Optional[SupervisorConfig] = None
    name: str = "scenario"

    def __post_init__(self):
        if self.plant not in PLANTS:
            raise ScenarioError(f"plant must be one of {PLANTS}, got {self.plant!r}")
        n = 2 if self.plant == "Cart2D" else 4
        if len(self.initial_state) != n:
            raise ScenarioError(f"{self.plant} needs a {n}-element initial state")
        if not self.horizon > 0 or not self.dt > 0:
            raise ScenarioError("horizon and dt must be positive")
        for d in self.disturbances:
            if not 0 <= d.time <= self.horizon:
                raise ScenarioError(f"disturbance at t={d.time} lies outside the horizon")
            if n == 2 and d.target != "cart_velocity":
                raise ScenarioError("the 2D cart has no pendulum to disturb")

    @property
    def n_ticks(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class TraceSample:
    time: float
    state: tuple
    u_student: float
    u_applied: float
    mode: Mode
    flags: int


def run_scenario(scenario: Scenario, supervisor: Optional[SupervisorConfig]) -> List[TraceSample]:
    """Fixed-step loop: observe, supervise, step the plant, apply disturbances.

    ``supervisor=None`` runs the student controller behind input saturation
    only (``u_max`` of the scenario's own supervisor config, else 12).
    """
    sc = scenario
    rng = np.random.default_rng(sc.seed)
    kicks: Dict[int, List[Disturbance]] = {}
    for d in sc.disturbances:
        kicks.setdefault(int(round(d.time / sc.dt)), []).append(d)
    u_max = supervisor.u_max if supervisor else (sc.supervisor.u_max if sc.supervisor else 12.0)

    x = tuple(float(v) for v in sc.initial_state)
    st = SupervisorState()
    trace: List[TraceSample] = []
    for k in range(sc.n_ticks):
        t = k * sc.dt
        u_s = float(sc.controller(x, t))
        if sc.input_noise > 0:
            u_s += sc.input_noise * float(rng.standard_normal())
        if supervisor is None:
            u = clamp(u_s, u_max)
        else:
            u, st = supervise_step(supervisor, st, x[: supervisor.dim], u_s)
        trace.append(TraceSample(t, x, u_s, u, st.mode, st.flags))
        if sc.plant == "Cart2D":
            x = tuple(step_cart(x, u, sc.dt, sc.cart_params))
        else:
            x = tuple(step_cart_pendulum(x, u, sc.dt, sc.pendulum_params))
        for d in kicks.get(k, ()):
            x = list(x)
            x[TARGETS[d.target]] += d.magnitude
            x = tuple(x)
    return trace


def max_abs_position(trace: Sequence[TraceSample]) -> float:
    return max(abs(s.state[0]) for s in trace)


def mode_sequence(trace: Sequence[TraceSample]) -> List[Mode]:
    seq: List[Mode] = []
    for s in trace:
        if not seq or seq[-1] is not s.mode:
            seq.append(s.mode)
    return seq


# ---------------------------------------------------------------------------
# trace CSV


def trace_rows(trace: Sequence[TraceSample]):
    for s in trace:
        xs = [repr(float(v)) for v in s.state] + [""] * (4 - len(s.state))
        yield [repr(s.time), *xs, repr(s.u_student), repr(s.u_applied), s.mode.value, str(s.flags)]


def trace_csv(trace: Sequence[TraceSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    w.writerows(trace_rows(trace))
    return buf.getvalue()


def write_trace(trace: Sequence[TraceSample], path: Union[str, Path]) -> None:
    Path(path).write_text(trace_csv(trace), encoding="utf-8")


def read_trace(path: Union[str, Path]) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# config files


def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ScenarioError(f"expected numbers, got {text!r}") from None


def _parser(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(str(exc)) from None
    return cp


def parse_model(text: str) -> CartDesign:
    """``[model]`` section: rows ``a.0 = 0 1``..., ``b.0 = 0``...; optional dt,
    poles, state_lower/state_upper (``inf`` allowed), umax, max_iter."""
    cp = _parser(text)
    if "model" not in cp:
        raise ScenarioError("model file needs a [model] section")
    sec = cp["model"]
    a_rows = sorted((k for k in sec if k.startswith("a.")), key=lambda k: int(k[2:]))
    b_rows = sorted((k for k in sec if k.startswith("b.")), key=lambda k: int(k[2:]))
    if not a_rows or len(a_rows) != len(b_rows):
        raise ScenarioError("model needs matching a.i and b.i rows")
    kw = dict(
        a_c=tuple(tuple(_floats(sec[k])) for k in a_rows),
        b_c=tuple(tuple(_floats(sec[k])) for k in b_rows),
    )
    if "dt" in sec:
        kw["dt"] = float(sec["dt"])
    if "poles" in sec:
        kw["poles"] = tuple(_floats(sec["poles"]))
    for key in ("state_lower", "state_upper"):
        if key in sec:
            kw[key] = tuple(_floats(sec[key]))
    if "umax" in sec:
        kw["u_max"] = float(sec["umax"])
    if "max_iter" in sec:
        kw["max_iter"] = int(sec["max_iter"])
    try:
        design = CartDesign(**kw)
        design.continuous()
    except ValueError as exc:
        raise ScenarioError(f"bad model: {exc}") from None
    return design


def load_model(path: Union[str, Path]) -> CartDesign:
    return parse_model(Path(path).read_text(encoding="utf-8"))


_NON_PARAM = {"kind"}


def _param_value(v: str):
    nums = _floats(v)
    return nums[0] if len(nums) == 1 else tuple(nums)


def _resolve_set(value: str, base: Path, which: str) -> HPolytope:
    if value.strip() == "auto":
        sets = design_sets(SUPERVISOR_DESIGN)
        return sets.o_inf if which == "oinf" else sets.s_inf
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    try:
        return load(p)
    except OSError as exc:
        raise ScenarioError(f"cannot read set file {p}: {exc}") from None


def parse_scenario(text: str, base_dir: Union[str, Path] = ".", name: str = "scenario") -> Scenario:
    cp = _parser(text)
    base = Path(base_dir)
    for sec in ("plant", "controller", "run"):
        if sec not in cp:
            raise ScenarioError(f"scenario is missing [{sec}]")
    try:
        plant_sec = cp["plant"]
        plant = plant_sec.get("kind", "Cart2D")
        pend = CART_PENDULUM
        pend_keys = {k: float(v) for k, v in plant_sec.items() if k in CartPendulumParams.__dataclass_fields__}
        if "substeps" in pend_keys:
            pend_keys["substeps"] = int(pend_keys["substeps"])
        if pend_keys:
            pend = replace(CART_PENDULUM, **pend_keys)

        csec = cp["controller"]
        params = {k: _param_value(v) for k, v in csec.items() if k not in _NON_PARAM}
        if plant == "CartPendulum4D":
            params["plant"] = pend
        controller = StudentController(csec.get("kind", "StepPD"), params)

        dists = []
        for sec in sorted(s for s in cp.sections() if s.startswith("disturbance.")):
            d = cp[sec]
            dists.append(Disturbance(float(d["time"]), d["target"].strip(), float(d["magnitude"])))

        run = cp["run"]
        dt = run.getfloat("dt", 0.002)
        sup = None
        if "supervisor" in cp and cp["supervisor"].getboolean("enabled", True):
            s = cp["supervisor"]
            sets = design_sets(SUPERVISOR_DESIGN)
            sup = SupervisorConfig(
                s_inf=_resolve_set(s.get("sinf", "auto"), base, "sinf"),
                o_inf=_resolve_set(s.get("oinf", "auto"), base, "oinf"),
                gain=sets.gain,
                u_max=s.getfloat("umax", 12.0),
                safe_point=np.array(_floats(s.get("safe_point", "0 0"))),
                settle_tolerance=np.array([s.getfloat("settle_pos", 0.01), s.getfloat("settle_vel", 0.05)]),
                settle_ticks=s.getint("settle_ticks", 250),
                shutdown_after=s.getfloat("shutdown_after", 5.0),
                dt=dt,
            )
        return Scenario(
            plant=plant,
            controller=controller,
            initial_state=tuple(_floats(run.get("initial_state", "0 0"))),
            horizon=run.getfloat("horizon"),
            disturbances=tuple(dists),
            seed=run.getint("seed", 0),
            dt=dt,
            input_noise=run.getfloat("input_noise", 0.0),
            track_limit=run.getfloat("track_limit", TRACK_LIMIT),
            pendulum_params=pend,
            supervisor=sup,
            name=name,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad scenario: {exc}") from None


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    return parse_scenario(text, path.parent, path.stem)


BUNDLED_DIR = Path(__file__).parent / "data"


def bundled_scenario(name: str) -> Scenario:
    return load_scenario(BUNDLED_DIR / "scenarios" / f"{name}.ini")


# ---------------------------------------------------------------------------
# adversarial scenarios


def adversarial_scenario(seed: int, s_inf: HPolytope, horizon: float = 6.0) -> Scenario:
    """A randomly misbehaving 2D student, started at a random point of ``s_inf``.

    Starting velocities are limited to what the saturated plant can reach on
    its own (``gain * u_max / friction``).
    """
    rng = np.random.default_rng(seed)
    v_reach = CART.gain * 12.0 / CART.friction
    while True:
        x0 = np.array([rng.uniform(-TRACK_LIMIT, TRACK_LIMIT), rng.uniform(-v_reach, v_reach)])
        if np.all(s_inf.h_matrix @ x0 <= s_inf.h_vector):
            break
    kind = ("UnstableGain", "BangBang", "StepPD")[seed % 3]
    if kind == "UnstableGain":
        params = {"g": rng.uniform(20, 300), "gv": rng.uniform(0, 30), "bias": rng.uniform(-5, 5)}
    elif kind == "BangBang":
        params = {"u_big": rng.uniform(6, 40), "period": rng.uniform(0.3, 4.0), "phase": rng.uniform(0, 4)}
    else:
        params = {"ref": rng.choice([-1, 1]) * rng.uniform(0.5, 2.0), "kp": rng.uniform(5, 60), "kd": rng.uniform(0, 4)}
    return Scenario(
        plant="Cart2D",
        controller=StudentController(kind, params),
        initial_state=tuple(x0),
        horizon=horizon,
        seed=seed,
        input_noise=float(rng.uniform(0, 5)),
        name=f"adversary_{seed:03d}",
    )
