"""Runtime safety supervisor wrapped around an untrusted controller.

While the measured state stays in the safe set the student's input passes
through (saturated). The first tick outside it raises a flag and latches the
override law ``u = -K (x - safe_point)``; once the state has settled at the
safe point, or the override has run for ``shutdown_after`` seconds, the
supervisor shuts the input off for good.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Tuple

import numpy as np

from setguard.lti import FeedbackGain
from setguard.polytope import HPolytope, PolytopeError, contains, is_subset


class Mode(str, Enum):
    NOMINAL = "Nominal"
    OVERRIDE = "Override"
    SHUTDOWN = "Shutdown"


class Zone(str, Enum):
    SAFE = "Safe"
    GRAY = "GrayZone"
    UNRECOVERABLE = "Unrecoverable"


class SupervisorConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SupervisorConfig:
    s_inf: HPolytope
    o_inf: HPolytope
    gain: FeedbackGain
    u_max: float = 12.0
    safe_point: np.ndarray = None
    settle_tolerance: np.ndarray = None
    settle_ticks: int = 250
    shutdown_after: float = 5.0
    dt: float = 0.002
    validate: bool = True

    def __post_init__(self):
        n = self.s_inf.dim
        sp = np.zeros(n) if self.safe_point is None else np.asarray(self.safe_point, dtype=float).reshape(-1)
        tol = (
            np.array([0.01, 0.05])[:n] if self.settle_tolerance is None else np.asarray(self.settle_tolerance, dtype=float)
        )
        object.__setattr__(self, "safe_point", sp)
        object.__setattr__(self, "settle_tolerance", tol.reshape(-1))
        if self.o_inf.dim != n or sp.size != n or self.settle_tolerance.size != n:
            raise SupervisorConfigError("sets, safe point and settle tolerance must share one dimension")
        if self.gain.k.shape != (1, n):
            raise SupervisorConfigError(f"override gain must be 1x{n}, got {self.gain.k.shape}")
        if not self.u_max > 0:
            raise SupervisorConfigError("u_max must be positive")
        if not self.dt > 0 or self.settle_ticks < 1 or not self.shutdown_after > 0:
            raise SupervisorConfigError("dt, settle_ticks and shutdown_after must be positive")
        if self.validate:
            if not contains(self.s_inf, sp):
                raise SupervisorConfigError("safe point lies outside the safe set")
            if not is_subset(self.s_inf, self.o_inf):
                raise SupervisorConfigError("safe set is not contained in the invariant set")

    @property
    def dim(self) -> int:
        return self.s_inf.dim


@dataclass(frozen=True)
class SupervisorState:
    mode: Mode = Mode.NOMINAL
    flags: int = 0
    ticks_in_override: int = 0
    consecutive_settled: int = 0


def clamp(u: float, limit: float) -> float:
    return min(limit, max(-limit, float(u)))


def _observe(cfg: SupervisorConfig, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != cfg.dim:
        raise PolytopeError(f"state has length {x.size}, supervisor sets have dim {cfg.dim}")
    return x


def override_input(cfg: SupervisorConfig, x: np.ndarray) -> float:
    return clamp(-(cfg.gain.k[0] @ (x - cfg.safe_point)), cfg.u_max)


def supervise_step(
    cfg: SupervisorConfig, st: SupervisorState, x, u_student: float
) -> Tuple[float, SupervisorState]:
    x = _observe(cfg, x)
    if st.mode is Mode.SHUTDOWN:
        return 0.0, st
    if st.mode is Mode.NOMINAL:
        if contains(cfg.s_inf, x):
            return clamp(u_student, cfg.u_max), st
        st = replace(st, mode=Mode.OVERRIDE, flags=st.flags + 1)

    u = override_input(cfg, x)
    settled = bool(np.all(np.abs(x - cfg.safe_point) <= cfg.settle_tolerance))
    ticks = st.ticks_in_override + 1
    run = st.consecutive_settled + 1 if settled else 0
    mode = Mode.OVERRIDE
    if run >= cfg.settle_ticks or ticks * cfg.dt >= cfg.shutdown_after - 1e-12:
        mode = Mode.SHUTDOWN
    return u, replace(st, mode=mode, ticks_in_override=ticks, consecutive_settled=run)


def monitor(cfg: SupervisorConfig, x) -> Zone:
    x = _observe(cfg, x)
    if contains(cfg.s_inf, x):
        return Zone.SAFE
    if contains(cfg.o_inf, x):
        return Zone.GRAY
    return Zone.UNRECOVERABLE


class Supervisor:
    """Stateful convenience wrapper; calls must be made from one thread in tick order."""

    def __init__(self, cfg: SupervisorConfig):
        self.cfg = cfg
        self.state = SupervisorState()

    def __call__(self, x, u_student: float) -> float:
        u, self.state = supervise_step(self.cfg, self.state, x, u_student)
        return u

    @property
    def mode(self) -> Mode:
        return self.state.mode
