"""Cart and cart-pendulum plants plus scripted "student" controllers.

Cart model: ``p'' = -friction p' + gain u`` (continuous), stepped with the same
Euler map the set computations use. The cart-pendulum adds a point-mass
pendulum on a frictionless pivot (with optional viscous pivot damping); the
cart is driven by the force ``cart_mass * (-friction p' + gain u)``, so with a
massless pendulum the cart motion reduces exactly to the cart model.

Angles: ``theta = 0`` hangs down, ``theta = pi`` is upright; the bob sits at
``(p - l sin(theta), -l cos(theta))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Tuple

import numpy as np

from setguard.lti import ContinuousLTI, DiscreteLTI, euler_discretize, place_poles


class CartState(NamedTuple):
    position: float
    velocity: float


class CartPendulumState(NamedTuple):
    position: float
    velocity: float
    angle: float
    angular_velocity: float


@dataclass(frozen=True)
class CartParams:
    friction: float = 7.2
    gain: float = 1.6

    def continuous(self) -> ContinuousLTI:
        return ContinuousLTI([[0.0, 1.0], [0.0, -self.friction]], [[0.0], [self.gain]])

    def discrete(self, dt: float) -> DiscreteLTI:
        return euler_discretize(self.continuous(), dt)


@dataclass(frozen=True)
class CartPendulumParams:
    cart_mass: float = 1.0
    friction: float = 7.2
    gain: float = 1.6
    pend_mass: float = 0.2
    length: float = 0.3
    damping: float = 0.005
    gravity: float = 9.81
    substeps: int = 10


CART = CartParams()
CART_PENDULUM = CartPendulumParams()


def step_cart(state, u: float, dt: float, params: CartParams = CART) -> CartState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    p, v = state
    return CartState(p + dt * v, v + dt * (-params.friction * v + params.gain * u))


def cart_pendulum_derivative(s, u: float, prm: CartPendulumParams = CART_PENDULUM) -> Tuple[float, ...]:
    """Time derivative of ``(p, p', theta, theta')``.

    A massless pendulum exerts no force on the cart and its pivot damping is
    ignored (it is a kinematic rider).
    """
    _, v, th, w = s
    sn, cs = math.sin(th), math.cos(th)
    m, l, g = prm.pend_mass, prm.length, prm.gravity
    force = prm.cart_mass * (-prm.friction * v + prm.gain * u)
    if m > 0.0:
        acc = (force - m * g * sn * cs - (prm.damping / l) * cs * w - m * l * sn * w * w) / (
            prm.cart_mass + m * sn * sn
        )
        alpha = (cs * acc - g * sn) / l - prm.damping * w / (m * l * l)
    else:
        acc = force / prm.cart_mass
        alpha = (cs * acc - g * sn) / l
    return (v, acc, w, alpha)


def step_cart_pendulum(
    state, u: float, dt: float, params: CartPendulumParams = CART_PENDULUM
) -> CartPendulumState:
    """Advance ``dt`` seconds with ``params.substeps`` RK4 sub-steps, input held."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    h = dt / params.substeps
    s = tuple(float(v) for v in state)
    f = cart_pendulum_derivative
    for _ in range(params.substeps):
        k1 = f(s, u, params)
        k2 = f(tuple(a + 0.5 * h * b for a, b in zip(s, k1)), u, params)
        k3 = f(tuple(a + 0.5 * h * b for a, b in zip(s, k2)), u, params)
        k4 = f(tuple(a + h * b for a, b in zip(s, k3)), u, params)
        s = tuple(a + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(s, k1, k2, k3, k4))
    return CartPendulumState(*s)


def pendulum_energy(state, params: CartPendulumParams = CART_PENDULUM) -> float:
    """Pendulum energy in the pivot frame; ``m g l`` when balanced upright at rest."""
    _, _, th, w = state
    m, l = params.pend_mass, params.length
    return 0.5 * m * l * l * w * w - m * params.gravity * l * math.cos(th)


def total_energy(state, params: CartPendulumParams = CART_PENDULUM) -> float:
    _, v, th, w = state
    mc, m, l = params.cart_mass, params.pend_mass, params.length
    kin = 0.5 * (mc + m) * v * v - m * l * math.cos(th) * v * w + 0.5 * m * l * l * w * w
    return kin - m * params.gravity * l * math.cos(th)


def wrap_angle(a: float) -> float:
    """Map to ``(-pi, pi]``."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def linearize_upright(params: CartPendulumParams = CART_PENDULUM, eps: float = 1e-6) -> ContinuousLTI:
    """Central-difference Jacobians about ``(0, 0, pi, 0)``, zero input."""
    x0 = np.array([0.0, 0.0, math.pi, 0.0])
    a = np.zeros((4, 4))
    for j in range(4):
        dx = np.zeros(4)
        dx[j] = eps
        hi = np.array(cart_pendulum_derivative(x0 + dx, 0.0, params))
        lo = np.array(cart_pendulum_derivative(x0 - dx, 0.0, params))
        a[:, j] = (hi - lo) / (2 * eps)
    b = (np.array(cart_pendulum_derivative(x0, eps, params)) - np.array(cart_pendulum_derivative(x0, -eps, params))) / (
        2 * eps
    )
    return ContinuousLTI(a, b.reshape(4, 1))


# continuous-time poles for the upright balance law, mapped by z = exp(s dt)
BALANCE_POLES_S = (-3.0, -4.0, -12.0, -15.0)


def balance_gain(
    params: CartPendulumParams = CART_PENDULUM, dt: float = 0.002, poles_s=BALANCE_POLES_S
) -> np.ndarray:
    disc = euler_discretize(linearize_upright(params), dt)
    return place_poles(disc, np.exp(np.asarray(poles_s, dtype=complex) * dt)).k[0]


def input_for_accel(state, acc: float, prm: CartPendulumParams = CART_PENDULUM) -> float:
    """Input that gives cart acceleration ``acc`` in ``state`` (exact model inversion)."""
    _, v, th, w = state
    sn, cs = math.sin(th), math.cos(th)
    m, l = prm.pend_mass, prm.length
    force = acc * (prm.cart_mass + m * sn * sn)
    if m > 0.0:
        force += m * prm.gravity * sn * cs + (prm.damping / l) * cs * w + m * l * sn * w * w
    return (force / prm.cart_mass + prm.friction * v) / prm.gain


# ---------------------------------------------------------------------------
# student controllers

CONTROLLER_KINDS = ("StepPD", "UnstableGain", "BangBang", "SwingUpBalance")


@dataclass(frozen=True)
class StudentController:
    """A scripted, possibly misbehaving controller: ``u = ctrl(state, t)``."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller kind {self.kind!r}; expected one of {CONTROLLER_KINDS}")
        if self.kind == "SwingUpBalance" and "gain" not in self.params:
            prm = self.params.get("plant", CART_PENDULUM)
            k = balance_gain(prm, self.params.get("dt", 0.002))
            object.__setattr__(self, "params", {**self.params, "gain": k})

    def __call__(self, state, t: float) -> float:
        return student_controller(self.kind, self.params, state, t)


def _sign(x: float) -> float:
    # sign(0) = +1 so the pump can start from the hanging rest position
    return -1.0 if x < 0 else 1.0


def student_controller(kind: str, params: dict, state, time: float) -> float:
    p = state[0]
    v = state[1]
    if kind == "StepPD":
        ref = params.get("ref", 0.0)
        if time < params.get("t_step", 0.0):
            ref = params.get("ref0", 0.0)
        return params.get("kp", 10.0) * (ref - p) - params.get("kd", 2.0) * v
    if kind == "UnstableGain":
        return params.get("g", 50.0) * p + params.get("gv", 0.0) * v + params.get("bias", 0.0)
    if kind == "BangBang":
        period = params.get("period", 1.0)
        phase = (time + params.get("phase", 0.0)) % period
        u_big = params.get("u_big", 20.0)
        return u_big if phase < params.get("duty", 0.5) * period else -u_big
    if kind == "SwingUpBalance":
        th, w = state[2], state[3]
        err = wrap_angle(th - math.pi)
        if abs(err) > params.get("switch_angle", 0.3):
            prm = params.get("plant", CART_PENDULUM)
            e_up = prm.pend_mass * prm.gravity * prm.length
            deficit = (e_up - pendulum_energy(state, prm)) / e_up
            lim = params.get("accel_limit", 1.5)
            acc = min(lim, max(-lim, params.get("k_e", 30.0) * _sign(w * math.cos(th)) * deficit))
            acc -= params.get("center_kp", 4.0) * p + params.get("center_kd", 1.0) * v
            return input_for_accel(state, acc, prm)
        k = params["gain"]
        dx = (p, v, err, w)
        return -float(sum(ki * xi for ki, xi in zip(k, dx)))
    raise ValueError(f"unknown controller kind {kind!r}")
