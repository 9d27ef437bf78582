"""Discrete plant construction, single-input pole placement and stability checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from setguard.numlin import (
    LinAlgError,
    as_matrix,
    as_square,
    char_poly_coeffs,
    mat_power,
    poly_from_roots,
    poly_roots,
    rank,
)

STABILITY_MARGIN = 1e-9


class ControlDesignError(ValueError):
    pass


def _check_pair(a, b):
    a = as_square(a, "a")
    b = as_matrix(b, "b")
    if b.shape[0] != a.shape[0]:
        raise LinAlgError(f"b has {b.shape[0]} rows, a is {a.shape[0]}x{a.shape[0]}")
    return a, b


@dataclass(frozen=True, eq=False)
class ContinuousLTI:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a, b = _check_pair(self.a, self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class DiscreteLTI:
    """``x+ = a x + b u`` sampled every ``dt`` seconds."""

    a: np.ndarray
    b: np.ndarray
    dt: float

    def __post_init__(self):
        a, b = _check_pair(self.a, self.b)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    def step(self, x, u) -> np.ndarray:
        return self.a @ np.asarray(x, dtype=float) + self.b @ np.atleast_1d(np.asarray(u, dtype=float))


@dataclass(frozen=True, eq=False)
class FeedbackGain:
    """State feedback ``u = -k x``; ``k`` is ``m x n``."""

    k: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k", as_matrix(np.atleast_2d(np.asarray(self.k, dtype=float)), "k"))

    def __call__(self, x) -> np.ndarray:
        return -(self.k @ np.asarray(x, dtype=float))


def euler_discretize(sys: ContinuousLTI, dt: float) -> DiscreteLTI:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return DiscreteLTI(np.eye(sys.n) + dt * sys.a, dt * sys.b, dt)


def controllability_matrix(a, b) -> np.ndarray:
    a, b = _check_pair(a, b)
    blocks = [b]
    for _ in range(a.shape[0] - 1):
        blocks.append(a @ blocks[-1])
    return np.hstack(blocks)


def place_poles(sys: DiscreteLTI, poles) -> FeedbackGain:
    """Ackermann's formula ``K = e_n^T C^{-1} phi(A)`` for single-input systems.

    ``poles`` may contain complex values in conjugate pairs. The Krylov matrix
    is built from ``A - sigma I`` (same left vector ``e_n^T C^{-1}``, far better
    conditioned when ``A`` is close to the identity) and ``phi(A)`` is
    evaluated as a product of linear factors. The closed-loop characteristic
    polynomial is checked against the requested one.
    """
    if sys.m != 1:
        raise ControlDesignError("pole placement supports single-input systems only")
    poles = np.asarray(poles, dtype=complex).reshape(-1)
    if poles.size != sys.n:
        raise ControlDesignError(f"need {sys.n} poles, got {poles.size}")
    desired = poly_from_roots(poles)
    n = sys.n
    shift = np.trace(sys.a) / n
    ctrb = controllability_matrix(sys.a - shift * np.eye(n), sys.b)
    col_scale = np.linalg.norm(ctrb, axis=0)
    if np.any(col_scale == 0) or rank(ctrb / col_scale, tol=1e-10) < n:
        raise ControlDesignError("(A, B) is not controllable")
    e_last = np.zeros(n)
    e_last[-1] = 1.0
    row = np.linalg.solve((ctrb / col_scale).T, e_last) / col_scale[-1]
    phi = np.eye(n, dtype=complex)
    for p in poles:
        phi = phi @ (sys.a - p * np.eye(n))
    k = (row @ phi.real).reshape(1, -1)

    achieved = char_poly_coeffs(sys.a - sys.b @ k)
    if np.max(np.abs(achieved - desired)) > 1e-6 * max(1.0, np.max(np.abs(desired))):
        raise ControlDesignError("pole placement is numerically unreliable for this system")
    return FeedbackGain(k)


def closed_loop(sys: DiscreteLTI, gain: FeedbackGain) -> DiscreteLTI:
    k = gain.k
    if k.shape != (sys.m, sys.n):
        raise LinAlgError(f"gain shape {k.shape} does not fit a {sys.n}-state, {sys.m}-input system")
    return DiscreteLTI(sys.a - sys.b @ k, sys.b, sys.dt)


def spectral_radius(a) -> float:
    return float(np.max(np.abs(poly_roots(char_poly_coeffs(a))), initial=0.0))


def is_stable(a) -> bool:
    """Schur stability: every eigenvalue strictly inside the unit circle.

    Near the unit circle root finding is too coarse to decide, so the answer
    must also pass ``||A^200||_inf < 1``.
    """
    a = as_square(a)
    radius = spectral_radius(a)
    stable = radius < 1.0 - STABILITY_MARGIN
    if abs(radius - 1.0) < 1e-6:
        stable = stable and np.linalg.norm(mat_power(a, 200), ord=np.inf) < 1.0
    return bool(stable)
