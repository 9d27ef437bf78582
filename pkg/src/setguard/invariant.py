"""Maximal positive invariant set recursion and attenuation into a safe subset."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from setguard.lti import DiscreteLTI, is_stable
from setguard.numlin import LPStatus, as_square, lp_maximize
from setguard.polytope import (
    SUPPORT_TOL,
    HPolytope,
    PolytopeError,
    contains,
    pre_set,
    remove_redundancy,
    scale,
    support,
    vertices_2d,
)

log = logging.getLogger(__name__)

MARGIN_TOL = 1e-9


class InvariantError(ValueError):
    pass


class AttenuationError(ValueError):
    pass


@dataclass(frozen=True)
class InvariantResult:
    o_inf: HPolytope
    iterations: int
    converged: bool


@dataclass(frozen=True)
class AttenuationResult:
    s_inf: HPolytope
    alpha: float
    facet_margins: np.ndarray


def _new_rows(o: HPolytope, cand: HPolytope) -> Tuple[np.ndarray, np.ndarray]:
    """Rows of ``cand`` that cut into ``o``.

    Each candidate is tested against ``o`` plus the candidates still standing,
    so the survivors are exactly what a full redundancy pass would keep among
    the new rows.
    """
    cm = cand.h_matrix / np.linalg.norm(cand.h_matrix, axis=1)[:, None]
    cv = cand.h_vector / np.linalg.norm(cand.h_matrix, axis=1)

    # rows already present with an equal or tighter offset are implied
    fresh = []
    for i in range(cv.size):
        dup = np.all(np.abs(o.h_matrix - cm[i]) < 1e-12, axis=1)
        if not np.any(o.h_vector[dup] <= cv[i] + SUPPORT_TOL):
            fresh.append(i)
    cm, cv = cm[fresh], cv[fresh]

    alive = np.ones(cv.size, dtype=bool)
    for i in range(cv.size):
        alive[i] = False
        hm = np.vstack([o.h_matrix, cm[alive]])
        hv = np.concatenate([o.h_vector, cv[alive]])
        res = lp_maximize(cm[i], hm, hv)
        if not (res.optimal and res.optimum <= cv[i] + SUPPORT_TOL):
            alive[i] = True
    return cm[alive], cv[alive]


def compute_max_invariant(
    x_set: HPolytope,
    a_cl,
    max_iter: int = 500,
    progress: Optional[Callable[[int, HPolytope], None]] = None,
) -> InvariantResult:
    """Iterate ``O <- Pre(O) & O`` from ``O = X`` until a fixed point.

    Stops when the preimage adds no constraint (``Pre(O) & O == O``) or after
    ``max_iter`` rounds. Only the freshly mapped rows are LP-tested each round;
    the accumulated set is pruned whenever it doubles and once at the end.
    ``progress(k, O_k)`` is called after every round.
    """
    a = as_square(a_cl, "a_cl")
    if a.shape[0] != x_set.dim:
        raise InvariantError(f"a_cl is {a.shape}, constraint set has dim {x_set.dim}")
    if not is_stable(a):
        raise InvariantError("closed-loop matrix is not Schur stable")
    if max_iter < 0:
        raise InvariantError("max_iter must be >= 0")

    o = remove_redundancy(x_set)
    if o.empty:
        return InvariantResult(o, 0, True)
    last_pruned = o.n_rows
    for k in range(1, max_iter + 1):
        nm, nv = _new_rows(o, pre_set(o, a))
        if nv.size == 0:
            log.debug("fixed point after %d iterations, %d rows", k, o.n_rows)
            return InvariantResult(remove_redundancy(o), k, True)
        o = HPolytope(np.vstack([o.h_matrix, nm]), np.concatenate([o.h_vector, nv]))
        if o.n_rows > 2 * last_pruned:
            o = remove_redundancy(o)
            last_pruned = o.n_rows
            if o.empty:
                return InvariantResult(o, k, True)
        if progress is not None:
            progress(k, o)
    return InvariantResult(remove_redundancy(o), max_iter, False)


def _input_reach(q: np.ndarray, b: np.ndarray, u_max: float) -> np.ndarray:
    # worst case of q.(B u) over |u_j| <= u_max
    return u_max * np.abs(q @ b).sum(axis=1)


def one_step_safe(
    candidate: HPolytope, o_inf: HPolytope, sys: DiscreteLTI, u_max: float
) -> Tuple[bool, np.ndarray]:
    """Can one step of ``x+ = A x + B u``, ``|u| <= u_max``, leave ``o_inf`` from ``candidate``?

    Returns ``(safe, margins)`` with one slack per (normalized) facet of
    ``o_inf``; an unbounded facet LP gives ``-inf``.
    """
    if candidate.dim != o_inf.dim or sys.n != o_inf.dim:
        raise PolytopeError("dimension mismatch between sets and system")
    if u_max < 0:
        raise ValueError("u_max must be non-negative")
    o = o_inf.normalize()
    reach = _input_reach(o.h_matrix, sys.b, u_max)
    margins = np.empty(o.n_rows)
    for i, (q, r) in enumerate(zip(o.h_matrix, o.h_vector)):
        res = support(candidate, sys.a.T @ q)
        if res.status is LPStatus.UNBOUNDED:
            margins[i] = -np.inf
        elif res.status is LPStatus.INFEASIBLE:
            margins[i] = np.inf
        else:
            margins[i] = r - res.optimum - reach[i]
    return bool(np.all(margins >= -MARGIN_TOL)), margins


def attenuate(o_inf: HPolytope, sys: DiscreteLTI, u_max: float) -> AttenuationResult:
    """Largest ``alpha`` with ``alpha * o_inf`` one-step safe under saturated inputs.

    Per facet ``(q, r)``: ``s = max_{x in O} q.A x`` and the facet allows
    ``alpha <= (r - u_max |q.B|) / s`` when ``s > 0``.
    """
    if u_max < 0:
        raise ValueError("u_max must be non-negative")
    o = o_inf.normalize()
    if np.any(o.h_vector <= 0):
        raise PolytopeError("origin is not interior to the invariant set")
    numer = o.h_vector - _input_reach(o.h_matrix, sys.b, u_max)
    if np.any(numer < 0):
        raise AttenuationError("no attenuation can absorb one worst-case step (u_max too large for the set)")
    alpha = 1.0
    for i, q in enumerate(o.h_matrix):
        res = support(o, sys.a.T @ q)
        if not res.optimal:
            raise AttenuationError("invariant set is unbounded along a mapped facet normal")
        # facets that already absorb the step (up to rounding) impose no limit
        if res.optimum > 0 and res.optimum > numer[i] * (1 + 1e-12):
            alpha = min(alpha, numer[i] / res.optimum)
    if alpha <= 0:
        raise AttenuationError("no attenuation can absorb one worst-case step (u_max too large for the set)")
    s_inf = scale(o, alpha)
    _, margins = one_step_safe(s_inf, o, sys, u_max)
    return AttenuationResult(s_inf, float(alpha), margins)


def attenuation_bisection(
    o_inf: HPolytope, sys: DiscreteLTI, u_max: float, tol: float = 1e-6
) -> float:
    """Largest one-step-safe scaling found by bisection on ``one_step_safe``.

    Independent of the closed form in :func:`attenuate`; each probe solves the
    facet LPs over the scaled set itself.
    """
    if one_step_safe(o_inf, o_inf, sys, u_max)[0]:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if one_step_safe(scale(o_inf, mid), o_inf, sys, u_max)[0]:
            lo = mid
        else:
            hi = mid
    return lo


def vertex_evolution_safe(s_inf: HPolytope, o_inf: HPolytope, sys: DiscreteLTI, u_max: float) -> bool:
    """Planar check: every vertex of ``s_inf`` pushed by ``+-u_max`` lands in ``o_inf``."""
    for v in vertices_2d(s_inf):
        for u in (-u_max, u_max):
            if not contains(o_inf, sys.a @ v + sys.b[:, 0] * u, tol=1e-8):
                return False
    return True
