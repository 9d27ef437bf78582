"""Dense linear algebra helpers and a small simplex LP solver.

Matrices are plain ``numpy`` float arrays. Everything here is a pure function
of its inputs; nothing mutates arguments.

The LP solver targets the shapes that show up in polytope work: few variables
(the state dimension, at most 8) and many inequality rows (a few hundred
facets). It therefore runs a two-phase Bland-rule simplex on the equality-form
dual, whose tableau has only ``n + 1`` rows, and reads the primal optimizer
off the simplex multipliers.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

MAX_DIM = 8
TOL = 1e-9
PIVOT_TOL = 1e-12


class LinAlgError(ValueError):
    """Raised on shape or value errors in the dense algebra helpers."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise LinAlgError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise LinAlgError(f"{name} has non-finite entries")
    return m


def as_vector(v, name: str = "vector") -> np.ndarray:
    x = np.array(v, dtype=float).reshape(-1)
    if x.size < 1:
        raise LinAlgError(f"{name} is empty")
    if not np.all(np.isfinite(x)):
        raise LinAlgError(f"{name} has non-finite entries")
    return x


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise LinAlgError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise LinAlgError(f"{name} dimension {m.shape[0]} exceeds cap {MAX_DIM}")
    return m


def mat_mul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise LinAlgError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def mat_power(a, k: int) -> np.ndarray:
    a = as_square(a)
    out = np.eye(a.shape[0])
    base = a.copy()
    while k > 0:
        if k & 1:
            out = out @ base
        base = base @ base
        k >>= 1
    return out


def char_poly_coeffs(a) -> np.ndarray:
    """Monic characteristic polynomial of ``a``, highest power first.

    Faddeev-LeVerrier recurrence: ``M_k = A M_{k-1} + c_{n-k+1} I`` and
    ``c_{n-k} = -tr(A M_k) / k``.
    """
    a = as_square(a)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros((n, n))
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def poly_from_roots(roots) -> np.ndarray:
    """Expand prod(z - r_i) into real monic coefficients, highest power first."""
    coeffs = np.array([1.0 + 0j])
    for r in np.asarray(roots, dtype=complex).reshape(-1):
        coeffs = np.convolve(coeffs, [1.0, -r])
    if np.max(np.abs(coeffs.imag), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(coeffs))):
        raise LinAlgError("complex roots must come in conjugate pairs")
    return coeffs.real.copy()


def poly_roots(coeffs) -> np.ndarray:
    # companion-matrix eigenvalues
    return np.roots(np.asarray(coeffs, dtype=float))


def eigenvalues(a) -> np.ndarray:
    return poly_roots(char_poly_coeffs(a))


def poly_eval_matrix(coeffs, a) -> np.ndarray:
    """Evaluate a polynomial (highest power first) at a square matrix by Horner."""
    a = as_square(a)
    out = np.zeros_like(a)
    eye = np.eye(a.shape[0])
    for c in coeffs:
        out = out @ a + c * eye
    return out


def rank(a, tol: float = 1e-10) -> int:
    a = as_matrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


# ---------------------------------------------------------------------------
# Linear programming


class LPStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    optimum: Optional[float] = None
    witness: Optional[np.ndarray] = None

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


@dataclass
class _StdForm:
    status: str
    y: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    value: Optional[float] = None


def _pivot(t: np.ndarray, r: int, j: int) -> None:
    t[r] /= t[r, j]
    col = t[:, j].copy()
    col[r] = 0.0
    t -= np.outer(col, t[r])


def _bland(t: np.ndarray, basis: list, d: np.ndarray, ncols: int) -> str:
    """Minimize with reduced-cost row ``d`` (length of tableau width) in place.

    Only the first ``ncols`` columns may enter. Returns "optimal" or
    "unbounded".
    """
    rows = t.shape[0]
    while True:
        cand = np.flatnonzero(d[:ncols] < -TOL)
        if cand.size == 0:
            return "optimal"
        j = int(cand[0])
        col = t[:, j]
        best_r, best_ratio = -1, np.inf
        for i in range(rows):
            if col[i] > PIVOT_TOL:
                ratio = t[i, -1] / col[i]
                if ratio < best_ratio - PIVOT_TOL or (
                    abs(ratio - best_ratio) <= PIVOT_TOL and basis[i] < basis[best_r]
                ):
                    best_r, best_ratio = i, ratio
        if best_r < 0:
            return "unbounded"
        _pivot(t, best_r, j)
        d -= d[j] * t[best_r]
        basis[best_r] = j


def _simplex_std(a_eq: np.ndarray, b_eq: np.ndarray, cost: np.ndarray) -> _StdForm:
    """Two-phase Bland simplex for ``min cost.y  s.t.  a_eq y = b_eq, y >= 0``."""
    p, q = a_eq.shape
    sign = np.where(b_eq < 0, -1.0, 1.0)
    a = a_eq * sign[:, None]
    b = b_eq * sign
    t = np.zeros((p, q + p + 1))
    t[:, :q] = a
    t[:, q:q + p] = np.eye(p)
    t[:, -1] = b
    basis = list(range(q, q + p))

    # phase 1: minimize the sum of artificials
    d = np.zeros(q + p + 1)
    d[q:q + p] = 1.0
    d -= t.sum(axis=0)
    _bland(t, basis, d, q)
    if -d[-1] > TOL * max(1.0, float(np.abs(b).sum())):
        return _StdForm("infeasible")

    # drive zero-level artificials out; rows that cannot pivot are redundant
    for i in range(p):
        if basis[i] >= q:
            nz = np.flatnonzero(np.abs(t[i, :q]) > 1e-9)
            if nz.size:
                _pivot(t, i, int(nz[0]))
                basis[i] = int(nz[0])

    # phase 2
    full_cost = np.zeros(q + p)
    full_cost[:q] = cost
    cb = full_cost[basis]
    d = np.zeros(q + p + 1)
    d[:q + p] = full_cost
    d -= cb @ t
    if _bland(t, basis, d, q) == "unbounded":
        return _StdForm("unbounded")

    y = np.zeros(q + p)
    y[basis] = t[:, -1]
    y = np.maximum(y[:q], 0.0)
    cols = np.hstack([a, np.eye(p)])[:, basis]
    duals = np.linalg.solve(cols.T, full_cost[basis]) * sign
    return _StdForm("optimal", y=y, duals=duals, value=float(cost @ y))


def lp_maximize(objective, h_matrix, h_vector) -> LPResult:
    """Maximize ``objective . x`` subject to ``h_matrix x <= h_vector``, x free.

    Solved through the dual ``min h.y  s.t.  H^T y = c, y >= 0``; the primal
    optimizer is the dual's simplex multiplier vector. When the dual is
    infeasible a Farkas LP decides between an infeasible and an unbounded
    primal.
    """
    c = as_vector(objective, "objective")
    hm = as_matrix(h_matrix, "h_matrix")
    hv = as_vector(h_vector, "h_vector")
    if hm.shape[1] != c.size:
        raise LinAlgError(f"objective length {c.size} != constraint dimension {hm.shape[1]}")
    if hm.shape[0] != hv.size:
        raise LinAlgError("h_matrix and h_vector row counts differ")

    res = _simplex_std(hm.T, c, hv)
    if res.status == "optimal":
        x = res.duals
        return LPResult(LPStatus.OPTIMAL, float(c @ x), x)
    if res.status == "unbounded":
        return LPResult(LPStatus.INFEASIBLE)
    return LPResult(LPStatus.INFEASIBLE if _primal_infeasible(hm, hv) else LPStatus.UNBOUNDED)


def _primal_infeasible(hm: np.ndarray, hv: np.ndarray) -> bool:
    # Farkas: Hx <= h infeasible iff some y >= 0 has H^T y = 0, h.y < 0
    m, n = hm.shape
    a = np.vstack([hm.T, np.ones((1, m))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    res = _simplex_std(a, b, hv)
    return res.status == "optimal" and res.value < -TOL


def is_feasible(h_matrix, h_vector) -> bool:
    hm = as_matrix(h_matrix, "h_matrix")
    return not _primal_infeasible(hm, as_vector(h_vector, "h_vector"))
