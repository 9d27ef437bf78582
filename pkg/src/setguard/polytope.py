"""H-representation polyhedra ``{x : H x <= h}`` and the set operations on them.

All operations reduce to LPs from :mod:`setguard.numlin`, so they work in any
dimension up to the cap; only :func:`vertices_2d` is planar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from setguard.numlin import MAX_DIM, LPResult, LPStatus, as_matrix, as_vector, is_feasible, lp_maximize

MEMBER_TOL = 1e-9
SUPPORT_TOL = 1e-7
_ZERO_ROW = 1e-14


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Convex polyhedron ``{x : h_matrix @ x <= h_vector}``; may be unbounded.

    ``empty`` is set by operations that discovered infeasibility; use
    :func:`is_empty` for a definitive answer.
    """

    h_matrix: np.ndarray
    h_vector: np.ndarray
    empty: bool = False
    _feasible: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        hm = as_matrix(self.h_matrix, "h_matrix")
        hv = as_vector(self.h_vector, "h_vector")
        if hm.shape[0] != hv.size:
            raise PolytopeError(f"{hm.shape[0]} normals but {hv.size} offsets")
        if hm.shape[1] > MAX_DIM:
            raise PolytopeError(f"dimension {hm.shape[1]} exceeds cap {MAX_DIM}")
        if np.any(np.linalg.norm(hm, axis=1) <= _ZERO_ROW):
            raise PolytopeError("all-zero normal row")
        hm.setflags(write=False)
        hv.setflags(write=False)
        object.__setattr__(self, "h_matrix", hm)
        object.__setattr__(self, "h_vector", hv)

    @property
    def dim(self) -> int:
        return self.h_matrix.shape[1]

    @property
    def n_rows(self) -> int:
        return self.h_matrix.shape[0]

    def normalize(self) -> "HPolytope":
        norms = np.linalg.norm(self.h_matrix, axis=1)
        return HPolytope(self.h_matrix / norms[:, None], self.h_vector / norms, self.empty)

    def __contains__(self, x) -> bool:
        return contains(self, x)

    def __repr__(self) -> str:
        flag = ", empty" if self.empty else ""
        return f"HPolytope(dim={self.dim}, rows={self.n_rows}{flag})"


def box(lower: Sequence[float], upper: Sequence[float]) -> HPolytope:
    """Axis-aligned box; use ``math.inf`` bounds for free coordinates."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape:
        raise PolytopeError("bound shapes differ")
    rows, offs = [], []
    n = lower.size
    for i in range(n):
        if np.isfinite(upper[i]):
            e = np.zeros(n)
            e[i] = 1.0
            rows.append(e)
            offs.append(upper[i])
        if np.isfinite(lower[i]):
            e = np.zeros(n)
            e[i] = -1.0
            rows.append(e)
            offs.append(-lower[i])
    if not rows:
        raise PolytopeError("a box needs at least one finite bound")
    return HPolytope(np.array(rows), np.array(offs))


def is_empty(p: HPolytope) -> bool:
    if p.empty:
        return True
    if not p._feasible:
        p._feasible.append(is_feasible(p.h_matrix, p.h_vector))
    return not p._feasible[0]


def _check_point(p: HPolytope, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != p.dim:
        raise PolytopeError(f"point has length {x.size}, polytope has dim {p.dim}")
    return x


def contains(p: HPolytope, x, tol: float = MEMBER_TOL) -> bool:
    x = _check_point(p, x)
    if p.empty:
        return False
    return bool(np.all(p.h_matrix @ x <= p.h_vector + tol))


def contains_many(p: HPolytope, xs, tol: float = MEMBER_TOL) -> np.ndarray:
    """Vectorized membership for an ``(N, dim)`` array of points."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != p.dim:
        raise PolytopeError("points have the wrong dimension")
    if p.empty:
        return np.zeros(xs.shape[0], dtype=bool)
    return np.all(xs @ p.h_matrix.T <= p.h_vector + tol, axis=1)


def support(p: HPolytope, direction) -> LPResult:
    return lp_maximize(direction, p.h_matrix, p.h_vector)


def _same_dim(p: HPolytope, q: HPolytope) -> None:
    if p.dim != q.dim:
        raise PolytopeError(f"dimension mismatch: {p.dim} vs {q.dim}")


def _dedupe(hm: np.ndarray, hv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Collapse rows with (numerically) identical unit normals to the tightest one."""
    keys = np.round(hm, 12)
    order = np.lexsort(np.vstack([hv, keys.T[::-1]]))
    keep = []
    last = None
    for i in order:
        k = keys[i].tobytes()
        if k != last:
            keep.append(i)
            last = k
    keep.sort()
    return hm[keep], hv[keep]


def remove_redundancy(p: HPolytope) -> HPolytope:
    """Drop every row implied by the others (LP test, tolerance 1e-7).

    Rows are normalized first. An infeasible input comes back flagged empty
    with its rows intact.
    """
    q = p.normalize()
    if is_empty(q):
        return HPolytope(q.h_matrix, q.h_vector, empty=True)
    hm, hv = _dedupe(q.h_matrix, q.h_vector)
    keep = np.ones(hv.size, dtype=bool)
    for i in range(hv.size):
        keep[i] = False
        if not keep.any():
            keep[i] = True
            continue
        res = lp_maximize(hm[i], hm[keep], hv[keep])
        if not (res.optimal and res.optimum <= hv[i] + SUPPORT_TOL):
            keep[i] = True
    return HPolytope(hm[keep], hv[keep])


def intersect(p: HPolytope, q: HPolytope) -> HPolytope:
    _same_dim(p, q)
    joined = HPolytope(np.vstack([p.h_matrix, q.h_matrix]), np.concatenate([p.h_vector, q.h_vector]))
    return remove_redundancy(joined)


def pre_set(p: HPolytope, a_cl) -> HPolytope:
    """Preimage ``{x : H A x <= h}`` of ``p`` under ``x -> A x``; no pruning.

    Rows whose normal vanishes under a singular ``A`` are either trivially
    true (dropped) or trivially false (result flagged empty).
    """
    a = as_matrix(a_cl, "a_cl")
    if a.shape != (p.dim, p.dim):
        raise PolytopeError(f"map shape {a.shape} does not match dim {p.dim}")
    hm = p.h_matrix @ a
    hv = p.h_vector.copy()
    live = np.linalg.norm(hm, axis=1) > 1e-12 * max(1.0, float(np.abs(a).max()))
    if np.any(hv[~live] < 0):
        return HPolytope(p.h_matrix, p.h_vector, empty=True)
    if not live.any():
        raise PolytopeError("preimage is the whole space")
    return HPolytope(hm[live], hv[live], empty=p.empty)


def is_subset(p: HPolytope, q: HPolytope, tol: float = SUPPORT_TOL) -> bool:
    """True iff ``p`` is contained in ``q`` (an empty ``p`` is a subset of anything)."""
    _same_dim(p, q)
    if is_empty(p):
        return True
    for row, off in zip(q.h_matrix, q.h_vector):
        res = support(p, row)
        if res.status is LPStatus.UNBOUNDED:
            return False
        if res.status is LPStatus.INFEASIBLE:
            return True
        if res.optimum > off + tol * max(1.0, float(np.linalg.norm(row))):
            return False
    return True


def equals(p: HPolytope, q: HPolytope) -> bool:
    return is_subset(p, q) and is_subset(q, p)


def scale(p: HPolytope, alpha: float) -> HPolytope:
    """``{alpha x : x in p}`` about the origin, which must be interior."""
    if not 0.0 < alpha <= 1.0:
        raise PolytopeError(f"alpha must lie in (0, 1], got {alpha}")
    q = p.normalize()
    if np.any(q.h_vector <= 0.0):
        raise PolytopeError("origin is not interior; scaling would not give a subset")
    return HPolytope(q.h_matrix, alpha * q.h_vector, q.empty)


def is_bounded(p: HPolytope) -> bool:
    for i in range(p.dim):
        for s in (1.0, -1.0):
            d = np.zeros(p.dim)
            d[i] = s
            if support(p, d).status is LPStatus.UNBOUNDED:
                return False
    return True


def vertices_2d(p: HPolytope) -> List[np.ndarray]:
    """Counterclockwise vertex list of a bounded planar polytope."""
    if p.dim != 2:
        raise PolytopeError("vertices_2d needs a 2-D polytope")
    if is_empty(p):
        return []
    if not is_bounded(p):
        raise PolytopeError("polytope is unbounded")
    q = remove_redundancy(p)
    hm, hv = q.h_matrix, q.h_vector
    m = hv.size
    order = np.argsort(np.arctan2(hm[:, 1], hm[:, 0]))
    pairs = [(order[k], order[(k + 1) % m]) for k in range(m)] if m > 1 else []
    pts = _pair_vertices(hm, hv, pairs)
    if len(pts) < 3:
        pts = _pair_vertices(hm, hv, [(i, j) for i in range(m) for j in range(i + 1, m)])
    return _order_ccw(_merge(pts))


def _pair_vertices(hm, hv, pairs) -> List[np.ndarray]:
    out = []
    scale_ = max(1.0, float(np.abs(hv).max()))
    for i, j in pairs:
        mat = hm[[i, j]]
        if abs(np.linalg.det(mat)) < 1e-13:
            continue
        v = np.linalg.solve(mat, hv[[i, j]])
        if np.all(hm @ v <= hv + 1e-7 * scale_):
            out.append(v)
    return out


def _merge(pts: List[np.ndarray], tol: float = 1e-8) -> List[np.ndarray]:
    out: List[np.ndarray] = []
    for v in pts:
        if all(np.linalg.norm(v - w) > tol for w in out):
            out.append(v)
    return out


def _order_ccw(pts: List[np.ndarray]) -> List[np.ndarray]:
    if len(pts) < 3:
        return pts
    c = np.mean(pts, axis=0)
    # scale-aware angle so thin sets still sort correctly
    spread = np.ptp(np.array(pts), axis=0)
    spread[spread == 0] = 1.0
    ang = [math.atan2((v[1] - c[1]) / spread[1], (v[0] - c[0]) / spread[0]) for v in pts]
    return [pts[i] for i in np.argsort(ang)]


# ---------------------------------------------------------------------------
# ".poly" text format: "dim n", "rows m", then m lines of normal + offset


def dumps(p: HPolytope) -> str:
    q = p.normalize()
    lines = [f"dim {q.dim}", f"rows {q.n_rows}"]
    for row, off in zip(q.h_matrix, q.h_vector):
        lines.append(" ".join(repr(float(v)) for v in (*row, off)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> HPolytope:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    try:
        key, n = lines[0].split()
        key2, m = lines[1].split()
        if key != "dim" or key2 != "rows":
            raise ValueError("header must be 'dim n' then 'rows m'")
        n, m = int(n), int(m)
        body = [[float(t) for t in ln.split()] for ln in lines[2:]]
    except (IndexError, ValueError) as exc:
        raise PolytopeError(f"malformed .poly data: {exc}") from None
    if len(body) != m or any(len(r) != n + 1 for r in body):
        raise PolytopeError(f"expected {m} rows of {n + 1} numbers")
    arr = np.array(body, dtype=float).reshape(m, n + 1)
    return HPolytope(arr[:, :n], arr[:, n])


def save(p: HPolytope, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(p), encoding="utf-8")


def load(path: Union[str, Path]) -> HPolytope:
    return loads(Path(path).read_text(encoding="utf-8"))
