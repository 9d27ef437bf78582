import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setguard.polytope import (
    HPolytope,
    PolytopeError,
    box,
    contains,
    contains_many,
    dumps,
    equals,
    intersect,
    is_bounded,
    is_empty,
    is_subset,
    load,
    loads,
    pre_set,
    remove_redundancy,
    save,
    scale,
    vertices_2d,
)

X = box([-0.4, -math.inf], [0.4, math.inf])
A_CL = np.array([[1.0, 0.002], [-0.075, 0.975]])
UNIT = box([-1, -1], [1, 1])


def hull_2d(points):
    """Monotone-chain convex hull, counterclockwise."""
    pts = sorted(map(tuple, points))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def in_hull(hull, pts):
    inside = np.ones(len(pts), dtype=bool)
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        cr = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        inside &= cr >= -1e-12
    return inside


def ray_cast_boundary(p, angles):
    """Distance from the origin to the boundary of p along each angle."""
    out = []
    for t in angles:
        d = np.array([math.cos(t), math.sin(t)])
        hd = p.h_matrix @ d
        out.append(np.min(p.h_vector[hd > 0] / hd[hd > 0]))
    return np.array(out)


def test_membership_examples():
    assert contains(X, [0, 0])
    assert contains(X, [0.4, 123.0])
    assert not contains(X, [0.401, 0])
    with pytest.raises(PolytopeError):
        contains(X, [0.0])


def test_construction_rejects_zero_rows_and_big_dims():
    with pytest.raises(PolytopeError):
        HPolytope([[0.0, 0.0]], [1.0])
    with pytest.raises(PolytopeError):
        HPolytope(np.ones((1, 9)), [1.0])


def test_intersect_examples():
    assert equals(intersect(X, X), X)
    half = HPolytope([[1.0, 0.0]], [0.0])
    assert equals(intersect(UNIT, half), box([-1, -1], [0, 1]))
    strip = HPolytope([[1.0, 0.002], [-1.0, -0.002]], [0.4, 0.4])
    par = remove_redundancy(intersect(X, strip))
    assert par.n_rows == 4 and is_bounded(par)
    res = np.max([abs(v[1]) for v in vertices_2d(par)])
    assert abs(res - 400.0) < 1e-6


def test_remove_redundancy_examples():
    dup = HPolytope(np.vstack([UNIT.h_matrix, [[1.0, 0.0]]]), np.append(UNIT.h_vector, 1.0))
    assert remove_redundancy(dup).n_rows == 4
    loose = HPolytope(np.vstack([UNIT.h_matrix, [[1.0, 0.0]]]), np.append(UNIT.h_vector, 5.0))
    r = remove_redundancy(loose)
    assert r.n_rows == 4 and equals(r, UNIT)


def test_remove_redundancy_infeasible_is_empty():
    p = remove_redundancy(HPolytope([[1.0], [-1.0]], [1.0, -2.0]))
    assert is_empty(p)


def test_remove_redundancy_random_halfplanes_vs_hull(rng):
    for _ in range(5):
        # 20 tangent half-planes around a random polygon-ish blob, all containing the origin
        normals = rng.normal(size=(20, 2))
        offsets = rng.uniform(0.3, 1.5, 20)
        p = HPolytope(normals, offsets)
        r = remove_redundancy(p)
        assert r.n_rows <= 20
        hull = hull_2d(vertices_2d(r))
        pts = rng.uniform(-3, 3, size=(10_000, 2))
        m_orig = contains_many(p, pts)
        assert np.array_equal(m_orig, contains_many(r, pts))
        # the vertex hull agrees away from round-off at the boundary
        slack = np.min(p.normalize().h_vector - pts @ p.normalize().h_matrix.T, axis=1)
        clear = np.abs(slack) > 1e-9
        assert np.array_equal(m_orig[clear], in_hull(hull, pts)[clear])


def test_pre_set_examples():
    assert equals(pre_set(UNIT, np.eye(2)), UNIT)
    big = box([-1e6, -1e6], [1e6, 1e6])
    m = np.array([[2.0, 0.0], [0.0, 0.5]])
    assert equals(pre_set(big, m), box([-5e5, -2e6], [5e5, 2e6]))
    pre = pre_set(X, A_CL)
    expect = HPolytope([[1.0, 0.002], [-1.0, -0.002]], [0.4, 0.4])
    assert equals(pre, expect)


def test_is_subset_examples():
    assert is_subset(X, X)
    assert is_subset(box([-0.2, -0.2], [0.2, 0.2]), UNIT)
    assert not is_subset(X, box([-0.3, -math.inf], [0.3, math.inf]))


def test_scale_examples():
    assert equals(scale(UNIT, 1.0), UNIT)
    assert equals(scale(UNIT, 0.5), box([-0.5, -0.5], [0.5, 0.5]))
    with pytest.raises(PolytopeError):
        scale(UNIT, 1.5)


def test_scale_vertices_are_scaled(sets):
    alpha = sets.attenuation.alpha
    vo = vertices_2d(sets.o_inf)
    vs = vertices_2d(scale(sets.o_inf, alpha))
    assert len(vo) == len(vs)
    for a, b in zip(vo, vs):
        assert np.allclose(alpha * a, b, atol=1e-9)


def test_vertices_examples():
    v = vertices_2d(UNIT)
    assert {tuple(np.round(x, 12)) for x in v} == {(1, 1), (-1, 1), (-1, -1), (1, -1)}
    tri = HPolytope([[-1, 0], [0, -1], [1, 1]], [0, 0, 1])
    assert {tuple(np.round(x, 12) + 0.0) for x in vertices_2d(tri)} == {(0, 0), (1, 0), (0, 1)}


def test_vertices_are_counterclockwise(sets):
    v = np.array(vertices_2d(sets.o_inf))
    area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
    assert area > 0


def test_vertices_match_ray_casting(sets):
    o = sets.o_inf
    verts = np.array(vertices_2d(o))
    # rescale velocity so rays sample both axes evenly
    sv = 1000.0
    o_s = HPolytope(o.h_matrix * [1.0, sv], o.h_vector)
    for v in verts:
        ang = math.atan2(v[1] / sv, v[0])
        r = ray_cast_boundary(o_s, [ang])[0]
        assert abs(r - math.hypot(v[0], v[1] / sv)) < 1e-6
    # every ray hits a boundary point lying on an edge of the vertex polygon
    angles = np.linspace(0, 2 * math.pi, 720, endpoint=False)
    radii = ray_cast_boundary(o_s, angles)
    pts = np.c_[radii * np.cos(angles), radii * np.sin(angles) * sv]
    hull = hull_2d(verts)
    assert np.all(in_hull(hull, pts * (1 - 1e-9)))
    assert not np.any(in_hull(hull, pts * (1 + 1e-6)))


def test_is_bounded():
    assert not is_bounded(X)
    assert is_bounded(UNIT)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_membership_properties(seed):
    r = np.random.default_rng(seed)
    p = HPolytope(r.normal(size=(8, 2)), r.uniform(0.2, 1.0, 8))
    q = HPolytope(r.normal(size=(6, 2)), r.uniform(0.2, 1.0, 6))
    pts = r.uniform(-2, 2, size=(10_000, 2))
    both = contains_many(intersect(p, q), pts)
    assert np.array_equal(both, contains_many(p, pts) & contains_many(q, pts))
    assert np.array_equal(contains_many(remove_redundancy(p), pts), contains_many(p, pts))
    a = float(r.uniform(0.1, 1.0))
    inner = contains_many(scale(p, a), pts)
    assert np.all(contains_many(p, pts)[inner])
    assert is_subset(scale(p, a), p)


def test_poly_roundtrip(tmp_path, sets):
    path = tmp_path / "o.poly"
    save(sets.o_inf, path)
    back = load(path)
    assert np.array_equal(back.h_matrix, sets.o_inf.h_matrix)
    assert np.array_equal(back.h_vector, sets.o_inf.h_vector)
    assert loads(dumps(back)) == back or equals(loads(dumps(back)), back)


def test_poly_parse_errors():
    with pytest.raises(PolytopeError):
        loads("dim 2\nrows 1\n1 0\n")
    with pytest.raises(PolytopeError):
        loads("garbage")
