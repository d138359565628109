import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenspec.errors import DimensionMismatch, SingularFrame
from heisenspec.group import (AffineChange, FirstOrderField, GroupSpec, Point, dilate, group_mul,
                              heisenberg_correction, jacobian_det, privileged_change, pseudo_norm,
                              structure_constants)

coord = st.floats(-10, 10, allow_nan=False)


@st.composite
def group_and_points(draw, count=3):
    d = draw(st.integers(1, 5))
    b = np.array(draw(st.lists(coord, min_size=d * d, max_size=d * d))).reshape(d, d)
    g = GroupSpec(d, b)
    pts = [Point(draw(coord), draw(st.lists(coord, min_size=d, max_size=d))) for _ in range(count)]
    return g, pts


def close(p, q, tol=1e-10):
    scale = max(1.0, np.abs(p.as_array()).max(), np.abs(q.as_array()).max())
    return np.allclose(p.as_array(), q.as_array(), rtol=0, atol=tol * scale * scale)


def test_h3_product_example():
    g = GroupSpec.heisenberg(1)
    r = group_mul(g, Point(0, [1, 0]), Point(0, [0, 1]))
    assert r.x0 == -1.0 and list(r.xp) == [1.0, 1.0]


def test_heisenberg_law_matches_standard_formula(rng):
    n = 3
    g = GroupSpec.heisenberg(n)
    x, y = rng.normal(size=2 * n + 1), rng.normal(size=2 * n + 1)
    r = group_mul(g, Point.from_array(x), Point.from_array(y))
    expect = x[0] + y[0] + sum(x[1 + n + j] * y[1 + j] - x[1 + j] * y[1 + n + j] for j in range(n))
    assert r.x0 == pytest.approx(expect, abs=1e-14)


@given(group_and_points())
def test_identity_and_inverse(data):
    g, (x, _, _) = data
    assert close(group_mul(g, x, g.identity()), x)
    assert close(group_mul(g, g.identity(), x), x)
    assert close(group_mul(g, x, g.inverse(x)), g.identity())
    assert close(group_mul(g, g.inverse(x), x), g.identity())


def test_inverse_is_negation_for_heisenberg(rng):
    g = GroupSpec.heisenberg(2)
    x = Point.from_array(rng.normal(size=5))
    assert close(g.inverse(x), Point(-x.x0, -x.xp))


@given(group_and_points())
def test_associativity(data):
    g, (x, y, z) = data
    assert close(group_mul(g, group_mul(g, x, y), z), group_mul(g, x, group_mul(g, y, z)))


@given(group_and_points(2), st.floats(-3, 3, allow_nan=False))
def test_dilation_is_homomorphism(data, lam):
    g, (x, y) = data
    assert close(dilate(lam, group_mul(g, x, y)), group_mul(g, dilate(lam, x), dilate(lam, y)))


def test_dilation_examples():
    x = Point(1, [1, 0, 0])
    assert close(dilate(1, x), x)
    r = dilate(2, x)
    assert r.x0 == 4 and list(r.xp) == [2, 0, 0]


@given(group_and_points(1), st.floats(-5, 5, allow_nan=False).filter(lambda t: t == 0 or abs(t) > 1e-3))
def test_pseudo_norm_homogeneous(data, t):
    _, (x,) = data
    assert pseudo_norm(dilate(t, x)) == pytest.approx(abs(t) * pseudo_norm(x), rel=1e-12, abs=1e-300)


def test_pseudo_norm_examples(rng):
    assert pseudo_norm(Point(1, [0, 0])) == 1
    v = rng.normal(size=4)
    assert pseudo_norm(Point(0, v)) == pytest.approx(np.linalg.norm(v), rel=1e-15)


def test_dimension_mismatch():
    g = GroupSpec.heisenberg(1)
    with pytest.raises(DimensionMismatch):
        group_mul(g, Point(0, [1, 2]), Point(0, [1, 2, 3]))
    with pytest.raises(DimensionMismatch):
        GroupSpec(2, np.eye(3))


def test_structure_constants_h3():
    L = GroupSpec.heisenberg(1).structure_matrix()
    assert L[0, 1] == -2 and L[1, 0] == 2


def test_structure_constants_symmetric_b(rng):
    a = rng.normal(size=(3, 3))
    assert np.all(structure_constants(a + a.T) == 0)


def _commutator(g, j, k, f, x, h=1e-2):
    Xj, Xk = FirstOrderField(g, j), FirstOrderField(g, k)
    return Xj.apply(lambda y: Xk.apply(f, y, h), x, h) - Xk.apply(lambda y: Xj.apply(f, y, h), x, h)


@given(group_and_points(1), st.integers(0, 2**32 - 1))
def test_structure_constants_match_commutator(data, seed):
    g, (x,) = data
    r = np.random.default_rng(seed)
    m = g.d + 1
    Q = r.normal(size=(m, m))
    c = r.normal(size=m)

    def f(v):
        return v @ Q @ v + c @ v

    L = g.structure_matrix()
    v = x.as_array()
    df0 = (Q + Q.T)[0] @ v + c[0]
    for j in range(1, m):
        for k in range(1, m):
            got = _commutator(g, j, k, f, v)
            assert got == pytest.approx(L[j - 1, k - 1] * df0, abs=1e-8 * (1 + abs(df0)) * (1 + np.abs(L).max()))


def test_field_homogeneity(rng):
    g = GroupSpec(3, rng.normal(size=(3, 3)))
    Q = rng.normal(size=(4, 4))

    def f(v):
        return v @ Q @ v + v[0] ** 2 * v[1]

    lam = 1.7
    x = rng.normal(size=4)
    dil = np.array([lam ** 2, lam, lam, lam])
    for j in range(0, 4):
        X = FirstOrderField(g, j)
        lhs = X.apply(lambda v: f(dil * v), x, 1e-4)
        rhs = lam ** (-X.degree) * X.apply(f, dil * x, 1e-4)
        assert lhs == pytest.approx(rhs, rel=1e-6)


def test_privileged_identity_frame():
    u = Point(1.0, [2.0, 3.0])
    psi = privileged_change(np.eye(3), u)
    x = Point(4.0, [5.0, 7.0])
    assert np.allclose(psi(x).as_array(), x.as_array() - u.as_array())
    assert np.allclose(psi(u).as_array(), 0)


def test_privileged_sends_frame_to_basis(rng):
    B = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    u = Point.from_array(rng.normal(size=4))
    psi = privileged_change(B, u)
    assert np.allclose(psi(u).as_array(), 0, atol=1e-14)
    # rows of B are the frame vectors; the linear part maps them to e_j
    assert np.allclose(psi.A @ B.T, np.eye(4), atol=1e-12)
    x = Point.from_array(rng.normal(size=4))
    assert close(psi.inverse(psi(x)), x)


def test_privileged_singular_frame():
    B = np.eye(3)
    B[:, 1] = 0
    with pytest.raises(SingularFrame):
        privileged_change(B, Point(0, [0, 0]))


def test_correction_antisymmetric_is_identity(rng):
    phi = heisenberg_correction(GroupSpec.heisenberg(1).b)
    x = Point.from_array(rng.normal(size=3))
    assert phi(x) == x


def test_correction_identity_b():
    phi = heisenberg_correction(np.eye(2))
    r = phi(Point(1.0, [2.0, 3.0]))
    assert r.x0 == pytest.approx(1.0 - 0.5 * (4 + 9))


@given(group_and_points(1), st.floats(-3, 3, allow_nan=False))
def test_correction_properties(data, lam):
    g, (x,) = data
    phi = heisenberg_correction(g.b)
    assert close(phi.inverse(phi(x)), x)
    assert close(phi.inverse(x), Point.from_array(-phi(Point.from_array(-x.as_array())).as_array()))
    assert close(phi(dilate(lam, x)), dilate(lam, phi(x)))


@settings(max_examples=50)
@given(group_and_points(1))
def test_correction_unimodular(data):
    g, (x,) = data
    assert jacobian_det(heisenberg_correction(g.b), x, h=1e-2) == pytest.approx(1.0, abs=1e-10)


def test_json_round_trip(rng):
    g = GroupSpec(3, rng.normal(size=(3, 3)))
    g2 = GroupSpec.from_json(g.to_json())
    assert np.array_equal(g.b, g2.b) and json.loads(g.to_json())["d"] == 3
    p = Point(1.5, [1, 2, 3])
    assert Point.from_dict(json.loads(json.dumps(p.to_dict()))) == p
