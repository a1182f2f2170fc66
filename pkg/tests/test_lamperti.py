import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from lpopalg.errors import ExponentTwo, NotIsometry
from lpopalg.lpcore import Operator, WeightedSpace, lp_norm
from lpopalg.lamperti import (
    NotSpatial,
    SpatialIsometry,
    SpatialQuadruple,
    build_spatial_isometry,
    build_spatial_partial_isometry,
    classify_spatial,
    core_check,
    expm,
    hermitian_test,
    isometry_distance,
    lamperti_decompose,
    two_exponent_check,
)
from lpopalg.opnorm import is_invertible_isometry, opnorm_oracle

not_two = st.sampled_from([1.0, 1.5, 3.0, 4.0])


@st.composite
def spatial_isometries(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    r = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    space = WeightedSpace(r.uniform(0.5, 2, n))
    return SpatialIsometry(space, r.permutation(n), np.exp(2j * np.pi * r.random(n)))


def test_build_examples():
    u = WeightedSpace.uniform(2)
    m = build_spatial_isometry(SpatialIsometry(u, [0, 1], [1j, -1]), 3).matrix
    np.testing.assert_array_equal(m, np.diag([1j, -1]))
    m = build_spatial_isometry(SpatialIsometry(u, [1, 0], [1, 1]), 3).matrix
    np.testing.assert_array_equal(m, [[0, 1], [1, 0]])
    op = build_spatial_isometry(SpatialIsometry(WeightedSpace([1, 2]), [1, 0], [1, 1]), 3)
    np.testing.assert_allclose(op.matrix, [[0, 2 ** (1 / 3)], [2 ** (-1 / 3), 0]])
    np.testing.assert_allclose(lp_norm(op.matrix, op.codomain.weights, 3) / lp_norm(np.eye(2), op.domain.weights, 3), 1)
    assert is_invertible_isometry(op, 3)


def test_decompose_examples():
    si = lamperti_decompose([[0, 1], [1, 0]], 3)
    assert si.perm.tolist() == [1, 0]
    np.testing.assert_array_equal(si.phases, [1, 1])
    ph = np.exp(1j * np.array([0.3, -1.2, 2.0]))
    si = lamperti_decompose(np.diag(ph), 1.5)
    assert si.perm.tolist() == [0, 1, 2]
    np.testing.assert_allclose(si.phases, ph, atol=1e-15)


def test_decompose_errors():
    with pytest.raises(ExponentTwo):
        lamperti_decompose(np.eye(2), 2)
    with pytest.raises(NotIsometry):
        lamperti_decompose(0.5 * np.ones((2, 2)), 3)


@given(spatial_isometries(), not_two)
@settings(max_examples=100)
def test_roundtrip(si, p):
    back = lamperti_decompose(build_spatial_isometry(si, p), p)
    np.testing.assert_array_equal(back.perm, si.perm)
    np.testing.assert_allclose(back.phases, si.phases, atol=1e-12)


@given(spatial_isometries(max_n=6), st.integers(0, 2**32 - 1), not_two)
def test_group_law(si, seed, p):
    r = np.random.default_rng(seed)
    other = SpatialIsometry(si.space, r.permutation(si.space.n), np.exp(2j * np.pi * r.random(si.space.n)))
    lhs = build_spatial_isometry(si, p).matrix @ build_spatial_isometry(other, p).matrix
    np.testing.assert_allclose(lhs, build_spatial_isometry(si * other, p).matrix, atol=1e-12)


def test_distance_examples():
    rep = isometry_distance([1, 1], [0, 1], [-1, 1], [0, 1], 3)
    assert rep.analytic == 2 and rep.numeric == pytest.approx(2, abs=1e-9) and rep.agree
    rep = isometry_distance([1, 1], [0, 1], [1, 1], [0, 1], 3)
    assert rep.analytic == 0 and rep.numeric == pytest.approx(0, abs=1e-12)
    # different permutations: the two-sided formula gives 2, which is exact at p = 1 ...
    rep = isometry_distance([1, 1], [0, 1], [1, 1], [1, 0], 1)
    assert rep.analytic == 2 and rep.agree
    # ... but the true norm of I - swap at p = 3 is 2, and of I - 3-cycle at p = 2 is sqrt(3)
    rep = isometry_distance([1, 1, 1], [0, 1, 2], [1, 1, 1], [1, 2, 0], 2)
    assert rep.numeric == pytest.approx(np.sqrt(3), abs=1e-9)
    assert not rep.agree


def test_distance_below_two_is_certified():
    # ||diag(1, 1) - [[0, -1], [1, 0]]|| at p = 3, certified by the oracle to sit below 2
    a = np.eye(2) - np.array([[0, -1], [1, 0]])
    orc = opnorm_oracle(a, 3)
    assert orc.upper_bound < 2 - 0.1
    assert orc.lower_bound == pytest.approx(2 ** (2 / 3), rel=1e-10)


@given(spatial_isometries(max_n=5), not_two)
def test_distance_same_permutation(si, p):
    r = np.random.default_rng(0)
    g = np.exp(2j * np.pi * r.random(si.space.n))
    rep = isometry_distance(si.phases, si.perm, g, si.perm, p, space=si.space)
    assert rep.agree


def test_partial_isometry_examples():
    u2 = WeightedSpace.uniform(2)
    q = SpatialQuadruple(u2, (0,), (1,), {0: 1})
    s, t = build_spatial_partial_isometry(q, 3)
    np.testing.assert_array_equal(s.matrix, [[0, 0], [1, 0]])
    np.testing.assert_array_equal(t.matrix, [[0, 1], [0, 0]])
    np.testing.assert_array_equal((s @ t).matrix, np.diag([0, 1]))
    full = SpatialQuadruple(u2, (0, 1), (0, 1), {0: 1, 1: 0}, {0: 1j, 1: -1})
    np.testing.assert_array_equal(
        build_spatial_partial_isometry(full, 3)[0].matrix,
        build_spatial_isometry(SpatialIsometry(u2, [1, 0], [1j, -1]), 3).matrix,
    )
    w = WeightedSpace([1, 3])
    s, _ = build_spatial_partial_isometry(SpatialQuadruple(w, (0,), (1,), {0: 1}), 3)
    assert s.matrix[1, 0] == pytest.approx(3 ** (-1 / 3))
    assert lp_norm(s.matrix[:, 0], w.weights, 3) == pytest.approx(lp_norm(np.array([1, 0]), w.weights, 3))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1), not_two)
def test_classify_recovers_quadruple(n, seed, p):
    r = np.random.default_rng(seed)
    space = WeightedSpace(r.uniform(0.5, 2, n))
    k = r.integers(0, n + 1)
    E = r.choice(n, k, replace=False)
    F = r.choice(n, k, replace=False)
    q = SpatialQuadruple(space, tuple(E), tuple(F), dict(zip(E.tolist(), F.tolist())),
                         {int(f): np.exp(2j * np.pi * r.random()) for f in F})
    s, t = build_spatial_partial_isometry(q, p)
    got = classify_spatial(s, p)
    assert got.same_as(q, tol=1e-12)
    np.testing.assert_allclose((t @ s).matrix, np.diag(np.isin(np.arange(n), E).astype(float)), atol=1e-12)
    np.testing.assert_allclose((s @ t).matrix, np.diag(np.isin(np.arange(n), F).astype(float)), atol=1e-12)


def test_classify_examples():
    q = classify_spatial([[0, 0], [1, 0]], 3)
    assert q.domain_set == (0,) and q.range_set == (1,)
    v = classify_spatial(0.5 * np.ones((2, 2)), 1.5)
    assert isinstance(v, NotSpatial) and not v and v.row == 0
    q = classify_spatial(np.zeros((2, 2)), 4)
    assert q.domain_set == () and q.range_set == ()
    with pytest.raises(ExponentTwo):
        classify_spatial(np.eye(2), 2)


def test_expm_matches_scipy(rng):
    for scale in (0.01, 1.0, 30.0):
        a = scale * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        ref = scipy.linalg.expm(a)
        np.testing.assert_allclose(expm(a), ref, rtol=1e-11, atol=1e-13 * np.abs(ref).max())


def test_hermitian_examples():
    assert hermitian_test(np.diag([0.3, -2.0, 1.0]), 3)
    swap = np.array([[0, 1], [1, 0]])
    assert hermitian_test(swap, 2)
    assert not hermitian_test(swap, 4)
    # the generic-t norm of exp(i t swap) at p = 4 exceeds 1 by a wide, certified margin
    assert opnorm_oracle(expm(0.7j * swap), 4).lower_bound > 1.18


@given(st.integers(0, 2**32 - 1), not_two)
@settings(max_examples=15)
def test_hermitian_real_diagonal(seed, p):
    d = np.random.default_rng(seed).standard_normal(3) * 3
    assert hermitian_test(np.diag(d), p)


def test_hermitian_random_search_finds_only_diagonals(rng):
    grid = np.pi * np.arange(1, 9) / 8
    for _ in range(30):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = (h + h.conj().T) / 2
        if rng.random() < 0.3:
            h = np.diag(np.diag(h))
        if hermitian_test(h, 4, t_grid=grid):
            assert abs(h[0, 1]) <= 1e-9


def test_core_check():
    assert core_check([np.diag([1, 2, 3]), np.diag([1j, 0, -1])], 3).all_pass
    e12 = np.array([[0, 1], [0, 0]])
    assert core_check([e12], 3).failed == {0: [(0, 1, 1.0)]}
    rep = core_check([np.diag([1, 2]) + 0.5 * e12], 1.5)
    assert rep.failed[0] == [(0, 1, 0.5)]
    with pytest.raises(ExponentTwo):
        core_check([np.eye(2)], 2)


def test_two_exponent_check():
    v = two_exponent_check(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]]), 1, 3)
    assert v.passes and v.worst_ratio == 1
    assert two_exponent_check(np.diag([1j, -1]), 1.5, 4).passes
    w = WeightedSpace([1, 2])
    op = build_spatial_isometry(SpatialIsometry(w, [1, 0], [1, 1]), 3)
    with pytest.raises(NotIsometry) as err:
        two_exponent_check(op, 3, 1)
    assert err.value.exponent == 1
