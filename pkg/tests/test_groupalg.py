import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpopalg.errors import (
    ExponentTwo,
    InvalidGroup,
    InvalidNormalSubgroup,
    InvalidSubgroup,
    NonSpatialImage,
    NotContractive,
    NotHomomorphism,
)
from lpopalg.groupalg import (
    FiniteGroup,
    GroupFunction,
    HomCandidate,
    conv_matrix,
    duality_check,
    find_isomorphism,
    fp_lambda_norm,
    hom_decompose,
    isom_group_verify,
    quotient_contraction_check,
    quotient_pushforward,
    recover_group,
    sharp,
    subgroup_isometry_check,
    translation,
    z2_function,
    z2_norm,
)
from lpopalg.opnorm import SearchConfig, opnorm_oracle

# oracle value of the Z2 element (a, b) = (1, -i) at p = 4 (equals 2^(1/4))
Z2_ONE_MINUS_I_P4 = 1.189207115002721

GROUPS = ["Z1", "Z2", "Z3", "Z4", "Z2xZ2", "S3", "Z6", "Z2xZ4"]
group_names = st.sampled_from(GROUPS)


def rand_function(G, seed):
    r = np.random.default_rng(seed)
    return GroupFunction(G, r.standard_normal(G.order) + 1j * r.standard_normal(G.order))


def test_group_validation():
    with pytest.raises(InvalidGroup):
        FiniteGroup([0, 1], [[0, 1], [1, 1]])
    with pytest.raises(InvalidGroup):
        FiniteGroup([0, 1, 2], [[0, 1, 2], [1, 0, 0], [2, 0, 0]])
    with pytest.raises(InvalidGroup):
        FiniteGroup([], [])
    G = FiniteGroup.from_name("S3")
    assert G.order == 6 and not G.is_abelian()
    assert FiniteGroup.from_name("Z2xZ2").is_abelian()
    with pytest.raises(InvalidSubgroup):
        FiniteGroup.cyclic(4).subgroup([0, 1])
    s3 = FiniteGroup.symmetric(3)
    transposition = [s3.identity, s3.index("102")]
    with pytest.raises(InvalidNormalSubgroup):
        s3.quotient(transposition)


def test_conv_matrix_examples():
    G = FiniteGroup.from_name("S3")
    np.testing.assert_array_equal(conv_matrix(GroupFunction.delta(G, G.identity)).matrix, np.eye(6))
    for g in range(6):
        lt = conv_matrix(GroupFunction.delta(G, g)).matrix
        for u in range(6):
            e = np.zeros(6)
            e[u] = 1
            np.testing.assert_array_equal(lt @ e, np.eye(6)[G.mul(g, u)])
    c0, c1 = 0.3 - 1j, 2.0 + 0.5j
    np.testing.assert_array_equal(conv_matrix(GroupFunction(FiniteGroup.cyclic(2), [c0, c1])).matrix, [[c0, c1], [c1, c0]])


@given(group_names, st.integers(0, 2**32 - 1))
def test_conv_matrix_is_homomorphism(name, seed):
    G = FiniteGroup.from_name(name)
    f, g = rand_function(G, seed), rand_function(G, seed + 1)
    np.testing.assert_allclose(conv_matrix(f * g).matrix, conv_matrix(f).matrix @ conv_matrix(g).matrix, atol=1e-12)


@given(group_names, st.integers(0, 2**32 - 1))
def test_sharp_anti_multiplicative(name, seed):
    G = FiniteGroup.from_name(name)
    f, g = rand_function(G, seed), rand_function(G, seed + 1)
    np.testing.assert_allclose(sharp(f * g).values, (sharp(g) * sharp(f)).values, atol=1e-12)


def test_sharp_examples():
    G = FiniteGroup.from_name("S3")
    for g in range(6):
        np.testing.assert_array_equal(sharp(GroupFunction.delta(G, g)).values, GroupFunction.delta(G, G.inv(g)).values)
    f = GroupFunction(FiniteGroup.cyclic(2), [1 + 2j, -3])
    np.testing.assert_array_equal(sharp(f).values, f.values)


@given(group_names, st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_fp_norm_special_exponents(name, seed):
    G = FiniteGroup.from_name(name)
    f = rand_function(G, seed)
    for p in (1.0, 1.5, 3.0):
        assert fp_lambda_norm(GroupFunction.delta(G, G.identity), p).lower_bound == pytest.approx(1)
    assert fp_lambda_norm(f, 1).lower_bound == pytest.approx(f.l1_norm(), rel=1e-9)
    if G.is_abelian():
        # characters diagonalize abelian convolution: the norm is the largest Fourier modulus
        eig = np.linalg.eigvals(conv_matrix(f).matrix)
        assert fp_lambda_norm(f, 2).lower_bound == pytest.approx(np.abs(eig).max(), rel=1e-8)


def test_z2_fourier_picture():
    f = z2_function(1, -1j)
    np.testing.assert_allclose(f.values, [(1 - 1j) / 2, (1 + 1j) / 2])
    assert z2_norm(1, -1j, 2).lower_bound == pytest.approx(1, abs=1e-12)
    assert z2_norm(1, -1j, 1).lower_bound == pytest.approx(np.sqrt(2), abs=1e-12)
    v = z2_norm(1, -1j, 4).lower_bound
    assert 1 < v < np.sqrt(2)
    assert v == pytest.approx(Z2_ONE_MINUS_I_P4, rel=1e-10)
    orc = opnorm_oracle(conv_matrix(f).matrix, 4)
    assert orc.lower_bound == pytest.approx(Z2_ONE_MINUS_I_P4, rel=1e-10)
    for p in (1.0, 1.5, 3.0, 4.0):
        assert z2_norm(1, 1, p).lower_bound == pytest.approx(1)
        assert z2_norm(1, -1, p).lower_bound == pytest.approx(1)
        assert z2_norm(1, 0, p).lower_bound == pytest.approx(1, abs=1e-10)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.floats(0, 2 * np.pi), st.sampled_from([1.5, 3.0, 4.0]))
@settings(max_examples=30)
def test_z2_norm_symmetries(a, b, theta, p):
    v = z2_norm(a, b, p).lower_bound
    tol = 1e-8 * max(1.0, v)
    assert abs(z2_norm(b, a, p).lower_bound - v) <= tol
    ph = np.exp(1j * theta)
    assert abs(z2_norm(ph * a, ph * b, p).lower_bound - v) <= tol


def test_z2_p2_is_smallest():
    for a, b in [(1, -1j), (1, 0), (2, 0.5j), (1 + 1j, -0.3)]:
        v2 = z2_norm(a, b, 2).lower_bound
        for p in (1.0, 1.5, 3.0, 4.0):
            assert v2 <= z2_norm(a, b, p).lower_bound + 1e-9


def test_isom_group_examples():
    rep = isom_group_verify(FiniteGroup.cyclic(3), 3, trials=100)
    assert rep.ok and rep.members_checked == 12 and rep.nonmembers_checked == 100
    assert isom_group_verify(FiniteGroup.trivial(), 1.5, trials=20).ok
    rep = isom_group_verify(FiniteGroup.from_name("Z2xZ2"), 1.5, trials=10)
    assert rep.ok
    with pytest.raises(ExponentTwo):
        isom_group_verify(FiniteGroup.cyclic(3), 2)


def test_recover_group():
    z4 = FiniteGroup.from_name("Z4")
    rec = recover_group(z4, 3)
    assert find_isomorphism(z4, FiniteGroup(list(range(4)), rec.table)) is not None
    k4 = FiniteGroup.from_name("Z2xZ2")
    rec = FiniteGroup(list(range(4)), recover_group(k4, 1.5).table)
    assert sorted(rec.element_order(a) for a in range(4)) == [1, 2, 2, 2]
    rec = recover_group(FiniteGroup.from_name("S3"), 4)
    assert not rec.abelian and len(rec.table) == 6
    assert find_isomorphism(FiniteGroup.cyclic(4), FiniteGroup.from_name("Z2xZ2")) is None


def test_hom_examples():
    z4, z2 = FiniteGroup.cyclic(4), FiniteGroup.cyclic(2)
    d = hom_decompose(HomCandidate.from_data(z4, z4, [0, 1, 2, 3], [1] * 4), 3)
    assert d.theta == [0, 1, 2, 3] and d.gamma == [1] * 4 and d.injective
    d = hom_decompose(HomCandidate.from_data(z4, z2, [0, 1, 0, 1], [1] * 4), 3)
    assert d.theta == [0, 1, 0, 1] and not d.injective
    gamma = [1j**g for g in range(4)]
    d = hom_decompose(HomCandidate.from_data(z4, z4, [0, 1, 2, 3], gamma), 1.5)
    np.testing.assert_allclose(d.gamma, gamma, atol=1e-12)
    assert d.injective


@given(st.sampled_from(["Z4", "Z6", "Z2xZ2", "S3"]), st.integers(0, 2**32 - 1), st.sampled_from([1.0, 3.0]))
@settings(max_examples=20)
def test_hom_roundtrip(name, seed, p):
    # theta is the identity or the trivial map; gamma is a character on cyclic groups
    G = FiniteGroup.from_name(name)
    r = np.random.default_rng(seed)
    theta = list(range(G.order)) if r.random() < 0.5 else [G.identity] * G.order
    if G.is_abelian() and G.name.startswith("Z") and "x" not in G.name:
        k = int(r.integers(G.order))
        gamma = [np.exp(2j * np.pi * k * g / G.order) for g in range(G.order)]
    else:
        gamma = [1.0] * G.order
    d = hom_decompose(HomCandidate.from_data(G, G, theta, gamma), p)
    assert d.theta == theta
    np.testing.assert_allclose(d.gamma, gamma, atol=1e-12)


def test_hom_errors():
    z2 = FiniteGroup.cyclic(2)
    with pytest.raises(NotContractive):
        hom_decompose(HomCandidate(z2, z2, (np.eye(2), 2 * np.eye(2))), 3)
    with pytest.raises(NonSpatialImage):
        hom_decompose(HomCandidate(z2, z2, (np.eye(2), 0.5 * np.ones((2, 2)))), 3)
    z3 = FiniteGroup.cyclic(3)
    with pytest.raises(NotHomomorphism):
        hom_decompose(HomCandidate.from_data(z3, z3, [0, 1, 1], [1, 1, 1]), 3)
    with pytest.raises(NotHomomorphism):
        hom_decompose(HomCandidate.from_data(z3, z3, [0, 0, 0], [1, 1j, 1]), 3)
    with pytest.raises(ExponentTwo):
        hom_decompose(HomCandidate.from_data(z3, z3, [0, 1, 2], [1, 1, 1]), 2)


def test_duality_examples():
    G = FiniteGroup.from_name("S3")
    c = duality_check(GroupFunction.delta(G, 1), 3)
    assert c.exact_identity and c.holds and c.left == pytest.approx(1)
    assert duality_check(z2_function(1, -1j), 1.5).holds
    f = rand_function(FiniteGroup.cyclic(3), 4)
    assert duality_check(f, 4).holds


def test_subgroup_examples():
    z4 = FiniteGroup.cyclic(4)
    assert subgroup_isometry_check(z4, [0, 1, 2, 3], [1, 2j, 0, -1], 3).holds
    c = subgroup_isometry_check(z4, [0, 2], [(1 - 1j) / 2, (1 + 1j) / 2], 3)
    assert c.holds and c.left == pytest.approx(c.right, abs=1e-6)
    c = subgroup_isometry_check(z4, [0, 2], [1, 0], 1.5)
    assert c.left == pytest.approx(1) and c.right == pytest.approx(1)


def test_quotient_examples(rng):
    z4 = FiniteGroup.cyclic(4)
    f = rand_function(z4, 3)
    c = quotient_contraction_check(z4, [0], f, 3)
    assert c.holds and c.left == pytest.approx(c.right, rel=1e-9)
    c = quotient_contraction_check(z4, [0, 2], GroupFunction.delta(z4, 1), 3)
    assert c.holds and c.left == pytest.approx(1)
    z6 = FiniteGroup.cyclic(6)
    for seed in range(5):
        assert quotient_contraction_check(z6, [0, 2, 4], rand_function(z6, seed), 3).holds
    pf = quotient_pushforward(GroupFunction(z6, np.arange(6)), [0, 2, 4])
    np.testing.assert_array_equal(pf.values, [6, 9])


def test_translation_is_permutation():
    G = FiniteGroup.from_name("Z2xZ4")
    for g in range(G.order):
        m = translation(G, g).matrix
        assert np.array_equal(np.sort(np.abs(m).sum(axis=0)), np.ones(G.order))
        assert np.array_equal(m @ m.conj().T, np.eye(G.order))
