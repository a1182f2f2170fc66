import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpopalg.errors import AlgebraRelationError, ArityError, InvalidGraph, ValidationError
from lpopalg.cuntz import (
    DirectedGraph,
    GraphAssignment,
    LeavittElement,
    LeavittWord,
    algebra_span_dimension,
    canonical_matrix_units,
    cuntz_relation_check,
    evaluate,
    graph_relation_check,
    leavitt_normal_form,
    line_graph,
    loop_graph,
    rose_graph,
    spatial_generator_check,
    spatial_matrix_system_check,
    truncated_cuntz_rep,
)
from lpopalg.lamperti import classify_spatial

ONE2 = LeavittElement.one(2)
ZERO2 = LeavittElement(2)


def nf(n, *words):
    return leavitt_normal_form([LeavittWord(n, w) for w in words])


def test_normal_form_examples():
    assert nf(2, "t1 s1") == ONE2
    assert nf(2, "t1 s2") == ZERO2
    assert nf(2, "s1 t1", "s2 t2") == ONE2
    assert nf(3, "s1 t1", "s2 t2", "s3 t3") == LeavittElement.one(3)
    assert nf(3, "s1 t1", "s2 t2") != LeavittElement.one(3)
    assert nf(2, "t2 s2 s1 t1 t1 s1") == nf(2, "s1 t1")


def test_normal_form_errors():
    with pytest.raises(ArityError):
        leavitt_normal_form([LeavittWord(2, "s1"), LeavittWord(3, "s1")])
    with pytest.raises(ArityError):
        LeavittWord(2, "s3")
    with pytest.raises(ArityError):
        LeavittWord(1, "s1")
    with pytest.raises(ValidationError):
        LeavittWord(2, "x1")


letters2 = st.lists(st.sampled_from(["s1", "s2", "t1", "t2"]), min_size=1, max_size=8)


@given(letters2, st.randoms(use_true_random=False))
def test_confluence_under_association(letters, rnd):
    # multiply the single-letter elements in a random bracketing
    items = [LeavittElement.from_words([LeavittWord(2, [x])]) for x in letters]
    while len(items) > 1:
        i = rnd.randrange(len(items) - 1)
        items[i : i + 2] = [leavitt_normal_form(items[i] * items[i + 1])]
    flat = leavitt_normal_form(LeavittWord(2, letters))
    assert leavitt_normal_form(items[0]) == flat


def _apply(expr, gens, v):
    out = np.zeros_like(v)
    for w, c in expr.terms.items():
        x = v
        for letter in reversed(w):
            x = gens[letter] @ x
        out = out + c * x
    return out


@given(st.lists(letters2, min_size=1, max_size=4),
       st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=4, max_size=4))
def test_normal_form_preserves_the_represented_operator(words, coeffs):
    rep = truncated_cuntz_rep(2, 512)
    expr = LeavittElement.from_words([LeavittWord(2, w, c) for w, c in zip(words, coeffs)])
    gens = rep.generators()
    # e_m with |m| <= 1 stays inside [-512, 512] under every word of length <= 8
    for m in (-1, 0, 1):
        v = np.zeros(rep.size, dtype=complex)
        v[rep.index_of(m)] = 1
        np.testing.assert_allclose(_apply(expr, gens, v), _apply(leavitt_normal_form(expr), gens, v), atol=1e-12)


def test_truncated_rep_examples():
    rep = truncated_cuntz_rep(2, 8)
    assert rep.apply("s", 1, 3) == 7
    assert rep.apply("t", 1, 4) is None
    assert rep.apply("t", 2, 4) == 1
    with pytest.raises(ValidationError):
        rep.apply("s", 1, 5)  # 11 is outside [-8, 8]


@pytest.mark.parametrize("n,N", [(2, 64), (3, 81)])
def test_relations_exact_on_interior(n, N):
    rep = truncated_cuntz_rep(n, N, 3.0)
    r = cuntz_relation_check(rep)
    assert r.ok and r.interior_size > 0
    for i in rep.interior():
        m = int(i) - N
        for j in range(1, n + 1):
            assert rep.apply("t", j, rep.apply("s", j, m)) == m
    # boundary indices are excluded rather than reported
    assert r.interior_size < rep.size


def test_generators_spatial_and_norm_one():
    rep = truncated_cuntz_rep(2, 16, 1.5)
    assert all(spatial_generator_check(rep).values())
    r = cuntz_relation_check(rep, norms=True)
    assert all(v == pytest.approx(1, abs=1e-12) for v in r.norms.values())
    for m in rep.generators().values():
        assert np.all((m != 0).sum(axis=0) <= 1) and np.all((m != 0).sum(axis=1) <= 1)


def test_matrix_unit_systems():
    v = spatial_matrix_system_check(canonical_matrix_units(3), 3, samples=5)
    assert v.spatial and v.verdict == "spatial/isometric" and v.norms_agree
    s = np.diag([1.0, 2.0])
    conj = {k: s @ m @ np.linalg.inv(s) for k, m in canonical_matrix_units(2).items()}
    v = spatial_matrix_system_check(conj, 3, samples=5)
    assert not v.spatial and v.counterexample["unit"] == [0, 1]
    assert v.verdict == "not spatial"
    dil = {k: np.kron(m, np.eye(2)) for k, m in canonical_matrix_units(2).items()}
    v = spatial_matrix_system_check(dil, 1.5, samples=5)
    assert v.spatial and v.norms_agree


def test_matrix_unit_system_errors():
    units = canonical_matrix_units(2)
    units[(0, 1)] = 2 * units[(0, 1)]
    with pytest.raises(AlgebraRelationError):
        spatial_matrix_system_check(units, 3)
    with pytest.raises(AlgebraRelationError):
        spatial_matrix_system_check({(0, 0): np.eye(2)} | {(0, 1): np.zeros((2, 2))}, 3)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.5, 3.0]))
def test_system_verdict_matches_classification(seed, p):
    # random spatial conjugates of the dilated units, occasionally perturbed by a diagonal rescaling
    r = np.random.default_rng(seed)
    perm = np.eye(4)[r.permutation(4)] * np.exp(2j * np.pi * r.random(4))
    s = perm @ (np.diag(r.choice([1.0, 2.0], 4)) if r.random() < 0.5 else np.eye(4))
    units = {k: s @ np.kron(m, np.eye(2)) @ np.linalg.inv(s) for k, m in canonical_matrix_units(2).items()}
    v = spatial_matrix_system_check(units, p, samples=0)
    each = all(bool(classify_spatial(m, p)) for m in units.values())
    assert v.spatial == each


def test_line_graph():
    for n in range(1, 6):
        Q, asg = line_graph(n)
        rep = graph_relation_check(Q, asg)
        assert rep.ok and rep.skipped == [1]
        assert algebra_span_dimension(asg.all_operators()) == n * n


def test_loop_and_rose_graphs():
    Q, asg = loop_graph(7)
    assert graph_relation_check(Q, asg).ok
    rep = truncated_cuntz_rep(2, 64)
    Q, asg, inner = rose_graph(rep)
    assert graph_relation_check(Q, asg, columns=inner).ok
    # without restricting to the interior the window edge breaks relation 5
    assert not graph_relation_check(Q, asg).ok


def test_graph_failures_are_reported():
    Q, asg = line_graph(3)
    bad = GraphAssignment(asg.e, {a: 2 * m for a, m in asg.s.items()}, asg.t)
    rep = graph_relation_check(Q, bad)
    assert not rep.ok and rep.failures["4"] and rep.failures["5"]
    assert not rep.failures["1"]


def test_graph_json_and_errors():
    Q = DirectedGraph.from_json({"vertices": [0, 1], "edges": [{"name": "a", "d": 0, "r": 1}]})
    assert Q.incoming(1) == ["a"] and Q.irregular_vertices() == [0]
    with pytest.raises(InvalidGraph):
        DirectedGraph.from_json({"vertices": [0], "edges": [{"d": 0, "r": 5}]})
    with pytest.raises(InvalidGraph):
        DirectedGraph.from_json({"edges": []})
    with pytest.raises(ValidationError):
        GraphAssignment({0: np.eye(2)}, {"a": np.eye(3)}, {"a": np.eye(3)})
