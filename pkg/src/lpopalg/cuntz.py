"""Leavitt algebras, their spatial representation on l^p(Z), and graph relations.

Words are tuples of letters ``("s", j)`` / ``("t", j)`` with ``j`` in ``1..n``.
Multiplication is concatenation; normal forms are combinations of monomials
``s_mu t_nu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlgebraRelationError, ArityError, InvalidGraph, ValidationError
from .lamperti import NotSpatial, SpatialQuadruple, build_spatial_partial_isometry, classify_spatial
from .lpcore import DEFAULT_TOL, Operator, as_operator, check_exponent
from .opnorm import SearchConfig, opnorm

ZERO = -1  # image is the zero vector
UNDEFINED = -2  # image leaves the window


def _parse_letter(x) -> tuple[str, int]:
    if isinstance(x, str):
        x = x.strip()
        kind, idx = x[0], x[1:].lstrip("_")
        if kind not in "st" or not idx.isdigit():
            raise ValidationError(f"bad letter {x!r}")
        return kind, int(idx)
    kind, idx = x
    if kind not in ("s", "t"):
        raise ValidationError(f"bad letter {x!r}")
    return str(kind), int(idx)


@dataclass(frozen=True)
class LeavittWord:
    n: int
    letters: tuple
    coefficient: complex = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ArityError("Leavitt algebras need n >= 2")
        letters = self.letters.split() if isinstance(self.letters, str) else self.letters
        letters = tuple(_parse_letter(x) for x in letters)
        for _, j in letters:
            if not 1 <= j <= self.n:
                raise ArityError(f"generator index {j} outside 1..{self.n}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    def __mul__(self, other: "LeavittWord") -> "LeavittWord":
        if other.n != self.n:
            raise ArityError("words over different Leavitt algebras")
        return LeavittWord(self.n, self.letters + other.letters, self.coefficient * other.coefficient)

    def __str__(self):
        body = " ".join(f"{k}{j}" for k, j in self.letters) or "1"
        return body if self.coefficient == 1 else f"({self.coefficient})*{body}"


class LeavittElement:
    """A finite linear combination of words, keyed by letter tuple."""

    def __init__(self, n: int, terms: Mapping[tuple, complex] | None = None):
        if n < 2:
            raise ArityError("Leavitt algebras need n >= 2")
        self.n = n
        self.terms = {}
        for w, c in (terms or {}).items():
            self._add(tuple(w), complex(c))

    def _add(self, w, c):
        v = self.terms.get(w, 0) + c
        if v == 0:
            self.terms.pop(w, None)
        else:
            self.terms[w] = v

    @classmethod
    def from_words(cls, words: Iterable[LeavittWord]) -> "LeavittElement":
        words = list(words)
        if not words:
            raise ValidationError("empty combination")
        n = words[0].n
        out = cls(n)
        for w in words:
            if w.n != n:
                raise ArityError("all words must share the same n")
            out._add(w.letters, w.coefficient)
        return out

    @classmethod
    def one(cls, n: int) -> "LeavittElement":
        return cls(n, {(): 1})

    def __add__(self, other):
        self._check(other)
        out = LeavittElement(self.n, self.terms)
        for w, c in other.terms.items():
            out._add(w, c)
        return out

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return LeavittElement(self.n, {w: c * other for w, c in self.terms.items()})
        self._check(other)
        out = LeavittElement(self.n)
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                out._add(w1 + w2, c1 * c2)
        return out

    def _check(self, other):
        if not isinstance(other, LeavittElement) or other.n != self.n:
            raise ArityError("elements of different Leavitt algebras")

    def is_close(self, other: "LeavittElement", tol: float = 0.0) -> bool:
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def __eq__(self, other):
        return isinstance(other, LeavittElement) and other.n == self.n and self.is_close(other)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            body = " ".join(f"{k}{j}" for k, j in w) or "1"
            parts.append(f"{self.terms[w]}*{body}")
        return " + ".join(parts)

    def to_dict(self):
        from .jsonio import encode_complex

        return {
            "n": self.n,
            "terms": [
                {"word": [f"{k}{j}" for k, j in w], "coefficient": encode_complex(self.terms[w])}
                for w in sorted(self.terms, key=lambda w: (len(w), w))
            ],
        }


def _as_element(expr) -> LeavittElement:
    if isinstance(expr, LeavittElement):
        return expr
    if isinstance(expr, LeavittWord):
        return LeavittElement.from_words([expr])
    return LeavittElement.from_words(expr)


def leavitt_normal_form(expr) -> LeavittElement:
    """Canonical form in the monomial basis ``s_mu t_nu``.

    Two rewrite rules, each applied until none matches:

    * ``t_j s_k -> delta_jk``, which removes every t-before-s pair;
    * ``s_n t_n -> 1 - sum_{j<n} s_j t_j`` at the junction of ``s_mu t_nu``,
      which spends the unit-sum relation.

    Monomials ``s_mu t_nu`` whose junction is not ``s_n t_n`` form a basis, so
    two combinations are equal in the algebra iff their normal forms agree.
    """
    el = _as_element(expr)
    n = el.n
    out = LeavittElement(n)
    todo = list(el.terms.items())
    while todo:
        w, c = todo.pop()
        w = _cancel(w)
        if w is None:
            continue
        # w is now s...s t...t
        k = next((i for i, (kind, _) in enumerate(w) if kind == "t"), len(w))
        if 0 < k < len(w) and w[k - 1] == ("s", n) and w[k] == ("t", n):
            mu, nu = w[: k - 1], w[k + 1 :]
            todo.append((mu + nu, c))
            for j in range(1, n):
                todo.append((mu + (("s", j), ("t", j)) + nu, -c))
            continue
        out._add(w, c)
    return out


def _cancel(w: tuple) -> tuple | None:
    """Apply t_j s_k -> delta_jk left to right; None when the word vanishes."""
    stack = []
    for letter in w:
        if letter[0] == "s" and stack and stack[-1][0] == "t":
            if stack[-1][1] != letter[1]:
                return None
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def evaluate(expr, gens: Mapping[tuple, np.ndarray]) -> np.ndarray:
    """Image of a combination under generator matrices ``gens[("s", j)]``, ``gens[("t", j)]``."""
    el = _as_element(expr)
    dim = next(iter(gens.values())).shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for w, c in el.terms.items():
        m = np.eye(dim, dtype=complex)
        for letter in w:
            m = m @ gens[letter]
        total += c * m
    return total


# -- spatial representation on a window of l^p(Z) ----------------------------------


@dataclass
class TruncatedRep:
    """Index maps of s_j, t_j on the window ``[-N, N]``.

    Position ``i`` of a map stands for ``e_m`` with ``m = i - N``; entries are a
    target position, ``ZERO`` or ``UNDEFINED``.
    """

    n: int
    N: int
    p: float
    s_maps: np.ndarray  # (n, 2N+1)
    t_maps: np.ndarray  # (n, 2N+1)

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    def index_of(self, m: int) -> int:
        if abs(m) > self.N:
            raise ValidationError(f"e_{m} is outside the window")
        return m + self.N

    def apply(self, kind: str, j: int, m: int) -> int | None:
        """Integer label of the image of e_m, None for zero; raises if undefined."""
        maps = self.s_maps if kind == "s" else self.t_maps
        k = int(maps[j - 1, self.index_of(m)])
        if k == UNDEFINED:
            raise ValidationError(f"{kind}{j}(e_{m}) leaves the window")
        return None if k == ZERO else k - self.N

    def operator(self, kind: str, j: int) -> Operator:
        """Dense matrix of a generator; columns whose image leaves the window are zero."""
        maps = self.s_maps if kind == "s" else self.t_maps
        m = np.zeros((self.size, self.size), dtype=complex)
        cols = np.flatnonzero(maps[j - 1] >= 0)
        m[maps[j - 1, cols], cols] = 1.0
        return Operator(m)

    def generators(self) -> dict:
        return {(k, j): self.operator(k, j).matrix for k in "st" for j in range(1, self.n + 1)}

    def interior(self) -> np.ndarray:
        """Positions whose images under every generator word of length <= 2 are defined."""
        maps = np.concatenate([self.s_maps, self.t_maps])
        ok = np.ones(self.size, dtype=bool)
        for a in maps:
            first = a
            ok &= first != UNDEFINED
            for b in maps:
                second = np.where(first >= 0, b[np.clip(first, 0, None)], ZERO)
                ok &= second != UNDEFINED
        return np.flatnonzero(ok)

    def to_dict(self):
        return {"n": self.n, "window": self.N, "p": self.p, "size": self.size}


def truncated_cuntz_rep(n: int, N: int, p: float = 2.0) -> TruncatedRep:
    """s_j e_m = e_{n m + j}, t_j e_m = e_{(m - j)/n} if n | m - j else 0, on [-N, N]."""
    p = check_exponent(p)
    if n < 2:
        raise ArityError("need n >= 2")
    if N < n:
        raise ValidationError("window radius must be at least n")
    m = np.arange(-N, N + 1)
    s = np.empty((n, len(m)), dtype=int)
    t = np.empty((n, len(m)), dtype=int)
    for j in range(1, n + 1):
        img = n * m + j
        s[j - 1] = np.where(np.abs(img) <= N, img + N, UNDEFINED)
        div = (m - j) % n == 0
        q = (m - j) // n
        t[j - 1] = np.where(div, np.where(np.abs(q) <= N, q + N, UNDEFINED), ZERO)
    return TruncatedRep(n, N, p, s, t)


@dataclass
class RelationReport:
    interior_size: int
    violations: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {"interior_size": self.interior_size, "violations": self.violations, "norms": self.norms, "ok": self.ok}


def cuntz_relation_check(rep: TruncatedRep, norms: bool = False, cfg: SearchConfig | None = None) -> RelationReport:
    """t_j s_k = delta_jk and sum_j s_j t_j = 1 on the interior, by index arithmetic."""
    inner = rep.interior()
    report = RelationReport(int(len(inner)))
    S, T = rep.s_maps, rep.t_maps
    for i in inner:
        m = int(i) - rep.N
        for j in range(rep.n):
            for k in range(rep.n):
                a = S[k, i]
                b = T[j, a] if a >= 0 else ZERO
                want = i if j == k else ZERO
                if b != want:
                    report.violations.append({"relation": f"t{j + 1} s{k + 1}", "m": m})
        # sum_j s_j t_j e_m: exactly one term survives and it lands back on m
        hits = [int(S[j, T[j, i]]) for j in range(rep.n) if T[j, i] >= 0]
        if hits != [int(i)]:
            report.violations.append({"relation": "sum s_j t_j", "m": m})
    if norms:
        for (kind, j), mat in sorted(rep.generators().items()):
            report.norms[f"{kind}{j}"] = opnorm(mat, rep.p, cfg).lower_bound
    return report


def spatial_generator_check(rep: TruncatedRep) -> dict:
    """classify_spatial verdict for every generator (p != 2)."""
    return {f"{k}{j}": bool(classify_spatial(m, rep.p)) for (k, j), m in sorted(rep.generators().items())}


# -- matrix-unit systems --------------------------------------------------------------


@dataclass
class SpatialSystemVerdict:
    spatial: bool
    counterexample: dict | None
    norm_samples: list
    norms_agree: bool

    @property
    def verdict(self) -> str:
        return "spatial/isometric" if self.spatial else "not spatial"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "spatial": self.spatial,
            "counterexample": self.counterexample,
            "norm_samples": self.norm_samples,
            "norms_agree": self.norms_agree,
        }


def spatial_matrix_system_check(
    images: Mapping[tuple, object],
    p: float,
    cfg: SearchConfig | None = None,
    tol: float = DEFAULT_TOL,
    samples: int = 20,
    norm_rtol: float = 1e-3,
) -> SpatialSystemVerdict:
    """Decide whether a representation of M_n (given on matrix units) is spatial.

    ``images[(j, k)]`` is the image of e_jk, indices ``0..n-1``. The verdict
    comes from classifying every image and matching reverses; opnorm sampling
    on ``samples`` random coefficient matrices is reported alongside.
    """
    p = check_exponent(p)
    cfg = cfg or SearchConfig()
    keys = sorted(images)
    labels = sorted({j for j, _ in keys} | {k for _, k in keys})
    n = len(labels)
    if labels != list(range(n)) or len(keys) != n * n:
        raise AlgebraRelationError("need an image for every (j, k) with j, k in 0..n-1")
    ops = {key: as_operator(images[key]) for key in keys}
    dim = ops[(0, 0)].shape[0]
    for key, op in ops.items():
        if op.shape != (dim, dim) or op.domain != ops[(0, 0)].domain:
            raise AlgebraRelationError(f"image {key} acts on a different space")
    scale = max(1.0, max(float(np.abs(op.matrix).max()) for op in ops.values()))
    for j in range(n):
        for k in range(n):
            for l in range(n):
                for m in range(n):
                    prod = ops[(j, k)].matrix @ ops[(l, m)].matrix
                    want = ops[(j, m)].matrix if k == l else 0
                    if np.max(np.abs(prod - want)) > tol * scale * scale:
                        raise AlgebraRelationError(f"e_{j}{k} e_{l}{m} breaks the matrix-unit law")
    if np.max(np.abs(sum(ops[(j, j)].matrix for j in range(n)) - np.eye(dim))) > tol * scale:
        raise AlgebraRelationError("diagonal units do not sum to the identity")

    counter = None
    quads = {}
    for key in keys:
        q = classify_spatial(ops[key], p, tol)
        if isinstance(q, NotSpatial):
            counter = {"unit": list(key), **q.to_dict()}
            break
        quads[key] = q
    if counter is None:
        for (j, k), q in quads.items():
            if not q.reverse().same_as(quads[(k, j)], tol=max(tol, 1e-12)):
                counter = {"unit": [j, k], "spatial": False, "reason": f"reverse of e_{j}{k} is not the image of e_{k}{j}"}
                break

    rng = np.random.default_rng(cfg.rng_seed)
    rows, agree = [], True
    for _ in range(samples):
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        img = sum(x[j, k] * ops[(j, k)].matrix for j, k in keys)
        lhs = opnorm(ops[(0, 0)].with_matrix(img), p, cfg).lower_bound
        rhs = opnorm(x, p, cfg).lower_bound
        rows.append({"image_norm": lhs, "matrix_norm": rhs})
        agree &= abs(lhs - rhs) <= norm_rtol * max(1.0, rhs)
    return SpatialSystemVerdict(counter is None, counter, rows, bool(agree))


def canonical_matrix_units(n: int) -> dict:
    out = {}
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1
            out[(j, k)] = e
    return out


# -- directed graphs --------------------------------------------------------------------


@dataclass
class DirectedGraph:
    """Vertices plus edges ``name -> (d, r)``, d the domain and r the range vertex."""

    vertices: list
    edges: dict

    def __post_init__(self):
        self.vertices = list(self.vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidGraph("duplicate vertices")
        vs = set(self.vertices)
        edges = {}
        for name, (d, r) in dict(self.edges).items():
            if d not in vs or r not in vs:
                raise InvalidGraph(f"edge {name!r} touches an unknown vertex")
            edges[name] = (d, r)
        self.edges = edges

    @classmethod
    def from_json(cls, obj) -> "DirectedGraph":
        try:
            edges = {}
            for i, e in enumerate(obj["edges"]):
                edges[str(e.get("name", i))] = (e["d"], e["r"])
            return cls(obj["vertices"], edges)
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidGraph(f"bad graph JSON: {exc}") from exc

    def incoming(self, v) -> list:
        return [a for a, (_, r) in self.edges.items() if r == v]

    def irregular_vertices(self) -> list:
        """Vertices that receive no edge."""
        return [v for v in self.vertices if not self.incoming(v)]

    def to_dict(self):
        return {"vertices": self.vertices, "edges": [{"name": a, "d": d, "r": r} for a, (d, r) in self.edges.items()]}


@dataclass
class GraphAssignment:
    e: dict  # vertex -> matrix
    s: dict  # edge -> matrix
    t: dict  # edge -> matrix

    def __post_init__(self):
        self.e = {k: as_operator(v).matrix for k, v in self.e.items()}
        self.s = {k: as_operator(v).matrix for k, v in self.s.items()}
        self.t = {k: as_operator(v).matrix for k, v in self.t.items()}
        shapes = {m.shape for m in (*self.e.values(), *self.s.values(), *self.t.values())}
        if len(shapes) != 1 or next(iter(shapes))[0] != next(iter(shapes))[1]:
            raise ValidationError("all operators must be square and act on one common space")

    @property
    def dim(self) -> int:
        return next(iter(self.e.values())).shape[0]

    def all_operators(self) -> list:
        return [*self.e.values(), *self.s.values(), *self.t.values()]


@dataclass
class GraphReport:
    failures: dict
    skipped: list
    checked_columns: int

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def to_dict(self):
        return {"ok": self.ok, "failures": self.failures, "skipped_vertices": self.skipped, "checked_columns": self.checked_columns}


def graph_relation_check(
    Q: DirectedGraph, assignment: GraphAssignment, tol: float = 1e-10, columns: Sequence[int] | None = None
) -> GraphReport:
    """Check the five Leavitt path relations as matrix identities.

    ``columns`` restricts every identity to those basis vectors (a truncation
    interior). Relation 5 is only asserted at vertices that receive an edge;
    the others are listed as skipped.
    """
    if set(assignment.e) != set(Q.vertices):
        raise ValidationError("need one idempotent per vertex")
    if set(assignment.s) != set(Q.edges) or set(assignment.t) != set(Q.edges):
        raise ValidationError("need s and t for every edge")
    cols = np.arange(assignment.dim) if columns is None else np.asarray(columns, dtype=int)
    E, S, T = assignment.e, assignment.s, assignment.t
    fails = {str(k): [] for k in range(1, 6)}

    def differ(a, b):
        return float(np.max(np.abs((a - b)[:, cols]), initial=0.0)) > tol

    for v in Q.vertices:
        for w in Q.vertices:
            if differ(E[v] @ E[w], E[v] if v == w else 0 * E[v]):
                fails["1"].append({"v": v, "w": w})
    for a, (d, r) in Q.edges.items():
        if differ(E[r] @ S[a], S[a]) or differ(S[a] @ E[d], S[a]):
            fails["2"].append({"edge": a})
        if differ(T[a] @ E[r], T[a]) or differ(E[d] @ T[a], T[a]):
            fails["3"].append({"edge": a})
    for a in Q.edges:
        for b, (db, _) in Q.edges.items():
            if differ(T[a] @ S[b], E[db] if a == b else 0 * E[db]):
                fails["4"].append({"a": a, "b": b})
    skipped = []
    for v in Q.vertices:
        inc = Q.incoming(v)
        if not inc:
            skipped.append(v)
            continue
        if differ(E[v], sum(S[a] @ T[a] for a in inc)):
            fails["5"].append({"v": v})
    return GraphReport(fails, skipped, int(len(cols)))


def algebra_span_dimension(ops: Iterable, tol: float = 1e-9, unital: bool = True) -> int:
    """Dimension of the algebra generated by ``ops`` (closure under products)."""
    gens = [np.asarray(as_operator(m).matrix) for m in ops]
    if not gens:
        return 1 if unital else 0
    dim = gens[0].shape[0]
    basis = np.zeros((0, dim * dim), dtype=complex)

    def add(m):
        nonlocal basis
        v = m.reshape(-1)
        r = v - basis.T @ (basis.conj() @ v) if len(basis) else v
        r = r - basis.T @ (basis.conj() @ r) if len(basis) else r
        nrm = np.linalg.norm(r)
        if nrm > tol * max(1.0, np.linalg.norm(v)):
            basis = np.vstack([basis, r / nrm])
            return True
        return False

    frontier = [np.eye(dim, dtype=complex)] if unital else []
    frontier += [g for g in gens]
    frontier = [m for m in frontier if add(m)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod = m @ g
                if add(prod):
                    nxt.append(prod)
        frontier = nxt
    return int(len(basis))


# -- standard examples ----------------------------------------------------------------


def line_graph(n: int) -> tuple[DirectedGraph, GraphAssignment]:
    """1 -> 2 -> ... -> n with e_v = E_vv, s_a = E_{r,d}, t_a = E_{d,r}."""
    if n < 1:
        raise InvalidGraph("need at least one vertex")
    verts = list(range(1, n + 1))
    edges = {f"a{i}": (i, i + 1) for i in range(1, n)}

    def unit(i, j):
        m = np.zeros((n, n), dtype=complex)
        m[i - 1, j - 1] = 1
        return m

    e = {v: unit(v, v) for v in verts}
    s = {a: unit(r, d) for a, (d, r) in edges.items()}
    t = {a: unit(d, r) for a, (d, r) in edges.items()}
    return DirectedGraph(verts, edges), GraphAssignment(e, s, t)


def loop_graph(m: int) -> tuple[DirectedGraph, GraphAssignment]:
    """One vertex with one loop, represented by the cyclic shift on l^p(Z_m)."""
    shift = np.roll(np.eye(m, dtype=complex), 1, axis=0)
    return DirectedGraph([0], {"a": (0, 0)}), GraphAssignment({0: np.eye(m)}, {"a": shift}, {"a": shift.T})


def rose_graph(rep: TruncatedRep) -> tuple[DirectedGraph, GraphAssignment, np.ndarray]:
    """One vertex with n loops, represented by a truncated Cuntz representation."""
    edges = {f"a{j}": (0, 0) for j in range(1, rep.n + 1)}
    gens = rep.generators()
    s = {f"a{j}": gens[("s", j)] for j in range(1, rep.n + 1)}
    t = {f"a{j}": gens[("t", j)] for j in range(1, rep.n + 1)}
    return DirectedGraph([0], edges), GraphAssignment({0: np.eye(rep.size)}, s, t), rep.interior()
