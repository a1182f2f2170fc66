"""Convolution algebras of finite groups acting on l^p(G).

Groups are explicit multiplication tables over indices ``0..n-1``. Every
finite group is amenable, so the reduced and full p-group-algebra norms agree
and both are the operator norm of the left convolution matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ExponentTwo,
    InvalidGroup,
    InvalidNormalSubgroup,
    InvalidSubgroup,
    NonSpatialImage,
    NotContractive,
    NotHomomorphism,
    ValidationError,
)
from .lamperti import lamperti_decompose
from .lpcore import DEFAULT_TOL, Operator, WeightedSpace, check_exponent, conjugate_exponent
from .opnorm import NormEstimate, SearchConfig, is_invertible_isometry, opnorm


class FiniteGroup:
    """A finite group given by its Cayley table.

    The group axioms are checked exhaustively on construction; that is cheap
    for the orders this toolkit deals with (a few dozen at most).
    """

    def __init__(self, elements: Sequence, table, name: str | None = None):
        self.elements = list(elements)
        self.table = np.asarray(table, dtype=int)
        self.name = name or f"G{len(self.elements)}"
        n = len(self.elements)
        if n == 0:
            raise InvalidGroup("a group needs at least one element")
        if self.table.shape != (n, n):
            raise InvalidGroup(f"table must be {n}x{n}")
        if self.table.min() < 0 or self.table.max() >= n:
            raise InvalidGroup("table entries out of range")
        if len(set(map(str, self.elements))) != n:
            raise InvalidGroup("element labels must be distinct")
        t = self.table
        ids = [e for e in range(n) if np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))]
        if not ids:
            raise InvalidGroup("no identity element")
        self.identity = ids[0]
        # (ab)c == a(bc) for all a, b, c
        left = t[t[:, :, None], np.arange(n)[None, None, :]]
        right = t[np.arange(n)[:, None, None], t[None, :, :]]
        if not np.array_equal(left, right):
            raise InvalidGroup("operation is not associative")
        inv = np.full(n, -1)
        for a in range(n):
            hits = np.flatnonzero(t[a] == self.identity)
            if len(hits) != 1 or t[hits[0], a] != self.identity:
                raise InvalidGroup(f"element {self.elements[a]!r} has no two-sided inverse")
            inv[a] = hits[0]
        self.inverses = inv

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def index(self, label) -> int:
        for i, e in enumerate(self.elements):
            if e == label or str(e) == str(label):
                return i
        raise KeyError(label)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def to_dict(self):
        return {"elements": [str(e) for e in self.elements], "table": self.table.tolist()}

    # -- constructors --

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        i = np.arange(n)
        return cls(list(range(n)), (i[:, None] + i[None, :]) % n, name=f"Z{n}")

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls([0], [[0]], name="Z1")

    @classmethod
    def product(cls, g: "FiniteGroup", h: "FiniteGroup") -> "FiniteGroup":
        pairs = list(itertools.product(range(g.order), range(h.order)))
        idx = {pr: k for k, pr in enumerate(pairs)}
        table = [[idx[(g.mul(a, c), h.mul(b, d))] for (c, d) in pairs] for (a, b) in pairs]
        labels = [f"({g.elements[a]},{h.elements[b]})" for a, b in pairs]
        return cls(labels, table, name=f"{g.name}x{h.name}")

    @classmethod
    def symmetric(cls, n: int) -> "FiniteGroup":
        perms = sorted(itertools.permutations(range(n)))
        idx = {pm: k for k, pm in enumerate(perms)}
        # (s t)(i) = s(t(i))
        table = [[idx[tuple(s[t[i]] for i in range(n))] for t in perms] for s in perms]
        return cls(["".join(map(str, pm)) for pm in perms], table, name=f"S{n}")

    @classmethod
    def from_name(cls, name: str) -> "FiniteGroup":
        parts = name.replace("×", "x").split("x")
        groups = []
        for part in parts:
            part = part.strip()
            if part[:1] in "ZC" and part[1:].isdigit():
                groups.append(cls.cyclic(int(part[1:])))
            elif part[:1] == "S" and part[1:].isdigit():
                groups.append(cls.symmetric(int(part[1:])))
            else:
                raise ValidationError(f"unknown group name {name!r}")
        out = groups[0]
        for g in groups[1:]:
            out = cls.product(out, g)
        out.name = name
        return out

    def subgroup(self, members: Sequence[int]) -> "FiniteGroup":
        """The subgroup on ``members`` (indices into this group), in the given order."""
        members = [int(m) for m in members]
        pos = {m: k for k, m in enumerate(members)}
        if len(pos) != len(members):
            raise InvalidSubgroup("repeated subgroup members")
        table = []
        for a in members:
            row = []
            for b in members:
                c = self.mul(a, b)
                if c not in pos:
                    raise InvalidSubgroup(f"{self.elements[a]}*{self.elements[b]} leaves the subset")
                row.append(pos[c])
            table.append(row)
        try:
            return FiniteGroup([self.elements[m] for m in members], table, name=f"{self.name}|sub")
        except InvalidGroup as exc:
            raise InvalidSubgroup(str(exc)) from exc

    def is_normal(self, members: Sequence[int]) -> bool:
        ms = set(int(m) for m in members)
        return all(self.mul(self.mul(g, n), self.inv(g)) in ms for g in range(self.order) for n in ms)

    def quotient(self, normal: Sequence[int]) -> tuple["FiniteGroup", np.ndarray]:
        """G/N and the coset index of every element of G."""
        self.subgroup(normal)
        if not self.is_normal(normal):
            raise InvalidNormalSubgroup("subgroup is not normal")
        coset_of = np.full(self.order, -1)
        reps = []
        for g in range(self.order):
            if coset_of[g] >= 0:
                continue
            for n in normal:
                coset_of[self.mul(g, int(n))] = len(reps)
            reps.append(g)
        table = [[int(coset_of[self.mul(a, b)]) for b in reps] for a in reps]
        labels = [f"{self.elements[r]}N" for r in reps]
        return FiniteGroup(labels, table, name=f"{self.name}/N"), coset_of


def find_isomorphism(g: FiniteGroup, h: FiniteGroup) -> list[int] | None:
    """An isomorphism g -> h as an index list, or None (backtracking search)."""
    if g.order != h.order:
        return None
    if sorted(g.element_order(a) for a in range(g.order)) != sorted(h.element_order(a) for a in range(h.order)):
        return None
    # generators of g, greedily
    gens, span = [], {g.identity}
    for a in range(g.order):
        if a not in span:
            gens.append(a)
            span = _closure(g, gens)
    word_of = _words(g, gens)

    def extend(images):
        phi = {}
        for x, word in word_of.items():
            y = h.identity
            for k in word:
                y = h.mul(y, images[k])
            phi[x] = y
        if len(set(phi.values())) != g.order:
            return None
        for a in range(g.order):
            for b in range(g.order):
                if phi[g.mul(a, b)] != h.mul(phi[a], phi[b]):
                    return None
        return [phi[x] for x in range(g.order)]

    candidates = [[y for y in range(h.order) if h.element_order(y) == g.element_order(x)] for x in gens]
    for images in itertools.product(*candidates):
        phi = extend(images)
        if phi is not None:
            return phi
    return None


def _closure(g, gens):
    span = {g.identity}
    frontier = [g.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = g.mul(x, s)
                if y not in span:
                    span.add(y)
                    nxt.append(y)
        frontier = nxt
    return span


def _words(g, gens):
    words = {g.identity: ()}
    frontier = [g.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for k, s in enumerate(gens):
                y = g.mul(x, s)
                if y not in words:
                    words[y] = words[x] + (k,)
                    nxt.append(y)
        frontier = nxt
    return words


# -- group functions and convolution ------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupFunction:
    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if len(v) != self.group.order:
            raise ValidationError(f"need {self.group.order} values, got {len(v)}")
        object.__setattr__(self, "values", v)

    @classmethod
    def delta(cls, group: FiniteGroup, g: int) -> "GroupFunction":
        v = np.zeros(group.order, dtype=complex)
        v[g] = 1
        return cls(group, v)

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum())

    def __mul__(self, other: "GroupFunction") -> "GroupFunction":
        return convolve(self, other)


def convolve(f: GroupFunction, g: GroupFunction) -> GroupFunction:
    """(f * g)(s) = sum_t f(t) g(t^-1 s)."""
    G = f.group
    out = np.zeros(G.order, dtype=complex)
    for t in range(G.order):
        if f.values[t] == 0:
            continue
        ti = G.inv(t)
        for s in range(G.order):
            out[s] += f.values[t] * g.values[G.mul(ti, s)]
    return GroupFunction(G, out)


def _space(G: FiniteGroup) -> WeightedSpace:
    return WeightedSpace.uniform(G.order)


def conv_matrix(f: GroupFunction, p: float = 2.0) -> Operator:
    """Matrix of xi -> f * xi on l^p(G): entry [s, u] = f(s u^-1).

    Counting measure makes the matrix independent of p; the argument is kept
    so the call reads like the representation it stands for.
    """
    check_exponent(p)
    G = f.group
    idx = G.table[:, G.inverses]  # idx[s, u] = s u^-1
    return Operator(f.values[idx], _space(G), _space(G))


def translation(G: FiniteGroup, g: int) -> Operator:
    """Left translation Lt_g: e_u -> e_{g u}."""
    return conv_matrix(GroupFunction.delta(G, g))


def fp_lambda_norm(f: GroupFunction, p: float, cfg: SearchConfig | None = None) -> NormEstimate:
    return opnorm(conv_matrix(f, p), p, cfg)


def z2_norm(a: complex, b: complex, p: float, cfg: SearchConfig | None = None) -> NormEstimate:
    """Norm of (a, b) in the Z2 group algebra, given in the character picture."""
    m = 0.5 * np.array([[a + b, a - b], [a - b, a + b]], dtype=complex)
    return opnorm(m, p, cfg)


def z2_function(a: complex, b: complex) -> GroupFunction:
    return GroupFunction(FiniteGroup.cyclic(2), [(a + b) / 2, (a - b) / 2])


def sharp(f: GroupFunction) -> GroupFunction:
    """f#(s) = f(s^-1) (finite groups are unimodular)."""
    return GroupFunction(f.group, f.values[f.group.inverses])


# -- isometry group ------------------------------------------------------------


def _phase_translation_distance(c: np.ndarray) -> float:
    """sup-norm distance of coefficients c from {gamma delta_g : |gamma| = 1}."""
    mags = np.abs(c)
    best = np.inf
    for g in range(len(c)):
        rest = np.delete(mags, g)
        best = min(best, max(abs(mags[g] - 1), rest.max(initial=0.0)))
    return float(best)


@dataclass
class IsomReport:
    group: str
    p: float
    members_checked: int
    nonmembers_checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {
            "group": self.group,
            "p": self.p,
            "members_checked": self.members_checked,
            "nonmembers_checked": self.nonmembers_checked,
            "violations": self.violations,
            "ok": self.ok,
        }


def isom_group_verify(
    G: FiniteGroup,
    p: float,
    trials: int = 100,
    cfg: SearchConfig | None = None,
    phases: Sequence[complex] = (1, 1j, -1, -1j),
    seed: int | None = None,
    tol: float = DEFAULT_TOL,
) -> IsomReport:
    """Check that the invertible isometries in span{Lt_g} are exactly gamma Lt_g.

    Members (phase times translation) must pass ``is_invertible_isometry``;
    ``trials`` random span elements at coefficient distance >= 0.1 from that
    set must fail it.
    """
    p = check_exponent(p)
    if p == 2:
        raise ExponentTwo("isometry-group verification")
    cfg = cfg or SearchConfig()
    rng = np.random.default_rng(cfg.rng_seed if seed is None else seed)
    report = IsomReport(G.name, p, 0, 0)
    for g in range(G.order):
        lt = translation(G, g)
        for gamma in phases:
            report.members_checked += 1
            if not is_invertible_isometry(lt * gamma, p, tol, cfg):
                report.violations.append({"kind": "member_failed", "element": str(G.elements[g]), "phase": [complex(gamma).real, complex(gamma).imag]})
    done = 0
    while done < trials:
        c = _random_span_element(G.order, rng)
        if _phase_translation_distance(c) < 0.1:
            continue
        done += 1
        report.nonmembers_checked += 1
        if is_invertible_isometry(conv_matrix(GroupFunction(G, c)), p, tol, cfg):
            report.violations.append({"kind": "nonmember_passed", "coefficients": [[z.real, z.imag] for z in c]})
    return report


def _random_span_element(n: int, rng: np.random.Generator) -> np.ndarray:
    """Mixture of near-members and generic elements, both unimodular-scaled."""
    kind = rng.integers(3)
    if kind == 0:
        c = np.zeros(n, dtype=complex)
        c[rng.integers(n)] = np.exp(2j * np.pi * rng.random())
        c += rng.uniform(0.05, 0.6) * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2 * n)
        return c
    if kind == 1:
        # unimodular coefficients on every element: all entries have modulus 1
        return np.exp(2j * np.pi * rng.random(n)) / rng.uniform(1, np.sqrt(n) + 1e-9) if n > 1 else np.array([rng.uniform(0.2, 2.0)], dtype=complex)
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return c / np.abs(c).sum() * rng.uniform(0.5, 1.5)


@dataclass
class RecoveredGroup:
    table: list
    isomorphism: list  # index in G -> index in recovered table
    abelian: bool

    def to_dict(self):
        return {"table": self.table, "isomorphism": self.isomorphism, "abelian": self.abelian}


def recover_group(G: FiniteGroup, p: float, cfg: SearchConfig | None = None) -> RecoveredGroup:
    """Rebuild G from the isometry group of its p-group algebra, modulo phases.

    Each translation isometry is put through the Lamperti decomposition; the
    class of an isometry modulo phases is its atom permutation. Products of
    isometries are classified the same way, which yields the table.
    """
    p = check_exponent(p)
    if p == 2:
        raise ExponentTwo("group recovery")
    ops = [translation(G, g) for g in range(G.order)]
    classes = []
    keys = {}
    for op in ops:
        key = tuple(lamperti_decompose(op, p, cfg=cfg).perm.tolist())
        if key not in keys:
            keys[key] = len(classes)
            classes.append(op)
    n = len(classes)
    table = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            prod = classes[i] @ classes[j]
            key = tuple(lamperti_decompose(prod, p, cfg=cfg).perm.tolist())
            if key not in keys:
                raise NotHomomorphism("product of isometries left the recovered set")
            table[i][j] = keys[key]
    recovered = FiniteGroup(list(range(n)), table, name=f"Isom({G.name})/~")
    iso = find_isomorphism(G, recovered)
    if iso is None:
        raise NotHomomorphism("recovered table is not isomorphic to the input group")
    return RecoveredGroup(table, iso, recovered.is_abelian())


# -- homomorphisms between group algebras ---------------------------------------


@dataclass(frozen=True, eq=False)
class HomCandidate:
    source: FiniteGroup
    target: FiniteGroup
    images: tuple  # one Operator on l^p(target) per source element

    def __post_init__(self):
        imgs = tuple(Operator(np.asarray(getattr(m, "matrix", m), dtype=complex)) for m in self.images)
        if len(imgs) != self.source.order:
            raise ValidationError("need one image per source element")
        for m in imgs:
            if m.shape != (self.target.order, self.target.order):
                raise ValidationError("images must act on l^p(target)")
        if not np.allclose(imgs[self.source.identity].matrix, np.eye(self.target.order)):
            raise ValidationError("identity must map to the identity operator")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def from_data(cls, source, target, theta, gamma):
        images = [translation(target, int(theta[g])) * complex(gamma[g]) for g in range(source.order)]
        return cls(source, target, tuple(images))


@dataclass
class HomDecomposition:
    theta: list
    gamma: list
    injective: bool

    def to_dict(self):
        return {"theta": self.theta, "gamma": [[complex(z).real, complex(z).imag] for z in self.gamma], "injective": self.injective}


def hom_decompose(h: HomCandidate, p: float, tol: float = DEFAULT_TOL, cfg: SearchConfig | None = None) -> HomDecomposition:
    """Write each image as gamma(g) Lt_theta(g) and check both maps are homomorphisms."""
    p = check_exponent(p)
    if p == 2:
        raise ExponentTwo("homomorphism decomposition")
    G, H = h.source, h.target
    trans = [translation(H, k).matrix for k in range(H.order)]
    theta, gamma = [], []
    for g, img in enumerate(h.images):
        if opnorm(img, p, cfg).lower_bound > 1 + tol:
            raise NotContractive(f"image of {G.elements[g]!r} is not contractive")
        m = img.matrix
        big = np.flatnonzero(np.abs(m.reshape(-1)) > 0.5)
        if len(big) == 0:
            raise NonSpatialImage(f"image of {G.elements[g]!r} has no unimodular entry", element=g)
        z = m.reshape(-1)[big[0]]
        z = z / abs(z)
        match = [k for k in range(H.order) if np.max(np.abs(m - z * trans[k])) <= tol]
        if len(match) != 1:
            raise NonSpatialImage(f"image of {G.elements[g]!r} is not a phase times a translation", element=g)
        theta.append(match[0])
        gamma.append(complex(z))
    for a in range(G.order):
        for b in range(G.order):
            ab = G.mul(a, b)
            if theta[ab] != H.mul(theta[a], theta[b]):
                raise NotHomomorphism(f"theta fails on ({G.elements[a]}, {G.elements[b]})")
            if abs(gamma[ab] - gamma[a] * gamma[b]) > tol:
                raise NotHomomorphism(f"gamma fails on ({G.elements[a]}, {G.elements[b]})")
    return HomDecomposition(theta, gamma, len(set(theta)) == G.order)


# -- duality, subgroups, quotients -------------------------------------------------


@dataclass
class NormComparison:
    left: float
    right: float
    holds: bool
    exact_identity: bool | None = None

    def to_dict(self):
        out = {"left": self.left, "right": self.right, "holds": self.holds}
        if self.exact_identity is not None:
            out["exact_identity"] = self.exact_identity
        return out


def duality_check(f: GroupFunction, p: float, cfg: SearchConfig | None = None, tol: float = 1e-6) -> NormComparison:
    """transpose(lambda_p(f)) == lambda_p'(f#) exactly, and the two norms agree."""
    p = check_exponent(p)
    if p == 1:
        raise ValidationError("duality check needs p > 1")
    q = conjugate_exponent(p)
    fs = sharp(f)
    exact = bool(np.array_equal(conv_matrix(f, p).matrix.T, conv_matrix(fs, q).matrix))
    left = fp_lambda_norm(f, p, cfg).lower_bound
    right = fp_lambda_norm(fs, q, cfg).lower_bound
    return NormComparison(left, right, exact and abs(left - right) <= tol * max(1.0, left), exact)


def subgroup_isometry_check(
    G: FiniteGroup, members: Sequence[int], f_on_h: Sequence[complex], p: float, cfg: SearchConfig | None = None, tol: float = 1e-6
) -> NormComparison:
    """Extension by zero from H to G preserves the group-algebra norm."""
    H = G.subgroup(members)
    fh = GroupFunction(H, f_on_h)
    ext = np.zeros(G.order, dtype=complex)
    ext[np.asarray(members, dtype=int)] = fh.values
    left = fp_lambda_norm(fh, p, cfg).lower_bound
    right = fp_lambda_norm(GroupFunction(G, ext), p, cfg).lower_bound
    return NormComparison(left, right, abs(left - right) <= tol * max(1.0, left))


def quotient_pushforward(f: GroupFunction, normal: Sequence[int]) -> GroupFunction:
    Q, coset_of = f.group.quotient(normal)
    out = np.zeros(Q.order, dtype=complex)
    np.add.at(out, coset_of, f.values)
    return GroupFunction(Q, out)


def quotient_contraction_check(
    G: FiniteGroup, normal: Sequence[int], f: GroupFunction, p: float, cfg: SearchConfig | None = None, tol: float = 1e-6
) -> NormComparison:
    """||pi(f)|| on G/N is at most ||f|| on G."""
    if f.group is not G:
        raise ValidationError("function lives on a different group")
    pf = quotient_pushforward(f, normal)
    left = fp_lambda_norm(pf, p, cfg).lower_bound
    right = fp_lambda_norm(f, p, cfg).lower_bound
    return NormComparison(left, right, left <= right + tol)
