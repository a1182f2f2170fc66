"""Finite dynamical systems and their crossed products on l^p.

* ``FiniteAction``: a finite group acting on a finite point set, as a table
  ``act[g, x]``.
* ``CrossedElement``: a function G -> C(X), stored as a ``|G| x |X|`` array.
* The Z2 * Z3 action on alternating words, truncated to finite prefixes.
* A checker for continuous orbit equivalence data on finite truncations.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CoverageError, InvalidAction, TruncationError, ValidationError
from .groupalg import FiniteGroup
from .lpcore import Operator, WeightedSpace, check_exponent
from .opnorm import NormEstimate, SearchConfig, opnorm


class FiniteAction:
    def __init__(self, group: FiniteGroup, points: Sequence, act):
        self.group = group
        self.points = list(points)
        nx = len(self.points)
        if nx == 0:
            raise InvalidAction("need at least one point")
        if callable(act):
            act = [[act(g, x) for x in range(nx)] for g in range(group.order)]
        t = np.asarray(act, dtype=int)
        if t.shape != (group.order, nx) or t.min() < 0 or t.max() >= nx:
            raise InvalidAction(f"action table must be {group.order}x{nx} with point indices")
        if not np.array_equal(t[group.identity], np.arange(nx)):
            raise InvalidAction("identity must act trivially")
        for g in range(group.order):
            for h in range(group.order):
                if not np.array_equal(t[g][t[h]], t[group.mul(g, h)]):
                    raise InvalidAction(f"g.(h.x) != (gh).x for g={group.elements[g]}, h={group.elements[h]}")
        self.table = t

    @property
    def n_points(self) -> int:
        return len(self.points)

    def act(self, g: int, x: int) -> int:
        return int(self.table[g, x])

    @classmethod
    def trivial(cls, group: FiniteGroup, n_points: int = 1) -> "FiniteAction":
        return cls(group, range(n_points), lambda g, x: x)

    @classmethod
    def translation(cls, group: FiniteGroup) -> "FiniteAction":
        """G acting on itself by left translation."""
        return cls(group, group.elements, lambda g, x: group.mul(g, x))

    @classmethod
    def from_json(cls, obj) -> "FiniteAction":
        try:
            g = obj["group"]
            group = FiniteGroup.from_name(g) if isinstance(g, str) else FiniteGroup(g["elements"], g["table"])
            return cls(group, obj["points"], obj["act"])
        except (KeyError, TypeError) as exc:
            raise InvalidAction(f"bad action JSON: {exc}") from exc

    def generator_maps(self) -> dict:
        """Every group element as a point map, keyed by label (for orbit-equivalence checks)."""
        return {str(self.group.elements[g]): {str(self.points[x]): str(self.points[self.act(g, x)]) for x in range(self.n_points)} for g in range(self.group.order)}

    def to_dict(self):
        return {"group": self.group.to_dict(), "points": [str(p) for p in self.points], "act": self.table.tolist()}


@dataclass(frozen=True, eq=False)
class CrossedElement:
    action: FiniteAction
    values: np.ndarray  # values[s, x] = f(s)(x)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        shape = (self.action.group.order, self.action.n_points)
        if v.shape != shape:
            raise ValidationError(f"crossed element must have shape {shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def unit(cls, action: FiniteAction) -> "CrossedElement":
        v = np.zeros((action.group.order, action.n_points), dtype=complex)
        v[action.group.identity] = 1
        return cls(action, v)

    def __mul__(self, other: "CrossedElement") -> "CrossedElement":
        return twisted_convolution(self, other)


def alpha(action: FiniteAction, t: int, h: np.ndarray) -> np.ndarray:
    """(alpha_t h)(x) = h(t^-1 . x)."""
    return h[action.table[action.group.inv(t)]]


def twisted_convolution(f: CrossedElement, g: CrossedElement) -> CrossedElement:
    """(f * g)(s) = sum_t f(t) alpha_t(g(t^-1 s))."""
    if f.action is not g.action:
        raise ValidationError("elements belong to different actions")
    A = f.action
    G = A.group
    out = np.zeros_like(f.values)
    for t in range(G.order):
        ti = G.inv(t)
        for s in range(G.order):
            out[s] += f.values[t] * alpha(A, t, g.values[G.mul(ti, s)])
    return CrossedElement(A, out)


@dataclass
class RegularPair:
    """Regular covariant pair on l^p(G x X), basis index ``s * |X| + x``."""

    action: FiniteAction
    p: float

    @property
    def dim(self) -> int:
        return self.action.group.order * self.action.n_points

    def phi(self, a) -> np.ndarray:
        """phi(a) is diagonal with entry a(s . x) at (s, x)."""
        a = np.asarray(a, dtype=complex)
        return np.diag(a[self.action.table].reshape(-1))

    def u(self, s: int) -> np.ndarray:
        """u_s e_(t, x) = e_(st, x)."""
        G, nx = self.action.group, self.action.n_points
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for t in range(G.order):
            st = G.mul(s, t)
            for x in range(nx):
                m[st * nx + x, t * nx + x] = 1
        return m

    def integrated(self, f: CrossedElement) -> np.ndarray:
        return sum(self.phi(f.values[s]) @ self.u(s) for s in range(self.action.group.order))

    def covariance_defect(self, s: int, a) -> float:
        """max |u_s phi(a) u_s^-1 - phi(alpha_s a)|."""
        us = self.u(s)
        lhs = us @ self.phi(a) @ us.T  # permutation matrix: inverse is transpose
        rhs = self.phi(alpha(self.action, s, np.asarray(a, dtype=complex)))
        return float(np.max(np.abs(lhs - rhs)))


def regular_pair(action: FiniteAction, p: float = 2.0) -> RegularPair:
    """Regular pair seeded by multiplication operators of C(X) on l^p(X)."""
    return RegularPair(action, check_exponent(p))


def reduced_norm(f: CrossedElement, p: float, cfg: SearchConfig | None = None) -> NormEstimate:
    pair = regular_pair(f.action, p)
    space = WeightedSpace.uniform(pair.dim)
    return opnorm(Operator(pair.integrated(f), space, space), p, cfg)


def crossed_span_dimension(action: FiniteAction, tol: float = 1e-9) -> int:
    """Rank of the integrated forms of all delta_s (x) 1_x."""
    pair = regular_pair(action)
    rows = []
    for s in range(action.group.order):
        for x in range(action.n_points):
            v = np.zeros((action.group.order, action.n_points), dtype=complex)
            v[s, x] = 1
            rows.append(pair.integrated(CrossedElement(action, v)).reshape(-1))
    return int(np.linalg.matrix_rank(np.array(rows), tol=tol))


# -- the Z2 * Z3 action on alternating words ---------------------------------------

LETTERS = ("a", "b", "b2")
_TYPE = {"a": 2, "b": 3, "b2": 3}


@dataclass(frozen=True)
class AlternatingWord:
    """Finite prefix x(0..depth-1) of a point of the Cantor set.

    Letters are nontrivial: ``a`` in Z2 and ``b`` or ``b2`` in Z3, with
    consecutive letters from different factors.
    """

    letters: tuple

    def __post_init__(self):
        letters = tuple(_norm_letter(x) for x in self.letters)
        for x, y in zip(letters, letters[1:]):
            if _TYPE[x] == _TYPE[y]:
                raise ValidationError(f"letters {x}, {y} are from the same factor")
        object.__setattr__(self, "letters", letters)

    @property
    def depth(self) -> int:
        return len(self.letters)

    @property
    def types(self) -> tuple:
        return tuple(_TYPE[x] for x in self.letters)

    def __str__(self):
        return "(" + ",".join(self.letters) + ",...)"

    def to_dict(self):
        return {"letters": list(self.letters), "depth": self.depth}


def _norm_letter(x) -> str:
    x = str(x).replace("^", "").replace("²", "2")
    if x not in LETTERS:
        raise ValidationError(f"unknown letter {x!r} (use a, b, b2)")
    return x


def _act_a(x: tuple) -> tuple:
    if not x:
        raise TruncationError("acting on an empty prefix")
    if x[0] == "a":
        return x[1:]
    return ("a",) + x


def _act_b(x: tuple) -> tuple:
    if not x:
        raise TruncationError("acting on an empty prefix")
    if x[0] == "b2":
        return x[1:]
    if x[0] == "b":
        return ("b2",) + x[1:]
    return ("b",) + x


def parse_word(word: str) -> list[str]:
    """Parse a group word such as ``"ab^2a"`` into generator letters ``a``/``b``.

    ``b^k`` expands to k copies of ``b`` (k taken mod 3); ``e`` or an empty
    string is the identity.
    """
    w = word.replace(" ", "").replace("*", "")
    if w in ("", "e", "1"):
        return []
    out = []
    for m in re.finditer(r"([ab])(?:\^?(-?\d+))?|(.)", w):
        if m.group(3) is not None:
            raise ValidationError(f"cannot parse word {word!r}")
        gen, k = m.group(1), int(m.group(2)) if m.group(2) else 1
        out += [gen] * (k % (2 if gen == "a" else 3))
    return out


def cantor_act(g, x: AlternatingWord) -> AlternatingWord:
    """Act by a word (string or letter list) on a finite prefix, right to left.

    Each generator multiplies the reduced word on the left: ``a`` cancels a
    leading ``a`` or prepends one; ``b`` cancels a leading ``b2``, turns a
    leading ``b`` into ``b2``, or prepends ``b`` before an ``a``.
    """
    gens = parse_word(g) if isinstance(g, str) else list(g)
    y = x.letters
    for gen in reversed(gens):
        y = _act_a(y) if gen == "a" else _act_b(y)
    return AlternatingWord(y)


def alternating_words(depth: int):
    """All alternating words of the given depth, in a fixed order."""
    for first_type in (2, 3):
        types = [first_type if k % 2 == 0 else 5 - first_type for k in range(depth)]
        choices = [("a",) if t == 2 else ("b", "b2") for t in types]
        for letters in itertools.product(*choices):
            yield AlternatingWord(letters)


def count_alternating_words(depth: int) -> int:
    if depth == 0:
        return 1
    # starting with a: 2^floor(N/2); starting in Z3: 2^ceil(N/2)
    return 2 ** (depth // 2) + 2 ** ((depth + 1) // 2)


def _common_prefix(x: tuple, y: tuple) -> tuple[int, bool]:
    k = min(len(x), len(y))
    return k, x[:k] == y[:k]


@dataclass
class OrderReport:
    depth: int
    words: int
    a_squared_ok: bool
    b_cubed_ok: bool
    min_prefix_a: int
    min_prefix_b: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.a_squared_ok and self.b_cubed_ok

    def to_dict(self):
        return {
            "depth": self.depth,
            "words": self.words,
            "a_squared_identity": self.a_squared_ok,
            "b_cubed_identity": self.b_cubed_ok,
            "min_common_prefix_a": self.min_prefix_a,
            "min_common_prefix_b": self.min_prefix_b,
            "failures": self.failures,
            "ok": self.ok,
        }


def order_check(depth: int) -> OrderReport:
    """a.a.x and b.b.b.x against x on every word of the given depth."""
    if depth < 3:
        raise ValidationError("order check needs depth >= 3")
    rep = OrderReport(depth, 0, True, True, depth, depth)
    for x in alternating_words(depth):
        rep.words += 1
        for name, word in (("a", "aa"), ("b", "bbb")):
            k, same = _common_prefix(cantor_act(word, x).letters, x.letters)
            if name == "a":
                rep.min_prefix_a = min(rep.min_prefix_a, k)
                rep.a_squared_ok &= same
            else:
                rep.min_prefix_b = min(rep.min_prefix_b, k)
                rep.b_cubed_ok &= same
            if not same:
                rep.failures.append({"generator": name, "word": list(x.letters)})
    return rep


def fixed_point_census(g: str, depth: int) -> float:
    """Fraction of depth-N words x with g.x = x on the common defined prefix."""
    if not parse_word(g):
        raise ValidationError("census needs a nontrivial group word")
    fixed = total = 0
    for x in alternating_words(depth):
        total += 1
        try:
            y = cantor_act(g, x)
        except TruncationError:
            continue
        fixed += _common_prefix(y.letters, x.letters)[1]
    return fixed / total


# -- continuous orbit equivalence on finite truncations ----------------------------


@dataclass
class CoeData:
    theta: dict  # X point -> Y point
    c_H: dict  # (G label, X point) -> H label
    c_G: dict  # (H label, Y point) -> G label

    def __post_init__(self):
        if len(set(self.theta.values())) != len(self.theta):
            raise ValidationError("theta is not injective")

    @property
    def theta_inv(self) -> dict:
        return {y: x for x, y in self.theta.items()}

    @classmethod
    def from_json(cls, obj) -> "CoeData":
        try:
            theta = {str(k): str(v) for k, v in obj["theta"].items()}
            c_H = {(str(r["g"]), str(r["x"])): str(r["h"]) for r in obj["c_H"]}
            c_G = {(str(r["h"]), str(r["y"])): str(r["g"]) for r in obj["c_G"]}
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"bad orbit-equivalence JSON: {exc}") from exc
        return cls(theta, c_H, c_G)


@dataclass
class CoeReport:
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {"checked": self.checked, "violations": self.violations, "ok": self.ok}


def _maps(action) -> dict:
    if isinstance(action, FiniteAction):
        return action.generator_maps()
    return {str(g): {str(k): str(v) for k, v in m.items()} for g, m in dict(action).items()}


def coe_verify(data: CoeData, sigma, rho, generators_sigma=None, generators_rho=None) -> CoeReport:
    """Check both cocycle identities at every generator and point.

    ``sigma`` and ``rho`` are FiniteActions or mappings ``label -> {point: point}``.
    Checked: theta(sigma_g x) = rho_{c_H(g,x)}(theta x) and
    theta^-1(rho_h y) = sigma_{c_G(h,y)}(theta^-1 y).
    """
    sig, rh = _maps(sigma), _maps(rho)
    gens_s = list(sig) if generators_sigma is None else [str(g) for g in generators_sigma]
    gens_r = list(rh) if generators_rho is None else [str(h) for h in generators_rho]
    X = sorted({x for m in sig.values() for x in m})
    Y = sorted({y for m in rh.values() for y in m})
    theta, tinv = data.theta, data.theta_inv
    missing = [("theta", x) for x in X if x not in theta]
    missing += [("theta^-1", y) for y in Y if y not in tinv]
    missing += [("c_H", g, x) for g in gens_s for x in X if (g, x) not in data.c_H]
    missing += [("c_G", h, y) for h in gens_r for y in Y if (h, y) not in data.c_G]
    missing += [("rho", h) for h in set(data.c_H.values()) if h not in rh]
    missing += [("sigma", g) for g in set(data.c_G.values()) if g not in sig]
    if missing:
        raise CoverageError(f"{len(missing)} missing entries", missing=missing)
    violations, checked = [], 0
    for g in gens_s:
        for x in X:
            checked += 1
            h = data.c_H[(g, x)]
            if theta[sig[g][x]] != rh[h][theta[x]]:
                violations.append({"identity": "theta(sigma_g x) = rho_cH(theta x)", "g": g, "x": x})
    for h in gens_r:
        for y in Y:
            checked += 1
            g = data.c_G[(h, y)]
            if tinv[rh[h][y]] != sig[g][tinv[y]]:
                violations.append({"identity": "theta^-1(rho_h y) = sigma_cG(theta^-1 y)", "h": h, "y": y})
    return CoeReport(checked, violations)


def identity_coe(action: FiniteAction) -> CoeData:
    """theta = id, cocycles = projection onto the group coordinate."""
    maps = action.generator_maps()
    pts = [str(p) for p in action.points]
    c = {(g, x): g for g in maps for x in pts}
    return CoeData({x: x for x in pts}, dict(c), dict(c))


def relabel_coe(action: FiniteAction, relabel: Mapping) -> tuple[CoeData, dict]:
    """Transport the action along a point relabeling; returns the data and the new action maps."""
    maps = action.generator_maps()
    theta = {str(k): str(v) for k, v in relabel.items()}
    rho = {g: {theta[x]: theta[y] for x, y in m.items()} for g, m in maps.items()}
    pts = [str(p) for p in action.points]
    c_H = {(g, x): g for g in maps for x in pts}
    c_G = {(g, theta[x]): g for g in maps for x in pts}
    return CoeData(theta, c_H, c_G), rho
