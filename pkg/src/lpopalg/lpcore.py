"""Weighted l^p arithmetic on finitely many atoms.

A finite-dimensional L^p space is l^p of a weighted counting measure: atom ``i``
carries mass ``weights[i] > 0`` and

    ||x||_p = (sum_i weights[i] * |x_i|**p) ** (1/p).

Everything downstream (operator norms, isometries, group algebras) is built on
the helpers here. Plain ndarrays are accepted wherever a ``Vec`` or
``Operator`` is expected; they are taken to live on unit weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidExponent, InvalidPermutation

DEFAULT_TOL = 1e-9


def check_exponent(p: float) -> float:
    p = float(p)
    if not np.isfinite(p):
        raise InvalidExponent("p = inf is not supported")
    if p < 1:
        raise InvalidExponent(f"exponent must satisfy p >= 1, got {p}")
    return p


def conjugate_exponent(p: float) -> float:
    """Hoelder conjugate p' with 1/p + 1/p' = 1 (inf for p = 1)."""
    p = check_exponent(p)
    if p == 1:
        return np.inf
    return p / (p - 1)


@dataclass(frozen=True, eq=False)
class WeightedSpace:
    weights: np.ndarray
    atoms: tuple = field(default=())

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise DimensionError("weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        atoms = tuple(self.atoms) if self.atoms else tuple(range(len(w)))
        if len(atoms) != len(w):
            raise DimensionError("atom labels and weights differ in length")
        if len(set(atoms)) != len(atoms):
            raise DimensionError("atom labels must be distinct")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def uniform(cls, n: int) -> "WeightedSpace":
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return len(self.weights)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, WeightedSpace):
            return NotImplemented
        return self.atoms == other.atoms and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.atoms, self.weights.tobytes()))

    def __repr__(self):
        return f"WeightedSpace(weights={self.weights.tolist()})"


@dataclass(frozen=True, eq=False)
class Vec:
    space: WeightedSpace
    entries: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.entries, dtype=complex).reshape(-1)
        if len(x) != self.space.n:
            raise DimensionError(f"vector has {len(x)} entries, space has {self.space.n} atoms")
        object.__setattr__(self, "entries", x)

    @property
    def weights(self):
        return self.space.weights


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense matrix ``matrix[codomain atom, domain atom]`` between weighted spaces."""

    matrix: np.ndarray
    domain: WeightedSpace | None = None
    codomain: WeightedSpace | None = None

    def __post_init__(self):
        a = np.array(self.matrix, dtype=complex, copy=True)
        if a.ndim != 2:
            raise DimensionError("operator matrix must be two-dimensional")
        dom = self.domain if self.domain is not None else WeightedSpace.uniform(a.shape[1])
        cod = self.codomain
        if cod is None:
            cod = dom if a.shape[0] == a.shape[1] else WeightedSpace.uniform(a.shape[0])
        if a.shape != (cod.n, dom.n):
            raise DimensionError(f"matrix shape {a.shape} does not match spaces ({cod.n}, {dom.n})")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "codomain", cod)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_square(self) -> bool:
        return self.domain == self.codomain

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.codomain != self.domain:
                raise DimensionError("cannot compose operators over different spaces")
            return Operator(self.matrix @ other.matrix, other.domain, self.codomain)
        if isinstance(other, Vec):
            if other.space != self.domain:
                raise DimensionError("vector lives on a different space")
            return Vec(self.codomain, self.matrix @ other.entries)
        return NotImplemented

    def __add__(self, other):
        _same_spaces(self, other)
        return Operator(self.matrix + other.matrix, self.domain, self.codomain)

    def __sub__(self, other):
        _same_spaces(self, other)
        return Operator(self.matrix - other.matrix, self.domain, self.codomain)

    def __mul__(self, scalar):
        return Operator(self.matrix * complex(scalar), self.domain, self.codomain)

    __rmul__ = __mul__

    def inverse(self) -> "Operator":
        return Operator(np.linalg.inv(self.matrix), self.codomain, self.domain)

    def with_matrix(self, matrix) -> "Operator":
        return Operator(matrix, self.domain, self.codomain)


def _same_spaces(a: Operator, b: Operator):
    if a.domain != b.domain or a.codomain != b.codomain:
        raise DimensionError("operators act between different spaces")


def as_operator(a, weights=None) -> Operator:
    if isinstance(a, Operator):
        return a
    a = np.asarray(a, dtype=complex)
    if weights is None:
        return Operator(a)
    space = weights if isinstance(weights, WeightedSpace) else WeightedSpace(weights)
    return Operator(a, space, space)


def as_vec(x, space: WeightedSpace | None = None) -> Vec:
    if isinstance(x, Vec):
        if space is not None and x.space != space:
            raise DimensionError("vector lives on a different space")
        return x
    x = np.asarray(x, dtype=complex).reshape(-1)
    return Vec(space if space is not None else WeightedSpace.uniform(len(x)), x)


def identity(space: WeightedSpace | int) -> Operator:
    if not isinstance(space, WeightedSpace):
        space = WeightedSpace.uniform(space)
    return Operator(np.eye(space.n), space, space)


# -- array-level kernels ----------------------------------------------------
# These work column-wise on (n, k) arrays so the norm estimators can push many
# candidate vectors through at once.


def lp_norm(x: np.ndarray, w: np.ndarray, p: float, axis=0) -> np.ndarray:
    ax = np.abs(x)
    if np.isinf(p):
        return ax.max(axis=axis)
    wb = w.reshape((-1,) + (1,) * (x.ndim - 1)) if axis == 0 else w
    if p == 1:
        return (wb * ax).sum(axis=axis)
    if p == 2:
        return np.sqrt((wb * ax * ax).sum(axis=axis))
    return ((wb * ax**p).sum(axis=axis)) ** (1.0 / p)


def complex_sign(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    out = np.zeros(x.shape, dtype=complex)
    nz = x != 0
    # angle rather than x/|x|: the division overflows for subnormal entries
    out[nz] = np.exp(1j * np.angle(x[nz]))
    return out


def dual_entries(x: np.ndarray, p: float) -> np.ndarray:
    """sign(x) |x|^(p-1), with sign(0) = 0."""
    if p == 1:
        return complex_sign(x)
    if p == 2:
        return np.asarray(x, dtype=complex)
    return complex_sign(x) * np.abs(x) ** (p - 1)


def pairing(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> complex:
    """Weighted sesquilinear pairing sum_i w_i x_i conj(y_i)."""
    return complex(np.sum(w * x * np.conj(y)))


# -- public operations ------------------------------------------------------


def vec_norm(x, p: float) -> float:
    x = as_vec(x)
    p = check_exponent(p)
    return float(lp_norm(x.entries, x.weights, p))


def duality_map(x, p: float) -> Vec:
    """Norming functional of ``x``.

    ``y = duality_map(x, p)`` satisfies ``<x, y> = ||x||_p^p`` under the
    weighted pairing and ``||y||_{p'} = ||x||_p^(p-1)``.
    """
    x = as_vec(x)
    p = check_exponent(p)
    return Vec(x.space, dual_entries(x.entries, p))


def _check_perm(perm: Sequence[int], n: int) -> np.ndarray:
    perm = np.asarray(perm)
    if perm.shape != (n,) or not np.issubdtype(perm.dtype, np.integer):
        raise InvalidPermutation(f"permutation must be {n} integers")
    if sorted(perm.tolist()) != list(range(n)):
        raise InvalidPermutation(f"{perm.tolist()} is not a bijection of {n} atoms")
    return perm


def inverse_permutation(perm: Sequence[int]) -> np.ndarray:
    perm = _check_perm(perm, len(perm))
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv


def pushforward(values: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Transport a function along ``perm``: ``out[perm[i]] = values[i]``."""
    values = np.asarray(values)
    out = np.empty_like(values)
    out[np.asarray(perm)] = values
    return out


def rn_derivative(space: WeightedSpace, perm: Sequence[int]) -> Vec:
    """Radon-Nikodym derivative of the pushed-forward measure.

    ``perm[i]`` is the image of atom ``i``; the value at atom ``i`` is
    ``weights[perm^-1(i)] / weights[i]``.
    """
    perm = _check_perm(perm, space.n)
    inv = inverse_permutation(perm)
    w = space.weights
    return Vec(space, w[inv] / w)


@dataclass(frozen=True)
class ChangeOfVariablesReport:
    lhs: float | complex
    rhs: float | complex
    difference: float
    norm_difference: float


def change_of_variables_check(f, space: WeightedSpace, perm, p: float = 1.0) -> ChangeOfVariablesReport:
    """Evaluate both sides of the atomic change of variables formula.

    ``sum_i w_i f_i`` against ``sum_i w_i (f o perm^-1)_i * rn_i``. The second
    report field compares ``||u_perm f||_p`` with ``||f||_p``, the weighted
    composition operator being isometric precisely because of this identity.
    """
    f = as_vec(f, space)
    p = check_exponent(p)
    w = space.weights
    rn = rn_derivative(space, perm).entries.real
    moved = pushforward(f.entries, perm)
    lhs = complex(np.sum(w * f.entries))
    rhs = complex(np.sum(w * moved * rn))
    composed = moved * rn ** (1.0 / p)
    norm_diff = abs(float(lp_norm(composed, w, p)) - float(lp_norm(f.entries, w, p)))
    return ChangeOfVariablesReport(_simplify(lhs), _simplify(rhs), abs(lhs - rhs), norm_diff)


def _simplify(z: complex):
    return z.real if z.imag == 0 else z


@dataclass(frozen=True)
class ClarksonRecord:
    lhs: float
    rhs: float
    relation: str  # ">=", "<=" or "=" (p == 2)
    holds: bool
    equality_flag: bool


def clarkson_check(x, y, p: float, tol: float = DEFAULT_TOL) -> ClarksonRecord:
    x = as_vec(x)
    y = as_vec(y, x.space)
    p = check_exponent(p)
    w = x.weights

    def pp(v):
        return float(np.sum(w * np.abs(v) ** p))

    lhs = pp(x.entries + y.entries) + pp(x.entries - y.entries)
    rhs = 2.0 * (pp(x.entries) + pp(y.entries))
    slack = tol * max(1.0, abs(rhs))
    if p == 2:
        relation, holds = "=", abs(lhs - rhs) <= slack
    elif p > 2:
        relation, holds = ">=", lhs >= rhs - slack
    else:
        relation, holds = "<=", lhs <= rhs + slack
    return ClarksonRecord(lhs, rhs, relation, bool(holds), bool(abs(lhs - rhs) <= slack))
