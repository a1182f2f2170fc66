"""Spatial structure of operators on weighted l^p_n.

For p != 2 every invertible isometry of l^p over weighted atoms is a
"weighted generalized permutation": a bijection of the atoms, rescaled by the
p-th root of the weight ratio and multiplied by unimodular phases. This module
builds such operators, recovers the data from a matrix, and handles the
partial (non-invertible) analogue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ExponentTwo, NotIsometry, NotSpatialError, ValidationError
from .lpcore import (
    DEFAULT_TOL,
    Operator,
    WeightedSpace,
    _check_perm,
    as_operator,
    check_exponent,
    inverse_permutation,
    pushforward,
)
from .opnorm import SearchConfig, is_invertible_isometry, opnorm

SUPPORT_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpatialIsometry:
    """``perm[j]`` is the image of atom ``j``; ``phases`` is indexed by image atom."""

    space: WeightedSpace
    perm: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        perm = _check_perm(np.asarray(self.perm), self.space.n)
        phases = np.asarray(self.phases, dtype=complex).reshape(-1)
        if len(phases) != self.space.n:
            raise ValidationError("need one phase per atom")
        if np.any(np.abs(np.abs(phases) - 1) > 1e-12):
            raise ValidationError("phases must be unimodular")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "phases", phases)

    def __mul__(self, other: "SpatialIsometry") -> "SpatialIsometry":
        # m_f u_phi m_g u_psi = m_{f (g o phi^-1)} u_{phi psi}
        return SpatialIsometry(
            self.space,
            self.perm[other.perm],
            self.phases * pushforward(other.phases, self.perm),
        )

    def to_dict(self):
        from .jsonio import encode_complex_array, encode_space

        return {
            "weights": encode_space(self.space)["weights"],
            "perm": [int(i) for i in self.perm],
            "phases": encode_complex_array(self.phases),
        }


@dataclass(frozen=True, eq=False)
class SpatialQuadruple:
    """Data (E, F, phi, f) of a spatial partial isometry on ``space``.

    ``bijection`` maps each atom of E to an atom of F; ``phases`` is keyed by
    the atoms of F.
    """

    space: WeightedSpace
    domain_set: tuple
    range_set: tuple
    bijection: Mapping[int, int]
    phases: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        E = tuple(sorted(int(e) for e in self.domain_set))
        F = tuple(sorted(int(f) for f in self.range_set))
        phi = {int(k): int(v) for k, v in dict(self.bijection).items()}
        if set(phi) != set(E) or sorted(phi.values()) != list(F):
            raise ValidationError("bijection must map the domain set onto the range set")
        if any(not 0 <= a < self.space.n for a in E + F):
            raise ValidationError("atoms out of range")
        phases = {int(k): complex(v) for k, v in dict(self.phases).items()} if self.phases else {f: 1.0 + 0j for f in F}
        if set(phases) != set(F):
            raise ValidationError("need exactly one phase per range atom")
        if any(abs(abs(z) - 1) > 1e-9 for z in phases.values()):
            raise ValidationError("phases must be unimodular")
        object.__setattr__(self, "domain_set", E)
        object.__setattr__(self, "range_set", F)
        object.__setattr__(self, "bijection", phi)
        object.__setattr__(self, "phases", phases)

    def reverse(self) -> "SpatialQuadruple":
        inv = {v: k for k, v in self.bijection.items()}
        return SpatialQuadruple(
            self.space,
            self.range_set,
            self.domain_set,
            inv,
            {e: np.conj(self.phases[self.bijection[e]]) for e in self.domain_set},
        )

    def same_as(self, other: "SpatialQuadruple", tol: float = 1e-12) -> bool:
        return (
            self.domain_set == other.domain_set
            and self.range_set == other.range_set
            and self.bijection == other.bijection
            and all(abs(self.phases[f] - other.phases[f]) <= tol for f in self.range_set)
        )

    def to_dict(self):
        from .jsonio import encode_complex

        return {
            "domain": list(self.domain_set),
            "range": list(self.range_set),
            "bijection": {str(k): v for k, v in sorted(self.bijection.items())},
            "phases": {str(k): encode_complex(v) for k, v in sorted(self.phases.items())},
        }


@dataclass(frozen=True)
class NotSpatial:
    """Negative verdict from ``classify_spatial``."""

    reason: str
    row: int | None = None
    col: int | None = None

    def __bool__(self):
        return False

    def to_dict(self):
        return {"spatial": False, "reason": self.reason, "row": self.row, "col": self.col}


def _refuse_two(p, what):
    if p == 2:
        raise ExponentTwo(what)


def build_spatial_isometry(si: SpatialIsometry, p: float) -> Operator:
    p = check_exponent(p)
    w = si.space.weights
    cols = np.arange(si.space.n)
    rows = si.perm
    m = np.zeros((si.space.n, si.space.n), dtype=complex)
    m[rows, cols] = si.phases[rows] * (w[cols] / w[rows]) ** (1.0 / p)
    return Operator(m, si.space, si.space)


def _support(m: np.ndarray) -> np.ndarray:
    scale = np.abs(m).max(initial=0.0)
    if scale == 0:
        return np.zeros(m.shape, dtype=bool)
    return np.abs(m) > SUPPORT_RTOL * scale


def lamperti_decompose(a, p: float, tol: float = DEFAULT_TOL, cfg: SearchConfig | None = None) -> SpatialIsometry:
    """Recover (perm, phases) from an invertible isometry with p != 2."""
    a = as_operator(a)
    p = check_exponent(p)
    _refuse_two(p, "Lamperti decomposition")
    if not a.is_square:
        raise ValidationError("operator must act on a single weighted space")
    if not is_invertible_isometry(a, p, tol, cfg):
        raise NotIsometry(f"operator is not an invertible isometry at p = {p}", exponent=p)
    m = a.matrix
    supp = _support(m)
    for j in range(m.shape[1]):
        if supp[:, j].sum() != 1:
            raise NotSpatialError(f"column {j} has {supp[:, j].sum()} nonzero entries", col=j)
    for i in range(m.shape[0]):
        if supp[i].sum() != 1:
            raise NotSpatialError(f"row {i} has {supp[i].sum()} nonzero entries", row=i)
    perm = np.argmax(supp, axis=0)
    w = a.domain.weights
    cols = np.arange(len(perm))
    phases = np.empty(len(perm), dtype=complex)
    phases[perm] = m[perm, cols] / (w[cols] / w[perm]) ** (1.0 / p)
    bad = np.abs(np.abs(phases) - 1) > tol
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NotSpatialError(f"entry in row {i} has the wrong modulus", row=i)
    return SpatialIsometry(a.domain, perm, phases / np.abs(phases))


@dataclass(frozen=True)
class DistanceReport:
    analytic: float
    numeric: float
    agree: bool

    def to_dict(self):
        return {"analytic": self.analytic, "numeric": self.numeric, "agree": self.agree}


def isometry_distance(
    f: Sequence[complex],
    phi: Sequence[int],
    g: Sequence[complex],
    psi: Sequence[int],
    p: float,
    space: WeightedSpace | None = None,
    cfg: SearchConfig | None = None,
    tol: float = 1e-6,
) -> DistanceReport:
    """``||m_f u_phi - m_g u_psi||`` two ways.

    ``analytic`` is ``max(||f - g||_inf, 2 [phi != psi])``; ``numeric`` is the
    estimator applied to the difference matrix. They coincide when
    ``phi == psi`` (any p) and at p = 1. For ``phi != psi`` and p > 1 the true
    norm can be smaller than 2 (e.g. identity minus a 3-cycle has norm
    sqrt(3) at p = 2), in which case ``agree`` is False.
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    space = space or WeightedSpace.uniform(len(f))
    a = build_spatial_isometry(SpatialIsometry(space, phi, f), p)
    b = build_spatial_isometry(SpatialIsometry(space, psi, g), p)
    same = np.array_equal(np.asarray(phi), np.asarray(psi))
    analytic = max(float(np.max(np.abs(f - g))), 0.0 if same else 2.0)
    numeric = opnorm(a - b, p, cfg).lower_bound
    return DistanceReport(analytic, numeric, bool(abs(analytic - numeric) <= tol))


def build_spatial_partial_isometry(q: SpatialQuadruple, p: float) -> tuple[Operator, Operator]:
    """The partial isometry of ``q`` and its reverse.

    ``reverse @ s`` is the indicator projection of the domain set and
    ``s @ reverse`` that of the range set.
    """
    p = check_exponent(p)
    w = q.space.weights
    n = q.space.n
    s = np.zeros((n, n), dtype=complex)
    t = np.zeros((n, n), dtype=complex)
    for e, f in q.bijection.items():
        s[f, e] = q.phases[f] * (w[e] / w[f]) ** (1.0 / p)
        t[e, f] = np.conj(q.phases[f]) * (w[f] / w[e]) ** (1.0 / p)
    return Operator(s, q.space, q.space), Operator(t, q.space, q.space)


def classify_spatial(s, p: float, tol: float = DEFAULT_TOL) -> SpatialQuadruple | NotSpatial:
    s = as_operator(s)
    p = check_exponent(p)
    _refuse_two(p, "spatial classification")
    if not s.is_square:
        raise ValidationError("operator must act on a single weighted space")
    m = s.matrix
    supp = _support(m)
    for i in np.flatnonzero(supp.sum(axis=1) > 1):
        return NotSpatial("row has more than one nonzero entry", row=int(i))
    for j in np.flatnonzero(supp.sum(axis=0) > 1):
        return NotSpatial("column has more than one nonzero entry", col=int(j))
    w = s.domain.weights
    bij, phases = {}, {}
    for i, j in zip(*np.nonzero(supp)):
        scale = (w[j] / w[i]) ** (1.0 / p)
        z = m[i, j] / scale
        if abs(abs(z) - 1) > tol:
            return NotSpatial(f"modulus {abs(m[i, j]):.6g} differs from weight ratio {scale:.6g}", int(i), int(j))
        bij[int(j)] = int(i)
        phases[int(i)] = z / abs(z)
    return SpatialQuadruple(s.domain, tuple(bij), tuple(bij.values()), bij, phases)


# -- hermitian elements and the C*-core ----------------------------------------


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring of the Taylor series.

    The scaled matrix has 1-norm at most 1/2, so the series tail after a term
    of norm ``t`` is below ``2 t``; summation stops once that is under 1e-16,
    well inside a 1e-13 budget after squaring.
    """
    a = np.asarray(a, dtype=complex)
    norm = np.abs(a).sum(axis=0).max(initial=0.0)
    squarings = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0 else 0
    b = a / 2.0**squarings
    out = np.eye(len(a), dtype=complex)
    term = np.eye(len(a), dtype=complex)
    bnorm = np.abs(b).sum(axis=0).max(initial=0.0)
    bound = 1.0
    k = 0
    while True:
        k += 1
        term = term @ b / k
        out = out + term
        bound *= bnorm / k
        if bound <= 1e-17 or k > 60:
            break
    for _ in range(squarings):
        out = out @ out
    return out


def default_t_grid() -> np.ndarray:
    return np.unique(np.concatenate([np.pi * np.arange(1, 33) / 32, [np.pi / 2]]))


def hermitian_test(a, p: float, t_grid=None, tol: float = DEFAULT_TOL, cfg: SearchConfig | None = None) -> bool:
    """True iff ||exp(i t a)||_p <= 1 + tol at every t of the grid."""
    a = as_operator(a)
    p = check_exponent(p)
    ts = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    for t in ts:
        if opnorm(a.with_matrix(expm(1j * t * a.matrix)), p, cfg).lower_bound > 1 + tol:
            return False
    return True


@dataclass
class CoreReport:
    passed: list
    failed: dict  # generator index -> [(row, col, |entry|), ...]

    @property
    def all_pass(self) -> bool:
        return not self.failed

    def to_dict(self):
        return {
            "all_pass": self.all_pass,
            "passed": self.passed,
            "failed": {str(k): [list(e) for e in v] for k, v in self.failed.items()},
        }


def core_check(generators, p: float, tol: float = DEFAULT_TOL) -> CoreReport:
    """Which generators lie in the C*-core, i.e. are multiplication operators."""
    p = check_exponent(p)
    _refuse_two(p, "core membership")
    passed, failed = [], {}
    for idx, g in enumerate(generators):
        m = as_operator(g).matrix
        off = m - np.diag(np.diag(m))
        scale = max(1.0, float(np.abs(np.diag(m)).max(initial=0.0)))
        hits = [(int(i), int(j), float(abs(off[i, j]))) for i, j in zip(*np.nonzero(np.abs(off) > tol * scale))]
        if hits:
            failed[idx] = hits
        else:
            passed.append(idx)
    return CoreReport(passed, failed)


@dataclass
class TwoExponentVerdict:
    passes: bool
    decomposition: SpatialIsometry
    worst_ratio: float  # rn ratio farthest from 1 (1.0 when weight-preserving)
    max_modulus_error: float

    def to_dict(self):
        return {
            "passes": self.passes,
            "decomposition": self.decomposition.to_dict(),
            "worst_ratio": self.worst_ratio,
            "max_modulus_error": self.max_modulus_error,
        }


def two_exponent_check(a, p: float, q: float, tol: float = DEFAULT_TOL, cfg: SearchConfig | None = None) -> TwoExponentVerdict:
    """An operator isometric at two distinct exponents is a plain phase-permutation.

    Raises ``NotIsometry`` naming the first exponent at which ``a`` fails.
    """
    a = as_operator(a)
    p, q = check_exponent(p), check_exponent(q)
    if p == q:
        raise ValidationError("the two exponents must differ")
    for e in (p, q):
        if not is_invertible_isometry(a, e, tol, cfg):
            raise NotIsometry(f"not an invertible isometry at p = {e}", exponent=e)
    e = p if p != 2 else q
    dec = lamperti_decompose(a, e, tol, cfg)
    w = a.domain.weights
    ratios = w[inverse_permutation(dec.perm)] / w
    worst = float(ratios[np.argmax(np.abs(np.log(ratios)))])
    nz = a.matrix[_support(a.matrix)]
    mod_err = float(np.max(np.abs(np.abs(nz) - 1), initial=0.0))
    return TwoExponentVerdict(bool(abs(worst - 1) <= tol and mod_err <= tol), dec, worst, mod_err)
