"""p -> p operator norms on weighted l^p spaces.

Computing ||A||_{p->p} is NP-hard for general p, so there are two routes:

* ``opnorm`` -- a multistart nonlinear power iteration (Boyd's method with
  weighted duality maps). It returns a lower bound together with the vector
  attaining it, plus a cheap Riesz-Thorin upper bound.
* ``opnorm_oracle`` -- exhaustive sampling of the unit sphere for domains of
  dimension <= 3, polished by a quasi-Newton ascent and bracketed from above
  by a branch-and-bound cell bound. It shares no code with the iteration.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .errors import EmptyOperatorError, InvalidConjugator, OracleScopeError, ScopeError
from .lpcore import (
    Operator,
    Vec,
    as_operator,
    check_exponent,
    conjugate_exponent,
    dual_entries,
    lp_norm,
)

log = logging.getLogger(__name__)

RCOND_MIN = 1e-10


@dataclass(frozen=True)
class SearchConfig:
    starts: int = 8
    max_iterations: int = 2000
    convergence_tol: float = 1e-15
    rng_seed: int = 0
    certify_max_dim: int = 3
    grid_resolution: int | None = None
    # not part of the minimal contract, but needed to keep large searches cheap
    phase_count: int = 4
    max_pair_starts: int = 256
    screen_iterations: int = 25
    keep_after_screen: int = 4
    certification_gap: float = 1e-6

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")

    def with_seed(self, seed: int) -> "SearchConfig":
        return replace(self, rng_seed=seed)


@dataclass
class NormEstimate:
    lower_bound: float
    witness: Vec
    certified: bool = False
    upper_bound: float | None = None
    iterations: int = 0
    starts: int = 0
    history: list = field(default_factory=list, repr=False)

    @property
    def value(self) -> float:
        return self.lower_bound

    @property
    def gap(self) -> float | None:
        if self.upper_bound is None:
            return None
        return self.upper_bound - self.lower_bound

    def to_dict(self) -> dict:
        from .jsonio import encode_complex_array

        return {
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "certified": self.certified,
            "iterations": self.iterations,
            "starts": self.starts,
            "witness": encode_complex_array(self.witness.entries),
        }


# -- closed-form bounds -----------------------------------------------------


def column_norm_1(a: Operator) -> float:
    """Exact p = 1 norm: largest weighted column sum."""
    wd, wc = a.domain.weights, a.codomain.weights
    return float(np.max((wc[:, None] * np.abs(a.matrix)).sum(axis=0) / wd))


def row_norm_inf(a: Operator) -> float:
    return float(np.max(np.abs(a.matrix).sum(axis=1)))


def spectral_norm(a: Operator) -> float:
    """Exact p = 2 norm: top singular value of W_c^(1/2) A W_d^(-1/2)."""
    wd, wc = a.domain.weights, a.codomain.weights
    b = np.sqrt(wc)[:, None] * a.matrix / np.sqrt(wd)[None, :]
    return float(np.linalg.norm(b, 2))


def interpolation_upper_bound(a: Operator, p: float) -> float:
    """Riesz-Thorin bound, interpolating through p = 2 on the relevant side."""
    n1, ninf, n2 = column_norm_1(a), row_norm_inf(a), spectral_norm(a)
    if p == 1:
        return n1
    if p == 2:
        return n2
    bounds = [n1 ** (1 / p) * ninf ** (1 - 1 / p)]
    if p < 2:
        theta = 2 - 2 / p
        bounds.append(n1 ** (1 - theta) * n2**theta)
    else:
        bounds.append(n2 ** (2 / p) * ninf ** (1 - 2 / p))
    return float(min(bounds))


# -- power iteration --------------------------------------------------------


def _start_menu(d: int, cfg: SearchConfig, rng: np.random.Generator) -> np.ndarray:
    cols = [np.eye(d, dtype=complex)]
    pairs = list(itertools.combinations(range(d), 2))
    phases = np.exp(2j * np.pi * np.arange(cfg.phase_count) / cfg.phase_count)
    n_pair = len(pairs) * len(phases)
    if n_pair > cfg.max_pair_starts:
        idx = rng.choice(n_pair, size=cfg.max_pair_starts, replace=False)
        chosen = [(pairs[i // len(phases)], phases[i % len(phases)]) for i in sorted(idx)]
    else:
        chosen = [(pr, ph) for pr in pairs for ph in phases]
    if chosen:
        block = np.zeros((d, len(chosen)), dtype=complex)
        for c, ((j, k), ph) in enumerate(chosen):
            block[j, c] = 1.0
            block[k, c] = ph
        cols.append(block)
    rand = rng.standard_normal((d, cfg.starts)) + 1j * rng.standard_normal((d, cfg.starts))
    cols.append(rand)
    return np.concatenate(cols, axis=1)


class _Iteration:
    """One ascent step x -> normalize(J_{p'}(A^# J_p(A x))) applied column-wise."""

    def __init__(self, a: Operator, p: float):
        self.a = a.matrix
        self.wd = a.domain.weights
        self.wc = a.codomain.weights
        # adjoint for the weighted pairing <x, y> = sum w x conj(y)
        self.adj = (self.a.conj().T * self.wc[None, :]) / self.wd[:, None]
        self.p = p
        self.q = conjugate_exponent(p)

    def normalize(self, x):
        n = lp_norm(x, self.wd, self.p)
        n = np.where(n > 0, n, 1.0)
        return x / n

    def value(self, x):
        return lp_norm(self.a @ x, self.wc, self.p)

    def step(self, x):
        y = self.a @ x
        g = self.adj @ dual_entries(y, self.p)
        if self.p == 1:
            # the l^inf dual: a point mass on the largest |g_k|
            k = np.argmax(np.abs(g), axis=0)
            cols = np.arange(g.shape[1])
            xn = np.zeros_like(g)
            gk = g[k, cols]
            mag = np.abs(gk)
            xn[k, cols] = np.where(mag > 0, gk / np.where(mag > 0, mag, 1.0), 1.0) / self.wd[k]
        else:
            xn = dual_entries(g, self.q)
        dead = ~np.any(xn != 0, axis=0)
        xn[:, dead] = x[:, dead]
        return self.normalize(xn)


def opnorm(
    a,
    p: float,
    cfg: SearchConfig | None = None,
    *,
    certify: bool = False,
    record_history: bool = False,
) -> NormEstimate:
    """Estimate ||a||_{p->p} from below.

    Every start is pushed through the ascent iteration; the value along each
    start never decreases (a step that would lower it is rejected). After
    ``cfg.screen_iterations`` only the ``cfg.keep_after_screen`` best starts
    keep iterating. With ``certify=True`` and domain dimension at most
    ``cfg.certify_max_dim`` the oracle supplies a certified upper bound.
    """
    a = as_operator(a)
    p = check_exponent(p)
    cfg = cfg or SearchConfig()
    m, d = a.shape
    if m == 0 or d == 0:
        raise EmptyOperatorError("operator has an empty side")
    if certify and d > cfg.certify_max_dim:
        raise ScopeError(f"certified norms are only available up to dimension {cfg.certify_max_dim}")

    rng = np.random.default_rng(cfg.rng_seed)
    it = _Iteration(a, p)
    x = it.normalize(_start_menu(d, cfg, rng))
    n_starts = x.shape[1]
    vals = it.value(x)
    history = [vals.copy()] if record_history else []
    active = np.arange(n_starts)
    iterations = 0
    for k in range(cfg.max_iterations):
        if k == cfg.screen_iterations and len(active) > cfg.keep_after_screen:
            order = np.argsort(-vals[active], kind="stable")
            active = active[order[: cfg.keep_after_screen]]
        if len(active) == 0:
            break
        xn = it.step(x[:, active])
        vn = it.value(xn)
        old = vals[active]
        better = vn > old
        x[:, active[better]] = xn[:, better]
        vals[active[better]] = vn[better]
        iterations += 1
        if record_history:
            history.append(vals.copy())
        gain = np.where(better, vn - old, 0.0)
        still = gain > cfg.convergence_tol * np.maximum(vals[active], 1e-300)
        if k >= cfg.screen_iterations or len(active) <= cfg.keep_after_screen:
            active = active[still]

    best = int(np.argmax(vals))
    wit = x[:, best]
    lower = float(it.value(wit[:, None])[0] / lp_norm(wit, it.wd, p))
    upper = interpolation_upper_bound(a, p)
    est = NormEstimate(
        lower_bound=lower,
        witness=Vec(a.domain, wit),
        certified=bool(upper - lower <= cfg.certification_gap * max(1.0, lower)),
        upper_bound=max(upper, lower),
        iterations=iterations,
        starts=n_starts,
        history=history,
    )
    if certify:
        orc = opnorm_oracle(a, p, cfg.grid_resolution)
        if orc.lower_bound > est.lower_bound:
            est.lower_bound, est.witness = orc.lower_bound, orc.witness
        est.upper_bound = max(min(est.upper_bound, orc.upper_bound), est.lower_bound)
        est.certified = True
    return est


# -- brute-force reference ----------------------------------------------------


def _ratio(a, wd, wc, p, z):
    num = lp_norm(a @ z, wc, p)
    den = lp_norm(z, wd, p)
    return num / den


def _polish(a, wd, wc, p, z0, maxiter=200):
    """Quasi-Newton ascent of log ||Az|| - log ||z|| in real coordinates."""
    d = len(z0)

    def unpack(v):
        return v[:d] + 1j * v[d:]

    def fun(v):
        z = unpack(v)
        y = a @ z
        gy = float(np.sum(wc * np.abs(y) ** p))
        gz = float(np.sum(wd * np.abs(z) ** p))
        if gy <= 0 or gz <= 0:
            return 0.0, np.zeros_like(v)
        f = -(np.log(gy) - np.log(gz)) / p
        grad_c = a.conj().T @ (wc * _dual(y, p)) / gy - wd * _dual(z, p) / gz
        return f, -np.concatenate([grad_c.real, grad_c.imag])

    v0 = np.concatenate([z0.real, z0.imag])
    res = minimize(fun, v0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter, "ftol": 1e-15, "gtol": 1e-12})
    return unpack(res.x)


def _dual(x, p):
    ax = np.abs(x)
    out = np.zeros_like(x, dtype=complex)
    nz = ax > 0
    out[nz] = x[nz] * ax[nz] ** (p - 2)
    return out


def _grid_centers(ndim: int, res: int) -> np.ndarray:
    ticks = -1.0 + (2 * np.arange(res) + 1) / res
    if ndim == 0:
        return np.zeros((0, 1))
    mesh = np.meshgrid(*([ticks] * ndim), indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh])


def _chart_vectors(d, k, params):
    """Embed real parameters into C^d with coordinate k pinned to 1."""
    free = [j for j in range(d) if j != k]
    z = np.zeros((d, params.shape[1]), dtype=complex)
    z[k] = 1.0
    for i, j in enumerate(free):
        z[j] = params[2 * i] + 1j * params[2 * i + 1]
    return z


DEFAULT_ORACLE_RESOLUTION = {1: 1, 2: 128, 3: 12}


def opnorm_oracle(
    a,
    p: float,
    grid_resolution: int | None = None,
    *,
    target_gap: float = 1e-4,
    max_cells: int = 400_000,
    polish_top: int = 6,
) -> NormEstimate:
    """Certified bracket for ||a||_{p->p}, domain dimension <= 3.

    Every unit vector is, up to a global phase and scale, some ``z`` with
    ``z_k = 1`` and ``|z_j| <= 1`` where ``k`` indexes its largest entry. The
    oracle tiles each such chart with cubes, evaluates ``||Az|| / ||z||`` at
    cube centres, and bounds it over a cube of half-width ``h`` by

        (||A c|| + sqrt(2) h sum_j ||A e_j||) / max(w_k^(1/p), ||c|| - sqrt(2) h ||1_free||),

    refining cubes whose bound exceeds the best value by more than
    ``target_gap`` (relative) until ``max_cells`` evaluations are spent. The
    best samples are then polished by L-BFGS. The reported upper bound is the
    smaller of the cell bound and the Riesz-Thorin bound.
    """
    op = as_operator(a)
    p = check_exponent(p)
    A = op.matrix
    m, d = A.shape
    if m == 0 or d == 0:
        raise EmptyOperatorError("operator has an empty side")
    if d > 3:
        raise OracleScopeError(f"oracle handles domains of dimension <= 3, got {d}")
    wd, wc = op.domain.weights, op.codomain.weights
    res = grid_resolution or DEFAULT_ORACLE_RESOLUTION[d]
    col_norms = lp_norm(A, wc, p)  # ||A e_j|| for unit coordinate vectors e_j

    # coordinate vectors are always sampled; they carry the p = 1 extremizers
    samples = [(_ratio(A, wd, wc, p, np.eye(d, dtype=complex)), np.eye(d, dtype=complex))]
    charts = []
    for k in range(d):
        free = [j for j in range(d) if j != k]
        lip = np.sqrt(2) * float(col_norms[free].sum())
        rad = np.sqrt(2) * float(wd[free].sum()) ** (1 / p) if free else 0.0
        floor = wd[k] ** (1 / p)
        charts.append((k, lip, rad, floor))

    P = 2 * (d - 1)
    best_val, best_vec = 0.0, None
    evaluated = 0

    def evaluate(ks, centres, hs):
        # values and cell bounds for cells of mixed charts
        nonlocal best_val, best_vec, evaluated
        bounds = np.empty(len(ks))
        for k in np.unique(ks):
            sel = np.flatnonzero(ks == k)
            _, lip, rad, floor = charts[k]
            z = _chart_vectors(d, int(k), centres[:, sel])
            num = lp_norm(A @ z, wc, p)
            nz = lp_norm(z, wd, p)
            vals = num / nz
            i = int(np.argmax(vals))
            if vals[i] > best_val:
                best_val, best_vec = float(vals[i]), z[:, i]
            samples.append((vals, z))
            bounds[sel] = (num + lip * hs[sel]) / np.maximum(floor, nz - rad * hs[sel])
        evaluated += len(ks)
        return bounds

    grid = _grid_centers(P, res)
    pool_k = np.repeat(np.arange(d), grid.shape[1])
    pool_c = np.tile(grid, (1, d))
    pool_h = np.full(len(pool_k), 1.0 / res)
    pool_b = evaluate(pool_k, pool_c, pool_h)
    settled = 0.0  # largest bound among cells retired as cold
    offsets = _grid_centers(P, 2)
    batch = 2048
    while P > 0:
        cold = pool_b <= best_val * (1 + target_gap)
        if np.any(cold):
            settled = max(settled, float(pool_b[cold].max()))
            keep = ~cold
            pool_k, pool_c, pool_h, pool_b = pool_k[keep], pool_c[:, keep], pool_h[keep], pool_b[keep]
        if len(pool_b) == 0:
            break
        room = (max_cells - evaluated) // offsets.shape[1]
        take = min(batch, len(pool_b), room)
        if take <= 0:
            break
        # best-first: split the cells with the largest bounds
        sel = np.argpartition(-pool_b, take - 1)[:take] if take < len(pool_b) else np.arange(len(pool_b))
        rest = np.ones(len(pool_b), dtype=bool)
        rest[sel] = False
        h = pool_h[sel]
        kids_c = (pool_c[:, sel][:, :, None] + offsets[:, None, :] * h[None, :, None]).reshape(P, -1)
        kids_k = np.repeat(pool_k[sel], offsets.shape[1])
        kids_h = np.repeat(h / 2, offsets.shape[1])
        kids_b = evaluate(kids_k, kids_c, kids_h)
        pool_k = np.concatenate([pool_k[rest], kids_k])
        pool_c = np.concatenate([pool_c[:, rest], kids_c], axis=1)
        pool_h = np.concatenate([pool_h[rest], kids_h])
        pool_b = np.concatenate([pool_b[rest], kids_b])
    upper_cells = max(settled, float(pool_b.max(initial=0.0)))

    # polish the strongest distinct samples
    all_vals = np.concatenate([s[0] for s in samples])
    all_vecs = np.concatenate([s[1] for s in samples], axis=1)
    top = min(len(all_vals), polish_top * 20)
    order = np.argpartition(-all_vals, top - 1)[:top]
    order = order[np.argsort(-all_vals[order], kind="stable")]
    seeds = []
    for i in order:
        z = all_vecs[:, i]
        if all(np.linalg.norm(z - s) > 1e-3 for s in seeds):
            seeds.append(z)
        if len(seeds) >= polish_top:
            break
    for z0 in seeds:
        z = _polish(A, wd, wc, p, z0)
        v = float(_ratio(A, wd, wc, p, z[:, None])[0])
        if np.isfinite(v) and v > best_val:
            best_val, best_vec = v, z
    best_vec = best_vec / lp_norm(best_vec, wd, p)
    lower = float(lp_norm(A @ best_vec, wc, p))
    if d == 1:
        upper_cells = lower
    upper = max(min(upper_cells, interpolation_upper_bound(op, p)), lower)
    return NormEstimate(
        lower_bound=lower,
        witness=Vec(op.domain, best_vec),
        certified=True,
        upper_bound=upper,
        iterations=0,
        starts=evaluated + d,
    )


# -- derived checks ------------------------------------------------------------


def reciprocal_condition(a: Operator) -> float:
    if not a.is_square and a.shape[0] != a.shape[1]:
        return 0.0
    s = np.linalg.svd(a.matrix, compute_uv=False)
    if s[0] == 0:
        return 0.0
    return float(s[-1] / s[0])


def is_invertible_isometry(a, p: float, tol: float = 1e-9, cfg: SearchConfig | None = None) -> bool:
    a = as_operator(a)
    p = check_exponent(p)
    if a.shape[0] != a.shape[1]:
        return False
    if reciprocal_condition(a) < RCOND_MIN:
        return False
    if opnorm(a, p, cfg).lower_bound > 1 + tol:
        return False
    return opnorm(a.inverse(), p, cfg).lower_bound <= 1 + tol


def conjugated_norm(x, s, p: float, cfg: SearchConfig | None = None) -> NormEstimate:
    """Norm of ``x`` in the conjugated structure ``||x||_s = ||s x s^-1||``."""
    x = as_operator(x)
    s = as_operator(s)
    if s.shape != x.shape or s.shape[0] != s.shape[1]:
        raise InvalidConjugator("conjugator must be square and match x")
    if reciprocal_condition(s) < RCOND_MIN:
        raise InvalidConjugator("conjugator is singular")
    return opnorm(s @ x @ s.inverse(), p, cfg)
