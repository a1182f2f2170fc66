"""Acceptance suites: each criterion is a deterministic function of the seed.

Every criterion returns a ``CriterionResult`` whose ``details`` hold only
seed-determined values (no timings), so reports are byte-reproducible.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cuntz, dynamics, groupalg, lamperti
from .groupalg import FiniteGroup, GroupFunction
from .lpcore import Operator, Vec, WeightedSpace, clarkson_check
from .opnorm import SearchConfig, column_norm_1, opnorm, opnorm_oracle, spectral_norm

P_SET = (1.0, 1.5, 2.0, 3.0, 4.0)
P_NOT_TWO = (1.0, 1.5, 3.0, 4.0)

# ||(1/2)[[1-i, 1+i], [1+i, 1-i]]||_4, bracketed by the dimension-2 oracle with zero gap
Z2_ONE_MINUS_I_P4 = 1.189207115002721


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.id:2d}: {self.name}"

    def to_dict(self):
        return {"id": self.id, "name": self.name, "passed": self.passed, "details": self.details}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("LPOPALG_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Order-preserving map, sharded over LPOPALG_THREADS worker threads."""
    items = list(items)
    n = threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, salt])


def _cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_ensemble(seed: int, count: int = 200) -> list[Operator]:
    """Half 2x2, half 3x3 complex matrices on randomly weighted atoms."""
    rng = _rng(seed, 1)
    out = []
    for k in range(count):
        d = 2 if k < count // 2 else 3
        w = rng.uniform(0.5, 2.0, d)
        sp = WeightedSpace(w)
        out.append(Operator(_cplx(rng, d, d), sp, sp))
    return out


# -- 1, 2: operator norms -------------------------------------------------------


def oracle_agreement(seed: int = 0, count: int = 200, rtol: float = 1e-3, budget: float = 60.0) -> CriterionResult:
    ops = random_ensemble(seed, count)
    cfg = SearchConfig(rng_seed=seed)
    jobs = [(a, p) for a in ops for p in P_SET]

    def run(job):
        a, p = job
        est = opnorm(a, p, cfg)
        orc = opnorm_oracle(a, p, max_cells=0)
        return est.lower_bound, orc.lower_bound, orc.upper_bound

    t0 = time.perf_counter()
    rows = pmap(run, jobs)
    elapsed = time.perf_counter() - t0
    rel = [abs(e - o) / max(o, 1e-300) for e, o, _ in rows]
    above = [e - u for e, _, u in rows]
    worst = int(np.argmax(rel))
    res = CriterionResult(
        1,
        "estimator matches brute-force oracle (2x2, 3x3, five exponents)",
        bool(max(rel) <= rtol and max(above) <= 1e-9),
        {
            "comparisons": len(rows),
            "max_relative_difference": max(rel),
            "worst_case": {"index": worst // len(P_SET), "p": jobs[worst][1]},
            "max_excess_over_oracle_upper": max(above),
            "estimator_below_oracle_count": int(sum(e < o - 1e-12 * o for e, o, _ in rows)),
        },
    )
    # runtime is kept off the report so it stays byte-stable
    res._elapsed = elapsed
    res.passed = res.passed and elapsed < budget
    return res


def analytic_norms(seed: int = 0, count: int = 200, atol: float = 1e-8) -> CriterionResult:
    ops = random_ensemble(seed, count)
    cfg = SearchConfig(rng_seed=seed)
    d1 = [abs(opnorm(a, 1, cfg).lower_bound - column_norm_1(a)) for a in ops]
    d2 = [abs(opnorm(a, 2, cfg).lower_bound - spectral_norm(a)) for a in ops]
    return CriterionResult(
        2,
        "p=1 weighted column sum and p=2 top singular value",
        bool(max(d1) <= atol and max(d2) <= atol),
        {"matrices": len(ops), "max_error_p1": max(d1), "max_error_p2": max(d2)},
    )


# -- 3: Clarkson ---------------------------------------------------------------


def clarkson_suite(seed: int = 0, pairs: int = 500, tol: float = 1e-9) -> CriterionResult:
    rng = _rng(seed, 3)
    per_p = {}
    ok = True
    for p in P_NOT_TWO:
        direction_fail = equality_mismatch = disjoint = 0
        for k in range(pairs):
            n = int(rng.integers(1, 9))
            sp = WeightedSpace(rng.uniform(0.5, 2.0, n))
            sx = rng.random(n) < 0.6
            if k % 2 == 0:
                sy = ~sx & (rng.random(n) < 0.7)
            else:
                sy = rng.random(n) < 0.6
                j = int(rng.integers(n))
                sx[j] = sy[j] = True  # force an overlap
            x = np.where(sx, _cplx(rng, n), 0)
            y = np.where(sy, _cplx(rng, n), 0)
            rec = clarkson_check(Vec(sp, x), Vec(sp, y), p, tol)
            is_disjoint = not np.any((x != 0) & (y != 0))
            disjoint += is_disjoint
            direction_fail += not rec.holds
            equality_mismatch += rec.equality_flag != is_disjoint
        per_p[str(p)] = {"pairs": pairs, "disjoint_pairs": disjoint, "direction_failures": direction_fail, "equality_mismatches": equality_mismatch}
        ok &= direction_fail == 0 and equality_mismatch == 0
    return CriterionResult(3, "Clarkson inequalities and equality iff disjoint supports", bool(ok), per_p)


# -- 4, 5: isometries -----------------------------------------------------------


def _random_isometry(rng, n):
    sp = WeightedSpace(rng.uniform(0.2, 5.0, n))
    return lamperti.SpatialIsometry(sp, rng.permutation(n), np.exp(2j * np.pi * rng.random(n)))


def lamperti_roundtrip(seed: int = 0, count: int = 1000) -> CriterionResult:
    rng = _rng(seed, 4)
    cfg = SearchConfig(rng_seed=seed)
    perm_fail = 0
    worst_phase = 0.0
    for k in range(count):
        p = P_NOT_TWO[k % len(P_NOT_TWO)]
        si = _random_isometry(rng, int(rng.integers(1, 9)))
        dec = lamperti.lamperti_decompose(lamperti.build_spatial_isometry(si, p), p, cfg=cfg)
        perm_fail += not np.array_equal(dec.perm, si.perm)
        worst_phase = max(worst_phase, float(np.max(np.abs(dec.phases - si.phases))))
    return CriterionResult(
        4,
        "decompose(build(isometry)) recovers permutation and phases",
        bool(perm_fail == 0 and worst_phase <= 1e-12),
        {"isometries": count, "permutation_mismatches": perm_fail, "max_phase_error": worst_phase},
    )


def distance_formula(seed: int = 0, count: int = 200, tol: float = 1e-6) -> CriterionResult:
    """Distance between two isometries m_f u_phi and m_g u_psi.

    The stated closed form is max(||f - g||_inf, 2 - 2 delta_{phi,psi}). Cases
    are split by whether phi = psi and by exponent. For two-atom
    disagreements the oracle's certified bracket is attached, which settles
    whether the estimate or the closed form is at fault.
    """
    rng = _rng(seed, 5)
    cfg = SearchConfig(rng_seed=seed)
    buckets: dict = {}
    worst_other = []
    for k in range(count):
        p = P_NOT_TWO[k % len(P_NOT_TWO)]
        same = (k // len(P_NOT_TWO)) % 2 == 0
        n = int(rng.integers(2, 5))
        sp = WeightedSpace(rng.uniform(0.5, 2.0, n))
        phi = rng.permutation(n)
        psi = phi.copy() if same else phi
        while not same and np.array_equal(psi, phi):
            psi = rng.permutation(n)
        f = np.exp(2j * np.pi * rng.random(n))
        g = np.exp(2j * np.pi * rng.random(n))
        rep = lamperti.isometry_distance(f, phi, g, psi, p, space=sp, cfg=cfg, tol=tol)
        key = f"{'same' if same else 'different'}_permutation/p={p}"
        b = buckets.setdefault(key, {"cases": 0, "agree": 0, "min_numeric": np.inf, "max_numeric": -np.inf})
        b["cases"] += 1
        b["agree"] += rep.agree
        b["min_numeric"] = min(b["min_numeric"], rep.numeric)
        b["max_numeric"] = max(b["max_numeric"], rep.numeric)
        if not rep.agree and n == 2 and len(worst_other) < 8:
            a = lamperti.build_spatial_isometry(lamperti.SpatialIsometry(sp, phi, f), p)
            c = lamperti.build_spatial_isometry(lamperti.SpatialIsometry(sp, psi, g), p)
            orc = opnorm_oracle(a - c, p)
            worst_other.append(
                {
                    "p": p,
                    "analytic": rep.analytic,
                    "estimate": rep.numeric,
                    "oracle_lower": orc.lower_bound,
                    "oracle_upper": orc.upper_bound,
                    "certified_below_closed_form": bool(orc.upper_bound < rep.analytic - tol),
                }
            )
    total_agree = sum(b["agree"] for b in buckets.values())
    return CriterionResult(
        5,
        "isometry distance equals max(||f-g||_inf, 2 - 2 delta)",
        bool(total_agree == count),
        {"cases": count, "agreeing": total_agree, "by_case": dict(sorted(buckets.items())), "certified_counterexamples": worst_other},
    )


# -- 6 - 10: group algebras ---------------------------------------------------------


def z2_table(seed: int = 0) -> CriterionResult:
    cfg = SearchConfig(rng_seed=seed)
    rows, ok = [], True
    for (a, b), expect in (((1, 1), {p: 1.0 for p in P_SET}), ((1, -1), {p: 1.0 for p in P_SET}), ((1, 0), {p: 1.0 for p in P_SET}), ((1, -1j), {1.0: np.sqrt(2), 2.0: 1.0})):
        for p in P_SET:
            v = groupalg.z2_norm(a, b, p, cfg).lower_bound
            row = {"a": str(complex(a)), "b": str(complex(b)), "p": p, "value": v}
            if p in expect:
                row["expected"] = float(expect[p])
                row["ok"] = bool(abs(v - expect[p]) <= 1e-8)
                ok &= row["ok"]
            rows.append(row)
    v4 = groupalg.z2_norm(1, -1j, 4.0, cfg).lower_bound
    inside = bool(1 < v4 < np.sqrt(2) and abs(v4 - Z2_ONE_MINUS_I_P4) <= 1e-6)
    return CriterionResult(6, "Z2 group-algebra norm table", bool(ok and inside), {"rows": rows, "p4_value": v4, "p4_frozen": Z2_ONE_MINUS_I_P4, "p4_ok": inside})


def isometry_groups(seed: int = 0, trials: int = 100) -> CriterionResult:
    cfg = SearchConfig(rng_seed=seed)
    out, ok = {}, True
    for name in ("Z2", "Z3", "Z4", "Z2xZ2", "S3"):
        G = FiniteGroup.from_name(name)
        for p in (1.5, 3.0):
            rep = groupalg.isom_group_verify(G, p, trials, cfg, seed=seed)
            out[f"{name}/p={p}"] = {"members": rep.members_checked, "nonmembers": rep.nonmembers_checked, "violations": len(rep.violations)}
            ok &= rep.ok
    return CriterionResult(7, "invertible isometries of the span are phase times translation", bool(ok), out)


def duality(seed: int = 0, count: int = 50) -> CriterionResult:
    rng = _rng(seed, 8)
    cfg = SearchConfig(rng_seed=seed)
    G = FiniteGroup.from_name("S3")
    worst, exact, holds = 0.0, True, True
    for _ in range(count):
        f = GroupFunction(G, _cplx(rng, G.order))
        for p in (1.5, 3.0, 4.0):
            r = groupalg.duality_check(f, p, cfg)
            worst = max(worst, abs(r.left - r.right))
            exact &= r.exact_identity
            holds &= r.holds
    return CriterionResult(8, "norm at p equals sharp-norm at p', transpose identity exact", bool(holds and exact), {"functions": count, "max_difference": worst, "transpose_exact": exact})


def subgroup_quotient(seed: int = 0, count: int = 50) -> CriterionResult:
    rng = _rng(seed, 9)
    cfg = SearchConfig(rng_seed=seed)
    Z4, Z6 = FiniteGroup.cyclic(4), FiniteGroup.cyclic(6)
    sub_worst, sub_ok = 0.0, True
    samples = [groupalg.z2_function(1, -1j).values] + [_cplx(rng, 2) for _ in range(10)]
    for v in samples:
        for p in (1.5, 3.0, 4.0):
            r = groupalg.subgroup_isometry_check(Z4, [0, 2], v, p, cfg)
            sub_worst = max(sub_worst, abs(r.left - r.right))
            sub_ok &= r.holds
    q_ok, q_margin = True, np.inf
    for _ in range(count):
        f = GroupFunction(Z6, _cplx(rng, 6))
        for p in (1.5, 3.0):
            r = groupalg.quotient_contraction_check(Z6, [0, 2, 4], f, p, cfg)
            q_ok &= r.holds
            q_margin = min(q_margin, r.right - r.left)
    return CriterionResult(
        9,
        "subgroup inclusion isometric, quotient map contractive",
        bool(sub_ok and q_ok),
        {"subgroup_max_difference": sub_worst, "quotient_functions": count, "quotient_min_margin": float(q_margin)},
    )


def hom_structure(seed: int = 0) -> CriterionResult:
    cfg = SearchConfig(rng_seed=seed)
    Z4, Z2 = FiniteGroup.cyclic(4), FiniteGroup.cyclic(2)
    gamma = [1, 1j, -1, -1j]
    tw = groupalg.hom_decompose(groupalg.HomCandidate.from_data(Z4, Z4, [0, 1, 2, 3], gamma), 3.0, cfg=cfg)
    tw_ok = tw.theta == [0, 1, 2, 3] and np.allclose(tw.gamma, gamma, atol=0, rtol=0) and tw.injective
    q = groupalg.hom_decompose(groupalg.HomCandidate.from_data(Z4, Z2, [0, 1, 0, 1], [1] * 4), 3.0, cfg=cfg)
    q_ok = q.theta == [0, 1, 0, 1] and all(g == 1 for g in q.gamma) and not q.injective
    return CriterionResult(10, "homomorphism data recovered (twisted Z4, quotient Z4 -> Z2)", bool(tw_ok and q_ok), {"twisted": tw.to_dict(), "quotient": q.to_dict()})


# -- 11, 12: Cuntz and graph algebras ---------------------------------------------------


def cuntz_relations(seed: int = 0, window: int = 64) -> CriterionResult:
    cfg = SearchConfig(rng_seed=seed)
    out, ok = {}, True
    for p in (1.5, 3.0):
        rep = cuntz.truncated_cuntz_rep(2, window, p)
        chk = cuntz.cuntz_relation_check(rep, norms=True, cfg=cfg)
        spatial = cuntz.spatial_generator_check(rep)
        norm_err = max(abs(v - 1) for v in chk.norms.values())
        out[f"p={p}"] = {"interior": chk.interior_size, "violations": len(chk.violations), "max_norm_error": norm_err, "all_spatial": all(spatial.values())}
        ok &= chk.ok and norm_err <= 1e-10 and all(spatial.values())
    return CriterionResult(11, "Cuntz relations exact on window interior, generators of norm one", bool(ok), out)


def graph_algebras(seed: int = 0, max_n: int = 5) -> CriterionResult:
    out, ok = {}, True
    for n in range(1, max_n + 1):
        Q, a = cuntz.line_graph(n)
        rep = cuntz.graph_relation_check(Q, a)
        dim = cuntz.algebra_span_dimension(a.all_operators())
        out[f"n={n}"] = {"relations_ok": rep.ok, "skipped_vertices": rep.skipped, "span_dimension": dim}
        ok &= rep.ok and dim == n * n
    return CriterionResult(12, "line-graph assignment satisfies path relations and spans M_n", bool(ok), out)


# -- 13, 14: dynamics --------------------------------------------------------------------


def crossed_products(seed: int = 0, triples: int = 10) -> CriterionResult:
    rng = _rng(seed, 13)
    actions = [
        dynamics.FiniteAction(FiniteGroup.cyclic(2), range(2), lambda g, x: (x + g) % 2),
        dynamics.FiniteAction(FiniteGroup.cyclic(6), range(3), lambda g, x: (x + g) % 3),
        dynamics.FiniteAction.translation(FiniteGroup.from_name("S3")),
        dynamics.FiniteAction(FiniteGroup.cyclic(4), range(5), lambda g, x: x if x == 4 else (x + g) % 4),
        dynamics.FiniteAction.trivial(FiniteGroup.from_name("Z2xZ2"), 3),
    ]

    def gint(A):
        # Gaussian-integer values keep every product exact in floating point
        sh = (A.group.order, A.n_points)
        return dynamics.CrossedElement(A, rng.integers(-3, 4, sh) + 1j * rng.integers(-3, 4, sh))

    assoc_exact = cov_exact = unit_ok = True
    unit_err = 0.0
    for A in actions:
        for _ in range(triples):
            f, g, h = gint(A), gint(A), gint(A)
            assoc_exact &= np.array_equal(((f * g) * h).values, (f * (g * h)).values)
        pair = dynamics.regular_pair(A)
        for s in range(A.group.order):
            a = rng.integers(-5, 6, A.n_points).astype(complex)
            cov_exact &= pair.covariance_defect(s, a) == 0
        for p in P_SET:
            e = abs(dynamics.reduced_norm(dynamics.CrossedElement.unit(A), p).lower_bound - 1)
            unit_err = max(unit_err, e)
    ranks = {n: dynamics.crossed_span_dimension(dynamics.FiniteAction.translation(FiniteGroup.cyclic(n))) for n in (2, 3)}
    rank_ok = all(r == n * n for n, r in ranks.items())
    unit_ok = unit_err <= 1e-10
    return CriterionResult(
        13,
        "twisted convolution associative, covariance exact, G-on-G span |G|^2, unit norm 1",
        bool(assoc_exact and cov_exact and rank_ok and unit_ok),
        {"associativity_exact": bool(assoc_exact), "covariance_exact": bool(cov_exact), "span_ranks": {f"Z{n}": r for n, r in ranks.items()}, "max_unit_norm_error": unit_err},
    )


def cantor_order(seed: int = 0, depth: int = 10, census_from: int = 4) -> CriterionResult:
    orders, ok = {}, True
    for N in range(3, depth + 1):
        r = dynamics.order_check(N)
        orders[str(N)] = {"words": r.words, "a2": r.a_squared_ok, "b3": r.b_cubed_ok}
        ok &= r.ok
    census = {}
    for g in ("a", "b", "ab"):
        fr = [dynamics.fixed_point_census(g, N) for N in range(census_from, depth + 1)]
        census[g] = fr
        ok &= all(x >= y for x, y in zip(fr, fr[1:]))
    return CriterionResult(14, "a^2 = b^3 = id on alternating words, fixed-point fractions nonincreasing", bool(ok), {"orders": orders, "census": census})


CRITERIA = {
    1: oracle_agreement,
    2: analytic_norms,
    3: clarkson_suite,
    4: lamperti_roundtrip,
    5: distance_formula,
    6: z2_table,
    7: isometry_groups,
    8: duality,
    9: subgroup_quotient,
    10: hom_structure,
    11: cuntz_relations,
    12: graph_algebras,
    13: crossed_products,
    14: cantor_order,
}

SUITES = {
    "oracle": [1],
    "analytic": [2],
    "clarkson": [3],
    "lamperti-roundtrip": [4],
    "distance": [5],
    "z2-table": [6],
    "isometry-group": [7],
    "duality": [8],
    "subgroup-quotient": [9],
    "hom": [10],
    "cuntz": [11],
    "graph": [12],
    "crossed": [13],
    "cantor-order": [14],
    "all": list(CRITERIA),
}


def run_suite(name: str, seed: int = 0, **kwargs) -> list[CriterionResult]:
    """Run a named suite. Extra keyword arguments go to criteria that accept them."""
    import inspect

    if name not in SUITES:
        raise KeyError(name)
    out = []
    for cid in SUITES[name]:
        fn = CRITERIA[cid]
        params = inspect.signature(fn).parameters
        out.append(fn(seed=seed, **{k: v for k, v in kwargs.items() if k in params and v is not None}))
    return out
