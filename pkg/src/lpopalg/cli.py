"""Command-line front end: ``lpopalg <command> ...``.

Every run prints one JSON report on stdout (``--table`` for a plain table).
Exit codes: 0 ok, 1 suite ran with failing criteria, 2 invalid input,
3 request outside the supported scope, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import cuntz, dynamics, groupalg, jsonio, lamperti, suites
from .errors import LpError, ScopeError, ValidationError
from .opnorm import SearchConfig, opnorm

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_SCOPE, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _load(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _group(spec: str) -> groupalg.FiniteGroup:
    if Path(spec).is_file():
        obj = _load(spec)
        try:
            return groupalg.FiniteGroup(obj["elements"], obj["table"], name=obj.get("name"))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad group JSON: {exc}") from exc
    return groupalg.FiniteGroup.from_name(spec)


def _group_function(G: groupalg.FiniteGroup, obj) -> groupalg.GroupFunction:
    if isinstance(obj, dict) and "a" in obj and "b" in obj:
        if G.order != 2:
            raise ValidationError("(a, b) input is only meaningful over Z2")
        return groupalg.z2_function(jsonio.decode_complex(obj["a"]), jsonio.decode_complex(obj["b"]))
    values = obj["values"] if isinstance(obj, dict) else obj
    return groupalg.GroupFunction(G, jsonio.decode_complex_array(values, ndim=1))


def _kw(args, **extra):
    out = dict(extra)
    if args.tol is not None:
        out["tol"] = args.tol
    return out


# -- command handlers: each returns (outputs, exit code) ---------------------------


def cmd_opnorm(args, cfg):
    a = jsonio.decode_operator(_load(args.matrix))
    est = opnorm(a, args.p, cfg, certify=args.certify)
    return est.to_dict(), EXIT_OK


def cmd_lamperti(args, cfg):
    a = jsonio.decode_operator(_load(args.matrix))
    if args.action == "decompose":
        return lamperti.lamperti_decompose(a, args.p, cfg=cfg, **_kw(args)).to_dict(), EXIT_OK
    verdict = lamperti.classify_spatial(a, args.p, **_kw(args))
    out = verdict.to_dict()
    if verdict:
        out = {"spatial": True, **out}
    return out, EXIT_OK


def cmd_group(args, cfg):
    if args.action == "norm":
        G = _group(args.group)
        f = _group_function(G, _load(args.f))
        return {"group": G.name, "p": args.p, "norm": groupalg.fp_lambda_norm(f, args.p, cfg).to_dict()}, EXIT_OK
    if args.action == "verify-isom":
        G = _group(args.group)
        return groupalg.isom_group_verify(G, args.p, args.trials, cfg).to_dict(), EXIT_OK
    spec = _load(args.spec)
    try:
        src = _group(spec["source"]) if isinstance(spec["source"], str) else groupalg.FiniteGroup(**spec["source"])
        tgt = _group(spec["target"]) if isinstance(spec["target"], str) else groupalg.FiniteGroup(**spec["target"])
        if "images" in spec:
            images = tuple(jsonio.decode_operator(m) for m in spec["images"])
            h = groupalg.HomCandidate(src, tgt, images)
        else:
            h = groupalg.HomCandidate.from_data(src, tgt, spec["theta"], [jsonio.decode_complex(z) for z in spec["gamma"]])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad homomorphism JSON: {exc}") from exc
    return groupalg.hom_decompose(h, args.p, cfg=cfg, **_kw(args)).to_dict(), EXIT_OK


def cmd_cuntz(args, cfg):
    if args.action == "rep":
        rep = cuntz.truncated_cuntz_rep(args.n, args.window, args.p)
        out = {"representation": rep.to_dict(), "interior": [int(i) - rep.N for i in rep.interior()]}
        if args.check:
            out["relations"] = cuntz.cuntz_relation_check(rep, norms=True, cfg=cfg).to_dict()
            if args.p != 2:
                out["spatial"] = cuntz.spatial_generator_check(rep)
        return out, EXIT_OK
    Q = cuntz.DirectedGraph.from_json(_load(args.graph))
    obj = _load(args.assignment)
    try:
        # JSON object keys are strings; match them against vertex and edge labels
        vkey = {str(v): v for v in Q.vertices}
        e = {vkey[k]: jsonio.decode_operator(m) for k, m in obj["e"].items()}
        s = {k: jsonio.decode_operator(m) for k, m in obj["s"].items()}
        t = {k: jsonio.decode_operator(m) for k, m in obj["t"].items()}
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"bad assignment JSON: {exc}") from exc
    a = cuntz.GraphAssignment(e, s, t)
    rep = cuntz.graph_relation_check(Q, a, **_kw(args))
    return {**rep.to_dict(), "span_dimension": cuntz.algebra_span_dimension(a.all_operators())}, EXIT_OK


def cmd_dyn(args, cfg):
    if args.action == "act":
        obj = _load(args.point)
        letters = obj["letters"] if isinstance(obj, dict) else obj
        x = dynamics.AlternatingWord(tuple(letters))
        return {"word": args.word, "input": x.to_dict(), "output": dynamics.cantor_act(args.word, x).to_dict()}, EXIT_OK
    if args.action == "order-check":
        return dynamics.order_check(args.depth).to_dict(), EXIT_OK
    if args.action == "census":
        return {"word": args.word, "depth": args.depth, "fraction": dynamics.fixed_point_census(args.word, args.depth)}, EXIT_OK
    if args.action == "crossed-norm":
        A = dynamics.FiniteAction.from_json(_load(args.action_file))
        obj = _load(args.f)
        f = dynamics.CrossedElement(A, jsonio.decode_complex_array(obj["values"] if isinstance(obj, dict) else obj, ndim=2))
        return {"p": args.p, "norm": dynamics.reduced_norm(f, args.p, cfg).to_dict()}, EXIT_OK
    obj = _load(args.data)
    try:
        data = dynamics.CoeData.from_json(obj)
        sigma, rho = obj["sigma"], obj["rho"]
    except KeyError as exc:
        raise ValidationError(f"orbit-equivalence JSON lacks {exc}") from exc
    return dynamics.coe_verify(data, sigma, rho).to_dict(), EXIT_OK


def cmd_suite(args, cfg):
    if args.name not in suites.SUITES:
        raise UsageError(f"unknown suite {args.name!r}; known: {', '.join(sorted(suites.SUITES))}")
    results = suites.run_suite(args.name, seed=args.seed, depth=args.depth, window=args.window)
    for r in results:
        print(r.line(), file=sys.stderr)
    passed = all(r.passed for r in results)
    out = {"suite": args.name, "passed": passed, "results": [r.to_dict() for r in results]}
    return out, EXIT_OK if passed else EXIT_FAIL


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default 0)")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="numerical tolerance override")
    common.add_argument("--table", action="store_true", default=argparse.SUPPRESS, help="print a plain table")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print JSON (default)")

    parser = _Parser(prog="lpopalg", description="Operator algebras on finite-dimensional L^p spaces.", parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def leaf(subs, name, **kw):
        return subs.add_parser(name, parents=[common], **kw)

    p = leaf(sub, "opnorm", help="estimate ||A||_p")
    p.add_argument("--matrix", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--certify", action="store_true", help="attach a certified bracket (dimension <= 3)")

    lam = sub.add_parser("lamperti", help="spatial isometries").add_subparsers(dest="action", parser_class=_Parser)
    for name in ("decompose", "classify"):
        p = leaf(lam, name)
        p.add_argument("--matrix", required=True)
        p.add_argument("--p", type=float, required=True)

    grp = sub.add_parser("group", help="finite group algebras").add_subparsers(dest="action", parser_class=_Parser)
    p = leaf(grp, "norm")
    p.add_argument("--group", required=True, help="name (Z4, Z2xZ2, S3) or group JSON file")
    p.add_argument("--f", required=True)
    p.add_argument("--p", type=float, required=True)
    p = leaf(grp, "verify-isom")
    p.add_argument("--group", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p = leaf(grp, "hom")
    p.add_argument("--spec", required=True)
    p.add_argument("--p", type=float, required=True)

    cz = sub.add_parser("cuntz", help="Leavitt and graph algebras").add_subparsers(dest="action", parser_class=_Parser)
    p = leaf(cz, "rep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--check", action="store_true")
    p = leaf(cz, "graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--assignment", required=True)

    dy = sub.add_parser("dyn", help="finite dynamics and crossed products").add_subparsers(dest="action", parser_class=_Parser)
    p = leaf(dy, "act")
    p.add_argument("--word", required=True)
    p.add_argument("--point", required=True)
    p = leaf(dy, "order-check")
    p.add_argument("--depth", type=int, required=True)
    p = leaf(dy, "census")
    p.add_argument("--word", required=True)
    p.add_argument("--depth", type=int, required=True)
    p = leaf(dy, "crossed-norm")
    p.add_argument("--action", dest="action_file", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--p", type=float, required=True)
    p = leaf(dy, "coe")
    p.add_argument("--data", required=True)

    p = leaf(sub, "suite", help="run an acceptance suite")
    p.add_argument("name")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    return parser


HANDLERS = {"opnorm": cmd_opnorm, "lamperti": cmd_lamperti, "group": cmd_group, "cuntz": cmd_cuntz, "dyn": cmd_dyn, "suite": cmd_suite}


def _table(obj, prefix="") -> list[tuple[str, str]]:
    rows = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            rows += _table(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            rows += _table(v, f"{prefix}[{i}]")
    else:
        rows.append((prefix, json.dumps(obj)))
    return rows


def _inputs_digest(args) -> str:
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in ("table", "json")}
    for key in ("matrix", "f", "spec", "graph", "assignment", "point", "action_file", "data"):
        path = payload.get(key)
        if isinstance(path, str) and Path(path).is_file():
            payload[key] = Path(path).read_text()
    return jsonio.digest(payload)


def dispatch(argv=None) -> int:
    parser = build_parser()
    t0 = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        if not args.command or (args.command != "opnorm" and args.command != "suite" and not getattr(args, "action", None)):
            raise UsageError(parser.format_usage() + "lpopalg: error: missing command")
        for name, default in (("seed", 0), ("tol", None), ("table", False), ("json", False)):
            if not hasattr(args, name):
                setattr(args, name, default)
        cfg = SearchConfig(rng_seed=args.seed)
        outputs, code = HANDLERS[args.command](args, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except LpError as exc:
        code = EXIT_SCOPE if isinstance(exc, ScopeError) else EXIT_INVALID
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        print(jsonio.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return code
    report = {"command": " ".join(_command_path(args)), "inputs_digest": _inputs_digest(args), "outputs": outputs, "seed": args.seed}
    if args.table:
        rows = _table(jsonio.to_jsonable(report))
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            print(f"{k.ljust(width)}  {v}")
    else:
        print(jsonio.dumps(report))
    # wall time stays off stdout so identical runs print identical bytes
    print(f"wall_time: {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return code


def _command_path(args) -> list[str]:
    parts = [args.command]
    if args.command not in ("opnorm", "suite"):
        parts.append(args.action)
    elif args.command == "suite":
        parts.append(args.name)
    return parts


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
