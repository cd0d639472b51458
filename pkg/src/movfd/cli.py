"""Command line entry point ``movfd``.

Exit codes: 0 success or accept, 1 reject (``fd decide``), 2 usage or I/O
error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .geometry import Norm, NumericError
from .mesh import MonotonePath, QuadMesh, Reparameterization, dump_json, load_json

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("FD_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"FD_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise UsageError("FD_THREADS must be at least 1")
    return n


def _mesh(path) -> QuadMesh:
    if path is None:
        raise UsageError("missing mesh path")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return QuadMesh.from_json(load_json(p))


def _reparam(path):
    if path is None:
        return None
    data = load_json(path)
    return Reparameterization.from_json(data)


def _emit(obj):
    sys.stdout.write(dump_json(obj) + "\n")


def _write(path, text: str):
    Path(path).write_text(text)


def _parse_conn(value: str) -> str:
    if value == "exact":
        return value
    if value.startswith("sampled"):
        res = int(value.split(":")[1]) if ":" in value else 16
        if res < 2:
            raise argparse.ArgumentTypeError("sampling resolution must be at least 2")
        return f"sampled:{res}"
    raise argparse.ArgumentTypeError(f"bad connectivity mode {value!r}")


def _positive(value: str) -> float:
    v = float(value)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _common(p: argparse.ArgumentParser, eps=True):
    p.add_argument("--a", required=True, help="first mesh (JSON)")
    p.add_argument("--b", required=True, help="second mesh (JSON)")
    p.add_argument("--norm", default="l2", choices=["l1", "l2", "linf"], help="point norm (default l2)")
    if eps:
        p.add_argument("--eps", type=float, help="decide at this distance instead of optimizing")
    p.add_argument("--tol", type=_positive, default=1e-6, help="bisection tolerance (default 1e-6)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="movfd", description="Frechet distances between moving curves.")
    ap.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed (also accepted here)")
    sub = ap.add_subparsers(dest="group", required=True)

    fd = sub.add_parser("fd", parents=[seed], help="distances and decisions")
    fd = fd.add_subparsers(dest="cmd", required=True)
    ii = fd.add_parser("ii", parents=[seed], help="identity matching or a fixed PL reparameterization")
    _common(ii, eps=False)
    ii.add_argument("--pi", help="position reparameterization (JSON)")
    ii.add_argument("--tau", help="time reparameterization (JSON)")
    ic = fd.add_parser("ic", parents=[seed], help="constant positional matchings")
    _common(ic)
    ic.add_argument("--exact", action="store_true", help="binary search over enumerated critical values")
    ic.add_argument("--witness", help="write the witness path of an accepted decision here")
    idp = fd.add_parser("id", parents=[seed], help="dynamic positional matchings")
    _common(idp)
    idp.add_argument("--graph", default="reduced", choices=["reduced", "full"])
    idp.add_argument("--conn", default="exact", type=_parse_conn, help="exact or sampled:N")
    idp.add_argument("--dump-graph", help="write the obstacle graph of the decision at --eps")
    idp.add_argument("--stats", action="store_true", help="include query counters")
    dec = fd.add_parser("decide", parents=[seed], help="exit 0 on accept, 1 on reject")
    _common(dec, eps=False)
    dec.add_argument("--class", dest="cls", required=True, choices=["ii", "ic", "id"])
    dec.add_argument("--eps", type=float, required=True)
    dec.add_argument("--graph", default="reduced", choices=["reduced", "full"])
    dec.add_argument("--conn", default="exact", type=_parse_conn)

    fsd = sub.add_parser("fsd", parents=[seed], help="free-space exports")
    fsd = fsd.add_subparsers(dest="cmd", required=True)
    ex = fsd.add_parser("export", parents=[seed], help="render a free-space diagram as SVG")
    _common(ex, eps=False)
    ex.add_argument("--class", dest="cls", required=True, choices=["ic", "id"])
    ex.add_argument("--eps", type=float, required=True)
    ex.add_argument("--slice", help="time of the slice for --class id, as t=VALUE")
    ex.add_argument("--res", type=int, default=16, help="samples per cell side (default 16)")
    ex.add_argument("--out", required=True)

    gd = sub.add_parser("gadget", parents=[seed], help="3-SAT gadget instances")
    gd = gd.add_subparsers(dest="cmd", required=True)
    gen = gd.add_parser("gen", parents=[seed], help="generate an instance from a DIMACS file")
    gen.add_argument("--cnf", required=True)
    gen.add_argument("--class", dest="cls", default="cc", choices=["cc", "dd"])
    gen.add_argument("--out-a", required=True)
    gen.add_argument("--out-b", required=True)
    gen.add_argument("--features", required=True)
    ver = gd.add_parser("verify", parents=[seed], help="verify the witness matching of an assignment")
    ver.add_argument("--features", help="feature map written by 'gadget gen'")
    ver.add_argument("--cnf", help="DIMACS file (alternative to --features)")
    ver.add_argument("--class", dest="cls", choices=["cc", "dd"])
    ver.add_argument("--assignment", required=True, help="comma separated 0/1 values")

    orc = sub.add_parser("oracle", parents=[seed], help="oracle cross-checks")
    orc = orc.add_subparsers(dest="cmd", required=True)
    cmp_ = orc.add_parser("compare", parents=[seed], help="agreement statistics between exact code and oracles")
    cmp_.add_argument("--class", dest="cls", required=True, choices=["ii", "ic", "id"])
    cmp_.add_argument("--trials", type=int, default=100)
    cmp_.add_argument("--res", type=int, default=32)
    return ap


# handlers ------------------------------------------------------------------------

def _fd_ii(args):
    from .identity import frechet_identity, frechet_pl

    a, b, norm = _mesh(args.a), _mesh(args.b), Norm.parse(args.norm)
    if args.pi is None and args.tau is None:
        d, (p, t) = frechet_identity(a, b, norm)
        _emit({"distance": d, "argmax": [p, t]})
    else:
        d = frechet_pl(a, b, _reparam(args.pi), _reparam(args.tau), norm)
        _emit({"distance": d, "argmax": None})
    return EXIT_OK


def _fd_ic(args):
    from .constant import compute_ic, decide_ic

    a, b, norm = _mesh(args.a), _mesh(args.b), Norm.parse(args.norm)
    if args.eps is not None:
        ok, w = decide_ic(a, b, args.eps, norm)
        out = {"class": "ic", "eps": args.eps, "accepted": ok}
        if ok:
            out["witness_bound"] = w.verify(a, b, norm)
            if args.witness:
                _write(args.witness, dump_json(w.to_json()) + "\n")
        _emit(out)
        return EXIT_OK
    mode = "critical" if args.exact else "bisect"
    _emit({"class": "ic", "distance": compute_ic(a, b, norm, mode=mode, tol=args.tol), "mode": mode,
           "tol": args.tol})
    return EXIT_OK


def _fd_id(args):
    from .dynamic import compute_id, decide_id

    a, b, norm = _mesh(args.a), _mesh(args.b), Norm.parse(args.norm)
    if args.eps is not None:
        res = decide_id(a, b, args.eps, norm, args.graph, args.conn)
        out = {"class": "id", "eps": args.eps, "accepted": res.accepted, "graph": args.graph}
        if args.stats:
            out["stats"] = res.stats
        if args.dump_graph:
            _write(args.dump_graph, dump_json(res.graph.to_json()) + "\n")
        _emit(out)
        return EXIT_OK
    if args.dump_graph:
        raise UsageError("--dump-graph needs --eps")
    d = compute_id(a, b, norm, args.tol, args.graph, args.conn)
    _emit({"class": "id", "distance": d, "tol": args.tol, "graph": args.graph})
    return EXIT_OK


def _fd_decide(args):
    a, b, norm = _mesh(args.a), _mesh(args.b), Norm.parse(args.norm)
    if args.eps < 0:
        raise UsageError("--eps must be nonnegative")
    if args.cls == "ii":
        from .identity import frechet_identity

        ok = frechet_identity(a, b, norm)[0] <= args.eps
    elif args.cls == "ic":
        from .constant import decide_ic

        ok = decide_ic(a, b, args.eps, norm)[0]
    else:
        from .dynamic import decide_id

        ok = decide_id(a, b, args.eps, norm, args.graph, args.conn).accepted
    _emit({"class": args.cls, "eps": args.eps, "accepted": bool(ok)})
    return EXIT_OK if ok else EXIT_REJECT


def _fsd_export(args):
    from . import svg

    a, b, norm = _mesh(args.a), _mesh(args.b), Norm.parse(args.norm)
    if args.res < 2:
        raise UsageError("--res must be at least 2")
    if args.cls == "ic":
        from .constant import decide_ic

        ok, w = decide_ic(a, b, args.eps, norm)
        text = svg.ic_svg(a, b, args.eps, norm, w, args.res)
        info = {"accepted": ok}
    else:
        if not args.slice or not args.slice.startswith("t="):
            raise UsageError("--class id needs --slice t=VALUE")
        t = float(args.slice[2:])
        if not 0 <= t <= a.T:
            raise UsageError(f"slice time {t} outside [0, {a.T}]")
        text = svg.id_slice_svg(a, b, args.eps, t, norm, args.res)
        info = {"t": t}
    _write(args.out, text)
    _emit({"class": args.cls, "eps": args.eps, "out": str(args.out), **info})
    return EXIT_OK


def _load_formula(path):
    from .gadgets import CnfFormula

    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return CnfFormula.parse_dimacs(p.read_text())


def _gadget_gen(args):
    from .gadgets import feature_gap_audit, make_gadget

    inst = make_gadget(_load_formula(args.cnf), args.cls)
    audit = feature_gap_audit(inst)
    _write(args.out_a, dump_json(inst.a.to_json()) + "\n")
    _write(args.out_b, dump_json(inst.b.to_json()) + "\n")
    feats = dict(inst.features, kind=inst.kind, clauses=[list(c) for c in inst.formula.clauses], audit=audit)
    _write(args.features, dump_json(feats) + "\n")
    _emit({"class": args.cls, "n": inst.formula.n, "m": inst.formula.m, "P": inst.a.P,
           "T_a": inst.a.T, "T_b": inst.b.T, "audit_passed": audit["passed"]})
    return EXIT_OK


def _gadget_verify(args):
    from .gadgets import CnfFormula, make_gadget, witness_matching

    if args.features:
        feats = load_json(args.features)
        formula, kind = CnfFormula(feats["n"], feats["clauses"]), feats["kind"]
    elif args.cnf:
        formula, kind = _load_formula(args.cnf), args.cls or "cc"
    else:
        raise UsageError("need --features or --cnf")
    try:
        asg = [bool(int(v)) for v in args.assignment.split(",")] if args.assignment else []
    except ValueError:
        raise UsageError("--assignment must be comma separated 0/1 values")
    if len(asg) != formula.n:
        raise UsageError(f"assignment has {len(asg)} values, formula has {formula.n} variables")
    inst = make_gadget(formula, kind)
    w = witness_matching(inst, asg)
    _emit({"class": kind, "assignment": [int(v) for v in asg], "satisfying": formula.evaluate(asg),
           "bound": w.bound, "norm": inst.norm.value})
    return EXIT_OK


def _oracle_compare(args):
    from . import oracles

    rng = np.random.default_rng(args.seed)
    plan = oracles.SamplingPlan(args.res, args.seed)
    stats = {"class": args.cls, "trials": args.trials, "seed": args.seed, "agree": 0, "disagree": 0,
             "skipped": 0}
    for _ in range(args.trials):
        T, P = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        Q = P if args.cls == "ii" else int(rng.integers(1, 4))
        a = QuadMesh(rng.normal(size=(T + 1, P + 1, 2)))
        b = QuadMesh(rng.normal(size=(T + 1, Q + 1, 2)))
        if args.cls == "ii":
            from .identity import frechet_identity

            exact = frechet_identity(a, b)[0]
            sampled = oracles.sampled_identity_sup(a, b, args.res)
            ok = sampled <= exact + 1e-12 and exact - sampled <= oracles.ic_margin(a, b, plan)
        elif args.cls == "ic":
            from .constant import compute_ic, decide_ic

            star = compute_ic(a, b, tol=1e-7)
            eps = star * rng.uniform(0.5, 1.5)
            if abs(eps - star) <= oracles.ic_margin(a, b, plan):
                stats["skipped"] += 1
                continue
            ok = decide_ic(a, b, eps)[0] == oracles.grid_dp_ic(a, b, eps, plan)
        else:
            from .dynamic import decide_id, upper_bound

            eps = upper_bound(a, b) * rng.uniform(0.2, 1.0)
            ok = decide_id(a, b, eps).accepted == (not oracles.full_R_reachability(a, b, eps))
        stats["agree" if ok else "disagree"] += 1
    _emit(stats)
    return EXIT_OK


HANDLERS = {("fd", "ii"): _fd_ii, ("fd", "ic"): _fd_ic, ("fd", "id"): _fd_id, ("fd", "decide"): _fd_decide,
            ("fsd", "export"): _fsd_export, ("gadget", "gen"): _gadget_gen, ("gadget", "verify"): _gadget_verify,
            ("oracle", "compare"): _oracle_compare}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        _threads()
        return HANDLERS[(args.group, args.cmd)](args)
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
