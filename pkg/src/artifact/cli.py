"""The ``pdl`` command line.

Every command emits one JSON report {tool_version, tower, params, suite,
checks, wall_time_ms, ...} on stdout (or --out); ``howe --all`` and
``fibers --census`` can emit CSV instead.  Exit codes: 0 success, 1 a check
failed, 2 usage error, 3 budget exceeded (a partial report is still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import __version__, chars, fibers, lefschetz, suites, variety, witt
from .cache import Cache, canonical
from .errors import BudgetError, ParameterError, WidenField
from .ffield import get_tower
from .parahoric import GroupParams, enumerate_group, group_order_formula

log = logging.getLogger("pdl")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# ---------------------------------------------------------------------------
# argument parsing

def _add_params(sp, kappa=True, h=True):
    sp.add_argument("--q", type=int, help="residue field size (prime power)")
    sp.add_argument("--n", type=int)
    if kappa:
        sp.add_argument("--kappa", type=int, default=0)
    if h:
        sp.add_argument("--h", type=int)
    sp.add_argument("--M", type=int, default=1, help="work over F_{q^{nM}}")


def _add_common(sp):
    sp.add_argument("--budget", type=int, default=1 << 22, help="point budget")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--out", help="write output here instead of stdout")
    sp.add_argument("--no-cache", action="store_true",
                    help="recompute and compare against any cached result")
    sp.add_argument("--cache-dir", help="overrides PDL_CACHE_DIR")


def build_parser():
    ap = _Parser(prog="pdl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("tower", help="describe a finite field F_{q^N}")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--N", type=int, default=1)
    _add_common(sp)

    sp = sub.add_parser("witt", help="arithmetic in W_h(F_q) or the twisted ring")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--op", choices=("add", "sub", "mul", "inv", "twisted_mul", "frob"),
                    required=True)
    sp.add_argument("--a", required=True, help="comma separated element codes")
    sp.add_argument("--b", help="second operand")
    _add_common(sp)

    sp = sub.add_parser("group", help="order of a rational subgroup")
    _add_params(sp)
    sp.add_argument("--which", default="Gh1", choices=("Gh", "Gh1", "Th", "Th1"))
    _add_common(sp)

    sp = sub.add_parser("enum", help="count points and their strata")
    _add_params(sp)
    sp.add_argument("--which", default="xh1", choices=("xh1", "xh", "y"))
    _add_common(sp)

    sp = sub.add_parser("strata", help="point counts of each Drinfeld stratum of X_h")
    _add_params(sp)
    _add_common(sp)

    sp = sub.add_parser("howe", help="Howe data of characters of W_h^x(F_{q^n})")
    _add_params(sp, kappa=True)
    sp.add_argument("--all", action="store_true", help="one row per character")
    sp.add_argument("--index", type=int, default=0)
    _add_common(sp)

    sp = sub.add_parser("degrees", help="cohomological degree and dimension per character")
    _add_params(sp)
    _add_common(sp)

    sp = sub.add_parser("lefschetz", help="twisted point counts N(1, t) for every t")
    _add_params(sp)
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--variety", default="Xh1", choices=("Xh1", "Xh"))
    _add_common(sp)

    sp = sub.add_parser("verify", help="run an acceptance suite")
    sp.add_argument("suite", choices=sorted(suites.SUITES))
    _add_params(sp)
    sp.add_argument("--r", type=int, action="append", help="stratum index (repeatable)")
    _add_common(sp)

    sp = sub.add_parser("evidence", help="closed stratum against X_h")
    sp.add_argument("kind", choices=("cxh",))
    _add_params(sp)
    sp.add_argument("--limit", type=int, help="only the first LIMIT characters")
    _add_common(sp)

    sp = sub.add_parser("fibers", help="fiber census and normal form")
    _add_params(sp)
    sp.add_argument("--census", action="store_true", help="fiber sizes per base point")
    _add_common(sp)
    return ap


def _params(args, need_h=True):
    missing = [k for k in ("q", "n") + (("h",) if need_h else ()) if getattr(args, k) is None]
    if missing:
        raise UsageError(f"missing --{', --'.join(missing)}")
    return GroupParams.from_q(args.q, args.n, getattr(args, "kappa", 0) or 0, args.h)


def _has_params(args):
    return getattr(args, "q", None) is not None and getattr(args, "n", None) is not None


def _field(q, N=1):
    P = GroupParams.from_q(q, 1, 0, 1)
    return get_tower(P.p, P.a, N)


def _codes(text):
    try:
        return np.array([int(x) for x in text.split(",")], dtype=np.int64)
    except ValueError as exc:
        raise UsageError(f"bad element list {text!r}") from exc


# ---------------------------------------------------------------------------
# commands: each returns (payload, csv_text_or_None)

def cmd_tower(args):
    F = _field(args.q, args.N)
    info = dict(F.to_json(), q=F.q, order=F.order, degree_over_Fp=F.k)
    return {"suite": "tower", "tower": F.to_json(), "result": info, "checks": []}, None


def cmd_witt(args):
    F = _field(args.q)
    a = _codes(args.a)
    if np.any(a < 0) or np.any(a >= F.order):
        raise UsageError("element codes must lie in [0, q)")
    b = _codes(args.b) if args.b else None
    if args.op in ("add", "sub", "mul", "twisted_mul") and (b is None or len(b) != len(a)):
        raise UsageError("--b of the same length is required")
    ops = {"add": witt.witt_add, "sub": witt.witt_sub, "mul": witt.witt_mul,
           "twisted_mul": witt.twisted_mul}
    if args.op in ops:
        res = ops[args.op](F, a, b)
    elif args.op == "inv":
        if a[0] == 0:
            raise UsageError("not a unit")
        res = witt.witt_inv(F, a)
    else:
        res = witt.witt_frobenius(F, a)
    return {"suite": "witt", "tower": F.to_json(), "checks": [],
            "result": {"op": args.op, "a": a, "b": b, "value": res}}, None


def cmd_group(args):
    P = _params(args)
    F = P.tower(args.M)
    G = enumerate_group(F, P, args.which, budget=args.budget)
    checks = []
    try:
        expected = group_order_formula(P, args.which) if args.M == 1 else None
    except ParameterError:
        expected = None
    if expected is not None:
        checks.append({"name": "order", "expected": expected, "got": len(G),
                       "pass": expected == len(G)})
    return {"suite": "group", "checks": checks, "result": {"which": args.which, "order": len(G)}}, None


def cmd_enum(args):
    P = _params(args)
    which = {"xh1": "Xh1", "xh": "Xh", "y": "Y"}[args.which]
    pts, labels = variety.enumerate_points(P, which, args.M, budget=args.budget)
    hist = variety.stratum_histogram(labels)
    checks = []
    if which == "Xh1" and args.M == 1:
        exp = variety.count_points_formula(P)
        checks.append({"name": "count", "expected": exp, "got": len(pts), "pass": exp == len(pts)})
    return {"suite": "enum", "checks": checks,
            "result": {"which": which, "count": len(pts), "strata": hist}}, None


def cmd_strata(args):
    P = _params(args)
    _, labels = variety.enumerate_points(P, "Xh", args.M, budget=args.budget)
    hist = variety.stratum_histogram(labels)
    return {"suite": "strata", "checks": [],
            "result": {"total": int(len(labels)), "strata": hist,
                       "labels": variety.divisors(P.nprime)}}, None


def _howe_row(P, theta, rng):
    hd = chars.howe_factorize(theta, rng)
    chi = theta.restrict_level1()
    chd = chars.chi_invariants(chi)
    r, _, _ = chars.degree_r_chi(chd, P.n, P.n0)
    dim = chars.dim_formula(chd, P.n, P.n0, P.q, P.h)
    return {"key": list(theta.key()), "d": hd.d, "dprime": hd.dprime, "m_seq": hd.m_seq,
            "h_seq": hd.h_seq, "r_chi": r, "dim": dim}


def cmd_howe(args):
    P = _params(args)
    M = chars.model_for(P)
    allc = M.characters(args.budget)
    rng = np.random.default_rng(args.seed)
    if args.all:
        rows = [_howe_row(P, th, rng) for th in allc]
    else:
        if not 0 <= args.index < len(allc):
            raise UsageError(f"--index must lie in [0, {len(allc)})")
        rows = [_howe_row(P, allc[args.index], rng)]
    csv = None
    if args.format == "csv":
        lines = ["index,key,d,dprime,m_seq,h_seq,r_chi,dim"]
        for i, row in enumerate(rows):
            lines.append(",".join([str(i if args.all else args.index),
                                   " ".join(map(str, row["key"])), str(row["d"]),
                                   str(row["dprime"]), " ".join(map(str, row["m_seq"])),
                                   " ".join(map(str, row["h_seq"])), str(row["r_chi"]),
                                   str(row["dim"])]))
        csv = "\n".join(lines) + "\n"
    return {"suite": "howe", "checks": [], "result": {"characters": len(allc), "rows": rows}}, csv


def cmd_degrees(args):
    P = _params(args)
    _, allc = lefschetz.level_one_characters(P)
    sectors = lefschetz.eigenspace_degrees(P, allc)
    rows, checks = [], []
    for chi, sec in zip(allc, sectors):
        hd = chars.chi_invariants(chi)
        r, _, _ = chars.degree_r_chi(hd, P.n, P.n0)
        dim = chars.dim_formula(hd, P.n, P.n0, P.q, P.h)
        rows.append({"chi": list(chi.key()), "r_engine": sec.r, "dim_engine": sec.dim,
                     "r_formula": r, "dim_formula": dim})
        checks.append({"name": f"chi {list(chi.key())}", "expected": [r, dim],
                       "got": [sec.r, sec.dim], "pass": (r, dim) == (sec.r, sec.dim)})
    return {"suite": "degrees", "checks": checks, "result": {"rows": rows}}, None


def cmd_lefschetz(args):
    P = _params(args)
    H = lefschetz.twisted_histogram(P, args.variety, None, args.s, budget=args.budget)
    counts = {str(k): int(v) for k, v in sorted(H.counts.items())}
    return {"suite": "lefschetz", "checks": [],
            "result": {"variety": args.variety, "s": args.s, "total": H.total(),
                       "counts_by_t": counts}}, None


def cmd_verify(args):
    name = args.suite
    kw = {}
    if _has_params(args):
        P = _params(args)
        case = (P.q, P.n, P.kappa, P.h)
        if name in ("maximality", "dimensions", "inner_products", "very_regular", "normal_form"):
            kw["cases"] = [case]
            if name == "normal_form":
                kw["M"] = args.M
        elif name == "lang_section":
            kw["cases"] = [(case, tuple(args.r or [1, P.nprime]))]
        elif name == "howe":
            kw["cases"] = [(P.q, P.n, P.h)]
        elif name == "cxh":
            kw["case"] = case
        else:
            raise UsageError(f"suite {name} takes no parameters")
    if name in ("index_closed_forms", "twisted_ring"):
        kw["seed"] = args.seed
    return suites.run(name, **kw), None


def cmd_evidence(args):
    P = _params(args)
    rep = suites.cxh((P.q, P.n, P.kappa, P.h), limit=args.limit)
    return rep, None


def cmd_fibers(args):
    P = _params(args)
    if args.census:
        cen = fibers.fiber_census(P, args.M, budget=args.budget)
        checks = [{"name": "constant within strata", "expected": True, "got": cen["constant"],
                   "pass": bool(cen["constant"])}]
        payload = {"suite": "fibers", "checks": checks,
                   "result": {"by_stratum": cen["by_stratum"], "total": cen["total"],
                              "rows": cen["rows"]}}
        csv = fibers.census_csv(cen) if args.format == "csv" else None
        return payload, csv
    rep = fibers.verify_normal_form(P, args.M, budget=args.budget)
    checks = [{"name": "normal form failures", "expected": 0, "got": len(rep["failures"]),
               "pass": not rep["failures"]}]
    return {"suite": "fibers", "checks": checks,
            "result": {"bases": rep["bases"], "points": rep["points"],
                       "failures": rep["failures"][:20]}}, None


COMMANDS = {"tower": cmd_tower, "witt": cmd_witt, "group": cmd_group, "enum": cmd_enum,
            "strata": cmd_strata, "howe": cmd_howe, "degrees": cmd_degrees,
            "lefschetz": cmd_lefschetz, "verify": cmd_verify, "evidence": cmd_evidence,
            "fibers": cmd_fibers}

# commands whose results are worth caching
HEAVY = {"enum", "strata", "howe", "degrees", "lefschetz", "verify", "evidence", "fibers", "group"}


def _task(args):
    skip = {"out", "no_cache", "cache_dir", "format"}
    return {"tool_version": __version__,
            **{k: v for k, v in sorted(vars(args).items()) if k not in skip}}


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _wrap(args, body):
    rep = {"tool_version": __version__, "tower": None, "params": None}
    if _has_params(args) and getattr(args, "h", None) is not None:
        try:
            P = _params(args)
            rep["params"] = P.to_json()
            rep["tower"] = P.tower(getattr(args, "M", 1) or 1).to_json()
        except (ParameterError, UsageError):
            pass
    rep.update(body)
    rep.setdefault("checks", [])
    rep["pass"] = all(c.get("pass", True) for c in rep["checks"])
    return _jsonable(rep)


def dispatch(argv=None):
    """Run one command; returns the process exit code."""
    logging.basicConfig(level=logging.WARNING, format="pdl: %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"pdl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    cache = Cache(args.cache_dir)
    task = _task(args)
    mismatch = False
    csv = None
    try:
        cached = cache.get(task) if args.command in HEAVY else None
        if cached is not None and not args.no_cache:
            payload, csv = cached["report"], cached.get("csv")
        else:
            body, csv = COMMANDS[args.command](args)
            payload = json.loads(canonical(_wrap(args, body)))
            if args.command in HEAVY:
                if cached is not None and canonical(cached["report"]) != canonical(payload):
                    log.warning("recomputed result differs from the cached entry")
                    mismatch = True
                cache.put(task, {"report": payload, "csv": csv})
    except UsageError as exc:
        print(f"pdl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"pdl: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetError, WidenField) as exc:
        partial = _wrap(args, {"suite": args.command, "checks": [],
                               "error": f"{type(exc).__name__}: {exc}"})
        partial["pass"] = False
        partial["wall_time_ms"] = round(1000 * (time.perf_counter() - start), 3)
        _emit(json.dumps(partial, indent=2) + "\n", args.out)
        return EXIT_BUDGET
    report = dict(payload, wall_time_ms=round(1000 * (time.perf_counter() - start), 3))
    if args.format == "csv" and csv is not None:
        _emit(csv, args.out)
    else:
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    if mismatch or not payload.get("pass", True):
        return EXIT_FAIL
    return EXIT_OK


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
