"""Command-line driver: ``thetahecke <command> [options]``.

Commands: invariants, theta, neighbors, genus, ffcheck, verify.  All numbers
are written exactly (integers or "num/den" strings).  ``verify`` exits 0 on
pass, 1 on fail and 2 when a budget stops the computation; bad input exits 3.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import arith
from .arith import CapacityError
from .ffquad import quadratic_space_classes, thm45_closing_identity_check, classify
from .genus import DEFAULT_ISOMETRY_BUDGET, BudgetExceeded, genus_classes, neighbors
from .hecke import verify_eigenvalue
from .lattice import Lattice, LatticeError, as_lattice
from .theta import DEFAULT_NODE_BUDGET, theta_table

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


def _prime(text: str) -> int:
    p = int(text)
    if not arith.is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


# ---------------------------------------------------------------------------

def cmd_invariants(a) -> int:
    L = Lattice.from_json(a.lattice)
    chis = {p: L.chi_star(p) for p in arith.primes_up_to(a.primes) if L.level % p}
    info = {"label": L.label, "m": L.m, "k": L.k, "det": L.det, "level": L.level,
            "even_integral": True, "chi_star": {str(p): c for p, c in chis.items()}}
    if a.format == "json":
        _emit(_dump(info), a.out)
    else:
        lines = [f"m = {L.m}, k = {L.k}, det = {L.det}, level = {L.level}, even integral: yes"]
        lines += [f"chi*({p}) = {c:+d}" for p, c in chis.items()]
        _emit("\n".join(lines), a.out)
    return EXIT_PASS


def cmd_theta(a) -> int:
    L = Lattice.from_json(a.lattice)
    t = theta_table(L, a.n, a.bound, a.node_budget)
    if a.format == "csv":
        _emit(t.to_csv(), a.out)
    elif a.format == "json":
        _emit(t.to_json(), a.out)
    else:
        _emit("\n".join(f"{list(k)}  {v}" for k, v in t.items()), a.out)
    return EXIT_PASS


def cmd_neighbors(a) -> int:
    L = Lattice.from_json(a.lattice)
    ns = neighbors(L, a.p, a.r)
    grams = [[list(r) for r in as_lattice(K).gram] for K in ns.members] if a.grams else []
    info = {"p": a.p, "r": a.r, "count": len(ns.specs)}
    if a.grams:
        info["grams"] = grams
    if a.format == "json":
        _emit(_dump(info), a.out)
    else:
        _emit("\n".join([f"{len(ns.specs)} neighbours (p = {a.p}, r = {a.r})"] + [str(g) for g in grams]), a.out)
    return EXIT_PASS


def cmd_genus(a) -> int:
    L = Lattice.from_json(a.lattice)
    try:
        G = genus_classes(L, a.p, a.isometry_budget)
    except (BudgetExceeded, CapacityError) as exc:
        print(f"genus enumeration stopped: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if a.format == "json":
        _emit(G.to_json(), a.out)
    else:
        lines = [f"{len(G.classes)} class(es), mass {G.mass}"]
        lines += [f"  {[list(r) for r in C.gram]}  |O| = {o}" for C, o in G.classes]
        lines.append(f"neighbour multiplicities: {G.neighbor_matrix}")
        _emit("\n".join(lines), a.out)
    return EXIT_PASS


def cmd_ffcheck(a) -> int:
    rows = []
    for dim in range(a.max_dim + 1):
        for V in quadratic_space_classes(a.p, dim):
            w = classify(V)
            for r in range(a.max_j + 1):
                n = dim + r
                for j in range(r, min(a.max_j, n) + 1):
                    ok = thm45_closing_identity_check(V, n, j, r)
                    rows.append({"dim": dim, "radical": w.radical_dim, "witt": w.witt_type,
                                 "n": n, "j": j, "r": r, "ok": ok})
    passed = all(r["ok"] for r in rows)
    if a.format == "json":
        _emit(_dump({"p": a.p, "cases": rows, "all_pass": passed}), a.out)
    else:
        bad = [r for r in rows if not r["ok"]]
        _emit(f"{len(rows)} cases, {len(rows) - len(bad)} pass" + "".join(f"\nFAIL {r}" for r in bad), a.out)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_verify(a) -> int:
    L = Lattice.from_json(a.lattice)
    if not 1 <= a.j <= a.n:
        raise ValueError("need 1 <= j <= n")
    v_override = None
    if a.corrupt_v is not None:
        v_override = {0: Fraction(a.corrupt_v)}
    rep = verify_eigenvalue(L, a.p, a.n, a.j, a.bound, node_budget=a.node_budget,
                            isometry_budget=a.isometry_budget, v_override=v_override)
    if a.format == "json":
        _emit(rep.to_json(), a.out)
        if a.out:
            print(rep.to_text())
    else:
        _emit(rep.to_text(), a.out)
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL}.get(rep.verdict, EXIT_INCONCLUSIVE)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thetahecke", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("json", "text"), default="text"):
        sp.add_argument("--format", choices=fmt, default=default)
        sp.add_argument("--out", help="write the report here instead of stdout")

    sp = sub.add_parser("invariants", help="rank, determinant, level and character values")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--primes", type=_positive, default=30, help="list chi*(p) for p up to this bound")
    common(sp)
    sp.set_defaults(func=cmd_invariants)

    sp = sub.add_parser("theta", help="theta series coefficients up to a trace bound")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--n", type=int, choices=(1, 2), default=1)
    sp.add_argument("--bound", type=_nonneg, required=True)
    sp.add_argument("--node-budget", type=_positive, default=DEFAULT_NODE_BUDGET)
    common(sp, ("csv", "json", "text"), "csv")
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("neighbors", help="count (and list) the p^r-neighbours")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--p", type=_prime, required=True)
    sp.add_argument("--r", type=_positive, default=1)
    sp.add_argument("--grams", action="store_true", help="also print a reduced Gram of each neighbour")
    common(sp)
    sp.set_defaults(func=cmd_neighbors)

    sp = sub.add_parser("genus", help="classes in the genus by neighbour closure")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--p", type=_prime, required=True)
    sp.add_argument("--isometry-budget", type=_positive, default=DEFAULT_ISOMETRY_BUDGET)
    common(sp)
    sp.set_defaults(func=cmd_genus)

    sp = sub.add_parser("ffcheck", help="character-sum identity over all small quadratic spaces")
    sp.add_argument("--p", type=_prime, required=True)
    sp.add_argument("--max-dim", type=_nonneg, default=3)
    sp.add_argument("--max-j", type=_nonneg, default=3)
    common(sp)
    sp.set_defaults(func=cmd_ffcheck)

    sp = sub.add_parser("verify", help="check the genus theta series eigenvalue")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--p", type=_prime, required=True)
    sp.add_argument("--n", type=_positive, required=True)
    sp.add_argument("--j", type=_positive, required=True)
    sp.add_argument("--bound", type=_nonneg, required=True)
    sp.add_argument("--node-budget", type=_positive, default=DEFAULT_NODE_BUDGET)
    sp.add_argument("--isometry-budget", type=_positive, default=DEFAULT_ISOMETRY_BUDGET)
    sp.add_argument("--corrupt-v", help=argparse.SUPPRESS)  # negative control: replaces v_0
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LatticeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapacityError, BudgetExceeded) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
