"""``cantordim`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import Any, Optional, Sequence

from .digitsets import DigitPair, build_matrices, classify_missing_one, rank_one_indices
from .errors import CantorDimError
from .moebius import MoebiusMap
from .pipeline import check_nac, load_problem, run_dim, run_oracle, run_search_phi
from .phisearch import DEFAULT_BUDGET
from .result import Method

log = logging.getLogger("cantordim")


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = "%.17g" % x
    # keep floats recognisable as floats after a round trip
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj: Any, indent: Optional[int] = 2, _level: int = 0) -> str:
    """JSON with every real printed to 17 significant digits."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return dumps(obj.item(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v, None) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    if hasattr(obj, "value"):
        return dumps(obj.value, indent, _level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(doc: dict, as_json: bool) -> None:
    if as_json:
        print(dumps(doc))
        return
    for key, value in doc.items():
        if isinstance(value, (dict, list)):
            value = dumps(value, None)
        elif isinstance(value, (bool, float)) or value is None:
            value = dumps(value)
        print(f"{key}: {value}")


def classify_doc(b: int, tau: int, u: int) -> dict:
    cls = classify_missing_one(b, tau, u)
    tm = build_matrices(DigitPair.missing_one(b, tau, u))
    return {"b": b, "tau": tau, "u": u, "class": cls.value, "rank_one": rank_one_indices(tm)}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print JSON (default: key: value lines)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cantordim", description="Dimension of intersections of translated Cantor sets.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dim", parents=[common], help="compute lambda and the dimension")
    d.add_argument("file")
    d.add_argument("--eps", type=float, default=None)
    d.add_argument("--method", choices=[m.value for m in Method], default=None)
    d.add_argument("--steps", type=int, default=1_000_000)
    d.add_argument("--trials", type=int, default=20)
    d.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    c = sub.add_parser("classify", parents=[common], help="classify a missing-one-digit pair")
    c.add_argument("b", type=int)
    c.add_argument("tau", type=int, nargs="?")
    c.add_argument("u", type=int, nargs="?")
    c.add_argument("--sweep", action="store_true", help="all (tau, u) for this base")

    n = sub.add_parser("check-nac", parents=[common], help="report the admissibility constants of phi")
    n.add_argument("file")
    n.add_argument("--phi", type=float, nargs=4, metavar=("A", "B", "C", "D"))

    s = sub.add_parser("search-phi", parents=[common], help="search for an admissible phi")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    o = sub.add_parser("oracle", parents=[common], help="Monte Carlo estimate of lambda")
    o.add_argument("file")
    o.add_argument("--steps", type=int, default=1_000_000)
    o.add_argument("--trials", type=int, default=20)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="cantordim: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "dim":
            res = run_dim(load_problem(args.file), args.eps, args.method, args.seed, args.steps,
                          args.trials, args.budget)
            _emit(res.to_dict(), args.json)
        elif args.command == "classify":
            if args.sweep:
                rows = [classify_doc(args.b, t, u) for t in range(args.b) for u in range(args.b)]
                _emit({"b": args.b, "pairs": rows}, True)
            else:
                if args.tau is None or args.u is None:
                    raise SystemExit("cantordim classify: need tau and u (or --sweep)")
                _emit(classify_doc(args.b, args.tau, args.u), args.json)
        elif args.command == "check-nac":
            phi = MoebiusMap(*args.phi) if args.phi else None
            _emit(check_nac(load_problem(args.file), phi), args.json)
        elif args.command == "search-phi":
            _emit(run_search_phi(load_problem(args.file), args.budget, args.seed), args.json)
        elif args.command == "oracle":
            res = run_oracle(load_problem(args.file), args.steps, args.trials, args.seed)
            _emit(res.to_dict(), args.json)
    except CantorDimError as exc:
        print(f"cantordim: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        # bad arguments that did not come through a problem file
        print(f"cantordim: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())
