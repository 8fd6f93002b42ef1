"""Command-line front end.

JSON goes to stdout (or CSV with ``--format csv``), warnings and log
messages to stderr.  Exit codes: 0 ok, 1 reference mismatch, 2 usage
error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .closedform import GusParameters
from .errors import DomainError, NumericFailure, SkewGramError
from .reference import paper_check
from .reports import (
    SCHEMA_VERSION,
    parse_complex,
    rank2_from_mapping,
    run_coherent,
    run_compare,
    run_gus,
    run_pure,
    run_rank2,
    to_jsonable,
)
from .states import DEFAULT_RANK_TOL

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

RANK_TOL_ENV = "HELSTROM_RANK_TOL"
SWEEP_PARAMS = ("alpha0", "alpha1", "n_thermal", "q0")

log = logging.getLogger("skewgram")


class UsageError(SkewGramError):
    pass


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(f"expected a number or 're,im', got {text!r}") from exc


def _default_rank_tol() -> float:
    env = os.environ.get(RANK_TOL_ENV)
    if env is None:
        return DEFAULT_RANK_TOL
    try:
        return float(env)
    except ValueError:
        raise UsageError(f"{RANK_TOL_ENV}={env!r} is not a number") from None


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    # on subparsers the defaults are suppressed so the top-level values survive
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--format", choices=("json", "csv"), default=d("json"), help="output format")
    p.add_argument("--rank-tol", type=float, default=d(None), help=f"relative rank cutoff (default 1e-6, env {RANK_TOL_ENV})")
    p.add_argument("--seed", type=int, default=d(0), help="seed for the iterative start vectors")
    p.add_argument("--verbose", "-v", action="store_true", default=d(False), help="log progress to stderr")


def _add_coherent_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha0", type=_complex_arg, required=True)
    p.add_argument("--alpha1", type=_complex_arg, required=True)
    p.add_argument("--n-thermal", type=float, default=0.0)
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--q0", type=float, default=0.5)
    p.add_argument("--rank", type=int, default=None, help="columns kept per factor (default: by --rank-tol)")
    p.add_argument("--construction", choices=("glauber", "expm"), default="glauber")
    p.add_argument("--no-normalize", action="store_true", help="keep the truncated trace below 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewgram", description="Optimal binary quantum detection.")
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pure", help="two pure states")
    p.add_argument("--q0", type=float, required=True)
    p.add_argument("--overlap", type=_complex_arg, required=True)

    p = sub.add_parser("compare", help="pure state against a uniform mixture of h orthonormal states")
    p.add_argument("--h", type=int, required=True)
    pri = p.add_mutually_exclusive_group(required=True)
    pri.add_argument("--q0", type=float)
    pri.add_argument("--equal-priors", action="store_true", help="q0 = 1/(h+1)")
    ov = p.add_mutually_exclusive_group(required=True)
    ov.add_argument("--overlaps", type=_complex_arg, nargs="+")
    ov.add_argument("--norm2", type=float, help="sum of |X_i|^2, spread evenly")

    p = sub.add_parser("rank2", help="rank-2 + rank-2 problem from a JSON parameter file")
    p.add_argument("params", help="JSON file with q0, p_a, p_c, p_b, p_d, X, Y, W, Z ('-' for stdin)")

    p = sub.add_parser("gus", help="symmetric rank-2 pair with equal priors")
    p.add_argument("--pa", type=float, required=True)
    p.add_argument("--pc", type=float, default=None, help="defaults to 1 - pa")
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--Y", type=_complex_arg, required=True)
    p.add_argument("--Z", type=float, required=True)

    p = sub.add_parser("coherent", help="displaced thermal coherent states")
    _add_coherent_args(p)

    p = sub.add_parser("paper-check", help="recompute the published examples")

    p = sub.add_parser("sweep", help="coherent pipeline over a parameter range")
    _add_coherent_args(p)
    p.add_argument("--sweep", required=True, metavar="NAME=START:STOP:STEP",
                   help=f"swept parameter, one of {', '.join(SWEEP_PARAMS)}")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    for name, sp in sub.choices.items():
        _add_global(sp, suppress=True)
    return parser


def parse_sweep(text: str) -> tuple[str, list[float]]:
    """``alpha1=0.5:2.0:0.05`` -> ("alpha1", [0.5, 0.55, ..., 2.0])."""
    try:
        name, rng = text.split("=", 1)
        start, stop, step = (float(v) for v in rng.split(":"))
    except ValueError:
        raise UsageError(f"malformed sweep {text!r}; expected NAME=START:STOP:STEP") from None
    name = name.strip().replace("-", "_")
    if name not in SWEEP_PARAMS:
        raise UsageError(f"cannot sweep {name!r}; choose one of {', '.join(SWEEP_PARAMS)}")
    if step == 0 or (stop - start) / step < 0:
        raise UsageError("sweep step must be nonzero and point from start to stop")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return name, [float(f"{start + i * step:.12g}") for i in range(count)]


def _coherent_kwargs(args, rank_tol: float) -> dict:
    return dict(
        alpha0=args.alpha0, alpha1=args.alpha1, n_thermal=args.n_thermal, dim=args.dim, q0=args.q0,
        rank=args.rank, rank_tol=rank_tol, method=args.construction, normalize=not args.no_normalize,
        seed=args.seed,
    )


def _sweep_point(kwargs: dict) -> dict:
    try:
        return run_coherent(**kwargs)
    except (SkewGramError, ValueError) as exc:
        return to_jsonable({"command": "coherent", "inputs": kwargs, "error": f"{type(exc).__name__}: {exc}"})


def run_sweep(args, rank_tol: float) -> dict:
    name, values = parse_sweep(args.sweep)
    base = _coherent_kwargs(args, rank_tol)
    jobs = [dict(base, **{name: v}) for v in values]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            points = list(pool.map(_sweep_point, jobs))  # map keeps input order
    else:
        points = [_sweep_point(j) for j in jobs]
    warnings = [f"{name}={v}: {w}" for v, pt in zip(values, points) for w in pt.get("warnings", [])]
    return to_jsonable({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "inputs": {"parameter": name, "values": values, "base": base},
        "points": points,
        "warnings": warnings,
    })


def dispatch(args) -> dict:
    rank_tol = args.rank_tol if args.rank_tol is not None else _default_rank_tol()
    if rank_tol <= 0:
        raise UsageError("rank tolerance must be positive")
    cmd = args.command
    if cmd == "pure":
        return run_pure(args.q0, args.overlap, seed=args.seed)
    if cmd == "compare":
        q0 = None if args.equal_priors else args.q0
        return run_compare(q0, args.h, overlaps=args.overlaps, norm2=args.norm2, seed=args.seed)
    if cmd == "rank2":
        try:
            if args.params == "-":
                data = json.load(sys.stdin)
            else:
                with open(args.params) as fh:
                    data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read parameter file: {exc}") from None
        return run_rank2(rank2_from_mapping(data), seed=args.seed)
    if cmd == "gus":
        return run_gus(GusParameters(args.pa, args.X, args.Y, args.Z, p_c=args.pc), seed=args.seed)
    if cmd == "coherent":
        return run_coherent(**_coherent_kwargs(args, rank_tol))
    if cmd == "paper-check":
        return paper_check(seed=args.seed, rank_tol=rank_tol)
    if cmd == "sweep":
        return run_sweep(args, rank_tol)
    raise UsageError(f"unknown command {cmd!r}")


# -- output -------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cmd = report["command"]
    if cmd == "sweep":
        name = report["inputs"]["parameter"]
        methods = []
        for pt in report["points"]:
            for m in pt.get("methods", {}):
                if m not in methods:
                    methods.append(m)
        w.writerow([name] + [f"pc_{m}" for m in methods] + ["max_deviation", "error"])
        for v, pt in zip(report["inputs"]["values"], report["points"]):
            ms = pt.get("methods", {})
            w.writerow([v] + [_cell(ms.get(m, {}).get("pc")) for m in methods]
                       + [_cell(pt.get("max_deviation")), pt.get("error", "")])
    elif cmd == "paper-check":
        w.writerow(["id", "tag", "status", "printed", "computed", "difference", "tol"])
        for row in report["checks"]:
            w.writerow([row["id"], row["tag"], row["status"], _cell(row["printed"]), _cell(row["computed"]),
                        _cell(row["difference"]), _cell(row["tol"])])
    else:
        w.writerow(["method", "pc", "pe", "eigenvalues"])
        for name, m in report["methods"].items():
            w.writerow([name, m["pc"], m["pe"], " ".join(str(v) for v in m["eigenvalues"])])
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(report)
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


_NEG_PAIR = re.compile(r"^-[0-9.]+,")


def _escape_negative_pairs(argv: list[str]) -> list[str]:
    # argparse reads "-1.2,0.3" as an option; a leading space makes it a value
    # (float() ignores the space), which also works inside nargs lists
    return [f" {tok}" if _NEG_PAIR.match(tok) else tok for tok in argv]


def main(argv=None) -> int:
    parser = build_parser()
    argv = _escape_negative_pairs(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    t0 = time.perf_counter()
    try:
        report = dispatch(args)
    except NumericFailure as exc:
        print(f"skewgram: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SkewGramError, ValueError) as exc:
        print(f"skewgram: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("%s finished in %.3f s", args.command, time.perf_counter() - t0)
    for w in report.get("warnings", []):
        print(f"skewgram: warning: {w}", file=sys.stderr)
    sys.stdout.write(render(report, args.format))
    if args.command == "paper-check":
        s = report["summary"]
        log.info("paper-check: %d pass, %d fail, %d documented", s["pass"], s["fail"], s["documented"])
        return EXIT_MISMATCH if s["fail"] else EXIT_OK
    if args.command == "sweep" and any("error" in pt for pt in report["points"]):
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
