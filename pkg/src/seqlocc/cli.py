"""Command-line entry point.

Exit codes: 0 when the analysis ran (whatever the verdicts), 2 for input
problems, 3 for internal failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from importlib import metadata

import numpy as np

from . import repro
from .cone import DEFAULT_ITERS, DEFAULT_MARGIN, DEFAULT_RESTARTS, DEFAULT_SEED, ConeParams, analyze_cone
from .constructions import random_ensemble
from .discrimination import DEFAULT_TOL, solve_pg
from .ensembles import SequenceEnsemble
from .factorizability import ReportOptions, SeparableCertificate, assemble_report
from .fileio import (
    OPERATOR_BUILDERS,
    FileFormatError,
    Report,
    ensemble_to_json,
    load_ensemble,
    load_operator,
    matrix_to_json,
    plain,
)
from .operators import ConvergenceError, PartyStructure, StructureError

log = logging.getLogger("seqlocc")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _cone_params(args, allow_default: bool) -> ConeParams:
    allow = allow_default if args.allow_primitives is None else args.allow_primitives
    return ConeParams(args.restarts, args.iters, args.seed, args.margin, allow)


def _verdict_dict(v) -> dict:
    out = {"status": v.status.value, "method": v.method, "best_found": v.best_found}
    if v.witness is not None:
        out["witness_value"] = v.witness_value
        out["witness"] = [[[z.real, z.imag] for z in vec] for vec in v.witness.vectors]
    if v.certificate is not None:
        out["certificate"] = {
            "terms": [
                {"coefficient": t.coefficient, "note": t.note, "steps": t.steps}
                for t in v.certificate.terms
            ],
            "reconstruction_error": v.certificate.reconstruction_error(),
        }
    return out


def certificate_summary(cert: SeparableCertificate) -> dict:
    return {
        "note": cert.note,
        "trace_H": cert.H.trace(),
        "H": matrix_to_json(cert.H.matrix),
        "measurements": [[matrix_to_json(M.matrix) for M in meas.operators] for meas in cert.measurements],
        "max_slackness_residual": max((abs(r) for r in cert.residuals.values()), default=0.0),
        "ghz_counts": {",".join(map(str, c)): t for c, t in cert.ghz_counts.items()},
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> Report:
    factors = [load_ensemble(p) for p in args.files]
    se = SequenceEnsemble(tuple(factors) * args.copies)
    options = ReportOptions(cone=_cone_params(args, True), pg_tol=args.tol, exhaustive=args.exhaustive)
    rep = assemble_report(se, options)
    data = rep.to_dict()
    certs = {} if rep.certificate is None else {"theorem4": certificate_summary(rep.certificate)}
    return Report(
        "analyze",
        {"files": list(args.files), "copies": args.copies, "tol": args.tol, "n": list(se.n)},
        {
            "factorizable": data["factorizable"],
            "conditions": data["conditions"],
            "steps": data["steps"],
            "diagnostics": data["diagnostics"],
        },
        data["bounds"],
        certs,
    )


def cmd_repro(args) -> Report:
    checks = repro.run(args.example, args.d, args.m, args.L, _cone_params(args, True))
    return Report(
        "repro",
        {"example": args.example, "d": args.d, "m": args.m, "L": args.L},
        {c.name: c.to_dict() for c in checks},
    )


def cmd_cone(args) -> Report:
    if args.builder:
        op = OPERATOR_BUILDERS[args.builder](args.m, args.d)
        source = {"builder": args.builder, "m": args.m, "d": args.d}
    elif args.file:
        op = load_operator(args.file)
        source = {"file": args.file}
    else:
        raise FileFormatError("<args>", "give an operator file or --builder")
    verdict = analyze_cone(op, _cone_params(args, False))
    return Report(
        "cone",
        {**source, "party_dims": list(op.structure.party_dims), "steps": op.structure.steps},
        _verdict_dict(verdict),
    )


def cmd_pg(args) -> Report:
    e = load_ensemble(args.file)
    r = solve_pg(e, tol=args.tol)
    return Report(
        "pg",
        {"file": args.file, "tol": args.tol},
        {"p_G": r.value, "upper": r.upper, "gap": r.gap, "iterations": r.iterations},
        certificates={
            "dual": matrix_to_json(r.dual.matrix),
            "measurement": [matrix_to_json(M.matrix) for M in r.measurement.operators],
        },
    )


def cmd_rand_ensemble(args) -> dict:
    rng = np.random.default_rng(args.seed)
    e = random_ensemble(PartyStructure(tuple(args.parties)), args.n, rng, args.rank)
    return ensemble_to_json(e)


# ---------------------------------------------------------------------------
# output


def _print_text(report: Report) -> None:
    out = sys.stdout
    if report.command == "repro":
        for name, c in report.verdicts.items():
            print(f"{'PASS' if c['passed'] else 'FAIL'} {name}: {c['detail']}", file=out)
        return
    if report.command == "analyze":
        v = report.verdicts
        print(f"factorizable: {v['factorizable']}", file=out)
        for s in v["steps"]:
            pl = "uncertified" if s["p_L"] is None else f"{s['p_L']:.12g} ({s['p_L_source']})"
            pg = "n/a" if s["p_G"] is None else f"{s['p_G']:.12g}"
            print(
                f"step {s['step']}: max prior {s['max_prior']:.12g}, "
                f"theorem1 {s['theorem1']['status']}, p_L {pl}, p_G {pg}",
                file=out,
            )
        for name, c in v["conditions"].items():
            print(f"{name}: {c['status']}" + (f" ({c['reason']})" if c["reason"] else ""), file=out)
        for k, b in sorted(report.bounds.items()):
            print(f"  {k} = {b}", file=out)
        for d in v["diagnostics"]:
            print(f"note: {d}", file=out)
        return
    for k, val in sorted(report.verdicts.items()):
        if k != "witness":
            print(f"{k}: {val}", file=out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqlocc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, pg=True):
        sp.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
        sp.add_argument("--iters", type=int, default=DEFAULT_ITERS)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
        sp.add_argument(
            "--allow-primitives",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="accept the registered identity-minus-GHZ primitive as block positive",
        )
        if pg:
            sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
        sp.add_argument("--output", choices=("text", "json"), default="text")

    a = sub.add_parser("analyze", help="factorizability report for a sequence of ensembles")
    a.add_argument("files", nargs="+", help="one ensemble file per step")
    a.add_argument("--copies", type=int, default=1, help="repeat the list of steps N times")
    a.add_argument("--exhaustive", action="store_true", help="test every index even after a refutation")
    common(a)
    a.set_defaults(run=cmd_analyze)

    r = sub.add_parser("repro", help="recompute the numbers of a worked example")
    r.add_argument("example", choices=("example1", "example2"))
    r.add_argument("--d", type=int, default=2)
    r.add_argument("--m", type=int, default=2)
    r.add_argument("--L", type=int, default=2)
    common(r, pg=False)
    r.set_defaults(run=cmd_repro)

    c = sub.add_parser("cone", help="block-positivity verdict for one operator")
    c.add_argument("file", nargs="?")
    c.add_argument("--builder", choices=sorted(OPERATOR_BUILDERS))
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--d", type=int, default=2)
    common(c, pg=False)
    c.set_defaults(run=cmd_cone)

    g = sub.add_parser("pg", help="optimal global guessing probability with its dual bound")
    g.add_argument("file")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL)
    g.add_argument("--output", choices=("text", "json"), default="text")
    g.add_argument("--seed", type=int, default=None)
    g.set_defaults(run=cmd_pg)

    q = sub.add_parser("rand-ensemble", help="write a random valid ensemble file to stdout")
    q.add_argument("--parties", type=int, nargs="+", default=[2, 2])
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--rank", type=int, default=None)
    q.add_argument("--seed", type=int, default=DEFAULT_SEED)
    q.set_defaults(run=cmd_rand_ensemble)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    start = time.perf_counter()
    try:
        result = args.run(args)
    except (FileFormatError, StructureError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        log.debug("internal failure", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    if isinstance(result, dict):
        print(json.dumps(result, sort_keys=True, indent=2))
        return EXIT_OK
    result.seed = getattr(args, "seed", None)
    result.version = _version()
    result.timing = {"seconds": time.perf_counter() - start}
    result = Report.from_dict(plain(result.to_dict()))
    if args.output == "json":
        print(result.to_json())
    else:
        _print_text(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
