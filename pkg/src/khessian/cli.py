"""Command-line interface: ``khessian {exponents,solve,analyze,sweep}``.

Exit codes: 0 success, 2 usage, 3 validation, 4 numerical failure.
The default output directory is ``$KHESSIAN_OUT`` or the current directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__, analyses
from .errors import DomainError, KHessianError, NotApplicableError, QuadratureError
from .exponents import Params, classify_regime, compute_exponents, singular_stability_condition
from .reports import dumps, provenance, read_profile, write_json, write_profile, write_rows
from .solver import SolveOptions, TerminationKind, solve_ivp
from .sweep import ConfigError, load_config, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3, 4
OUT_ENV = "KHESSIAN_OUT"


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or ".")


def _add_nkp(p, need_p: bool):
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--k", type=int, required=True, help="Hessian order")
    p.add_argument("--p", type=float, required=need_p, help="exponent of the nonlinearity")


def _add_common(p):
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="khessian", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("exponents", help="critical exponents and regime")
    _add_nkp(pe, need_p=False)
    _add_common(pe)

    ps = sub.add_parser("solve", help="integrate the regular solution with u(0) = rho")
    _add_nkp(ps, need_p=True)
    ps.add_argument("--rho", type=float, default=1.0)
    d = SolveOptions()
    ps.add_argument("--rmax", type=float, default=d.r_max)
    ps.add_argument("--rtol", type=float, default=d.rtol)
    ps.add_argument("--atol", type=float, default=d.atol)
    _add_common(ps)

    pa = sub.add_parser("analyze", help="run analyses on a stored profile")
    pa.add_argument("profile", help="profile.csv or the directory holding it")
    pa.add_argument("--analyses", default="decay",
                    help="comma list from " + ",".join(analyses.ANALYSES))
    pa.add_argument("--R", type=float, nargs="+", help="radii for pohozaev")
    pa.add_argument("--radii", type=float, nargs="+", help="radii |x| for wolff")
    pa.add_argument("--solution", choices=analyses.SOLUTIONS, default="profile")
    pa.add_argument("--family", choices=analyses.FAMILIES, default="standard")
    _add_common(pa)

    pw = sub.add_parser("sweep", help="run a batch described by an INI file")
    pw.add_argument("config")
    pw.add_argument("--out", help="override output_dir from the config")
    return ap


def _emit(obj, table, columns, args, stem: str):
    """Print JSON (or the CSV table) and mirror it into --out when given."""
    out = args.out or os.environ.get(OUT_ENV)
    if args.format == "csv" and table is not None:
        path = write_rows(Path(out or ".") / f"{stem}.csv", table, columns)
        sys.stdout.write(path.read_text())
    else:
        sys.stdout.write(dumps(obj))
        if out:
            write_json(Path(out) / f"{stem}.json", obj)


def cmd_exponents(args) -> int:
    e = compute_exponents(args.n, args.k)
    report = {"command": "exponents", "inputs": {"n": args.n, "k": args.k, "p": args.p},
              "outputs": {"exponents": e.as_dict()}}
    if args.p is not None:
        params = Params(args.n, args.k, args.p)
        report["outputs"]["regime"] = classify_regime(params).as_dict()
        report["outputs"]["singular_condition"] = singular_stability_condition(params).as_dict()
    report["provenance"] = provenance()
    table = [{"quantity": k, "value": v} for k, v in e.as_dict().items()]
    for key in ("regime", "singular_condition"):
        for k, v in report["outputs"].get(key, {}).items():
            table.append({"quantity": f"{key}.{k}", "value": v})
    _emit(report, table, ("quantity", "value"), args, "exponents")
    return EXIT_OK


def cmd_solve(args) -> int:
    params = Params(args.n, args.k, args.p)
    opts = SolveOptions(r_max=args.rmax, rtol=args.rtol, atol=args.atol)
    profile = solve_ivp(params, args.rho, opts)
    csv_path, meta_path = write_profile(profile, _out_dir(args))
    summary = {"command": "solve", "profile": str(csv_path), "meta": str(meta_path),
               "termination": profile.termination.as_dict(), "points": len(profile.grid)}
    sys.stdout.write(dumps(summary))
    if profile.termination.kind is TerminationKind.STEP_UNDERFLOW:
        print(f"step size underflow at r={profile.termination.r}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_analyze(args) -> int:
    names = [a.strip() for a in args.analyses.split(",") if a.strip()]
    bad = [a for a in names if a not in analyses.ANALYSES]
    if bad:
        raise DomainError(f"unknown analyses {bad}; choose from {', '.join(analyses.ANALYSES)}")
    profile = read_profile(args.profile)
    out = _out_dir(args)
    report = {"command": "analyze", "profile": str(args.profile),
              "inputs": {"n": profile.params.n, "k": profile.params.k, "p": profile.params.p,
                         "rho": profile.rho}, "outputs": {}}
    for name in names:
        kw = {}
        if name == "pohozaev" and args.R:
            kw["radii"] = args.R
        if name == "wolff" and args.radii:
            kw["radii"] = args.radii
        if name == "stability":
            kw.update(solution=args.solution, family=args.family)
        try:
            summary, table = analyses.run(name, profile, **kw)
        except NotApplicableError as exc:
            report["outputs"][name] = {"not_applicable": str(exc)}
            continue
        report["outputs"][name] = summary
        if table is not None:
            cols = analyses.table_columns(name)
            if args.format == "csv":
                write_rows(out / f"{name}.csv", table, cols)
            report["outputs"][name]["table"] = table
    report["provenance"] = provenance({"analyses": names})
    sys.stdout.write(dumps(report))
    write_json(out / "analysis.json", report)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, Path(args.out) if args.out else None)
    rows = run_sweep(cfg)
    failed = [r for r in rows if r["status"] != "ok"]
    print(f"{len(rows)} cases, {len(failed)} failed; summary in {cfg.output_dir / 'summary.csv'}")
    return EXIT_NUMERICAL if failed else EXIT_OK


COMMANDS = {"exponents": cmd_exponents, "solve": cmd_solve, "analyze": cmd_analyze,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (QuadratureError, KHessianError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
