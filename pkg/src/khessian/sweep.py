"""Batch sweeps described by an INI file.

Example::

    [sweep]
    schema_version = 1
    output_dir = atlas
    workers = 4
    drop_inadmissible = yes

    [solver]
    r_max = 1e4

    [case atlas]
    n = 5..40
    k = 2,3
    commands = exponents

    [case decay]
    n = 9
    k = 2
    p = 4.6..5.4:0.2
    rho = 1
    commands = solve, decay, limitB

Values accept a single number, a comma list, an integer range ``a..b`` or
a stepped range ``a..b:h``.  Each ``[case ...]`` section expands to the
cartesian product of its values, in the order n, k, p, rho.  Every case is
validated before any is run.
"""

from __future__ import annotations

import configparser
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional

from . import analyses
from .errors import DomainError, KHessianError, NotApplicableError
from .exponents import Params, classify_regime, compute_exponents, _check_nk
from .quadrature import QuadratureSpec
from .reports import jsonable, provenance, write_json, write_profile, write_rows
from .solver import SolveOptions, TerminationKind, solve_ivp

SCHEMA_VERSION = 1
COMMANDS = ("exponents", "solve", "decay", "limitB", "pohozaev", "wolff", "stability", "intersections")
NEEDS_PROFILE = set(COMMANDS) - {"exponents", "solve"}

SUMMARY_COLUMNS = (
    "case", "name", "n", "k", "p", "rho", "regime",
    "p_se", "p_so", "p_star", "p_jl", "p_2",
    "termination", "r_end", "decay_exponent", "decay_target", "B_ratio", "B_oscillation",
    "pohozaev_gap", "wolff_lower_spread", "wolff_upper_spread", "min_normalized_Q", "status",
)


class ConfigError(DomainError):
    """The sweep file is malformed or names an invalid case."""


@dataclass(frozen=True)
class Case:
    index: int
    name: str
    n: int
    k: int
    p: Optional[float]
    rho: float
    commands: tuple


@dataclass(frozen=True)
class SweepConfig:
    cases: tuple
    output_dir: Path
    solver: SolveOptions = field(default_factory=SolveOptions)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    workers: int = 1


def parse_values(text: str, integer: bool = False) -> list:
    """'3', '2,3', '5..40' or '4.6..5.4:0.2'."""
    text = text.strip()
    conv = int if integer else float
    if ".." in text and "," not in text:
        lo_s, rest = text.split("..", 1)
        step_s = None
        if ":" in rest:
            rest, step_s = rest.split(":", 1)
        lo, hi = conv(lo_s), conv(rest)
        step = conv(step_s) if step_s is not None else 1
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad range {text!r}")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [conv(lo + i * step) if integer else round(lo + i * step, 12) for i in range(count)]
    try:
        return [conv(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse {text!r}: {exc}") from None


def _section_float(cp, section, key, default):
    if cp.has_option(section, key):
        try:
            return float(cp.get(section, key))
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be a number") from None
    return default


def load_config(path, output_dir: Optional[Path] = None) -> SweepConfig:
    """Parse and validate; raises ConfigError before anything runs."""
    cp = configparser.ConfigParser()
    try:
        read = cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not read:
        raise ConfigError(f"cannot read {path}")
    if not cp.has_section("sweep"):
        raise ConfigError("missing [sweep] section")
    version = cp.get("sweep", "schema_version", fallback=None)
    if version is None or version.strip() != str(SCHEMA_VERSION):
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    out = Path(output_dir) if output_dir else Path(cp.get("sweep", "output_dir", fallback="sweep_out"))
    workers = int(cp.get("sweep", "workers", fallback="1"))
    drop = cp.getboolean("sweep", "drop_inadmissible", fallback=False)

    d = SolveOptions()
    solver = SolveOptions(
        r_max=_section_float(cp, "solver", "r_max", d.r_max),
        rtol=_section_float(cp, "solver", "rtol", d.rtol),
        atol=_section_float(cp, "solver", "atol", d.atol),
    )
    q = QuadratureSpec()
    quad = QuadratureSpec(
        order=int(_section_float(cp, "quadrature", "order", q.order)),
        panels_per_decade=int(_section_float(cp, "quadrature", "panels_per_decade", q.panels_per_decade)),
    )

    cases = []
    for section in cp.sections():
        if not section.startswith("case"):
            if section not in ("sweep", "solver", "quadrature"):
                raise ConfigError(f"unknown section [{section}]")
            continue
        name = section[4:].strip() or f"case{len(cases)}"
        sec = cp[section]
        for key in ("n", "k"):
            if key not in sec:
                raise ConfigError(f"[{section}] needs {key}")
        ns = parse_values(sec["n"], integer=True)
        ks = parse_values(sec["k"], integer=True)
        ps = parse_values(sec["p"]) if "p" in sec else [None]
        rhos = parse_values(sec.get("rho", "1"))
        cmds = tuple(c.strip() for c in sec.get("commands", "exponents").split(",") if c.strip())
        bad = [c for c in cmds if c not in COMMANDS]
        if bad:
            raise ConfigError(f"[{section}] unknown commands {bad}")
        if NEEDS_PROFILE & set(cmds) and "solve" not in cmds:
            cmds = ("solve",) + cmds
        for n, k, p, rho in product(ns, ks, ps, rhos):
            try:
                _check_nk(n, k)
            except DomainError as exc:
                if drop:
                    continue
                raise ConfigError(f"[{section}] n={n}, k={k}: {exc}") from None
            if p is None and set(cmds) != {"exponents"}:
                raise ConfigError(f"[{section}] commands {cmds} need p")
            if p is not None:
                try:
                    Params(n, k, p)
                except DomainError as exc:
                    raise ConfigError(f"[{section}] {exc}") from None
            if not rho > 0:
                raise ConfigError(f"[{section}] rho must be positive")
            cases.append(Case(len(cases), name, n, k, p, rho, cmds))
    return SweepConfig(tuple(cases), out, solver, quad, max(1, workers))


def run_case(case: Case, cfg: SweepConfig) -> dict:
    """Run one case, write its directory and return its summary row."""
    case_dir = cfg.output_dir / f"case_{case.index:04d}"
    e = compute_exponents(case.n, case.k)
    row = {"case": case.index, "name": case.name, "n": case.n, "k": case.k, "p": case.p,
           "rho": case.rho, "p_se": e.p_se, "p_so": e.p_so, "p_star": e.p_star,
           "p_jl": e.p_jl, "p_2": e.p_2, "status": "ok"}
    report = {"case": case.index, "name": case.name, "commands": list(case.commands),
              "inputs": {"n": case.n, "k": case.k, "p": case.p, "rho": case.rho},
              "outputs": {"exponents": e.as_dict()}}
    profile = None
    try:
        if case.p is not None:
            params = Params(case.n, case.k, case.p)
            row["regime"] = classify_regime(params).tag.value
            report["outputs"]["regime"] = classify_regime(params).as_dict()
        if "solve" in case.commands:
            profile = solve_ivp(params, case.rho, cfg.solver)
            write_profile(profile, case_dir)
            row["termination"] = profile.termination.kind.value
            row["r_end"] = profile.r_end
            report["outputs"]["termination"] = profile.termination.as_dict()
            if profile.termination.kind is TerminationKind.STEP_UNDERFLOW:
                row["status"] = "step_underflow"
        for cmd in case.commands:
            if cmd in ("exponents", "solve") or profile is None:
                continue
            kw = {"quad": cfg.quad} if cmd in ("pohozaev", "wolff", "stability") else {}
            try:
                summary, table = analyses.run(cmd, profile, **kw)
            except NotApplicableError as exc:
                report["outputs"][cmd] = {"not_applicable": str(exc)}
                continue
            report["outputs"][cmd] = summary
            if table is not None:
                write_rows(case_dir / f"{cmd}.csv", table, analyses.table_columns(cmd))
            if cmd == "decay":
                row["decay_exponent"] = summary["exponent"]
                row["decay_target"] = summary["target_exponent"]
            elif cmd == "limitB":
                row["B_ratio"] = summary["B_estimate"] / summary["A_target"]
                row["B_oscillation"] = summary["oscillation_amplitude"]
            elif cmd == "pohozaev":
                row["pohozaev_gap"] = summary["max_relative_gap"]
            elif cmd == "wolff":
                row["wolff_lower_spread"] = summary["lower_spread"]
                row["wolff_upper_spread"] = summary["upper_spread"]
            elif cmd == "stability":
                row["min_normalized_Q"] = summary["min_normalized_Q"]
    except KHessianError as exc:
        row["status"] = f"error: {exc}"
        report["error"] = str(exc)
    report["provenance"] = provenance({"solver": cfg.solver.as_dict(), "quadrature": cfg.quad.as_dict()})
    write_json(case_dir / "report.json", report)
    return row


def _run_packed(args):
    return run_case(*args)


def run_sweep(cfg: SweepConfig) -> list:
    """Run every case and write ``summary.csv`` ordered by case index."""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(c, cfg) for c in cfg.cases]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_packed, jobs))
    else:
        rows = [_run_packed(j) for j in jobs]
    rows.sort(key=lambda r: r["case"])
    write_rows(cfg.output_dir / "summary.csv", rows, SUMMARY_COLUMNS)
    write_json(cfg.output_dir / "sweep.meta.json",
               {"cases": len(rows), "provenance": provenance(jsonable({
                   "solver": cfg.solver.as_dict(), "quadrature": cfg.quad.as_dict(),
                   "workers": cfg.workers}))})
    return rows
