"""Serialization of profiles and reports.

Reals are written with 17 significant digits in CSV and with ``repr`` in
JSON, both of which round-trip binary64 exactly.  JSON has no infinity, so
non-finite reals become the strings ``"inf"``, ``"-inf"`` and ``null`` for NaN.
"""

from __future__ import annotations

import csv
import datetime as _dt
import enum
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .exponents import Params
from .solver import RadialProfile, SolveOptions, Termination, TerminationKind

PROFILE_CSV = "profile.csv"
PROFILE_META = "profile.meta.json"
PROFILE_COLUMNS = ("r", "u", "du", "F")


def fmt_real(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if isinstance(x, enum.Enum):
        return str(x.value)
    return str(x)


def jsonable(obj):
    """Convert to plain JSON types; inf -> "inf", nan -> None."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    if is_dataclass(obj):
        return jsonable(asdict(obj))
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _real_from_json(x):
    if x is None:
        return math.nan
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    return float(x)


def provenance(options=None) -> dict:
    return {
        "tool": "khessian",
        "version": __version__,
        "options": jsonable(options) if options is not None else {},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_rows(path, rows, columns) -> Path:
    """CSV with a header line; reals at 17 significant digits, missing cells empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt_real(row.get(c)) for c in columns])
    return path


# -- profiles ----------------------------------------------------------------------

def profile_meta(profile: RadialProfile) -> dict:
    pr = profile.params
    return {
        "n": pr.n, "k": pr.k, "p": pr.p,
        "rho": profile.rho,
        "source": profile.source,
        "termination": profile.termination.as_dict(),
        "points": len(profile.grid),
        "provenance": provenance(profile.options.as_dict()),
    }


def write_profile(profile: RadialProfile, out_dir) -> tuple:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / PROFILE_CSV
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        for row in zip(profile.grid, profile.u, profile.du, profile.F):
            w.writerow(["%.17g" % v for v in row])
    meta_path = write_json(out / PROFILE_META, profile_meta(profile))
    return csv_path, meta_path


def read_profile(csv_path) -> RadialProfile:
    """Rebuild a profile from ``profile.csv`` and its sidecar ``profile.meta.json``."""
    csv_path = Path(csv_path)
    if csv_path.is_dir():
        csv_path = csv_path / PROFILE_CSV
    meta_path = csv_path.with_name(PROFILE_META)
    meta = json.loads(meta_path.read_text())
    with csv_path.open(newline="") as fh:
        rdr = csv.reader(fh)
        header = next(rdr)
        if tuple(header) != PROFILE_COLUMNS:
            raise ValueError(f"unexpected profile header {header}")
        cols = list(zip(*[[float(x) for x in row] for row in rdr]))
    opts_d = dict(meta["provenance"]["options"])
    opts = SolveOptions(**{k: (None if v is None else _real_from_json(v) if k in ("r_max", "rtol", "atol", "r_init")
                               else int(v)) for k, v in opts_d.items()})
    term = meta["termination"]
    return RadialProfile(
        params=Params(meta["n"], meta["k"], meta["p"]),
        rho=_real_from_json(meta["rho"]),
        grid=np.array(cols[0]), u=np.array(cols[1]), du=np.array(cols[2]), F=np.array(cols[3]),
        termination=Termination(TerminationKind(term["kind"]), _real_from_json(term["r"])),
        options=opts,
        source=meta.get("source", "solver"),
    )
