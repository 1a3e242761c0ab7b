"""Named analyses of a stored profile, shared by the ``analyze`` and ``sweep`` commands.

Each analysis returns ``(summary, table)``: a JSON-ready dict and an
optional list of row dicts for a CSV table (``None`` when there is none).
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .asymptotics import analyze_intersections, fit_decay, limit_coefficient_B, wolff_bound_check
from .closed_forms import ClosedForm
from .errors import NotApplicableError
from .exponents import (ckn_weight_exponent, classify_regime, compute_exponents, is_close,
                        singular_stability_condition)
from .quadrature import QuadratureSpec
from .solver import RadialProfile, TerminationKind
from .variational import (hardy_cutoff, instability_witness_search, pohozaev_residual, q_sweep,
                          standard_family, tail_stability_check)

ANALYSES = ("decay", "limitB", "pohozaev", "wolff", "stability", "intersections")
SOLUTIONS = ("profile", "singular")
FAMILIES = ("standard", "hardy", "annular")

Q_COLUMNS = ("family", "param1", "param2", "Q", "normalized_Q")
WOLFF_COLUMNS = ("d", "W", "u", "u_over_W")
POHOZAEV_COLUMNS = ("R", "lhs", "rhs", "relative_gap")


def _require_reached(profile: RadialProfile, what: str):
    if profile.termination.kind is not TerminationKind.REACHED_RMAX:
        raise NotApplicableError(f"{what} needs a profile that reached r_max "
                                 f"(termination {profile.termination.kind.value})")


def decay(profile: RadialProfile, window: Optional[tuple] = None):
    _require_reached(profile, "decay fit")
    pr = profile.params
    e = compute_exponents(pr.n, pr.k)
    fit = fit_decay(profile, window)
    target = -pr.fast_decay if is_close(pr.p, e.p_so) else -pr.alpha
    out = fit.as_dict()
    out["target_exponent"] = target
    out["relative_deviation"] = abs(fit.exponent / target - 1.0)
    return out, None


def limit_b(profile: RadialProfile, tolerance: float = 0.05):
    return limit_coefficient_B(profile, tolerance).as_dict(), None


def default_pohozaev_radii(profile: RadialProfile) -> list:
    Rs = [R for R in (1.0, 5.0, 20.0) if R <= profile.r_end]
    return Rs or [profile.r_end]


def pohozaev(profile: RadialProfile, radii: Optional[Sequence[float]] = None,
             quad: QuadratureSpec = QuadratureSpec()):
    radii = list(radii) if radii else default_pohozaev_radii(profile)
    rows = [pohozaev_residual(profile, R, quad=quad).as_dict() for R in radii]
    return {"max_relative_gap": max(r["relative_gap"] for r in rows), "radii": radii}, rows


def default_wolff_radii(profile: RadialProfile) -> np.ndarray:
    hi = min(1e3, profile.r_end / 10.0)
    return np.geomspace(min(0.1, hi / 10.0), hi, 9)


def wolff(profile: RadialProfile, radii=None, quad: QuadratureSpec = QuadratureSpec()):
    _require_reached(profile, "Wolff check")
    radii = default_wolff_radii(profile) if radii is None else np.asarray(radii, dtype=float)
    res = wolff_bound_check(profile, radii, quad)
    return res.as_dict(), list(res.rows())


def stability(profile: RadialProfile, solution: str = "profile", family: str = "standard",
              quad: QuadratureSpec = QuadratureSpec()):
    """Q table over a test family; with the singular solution and the Hardy
    family this also runs the instability witness search."""
    pr = profile.params
    if solution not in SOLUTIONS:
        raise ValueError(f"solution must be one of {SOLUTIONS}")
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    fn = ClosedForm.singular(pr) if solution == "singular" else profile
    summary = {"solution": solution, "family": family,
               "singular_condition": singular_stability_condition(pr).as_dict(),
               "regime": classify_regime(pr).as_dict()}
    if family == "annular":
        r_max = profile.r_end
        rep = tail_stability_check(fn, pr, R=r_max * 1e-6, r_max=r_max, quad=quad)
        summary["tail"] = rep.as_dict()
        rows = [{"family": "AnnularBump", "param1": r["center"], "param2": r["width"],
                 "Q": r["Q"], "normalized_Q": r["normalized_Q"]} for r in rep.rows]
        return summary, rows
    if family == "hardy":
        a = ckn_weight_exponent(pr)
        fam = [hardy_cutoff(pr.n, a, e) for e in np.geomspace(1e-1, 1e-30, 30)]
        if solution == "singular":
            summary["witness"] = instability_witness_search(pr, fn, quad=quad).as_dict()
    else:
        if solution == "profile":
            _require_reached(profile, "stability sweep on the profile")
        fam = standard_family(pr, r_hi=min(100.0, profile.r_end / 2.0))
        if solution == "profile":
            fam = [phi for phi in fam if phi.support[1] <= profile.r_end]
    rows = q_sweep(fn, pr, fam, quad)
    summary["min_Q_over_scale"] = min(r["Q"] / r["scale"] for r in rows)
    summary["min_normalized_Q"] = min(r["normalized_Q"] for r in rows)
    return summary, [{c: r[c] for c in Q_COLUMNS} for r in rows]


def intersections(profile: RadialProfile, samples: int = 400):
    """Crossings of the profile with the singular solution on (r_1, r_end)."""
    pr = profile.params
    window = (float(profile.grid[1]), profile.r_end)
    rep = analyze_intersections(profile.as_function(extend_tail=False), ClosedForm.singular(pr),
                                window, samples)
    return rep.as_dict(), None


def run(name: str, profile: RadialProfile, **kw):
    fn = {"decay": decay, "limitB": limit_b, "pohozaev": pohozaev, "wolff": wolff,
          "stability": stability, "intersections": intersections}.get(name)
    if fn is None:
        raise ValueError(f"unknown analysis {name!r}; choose from {ANALYSES}")
    return fn(profile, **kw)


def table_columns(name: str):
    return {"pohozaev": POHOZAEV_COLUMNS, "wolff": WOLFF_COLUMNS, "stability": Q_COLUMNS}.get(name)

