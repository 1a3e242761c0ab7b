"""Tail behaviour of radial solutions.

Decay-rate fits, the limit coefficient of ``u r^{2k/(p-k)}``, crossings
between radial functions and the radial Wolff potential
``W(x) = int_0^inf (t^{2k-n} int_{B_t(x)} u^p dy)^{1/k} dt/t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import betainc, gammaln

from .closed_forms import singular_coefficient_A
from .errors import DomainError, NotApplicableError, QuadratureError, TooFewPointsError
from .exponents import Params, compute_exponents, is_close
from .quadrature import QuadratureSpec, _gauss_legendre, log_nodes_weights, integrate
from .solver import ProfileFunction, RadialProfile, TerminationKind

MIN_FIT_POINTS = 10


def _values(fn, r):
    out = fn(r)
    if isinstance(out, tuple):
        out = out[0]
    return np.asarray(out, dtype=float)


# -- decay fits -----------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    exponent: float
    coefficient: float
    window: tuple
    rms_residual: float
    points: int

    def as_dict(self) -> dict:
        return {"exponent": self.exponent, "coefficient": self.coefficient,
                "r_lo": self.window[0], "r_hi": self.window[1],
                "rms_residual": self.rms_residual, "points": self.points}


def fit_power_law(r, u, window) -> DecayFit:
    """Least-squares line through (ln r, ln u) for r in ``window``."""
    lo, hi = window
    if not 0 < lo < hi:
        raise DomainError(f"invalid window {window}")
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    sel = (r >= lo) & (r <= hi)
    if np.any(u[sel] <= 0):
        raise DomainError("u must be positive on the fit window")
    m = int(np.count_nonzero(sel))
    if m < MIN_FIT_POINTS:
        raise TooFewPointsError(f"only {m} nodes in window {window}, need {MIN_FIT_POINTS}")
    x, y = np.log(r[sel]), np.log(u[sel])
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + icpt)
    return DecayFit(float(slope), float(math.exp(icpt)), (float(lo), float(hi)),
                    float(np.sqrt(np.mean(resid ** 2))), m)


def tail_window(profile: RadialProfile, decades: float = 2.0) -> tuple:
    r_end = profile.r_end
    return (r_end * 10.0 ** (-decades), r_end)


def fit_decay(profile: RadialProfile, window: Optional[tuple] = None) -> DecayFit:
    if window is None:
        window = tail_window(profile)
    lo, hi = window
    if lo < profile.grid[0] or hi > profile.r_end:
        raise DomainError("fit window must lie inside the profile grid")
    return fit_power_law(profile.grid, profile.u, window)


# -- limit coefficient ----------------------------------------------------------

@dataclass(frozen=True)
class LimitEstimate:
    B_estimate: float
    A_target: float
    converged: bool
    max_deviation: float
    oscillation_amplitude: float
    window: tuple

    def as_dict(self) -> dict:
        return {"B_estimate": self.B_estimate, "A_target": self.A_target,
                "converged": self.converged, "max_deviation": self.max_deviation,
                "oscillation_amplitude": self.oscillation_amplitude,
                "r_lo": self.window[0], "r_hi": self.window[1]}


def limit_coefficient_B(profile: RadialProfile, tolerance: float = 0.05,
                        decades: float = 1.0) -> LimitEstimate:
    """Estimate lim u(r) r^{2k/(p-k)} from the last ``decades`` of the grid.

    ``max_deviation`` is max |u r^alpha / A - 1| over the window;
    ``oscillation_amplitude`` is half the spread of u r^alpha / A there.
    """
    pr = profile.params
    e = compute_exponents(pr.n, pr.k)
    if pr.p < e.p_so or is_close(pr.p, e.p_so):
        raise NotApplicableError(f"limit coefficient needs p > p_so = {e.p_so}")
    if profile.termination.kind is not TerminationKind.REACHED_RMAX:
        raise NotApplicableError("profile did not reach r_max")
    lo, hi = tail_window(profile, decades)
    sel = (profile.grid >= lo) & (profile.grid > 0)
    ratio_scaled = profile.u[sel] * profile.grid[sel] ** pr.alpha
    A = singular_coefficient_A(pr)
    B = float(np.median(ratio_scaled))
    rel = ratio_scaled / A
    return LimitEstimate(
        B_estimate=B,
        A_target=A,
        converged=bool(abs(B / A - 1.0) <= tolerance),
        max_deviation=float(np.max(np.abs(rel - 1.0))),
        oscillation_amplitude=float(0.5 * (rel.max() - rel.min())),
        window=(float(lo), float(hi)),
    )


# -- intersections -----------------------------------------------------------------

@dataclass(frozen=True)
class IntersectionReport:
    count: int
    radii: tuple
    sign: int  # sign of f - g on the first resolved sample
    min_relative_gap: float
    unresolved: int = 0  # samples with |f - g| below the tie tolerance

    def as_dict(self) -> dict:
        return {"count": self.count, "radii": [float(r) for r in self.radii], "sign": self.sign,
                "min_relative_gap": self.min_relative_gap, "unresolved": self.unresolved}


def analyze_intersections(f: Callable, g: Callable, window: tuple, samples: int = 400,
                          rtol: float = 1e-8, tie_rtol: float = 1e-9) -> IntersectionReport:
    """Sign changes of f - g on a log-uniform sample of ``window``.

    Each bracketed change is refined by bisection to relative width ``rtol``.
    Samples where |f - g| <= tie_rtol * max(|f|, |g|) carry no sign: two
    numerically computed profiles cannot be ordered below their own
    accuracy.  Tangential touches without a sign change are not counted;
    they show up as a small ``min_relative_gap``.
    """
    lo, hi = window
    r = np.geomspace(lo, hi, samples)
    fv, gv = _values(f, r), _values(g, r)
    diff = fv - gv
    scale = np.maximum(np.abs(fv), np.abs(gv))
    with np.errstate(invalid="ignore", divide="ignore"):
        relgap = np.where(scale > 0, np.abs(diff) / scale, 0.0)
    s = np.where(relgap > tie_rtol, np.sign(diff), 0.0)
    radii = []
    last_sign, last_r = 0, None
    for ri, si in zip(r, s):
        if si == 0:
            continue
        if last_sign != 0 and si != last_sign:
            radii.append(_bisect_sign(f, g, last_r, ri, last_sign, rtol))
        last_sign, last_r = si, ri
    nonzero = s[s != 0]
    return IntersectionReport(len(radii), tuple(radii),
                              int(nonzero[0]) if len(nonzero) else 0,
                              float(relgap.min()), int(np.count_nonzero(s == 0)))


def _bisect_sign(f, g, a, b, sign_a, rtol):
    while b - a > rtol * b:
        m = 0.5 * (a + b)
        d = float(_values(f, m) - _values(g, m))
        if d == 0:
            return m
        if np.sign(d) == sign_a:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def intersection_count(f: Callable, g: Callable, window: tuple, samples: int = 400,
                       tie_rtol: float = 1e-9) -> int:
    return analyze_intersections(f, g, window, samples, tie_rtol=tie_rtol).count


# -- Wolff potential ------------------------------------------------------------------

def sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^m in R^{m+1}."""
    return 2.0 * math.exp(0.5 * (m + 1) * math.log(math.pi) - gammaln(0.5 * (m + 1)))


def cap_fraction(n: int, cos_theta):
    """Fraction of S^{n-1} within polar angle theta of a pole.

    Equals int_0^theta sin^{n-2} / int_0^pi sin^{n-2}, written with the
    regularised incomplete beta function.
    """
    c = np.clip(np.asarray(cos_theta, dtype=float), -1.0, 1.0)
    half = 0.5 * betainc(0.5 * (n - 1), 0.5, 1.0 - c * c)
    return np.where(c >= 0, half, 1.0 - half)


def cap_area(s, d: float, t: float, n: int):
    """(n-1)-measure of the sphere |y| = s lying inside the ball B_t(x), |x| = d."""
    s = np.asarray(s, dtype=float)
    full = sphere_area(n - 1) * s ** (n - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (s * s + d * d - t * t) / (2.0 * s * d)
    frac = np.where(s + d <= t, 1.0,
                    np.where((s >= d + t) | (s <= d - t), 0.0, cap_fraction(n, c)))
    return full * frac


def _source_mass(fn, params: Params, r):
    r = np.asarray(r, dtype=float)
    sm = getattr(fn, "source_mass", None)
    if sm is not None:
        return np.asarray(sm(r), dtype=float)
    n, p = params.n, params.p
    spec = QuadratureSpec()
    out = np.zeros_like(r)
    for i, ri in enumerate(r.ravel()):
        if ri > 0:
            out.flat[i] = integrate(lambda s: s ** (n - 1) * np.maximum(_values(fn, s), 0.0) ** p,
                                    0.0, float(ri), spec)
    return out


def _ball_masses(fn, params: Params, d: float, ts: np.ndarray, spec: QuadratureSpec):
    """m(t) = int_{B_t(x)} u^p dy for |x| = d and every t in ``ts``."""
    n, p = params.n, params.p
    omega = sphere_area(n - 1)
    gx, gw = _gauss_legendre(spec.order)
    inner = np.maximum(ts - d, 0.0)
    full = omega * _source_mass(fn, params, inner)
    nodes, weights = [], []
    floor = d * 1e-8
    for t in ts:
        a = max(abs(t - d), floor)
        b = t + d
        panels = max(2, math.ceil(math.log10(b / a) * spec.panels_per_decade))
        edges = np.geomspace(a, b, panels + 1)
        lo, hi = edges[:-1, None], edges[1:, None]
        half = 0.5 * (hi - lo)
        nodes.append((lo + half * (gx + 1.0)).ravel())
        weights.append((half * gw).ravel())
    sizes = [len(x) for x in nodes]
    starts = np.cumsum([0] + sizes[:-1])
    s = np.concatenate(nodes)
    w = np.concatenate(weights)
    t_rep = np.repeat(ts, sizes)
    up = np.maximum(_values(fn, s), 0.0) ** p
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (s * s + d * d - t_rep * t_rep) / (2.0 * s * d)
    partial = np.add.reduceat(w * up * omega * s ** (n - 1) * cap_fraction(n, c), starts)
    return full + partial


def wolff_potential_radial(u_fn: Callable, params: Params, x_radius: float,
                           quad: QuadratureSpec = QuadratureSpec(), rtol: float = 1e-10,
                           t_min_factor: float = 1e-6) -> float:
    """Wolff potential W_{2k/(k+1), k+1}(u^p) at a point with |x| = ``x_radius``.

    The outer integral is split at d/2, d, 2d and integrated in ln t; above
    2d it is extended decade by decade until the power-law majorant of the
    remainder drops below ``rtol`` times the accumulated value, and that
    remainder is added analytically.
    """
    d = float(x_radius)
    if not d > 0:
        raise DomainError("x_radius must be positive")
    n, k = params.n, params.k
    ppd = quad.panels_per_decade

    def g(ts):
        m = _ball_masses(u_fn, params, d, ts, quad)
        return np.power(np.maximum(ts ** (2 * k - n) * m, 0.0), 1.0 / k)

    pieces = [(d * t_min_factor, 0.5 * d), (0.5 * d, d), (d, 2.0 * d)]
    total = 0.0
    for a, b in pieces:
        panels = max(quad.min_panels, math.ceil(math.log10(b / a) * ppd))
        ts, ws = log_nodes_weights(a, b, panels, quad.order)
        vals = g(ts)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(f"Wolff integrand not finite for d={d}", achieved=math.inf)
        total += float(np.dot(ws, vals))
    lo = 2.0 * d
    remainder = math.inf
    for _ in range(12):
        hi = lo * 100.0
        ts, ws = log_nodes_weights(lo, hi, 2 * ppd, quad.order)
        vals = g(ts)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(f"Wolff integrand not finite for d={d}", achieved=math.inf)
        total += float(np.dot(ws, vals))
        g_end, g_mid = g(np.array([hi, hi / 10.0]))
        if g_end <= 0.0:
            remainder = 0.0
            break
        slope = math.log(g_mid / g_end) / math.log(10.0)
        if slope > 0:
            remainder = g_end / slope
            if remainder <= rtol * total:
                break
        lo = hi
    else:
        raise QuadratureError(f"Wolff tail did not converge at d={d}",
                              achieved=remainder / total if total > 0 else math.inf)
    return total + remainder


@dataclass(frozen=True)
class WolffResult:
    radii: np.ndarray
    W: np.ndarray
    u: np.ndarray
    u_inf: float
    lower_ratio: float
    upper_ratio: float
    lower_spread: float
    upper_spread: float
    tail_extended: bool = False

    def as_dict(self) -> dict:
        return {"lower_ratio": self.lower_ratio, "upper_ratio": self.upper_ratio,
                "lower_spread": self.lower_spread, "upper_spread": self.upper_spread,
                "u_inf": self.u_inf, "tail_extended": self.tail_extended}

    def rows(self):
        for d, w, u in zip(self.radii, self.W, self.u):
            yield {"d": d, "W": w, "u": u, "u_over_W": u / w if w > 0 else math.inf}


def wolff_bound_check(profile: RadialProfile, radii, quad: QuadratureSpec = QuadratureSpec()) -> WolffResult:
    """Evaluate both sides of the two-sided Wolff bound along ``radii``.

    ``lower_ratio`` = min u/W and ``upper_ratio`` = max u/(u_inf + W), where
    u_inf is the value at the last grid node.  The spreads are max/min of
    each ratio over the radii.
    """
    if np.any(profile.u <= 0):
        raise DomainError("Wolff bound check needs a positive profile")
    fn = ProfileFunction(profile)
    radii = np.asarray(radii, dtype=float)
    W = np.array([wolff_potential_radial(fn, profile.params, d, quad) for d in radii])
    u = _values(fn, radii)
    u_inf = float(profile.u[-1])
    low = u / W
    up = u / (u_inf + W)
    return WolffResult(radii, W, u, u_inf, float(low.min()), float(up.max()),
                       float(low.max() / low.min()), float(up.max() / up.min()),
                       fn.tail_extended)
