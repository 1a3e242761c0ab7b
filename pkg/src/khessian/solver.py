"""Regular initial-value problem for the radial equation.

The second-order equation is integrated as the first-order system

    u' = -[(k / C) F / r^{n-k}]^{1/k},     F' = r^{n-1} u^p,

where ``F(r) = int_0^r s^{n-1} u^p ds`` is the cumulative source.  Writing
the flux through F removes the degeneracy of ``|u'|^{k-1}`` at the origin:
u' is an algebraic function of (r, F).  The integrator is an embedded
Dormand-Prince 5(4) pair with the step capped at 0.1 r, started from the
two-term series at a small radius.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DomainError
from .exponents import Params

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# difference between 5th and embedded 4th order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

MAX_STEP_FRACTION = 0.1
UNDERFLOW_FRACTION = 1e-14


class TerminationKind(str, enum.Enum):
    REACHED_RMAX = "ReachedRmax"
    ZERO_CROSSING = "ZeroCrossing"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    r: float

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "r": self.r}


@dataclass(frozen=True)
class SolveOptions:
    """Integrator settings.

    ``r_init`` defaults to ``1e-6`` times the scaling length
    ``rho^{-(p-k)/(2k)}``.  ``log_uniform`` > 0 resamples the output onto that
    many log-spaced radii (plus the origin) instead of the adaptive nodes.
    """

    r_max: float = 1e3
    rtol: float = 1e-10
    atol: float = 1e-12
    r_init: Optional[float] = None
    max_steps: int = 200_000
    log_uniform: int = 0

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError("tolerances must be positive")
        if not self.r_max > 0:
            raise DomainError("r_max must be positive")
        if self.r_init is not None and not 0 < self.r_init < self.r_max:
            raise DomainError("need 0 < r_init < r_max")
        if self.max_steps < 1 or self.log_uniform < 0:
            raise DomainError("max_steps must be positive and log_uniform nonnegative")

    def as_dict(self) -> dict:
        return {
            "r_max": self.r_max,
            "rtol": self.rtol,
            "atol": self.atol,
            "r_init": self.r_init,
            "max_steps": self.max_steps,
            "log_uniform": self.log_uniform,
        }


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RadialProfile:
    """A computed radial solution on a strictly increasing grid.

    ``du`` is never differenced from ``u``; it is obtained from the
    integrated equation ``|u'|^k = (k/C) F / r^{n-k}``.
    """

    params: Params
    rho: float
    grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    F: np.ndarray
    termination: Termination
    options: SolveOptions = field(default_factory=SolveOptions)
    source: str = "solver"

    def __post_init__(self):
        for name in ("grid", "u", "du", "F"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        m = len(self.grid)
        if not (len(self.u) == len(self.du) == len(self.F) == m) or m < 2:
            raise ValueError("profile arrays must have equal length >= 2")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")

    @property
    def r_end(self) -> float:
        return float(self.grid[-1])

    @property
    def length_scale(self) -> float:
        return scaling_length(self.params, self.rho)

    def interpolate(self, r):
        return interpolate(self, r)

    def as_function(self, extend_tail: bool = True) -> "ProfileFunction":
        return ProfileFunction(self, extend_tail=extend_tail)

    @classmethod
    def from_closed_form(cls, cf, grid) -> "RadialProfile":
        """Sample an analytic solution (anything with ``__call__`` and ``source_mass``)."""
        grid = np.asarray(grid, dtype=float)
        u, du = cf(grid)
        F = cf.source_mass(grid)
        rho = float(u[0]) if grid[0] == 0 else math.nan
        return cls(cf.params, rho, grid, u, du, F,
                   Termination(TerminationKind.REACHED_RMAX, float(grid[-1])),
                   SolveOptions(r_max=float(grid[-1])), source="closed_form")


def scaling_length(params: Params, rho: float) -> float:
    """Radius over which the solution with u(0) = rho changes by O(1)."""
    return rho ** (-(params.p - params.k) / (2.0 * params.k))


def _derivative_from_mass(params: Params, r, F):
    """u' from the integrated equation; zero at the origin."""
    n, k = params.n, params.k
    r = np.asarray(r, dtype=float)
    F = np.asarray(F, dtype=float)
    rr = np.where(r > 0, r, 1.0)
    val = -np.power(np.maximum(k / params.binom * F / rr ** (n - k), 0.0), 1.0 / k)
    return np.where(r > 0, val, 0.0)


def solve_ivp(params: Params, rho: float, opts: Optional[SolveOptions] = None) -> RadialProfile:
    """Integrate the regular problem u(0) = rho, u'(0) = 0 outward.

    Stops at ``opts.r_max``, at the first zero of u (located by bisection
    of the last step to ``|u| <= atol``), or when the step size underflows.
    """
    if opts is None:
        opts = SolveOptions()
    if not rho > 0 or not math.isfinite(rho):
        raise DomainError(f"center value rho must be positive, got {rho}")
    n, k, p = params.n, params.k, params.p
    kc = k / params.binom
    inv_k = 1.0 / k
    nk = n - k
    n1 = n - 1
    rtol, atol = opts.rtol, opts.atol

    def rhs(r, u, F):
        up = u ** p if u > 0.0 else 0.0
        return -((kc * F / r ** nk) ** inv_k), r ** n1 * up

    def step(r, u, F, ku0, kF0, h):
        ku = [ku0]
        kF = [kF0]
        for i in range(1, 7):
            a = _A[i]
            uu = u + h * sum(a[j] * ku[j] for j in range(i))
            FF = F + h * sum(a[j] * kF[j] for j in range(i))
            du_i, dF_i = rhs(r + _C[i] * h, uu, FF)
            ku.append(du_i)
            kF.append(dF_i)
        # FSAL: stage 7 is evaluated at the 5th-order solution
        u_new = u + h * sum(_B[j] * ku[j] for j in range(6))
        F_new = F + h * sum(_B[j] * kF[j] for j in range(6))
        eu = h * sum(_E[j] * ku[j] for j in range(7))
        eF = h * sum(_E[j] * kF[j] for j in range(7))
        return u_new, F_new, eu, eF, ku[6], kF[6]

    length = scaling_length(params, rho)
    r0 = opts.r_init if opts.r_init is not None else 1e-6 * length
    r0 = min(r0, 0.5 * opts.r_max)
    c2 = 0.5 * (k * rho ** p / (n * params.binom)) ** inv_k
    u = rho - c2 * r0 * r0
    F = rho ** p * r0 ** n / n
    if not F > 0:
        raise DomainError(
            f"series start underflows (rho^p r_init^n / n = 0); increase r_init for n={n}")

    rs, us, Fs = [0.0, r0], [rho, u], [0.0, F]
    r = r0
    h = 0.01 * r0
    ku, kF = rhs(r, u, F)
    term = None
    steps = 0
    while term is None:
        if r >= opts.r_max:
            term = Termination(TerminationKind.REACHED_RMAX, r)
            break
        if steps >= opts.max_steps:
            term = Termination(TerminationKind.STEP_UNDERFLOW, r)
            break
        h = min(h, MAX_STEP_FRACTION * r)
        last = False
        if r + h >= opts.r_max:
            h = opts.r_max - r
            last = True
        if h < UNDERFLOW_FRACTION * r:
            term = Termination(TerminationKind.STEP_UNDERFLOW, r)
            break
        u_new, F_new, eu, eF, ku_new, kF_new = step(r, u, F, ku, kF, h)
        su = atol + rtol * max(abs(u), abs(u_new))
        sF = rtol * max(abs(F), abs(F_new)) + 1e-300
        err = max(abs(eu) / su, abs(eF) / sF)
        steps += 1
        if not math.isfinite(err) or err > 1.0:
            fac = 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h *= fac
            continue
        if u_new <= 0.0:
            r, u, F = _bisect_crossing(step, r, u, F, ku, kF, h, atol)
            rs.append(r)
            us.append(u)
            Fs.append(F)
            term = Termination(TerminationKind.ZERO_CROSSING, r)
            break
        r = opts.r_max if last else r + h
        u, F, ku, kF = u_new, F_new, ku_new, kF_new
        rs.append(r)
        us.append(u)
        Fs.append(F)
        h *= min(5.0, 0.9 * err ** -0.2) if err > 0 else 5.0

    grid = np.array(rs)
    F_arr = np.array(Fs)
    prof = RadialProfile(params, float(rho), grid, np.array(us),
                         _derivative_from_mass(params, grid, F_arr), F_arr, term, opts)
    if opts.log_uniform:
        prof = resample_log_uniform(prof, opts.log_uniform)
    return prof


def _bisect_crossing(step, r, u, F, ku, kF, h, atol):
    """Shrink the final step until |u| <= atol at its end point."""
    lo, hi = 0.0, h
    best = (r + h, *step(r, u, F, ku, kF, h)[:2])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        u_mid, F_mid = step(r, u, F, ku, kF, mid)[:2]
        best = (r + mid, u_mid, F_mid)
        if abs(u_mid) <= atol:
            break
        if u_mid > 0:
            lo = mid
        else:
            hi = mid
    return best


# -- interpolation -----------------------------------------------------------

def _hermite(x0, x1, y0, y1, d0, d1, x):
    h = x1 - x0
    t = (x - x0) / h
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1)


def _limit_slopes(d0, d1, secant):
    """Fritsch-Carlson limiter so the cubic stays monotone on each interval."""
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(secant != 0, d0 / secant, 0.0)
        b = np.where(secant != 0, d1 / secant, 0.0)
    d0 = np.where(a < 0, 0.0, d0)
    d1 = np.where(b < 0, 0.0, d1)
    a = np.maximum(a, 0.0)
    b = np.maximum(b, 0.0)
    s = a * a + b * b
    tau = np.where(s > 9.0, 3.0 / np.sqrt(np.where(s > 0, s, 1.0)), 1.0)
    return d0 * tau, d1 * tau


def _monotone_hermite(r, r0, r1, y0, y1, d0, d1):
    """Cubic Hermite in log-log coordinates where both ends are positive, else in (r, y)."""
    out = np.empty_like(r)
    loglog = (r0 > 0) & (y0 > 0) & (y1 > 0)
    if np.any(loglog):
        i = loglog
        X0, X1 = np.log(r0[i]), np.log(r1[i])
        Y0, Y1 = np.log(y0[i]), np.log(y1[i])
        D0 = r0[i] * d0[i] / y0[i]
        D1 = r1[i] * d1[i] / y1[i]
        D0, D1 = _limit_slopes(D0, D1, (Y1 - Y0) / (X1 - X0))
        out[i] = np.exp(_hermite(X0, X1, Y0, Y1, D0, D1, np.log(r[i])))
    j = ~loglog
    if np.any(j):
        D0, D1 = _limit_slopes(d0[j], d1[j], (y1[j] - y0[j]) / (r1[j] - r0[j]))
        out[j] = _hermite(r0[j], r1[j], y0[j], y1[j], D0, D1, r[j])
    return out


def interpolate(profile: RadialProfile, r):
    """Values ``(u, du)`` at radii ``r`` inside the grid.

    u uses a monotone cubic Hermite interpolant built from the stored exact
    derivatives; du is recomputed from the interpolated source mass F, whose
    derivative r^{n-1} u^p is also known exactly.  Grid nodes return the
    stored values unchanged.
    """
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    g = profile.grid
    if np.any(r < g[0]) or np.any(r > g[-1]) or np.any(~np.isfinite(r)):
        raise DomainError(f"radius outside profile grid [{g[0]}, {g[-1]}]")
    n, p = profile.params.n, profile.params.p
    i = np.clip(np.searchsorted(g, r, side="right") - 1, 0, len(g) - 2)
    exact_left = g[i] == r
    exact_right = g[i + 1] == r
    r0, r1 = g[i], g[i + 1]
    u0, u1 = profile.u[i], profile.u[i + 1]
    u = _monotone_hermite(r, r0, r1, u0, u1, profile.du[i], profile.du[i + 1])
    Fd = lambda rr, uu: rr ** (n - 1) * np.maximum(uu, 0.0) ** p
    F = _monotone_hermite(r, r0, r1, profile.F[i], profile.F[i + 1], Fd(r0, u0), Fd(r1, u1))
    du = _derivative_from_mass(profile.params, r, F)
    u = np.where(exact_left, u0, np.where(exact_right, u1, u))
    du = np.where(exact_left, profile.du[i], np.where(exact_right, profile.du[i + 1], du))
    if scalar:
        return float(u[0]), float(du[0])
    return u, du


def interpolate_mass(profile: RadialProfile, r):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    g = profile.grid
    if np.any(r < g[0]) or np.any(r > g[-1]):
        raise DomainError("radius outside profile grid")
    n, p = profile.params.n, profile.params.p
    i = np.clip(np.searchsorted(g, r, side="right") - 1, 0, len(g) - 2)
    r0, r1 = g[i], g[i + 1]
    d0 = r0 ** (n - 1) * np.maximum(profile.u[i], 0.0) ** p
    d1 = r1 ** (n - 1) * np.maximum(profile.u[i + 1], 0.0) ** p
    F = _monotone_hermite(r, r0, r1, profile.F[i], profile.F[i + 1], d0, d1)
    F = np.where(g[i] == r, profile.F[i], np.where(g[i + 1] == r, profile.F[i + 1], F))
    return F


def resample_log_uniform(profile: RadialProfile, count: int) -> RadialProfile:
    """Profile on the origin plus ``count`` log-spaced radii spanning the grid."""
    if count < 2:
        raise DomainError("need at least two resampling radii")
    lo = profile.grid[1] if profile.grid[0] == 0 else profile.grid[0]
    radii = np.geomspace(lo, profile.grid[-1], count)
    radii[0], radii[-1] = lo, profile.grid[-1]
    if profile.grid[0] == 0:
        radii = np.concatenate([[0.0], radii])
    u, du = interpolate(profile, radii)
    F = interpolate_mass(profile, radii)
    return replace(profile, grid=radii, u=u, du=du, F=F)


def rescale(profile: RadialProfile, mu: float) -> RadialProfile:
    """Profile of u_mu(r) = mu^{2k/(p-k)} u(mu r) on the grid divided by mu."""
    if not mu > 0:
        raise DomainError("scaling factor mu must be positive")
    pr = profile.params
    a = pr.alpha
    su = mu ** a
    opts = replace(profile.options, r_max=profile.options.r_max / mu,
                   r_init=None if profile.options.r_init is None else profile.options.r_init / mu)
    return replace(
        profile,
        rho=profile.rho * su,
        grid=profile.grid / mu,
        u=profile.u * su,
        du=profile.du * mu ** (a + 1.0),
        F=profile.F * mu ** (a * pr.p - pr.n),
        termination=Termination(profile.termination.kind, profile.termination.r / mu),
        options=opts,
    )


class ProfileFunction:
    """Radial function backed by a profile.

    Inside the grid values come from :func:`interpolate`.  With
    ``extend_tail`` the profile is continued beyond its last node by the
    power law fitted to the last decade of nodes (``tail_extended`` records
    whether this was ever needed).
    """

    def __init__(self, profile: RadialProfile, extend_tail: bool = True):
        self.profile = profile
        self.params = profile.params
        self.extend_tail = extend_tail
        self.tail_extended = False
        g = profile.grid
        r_end = g[-1]
        sel = (g >= r_end / 10.0) & (g > 0) & (profile.u > 0)
        if extend_tail and np.count_nonzero(sel) >= 2:
            slope, icpt = np.polyfit(np.log(g[sel]), np.log(profile.u[sel]), 1)
            self.tail_exponent = -float(slope)
            self.tail_coefficient = float(np.exp(icpt))
        else:
            self.tail_exponent = math.nan
            self.tail_coefficient = math.nan
        # pin the tail to the last node so it is continuous
        if np.isfinite(self.tail_exponent) and profile.u[-1] > 0:
            self.tail_coefficient = float(profile.u[-1] * r_end ** self.tail_exponent)

    def _split(self, r):
        r = np.asarray(r, dtype=float)
        inside = r <= self.profile.r_end
        if not np.all(inside):
            if not self.extend_tail or not np.isfinite(self.tail_exponent):
                raise DomainError("radius beyond profile grid and no tail extension")
            self.tail_extended = True
        return r, inside

    def __call__(self, r):
        r, inside = self._split(r)
        u = np.empty(r.shape)
        du = np.empty(r.shape)
        if np.any(inside):
            u[inside], du[inside] = interpolate(self.profile, r[inside])
        out = ~inside
        if np.any(out):
            b, c = self.tail_exponent, self.tail_coefficient
            u[out] = c * r[out] ** (-b)
            du[out] = -b * u[out] / r[out]
        return u, du

    def source_mass(self, r):
        r, inside = self._split(r)
        F = np.empty(r.shape)
        if np.any(inside):
            F[inside] = interpolate_mass(self.profile, r[inside])
        out = ~inside
        if np.any(out):
            n, p = self.params.n, self.params.p
            b, c = self.tail_exponent, self.tail_coefficient
            e = n - b * p
            R = self.profile.r_end
            F_end = self.profile.F[-1]
            if abs(e) < 1e-12:
                F[out] = F_end + c ** p * np.log(r[out] / R)
            else:
                F[out] = F_end + c ** p * (r[out] ** e - R ** e) / e
        return F
