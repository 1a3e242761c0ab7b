"""Energy, weak form, second variation and integral identities.

All integrands are assembled from logarithms of their factors before
exponentiating, so test functions spread over many decades of r (the
Hardy cutoffs used for instability witnesses) do not overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .closed_forms import ClosedForm
from .errors import DomainError, NotApplicableError, QuadratureError
from .exponents import Params, ckn_best_constant, ckn_weight_exponent, compute_exponents, is_close
from .quadrature import QuadratureSpec, nodes_weights
from .solver import ProfileFunction, RadialProfile

__all__ = [
    "Family", "TestFunction", "origin_bump", "annular_bump", "hardy_cutoff",
    "energy_J", "EnergyResult", "weak_form_residual", "WeakFormResult",
    "stability_Q", "QResult", "q_sweep", "standard_family",
    "pohozaev_residual", "PohozaevResult", "energy_identity_residual",
    "EnergyIdentityRow", "instability_witness_search", "WitnessReport",
    "tail_stability_check", "TailStabilityReport", "ckn_best_constant",
]


# -- test functions ---------------------------------------------------------------

BUMP_PIECES = 16


class Family(str, enum.Enum):
    ORIGIN_BUMP = "OriginBump"
    ANNULAR_BUMP = "AnnularBump"
    HARDY_CUTOFF = "HardyCutoff"


def _bump_log(x):
    """log of exp(1 - 1/(1-x^2)) and of |d/dx| of it, for |x| < 1."""
    q = 1.0 - x * x
    logv = 1.0 - 1.0 / q
    with np.errstate(divide="ignore"):
        logd = logv + np.log(2.0 * np.abs(x)) - 2.0 * np.log(q)
    return logv, logd, -np.sign(x)


def _psi_log(x):
    """log of exp(-1/x) for x > 0 (and -inf otherwise)."""
    with np.errstate(divide="ignore"):
        return np.where(x > 0, -1.0 / np.where(x > 0, x, 1.0), -np.inf)


def _smoothstep(x):
    """C-infinity step from 0 (x <= 0) to 1 (x >= 1) and its derivative."""
    x = np.clip(x, 0.0, 1.0)
    la, lb = _psi_log(x), _psi_log(1.0 - x)
    m = np.maximum(la, lb)
    ea, eb = np.exp(la - m), np.exp(lb - m)
    s = ea / (ea + eb)
    # psi'(x) = psi(x)/x^2
    with np.errstate(divide="ignore", invalid="ignore"):
        ga = np.where(x > 0, 1.0 / np.where(x > 0, x * x, 1.0), 0.0)
        gb = np.where(x < 1, 1.0 / np.where(x < 1, (1 - x) ** 2, 1.0), 0.0)
    ds = s * (1.0 - s) * (ga + gb)
    return s, ds


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported radial test function.

    ``OriginBump(width)``: exp(1 - 1/(1 - (r/w)^2)) on [0, w).
    ``AnnularBump(center, width)``: the same profile in (r - c)/w.
    ``HardyCutoff(a, eps_inner, eps_outer)``: r^{-(n-2-2a)/2} eta(ln r), where
    eta rises smoothly from 0 to 1 over [ln eps_inner, ln eps_inner + 1] and
    falls back over [-ln eps_outer - 1, -ln eps_outer].
    """

    __test__ = False  # keep pytest from collecting this class

    family: Family
    param1: float
    param2: float = 0.0
    param3: float = 0.0
    n: int = 0

    def __post_init__(self):
        f = Family(self.family)
        object.__setattr__(self, "family", f)
        if f is Family.ORIGIN_BUMP:
            if not self.param1 > 0:
                raise DomainError("OriginBump width must be positive")
        elif f is Family.ANNULAR_BUMP:
            if not (self.param2 > 0 and self.param1 - self.param2 > 0):
                raise DomainError("AnnularBump needs 0 < width < center")
        else:
            if self.n < 3:
                raise DomainError("HardyCutoff needs the dimension n")
            if not (0 < self.param2 < 1 and 0 < self.param3 < 1):
                raise DomainError("HardyCutoff eps values must lie in (0, 1)")
            if self.param2 * self.param3 >= math.exp(-2.0):
                raise DomainError("HardyCutoff ramps overlap; need eps_inner*eps_outer < e^-2")

    # -- geometry ------------------------------------------------------------
    @property
    def support(self) -> tuple:
        f = self.family
        if f is Family.ORIGIN_BUMP:
            return (0.0, self.param1)
        if f is Family.ANNULAR_BUMP:
            return (self.param1 - self.param2, self.param1 + self.param2)
        return (self.param2, 1.0 / self.param3)

    @property
    def breakpoints(self) -> tuple:
        if self.family is Family.HARDY_CUTOFF:
            lo, hi = self.support
            return (lo * math.e, hi / math.e)
        # the bump profile is flat to all orders at its edges; uniform
        # pieces keep Gauss-Legendre accurate there
        lo, hi = self.support
        return tuple(np.linspace(lo, hi, BUMP_PIECES + 1)[1:-1])

    @property
    def hardy_beta(self) -> float:
        return (self.n - 2.0 - 2.0 * self.param1) / 2.0

    def describe(self) -> dict:
        names = {Family.ORIGIN_BUMP: ("width",),
                 Family.ANNULAR_BUMP: ("center", "width"),
                 Family.HARDY_CUTOFF: ("a", "eps_inner", "eps_outer")}[self.family]
        vals = (self.param1, self.param2, self.param3)
        d = {"family": self.family.value}
        d.update(dict(zip(names, vals)))
        return d

    def scaled(self, c: float) -> "ScaledTestFunction":
        return ScaledTestFunction(self, float(c))

    # -- evaluation ------------------------------------------------------------
    def log_parts(self, r):
        """(log phi, log |phi'|, sign phi') with -inf outside the support."""
        r = np.asarray(r, dtype=float)
        logv = np.full(r.shape, -np.inf)
        logd = np.full(r.shape, -np.inf)
        sgn = np.zeros(r.shape)
        lo, hi = self.support
        f = self.family
        if f is Family.HARDY_CUTOFF:
            inside = (r > lo) & (r < hi)
            if not np.any(inside):
                return logv, logd, sgn
            s = np.log(r[inside])
            up, dup = _smoothstep(s - math.log(lo))
            down, ddown = _smoothstep(math.log(hi) - s)
            eta = up * down
            deta = dup * down - up * ddown  # d/ds
            beta = self.hardy_beta
            with np.errstate(divide="ignore"):
                logv[inside] = -beta * s + np.log(eta)
                # phi' = r^{-beta-1} (deta - beta eta)
                g = deta - beta * eta
                logd[inside] = -(beta + 1.0) * s + np.log(np.abs(g))
            sgn[inside] = np.sign(g)
            return logv, logd, sgn
        if f is Family.ORIGIN_BUMP:
            w = self.param1
            inside = (r >= 0) & (r < w)
            x = r[inside] / w
        else:
            w = self.param2
            inside = (r > lo) & (r < hi)
            x = (r[inside] - self.param1) / w
        lv, ld, sg = _bump_log(x)
        logv[inside] = lv
        logd[inside] = ld - math.log(w)
        sgn[inside] = sg
        return logv, logd, sgn

    def __call__(self, r):
        """Return ``(phi, dphi)``."""
        logv, logd, sgn = self.log_parts(r)
        return np.exp(logv), sgn * np.exp(logd)


@dataclass(frozen=True)
class ScaledTestFunction:
    """c * phi for a base test function phi."""

    base: TestFunction
    factor: float

    @property
    def support(self):
        return self.base.support

    @property
    def breakpoints(self):
        return self.base.breakpoints

    def describe(self) -> dict:
        d = self.base.describe()
        d["factor"] = self.factor
        return d

    def log_parts(self, r):
        logv, logd, sgn = self.base.log_parts(r)
        if self.factor == 0:
            z = np.full(np.shape(logv), -np.inf)
            return z, z.copy(), np.zeros(np.shape(logv))
        lc = math.log(abs(self.factor))
        return logv + lc, logd + lc, sgn * math.copysign(1.0, self.factor)

    def __call__(self, r):
        logv, logd, sgn = self.log_parts(r)
        s0 = math.copysign(1.0, self.factor) if self.factor else 0.0
        return s0 * np.exp(logv), sgn * np.exp(logd)


def origin_bump(width: float) -> TestFunction:
    return TestFunction(Family.ORIGIN_BUMP, float(width))


def annular_bump(center: float, width: float) -> TestFunction:
    return TestFunction(Family.ANNULAR_BUMP, float(center), float(width))


def hardy_cutoff(n: int, a: float, eps_inner: float, eps_outer: Optional[float] = None) -> TestFunction:
    if eps_outer is None:
        eps_outer = eps_inner
    return TestFunction(Family.HARDY_CUTOFF, float(a), float(eps_inner), float(eps_outer), int(n))


# -- integration helpers -------------------------------------------------------------

def _as_function(source, params: Optional[Params] = None):
    if isinstance(source, RadialProfile):
        return ProfileFunction(source, extend_tail=False), source.params
    p = params if params is not None else getattr(source, "params", None)
    if p is None:
        raise DomainError("params are required for a bare radial function")
    return source, p


def _log_u_du(fn, r):
    u, du = fn(r)
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise DomainError("radial function must be nonnegative on the integration range")
    with np.errstate(divide="ignore"):
        return np.log(u), np.log(np.abs(du)), np.sign(du)


def _sum(w, logf, sign=None, what="integrand"):
    vals = np.exp(logf)
    if sign is not None:
        vals = vals * sign
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"{what} not finite", achieved=math.inf)
    return float(np.dot(w, vals))


def _nodes(a, b, quad, breakpoints=()):
    r, w = nodes_weights(a, b, quad, breakpoints)
    keep = r > 0
    return r[keep], w[keep]


# -- energy ----------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyResult:
    J: float
    gradient_term: float
    potential_term: float
    r_min: float
    r_max: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def energy_J(u_fn, params: Optional[Params] = None, r_max: float = 1e3,
             quad: QuadratureSpec = QuadratureSpec(), r_min: float = 0.0) -> EnergyResult:
    """J over (r_min, r_max): C/(k(k+1)) int |u'|^{k+1} r^{n-k} - 1/(p+1) int u^{p+1} r^{n-1}."""
    fn, pr = _as_function(u_fn, params)
    n, k, p = pr.n, pr.k, pr.p
    r, w = _nodes(r_min, r_max, quad)
    lu, ldu, _ = _log_u_du(fn, r)
    lr = np.log(r)
    grad = _sum(w, (n - k) * lr + (k + 1) * ldu, what="gradient integrand")
    pot = _sum(w, (n - 1) * lr + (p + 1) * lu, what="potential integrand")
    g = pr.binom / (k * (k + 1)) * grad
    v = pot / (p + 1)
    return EnergyResult(g - v, g, v, float(r_min), float(r_max))


# -- weak form ----------------------------------------------------------------------

@dataclass(frozen=True)
class WeakFormResult:
    value: float
    flux_term: float
    source_term: float
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.value) / self.scale if self.scale > 0 else 0.0

    def as_dict(self) -> dict:
        return {"value": self.value, "flux_term": self.flux_term,
                "source_term": self.source_term, "scale": self.scale,
                "relative": self.relative}


def weak_form_residual(u_fn, params: Optional[Params], phi, quad: QuadratureSpec = QuadratureSpec()) -> WeakFormResult:
    """int [(C/k) r^{n-k}|u'|^{k-1}u' phi' - r^{n-1} u^p phi] dr over supp phi."""
    fn, pr = _as_function(u_fn, params)
    n, k, p = pr.n, pr.k, pr.p
    lo, hi = phi.support
    r, w = _nodes(lo, hi, quad, phi.breakpoints)
    lphi, ldphi, sphi = phi.log_parts(r)
    lu, ldu, sdu = _log_u_du(fn, r)
    lr = np.log(r)
    flux_log = (n - k) * lr + k * ldu + ldphi
    src_log = (n - 1) * lr + p * lu + lphi
    flux = pr.binom / k * _sum(w, flux_log, sdu * sphi, "flux integrand")
    src = _sum(w, src_log, what="source integrand")
    scale = pr.binom / k * _sum(w, flux_log) + abs(src)
    return WeakFormResult(flux - src, flux, src, scale)


# -- second variation ----------------------------------------------------------------

@dataclass(frozen=True)
class QResult:
    Q: float
    gradient_term: float
    potential_term: float
    weighted_norm: float

    @property
    def scale(self) -> float:
        return abs(self.gradient_term) + abs(self.potential_term)

    @property
    def normalized(self) -> float:
        return self.Q / self.weighted_norm if self.weighted_norm > 0 else 0.0

    def as_dict(self) -> dict:
        return {"Q": self.Q, "gradient_term": self.gradient_term,
                "potential_term": self.potential_term, "weighted_norm": self.weighted_norm,
                "scale": self.scale, "normalized_Q": self.normalized}


def stability_Q(u_fn, params: Optional[Params], phi, quad: QuadratureSpec = QuadratureSpec()) -> QResult:
    """Q(phi) = C int r^{n-k}|u'|^{k-1} phi'^2 - p int r^{n-1} u^{p-1} phi^2.

    ``weighted_norm`` is int r^{n-1} u^{p-1} phi^2, so ``normalized`` is the
    Rayleigh quotient Q / ||phi||^2 in the potential-weighted norm.
    """
    fn, pr = _as_function(u_fn, params)
    n, k, p = pr.n, pr.k, pr.p
    lo, hi = phi.support
    r, w = _nodes(lo, hi, quad, phi.breakpoints)
    lphi, ldphi, _ = phi.log_parts(r)
    lu, ldu, _ = _log_u_du(fn, r)
    lr = np.log(r)
    grad = pr.binom * _sum(w, (n - k) * lr + (k - 1) * ldu + 2.0 * ldphi, what="gradient integrand")
    norm = _sum(w, (n - 1) * lr + (p - 1) * lu + 2.0 * lphi, what="potential integrand")
    pot = p * norm
    return QResult(grad - pot, grad, pot, norm)


def standard_family(params: Params, size: int = 50, r_lo: float = 0.1, r_hi: float = 100.0) -> list:
    """Annular bumps over [r_lo, r_hi] plus Hardy cutoffs with the matched weight.

    Roughly 60% of the members are annular bumps (log-spaced centres, three
    relative widths); the rest are Hardy cutoffs with a = p(k-1)/(p-k) and
    eps from 1e-1 down to 1e-12.
    """
    if size < 2:
        raise DomainError("family size must be at least 2")
    n_hardy = max(1, size * 2 // 5)
    n_bump = size - n_hardy
    fracs = (0.2, 0.5, 0.9)
    n_centres = math.ceil(n_bump / len(fracs))
    centres = np.geomspace(r_lo, r_hi, n_centres)
    bumps = [annular_bump(c, f * c) for c in centres for f in fracs][:n_bump]
    a = ckn_weight_exponent(params)
    hardy = [hardy_cutoff(params.n, a, e) for e in np.geomspace(1e-1, 1e-12, n_hardy)]
    return bumps + hardy


def q_sweep(u_fn, params: Optional[Params], family: Sequence, quad: QuadratureSpec = QuadratureSpec()) -> list:
    """Rows ``family,param1,param2,Q,normalized_Q`` in family order."""
    rows = []
    for phi in family:
        q = stability_Q(u_fn, params, phi, quad)
        rows.append({"family": phi.family.value, "param1": phi.param1, "param2": phi.param2,
                     "Q": q.Q, "normalized_Q": q.normalized, "scale": q.scale})
    return rows


# -- Pohozaev and energy identities ------------------------------------------------

@dataclass(frozen=True)
class PohozaevResult:
    R: float
    lhs: float
    rhs: float

    @property
    def relative_gap(self) -> float:
        m = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / m if m > 0 else 0.0

    def as_dict(self) -> dict:
        return {"R": self.R, "lhs": self.lhs, "rhs": self.rhs, "relative_gap": self.relative_gap}


def pohozaev_residual(source, R: float, params: Optional[Params] = None,
                      quad: QuadratureSpec = QuadratureSpec()) -> PohozaevResult:
    """Both sides of the Pohozaev identity on the ball of radius R.

    lhs = -((n-2k)/(k+1)) int_0^R r^{n-k}|u'|^{k+1}
          + (k/C)(n/(p+1)) int_0^R r^{n-1}u^{p+1}
    rhs = (k/(k+1)) R^{n-k+1}|u'(R)|^{k+1} + (k/((p+1)C)) R^n u(R)^{p+1}
    """
    fn, pr = _as_function(source, params)
    n, k, p, C = pr.n, pr.k, pr.p, pr.binom
    if not R > 0:
        raise DomainError("R must be positive")
    r, w = _nodes(0.0, R, quad)
    lu, ldu, _ = _log_u_du(fn, r)
    lr = np.log(r)
    I1 = _sum(w, (n - k) * lr + (k + 1) * ldu)
    I2 = _sum(w, (n - 1) * lr + (p + 1) * lu)
    uR, duR = (float(v) for v in fn(np.array(R)))
    lhs = -(n - 2 * k) / (k + 1) * I1 + k / C * n / (p + 1) * I2
    rhs = k / (k + 1) * R ** (n - k + 1) * abs(duR) ** (k + 1) + k / ((p + 1) * C) * R ** n * uR ** (p + 1)
    return PohozaevResult(float(R), lhs, rhs)


@dataclass(frozen=True)
class EnergyIdentityRow:
    R: float
    gradient_integral: float
    boundary_term: float
    source_integral: float

    @property
    def gap_with_boundary(self) -> float:
        return abs(self.gradient_integral + self.boundary_term - self.source_integral) / self.source_integral

    @property
    def gap_without_boundary(self) -> float:
        return abs(self.gradient_integral - self.source_integral) / self.source_integral

    def as_dict(self) -> dict:
        return {"R": self.R, "gradient_integral": self.gradient_integral,
                "boundary_term": self.boundary_term, "source_integral": self.source_integral,
                "gap_with_boundary": self.gap_with_boundary,
                "gap_without_boundary": self.gap_without_boundary}


def energy_identity_residual(source, R_sequence, params: Optional[Params] = None,
                             quad: QuadratureSpec = QuadratureSpec()) -> list:
    """Truncated energy identity at the Sobolev exponent.

    For each R compares int_0^R r^{n-k}|u'|^{k+1} + R^{n-k} u(R)|u'(R)|^k with
    (k/C) int_0^R r^{n-1} u^{p+1}.  Only p = p_so is accepted: elsewhere the
    global integrals do not both converge.
    """
    fn, pr = _as_function(source, params)
    e = compute_exponents(pr.n, pr.k)
    if not is_close(pr.p, e.p_so):
        raise NotApplicableError(f"energy identity needs p = p_so = {e.p_so}, got {pr.p}")
    n, k, p, C = pr.n, pr.k, pr.p, pr.binom
    rows = []
    for R in R_sequence:
        R = float(R)
        r, w = _nodes(0.0, R, quad)
        lu, ldu, _ = _log_u_du(fn, r)
        lr = np.log(r)
        grad = _sum(w, (n - k) * lr + (k + 1) * ldu)
        src = k / C * _sum(w, (n - 1) * lr + (p + 1) * lu)
        uR, duR = (float(v) for v in fn(np.array(R)))
        rows.append(EnergyIdentityRow(R, grad, R ** (n - k) * uR * abs(duR) ** k, src))
    return rows


# -- instability witnesses ---------------------------------------------------------

@dataclass(frozen=True)
class WitnessReport:
    found: bool
    best_Q_normalized: float
    witness: Optional[TestFunction]
    evaluations: tuple  # (eps, normalized Q) in evaluation order

    def as_dict(self) -> dict:
        return {"found": self.found, "best_Q_normalized": self.best_Q_normalized,
                "witness": self.witness.describe() if self.witness else None,
                "evaluations": [{"eps": e, "normalized_Q": q} for e, q in self.evaluations]}


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def instability_witness_search(params: Params, u_fn=None, eps_grid=None,
                               quad: QuadratureSpec = QuadratureSpec(),
                               refine_steps: int = 20) -> WitnessReport:
    """Minimise Q/||phi||^2 over HardyCutoff(a = p(k-1)/(p-k), eps, eps).

    The grid minimum is refined by golden-section search in ln eps between
    its neighbours.  ``found`` is true when the minimum is strictly negative;
    a nonnegative minimum is reported, not taken as proof of stability.
    """
    if u_fn is None:
        u_fn = ClosedForm.singular(params)
    if eps_grid is None:
        eps_grid = np.geomspace(1e-1, 1e-30, 30)
    eps_grid = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    a = ckn_weight_exponent(params)
    evals = []

    def value(eps):
        q = stability_Q(u_fn, params, hardy_cutoff(params.n, a, eps), quad).normalized
        evals.append((float(eps), q))
        return q

    vals = [value(e) for e in eps_grid]
    i = int(np.argmin(vals))
    best_eps, best = float(eps_grid[i]), vals[i]
    if 0 < i < len(eps_grid) - 1:
        lo, hi = math.log(eps_grid[i + 1]), math.log(eps_grid[i - 1])
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        f1, f2 = value(math.exp(x1)), value(math.exp(x2))
        for _ in range(refine_steps):
            if f1 < f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - _GOLDEN * (hi - lo)
                f1 = value(math.exp(x1))
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + _GOLDEN * (hi - lo)
                f2 = value(math.exp(x2))
        for e, q in evals:
            if q < best:
                best_eps, best = e, q
    found = best < 0
    return WitnessReport(found, float(best), hardy_cutoff(params.n, a, best_eps) if found else None,
                         tuple(evals))


# -- tail stability ----------------------------------------------------------------

@dataclass(frozen=True)
class TailStabilityReport:
    R: float
    r_max: float
    min_Q: float
    min_normalized_Q: float
    stability_radius: float  # inf when negative Q persists up to r_max
    negative_count: int
    rows: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"R": self.R, "r_max": self.r_max, "min_Q": self.min_Q,
                "min_normalized_Q": self.min_normalized_Q,
                "stability_radius": self.stability_radius,
                "negative_count": self.negative_count, "family_size": len(self.rows)}


def tail_stability_check(source, params: Optional[Params] = None, R: float = 1.0,
                         r_max: Optional[float] = None, family_size: int = 60,
                         quad: QuadratureSpec = QuadratureSpec(), tol: float = 1e-10) -> TailStabilityReport:
    """Q over annular bumps supported in (R, r_max).

    Centres are log-spaced and each centre carries several relative widths.
    The stability radius is the smallest inner support edge above which
    every sampled Q is >= -tol * scale.
    """
    fn, pr = _as_function(source, params)
    if r_max is None:
        if isinstance(source, RadialProfile):
            r_max = source.r_end
        else:
            raise DomainError("r_max is required for analytic sources")
    if not 0 < R < r_max:
        raise DomainError("need 0 < R < r_max")
    fracs = (0.1, 0.3, 0.6, 0.9)
    n_centres = max(1, math.ceil(family_size / len(fracs)))
    family = []
    for c in np.geomspace(R * 2.0, r_max / 2.0, n_centres):
        for f in fracs:
            w = f * c
            if c - w > R and c + w < r_max:
                family.append(annular_bump(c, w))
    family = family[:family_size]
    if not family:
        raise DomainError("no annular bump fits inside (R, r_max)")
    rows = []
    for phi in family:
        q = stability_Q(fn, pr, phi, quad)
        rows.append({"center": phi.param1, "width": phi.param2, "inner": phi.support[0],
                     "Q": q.Q, "normalized_Q": q.normalized, "scale": q.scale})
    neg = [r for r in rows if r["Q"] < -tol * r["scale"]]
    if not neg:
        radius = float(R)
    else:
        worst_inner = max(r["inner"] for r in neg)
        above = [r["inner"] for r in rows if r["inner"] > worst_inner]
        radius = float(min(above)) if above else math.inf
    return TailStabilityReport(float(R), float(r_max), min(r["Q"] for r in rows),
                               min(r["normalized_Q"] for r in rows), radius, len(neg), rows)
