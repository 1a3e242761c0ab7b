"""Analytic solutions of the radial equation and a residual evaluator.

The radial equation is

    -(1/k) C(n-1, k-1) (r^{n-k} |u'|^{k-1} u')' = r^{n-1} u^p,   r > 0.

Two explicit solutions are available: the singular power law
``u_s = A r^{-2k/(p-k)}`` (any p > p_se) and, at the Sobolev exponent, the
one-parameter family of regular bubbles.  Both are represented by
:class:`ClosedForm`, which is a *radial function*: calling it on radii returns
``(u, du)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NotApplicableError
from .exponents import Params, compute_exponents, is_close


def _pos_pow(base: float, expo: float, what: str) -> float:
    """base**expo for base > 0, evaluated as exp(expo*log(base))."""
    if not base > 0.0:
        raise DomainError(f"{what}: base {base!r} must be positive")
    return math.exp(expo * math.log(base))


def singular_coefficient_A(params: Params) -> float:
    """Prefactor A of the singular solution A r^{-2k/(p-k)}."""
    n, k, p = params.n, params.k, params.p
    q = 1.0 / (p - k)
    return (
        _pos_pow(params.binom / k, q, "C/k")
        * _pos_pow(2.0 * k / (p - k), k * q, "2k/(p-k)")
        * _pos_pow(n - 2.0 * p * k / (p - k), q, "n - 2pk/(p-k)")
    )


def critical_prefactor(params: Params) -> float:
    """(C(n-1,k-1)/k)^{1/(p-k)}: ratio between u(0) and the family parameter."""
    return _pos_pow(params.binom / params.k, 1.0 / (params.p - params.k), "C/k")


class Kind(str, enum.Enum):
    SINGULAR = "Singular"
    CRITICAL_REGULAR = "CriticalRegular"


@dataclass(frozen=True)
class ClosedForm:
    """Analytic radial solution.

    For ``Kind.SINGULAR`` only ``coeff_A`` is used; for
    ``Kind.CRITICAL_REGULAR`` the family parameter ``rho`` (the one appearing
    inside the bubble formula, *not* the centre value) is used.
    """

    kind: Kind
    params: Params
    coeff_A: Optional[float] = None
    rho: Optional[float] = None

    # -- construction -----------------------------------------------------
    @classmethod
    def singular(cls, params: Params) -> "ClosedForm":
        return cls(Kind.SINGULAR, params, coeff_A=singular_coefficient_A(params))

    @classmethod
    def critical(cls, params: Params, family_rho: Optional[float] = None,
                 center_value: Optional[float] = None) -> "ClosedForm":
        """Bubble at p = p_so, parameterised by ``family_rho`` or by ``center_value`` = u(0)."""
        e = compute_exponents(params.n, params.k)
        if not is_close(params.p, e.p_so):
            raise DomainError(
                f"critical family requires p = p_so = {e.p_so}, got p = {params.p}")
        if (family_rho is None) == (center_value is None):
            raise ValueError("give exactly one of family_rho, center_value")
        if center_value is not None:
            if not center_value > 0:
                raise DomainError("center_value must be positive")
            family_rho = center_value / critical_prefactor(params)
        if not family_rho > 0:
            raise DomainError("family_rho must be positive")
        return cls(Kind.CRITICAL_REGULAR, params, rho=float(family_rho))

    # -- properties ---------------------------------------------------------
    @property
    def center_value(self) -> float:
        if self.kind is Kind.SINGULAR:
            return math.inf
        return critical_prefactor(self.params) * self.rho

    def _bubble_consts(self):
        n, k = self.params.n, self.params.k
        a = k / (n ** (1.0 / k) * (n - 2 * k))
        a_rho = a * _pos_pow(self.rho, 2.0 * (k + 1) / (n - 2 * k), "rho")
        beta = (n - 2 * k) / (2.0 * k)
        return self.center_value, a_rho, beta

    # -- evaluation ---------------------------------------------------------
    def __call__(self, r):
        """Return ``(u, du)`` at radius/radii ``r``."""
        r = np.asarray(r, dtype=float)
        if self.kind is Kind.SINGULAR:
            if np.any(r <= 0):
                raise DomainError("singular solution is not defined at r <= 0")
            al = self.params.alpha
            u = self.coeff_A * np.exp(-al * np.log(r))
            return u, -al * u / r
        if np.any(r < 0):
            raise DomainError("radius must be nonnegative")
        c, a_rho, beta = self._bubble_consts()
        base = 1.0 + a_rho * r * r
        u = c * np.exp(-beta * np.log(base))
        du = -2.0 * beta * a_rho * r * u / base
        return u, du

    def d2u(self, r):
        r = np.asarray(r, dtype=float)
        u, du = self(r)
        if self.kind is Kind.SINGULAR:
            al = self.params.alpha
            return al * (al + 1.0) * u / (r * r)
        _, a_rho, beta = self._bubble_consts()
        base = 1.0 + a_rho * r * r
        # d/dr [-2 beta a r u / base]
        return -2.0 * beta * a_rho * (u / base + r * du / base
                                      - 2.0 * a_rho * r * r * u / (base * base))

    def source_mass(self, r):
        """F(r) = int_0^r s^{n-1} u^p ds, in closed form."""
        r = np.asarray(r, dtype=float)
        n, k, p = self.params.n, self.params.k, self.params.p
        if self.kind is Kind.SINGULAR:
            e = n - 2.0 * p * k / (p - k)
            rr = np.where(r > 0, r, 1.0)
            return np.where(r > 0, self.coeff_A ** p * np.exp(e * np.log(rr)) / e, 0.0)
        _, du = self(r)
        # integrated equation with zero flux at the origin
        return self.params.binom / k * r ** (n - k) * np.abs(du) ** k

    def describe(self) -> dict:
        d = {"kind": self.kind.value, "n": self.params.n, "k": self.params.k, "p": self.params.p}
        if self.kind is Kind.SINGULAR:
            d["coeff_A"] = self.coeff_A
        else:
            d["family_rho"] = self.rho
            d["center_value"] = self.center_value
        return d


def singular_solution(params: Params) -> ClosedForm:
    return ClosedForm.singular(params)


def critical_solution(params: Params, family_rho=None, center_value=None) -> ClosedForm:
    return ClosedForm.critical(params, family_rho=family_rho, center_value=center_value)


def eval_closed_form(cf: ClosedForm, r: float) -> tuple[float, float]:
    u, du = cf(r)
    return float(u), float(du)


def _flux_terms(fn: Callable, params: Params, r: float, h: Optional[float]):
    """u, u', and the two pieces of (r^{n-k}|u'|^{k-1}u')' expanded by the product rule."""
    n, k = params.n, params.k
    u, du = (float(v) for v in fn(r))
    ad = abs(du)
    d2 = getattr(fn, "d2u", None)
    if d2 is not None:
        ddu = float(d2(r))
    else:
        if h is None:
            h = max(1e-6, 1e-6 * r)
        if r - 2 * h <= 0:
            h = r / 4.0
        nodes = r + h * np.array([-2.0, -1.0, 1.0, 2.0])
        _, dus = fn(nodes)
        dus = np.asarray(dus, dtype=float)
        signs = np.sign(np.append(dus, du))
        if np.any(signs > 0) and np.any(signs < 0):
            raise NotApplicableError(f"u' changes sign within the stencil around r={r}")
        ddu = float((dus[0] - 8.0 * dus[1] + 8.0 * dus[2] - dus[3]) / (12.0 * h))
    t1 = (n - k) * r ** (n - k - 1) * ad ** (k - 1) * du
    t2 = r ** (n - k) * k * ad ** (k - 1) * ddu
    return u, du, t1, t2, nodes if d2 is None else None, h


def ode_residual(fn: Callable, params: Params, r: float, h: Optional[float] = None) -> float:
    """Residual of the radial equation for a radial function ``fn(r) -> (u, du)``.

    Returns ``-(1/k) C (r^{n-k}|u'|^{k-1}u')' - r^{n-1} u^p``.  When ``fn``
    has a ``d2u`` attribute the outer derivative is expanded analytically;
    otherwise a 5-point central difference of the flux is used with step
    ``max(1e-6, 1e-6 r)``.
    """
    if not r > 0:
        raise DomainError("residual is evaluated at r > 0 only")
    n, k, p, C = params.n, params.k, params.p, params.binom
    u, du, t1, t2, nodes, h = _flux_terms(fn, params, r, h)
    if nodes is None:
        flux_prime = t1 + t2
    else:
        _, dus = fn(nodes)
        dus = np.asarray(dus, dtype=float)
        g = nodes ** (n - k) * np.abs(dus) ** (k - 1) * dus
        flux_prime = (g[0] - 8.0 * g[1] + 8.0 * g[2] - g[3]) / (12.0 * h)
    return -(C / k) * flux_prime - r ** (n - 1) * abs(u) ** p * np.sign(u)


def ode_residual_scale(fn: Callable, params: Params, r: float, h: Optional[float] = None) -> float:
    """Sum of the magnitudes of the terms of the residual.

    The flux derivative is split by the product rule, so the scale is
    (C/k)(|t1| + |t2|) + r^{n-1}|u|^p.  For steep profiles the two flux
    pieces nearly cancel and are much larger than the source term.
    """
    if not r > 0:
        raise DomainError("residual is evaluated at r > 0 only")
    u, _, t1, t2, _, _ = _flux_terms(fn, params, r, h)
    return params.binom / params.k * (abs(t1) + abs(t2)) + r ** (params.n - 1) * abs(u) ** params.p
