"""Critical exponents of the radial k-Hessian equation and regime classification.

All functions are pure and take plain numbers.  ``p_jl`` is ``math.inf``
whenever ``n <= 2k + 8``; callers test for it with ``math.isinf``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError

#: relative tolerance used when deciding p == p_so, p == p_jl, ...
REL_TOL = 1e-12


def _check_nk(n: int, k: int) -> None:
    if int(n) != n or int(k) != k:
        raise DomainError(f"n and k must be integers, got n={n!r}, k={k!r}")
    if n < 3:
        raise DomainError(f"dimension n must be >= 3, got {n}")
    if k < 2:
        raise DomainError(f"Hessian order k must be >= 2, got {k}")
    if 2 * k >= n:
        raise DomainError(f"need 2k < n, got n={n}, k={k}")


def is_close(a: float, b: float, rel_tol: float = REL_TOL) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return math.isclose(a, b, rel_tol=rel_tol, abs_tol=0.0)


@dataclass(frozen=True)
class Params:
    """The triple (n, k, p) of the equation.

    Construction validates the standing assumptions n >= 3, 2 <= k < n/2
    and p > nk/(n - 2k).
    """

    n: int
    k: int
    p: float
    binom: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_nk(self.n, self.k)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "p", float(self.p))
        p_se = serrin_exponent(self.n, self.k)
        if not self.p > p_se or not math.isfinite(self.p):
            raise DomainError(
                f"p={self.p} must exceed the Serrin exponent nk/(n-2k)={p_se} "
                f"for n={self.n}, k={self.k}"
            )
        object.__setattr__(self, "binom", float(math.comb(self.n - 1, self.k - 1)))

    @property
    def alpha(self) -> float:
        """Decay exponent 2k/(p-k) of the singular solution."""
        return 2.0 * self.k / (self.p - self.k)

    @property
    def fast_decay(self) -> float:
        """Exponent (n-2k)/k of the fundamental-solution decay."""
        return (self.n - 2.0 * self.k) / self.k

    def exponents(self) -> "ExponentSet":
        return compute_exponents(self.n, self.k)


@dataclass(frozen=True)
class ExponentSet:
    n: int
    k: int
    p_se: float
    p_so: float
    p_star: float
    p_jl: float
    p_2: Optional[float]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "p_se": self.p_se,
            "p_so": self.p_so,
            "p_star": self.p_star,
            "p_jl": self.p_jl,
            "p_2": self.p_2,
        }


class RegimeTag(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL_PRE_JL = "SupercriticalPreJL"
    JL_STABLE = "JLStable"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    at_or_above_p_star: bool
    at_or_below_p_2: bool

    def as_dict(self) -> dict:
        return {
            "tag": self.tag.value,
            "p_ge_p_star": self.at_or_above_p_star,
            "p_le_p_2": self.at_or_below_p_2,
        }


def serrin_exponent(n: int, k: int) -> float:
    return n * k / (n - 2 * k)


def jl_threshold_dimension(k: int) -> float:
    """Dimension 2k(k^2+6k+1)/(k-1)^2 at which p_star and p_jl coincide."""
    return 2.0 * k * (k * k + 6 * k + 1) / (k - 1) ** 2


def _jl_roots(n: int, k: int) -> tuple[float, float]:
    lin = k * (n * n - 2 * (k + 3) * n + 4 * k)
    root = 4 * k * math.sqrt(2 * (k + 1) * n - 4 * k)
    den = (n - 2 * k) * (n - 2 * k - 8)
    return (lin + root) / den, (lin - root) / den


def compute_exponents(n: int, k: int) -> ExponentSet:
    """Serrin, Sobolev, p_star, Joseph-Lundgren exponents and the lower root p_2.

    >>> e = compute_exponents(9, 2)
    >>> e.p_se, e.p_so, e.p_star, e.p_jl
    (3.6, 4.4, 5.2, inf)
    """
    _check_nk(n, k)
    n, k = int(n), int(k)
    d = n - 2 * k
    p_se = n * k / d
    p_so = (n + 2) * k / d
    p_star = k * (n + 2 * k) / d
    if n <= 2 * k + 8:
        p_jl, p_2 = math.inf, None
    else:
        p_jl, p_2 = _jl_roots(n, k)
    return ExponentSet(n, k, p_se, p_so, p_star, p_jl, p_2)


def classify_regime(params: Params, rel_tol: float = REL_TOL) -> Regime:
    e = compute_exponents(params.n, params.k)
    p = params.p
    if is_close(p, e.p_so, rel_tol):
        tag = RegimeTag.CRITICAL
    elif p < e.p_so:
        tag = RegimeTag.SUBCRITICAL
    elif p >= e.p_jl or is_close(p, e.p_jl, rel_tol):
        tag = RegimeTag.JL_STABLE
    else:
        tag = RegimeTag.SUPERCRITICAL_PRE_JL
    ge_star = p >= e.p_star or is_close(p, e.p_star, rel_tol)
    le_p2 = e.p_2 is not None and (p <= e.p_2 or is_close(p, e.p_2, rel_tol))
    return Regime(tag, ge_star, le_p2)


def jl_quadratic_residual(n: int, k: int, p: float) -> float:
    """Quadratic whose roots are p_jl and p_2 (defined for n >= 2k + 9)."""
    _check_nk(n, k)
    if n < 2 * k + 9:
        raise DomainError(f"quadratic is degenerate for n={n} < 2k+9={2 * k + 9}")
    return (
        (n - 2 * k) * (n - 2 * k - 8) * p * p
        - 2 * k * (n * n - 2 * (k + 3) * n + 4 * k) * p
        + k * k * (n - 2) ** 2
    )


def jl_quadratic_scale(n: int, k: int, p: float) -> float:
    """Sum of absolute values of the three terms; the natural scale of the residual."""
    return (
        abs((n - 2 * k) * (n - 2 * k - 8)) * p * p
        + abs(2 * k * (n * n - 2 * (k + 3) * n + 4 * k)) * abs(p)
        + k * k * (n - 2) ** 2
    )


def gamma_of_t(k: int, t: float) -> float:
    return (2.0 * t + 2.0 * math.sqrt(t * (t - k)) - k) / k


def f_function(n: int, k: int, t: float) -> float:
    """Decreasing auxiliary function whose level set n+1 defines p_jl.

    ``n`` is accepted for signature symmetry; f depends on k and t only.
    """
    _check_nk(n, k)
    if not t > k:
        raise DomainError(f"f(t) requires t > k={k}, got t={t}")
    g = gamma_of_t(k, t)
    return ((2 * k + 1) * (t + g) - (g + k)) / (t - k)


@dataclass(frozen=True)
class SingularStabilityCondition:
    lhs: float
    rhs: float
    holds: bool

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


def singular_stability_condition(params: Params, rel_tol: float = REL_TOL) -> SingularStabilityCondition:
    """Compare the singular-solution potential constant with the CKN constant.

    ``lhs = p (2/(p-k)) (n - 2pk/(p-k))`` is the coefficient of the potential
    term of Q for the singular solution after factoring out the common
    constant C(n-1,k-1) A^{p-k} (2k/(p-k))^{k-1}; ``rhs`` is the
    best constant (n - 2 - 2a)^2/4 with a = p(k-1)/(p-k).
    """
    n, k, p = params.n, params.k, params.p
    lhs = p * (2.0 / (p - k)) * (n - 2.0 * p * k / (p - k))
    rhs = (n - 2.0 - 2.0 * p * (k - 1) / (p - k)) ** 2 / 4.0
    return SingularStabilityCondition(lhs, rhs, lhs <= rhs or is_close(lhs, rhs, rel_tol))


def ckn_weight_exponent(params: Params) -> float:
    """Weight exponent a = p(k-1)/(p-k) matching Q of the singular solution."""
    return params.p * (params.k - 1) / (params.p - params.k)


def ckn_best_constant(n: int, a: float) -> float:
    """Best constant (n-2-2a)^2/4 of the weighted Hardy inequality, 0 <= a <= (n-2)/2."""
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    if a < 0 or a > (n - 2) / 2:
        raise DomainError(f"weight exponent a={a} outside [0, (n-2)/2]")
    return (n - 2 - 2 * a) ** 2 / 4.0
