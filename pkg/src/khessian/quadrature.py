"""Composite Gauss-Legendre rules on geometrically graded panels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite rule settings.

    order: Gauss-Legendre points per panel.
    panels_per_decade: geometric panels per factor 10 in r.
    r_floor: integrals starting at 0 get one panel on [0, r_floor * b] and
        geometric panels above it.  For an integrand behaving like r^e
        near 0 the floor panel costs at most its own mass,
        (r_floor b)^{e+1}/(e+1), which is small unless e is close to -1.
    min_panels: lower bound on the panel count of any interval.
    """

    order: int = 16
    panels_per_decade: int = 8
    r_floor: float = 1e-10
    min_panels: int = 4

    def __post_init__(self):
        if self.order < 1 or self.panels_per_decade < 1 or self.min_panels < 1:
            raise DomainError("quadrature counts must be positive")
        if not 0 < self.r_floor < 1:
            raise DomainError("r_floor must lie in (0, 1)")

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return QuadratureSpec(self.order, self.panels_per_decade * factor, self.r_floor,
                              self.min_panels * factor)

    def as_dict(self) -> dict:
        return {"order": self.order, "panels_per_decade": self.panels_per_decade,
                "r_floor": self.r_floor, "min_panels": self.min_panels}


@lru_cache(maxsize=None)
def _gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(a: float, b: float, spec: QuadratureSpec, breakpoints=()) -> np.ndarray:
    """Panel boundaries on [a, b]: geometric for a > 0, graded toward 0 otherwise."""
    if not b > a or a < 0:
        raise DomainError(f"bad integration interval [{a}, {b}]")
    cuts = sorted({float(c) for c in breakpoints if a < c < b} | {a, b})
    edges = [cuts[0]]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if lo == 0.0:
            floor = spec.r_floor * hi
            edges.append(floor)
            lo = floor
        decades = math.log10(hi / lo)
        m = max(spec.min_panels, math.ceil(decades * spec.panels_per_decade))
        seg = np.geomspace(lo, hi, m + 1)
        seg[-1] = hi
        edges.extend(seg[1:])
    return np.asarray(edges)


def nodes_weights(a: float, b: float, spec: QuadratureSpec = QuadratureSpec(), breakpoints=()):
    edges = panel_edges(a, b, spec, breakpoints)
    x, w = _gauss_legendre(spec.order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def log_nodes_weights(a: float, b: float, panels: int, order: int = 16):
    """Nodes in t on [a, b] (a > 0) for integrals of g(t) dt/t, uniform in ln t."""
    x, w = _gauss_legendre(order)
    la, lb = math.log(a), math.log(b)
    edges = np.linspace(la, lb, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    s = (lo + half * (x + 1.0)).ravel()
    return np.exp(s), (half * w).ravel()


def integrate(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(), breakpoints=()) -> float:
    nodes, weights = nodes_weights(a, b, spec, breakpoints)
    vals = np.asarray(f(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"integrand not finite on [{a}, {b}]", achieved=math.inf)
    return float(np.dot(weights, vals))
