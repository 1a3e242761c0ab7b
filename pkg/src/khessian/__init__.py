"""Radial solutions of the k-Hessian equation -F_k(D^2 u) = u^p.

Submodules: ``exponents`` (critical exponents, regimes), ``closed_forms``
(explicit solutions, residuals), ``solver`` (shooting from the origin),
``asymptotics`` (tails, Wolff potential), ``variational`` (energy, stability
form, integral identities) and ``cli``.
"""

__version__ = "0.1.0"
