import math

import numpy as np
import pytest

from khessian.closed_forms import (
    ClosedForm, Kind, critical_prefactor, critical_solution, eval_closed_form, ode_residual,
    ode_residual_scale, singular_coefficient_A, singular_solution,
)
from khessian.errors import DomainError, NotApplicableError
from khessian.exponents import Params, compute_exponents

A_9_2_5 = 2.5505749103631854682654891193983470438165854004612  # 50-digit reference
U0_CRITICAL_9_2 = 1.7817974362806786094804524111810250159744252317563  # 4^{1/2.4}


class _Numeric:
    """Wrap a closed form without its d2u so the finite-difference path is used."""

    def __init__(self, cf):
        self.cf = cf

    def __call__(self, r):
        return self.cf(r)


def test_coefficient_A():
    A = singular_coefficient_A(Params(9, 2, 5))
    assert A == pytest.approx(A_9_2_5, rel=1e-14)
    assert A == pytest.approx(4 ** (1 / 3) * (4 / 3) ** (2 / 3) * (7 / 3) ** (1 / 3), rel=1e-14)


def test_A_vanishes_at_serrin_exponent():
    vals = [singular_coefficient_A(Params(9, 2, 3.6 + h)) for h in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert vals[0] > vals[1] > vals[2] > vals[3] > 0
    # A ~ const * h^{1/(p-k)} with 1/(p-k) -> 1/1.6
    rate = math.log(vals[2] / vals[3]) / math.log(100.0)
    assert rate == pytest.approx(1 / 1.6, rel=1e-3)


def test_singular_values():
    us = singular_solution(Params(9, 2, 5))
    assert eval_closed_form(us, 1.0)[0] == pytest.approx(A_9_2_5, rel=1e-14)
    r = np.geomspace(0.01, 100, 7)
    u1, _ = us(r)
    u2, _ = us(2 * r)
    np.testing.assert_allclose(u2 / u1, 2 ** (-4 / 3), rtol=1e-14)
    with pytest.raises(DomainError):
        us(0.0)


def test_singular_scaling_covariance():
    pr = Params(20, 2, 3.3)
    us = singular_solution(pr)
    r = np.geomspace(0.1, 10, 5)
    for mu in (0.3, 2.0, 17.0):
        np.testing.assert_allclose(mu ** pr.alpha * us(mu * r)[0], us(r)[0], rtol=1e-13)


def test_critical_center_value():
    cb = critical_solution(Params(9, 2, 4.4), family_rho=1.0)
    u, du = eval_closed_form(cb, 0.0)
    assert u == pytest.approx(U0_CRITICAL_9_2, rel=1e-14)
    assert du == 0.0
    assert cb.center_value == pytest.approx(U0_CRITICAL_9_2, rel=1e-14)
    same = ClosedForm.critical(Params(9, 2, 4.4), center_value=U0_CRITICAL_9_2)
    assert same.rho == pytest.approx(1.0, rel=1e-14)


def test_critical_requires_sobolev_exponent():
    with pytest.raises(DomainError):
        ClosedForm.critical(Params(9, 2, 5.0), family_rho=1.0)
    with pytest.raises(ValueError):
        ClosedForm.critical(Params(9, 2, 4.4))
    with pytest.raises(ValueError):
        ClosedForm.critical(Params(9, 2, 4.4), family_rho=1.0, center_value=2.0)


def test_critical_family_scaling():
    pr = Params(9, 2, 4.4)
    base = critical_solution(pr, family_rho=1.0)
    r = np.linspace(0, 30, 31)
    for mu in (0.25, 1.0, 3.0):
        scaled = critical_solution(pr, family_rho=mu ** pr.alpha)
        np.testing.assert_allclose(mu ** pr.alpha * base(mu * r)[0], scaled(r)[0], rtol=1e-12)


@pytest.mark.parametrize("r", [0.5, 1.0, 5.0])
def test_singular_residual(r):
    us = singular_solution(Params(9, 2, 5))
    scale = ode_residual_scale(us, us.params, r)
    assert abs(ode_residual(us, us.params, r)) <= 1e-8 * scale
    assert abs(ode_residual(_Numeric(us), us.params, r)) <= 1e-8 * scale


@pytest.mark.parametrize("r", [0.1, 1.0, 10.0])
def test_critical_residual(r):
    cb = critical_solution(Params(9, 2, 4.4), family_rho=1.0)
    scale = ode_residual_scale(cb, cb.params, r)
    assert abs(ode_residual(cb, cb.params, r)) <= 1e-8 * scale
    assert abs(ode_residual(_Numeric(cb), cb.params, r)) <= 1e-8 * scale


def test_constant_function_residual():
    pr = Params(9, 2, 5)
    const = lambda r: (np.full(np.shape(r), 2.0), np.zeros(np.shape(r)))
    r = 3.0
    assert ode_residual(const, pr, r) == pytest.approx(-r ** 8 * 2.0 ** 5, rel=1e-12)
    assert ode_residual_scale(const, pr, r) == pytest.approx(r ** 8 * 2.0 ** 5, rel=1e-12)


def test_residual_sign_change_not_applicable():
    pr = Params(9, 2, 5)
    wave = lambda r: (2 + np.cos(np.asarray(r)), -np.sin(np.asarray(r)))
    with pytest.raises(NotApplicableError):
        ode_residual(wave, pr, math.pi, h=1e-3)


def test_source_mass_matches_flux():
    for cf in (singular_solution(Params(9, 2, 5)), critical_solution(Params(9, 2, 4.4), family_rho=2.0)):
        pr = cf.params
        r = np.geomspace(0.1, 50, 9)
        _, du = cf(r)
        np.testing.assert_allclose(cf.source_mass(r), pr.binom / pr.k * r ** (pr.n - pr.k) * np.abs(du) ** pr.k,
                                   rtol=1e-12)


def test_random_parameters_residuals():
    rng = np.random.default_rng(11)
    for _ in range(20):
        k = int(rng.integers(2, 5))
        n = int(rng.integers(2 * k + 1, 2 * k + 15))
        e = compute_exponents(n, k)
        us = singular_solution(Params(n, k, float(rng.uniform(e.p_se * 1.01, 3 * e.p_so))))
        cb = critical_solution(Params(n, k, e.p_so), family_rho=float(rng.uniform(0.2, 5)))
        for cf in (us, cb):
            for r in np.geomspace(0.1, 100, 6):
                assert abs(ode_residual(cf, cf.params, r)) <= 1e-8 * ode_residual_scale(cf, cf.params, r)


def test_describe():
    d = critical_solution(Params(9, 2, 4.4), family_rho=1.0).describe()
    assert d["kind"] == Kind.CRITICAL_REGULAR.value and d["family_rho"] == 1.0
    assert singular_solution(Params(9, 2, 5)).describe()["coeff_A"] == pytest.approx(A_9_2_5)
    assert critical_prefactor(Params(9, 2, 4.4)) == pytest.approx(U0_CRITICAL_9_2, rel=1e-14)
