import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from khessian.errors import DomainError
from khessian.exponents import (
    Params, RegimeTag, ckn_best_constant, ckn_weight_exponent, classify_regime, compute_exponents,
    f_function, jl_quadratic_residual, jl_quadratic_scale, jl_threshold_dimension,
    singular_stability_condition,
)

# 50-digit reference values for (n, k) = (20, 2)
P_JL_20_2 = "3.9114378277661476476254039384098151064275647957706"
P_2_20_2 = "2.5885621722338523523745960615901848935724352042294"


def _mp_exponents(n, k):
    mp.mp.dps = 50
    n, k = mp.mpf(n), mp.mpf(k)
    d = n - 2 * k
    lin = k * (n * n - 2 * (k + 3) * n + 4 * k)
    root = 4 * k * mp.sqrt(2 * (k + 1) * n - 4 * k)
    den = d * (n - 2 * k - 8)
    return {"p_se": n * k / d, "p_so": (n + 2) * k / d, "p_star": k * (n + 2 * k) / d,
            "p_jl": (lin + root) / den, "p_2": (lin - root) / den}


def test_reference_strings_match_mp_evaluation():
    ref = _mp_exponents(20, 2)
    assert mp.nstr(ref["p_jl"], 45) == mp.nstr(mp.mpf(P_JL_20_2), 45)
    assert mp.nstr(ref["p_2"], 45) == mp.nstr(mp.mpf(P_2_20_2), 45)


@pytest.mark.parametrize("n,k", [(20, 2), (30, 3), (45, 4), (100, 2), (13, 2)])
def test_against_high_precision(n, k):
    e = compute_exponents(n, k)
    ref = _mp_exponents(n, k)
    for name, val in ref.items():
        assert getattr(e, name) == pytest.approx(float(val), rel=1e-14, abs=0)


def test_9_2_values():
    e = compute_exponents(9, 2)
    assert (e.p_se, e.p_so, e.p_star) == (3.6, 4.4, 5.2)
    assert e.p_jl == math.inf
    assert e.p_2 is None


def test_20_2_values():
    e = compute_exponents(20, 2)
    assert (e.p_se, e.p_so, e.p_star) == (2.5, 2.75, 3.0)
    assert e.p_jl == pytest.approx(3.91144, abs=5e-6)
    assert e.p_2 == pytest.approx(2.58856, abs=5e-6)


def test_68_2_star_equals_jl():
    e = compute_exponents(68, 2)
    assert jl_threshold_dimension(2) == 68.0
    assert e.p_star == pytest.approx(2.25, rel=1e-12)
    assert e.p_jl == pytest.approx(2.25, rel=1e-12)


def test_star_minus_jl_changes_sign_at_threshold():
    assert compute_exponents(67, 2).p_star < compute_exponents(67, 2).p_jl
    assert compute_exponents(69, 2).p_star > compute_exponents(69, 2).p_jl


@pytest.mark.parametrize("k", range(2, 9))
def test_branch_and_ordering(k):
    for n in range(2 * k + 1, 201):
        e = compute_exponents(n, k)
        assert e.p_se < e.p_so < e.p_star
        assert math.isinf(e.p_jl) == (n <= 2 * k + 8)
        if not math.isinf(e.p_jl):
            assert e.p_so < e.p_jl
            assert e.p_se < e.p_2 < e.p_jl


@pytest.mark.parametrize("n,k", [(4, 2), (5, 3), (2, 1), (10, 1), (9.5, 2)])
def test_domain_errors(n, k):
    with pytest.raises(DomainError):
        compute_exponents(n, k)


def test_params_validation():
    with pytest.raises(DomainError):
        Params(9, 2, 3.6)
    with pytest.raises(DomainError):
        Params(9, 2, math.inf)
    pr = Params(9, 2, 5)
    assert pr.binom == 8.0 and isinstance(pr.p, float)
    assert Params(20, 4, 9.0).binom == float(math.comb(19, 3))


@pytest.mark.parametrize("p,tag,star", [
    (4.0, RegimeTag.SUBCRITICAL, False),
    (4.4, RegimeTag.CRITICAL, False),
    (4.4 * (1 + 1e-13), RegimeTag.CRITICAL, False),
    (5.0, RegimeTag.SUPERCRITICAL_PRE_JL, False),
    (5.2, RegimeTag.SUPERCRITICAL_PRE_JL, True),
])
def test_classify_9_2(p, tag, star):
    r = classify_regime(Params(9, 2, p))
    assert r.tag is tag
    assert r.at_or_above_p_star is star
    assert r.at_or_below_p_2 is False


def test_classify_20_2():
    r = classify_regime(Params(20, 2, 4.0))
    assert r.tag is RegimeTag.JL_STABLE and r.at_or_above_p_star
    assert classify_regime(Params(20, 2, 2.55)).at_or_below_p_2
    assert classify_regime(Params(20, 2, compute_exponents(20, 2).p_jl)).tag is RegimeTag.JL_STABLE


def test_quadratic_residual():
    e = compute_exponents(20, 2)
    for root in (e.p_jl, e.p_2):
        assert abs(jl_quadratic_residual(20, 2, root)) <= 1e-12 * jl_quadratic_scale(20, 2, root)
    assert jl_quadratic_residual(20, 2, 2.75) == pytest.approx(-24.0, rel=1e-12)
    with pytest.raises(DomainError):
        jl_quadratic_residual(12, 2, 3.0)


def test_f_function_values():
    e = compute_exponents(20, 2)
    assert f_function(20, 2, e.p_jl) == pytest.approx(21.0, abs=1e-8)
    # gamma(10) = 9 + 4 sqrt5, so f(10) = 10.5 + 2 sqrt5
    assert f_function(20, 2, 10.0) == pytest.approx(10.5 + 2 * math.sqrt(5), rel=1e-14)
    assert f_function(9, 2, 1e6) == pytest.approx(13.0, abs=1e-3)
    with pytest.raises(DomainError):
        f_function(20, 2, 2.0)
    t = np.linspace(2.01, 50, 200)
    vals = [f_function(20, 2, x) for x in t]
    assert np.all(np.diff(vals) < 0)


def test_singular_condition_examples():
    assert singular_stability_condition(Params(20, 2, 4.0)).holds
    c = singular_stability_condition(Params(20, 2, 3.0))
    assert (c.lhs, c.rhs, c.holds) == (pytest.approx(48.0), pytest.approx(36.0), False)
    c = singular_stability_condition(Params(20, 2, compute_exponents(20, 2).p_jl))
    assert c.lhs == pytest.approx(c.rhs, rel=1e-8) and c.holds


def test_singular_condition_matches_roots_random():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        k = int(rng.integers(2, 5))
        n = int(rng.integers(2 * k + 9, 120))
        e = compute_exponents(n, k)
        p = float(rng.uniform(e.p_se, 3 * e.p_jl))
        if p <= e.p_se:
            continue
        holds = singular_stability_condition(Params(n, k, p)).holds
        assert holds == (p <= e.p_2 or p >= e.p_jl), (n, k, p)


def test_ckn_constant():
    assert ckn_best_constant(9, 0.0) == 12.25
    assert ckn_best_constant(9, 3.5) == 0.0
    pr = Params(20, 2, 4.0)
    a = ckn_weight_exponent(pr)
    assert a == 2.0
    assert ckn_best_constant(20, a) == 49.0 == singular_stability_condition(pr).rhs
    with pytest.raises(DomainError):
        ckn_best_constant(9, 4.0)
    with pytest.raises(DomainError):
        ckn_best_constant(9, -0.1)


def test_sobolev_coefficient_identity_rational():
    checked = 0
    for k in range(2, 7):
        for n in range(2 * k + 1, 2 * k + 11):
            p_so = Fraction((n + 2) * k, n - 2 * k)
            assert Fraction(n - 2 * k, k + 1) == n / (p_so + 1)
            checked += 1
    assert checked == 50


@settings(max_examples=200, deadline=None)
@given(k=st.integers(2, 6), extra=st.integers(9, 80))
def test_jl_roots_property(k, extra):
    n = 2 * k + extra
    e = compute_exponents(n, k)
    assert abs(jl_quadratic_residual(n, k, e.p_jl)) <= 1e-6 * jl_quadratic_scale(n, k, e.p_jl)
    assert abs(jl_quadratic_residual(n, k, e.p_2)) <= 1e-6 * jl_quadratic_scale(n, k, e.p_2)
    assert f_function(n, k, e.p_jl) == pytest.approx(n + 1, abs=1e-6)
