import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardy_verify.errors import DomainError, RegimeError
from hardy_verify.params import (
    Regime, derive_params, gamma_split_radius, p_harmonic_profile, power_gap, unit_sphere_area,
)


@pytest.mark.parametrize("p,n,m,pc,regime", [
    (3, 2, 0.5, 1.5, Regime.M_POSITIVE),
    (2, 3, -1.0, 2.0, Regime.M_NEGATIVE),
    (3, 3, 0.0, 1.5, Regime.M_ZERO),
])
def test_derive_params_examples(p, n, m, pc, regime):
    P = derive_params(p, n, 1.0)
    assert P.m == pytest.approx(m, abs=1e-15)
    assert P.p_conj == pytest.approx(pc)
    assert P.regime is regime
    assert not P.bounded


def test_regime_uses_exact_equality():
    assert derive_params(3.0 + 1e-12, 3, 1.0).regime is Regime.M_POSITIVE
    assert derive_params(3.0 - 1e-12, 3, 1.0).regime is Regime.M_NEGATIVE


@pytest.mark.parametrize("bad", [
    dict(p=1.0, n=3, r=1.0), dict(p=math.inf, n=3, r=1.0), dict(p=2, n=1, r=1.0),
    dict(p=2, n=2.5, r=1.0), dict(p=2, n=3, r=0.0), dict(p=2, n=3, r=-1.0),
    dict(p=2, n=3, r=1.0, outer=1.0), dict(p=2, n=3, r=1.0, outer=0.5),
])
def test_derive_params_rejects(bad):
    with pytest.raises(DomainError):
        derive_params(**bad)


@pytest.mark.parametrize("n,area", [(2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_sphere_area_examples(n, area):
    assert unit_sphere_area(n) == pytest.approx(area, rel=1e-15)


@given(st.integers(2, 60))
def test_sphere_area_matches_gamma_formula(n):
    ref = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    assert unit_sphere_area(n) == pytest.approx(ref, rel=1e-13)


def test_sphere_area_rejects_low_dimension():
    with pytest.raises(DomainError):
        unit_sphere_area(1)


def test_psi1_example_m_negative():
    P = derive_params(2, 3, 1.0)
    psi = p_harmonic_profile(1, P, R=2.0)
    rho = np.linspace(1.0, 2.0, 11)
    ref = (0.5 - 1 / rho) / (0.5 - 1.0)
    assert np.allclose(psi.value(rho), ref, rtol=1e-14, atol=1e-15)
    assert psi.value(np.array(1.0)) == pytest.approx(1.0)
    assert abs(psi.value(np.array(2.0))) < 1e-15


def test_psi1_example_m_zero():
    P = derive_params(3, 3, 1.0)
    psi = p_harmonic_profile(1, P, R=math.e)
    rho = np.linspace(1.0, math.e, 9)
    assert np.allclose(psi.value(rho), 1 - np.log(rho), atol=1e-14)


@given(st.sampled_from([(2, 3), (3, 2), (3, 3), (1.5, 4), (4, 2)]), st.floats(1.1, 20.0))
def test_psi_boundary_values_and_complement(pn, R):
    P = derive_params(*pn, 1.0)
    psi1, psi2 = p_harmonic_profile(1, P, R), p_harmonic_profile(2, P, R)
    assert psi1.boundary_value(1.0) == pytest.approx(1.0, abs=1e-13)
    assert psi2.boundary_value(1.0) == pytest.approx(0.0, abs=1e-13)
    assert psi2.value(np.array(R)) == pytest.approx(1.0, abs=1e-12)
    rho = np.linspace(1.0, R, 17)
    assert np.allclose(psi1.value(rho) + psi2.value(rho), 1.0, atol=1e-12)


def test_psi_rejects_bad_arguments():
    P = derive_params(2, 3, 1.0)
    with pytest.raises(DomainError):
        p_harmonic_profile(3, P, 2.0)
    with pytest.raises(DomainError):
        p_harmonic_profile(1, P)


@pytest.mark.parametrize("p,n,r,gamma", [(2, 3, 1.0, 2.0), (2, 4, 1.0, math.sqrt(2)), (2, 3, 3.0, 6.0)])
def test_gamma_split_radius(p, n, r, gamma):
    assert gamma_split_radius(derive_params(p, n, r)).gamma == pytest.approx(gamma, rel=1e-15)


def test_gamma_needs_negative_m():
    with pytest.raises(RegimeError):
        gamma_split_radius(derive_params(3, 3, 1.0))


def test_power_gap_keeps_precision_near_inner_sphere():
    P = derive_params(2, 3, 2.0)
    s = 1e-14
    exact = P.r**P.m * math.expm1(P.m * s)
    assert power_gap(P, s) == pytest.approx(exact, rel=1e-15)
    assert power_gap(P, s) != 0.0
