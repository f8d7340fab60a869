import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardy_verify.errors import NoOracle, ParamError, RegimeError
from hardy_verify.extremals import (
    FamilyId, MembershipSet, MembershipSetId, check_membership, closed_form_oracle,
    default_eta_radius, make_family, sandwich_bounds,
)
from hardy_verify.params import derive_params
from hardy_verify.profiles import Compact, Power, RadialProfile
from hardy_verify.verifier import Status, verify_prop2

from oracle_map import quadrature_value

P23 = derive_params(2, 3, 1.0)


def test_u_k_profile():
    u = make_family(FamilyId.U_K, {"k": 3.0}, P23).profile
    rho = np.array([1.0, 2.0, 5.0])
    assert np.allclose(u.value(rho), rho**-3.0, rtol=1e-15)
    assert np.allclose(u.derivative(rho), -3 * rho**-4.0, rtol=1e-15)


def test_u_beta_profile_is_continuous_at_gamma():
    u = make_family(FamilyId.U_BETA, {"beta": 1.0}, P23).profile
    assert u.breakpoints == (2.0,)
    assert u.value(np.array(2.0 - 1e-12)) == pytest.approx(0.5, abs=1e-11)
    assert u.value(np.array(2.0 + 1e-12)) == pytest.approx(0.5, abs=1e-11)
    assert u.value(np.array(1.5)) == pytest.approx(1 - 1 / 1.5)
    assert u.value(np.array(4.0)) == pytest.approx(0.25)


def test_u_eta_default_radius_and_kink():
    P = derive_params(3, 3, 1.0)
    fam = make_family(FamilyId.U_ETA, {"eta": 0.5}, P)
    M = fam.parameters["M"]
    assert M == default_eta_radius(0.5, 1.0)
    assert M > math.e and math.log(M) / M < 0.5 / 1.5
    assert M / 2 <= math.e or math.log(M / 2) / (M / 2) >= 0.5 / 1.5
    u = fam.profile
    assert M in u.breakpoints
    left, right = u.derivative(np.array(M * (1 - 1e-9))), u.derivative(np.array(M * (1 + 1e-9)))
    assert not math.isclose(left, right, rel_tol=1e-3)
    assert u.value(np.array(M * (1 - 1e-12))) == pytest.approx(u.value(np.array(M * (1 + 1e-12))), rel=1e-9)


@pytest.mark.parametrize("fid,par,pn", [
    (FamilyId.U_ALPHA, {"alpha": 1.0}, (2, 3)),
    (FamilyId.U_K, {"k": 3.0}, (3, 2)),
    (FamilyId.U_Q, {"q": -1.0}, (2, 3)),
    (FamilyId.U_ETA, {"eta": 0.5}, (2, 3)),
])
def test_regime_mismatch(fid, par, pn):
    with pytest.raises(RegimeError):
        make_family(fid, par, derive_params(*pn, 1.0))


def test_bounded_domain_rejected():
    with pytest.raises(RegimeError):
        make_family(FamilyId.U_K, {"k": 3.0}, P23.with_outer(5.0))


@pytest.mark.parametrize("fid,par,pn", [
    (FamilyId.U_ALPHA, {"alpha": 0.0}, (3, 2)),
    (FamilyId.U_K, {"k": 0.5}, (2, 3)),
    (FamilyId.U_Q, {"q": 0.0}, (3, 3)),
    (FamilyId.U_EPS, {"eps": 1.0}, (3, 2)),
    (FamilyId.U_S, {"s": 0.5}, (2, 3)),
    (FamilyId.U_ETA, {"eta": 1.0}, (3, 3)),
    (FamilyId.U_BETA, {"beta": 0.4}, (2, 3)),
    (FamilyId.U_K, {}, (2, 3)),
])
def test_parameter_constraints(fid, par, pn):
    with pytest.raises(ParamError):
        make_family(fid, par, derive_params(*pn, 1.0))


def test_u_k_between_thresholds_warns():
    with pytest.warns(UserWarning):
        make_family(FamilyId.U_K, {"k": 1.5}, P23)


ORACLE_CASES = [
    (FamilyId.U_ALPHA, {"alpha": 1.0}, (3, 2, 1.0)),
    (FamilyId.U_ALPHA, {"alpha": 0.5}, (4, 3, 1.5)),
    (FamilyId.U_ALPHA, {"alpha": 2.0}, (2.5, 2, 0.7)),
    (FamilyId.U_K, {"k": 3.0}, (2, 3, 1.0)),
    (FamilyId.U_K, {"k": 4.0}, (1.5, 4, 0.7)),
    (FamilyId.U_Q, {"q": -1.0}, (3, 3, 1.0)),
    (FamilyId.U_Q, {"q": -0.4}, (2, 2, 2.0)),
    (FamilyId.U_S, {"s": 1.0}, (2, 3, 1.0)),
    (FamilyId.U_S, {"s": 2.0}, (1.5, 3, 1.3)),
    (FamilyId.U_BETA, {"beta": 1.0}, (2, 3, 1.0)),
    (FamilyId.U_BETA, {"beta": 0.75}, (2, 3, 1.0)),
    (FamilyId.U_BETA, {"beta": 2.0}, (3, 5, 0.6)),
]


@pytest.mark.parametrize("fid,par,pnr", ORACLE_CASES)
def test_oracle_matches_quadrature(fid, par, pnr):
    fam = make_family(fid, par, derive_params(*pnr))
    for key, exact in closed_form_oracle(fam).functionals.items():
        assert quadrature_value(key, fam) == pytest.approx(exact, rel=1e-9), key


def test_known_oracle_values():
    I = closed_form_oracle(make_family(FamilyId.U_K, {"k": 3.0}, P23)).I
    assert I[0] == pytest.approx(3 * math.sqrt(4 * math.pi / 5))
    assert I[1] == pytest.approx(0.5 * math.sqrt(4 * math.pi / 5))
    assert I[2] == pytest.approx(0.5 * math.sqrt(20 * math.pi))
    Iq = closed_form_oracle(make_family(FamilyId.U_Q, {"q": -1.0}, derive_params(3, 3, 1.0))).I
    assert Iq[2] == pytest.approx(4 * math.pi / 3)
    Is = closed_form_oracle(make_family(FamilyId.U_S, {"s": 1.0}, P23)).I
    assert Is[0] == pytest.approx(2 * math.sqrt(math.pi))
    assert Is[1] == pytest.approx(4 * math.pi)


@given(st.floats(1.2, 5.0), st.integers(2, 5), st.floats(0.2, 5.0), st.floats(0.1, 3.0))
def test_alpha_and_k_oracle_identities(p, n, r, t):
    P = derive_params(p, n, r)
    if P.m > 0:
        I1, I2, I3 = closed_form_oracle(make_family(FamilyId.U_ALPHA, {"alpha": t}, P)).I
        assert I1 * I2 == pytest.approx(I3, rel=1e-10)
    elif P.m < 0:
        I1, I2, I3 = closed_form_oracle(make_family(FamilyId.U_K, {"k": P.p_conj + t}, P)).I
        assert I1 == pytest.approx(I2 + I3, rel=1e-10)


@given(st.integers(2, 6), st.floats(0.2, 5.0), st.floats(-4.0, -0.05))
def test_q_oracle_identity(n, r, q):
    I1, I2, I3 = closed_form_oracle(make_family(FamilyId.U_Q, {"q": q}, derive_params(n, n, r))).I
    assert I1 * I2 == pytest.approx(I3, rel=1e-10)


@given(st.floats(1.2, 2.8), st.integers(3, 6), st.floats(0.2, 5.0), st.floats(0.05, 3.0))
def test_s_and_beta_oracle_identities(p, n, r, t):
    P = derive_params(p, n, r)
    pc, m = P.p_conj, P.m
    I1, I2, I3 = closed_form_oracle(make_family(FamilyId.U_S, {"s": 1 / pc + t}, P)).I
    assert I1 == pytest.approx(abs(m) / pc * I2 ** (1 / p) + I3 * I2 ** (-1 / pc), rel=1e-10)
    L, rhs, _ = closed_form_oracle(make_family(FamilyId.U_BETA, {"beta": 1 / pc + t}, P)).I
    assert L == pytest.approx(rhs, rel=1e-10)


def test_sandwich_families_have_bounds_not_oracles():
    fam = make_family(FamilyId.U_EPS, {"eps": 0.3}, derive_params(3, 2, 1.0))
    with pytest.raises(NoOracle) as info:
        closed_form_oracle(fam)
    assert info.value.bounds == sandwich_bounds(fam)
    lo, hi = sandwich_bounds(fam)
    assert lo == pytest.approx((1 / 3) ** 3)
    assert hi == pytest.approx((1 / 3) ** 3 * 1.3**3)


def test_eps_sandwich_tightens():
    P = derive_params(3, 2, 1.0)
    widths = []
    for eps in np.arange(0.1, 1.0, 0.1):
        fam = make_family(FamilyId.U_EPS, {"eps": float(eps)}, P)
        res = verify_prop2("i", fam, P)
        assert res.status is Status.SANDWICH_OK, eps
        lo, hi = sandwich_bounds(fam)
        widths.append(hi - lo)
    assert all(a < b for a, b in zip(widths, widths[1:]))
    lo, hi = sandwich_bounds(make_family(FamilyId.U_EPS, {"eps": 1e-6}, P))
    assert hi - lo < 1e-6


def test_membership_examples():
    u_k = make_family(FamilyId.U_K, {"k": 3.0}, P23).profile
    assert check_membership(u_k, MembershipSet(MembershipSetId.M1_EXT, P23)).passed
    one = RadialProfile(lambda x: np.ones_like(x), lambda x: np.zeros_like(x), 1.0, decay=Power(0.0))
    res = check_membership(one, MembershipSet(MembershipSetId.M1_EXT, P23))
    assert res.status == "fail" and not res
    u_s = make_family(FamilyId.U_S, {"s": 1.0}, P23).profile
    assert check_membership(u_s, MembershipSet(MembershipSetId.M2_EXT, P23)).passed
    assert not check_membership(u_k, MembershipSet(MembershipSetId.M2_EXT, P23)).passed


def test_membership_on_annulus():
    P = P23.with_outer(3.0)
    bump = RadialProfile(lambda x: (x - 1) * (3 - x), lambda x: 4 - 2 * x, 1.0, 3.0, decay=Compact())
    assert check_membership(bump, MembershipSet(MembershipSetId.M1_ANNULUS, P)).passed
    assert check_membership(bump, MembershipSet(MembershipSetId.M2_ANNULUS, P)).passed
    with pytest.raises(ParamError):
        check_membership(bump, MembershipSet(MembershipSetId.M1_ANNULUS, P23))
