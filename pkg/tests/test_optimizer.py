import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardy_verify.errors import Inconsistent, RegimeError
from hardy_verify.optimizer import (
    DiscreteProfile, QuotientKernel, make_grid, minimize_quotient, quotient, refine_and_extrapolate,
    target_constant,
)
from hardy_verify.params import derive_params

P23 = derive_params(2, 3, 1.0)
P32 = derive_params(3, 2, 1.0)
P33 = derive_params(3, 3, 1.0)
CASES = [(P23, "exterior-power"), (P32, "exterior-singular"), (P33, "exterior-log"), (P23, "exterior-singular")]


def test_targets():
    assert target_constant(P23, "exterior-power") == pytest.approx(0.25)
    assert target_constant(P32, "exterior-singular") == pytest.approx((1 / 3) ** 3)
    assert target_constant(P33, "exterior-log") == pytest.approx((2 / 3) ** 3)


@pytest.mark.parametrize("P,kernel", [(P32, "exterior-power"), (P33, "exterior-singular"), (P23, "exterior-log")])
def test_kernel_regime_pairing(P, kernel):
    with pytest.raises(RegimeError):
        minimize_quotient(P, kernel, 50)


def test_grid_nesting_and_grading():
    for graded in (False, True):
        coarse, fine = make_grid(1.0, 4096.0, 500, graded), make_grid(1.0, 4096.0, 1000, graded)
        assert np.all(np.diff(coarse) > 0)
        assert np.isin(coarse, fine).all()
        assert coarse[0] == 0.0 and coarse[-1] == pytest.approx(math.log(4096.0))
    g = make_grid(1.0, 4096.0, 200, True)
    assert g.size == 201
    h = np.diff(g)
    assert h[2] / h[1] == pytest.approx(1.2, rel=1e-9)
    assert make_grid(1.0, 4096.0, 200, False).size == 201


def test_discrete_profile_validation():
    with pytest.raises(ValueError):
        DiscreteProfile(np.array([1.0, 2.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        DiscreteProfile(np.array([1.0, 3.0, 2.0]), np.array([1.0, 0.5, 0.0]))
    u = DiscreteProfile(np.array([1.0, 2.0, 4.0]), np.array([1.0, 0.5, 0.0]))
    assert u(np.sqrt(2.0)) == pytest.approx(0.75)


def test_quotient_of_sampled_u_k():
    t = make_grid(1.0, 2.0**12, 4000, False)
    rho = np.exp(t)
    u = DiscreteProfile(rho, rho**-3.0, t)
    # (36 pi / 5) / (4 pi / 5) on the full exterior
    assert quotient(u, P23, "exterior-power") == pytest.approx(9.0, rel=1e-3)


@st.composite
def discrete_case(draw):
    P, kernel = draw(st.sampled_from(CASES))
    size = draw(st.integers(4, 40))
    vals = np.array(draw(st.lists(st.floats(-1.0, 1.0), min_size=size + 1, max_size=size + 1)))
    return P, kernel, size, vals


@given(discrete_case())
def test_upper_bound_property(case):
    P, kernel, size, vals = case
    t = make_grid(P.r, P.r * 2.0**12, size, QuotientKernel(kernel).singular, P.p)
    vals = vals[: t.size].copy()
    vals[-1] = 0.0
    if QuotientKernel(kernel).singular:
        vals[0] = 0.0
    if not np.any(vals):
        return
    u = DiscreteProfile(P.r * np.exp(t), vals, t)
    assert quotient(u, P, kernel) >= target_constant(P, kernel) * (1 - 1e-12)


@pytest.mark.parametrize("P,kernel", CASES)
def test_small_grid_minimisation(P, kernel):
    rep = minimize_quotient(P, kernel, 200)
    assert rep.converged
    assert rep.estimated_constant >= rep.target_constant
    trace = np.array(rep.trace)
    assert np.all(np.diff(trace) <= 1e-12 * trace[:-1])
    assert quotient(rep.profile, P, kernel) == pytest.approx(rep.estimated_constant, rel=1e-9)


def test_armijo_path_agrees_with_eigen():
    exact = minimize_quotient(P23, "exterior-power", 100)
    slow = minimize_quotient(P23, "exterior-power", 100, step_rule="armijo")
    assert slow.estimated_constant == pytest.approx(exact.estimated_constant, rel=1e-6)
    assert slow.estimated_constant >= exact.estimated_constant * (1 - 1e-12)


def test_armijo_path_descends():
    fast = minimize_quotient(P32, "exterior-singular", 100)
    slow = minimize_quotient(P32, "exterior-singular", 100, step_rule="armijo", max_iters=2000)
    assert slow.estimated_constant >= fast.estimated_constant * (1 - 1e-9)
    trace = np.array(slow.trace)
    assert trace[-1] < trace[0]
    assert np.all(np.diff(trace) <= 1e-12 * trace[:-1])


def test_eigen_rule_needs_p2():
    with pytest.raises(ValueError):
        minimize_quotient(P32, "exterior-singular", 50, step_rule="eigen")


def test_t_max_sensitivity_reported():
    rep = minimize_quotient(P23, "exterior-power", 200, check_t_max=True)
    assert rep.t_max_doubled_constant is not None
    assert rep.t_max_doubled_constant < rep.estimated_constant
    assert rep.to_dict()["t_max_doubled_constant"] == rep.t_max_doubled_constant


def test_power_kernel_truncation_law():
    # u = rho^(-1/2) w(ln rho) turns the quotient into 1/4 + a Robin eigenvalue on (0, ln T)
    for T in (2.0**8, 2.0**12):
        rep = minimize_quotient(P23, "exterior-power", 1000, t_max=T)
        lam = math.log(T)
        k = _robin_root(lam)
        assert rep.estimated_constant == pytest.approx(0.25 + k * k, rel=1e-4)


def _robin_root(lam):
    # w'(0) = w(0) / 2, w(lam) = 0  ->  tan(k lam) = -2 k
    from scipy.optimize import brentq
    return brentq(lambda k: math.tan(k * lam) + 2 * k, math.pi / (2 * lam) + 1e-12, math.pi / lam - 1e-12)


def test_refinement_monotone_on_small_grids():
    reps = [minimize_quotient(P33, "exterior-log", g) for g in (100, 200, 400)]
    ex = refine_and_extrapolate(reps)
    assert ex.value <= reps[-1].estimated_constant
    assert ex.value >= target_constant(P33, "exterior-log") * 0.99


def test_extrapolation_examples():
    ex = refine_and_extrapolate([0.2600, 0.2549, 0.2525])
    assert abs(ex.value - 0.25) < abs(0.2525 - 0.25)
    same = refine_and_extrapolate([0.3, 0.3, 0.3])
    assert same.value == 0.3
    with pytest.raises(Inconsistent):
        refine_and_extrapolate([0.26, 0.25, 0.255])
    with pytest.raises(ValueError):
        refine_and_extrapolate([0.26, 0.25])
