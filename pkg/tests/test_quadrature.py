import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from hardy_verify.errors import DivergentTail, NonFinite
from hardy_verify.profiles import Exponential, Power
from hardy_verify.quadrature import ORACLE_SPEC, QuadratureSpec, integrate_finite, integrate_tail


def test_inverse_sqrt_endpoint():
    res = integrate_finite(lambda x: x**-0.5, 0.0, 1.0)
    assert res.converged
    assert abs(res.value - 2.0) / 2.0 <= 1e-10


def test_log_singularity():
    res = integrate_finite(lambda x: 1.0 / (x * np.sqrt(np.log(x))), 1.0, 2.0)
    # sampling in rho near 1 limits this one to ~1e-8, see README
    assert res.value == pytest.approx(2 * math.sqrt(math.log(2.0)), rel=1e-7)


def test_algebraic_endpoint():
    res = integrate_finite(lambda x: (x - 1.0) ** -0.3, 1.0, 2.0)
    assert res.value == pytest.approx(1 / 0.7, rel=1e-10)


def test_power_tail():
    res = integrate_tail(lambda x: x**-2.0, 1.0, decay=Power(-2.0))
    assert res.value == pytest.approx(1.0, rel=1e-10)


def test_power_tail_from_two():
    res = integrate_tail(lambda x: x**-6.0 * x**2, 2.0, decay=Power(-4.0))
    assert res.value == pytest.approx(2.0**-3 / 3, rel=1e-10)


def test_exponential_tail():
    f = lambda x: np.exp(-3 * np.sqrt(x)) * x**-2.0
    ref = quad(f, 1.0, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
    res = integrate_tail(f, 1.0, decay=Exponential(3.0, 0.5))
    assert res.value == pytest.approx(ref, rel=1e-10)


def test_divergent_tail_is_reported():
    with pytest.raises(DivergentTail):
        integrate_tail(lambda x: x**-0.5, 1.0, decay=Power(-0.5))


def test_non_finite_integrand():
    with pytest.raises(NonFinite):
        integrate_finite(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=4)


@given(st.floats(-0.9, 3.0), st.floats(0.1, 5.0))
def test_power_rule(sigma, b):
    res = integrate_finite(lambda x: x**sigma, 0.0, b)
    assert res.value == pytest.approx(b ** (sigma + 1) / (sigma + 1), rel=1e-9)


@given(st.floats(0.2, 3.0), st.floats(0.5, 4.0), st.floats(0.5, 3.0))
def test_additivity_over_split_point(a, w1, w2):
    f = lambda x: np.exp(-x) * np.sin(x) ** 2 + 1.0 / (1.0 + x * x)
    whole = integrate_finite(f, a, a + w1 + w2).value
    parts = integrate_finite(f, a, a + w1).value + integrate_finite(f, a + w1, a + w1 + w2).value
    assert whole == pytest.approx(parts, rel=1e-11)


def test_error_estimate_is_honest():
    res = integrate_finite(lambda x: np.cos(x), 0.0, 10.0, ORACLE_SPEC)
    assert abs(res.value - math.sin(10.0)) <= max(res.error_estimate, 1e-13) * 10
