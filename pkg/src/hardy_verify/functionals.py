"""Gradient, weighted and boundary functionals of radial profiles.

Volume integrals are reduced to one radial integral times the unit-sphere area.
Finite pieces are integrated in the log variable s = ln(rho / r), which keeps
the distance to the inner sphere exact; tails beyond the last breakpoint go
through :func:`integrate_tail`.  Weighted integrands are formed as
``|u * root|**p`` where ``root**p`` is the kernel, so a vanishing profile never
multiplies an overflowing kernel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from hardy_verify.errors import DegenerateError, DivergentTail, KernelDomainError, NonFinite, RegimeError
from hardy_verify.params import ProblemParams, Regime, gamma_split_radius, p_harmonic_profile, power_gap
from hardy_verify.profiles import BoundedLog, Compact, Exponential, Power, RadialProfile
from hardy_verify.quadrature import ORACLE_SPEC, ZERO, IntegralResult, QuadratureSpec, integrate_finite, integrate_tail


class KernelKind(str, enum.Enum):
    ANNULUS_PSI1 = "annulus-psi1"
    ANNULUS_PSI2 = "annulus-psi2"
    EXTERIOR_M_POSITIVE = "exterior-m-positive"
    EXTERIOR_OUTER = "exterior-m-negative-outer"
    EXTERIOR_INNER = "exterior-m-negative-inner"
    EXTERIOR_LOG = "exterior-log"
    EXTERIOR_LOG_PLAIN = "exterior-log-plain"


class BoundaryWeight(str, enum.Enum):
    INNER_R1N = "inner-r^(1-n)"
    INNER_R1P = "inner-r^(1-p)"
    OUTER_R1P_LIMIT = "outer-R^(1-p)-limit"
    OUTER_R1N_LIMIT = "outer-R^(1-n)-limit"
    OUTER_RLOG_LIMIT = "outer-(R ln(R/r))^(1-n)-limit"
    SPLIT_GAMMA = "split-|m|^(p-1)gamma^(1-p)"
    ANNULUS_INNER_LOG = "annulus-(r ln(R/r))^(1-n)"
    ANNULUS_OUTER_LOG = "annulus-(R ln(R/r))^(1-n)"
    ANNULUS_PSI1 = "annulus-psi1-inner"
    ANNULUS_PSI2 = "annulus-psi2-outer"


@dataclass(frozen=True)
class FunctionalValues:
    L: float
    K1: float
    K0: float
    err_L: float = 0.0
    err_K1: float = 0.0
    err_K0: float = 0.0
    L1: Optional[float] = None
    L2: Optional[float] = None
    K11: Optional[float] = None
    K12: Optional[float] = None
    rhs: Optional[float] = None
    err_rhs: float = 0.0


@dataclass(frozen=True)
class _Kernel:
    root: Callable  # (s, rho) -> kernel ** (1/p)
    tail_power: float  # root ~ rho ** tail_power at infinity
    lo: float
    hi: float


def _kernel(kind: KernelKind, params: ProblemParams, R: Optional[float]) -> _Kernel:
    kind = KernelKind(kind)
    p, n, m, r = params.p, params.n, params.m, params.r
    decay_exp = -(n - 1) / (p - 1)  # root of rho^{-(n-1)p'}

    if kind in (KernelKind.ANNULUS_PSI1, KernelKind.ANNULUS_PSI2):
        R = params.outer if R is None else R
        if R is None or not math.isfinite(R):
            raise KernelDomainError(f"{kind.value} needs a finite outer radius")
        s_R = math.log(R / r)
        if params.regime is Regime.M_ZERO:
            if kind is KernelKind.ANNULUS_PSI1:
                root = lambda s, rho: 1.0 / (rho * (s_R - s))
            else:
                root = lambda s, rho: 1.0 / (rho * s)
        else:
            gap_R = R**m - r**m
            if kind is KernelKind.ANNULUS_PSI1:
                root = lambda s, rho: abs(m) * rho ** (m - 1.0) / np.abs(gap_R - power_gap(params, s))
            else:
                root = lambda s, rho: abs(m) * rho ** (m - 1.0) / np.abs(power_gap(params, s))
        return _Kernel(root, 0.0, r, R)

    if kind is KernelKind.EXTERIOR_M_POSITIVE:
        return _Kernel(lambda s, rho: rho**decay_exp, decay_exp, r, math.inf)
    if kind is KernelKind.EXTERIOR_OUTER:
        return _Kernel(lambda s, rho: 1.0 / rho, -1.0, r, math.inf)
    if kind is KernelKind.EXTERIOR_INNER:
        if params.regime is Regime.M_ZERO:
            raise RegimeError("the |r^m - rho^m| kernel needs m != 0")
        tail = decay_exp if m < 0 else decay_exp - m
        return _Kernel(lambda s, rho: abs(m) * rho**decay_exp / np.abs(power_gap(params, s)), tail, r, math.inf)
    if kind in (KernelKind.EXTERIOR_LOG, KernelKind.EXTERIOR_LOG_PLAIN):
        if params.regime is not Regime.M_ZERO:
            raise RegimeError("logarithmic kernels belong to the p = n case")
        if kind is KernelKind.EXTERIOR_LOG:
            return _Kernel(lambda s, rho: 1.0 / (rho * s), -1.0, r, math.inf)
        return _Kernel(lambda s, rho: 1.0 / rho, -1.0, r, math.inf)
    raise KernelDomainError(f"unknown kernel {kind!r}")


def kernel_values(kind: KernelKind, params: ProblemParams, rho, R: Optional[float] = None):
    """The kernel (root ** p) at the radii ``rho``."""
    k = _kernel(kind, params, R)
    rho = np.asarray(rho, dtype=float)
    return k.root(np.log(rho / params.r), rho) ** params.p


def _tail_decay(decay, tau: float, p: float, n: int):
    if isinstance(decay, Power):
        return Power((decay.sigma + tau) * p + n - 1)
    if isinstance(decay, BoundedLog):
        return Power(tau * p + n - 1)
    if isinstance(decay, Exponential):
        return Exponential(p * decay.rate, decay.power)
    raise DivergentTail(f"no tail model for decay class {decay!r} on an unbounded interval")


def _derivative_decay(u: RadialProfile):
    if u.derivative_decay is not None:
        return u.derivative_decay
    if isinstance(u.decay, Power):
        return Power(u.decay.sigma - 1.0)
    if isinstance(u.decay, BoundedLog):
        return Power(-1.0)
    return u.decay


def _check_interval(u: RadialProfile, interval, lo=None, hi=None):
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError(f"empty interval {interval!r}")
    if a < u.support_left or b > u.support_right:
        raise KernelDomainError(f"interval {interval!r} leaves the profile support")
    if lo is not None and (a < lo or b > hi):
        raise KernelDomainError(f"interval {interval!r} leaves the kernel domain ({lo}, {hi})")
    return a, b


def _radial_integral(fun, u: RadialProfile, params: ProblemParams, a: float, b: float,
                     tail_decay, spec: QuadratureSpec, right_edge: float = math.inf) -> IntegralResult:
    """sphere_area * int_a^b fun(s, rho) rho^(n-1) drho, fun vectorised in (s, rho)."""
    r, n = params.r, params.n
    cuts = sorted({a, *[x for x in u.breakpoints if a < x < b]})
    if math.isfinite(b):
        cuts.append(b)
        tail_start = None
    else:
        tail_start = max(2.0 * a, cuts[-1] * 2.0 if len(cuts) > 1 else 2.0 * a)
        cuts.append(tail_start)
    s_edge = math.log(right_edge / r) if math.isfinite(right_edge) else math.inf

    def g(s):
        rho = r * np.exp(s)
        with np.errstate(all="ignore"):
            val = fun(s, rho) * rho**n
        bad = ~np.isfinite(val)
        if bad.any():
            # collapsed nodes next to a finite singular edge carry no weight
            near = (s <= 1e-300) | (s >= s_edge * (1.0 - 1e-13))
            if (bad & ~near).any():
                raise NonFinite(f"integrand not finite at rho={rho[bad & ~near][0]!r}")
            val = np.where(bad, 0.0, val)
        return val

    total = ZERO
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total = total + integrate_finite(g, math.log(lo / r), math.log(hi / r), spec)
    if tail_start is not None:
        def h(rho):
            with np.errstate(all="ignore"):
                return fun(np.log(rho / r), rho) * rho ** (n - 1)

        total = total + integrate_tail(h, tail_start, spec, tail_decay)
    return total.scaled(params.sphere_area)


def eval_L(u: RadialProfile, params: ProblemParams, interval=None, spec: QuadratureSpec = ORACLE_SPEC) -> IntegralResult:
    """sphere_area * int |u'(rho)|^p rho^(n-1) drho over ``interval``."""
    interval = interval or (u.support_left, u.support_right)
    a, b = _check_interval(u, interval)
    p = params.p

    def fun(s, rho):
        return np.abs(u.du_log(s)) ** p

    tail = None if math.isfinite(b) else _tail_decay(_derivative_decay(u), 0.0, p, params.n)
    return _radial_integral(fun, u, params, a, b, tail, spec, right_edge=u.support_right)


def eval_K1(u: RadialProfile, params: ProblemParams, kind: KernelKind, interval=None,
            spec: QuadratureSpec = ORACLE_SPEC, R: Optional[float] = None) -> IntegralResult:
    """sphere_area * int kernel(rho) |u(rho)|^p rho^(n-1) drho over ``interval``."""
    k = _kernel(kind, params, R)
    interval = interval or (u.support_left, min(u.support_right, k.hi))
    a, b = _check_interval(u, interval, k.lo, k.hi)
    p = params.p

    def fun(s, rho):
        return np.abs(u.u_log(s) * k.root(s, rho)) ** p

    tail = None if math.isfinite(b) else _tail_decay(u.decay, k.tail_power, p, params.n)
    edge = k.hi if math.isfinite(k.hi) else u.support_right
    return _radial_integral(fun, u, params, a, b, tail, spec, right_edge=edge)


# -- boundary terms ---------------------------------------------------------------

LIMIT_EXPONENTS = tuple(range(4, 15))


def _aitken(x):
    x = np.asarray(x, dtype=float)
    d1 = x[1:-1] - x[:-2]
    d2 = x[2:] - 2.0 * x[1:-1] + x[:-2]
    with np.errstate(all="ignore"):
        acc = x[2:] - (x[2:] - x[1:-1]) ** 2 / d2
    # exactly geometric-free stretches (d2 == 0) are already converged
    return np.where((d2 == 0) | ~np.isfinite(acc), x[2:], acc)


def extrapolate_limit(values, rel_tol: float = 1e-9):
    """Fitted limit of a sequence sampled on a geometric radius ladder.

    Two rounds of Aitken's delta-squared process; returns (limit, error, converged).
    """
    x = np.asarray(values, dtype=float)
    if x.size < 5:
        return float(x[-1]), math.inf, False
    a2 = _aitken(_aitken(x))
    limit = float(a2[-1])
    err = float(abs(a2[-1] - a2[-2]))
    converged = err <= rel_tol * max(abs(limit), 1e-300) or err <= 1e-14 * float(np.max(np.abs(x)) or 1.0)
    return limit, err, converged


def _sphere_integral(u: RadialProfile, params: ProblemParams, rho: float) -> float:
    """int over the sphere of radius rho of |u|^p dS."""
    val = u.boundary_value(rho)
    if not math.isfinite(val):
        raise NonFinite(f"profile not finite on the sphere rho={rho}")
    return params.sphere_area * rho ** (params.n - 1) * abs(val) ** params.p


def eval_K0(u: RadialProfile, params: ProblemParams, weight: BoundaryWeight, R: Optional[float] = None,
            rel_tol: float = 1e-9) -> IntegralResult:
    """Weighted surface integral of |u|^p on one sphere, or its limit as R -> infinity.

    The limit kinds sample R_j = r 2^j, j = 4..14, and report the Aitken-extrapolated
    limit; ``subdivisions_used`` counts the sampled radii.
    """
    weight = BoundaryWeight(weight)
    p, n, m, r = params.p, params.n, params.m, params.r

    if weight in (BoundaryWeight.INNER_R1N, BoundaryWeight.INNER_R1P):
        factor = r ** (1 - n) if weight is BoundaryWeight.INNER_R1N else r ** (1 - p)
        return IntegralResult(factor * _sphere_integral(u, params, r), 0.0, 1, True)

    if weight is BoundaryWeight.SPLIT_GAMMA:
        gamma = gamma_split_radius(params).gamma
        return IntegralResult(abs(m) ** (p - 1) * gamma ** (1 - p) * _sphere_integral(u, params, gamma), 0.0, 1, True)

    if weight in (BoundaryWeight.ANNULUS_INNER_LOG, BoundaryWeight.ANNULUS_OUTER_LOG,
                  BoundaryWeight.ANNULUS_PSI1, BoundaryWeight.ANNULUS_PSI2):
        R = params.outer if R is None else R
        if R is None or not math.isfinite(R):
            raise KernelDomainError("annulus boundary terms need a finite R")
        at = r if weight in (BoundaryWeight.ANNULUS_INNER_LOG, BoundaryWeight.ANNULUS_PSI1) else R
        if weight in (BoundaryWeight.ANNULUS_INNER_LOG, BoundaryWeight.ANNULUS_OUTER_LOG):
            factor = (at * math.log(R / r)) ** (1 - n)
        elif params.regime is Regime.M_ZERO:
            # |psi'|^(p-1) on the sphere where psi = 1
            factor = (1.0 / (at * math.log(R / r))) ** (p - 1)
        else:
            factor = abs(m * at ** (m - 1) / (R**m - r**m)) ** (p - 1)
        return IntegralResult(factor * _sphere_integral(u, params, at), 0.0, 1, True)

    # limits R -> infinity
    if math.isfinite(u.support_right):
        return IntegralResult(0.0, 0.0, 0, True)
    radii = [r * 2.0**j for j in LIMIT_EXPONENTS]
    vals = []
    for Rj in radii:
        surf = _sphere_integral(u, params, Rj)
        if weight is BoundaryWeight.OUTER_R1P_LIMIT:
            vals.append(Rj ** (1 - p) * surf)
        elif weight is BoundaryWeight.OUTER_R1N_LIMIT:
            vals.append(Rj ** (1 - n) * surf)
        else:
            vals.append((Rj * math.log(Rj / r)) ** (1 - n) * surf)
    limit, err, ok = extrapolate_limit(vals, rel_tol)
    return IntegralResult(limit, err, len(radii), ok)


def eval_theorem1_rhs(K0: float, K1: float, p: float) -> float:
    """(1/p)^p (K0 + (p - 1) K1)^p / K1^(p - 1)."""
    if not K1 > 0:
        raise DegenerateError("K1 = 0: the inequality reduces to L >= 0")
    return (K0 + (p - 1.0) * K1) ** p / (p**p * K1 ** (p - 1.0))


def eval_prop3_split(u: RadialProfile, params: ProblemParams, spec: QuadratureSpec = ORACLE_SPEC) -> FunctionalValues:
    """Gradient and weighted functionals on (r, gamma) and (gamma, inf) with the split boundary term.

    ``rhs`` is (1/p)^p sum_j (K0 + (p-1) K1j)^p / K1j^(p-1).
    """
    if params.regime is not Regime.M_NEGATIVE:
        raise RegimeError("the split functionals need m < 0")
    p, m = params.p, params.m
    gamma = gamma_split_radius(params).gamma
    L1 = eval_L(u, params, (params.r, gamma), spec)
    L2 = eval_L(u, params, (gamma, math.inf), spec)
    K11 = eval_K1(u, params, KernelKind.EXTERIOR_INNER, (params.r, gamma), spec)
    K12 = eval_K1(u, params, KernelKind.EXTERIOR_OUTER, (gamma, math.inf), spec).scaled(abs(m) ** p)
    K0 = eval_K0(u, params, BoundaryWeight.SPLIT_GAMMA)
    rhs = 0.0
    err_rhs = 0.0
    for K1j in (K11, K12):
        if K1j.value > 0:
            term = eval_theorem1_rhs(K0.value, K1j.value, p)
            rhs += term
            err_rhs += term * p * K1j.rel_error
    return FunctionalValues(
        L=L1.value + L2.value,
        K1=K11.value + K12.value,
        K0=K0.value,
        err_L=L1.error_estimate + L2.error_estimate,
        err_K1=K11.error_estimate + K12.error_estimate,
        err_K0=K0.error_estimate,
        L1=L1.value,
        L2=L2.value,
        K11=K11.value,
        K12=K12.value,
        rhs=rhs,
        err_rhs=err_rhs,
    )


def eval_weighted(u: RadialProfile, params: ProblemParams, weight: Callable, interval,
                  spec: QuadratureSpec = ORACLE_SPEC) -> IntegralResult:
    """sphere_area * int weight(s, rho) |u|^p rho^(n-1) drho over a finite interval.

    ``weight`` receives the log-offset s = ln(rho / r) alongside rho.
    """
    a, b = _check_interval(u, interval)
    if not math.isfinite(b):
        raise KernelDomainError("eval_weighted integrates over finite intervals only")
    p = params.p

    def fun(s, rho):
        return weight(s, rho) * np.abs(u.u_log(s)) ** p

    return _radial_integral(fun, u, params, a, b, None, spec, right_edge=b)


# -- flux fields ----------------------------------------------------------------------


def flux_field(which: int, params: ProblemParams, R: Optional[float] = None):
    """Radial component F(rho) of f_i = |psi_i'/psi_i|^(p-2) psi_i'/psi_i."""
    psi = p_harmonic_profile(which, params, R)
    p = params.p

    def F(rho):
        rho = np.asarray(rho, dtype=float)
        g = psi.derivative(rho) / psi.value(rho)
        return np.abs(g) ** (p - 2.0) * g

    return F


def divergence_residual(which: int, params: ProblemParams, radii, R: Optional[float] = None,
                        rel_step: float = 1e-3) -> float:
    """Max relative mismatch of -div f_i = (p - 1)|f_i|^p' at ``radii``.

    The divergence of a radial field is rho^(1-n) (rho^(n-1) F)', taken here by the
    five-point central difference; the step is ``rel_step`` times the distance to the
    nearest sphere (or rho, if smaller).
    """
    F = flux_field(which, params, R)
    n, p = params.n, params.p
    R = params.outer if R is None else R
    rho = np.asarray(radii, dtype=float)
    h = rel_step * np.minimum(rho, np.minimum(rho - params.r, R - rho))
    flux = lambda x: x ** (n - 1) * F(x)
    d = (8.0 * (flux(rho + h) - flux(rho - h)) - (flux(rho + 2 * h) - flux(rho - 2 * h))) / (12.0 * h)
    div = d / rho ** (n - 1)
    target = (p - 1.0) * np.abs(F(rho)) ** params.p_conj
    return float(np.max(np.abs(-div - target) / target))
