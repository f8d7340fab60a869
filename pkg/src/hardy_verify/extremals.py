"""Extremal and near-extremal radial families with closed-form reference values."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from hardy_verify.errors import NoOracle, ParamError, RegimeError
from hardy_verify.params import ProblemParams, Regime, gamma_split_radius, power_gap
from hardy_verify.profiles import BoundedLog, Compact, Exponential, Power, RadialProfile


class FamilyId(str, enum.Enum):
    U_ALPHA = "u_alpha"
    U_K = "u_k"
    U_Q = "u_q"
    U_EPS = "u_eps"
    U_S = "u_s"
    U_ETA = "u_eta"
    U_BETA = "u_beta"


_REGIME = {
    FamilyId.U_ALPHA: Regime.M_POSITIVE,
    FamilyId.U_EPS: Regime.M_POSITIVE,
    FamilyId.U_K: Regime.M_NEGATIVE,
    FamilyId.U_S: Regime.M_NEGATIVE,
    FamilyId.U_BETA: Regime.M_NEGATIVE,
    FamilyId.U_Q: Regime.M_ZERO,
    FamilyId.U_ETA: Regime.M_ZERO,
}

# the single scalar parameter of each family, as used on the command line
FAMILY_PARAMETER = {
    FamilyId.U_ALPHA: "alpha",
    FamilyId.U_K: "k",
    FamilyId.U_Q: "q",
    FamilyId.U_EPS: "eps",
    FamilyId.U_S: "s",
    FamilyId.U_ETA: "eta",
    FamilyId.U_BETA: "beta",
}


@dataclass(frozen=True)
class ExtremalFamily:
    family_id: FamilyId
    parameters: Dict[str, float]
    profile: RadialProfile
    params: ProblemParams


@dataclass(frozen=True)
class Oracle:
    """Closed-form values.

    ``I`` holds the three quantities in the normalisation of the corresponding
    inequality; ``functionals`` holds the raw integrals the quadrature path computes,
    keyed by the evaluator call that reproduces them.
    """

    I: Tuple[float, float, float]
    functionals: Dict[str, float]


def default_eta_radius(eta: float, r: float) -> float:
    """Smallest M = 2^j e r, j >= 1, with ln(M/r)/M < eta/(2-eta) (and so M > e r)."""
    target = eta / (2.0 - eta)
    for j in range(1, 200):
        M = 2.0**j * math.e * r
        if math.log(M / r) / M < target:
            return M
    raise ParamError(f"no admissible M found for eta={eta}")


def make_family(family_id, parameters: Dict[str, float], params: ProblemParams) -> ExtremalFamily:
    """Build the profile of ``family_id`` with analytic derivative and tail class."""
    fid = FamilyId(family_id)
    if params.regime is not _REGIME[fid]:
        raise RegimeError(f"{fid.value} needs regime {_REGIME[fid].value}, got {params.regime.value}")
    if params.bounded:
        raise RegimeError("extremal families live on the exterior of the ball; pass outer=inf")
    parameters = dict(parameters)
    builder = _BUILDERS[fid]
    profile = builder(parameters, params)
    return ExtremalFamily(fid, parameters, profile, params)


def _need(parameters, name):
    try:
        return float(parameters[name])
    except KeyError:
        raise ParamError(f"missing parameter {name!r}") from None


def _u_alpha(par, P: ProblemParams) -> RadialProfile:
    alpha = _need(par, "alpha")
    if not alpha > 0:
        raise ParamError("alpha must be positive")
    m = P.m
    return RadialProfile(
        value=lambda rho: np.exp(-alpha * np.asarray(rho, dtype=float) ** m),
        derivative=lambda rho: -alpha * m * np.asarray(rho, dtype=float) ** (m - 1)
        * np.exp(-alpha * np.asarray(rho, dtype=float) ** m),
        support_left=P.r,
        decay=Exponential(alpha, m),
        label=f"u_alpha(alpha={alpha:g})",
    )


def _u_k(par, P: ProblemParams) -> RadialProfile:
    k = _need(par, "k")
    if not k > 1.0 / P.p_conj:
        raise ParamError(f"k must exceed 1/p' = {1.0 / P.p_conj:g}")
    if k <= P.p_conj:
        warnings.warn(f"k={k:g} lies in (1/p', p']; outside the stated range k > p'", stacklevel=3)
    km = k * P.m
    return RadialProfile(
        value=lambda rho: np.asarray(rho, dtype=float) ** km,
        derivative=lambda rho: km * np.asarray(rho, dtype=float) ** (km - 1),
        support_left=P.r,
        decay=Power(km),
        label=f"u_k(k={k:g})",
    )


def _u_q(par, P: ProblemParams) -> RadialProfile:
    q = _need(par, "q")
    if not q < 0:
        raise ParamError("q must be negative")
    return RadialProfile(
        value=lambda rho: np.asarray(rho, dtype=float) ** q,
        derivative=lambda rho: q * np.asarray(rho, dtype=float) ** (q - 1),
        support_left=P.r,
        decay=Power(q),
        label=f"u_q(q={q:g})",
    )


def _u_eps(par, P: ProblemParams) -> RadialProfile:
    eps = _need(par, "eps")
    if not 0 < eps < 1:
        raise ParamError("eps must lie in (0, 1)")
    m, pc, r = P.m, P.p_conj, P.r
    a = -m * (1 - eps) / pc
    b = (1 + eps) / pc

    def value_log(s):
        s = np.asarray(s, dtype=float)
        rho = r * np.exp(s)
        return rho**a * power_gap(P, s) ** b

    def derivative_log(s):
        s = np.asarray(s, dtype=float)
        rho = r * np.exp(s)
        gap = power_gap(P, s)
        return (m / pc) * rho ** (a - 1) * gap ** (b - 1) * (2 * eps * rho**m + (1 - eps) * r**m)

    growth = 2 * m * eps / pc
    return RadialProfile(
        value=lambda rho: value_log(np.log(np.asarray(rho, dtype=float) / r)),
        derivative=lambda rho: derivative_log(np.log(np.asarray(rho, dtype=float) / r)),
        support_left=r,
        singular_at_left=b < 1,
        decay=Power(growth),
        derivative_decay=Power(growth - 1),
        label=f"u_eps(eps={eps:g})",
        value_log=value_log,
        derivative_log=derivative_log,
    )


def _u_s(par, P: ProblemParams) -> RadialProfile:
    s_exp = _need(par, "s")
    if not s_exp > 1.0 / P.p_conj:
        raise ParamError(f"s must exceed 1/p' = {1.0 / P.p_conj:g}")
    m, r = P.m, P.r

    def value_log(s):
        return (-power_gap(P, s)) ** s_exp

    def derivative_log(s):
        s = np.asarray(s, dtype=float)
        rho = r * np.exp(s)
        return -s_exp * m * rho ** (m - 1) * (-power_gap(P, s)) ** (s_exp - 1)

    return RadialProfile(
        value=lambda rho: value_log(np.log(np.asarray(rho, dtype=float) / r)),
        derivative=lambda rho: derivative_log(np.log(np.asarray(rho, dtype=float) / r)),
        support_left=r,
        singular_at_left=s_exp < 1,
        decay=BoundedLog(),
        derivative_decay=Power(m - 1),
        label=f"u_s(s={s_exp:g})",
        value_log=value_log,
        derivative_log=derivative_log,
    )


def _u_eta(par, P: ProblemParams) -> RadialProfile:
    eta = _need(par, "eta")
    if not 0 < eta < 1:
        raise ParamError("eta must lie in (0, 1)")
    r, n = P.r, P.n
    M = float(par["M"]) if par.get("M") is not None else default_eta_radius(eta, r)
    if not (M > math.e * r and math.log(M / r) / M < eta / (2 - eta)):
        raise ParamError(f"M={M:g} violates ln(M/r)/M < eta/(2-eta) or M > e r")
    par["M"] = M
    a = (n - 1) / n * (1 + eta / 2)
    b = (n - 1) / n * (1 - eta / 2)
    s_M = math.log(M / r)

    def value_log(s):
        s = np.asarray(s, dtype=float)
        rho = r * np.exp(s)
        return s**a * np.where(s < s_M, M**b, rho**b)

    def derivative_log(s):
        s = np.asarray(s, dtype=float)
        rho = r * np.exp(s)
        inner = a * s ** (a - 1) * M**b / rho
        outer = s**a * rho**b * (a / (rho * s) + b / rho)
        return np.where(s < s_M, inner, outer)

    return RadialProfile(
        value=lambda rho: value_log(np.log(np.asarray(rho, dtype=float) / r)),
        derivative=lambda rho: derivative_log(np.log(np.asarray(rho, dtype=float) / r)),
        support_left=r,
        singular_at_left=a < 1,
        decay=Power(b),
        label=f"u_eta(eta={eta:g},M={M:g})",
        breakpoints=(M,),
        value_log=value_log,
        derivative_log=derivative_log,
    )


def _u_beta(par, P: ProblemParams) -> RadialProfile:
    beta = _need(par, "beta")
    if not beta > 1.0 / P.p_conj:
        raise ParamError(f"beta must exceed 1/p' = {1.0 / P.p_conj:g}")
    m, r = P.m, P.r
    gamma = gamma_split_radius(P).gamma
    s_g = math.log(gamma / r)

    def value_log(s):
        s = np.asarray(s, dtype=float)
        rho = r * np.exp(s)
        with np.errstate(invalid="ignore"):
            inner = (-power_gap(P, s)) ** beta
        return np.where(s <= s_g, inner, rho ** (m * beta))

    def derivative_log(s):
        s = np.asarray(s, dtype=float)
        rho = r * np.exp(s)
        with np.errstate(invalid="ignore", divide="ignore"):
            inner = -beta * m * rho ** (m - 1) * (-power_gap(P, s)) ** (beta - 1)
        outer = m * beta * rho ** (m * beta - 1)
        return np.where(s <= s_g, inner, outer)

    return RadialProfile(
        value=lambda rho: value_log(np.log(np.asarray(rho, dtype=float) / r)),
        derivative=lambda rho: derivative_log(np.log(np.asarray(rho, dtype=float) / r)),
        support_left=r,
        singular_at_left=beta < 1,
        decay=Power(m * beta),
        label=f"u_beta(beta={beta:g})",
        breakpoints=(gamma,),
        value_log=value_log,
        derivative_log=derivative_log,
    )


_BUILDERS = {
    FamilyId.U_ALPHA: _u_alpha,
    FamilyId.U_K: _u_k,
    FamilyId.U_Q: _u_q,
    FamilyId.U_EPS: _u_eps,
    FamilyId.U_S: _u_s,
    FamilyId.U_ETA: _u_eta,
    FamilyId.U_BETA: _u_beta,
}


def sandwich_bounds(family: ExtremalFamily) -> Tuple[float, float]:
    """Interval that L / K must fall in for the two near-extremal families."""
    P = family.params
    if family.family_id is FamilyId.U_EPS:
        eps = family.parameters["eps"]
        lo = (P.m / P.p_conj) ** P.p
        return lo, lo * (1 + eps) ** P.p
    if family.family_id is FamilyId.U_ETA:
        eta = family.parameters["eta"]
        lo = ((P.n - 1) / P.n) ** P.n
        return lo, lo * (1 + eta) ** P.n
    raise NoOracle(f"{family.family_id.value} is an equality family, not a sandwich family")


def closed_form_oracle(family: ExtremalFamily) -> Oracle:
    """Closed-form values of the three terms of the matching inequality.

    Functional keys: ``L`` gradient integral, ``K_m_positive`` / ``K_outer`` /
    ``K_inner`` / ``K_log_plain`` weighted integrals (``K_inner`` includes |m|^p),
    ``K0_*`` boundary terms, and for u_beta the split pieces.
    """
    P = family.params
    p, n, m, r, S = P.p, P.n, P.m, P.r, P.sphere_area
    pc = P.p_conj
    par = family.parameters
    fid = family.family_id

    if fid is FamilyId.U_ALPHA:
        al = par["alpha"]
        I1 = S ** (1 / pc) * (al * p * m) ** (-1 / pc) * math.exp(-al * (p - 1) * r**m)
        I2 = S ** (1 / p) * al * m * (al * p * m) ** (-1 / p) * math.exp(-al * r**m)
        I3 = S / p * math.exp(-al * p * r**m)
        return Oracle((I1, I2, I3), {"K_m_positive": I1**pc, "L": I2**p, "K0_inner_r1n": p * I3})

    if fid is FamilyId.U_K:
        km = par["k"] * m
        e = (km - 1) * p + n
        D = abs(e)
        base = S * r**e / D
        I1 = abs(km) * base ** (1 / p)
        I2 = abs(m) / pc * base ** (1 / p)
        I3 = (1 / p) * D ** (1 / pc) * (S * r**e) ** (1 / p)
        K0 = r ** (1 - p) * S * r ** (n - 1) * r ** (km * p)
        return Oracle((I1, I2, I3), {"L": I1**p, "K_outer": base, "K0_inner_r1p": K0})

    if fid is FamilyId.U_Q:
        q = par["q"]
        I1 = S ** ((n - 1) / n) * (n * abs(q)) ** (-(n - 1) / n) * r ** ((n - 1) * q)
        I2 = S ** (1 / n) * abs(q) ** ((n - 1) / n) * n ** (-1 / n) * r**q
        I3 = S / n * r ** (q * n)
        return Oracle((I1, I2, I3), {"K_log_plain": S * r ** (q * n) / (n * abs(q)), "L": I2**n,
                                     "K0_inner_r1n": n * I3})

    if fid is FamilyId.U_S:
        s = par["s"]
        c = (s - 1) * p + 1
        I1 = s * abs(m) ** (1 / pc) * S ** (1 / p) * r ** (m * c / p) * c ** (-1 / p)
        I2 = S / abs(m) * r ** (m * c) / c
        I3 = S / p * r ** (n - p + m * p * s)
        return Oracle((I1, I2, I3), {"L": I1**p, "K_inner": abs(m) ** p * I2,
                                     "K0_outer_r1n_limit": S * r ** (m * s * p)})

    if fid is FamilyId.U_BETA:
        beta = par["beta"]
        gamma = gamma_split_radius(P).gamma
        c = (beta - 1) * p + 1
        e = (m * beta - 1) * p + n
        D = abs(e)
        L1 = S * beta**p * abs(m) ** (p - 1) * gamma ** (m * c) / c
        K11 = S * abs(m) ** (p - 1) * gamma ** (m * c) / c
        L2 = S * abs(m * beta) ** p * gamma**e / D
        K12 = abs(m) ** p * S * gamma**e / D
        K0 = abs(m) ** (p - 1) * gamma ** (1 - p) * S * gamma ** (n - 1) * gamma ** (m * beta * p)
        rhs = sum((K0 + (p - 1) * K) ** p / (p**p * K ** (p - 1)) for K in (K11, K12))
        return Oracle((L1 + L2, rhs, K0), {"L1": L1, "L2": L2, "K11": K11, "K12": K12, "K0_split": K0,
                                           "L": L1 + L2})

    raise NoOracle(f"{fid.value} has no closed form", bounds=sandwich_bounds(family))


# -- membership ---------------------------------------------------------------------


class MembershipSetId(str, enum.Enum):
    M1_ANNULUS = "M1_ANNULUS"
    M2_ANNULUS = "M2_ANNULUS"
    M1_EXT = "M1_EXT"
    M2_EXT = "M2_EXT"
    M_EXT = "M_EXT"


@dataclass(frozen=True)
class MembershipSet:
    set_id: MembershipSetId
    params: ProblemParams


@dataclass(frozen=True)
class MembershipResult:
    status: str  # "pass", "fail" or "inconclusive"
    trace: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def __bool__(self) -> bool:
        return self.passed


MEMBERSHIP_TOL = 1e-6


def _classify(seq) -> str:
    seq = np.asarray(seq, dtype=float)
    scale = max(float(np.max(np.abs(seq[:4]))), 1e-300)
    last4 = seq[-4:]
    decreasing = bool(np.all(np.diff(last4) <= 1e-12 * scale))
    increasing = bool(np.all(np.diff(last4) >= 0))
    if seq[-1] <= MEMBERSHIP_TOL * max(scale, 1.0) and decreasing:
        return "pass"
    if increasing and seq[-1] > MEMBERSHIP_TOL * max(scale, 1.0):
        return "fail"
    return "inconclusive"


def _outer_ext_sequence(u: RadialProfile, P: ProblemParams):
    p, n = P.p, P.n
    out = []
    for j in range(1, 61):
        R = P.r * 2.0**j
        surf = P.sphere_area * R ** (n - 1) * abs(float(u.value(np.array(R)))) ** p
        w = R ** (1 - n) if P.m >= 0 else R ** (1 - p)
        out.append(w * surf)
    return out


def _inner_sequence(u: RadialProfile, P: ProblemParams):
    p, n, m, r = P.p, P.n, P.m, P.r
    out = []
    for j in range(1, 51):
        s = math.log1p(2.0**-j)
        rho = r * math.exp(s)
        surf = P.sphere_area * rho ** (n - 1) * abs(float(u.u_log(np.array(s)))) ** p
        if P.regime is Regime.M_ZERO:
            w = s ** (1 - p)
        else:
            w = abs(float(power_gap(P, s)) / m) ** (1 - p)
        out.append(w * surf)
    return out


def _outer_annulus_sequence(u: RadialProfile, P: ProblemParams, R: float):
    p, n, m, r = P.p, P.n, P.m, P.r
    out = []
    for j in range(1, 51):
        delta = (R - r) * 2.0**-j
        Rh = R - delta
        if P.regime is Regime.M_ZERO:
            w = abs(-math.log1p(-delta / R)) ** (1 - n)
        else:
            w = abs(-(R**m) * math.expm1(m * math.log1p(-delta / R)) / m) ** (1 - p)
        surf = P.sphere_area * Rh ** (n - 1) * abs(float(u.value(np.array(Rh)))) ** p
        out.append(w * surf)
    return out


def check_membership(u: RadialProfile, mset: MembershipSet, R: Optional[float] = None) -> MembershipResult:
    """Numerical test of the vanishing boundary limits that define an admissible set.

    Outward radii r 2^j and inward radii r (1 + 2^-j); the limit is accepted when the
    last value is below 1e-6 of the initial scale with a non-increasing trend over
    the last four terms.  A heuristic, never a proof.
    """
    P = mset.params
    sid = MembershipSetId(mset.set_id)
    trace: Dict[str, List[float]] = {}
    if sid in (MembershipSetId.M1_ANNULUS, MembershipSetId.M2_ANNULUS):
        R = P.outer if R is None else R
        if R is None or not math.isfinite(R):
            raise ParamError("annulus membership needs a finite R")
        if sid is MembershipSetId.M1_ANNULUS:
            trace["outer"] = _outer_annulus_sequence(u, P, R)
        else:
            trace["inner"] = _inner_sequence(u, P)
    else:
        if sid in (MembershipSetId.M1_EXT, MembershipSetId.M_EXT):
            if math.isfinite(u.support_right):
                trace["outer"] = [0.0] * 4
            else:
                trace["outer"] = _outer_ext_sequence(u, P)
        if sid in (MembershipSetId.M2_EXT, MembershipSetId.M_EXT):
            trace["inner"] = _inner_sequence(u, P)
    verdicts = [_classify(seq) for seq in trace.values()]
    if "fail" in verdicts:
        status = "fail"
    elif "inconclusive" in verdicts:
        status = "inconclusive"
    else:
        status = "pass"
    return MembershipResult(status, trace)
