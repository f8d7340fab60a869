"""End-to-end checks of the annulus and exterior-domain Hardy inequalities.

Every check evaluates the functionals on a normalised copy of the profile (max |u| = 1
on a probe grid) and rescales the two sides afterwards.  Both sides are homogeneous
in u, so this changes nothing mathematically but makes verdicts independent of the
amplitude of u.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union

import numpy as np

from hardy_verify.errors import (
    DegenerateError,
    DivergentTail,
    GenerationFailure,
    MembershipError,
    NonConvergence,
    NonFinite,
    ParamError,
    RegimeError,
)
from hardy_verify.extremals import (
    ExtremalFamily,
    FamilyId,
    MembershipSet,
    MembershipSetId,
    check_membership,
    sandwich_bounds,
)
from hardy_verify.functionals import (
    BoundaryWeight,
    KernelKind,
    eval_K0,
    eval_K1,
    eval_L,
    eval_prop3_split,
    eval_theorem1_rhs,
    eval_weighted,
)
from hardy_verify.params import ProblemParams, Regime, gamma_split_radius
from hardy_verify.profiles import Compact, Power, RadialProfile
from hardy_verify.quadrature import ORACLE_SPEC, IntegralResult, QuadratureSpec

EQ_TOL = 1e-7
SANDWICH_LADDER = (10, 20, 40, 80)  # truncation radii r 2^j for divergent sandwich families


class ClaimId(str, enum.Enum):
    THM1 = "THM1"
    P1_I = "P1_I"
    P1_II = "P1_II"
    P1_III = "P1_III"
    P2_I = "P2_I"
    P2_II = "P2_II"
    P2_III = "P2_III"
    P3 = "P3"
    EX1 = "EX1"
    EX2 = "EX2"


class Status(str, enum.Enum):
    HOLDS = "HOLDS"
    EQUALITY = "EQUALITY"
    SANDWICH_OK = "SANDWICH_OK"
    VIOLATION = "VIOLATION"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class VerificationResult:
    claim_id: ClaimId
    lhs: float
    rhs: float
    slack: float
    rel_gap: float
    status: Status
    error_budget: float
    inputs: Dict[str, object]
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "rel_gap": self.rel_gap,
            "status": self.status.value,
            "error_budget": self.error_budget,
            "inputs": dict(self.inputs),
            "diagnostics": _jsonable(self.diagnostics),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


ProfileLike = Union[RadialProfile, ExtremalFamily]


def _unwrap(u: ProfileLike):
    if isinstance(u, ExtremalFamily):
        return u.profile, u
    return u, None


def _inputs(u: RadialProfile, params: ProblemParams, family: Optional[ExtremalFamily]) -> Dict[str, object]:
    out: Dict[str, object] = {
        "profile": u.label,
        "p": params.p,
        "n": params.n,
        "r": params.r,
        "R": params.outer if params.bounded else "inf",
    }
    if family is not None:
        out["family"] = family.family_id.value
        out["parameters"] = dict(family.parameters)
    return out


def _probe_scale(u: RadialProfile) -> float:
    s_max = math.log(u.support_right / u.support_left) if math.isfinite(u.support_right) else 40.0
    s = np.concatenate([np.geomspace(1e-8, 1.0, 40) * s_max * (1.0 - 1e-9), np.linspace(0.0, s_max, 41)[1:-1]])
    s = s[s < s_max]
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(u.u_log(s), dtype=float))
    vals = vals[np.isfinite(vals)]
    return float(vals.max()) if vals.size else 0.0


def _propagate(fn: Callable[..., float], results: Dict[str, IntegralResult]):
    """Value of ``fn`` at the integral values and a first-order error budget."""
    x = {k: v.value for k, v in results.items()}
    val = fn(**x)
    budget = 0.0
    for k, res in results.items():
        if res.error_estimate > 0:
            bumped = dict(x)
            bumped[k] = x[k] + res.error_estimate
            budget += abs(fn(**bumped) - val)
    return val, budget


def _classify(lhs: float, rhs: float, budget: float, eq_tol: float, converged: bool):
    slack = lhs - rhs
    scale = max(abs(lhs), abs(rhs))
    rel_gap = 0.0 if scale == 0.0 else slack / scale
    budget = budget + 64.0 * np.finfo(float).eps * scale
    if abs(rel_gap) <= eq_tol:
        status = Status.EQUALITY
    elif slack > 0:
        status = Status.HOLDS
    elif slack < -budget:
        status = Status.VIOLATION if converged else Status.INCONCLUSIVE
    else:
        status = Status.INCONCLUSIVE
    return slack, rel_gap, status, budget


def _result(claim, lhs, rhs, budget, eq_tol, converged, inputs, diagnostics, scale_factor):
    lhs, rhs, budget = lhs * scale_factor, rhs * scale_factor, budget * scale_factor
    slack, rel_gap, status, budget = _classify(lhs, rhs, budget, eq_tol, converged)
    if not converged:
        diagnostics["quadrature"] = "not converged"
    return VerificationResult(ClaimId(claim), lhs, rhs, slack, rel_gap, status, budget, inputs, diagnostics)


def _vacuous(claim, inputs, reason) -> VerificationResult:
    return VerificationResult(ClaimId(claim), 0.0, 0.0, 0.0, 0.0, Status.HOLDS, 0.0, inputs,
                              {"vacuous": reason})


def _inconclusive(claim, inputs, exc) -> VerificationResult:
    return VerificationResult(ClaimId(claim), math.nan, math.nan, math.nan, math.nan, Status.INCONCLUSIVE,
                              math.inf, inputs, {"error": f"{type(exc).__name__}: {exc}"})


def _membership(u, params, set_id, R, diagnostics):
    res = check_membership(u, MembershipSet(set_id, params), R=R)
    if res.status == "fail":
        raise MembershipError(f"profile {u.label!r} is not in {set_id.value}")
    diagnostics["membership"] = res.status


def _run(claim, u_like, params, set_id, degree, body, eq_tol, check, R=None):
    """Shared driver: membership, normalisation, error mapping.

    ``body(u_hat, diagnostics)`` returns (lhs, rhs, budget, converged) for the
    normalised profile; ``degree`` is the homogeneity degree of both sides.
    """
    u, family = _unwrap(u_like)
    inputs = _inputs(u, params, family)
    diagnostics: Dict[str, object] = {}
    scale = _probe_scale(u)
    if scale == 0.0:
        return _vacuous(claim, inputs, "u vanishes identically")
    if check:
        _membership(u, params, set_id, R, diagnostics)
    u_hat = u.scaled(1.0 / scale)
    try:
        lhs, rhs, budget, converged = body(u_hat, diagnostics)
    except DegenerateError as exc:
        return _vacuous(claim, inputs, str(exc))
    except (NonConvergence, NonFinite) as exc:
        return _inconclusive(claim, inputs, exc)
    return _result(claim, lhs, rhs, budget, eq_tol, converged, inputs, diagnostics, scale**degree)


def _all_converged(*results: IntegralResult) -> bool:
    return all(r.converged for r in results)


# -- THM1 --------------------------------------------------------------------------------


def verify_thm1(u: ProfileLike, params: ProblemParams, R: Optional[float] = None, which: int = 1,
                spec: QuadratureSpec = ORACLE_SPEC, eq_tol: float = EQ_TOL, check: bool = True) -> VerificationResult:
    """L >= (1/p)^p (K0 + (p-1) K1)^p / K1^(p-1) on the annulus (r, R) with weight psi_which."""
    R = params.outer if R is None else float(R)
    if not math.isfinite(R):
        raise ParamError("the annulus inequality needs a finite R")
    params = params.with_outer(R)
    if which not in (1, 2):
        raise ParamError("which must be 1 or 2")
    kind = KernelKind.ANNULUS_PSI1 if which == 1 else KernelKind.ANNULUS_PSI2
    weight = BoundaryWeight.ANNULUS_PSI1 if which == 1 else BoundaryWeight.ANNULUS_PSI2
    set_id = MembershipSetId.M1_ANNULUS if which == 1 else MembershipSetId.M2_ANNULUS
    p = params.p

    def body(v, diag):
        L = eval_L(v, params, (params.r, R), spec)
        K1 = eval_K1(v, params, kind, (params.r, R), spec, R=R)
        K0 = eval_K0(v, params, weight, R=R)
        if not K1.value > 0:
            raise DegenerateError("K1 = 0: the inequality reduces to L >= 0")
        diag.update(L=L.value, K1=K1.value, K0=K0.value)
        rhs, b = _propagate(lambda K0, K1: eval_theorem1_rhs(K0, K1, p), {"K0": K0, "K1": K1})
        return L.value, rhs, b + L.error_estimate, _all_converged(L, K1, K0)

    return _run(ClaimId.THM1, u, params, set_id, p, body, eq_tol, check, R=R)


# -- P1 ----------------------------------------------------------------------------------

_P1_REGIME = {"i": Regime.M_POSITIVE, "ii": Regime.M_NEGATIVE, "iii": Regime.M_ZERO}


def _require_regime(params: ProblemParams, regime: Regime, what: str):
    if params.regime is not regime:
        raise RegimeError(f"{what} needs {regime.value}, got {params.regime.value} ({params.describe()})")


def _exterior(params: ProblemParams) -> ProblemParams:
    return params if not params.bounded else params.with_outer(math.inf)


def verify_prop1(part: str, u: ProfileLike, params: ProblemParams, spec: QuadratureSpec = ORACLE_SPEC,
                 eq_tol: float = EQ_TOL, check: bool = True) -> VerificationResult:
    """Exterior inequalities for profiles with vanishing outer limit (parts i, ii, iii)."""
    part = str(part).lower()
    if part not in _P1_REGIME:
        raise ParamError(f"part must be one of i, ii, iii; got {part!r}")
    _require_regime(params, _P1_REGIME[part], f"part {part}")
    params = _exterior(params)
    p, n, m, pc = params.p, params.n, params.m, params.p_conj
    claim = {"i": ClaimId.P1_I, "ii": ClaimId.P1_II, "iii": ClaimId.P1_III}[part]

    if part == "ii":
        def body(v, diag):
            L = eval_L(v, params, spec=spec)
            K = eval_K1(v, params, KernelKind.EXTERIOR_OUTER, spec=spec)
            K0 = eval_K0(v, params, BoundaryWeight.INNER_R1P)
            if not K.value > 0:
                raise DegenerateError("weighted integral vanishes")
            diag.update(L=L.value, K=K.value, K0=K0.value)
            lhs, bl = _propagate(lambda L: L ** (1 / p), {"L": L})
            rhs, br = _propagate(lambda K, K0: abs(m) / pc * K ** (1 / p) + K0 / p * K ** (-1 / pc),
                                 {"K": K, "K0": K0})
            return lhs, rhs, bl + br, _all_converged(L, K, K0)

        return _run(claim, u, params, MembershipSetId.M1_EXT, 1, body, eq_tol, check)

    kind = KernelKind.EXTERIOR_M_POSITIVE if part == "i" else KernelKind.EXTERIOR_LOG_PLAIN
    outer_exp = 1 / pc if part == "i" else (n - 1) / n

    def body(v, diag):
        L = eval_L(v, params, spec=spec)
        try:
            J = eval_K1(v, params, kind, spec=spec)
        except DivergentTail as exc:
            raise DegenerateError(f"weighted integral diverges, the product form is vacuous ({exc})")
        K0 = eval_K0(v, params, BoundaryWeight.INNER_R1N)
        diag.update(L=L.value, K=J.value, K0=K0.value)
        lhs, bl = _propagate(lambda J, L: J**outer_exp * L ** (1 / p), {"J": J, "L": L})
        return lhs, K0.value / p, bl, _all_converged(L, J, K0)

    return _run(claim, u, params, MembershipSetId.M1_EXT, p, body, eq_tol, check)


# -- P2 ----------------------------------------------------------------------------------


def _sandwich(claim, family: ExtremalFamily, params: ProblemParams, spec: QuadratureSpec, check: bool):
    """L / K for the near-extremal families against their (lower, upper) bounds.

    When either integral diverges on the full exterior the ratio is taken on (r, T)
    for T = r 2^j along SANDWICH_LADDER and the value at the largest T is reported.
    """
    u = family.profile
    inputs = _inputs(u, params, family)
    diagnostics: Dict[str, object] = {}
    if check:
        _membership(u, params, MembershipSetId.M2_EXT, None, diagnostics)
    lo, hi = sandwich_bounds(family)
    if family.family_id is FamilyId.U_EPS:
        kind, norm = KernelKind.EXTERIOR_INNER, abs(params.m) ** params.p
    else:
        kind, norm = KernelKind.EXTERIOR_LOG, 1.0

    def ratio(interval):
        L = eval_L(u, params, interval, spec)
        K = eval_K1(u, params, kind, interval, spec).scaled(1.0 / norm)
        value = L.value / K.value
        return value, value * (L.rel_error + K.rel_error), L.converged and K.converged

    try:
        try:
            value, err, ok = ratio(None)
            diagnostics["domain"] = "full exterior"
        except DivergentTail:
            ladder = []
            for j in SANDWICH_LADDER:
                value, err, ok = ratio((params.r, params.r * 2.0**j))
                ladder.append(value)
            diagnostics["domain"] = f"truncated at r*2^{SANDWICH_LADDER[-1]}"
            diagnostics["truncation_ladder"] = ladder
            if family.family_id is FamilyId.U_ETA:
                M = family.parameters["M"]
                diagnostics["ratio_on_(r,M)"] = ratio((params.r, M))[0]
    except (NonConvergence, NonFinite) as exc:
        return _inconclusive(claim, inputs, exc)

    diagnostics.update(lower=lo, upper=hi, ratio=value)
    budget = err + 64.0 * np.finfo(float).eps * value
    slack = min(value - lo, hi - value)
    if slack > budget and ok:
        status = Status.SANDWICH_OK
    elif slack < -budget and ok:
        status = Status.VIOLATION
    else:
        status = Status.INCONCLUSIVE
    bound = lo if value - lo <= hi - value else hi
    rel_gap = slack / max(abs(value), abs(bound))
    return VerificationResult(ClaimId(claim), value, bound, slack, rel_gap, status, budget, inputs, diagnostics)


_P2_REGIME = {"i": Regime.M_POSITIVE, "ii": Regime.M_NEGATIVE, "iii": Regime.M_ZERO}


def verify_prop2(part: str, u: ProfileLike, params: ProblemParams, spec: QuadratureSpec = ORACLE_SPEC,
                 eq_tol: float = EQ_TOL, check: bool = True) -> VerificationResult:
    """Exterior inequalities for profiles vanishing on the inner sphere.

    Passing the near-extremal families u_eps (part i) or u_eta (part iii) runs the
    ratio sandwich instead of the inequality.
    """
    part = str(part).lower()
    if part not in _P2_REGIME:
        raise ParamError(f"part must be one of i, ii, iii; got {part!r}")
    _require_regime(params, _P2_REGIME[part], f"part {part}")
    params = _exterior(params)
    claim = {"i": ClaimId.P2_I, "ii": ClaimId.P2_II, "iii": ClaimId.P2_III}[part]
    profile, family = _unwrap(u)
    if family is not None and family.family_id in (FamilyId.U_EPS, FamilyId.U_ETA):
        return _sandwich(claim, family, params, spec, check)

    p, n, m, r, pc = params.p, params.n, params.m, params.r, params.p_conj
    if part == "iii":
        kind, norm, coef = KernelKind.EXTERIOR_LOG, 1.0, (n - 1) / n
        weight, bfac = BoundaryWeight.OUTER_RLOG_LIMIT, 1.0 / n
    else:
        kind, norm, coef = KernelKind.EXTERIOR_INNER, abs(m) ** p, abs(m) / pc
        if part == "i":
            weight, bfac = BoundaryWeight.OUTER_R1P_LIMIT, 1.0 / p
        else:
            weight, bfac = BoundaryWeight.OUTER_R1N_LIMIT, r ** (n - p) / p

    def body(v, diag):
        L = eval_L(v, params, spec=spec)
        J = eval_K1(v, params, kind, spec=spec).scaled(1.0 / norm)
        B = eval_K0(v, params, weight)
        if not J.value > 0:
            raise DegenerateError("weighted integral vanishes")
        diag.update(L=L.value, K=J.value, boundary_limit=B.value)
        lhs, bl = _propagate(lambda L: L ** (1 / p), {"L": L})
        rhs, br = _propagate(lambda J, B: coef * J ** (1 / p) + bfac * B * J ** (-1 / pc), {"J": J, "B": B})
        return lhs, rhs, bl + br, _all_converged(L, J, B)

    return _run(claim, u, params, MembershipSetId.M2_EXT, 1, body, eq_tol, check)


# -- P3, EX1, EX2 ------------------------------------------------------------------------


def verify_prop3(u: ProfileLike, params: ProblemParams, spec: QuadratureSpec = ORACLE_SPEC,
                 eq_tol: float = EQ_TOL, check: bool = True) -> VerificationResult:
    """L >= sum over the pieces (r, gamma), (gamma, inf) of the split lower bounds (m < 0)."""
    _require_regime(params, Regime.M_NEGATIVE, "the split inequality")
    params = _exterior(params)

    def body(v, diag):
        fv = eval_prop3_split(v, params, spec)
        if not (fv.K11 > 0 or fv.K12 > 0):
            raise DegenerateError("both weighted pieces vanish")
        diag.update(L1=fv.L1, L2=fv.L2, K11=fv.K11, K12=fv.K12, K0=fv.K0)
        return fv.L, fv.rhs, fv.err_L + fv.err_rhs, True

    return _run(ClaimId.P3, u, params, MembershipSetId.M_EXT, params.p, body, eq_tol, check)


def _example_preconditions(params: ProblemParams, unit_radius: bool):
    if params.p != 2.0:
        raise ParamError("EX1 and EX2 are p = 2 inequalities")
    if params.n < 3:
        raise ParamError("EX1 and EX2 need n >= 3")
    if unit_radius and params.r != 1.0:
        raise ParamError("EX1 is posed on the exterior of the unit ball (r = 1)")


def verify_examples(which: int, u: ProfileLike, params: ProblemParams, spec: QuadratureSpec = ORACLE_SPEC,
                    eq_tol: float = EQ_TOL, check: bool = True, literal: bool = False) -> VerificationResult:
    """The p = 2 specialisations of the exterior inequalities.

    ``literal=False`` (default) uses the expansion of the p = 2 case term by term.
    ``literal=True`` evaluates an alternative unexpanded form: EX1 then divides the
    boundary integral (not its square) by the weighted integral, and EX2 drops 1/|x|^2
    from the weight, uses the coefficient (4/(n-2))^2 and inverse squares in the last
    term.  These forms are not homogeneous and miss the extremal equality; they are
    kept so the discrepancy can be measured.
    """
    if which not in (1, 2):
        raise ParamError("which must be 1 or 2")
    _example_preconditions(params, unit_radius=(which == 1))
    params = _exterior(params)
    n, r = params.n, params.r
    c = (n - 2) / 2.0

    if which == 1:
        def body(v, diag):
            L = eval_L(v, params, spec=spec)
            K = eval_K1(v, params, KernelKind.EXTERIOR_OUTER, spec=spec)
            B = eval_K0(v, params, BoundaryWeight.INNER_R1N)  # r = 1
            if not K.value > 0:
                raise DegenerateError("weighted integral vanishes")
            diag.update(L=L.value, K=K.value, boundary=B.value, form="literal" if literal else "expanded")
            last = (lambda K, B: 0.25 * B / K) if literal else (lambda K, B: 0.25 * B * B / K)
            rhs, br = _propagate(lambda K, B: c * c * K + c * B + last(K, B), {"K": K, "B": B})
            return L.value, rhs, L.error_estimate + br, _all_converged(L, K, B)

        return _run(ClaimId.EX1, u, params, MembershipSetId.M1_EXT, 2, body, eq_tol, check)

    gamma = gamma_split_radius(params).gamma
    e = n - 2

    def t_of(s):
        return np.exp(e * np.asarray(s))

    def body(v, diag):
        L = eval_L(v, params, spec=spec)
        I_all = eval_K1(v, params, KernelKind.EXTERIOR_OUTER, spec=spec)
        fv = eval_prop3_split(v, params, spec)
        m2 = params.m**2
        I_a = IntegralResult(fv.K11 / m2, fv.err_K1 / m2, 0, True)
        I_b = eval_K1(v, params, KernelKind.EXTERIOR_OUTER, (gamma, math.inf), spec)

        def w(s, rho):
            t = t_of(s)
            core = 2.0 * t * (1.0 - (rho / gamma) ** e) / np.expm1(e * np.asarray(s)) ** 2
            return core if literal else core / rho**2

        I_w = eval_weighted(v, params, w, (params.r, gamma), spec)
        B = params.sphere_area * gamma ** (n - 1) * v.boundary_value(gamma) ** 2
        if not (I_a.value > 0 and I_b.value > 0):
            raise DegenerateError("a weighted piece vanishes")
        diag.update(L=L.value, K=I_all.value, weighted=I_w.value, K_inner=I_a.value, K_outer=I_b.value,
                    boundary=B, form="literal" if literal else "expanded")
        g1 = 2.0 ** (-1.0 / e) / r
        if literal:
            last = lambda Ia, Ib: g1**2 * (4.0 / e) ** 2 * B * B * (Ia**-2 + Ib**-2)
        else:
            last = lambda Ia, Ib: g1**2 / 4.0 * B * B * (1.0 / Ia + 1.0 / Ib)
        rhs, br = _propagate(
            lambda Iall, Iw, Ia, Ib: c * c * Iall + c * c * Iw + g1 * e * B + last(Ia, Ib),
            {"Iall": I_all, "Iw": I_w, "Ia": I_a, "Ib": I_b},
        )
        return L.value, rhs, L.error_estimate + br, _all_converged(L, I_all, I_w, I_b)

    return _run(ClaimId.EX2, u, params, MembershipSetId.M_EXT, 2, body, eq_tol, check)


# -- random admissible profiles --------------------------------------------------------


def _decay_exponent(params: ProblemParams, rng) -> float:
    return max(0.0, (params.n - params.p) / params.p) + rng.uniform(0.5, 1.5)


def random_admissible_profile(seed: int, mset: MembershipSet, params: Optional[ProblemParams] = None,
                              max_attempts: int = 20) -> RadialProfile:
    """u = Q(r/rho) (r/rho)^delta [(1 - r/rho)^a] [(1 - rho/R)^b].

    Q is a random polynomial of degree 1..5 with coefficients in [0.1, 1], so it is
    positive on [0, 1].  The bracketed factors appear when the set requires u to
    vanish on the inner or the outer sphere, with a, b > 1/p' + 0.5.  Candidates
    are re-drawn until :func:`check_membership` passes.
    """
    params = mset.params if params is None else params
    sid = MembershipSetId(mset.set_id)
    annulus = sid in (MembershipSetId.M1_ANNULUS, MembershipSetId.M2_ANNULUS)
    if annulus and not params.bounded:
        raise ParamError("annulus sets need a finite outer radius")
    inner = sid in (MembershipSetId.M2_EXT, MembershipSetId.M_EXT, MembershipSetId.M2_ANNULUS)
    outer = sid is MembershipSetId.M1_ANNULUS
    rng = np.random.default_rng(seed)
    r, R = params.r, params.outer
    base = 1.0 / params.p_conj + 0.5

    for _ in range(max_attempts):
        coeffs = rng.uniform(0.1, 1.0, size=int(rng.integers(1, 6)) + 1)
        dcoeffs = np.polynomial.polynomial.polyder(coeffs)
        delta = _decay_exponent(params, rng)
        a = rng.uniform(base, base + 1.0) if inner else 0.0
        b = rng.uniform(base, base + 1.0) if outer else 0.0
        u = _assemble(params, coeffs, dcoeffs, delta, a, b, seed, annulus)
        if check_membership(u, MembershipSet(sid, params), R=R if annulus else None).passed:
            return u
    raise GenerationFailure(f"no admissible profile for {sid.value} after {max_attempts} draws")


def _assemble(params, coeffs, dcoeffs, delta, a, b, seed, annulus):
    r, R = params.r, params.outer
    polyval = np.polynomial.polynomial.polyval

    def parts(s):
        s = np.asarray(s, dtype=float)
        x = np.exp(-s)
        rho = r / x
        q, dq = polyval(x, coeffs), polyval(x, dcoeffs)
        one_x = -np.expm1(-s)
        with np.errstate(divide="ignore", invalid="ignore"):
            A = one_x**a if a else np.ones_like(s)
            dA = a * one_x ** (a - 1.0) * x if a else np.zeros_like(s)
            if b:
                y = 1.0 - rho / R
                B, dB = y**b, -b * y ** (b - 1.0) * rho / R
            else:
                B, dB = np.ones_like(s), np.zeros_like(s)
        head = q * x**delta
        dhead = -(dq * x + delta * q) * x**delta
        return rho, head, dhead, A, dA, B, dB

    def value_log(s):
        _, head, _, A, _, B, _ = parts(s)
        return head * A * B

    def derivative_log(s):
        rho, head, dhead, A, dA, B, dB = parts(s)
        with np.errstate(invalid="ignore"):
            return (dhead * A * B + head * dA * B + head * A * dB) / rho

    def value(rho):
        return value_log(np.log(np.asarray(rho, dtype=float) / r))

    def derivative(rho):
        return derivative_log(np.log(np.asarray(rho, dtype=float) / r))

    return RadialProfile(
        value=value,
        derivative=derivative,
        support_left=r,
        support_right=R if annulus else math.inf,
        singular_at_left=0.0 < a < 1.0,
        decay=Compact() if annulus else Power(-delta),
        derivative_decay=None if annulus else Power(-delta - 1.0),
        label=f"random(seed={seed})",
        value_log=value_log,
        derivative_log=derivative_log,
    )
