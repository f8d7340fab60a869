"""Upper estimates of sharp Hardy constants by minimising discrete quotients L(u) / K(u).

Profiles are continuous and piecewise linear in t = ln(rho / r) on (r, T_max), with
u(T_max) = 0.  L is integrated exactly per element; K uses 3-point Gauss-Legendre.
For p = 2 the minimum solves a tridiagonal generalised eigenproblem; otherwise the
quotient is minimised on the sphere K = 1 by limited-memory quasi-Newton directions
with backtracking (Armijo) steps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from hardy_verify.errors import DegenerateError, Inconsistent, NonConvergence, RegimeError
from hardy_verify.params import ProblemParams, Regime, power_gap

GRADING_FACTOR = 1.2  # element growth ratio toward the inner sphere
ARMIJO = 1e-4
LBFGS_MEMORY = 12


class QuotientKernel(str, enum.Enum):
    EXTERIOR_POWER = "exterior-power"  # rho^-p, m < 0, free inner value
    EXTERIOR_SINGULAR = "exterior-singular"  # rho^-(n-1)p' |rho^m - r^m|^-p, m != 0, u(r) = 0
    EXTERIOR_LOG = "exterior-log"  # rho^-n |ln(rho/r)|^-n, m = 0, u(r) = 0

    @property
    def singular(self) -> bool:
        return self is not QuotientKernel.EXTERIOR_POWER


def target_constant(params: ProblemParams, kernel: QuotientKernel) -> float:
    kernel = QuotientKernel(kernel)
    if kernel is QuotientKernel.EXTERIOR_LOG:
        return ((params.n - 1) / params.n) ** params.n
    return (abs(params.m) / params.p_conj) ** params.p


def _check_pairing(params: ProblemParams, kernel: QuotientKernel):
    if kernel is QuotientKernel.EXTERIOR_POWER and params.regime is not Regime.M_NEGATIVE:
        raise RegimeError("the rho^-p quotient is bounded below by a positive constant only for m < 0")
    if kernel is QuotientKernel.EXTERIOR_SINGULAR and params.regime is Regime.M_ZERO:
        raise RegimeError("the |rho^m - r^m| kernel needs m != 0")
    if kernel is QuotientKernel.EXTERIOR_LOG and params.regime is not Regime.M_ZERO:
        raise RegimeError("the logarithmic kernel belongs to p = n")


@dataclass(frozen=True)
class DiscreteProfile:
    """Piecewise-linear profile in t = ln(rho / r).

    ``offsets`` are the knots in the log variable; they stay distinct where the radii
    ``knots`` round to r.  When omitted they are computed from ``knots``.
    """

    knots: np.ndarray
    values: np.ndarray
    offsets: Optional[np.ndarray] = None

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if self.offsets is None:
            object.__setattr__(self, "offsets", np.log(k / k[0]))
        t = np.asarray(self.offsets, dtype=float)
        if t.ndim != 1 or t.size < 3 or t[0] != 0.0 or not np.all(np.diff(t) > 0):
            raise ValueError("knots must be strictly increasing (in log radius), at least 3, starting at r")
        if k.shape != t.shape or np.asarray(self.values).shape != t.shape:
            raise ValueError("knots, offsets and values must have the same length")

    @property
    def r(self) -> float:
        return float(self.knots[0])

    def __call__(self, rho):
        t = np.log(np.asarray(rho, dtype=float) / self.r)
        return np.interp(t, self.offsets, self.values)


def make_grid(r: float, t_max: float, size: int, graded: bool, p: float = 2.0) -> np.ndarray:
    """Knots in t = ln(rho / r) for ``size`` elements on (r, t_max); sizes N and 2N nest.

    Graded grids put half of the elements on a geometric sequence tau 1.2^-j toward
    rho = r (tau = min(1, ln(t_max / r) / 4) in the log variable) and the other half
    uniformly on (tau, ln(t_max / r)).  Near-extremals of the singular kernels
    concentrate at the inner sphere on a logarithmic scale, which the geometric part
    resolves down to offsets of 1.2^-(N/2 - 1), floored at 10^(-280/(p+1)) so that the
    kernel stays finite (deeper nodes are dropped; nesting is preserved).
    """
    L = math.log(t_max / r)
    if not graded:
        t = L * np.linspace(0.0, 1.0, size + 1)
    else:
        n_geo = size // 2
        tau = min(1.0, L / 4.0)
        geo = tau * GRADING_FACTOR ** -np.arange(n_geo - 1, 0, -1, dtype=float)
        geo = geo[geo >= 10.0 ** (-280.0 / (p + 1.0))]
        t = np.concatenate([[0.0], geo, np.linspace(tau, L, size - n_geo + 1)])
    t[-1] = L
    return t


_GX, _GW = np.polynomial.legendre.leggauss(3)
_GX = 0.5 * (_GX + 1.0)
_GW = 0.5 * _GW


class _Discretisation:
    """Element data shared by the quotient, its gradient and the p = 2 matrices."""

    def __init__(self, params: ProblemParams, kernel: QuotientKernel, t: np.ndarray):
        self.params = params
        self.kernel = QuotientKernel(kernel)
        r, n, p = params.r, params.n, params.p
        t = np.asarray(t, dtype=float)
        self.t = t
        self.h = np.diff(t)
        S = params.sphere_area
        a = n - p
        # exact int rho^(n-p) dt per element
        if a == 0:
            self.wL = S * self.h
        else:
            self.wL = S * r**a * np.exp(a * t[:-1]) * np.expm1(a * self.h) / a
        tg = t[:-1, None] + self.h[:, None] * _GX[None, :]
        self.wK = S * self.h[:, None] * _GW[None, :] * self._kernel_rho_n(tg)
        # free unknowns: the outer knot is clamped; singular kernels also clamp the inner one
        self.first = 1 if self.kernel.singular else 0
        self.size = t.size

    def _kernel_rho_n(self, s):
        """kernel(rho) * rho^n at rho = r e^s."""
        P = self.params
        p, n, m, r = P.p, P.n, P.m, P.r
        rho = r * np.exp(s)
        if self.kernel is QuotientKernel.EXTERIOR_POWER:
            return rho ** (n - p)
        if self.kernel is QuotientKernel.EXTERIOR_LOG:
            return s ** (-n)
        return rho ** (n - (n - 1) * P.p_conj) * np.abs(power_gap(P, s)) ** (-p)

    def full(self, x):
        u = np.zeros(self.size)
        u[self.first:-1] = x
        return u

    def LK(self, x):
        u = self.full(x)
        p = self.params.p
        d = np.diff(u) / self.h
        ug = u[:-1, None] * (1.0 - _GX) + u[1:, None] * _GX
        return float(np.sum(self.wL * np.abs(d) ** p)), float(np.sum(self.wK * np.abs(ug) ** p))

    def gradients(self, x):
        u = self.full(x)
        p = self.params.p
        d = np.diff(u) / self.h
        gd = p * self.wL * np.abs(d) ** (p - 2.0) * d / self.h
        gL = np.zeros(self.size)
        gL[:-1] -= gd
        gL[1:] += gd
        ug = u[:-1, None] * (1.0 - _GX) + u[1:, None] * _GX
        gu = p * self.wK * np.abs(ug) ** (p - 2.0) * ug
        gK = np.zeros(self.size)
        gK[:-1] += np.sum(gu * (1.0 - _GX), axis=1)
        gK[1:] += np.sum(gu * _GX, axis=1)
        sl = slice(self.first, self.size - 1)
        return gL[sl], gK[sl]

    def hessian_L_banded(self, x):
        """Hessian of L at x in scipy.linalg.solve_banded (1, 1) layout."""
        u = self.full(x)
        p = self.params.p
        d = np.diff(u) / self.h
        c = p * (p - 1.0) * self.wL * np.abs(d) ** (p - 2.0) / self.h**2
        diag = np.r_[c, 0.0] + np.r_[0.0, c]
        sl = slice(self.first, self.size - 1)
        diag = diag[sl]
        off = -c[self.first:self.size - 1][: diag.size - 1] if self.first else -c[: diag.size - 1]
        ab = np.zeros((3, diag.size))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        return ab

    def matrices(self):
        """Stiffness and mass matrices (p = 2) restricted to the free unknowns."""
        N = self.size
        k = self.wL / self.h**2
        A = sp.diags([np.r_[k, 0.0] + np.r_[0.0, k], -k, -k], [0, 1, -1], shape=(N, N), format="lil")
        m00 = np.sum(self.wK * (1 - _GX) ** 2, axis=1)
        m11 = np.sum(self.wK * _GX**2, axis=1)
        m01 = np.sum(self.wK * _GX * (1 - _GX), axis=1)
        B = sp.diags([np.r_[m00, 0.0] + np.r_[0.0, m11], m01, m01], [0, 1, -1], shape=(N, N), format="lil")
        sl = slice(self.first, N - 1)
        return A.tocsc()[sl, sl], B.tocsc()[sl, sl]


def quotient(u: DiscreteProfile, params: ProblemParams, kernel_kind, error_budget: float = 0.0) -> float:
    """L(u) / K(u) for the discrete profile (boundary values taken as given)."""
    kernel = QuotientKernel(kernel_kind)
    if u.r != params.r:
        raise ValueError("profile starts at a different inner radius")
    disc = _Discretisation(params, kernel, u.offsets)
    vals = np.asarray(u.values, dtype=float)
    p = params.p
    d = np.diff(vals) / disc.h
    ug = vals[:-1, None] * (1.0 - _GX) + vals[1:, None] * _GX
    L = float(np.sum(disc.wL * np.abs(d) ** p))
    K = float(np.sum(disc.wK * np.abs(ug) ** p))
    if not K > error_budget:
        raise DegenerateError("K(u) does not exceed the error budget")
    return L / K


@dataclass(frozen=True)
class OptimizerReport:
    estimated_constant: float
    target_constant: float
    iterations: int
    grid_size: int
    trace: List[float]
    converged: bool
    kernel: str = ""
    t_max: float = math.nan
    method: str = ""
    profile: Optional[DiscreteProfile] = field(default=None, repr=False, compare=False)
    t_max_doubled_constant: Optional[float] = None

    @property
    def relative_excess(self) -> float:
        return (self.estimated_constant - self.target_constant) / self.target_constant

    def to_dict(self) -> dict:
        return {
            "estimated_constant": self.estimated_constant,
            "target_constant": self.target_constant,
            "relative_excess": self.relative_excess,
            "iterations": self.iterations,
            "grid_size": self.grid_size,
            "trace": list(self.trace),
            "converged": self.converged,
            "kernel": self.kernel,
            "t_max": self.t_max,
            "method": self.method,
            "t_max_doubled_constant": self.t_max_doubled_constant,
        }


def _seed_values(disc: _Discretisation) -> np.ndarray:
    """Near-extremal starting profile, clamped to zero at the outer knot."""
    P = disc.params
    t = disc.t
    taper = 1.0 - t / t[-1]
    if disc.kernel is QuotientKernel.EXTERIOR_POWER:
        u = np.exp(-(abs(P.m) / P.p_conj + 0.1) * t) * taper
    elif disc.kernel is QuotientKernel.EXTERIOR_LOG:
        u = t ** ((P.n - 1) / P.n) * taper
    else:
        # u_eps shape with eps = 0.1 (m > 0) or u_s with s just above 1/p' (m < 0)
        g = np.abs(power_gap(P, t))
        if P.m > 0:
            rho = P.r * np.exp(t)
            u = rho ** (-P.m * 0.9 / P.p_conj) * g ** (1.1 / P.p_conj) * taper
        else:
            u = g ** (1.0 / P.p_conj + 0.1) * taper
    return u[disc.first:-1]


def _eigen(disc: _Discretisation):
    A, B = disc.matrices()
    try:
        vals, vecs = spla.eigsh(A, k=1, M=B, sigma=0.0, which="LM")
    except Exception:  # dense fallback for tiny or awkward grids
        import scipy.linalg as sla

        vals, vecs = sla.eigh(A.toarray(), B.toarray(), subset_by_index=[0, 0])
    x = vecs[:, 0]
    L, K = disc.LK(x)
    return L / K, x


def _lbfgs_armijo(disc: _Discretisation, x0: np.ndarray, max_iters: int, tol: float):
    """Minimise L/K on K = 1; returns (best value, x, iterations, trace, converged)."""
    p = disc.params.p

    def normalise(x):
        _, K = disc.LK(x)
        if not K > 0:
            raise DegenerateError("iterate has K = 0")
        return x / K ** (1.0 / p)

    def value_grad(x):
        L, K = disc.LK(x)
        gL, gK = disc.gradients(x)
        q = L / K
        return q, (gL - q * gK) / K

    x = normalise(x0)
    q, g = value_grad(x)
    trace = [q]
    s_hist: List[np.ndarray] = []
    y_hist: List[np.ndarray] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        # two-loop recursion
        d = -g.copy()
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            a = np.dot(s, d) / np.dot(y, s)
            alphas.append(a)
            d -= a * y
        if s_hist:
            d *= np.dot(s_hist[-1], y_hist[-1]) / np.dot(y_hist[-1], y_hist[-1])
        for (s, y), a in zip(zip(s_hist, y_hist), reversed(alphas)):
            b = np.dot(y, d) / np.dot(y, s)
            d += (a - b) * s
        slope = float(np.dot(g, d))
        if slope >= 0:
            d, slope = -g, -float(np.dot(g, g))
            s_hist.clear()
            y_hist.clear()
        step = 1.0
        while True:
            x_new = normalise(x + step * d)
            q_new, g_new = value_grad(x_new)
            if q_new <= q + ARMIJO * step * slope:
                break
            step *= 0.5
            if step < 1e-20:
                q_new = q
                break
        if q_new >= q:
            converged = True
            break
        s_vec, y_vec = x_new - x, g_new - g
        if np.dot(s_vec, y_vec) > 1e-300:
            s_hist.append(s_vec)
            y_hist.append(y_vec)
            if len(s_hist) > LBFGS_MEMORY:
                s_hist.pop(0)
                y_hist.pop(0)
        decrease = q - q_new
        x, q, g = x_new, q_new, g_new
        trace.append(q)
        if decrease <= tol * q:
            converged = True
            break
    return q, x, it, trace, converged


def _inverse_power(disc: _Discretisation, x0: np.ndarray, max_iters: int, tol: float):
    """Nonlinear inverse power iteration for the discrete p-quotient.

    Each step minimises the convex functional L(w)/p - <grad K(u)/p, w> by damped
    Newton (tridiagonal Hessian, Armijo backtracking from step 1) and normalises w.
    The quotient is non-increasing along the iteration.
    """
    from scipy.linalg import solve_banded

    p = disc.params.p

    def normalise(x):
        _, K = disc.LK(x)
        if not K > 0:
            raise DegenerateError("iterate has K = 0")
        return x / K ** (1.0 / p)

    def q_of(x):
        L, K = disc.LK(x)
        return L / K

    x = normalise(x0)
    q = q_of(x)
    trace = [q]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        _, gK = disc.gradients(x)
        b = gK / p
        w = x / q ** (1.0 / (p - 1.0)) if p != 2.0 else x / q
        phi = lambda v: disc.LK(v)[0] / p - float(np.dot(b, v))
        f = phi(w)
        for _ in range(100):
            gL, _ = disc.gradients(w)
            g = gL / p - b
            ab = disc.hessian_L_banded(w) / p
            ab[1] = ab[1] * (1.0 + 1e-13) + 1e-300
            d = -solve_banded((1, 1), ab, g)
            slope = float(np.dot(g, d))
            if slope >= 0:
                d, slope = -g, -float(np.dot(g, g))
            step = 1.0
            while True:
                w_new = w + step * d
                f_new = phi(w_new)
                if f_new <= f + ARMIJO * step * slope or step < 1e-12:
                    break
                step *= 0.5
            done = abs(f - f_new) <= 1e-15 * max(abs(f), 1e-300)
            w, f = w_new, f_new
            if done:
                break
        x_new = normalise(w)
        q_new = q_of(x_new)
        if q_new > q:
            converged = True
            break
        decrease = q - q_new
        x, q = x_new, q_new
        trace.append(q)
        if decrease <= tol * q:
            converged = True
            break
    return q, x, it, trace, converged


def minimize_quotient(params: ProblemParams, kernel_kind, grid_size: int = 2000, t_max: Optional[float] = None,
                      max_iters: int = 20000, step_rule: str = "auto", tol: float = 1e-13, seed: int = 0,
                      check_t_max: bool = False, raise_on_failure: bool = False) -> OptimizerReport:
    """Best discrete quotient on (r, t_max) with u(t_max) = 0.

    ``step_rule``: ``"eigen"`` (p = 2 only), ``"inverse-power"`` (nonlinear inverse
    iteration with damped Newton inner solves), ``"armijo"`` (quasi-Newton directions,
    halving from step 1 with Armijo constant 1e-4, one restart from a perturbed
    minimiser) or ``"auto"`` (eigen for p = 2, inverse-power otherwise).  ``check_t_max`` repeats the run with 2 t_max.
    """
    kernel = QuotientKernel(kernel_kind)
    _check_pairing(params, kernel)
    t_max = params.r * 2.0**12 if t_max is None else float(t_max)
    if not t_max > params.r:
        raise ValueError("t_max must exceed r")
    if step_rule == "auto":
        step_rule = "eigen" if params.p == 2.0 else "inverse-power"
    t = make_grid(params.r, t_max, grid_size, kernel.singular, params.p)
    disc = _Discretisation(params, kernel, t)

    if step_rule == "eigen":
        if params.p != 2.0:
            raise ValueError("the eigen step rule needs p = 2")
        q, x = _eigen(disc)
        its, trace, ok = 1, [q], True
    elif step_rule == "inverse-power":
        q, x, its, trace, ok = _inverse_power(disc, _seed_values(disc), max_iters, tol)
    elif step_rule == "armijo":
        q, x, its, trace, ok = _lbfgs_armijo(disc, _seed_values(disc), max_iters, tol)
        rng = np.random.default_rng(seed)
        x1 = x * (1.0 + 0.05 * rng.standard_normal(x.size))
        q1, x1, its1, trace1, ok1 = _lbfgs_armijo(disc, x1, max_iters, tol)
        its += its1
        if q1 < q:
            q, x, ok = q1, x1, ok1
            trace = trace + [t for t in trace1 if t < trace[-1]]
    else:
        raise ValueError(f"unknown step rule {step_rule!r}")

    if not ok and raise_on_failure:
        raise NonConvergence(f"quotient minimisation stopped after {its} iterations at {q!r}")
    doubled = None
    if check_t_max:
        doubled = minimize_quotient(params, kernel, grid_size, 2.0 * t_max, max_iters, step_rule, tol, seed
                                    ).estimated_constant
    values = disc.full(x)
    sign = 1.0 if values[np.argmax(np.abs(values))] >= 0 else -1.0
    return OptimizerReport(
        estimated_constant=float(q),
        target_constant=target_constant(params, kernel),
        iterations=its,
        grid_size=grid_size,
        trace=[float(v) for v in trace],
        converged=ok,
        kernel=kernel.value,
        t_max=t_max,
        method=step_rule,
        profile=DiscreteProfile(params.r * np.exp(t), sign * values, t),
        t_max_doubled_constant=doubled,
    )


@dataclass(frozen=True)
class Extrapolation:
    value: float
    order: float
    sequence: Sequence[float]


def refine_and_extrapolate(reports: Sequence, rel_tol: float = 1e-12) -> Extrapolation:
    """Richardson extrapolation of constants at grid sizes g, 2g, 4g.

    Accepts OptimizerReports or bare numbers.  The sequence must be non-increasing
    (up to ``rel_tol``); otherwise :class:`Inconsistent` is raised.
    """
    vals = [float(getattr(r, "estimated_constant", r)) for r in reports]
    if len(vals) != 3:
        raise ValueError("need exactly three reports (g, 2g, 4g)")
    sizes = [getattr(r, "grid_size", None) for r in reports]
    if all(s is not None for s in sizes) and not (sizes[1] == 2 * sizes[0] and sizes[2] == 2 * sizes[1]):
        raise ValueError(f"grid sizes must double, got {sizes}")
    v1, v2, v3 = vals
    slack = rel_tol * max(abs(v) for v in vals)
    if v2 > v1 + slack or v3 > v2 + slack:
        raise Inconsistent(f"refinement sequence is not monotone: {vals}")
    d1, d2 = v1 - v2, v2 - v3
    if abs(d1) <= slack and abs(d2) <= slack:
        return Extrapolation(v3, math.nan, vals)
    if d2 <= slack or d1 <= d2:
        # no geometric convergence visible; fall back to the finest value
        return Extrapolation(v3, math.nan, vals)
    ratio = d1 / d2
    return Extrapolation(v3 - d2 / (ratio - 1.0), math.log2(ratio), vals)
