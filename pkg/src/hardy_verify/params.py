"""Problem parameters, derived exponents and the radial p-harmonic weights."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from hardy_verify.errors import DomainError, RegimeError
from hardy_verify.profiles import Compact, RadialProfile


class Regime(str, enum.Enum):
    M_POSITIVE = "M_POSITIVE"
    M_ZERO = "M_ZERO"
    M_NEGATIVE = "M_NEGATIVE"


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n, 2 pi^(n/2) / Gamma(n/2)."""
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    # exact recursion A(k + 2) = 2 pi A(k) / k seeded with the circle and the 2-sphere
    area = 2.0 * math.pi if n % 2 == 0 else 4.0 * math.pi
    k = 2 if n % 2 == 0 else 3
    while k < n:
        area *= 2.0 * math.pi / k
        k += 2
    return area


@dataclass(frozen=True)
class ProblemParams:
    p: float
    n: int
    r: float
    outer: float  # math.inf for the exterior of the ball
    m: float
    p_conj: float
    sphere_area: float
    regime: Regime

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.outer)

    @property
    def R(self) -> float:
        return self.outer

    def with_outer(self, outer: float) -> "ProblemParams":
        return derive_params(self.p, self.n, self.r, outer)

    def describe(self) -> str:
        outer = "inf" if not self.bounded else f"{self.outer:g}"
        return f"p={self.p:g} n={self.n} r={self.r:g} R={outer} m={self.m:g}"


def derive_params(p: float, n: int, r: float, outer: float = math.inf) -> ProblemParams:
    """Validate ``(p, n, r, outer)`` and populate m, p', the sphere area and the regime.

    The regime is decided by exact equality of ``p`` and ``n`` as given; a value of p
    that merely rounds close to n is treated as m != 0.
    """
    p = float(p)
    if not p > 1.0 or not math.isfinite(p):
        raise DomainError(f"p must satisfy 1 < p < inf, got {p!r}")
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    r = float(r)
    if not r > 0.0 or not math.isfinite(r):
        raise DomainError(f"r must be positive and finite, got {r!r}")
    outer = float(outer)
    if not outer > r:
        raise DomainError(f"outer radius must exceed r={r}, got {outer!r}")

    if p == n:
        m = 0.0
        regime = Regime.M_ZERO
    else:
        m = (p - n) / (p - 1.0)
        regime = Regime.M_POSITIVE if m > 0 else Regime.M_NEGATIVE
    return ProblemParams(
        p=p,
        n=n,
        r=r,
        outer=outer,
        m=m,
        p_conj=p / (p - 1.0),
        sphere_area=unit_sphere_area(n),
        regime=regime,
    )


@dataclass(frozen=True)
class AnnulusSplit:
    gamma: float


def gamma_split_radius(params: ProblemParams) -> AnnulusSplit:
    """Split radius 2^(1/|m|) r, where gamma^m = r^m / 2 (m < 0 only)."""
    if params.regime is not Regime.M_NEGATIVE:
        raise RegimeError("split radius is defined only for m < 0")
    return AnnulusSplit(gamma=2.0 ** (1.0 / abs(params.m)) * params.r)


def power_gap(params: ProblemParams, s):
    """rho^m - r^m evaluated at rho = r e^s without cancellation near s = 0."""
    return params.r**params.m * np.expm1(params.m * np.asarray(s, dtype=float))


def p_harmonic_profile(which: int, params: ProblemParams, R: float | None = None) -> RadialProfile:
    """Radial p-harmonic weight on the annulus (r, R).

    ``which=1`` gives psi_1 (1 on the inner sphere, 0 on the outer one), ``which=2``
    the complementary psi_2 = 1 - psi_1.
    """
    if which not in (1, 2):
        raise DomainError(f"which must be 1 or 2, got {which!r}")
    R = params.outer if R is None else float(R)
    if not math.isfinite(R) or R <= params.r:
        raise DomainError(f"need a finite outer radius R > r, got {R!r}")
    r, m = params.r, params.m

    width = math.log(R / r)
    denom = 1.0 if params.regime is Regime.M_ZERO else R**m - r**m
    if params.regime is Regime.M_ZERO:

        def psi2_log(s):
            return np.asarray(s, dtype=float) / width

        def dpsi2(rho):
            return 1.0 / (np.asarray(rho, dtype=float) * width)

    else:

        def psi2_log(s):
            return power_gap(params, s) / denom

        def dpsi2(rho):
            rho = np.asarray(rho, dtype=float)
            return m * rho ** (m - 1.0) / denom

    log_R = math.log(R / r)
    if which == 2:
        value_log = psi2_log
        derivative = dpsi2
    else:
        def value_log(s):
            s = np.asarray(s, dtype=float)
            if params.regime is Regime.M_ZERO:
                return (log_R - s) / width
            return (R**m - r**m * np.exp(m * s)) / denom

        def derivative(rho):
            return -dpsi2(rho)

    def value(rho):
        return value_log(np.log(np.asarray(rho, dtype=float) / r))

    def derivative_log(s):
        return derivative(r * np.exp(np.asarray(s, dtype=float)))

    return RadialProfile(
        value=value,
        derivative=derivative,
        support_left=r,
        support_right=R,
        decay=Compact(),
        label=f"psi{which}",
        value_log=value_log,
        derivative_log=derivative_log,
    )
