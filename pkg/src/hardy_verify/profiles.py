"""Radial trial functions u(rho) together with their derivatives.

Every callable is vectorised over numpy arrays.  Profiles that are singular or
vanish at the inner radius may also supply ``value_log`` / ``derivative_log``,
functions of the log-offset ``s = ln(rho / support_left)``; near the inner
sphere ``rho`` itself rounds to ``support_left`` long before ``s`` underflows,
so the integrators always prefer the log forms when present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple, Union

import numpy as np


@dataclass(frozen=True)
class Power:
    """|u(rho)| behaves like rho**sigma as rho -> infinity."""

    sigma: float


@dataclass(frozen=True)
class Exponential:
    """|u(rho)| behaves like exp(-rate * rho**power) as rho -> infinity."""

    rate: float
    power: float


@dataclass(frozen=True)
class Compact:
    pass


@dataclass(frozen=True)
class BoundedLog:
    """Bounded up to powers of ln(rho); treated like Power(0) by the integrators."""


Decay = Union[Power, Exponential, Compact, BoundedLog]

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RadialProfile:
    value: ArrayFn
    derivative: ArrayFn
    support_left: float
    support_right: float = math.inf
    singular_at_left: bool = False
    decay: Decay = field(default_factory=Compact)
    label: str = ""
    breakpoints: Tuple[float, ...] = ()
    value_log: Optional[ArrayFn] = None
    derivative_log: Optional[ArrayFn] = None
    derivative_decay: Optional[Decay] = None  # defaults to Power(sigma - 1)

    def u_log(self, s):
        s = np.asarray(s, dtype=float)
        if self.value_log is not None:
            return self.value_log(s)
        return self.value(self.support_left * np.exp(s))

    def du_log(self, s):
        s = np.asarray(s, dtype=float)
        if self.derivative_log is not None:
            return self.derivative_log(s)
        return self.derivative(self.support_left * np.exp(s))

    @property
    def precise_near_left(self) -> bool:
        return self.value_log is not None

    def scaled(self, c: float) -> "RadialProfile":
        """The profile c * u."""
        c = float(c)
        vl, dl = self.value_log, self.derivative_log
        return replace(
            self,
            value=lambda rho: c * self.value(rho),
            derivative=lambda rho: c * self.derivative(rho),
            value_log=None if vl is None else (lambda s: c * vl(s)),
            derivative_log=None if dl is None else (lambda s: c * dl(s)),
            label=f"{c:g}*{self.label}",
        )

    def boundary_value(self, rho: float) -> float:
        """u at a sphere radius; the inner sphere is evaluated through the log form."""
        if rho == self.support_left:
            return float(self.u_log(np.array(0.0)))
        return float(self.value(np.array(float(rho))))


def finite_difference_check(profile: RadialProfile, radii, rel_step: float = 1e-6):
    """Largest relative mismatch between ``derivative`` and central differences of ``value``."""
    radii = np.asarray(radii, dtype=float)
    h = rel_step * radii
    fd = (profile.value(radii + h) - profile.value(radii - h)) / (2.0 * h)
    exact = profile.derivative(radii)
    scale = np.maximum(np.abs(exact), np.abs(fd))
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.abs(fd - exact) / scale))
