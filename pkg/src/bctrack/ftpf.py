"""Finite-time performance envelope and the arctan error transformation.

The envelope decays smoothly from ``sigma0`` to ``sigma_inf`` and is exactly
constant from ``Ts`` on.  The transformation maps a constrained error
``|z| < sigma(t)`` to an unconstrained ``e* = tan(pi z / (2 sigma))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BoundaryViolation, InitialConditionViolation

_LOG_TINY = math.log(2.2250738585072014e-308)
BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class PerformanceProfile:
    sigma0: float
    sigma_inf: float
    varsigma: float
    Ts: float

    def __post_init__(self):
        if not self.varsigma >= 1:
            raise ValueError("varsigma must be >= 1")
        if not self.sigma0 > self.sigma_inf > 0:
            raise ValueError("need sigma0 > sigma_inf > 0")
        if not self.Ts > 0:
            raise ValueError("Ts must be positive")

    def _exp_alpha(self, t):
        a = self.varsigma * t / (t - self.Ts)
        return 0.0 if a < _LOG_TINY else math.exp(a)

    def sigma(self, t: float) -> float:
        if t >= self.Ts:
            return self.sigma_inf
        return (self.sigma0 - self.sigma_inf) * self._exp_alpha(t) + self.sigma_inf

    def sigma_dot(self, t: float) -> float:
        if t >= self.Ts:
            return 0.0
        d = t - self.Ts
        return (self.sigma0 - self.sigma_inf) * (-self.varsigma * self.Ts / d**2) * self._exp_alpha(t)

    def sigma_ddot(self, t: float) -> float:
        if t >= self.Ts:
            return 0.0
        d = t - self.Ts
        ad = -self.varsigma * self.Ts / d**2
        add = 2 * self.varsigma * self.Ts / d**3
        return (self.sigma0 - self.sigma_inf) * (ad * ad + add) * self._exp_alpha(t)


@dataclass(frozen=True)
class ExponentialProfile:
    """Comparison envelope ``(sigma0 - sigma_inf) exp(-rate t) + sigma_inf``.

    It never reaches ``sigma_inf`` in finite time; ``Ts`` is only the time at
    which acceptance windows start.
    """

    sigma0: float
    sigma_inf: float
    rate: float
    Ts: float

    def __post_init__(self):
        if not self.sigma0 > self.sigma_inf > 0 or not self.rate > 0 or not self.Ts > 0:
            raise ValueError("invalid exponential profile")

    def sigma(self, t):
        return (self.sigma0 - self.sigma_inf) * math.exp(-self.rate * t) + self.sigma_inf

    def sigma_dot(self, t):
        return -self.rate * (self.sigma0 - self.sigma_inf) * math.exp(-self.rate * t)

    def sigma_ddot(self, t):
        return self.rate**2 * (self.sigma0 - self.sigma_inf) * math.exp(-self.rate * t)


def sigma(p, t):
    return p.sigma(t)


def sigma_dot(p, t):
    return p.sigma_dot(t)


def transform_error(p, t, z):
    s = p.sigma(t)
    if abs(z) >= (1 - BOUNDARY_RTOL) * s:
        raise BoundaryViolation(f"|z|={abs(z):.6g} reached the envelope {s:.6g} at t={t:.6g}", t=t)
    return math.tan(math.pi * z / (2 * s))


def mu(e):
    return 2 / math.pi * math.atan(e)


def xi(p, t, e):
    return math.pi * (1 + e * e) / (2 * p.sigma(t))


def beta(p, t, e):
    return mu(e) * p.sigma_dot(t)


def validate_initial(p, z0):
    if not 0 < abs(z0) < p.sigma0:
        raise InitialConditionViolation(
            f"initial error {z0:.6g} must satisfy 0 < |z| < {p.sigma0:.6g}")
