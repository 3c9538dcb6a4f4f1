"""Follower plants, the leader signal and actuator faults."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import AssumptionViolation


class FaultKind(Enum):
    NORMAL = 0
    PLOE = 1   # output = rho * u
    TLOE = 2   # output = nu, input ignored


@dataclass(frozen=True)
class FaultMode:
    kind: FaultKind = FaultKind.NORMAL
    value: float = 0.0  # rho for PLOE, nu for TLOE

    def __post_init__(self):
        if self.kind is FaultKind.PLOE and not 0 < self.value < 1:
            raise ValueError("PLOE effectiveness must lie in (0, 1)")

    @classmethod
    def normal(cls):
        return cls()

    @classmethod
    def ploe(cls, rho):
        return cls(FaultKind.PLOE, float(rho))

    @classmethod
    def tloe(cls, nu):
        return cls(FaultKind.TLOE, float(nu))

    def apply(self, u):
        if self.kind is FaultKind.PLOE:
            return self.value * u
        if self.kind is FaultKind.TLOE:
            return self.value
        return u


@dataclass(frozen=True)
class FaultInterval:
    start: float
    end: float
    mode: FaultMode


@dataclass(frozen=True)
class FaultSchedule:
    """Per-actuator fault intervals ``[start, end)``; Normal outside them.

    With ``period`` set, time is reduced modulo the period before lookup, so a
    single table describes a repeating pattern.
    """

    actuators: tuple[tuple[FaultInterval, ...], ...]
    period: float | None = None

    def __post_init__(self):
        acts = tuple(tuple(iv) for iv in self.actuators)
        object.__setattr__(self, "actuators", acts)
        for h, ivs in enumerate(acts):
            for k, iv in enumerate(ivs):
                if not iv.start < iv.end:
                    raise ValueError(f"actuator {h + 1}: empty interval [{iv.start}, {iv.end})")
                if k and ivs[k - 1].end > iv.start:
                    raise ValueError(f"actuator {h + 1}: intervals overlap or are unsorted")
            if self.period is not None and ivs and (ivs[0].start < 0 or ivs[-1].end > self.period):
                raise ValueError(f"actuator {h + 1}: intervals must lie within one period")
        if self.period is not None and not self.period > 0:
            raise ValueError("period must be positive")
        if acts and self._all_tloe_somewhere():
            raise AssumptionViolation("every actuator is in TLOE at the same time")

    @property
    def M(self):
        return len(self.actuators)

    def _all_tloe_somewhere(self):
        points = sorted({iv.start for ivs in self.actuators for iv in ivs})
        return any(all(m.kind is FaultKind.TLOE for m in self.modes(t)) for t in points)

    def modes(self, t: float) -> list[FaultMode]:
        if self.period is not None:
            t = math.fmod(t, self.period)
        out = []
        for ivs in self.actuators:
            mode = FaultMode.normal()
            for iv in ivs:
                if iv.start <= t < iv.end:
                    mode = iv.mode
                    break
            out.append(mode)
        return out

    def boundaries(self):
        return sorted({p for ivs in self.actuators for iv in ivs for p in (iv.start, iv.end)})


def apply_faults(sched: FaultSchedule, u, t: float) -> np.ndarray:
    modes = sched.modes(t)
    if modes and all(m.kind is FaultKind.TLOE for m in modes):
        raise AssumptionViolation(f"all actuators in TLOE at t={t}")
    u = np.asarray(u, dtype=float)
    return np.array([m.apply(v) for m, v in zip(modes, u)])


def alternating_schedule(M=2, window=5.0, rho=0.5, nu=1.0) -> FaultSchedule:
    """Actuator 1 stuck at ``nu`` and actuator 2 at effectiveness ``rho`` on
    ``[window, 2*window)`` of every ``2*window`` period; Normal otherwise."""
    acts = [(FaultInterval(window, 2 * window, FaultMode.tloe(nu)),),
            (FaultInterval(window, 2 * window, FaultMode.ploe(rho)),)]
    acts += [()] * (M - 2)
    return FaultSchedule(tuple(acts), period=2 * window)


@dataclass(frozen=True)
class LeaderSignal:
    value: Callable[[float], float]
    derivative: Callable[[float], float]
    amplitude: float = 1.0
    omega: float = 1.0

    @classmethod
    def sine(cls, amplitude, omega):
        return cls(lambda t: amplitude * math.sin(omega * t),
                   lambda t: amplitude * omega * math.cos(omega * t), amplitude, omega)


@dataclass(frozen=True)
class FollowerModel:
    """Strict-feedback plant ``dx_l = (x_{l+1} + f_l) dt + g_l dW`` with the last
    layer driven by ``sum_h l_h omega_h``.

    ``drift[l]`` and ``diffusion[l]`` take the full state vector; layer ``l``
    must only read its own prefix.  ``kind`` names a built-in family so the
    compiled integrator can recognise it; inline models leave it ``None``.
    """

    order: int
    drift: Sequence[Callable]
    diffusion: Sequence[Callable]
    l: np.ndarray
    r: int = 1
    kind: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        l = np.array(self.l, dtype=float).reshape(-1)
        if not np.any(l != 0):
            raise ValueError("at least one control coefficient must be nonzero")
        if len(self.drift) != self.order or len(self.diffusion) != self.order:
            raise ValueError("need one drift and one diffusion term per layer")
        object.__setattr__(self, "l", l)

    @property
    def M(self):
        return self.l.shape[0]


def drift_increment(m: FollowerModel, x, omega) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty(m.order)
    for k in range(m.order - 1):
        out[k] = x[k + 1] + m.drift[k](x)
    out[-1] = float(np.dot(m.l, omega)) + m.drift[-1](x)
    return out


def diffusion_row(m: FollowerModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([np.broadcast_to(np.asarray(g(x), dtype=float), (m.r,)) for g in m.diffusion])


def numerical_model() -> FollowerModel:
    return FollowerModel(
        order=2,
        drift=(lambda x: 0.2 * x[0], lambda x: 0.2 * x[0] * x[1]),
        diffusion=(lambda x: 0.2 * math.sin(6 * x[0]), lambda x: 0.2 * math.sin(6 * x[0] * x[1])),
        l=np.array([1.0, 2.0]),
        kind="numerical",
    )


def vehicle_model(mass=0.5, gravity=10.0, kappa=0.02, friction=0.5, spread=0.1) -> FollowerModel:
    c_v = friction / mass
    c_0 = kappa * gravity
    s = spread / mass
    return FollowerModel(
        order=2,
        drift=(lambda x: 0.0, lambda x: -c_v * x[1] - c_0),
        diffusion=(lambda x: 0.0, lambda x: s),
        l=np.full(2, 1.0 / mass),
        kind="vehicle",
        params={"mass": mass, "gravity": gravity, "kappa": kappa,
                "friction": friction, "spread": spread},
    )


def builtin_numerical_example():
    models = [numerical_model() for _ in range(4)]
    return models, LeaderSignal.sine(30 / 9, 0.8), alternating_schedule()


def builtin_vehicle_example():
    models = [vehicle_model() for _ in range(4)]
    return models, LeaderSignal.sine(0.8, 1.0), alternating_schedule()
