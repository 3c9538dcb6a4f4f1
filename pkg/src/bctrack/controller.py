"""Distributed fault-tolerant backstepping controller.

Every control law is a pure scalar function so that it can be checked in
isolation.  Damping terms whose power of ``xi`` is open to interpretation are
read from a :class:`TermRegistry`; the defaults reproduce the printed design.

The first virtual control is affine in the compensated error,
``alpha_1 = A0 - G * zbar_1``, which lets the integrator update ``eta_1``
implicitly (see :func:`implicit_eta1`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import ftpf
from .errors import UnactuatedAgent
from .fls import FuzzySystem, MembershipGrid, NUMERICAL_GRID_1, NUMERICAL_GRID_2, basis

C27_4 = 27 / 4
C27_256 = 27 / 256


@dataclass(frozen=True)
class TermRegistry:
    """Powers of ``xi`` (and related coefficients) used by the damping terms.

    ``s1_*`` are the five damping terms of the first virtual control,
    ``delta1_*`` the xi factors of the first-step contribution to Delta,
    ``s2_cross_*`` the cross-coupling damping of the second virtual control
    when the agent has more than two layers.  ``last_stage_coupling`` selects
    the coefficient on ``eta_{n-1}`` in the last compensation signal when
    ``n == 2``: ``"unit"`` (printed last-stage law) or ``"xi_q"``
    (skew-symmetric with the first stage).
    """

    s1_theta_drift: float = 4 / 3
    s1_theta_diffusion: float = 3.0
    s1_young: float = 4 / 3
    s1_drift_bound: float = 4 / 3
    s1_diffusion_bound: float = 3.0
    delta1_drift: float = 4 / 3
    delta1_diffusion: float = 4.0
    s2_cross_coeff: float = C27_4
    s2_cross_power: float = 4.0
    last_stage_coupling: str = "unit"

    def __post_init__(self):
        if self.last_stage_coupling not in ("unit", "xi_q"):
            raise ValueError("last_stage_coupling must be 'unit' or 'xi_q'")

    def with_overrides(self, **kw):
        return replace(self, **kw)


PRINTED = TermRegistry()


@dataclass(frozen=True)
class ControllerGains:
    k: tuple
    lam: tuple
    eps: tuple                   # per step (eps_j1, eps_j2, eps_j3, eps_j4)
    eps5: float
    tau: tuple                   # per filter, length n - 1
    delta: float
    delta_bar: float
    Gamma: float
    Gamma_bar: float
    Psi: float
    Psi_bar: float
    epsilon_tanh: float
    filter_error_bound: float = 0.0

    def __post_init__(self):
        n = len(self.k)
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        object.__setattr__(self, "tau", tuple(float(v) for v in self.tau))
        object.__setattr__(self, "eps", tuple(tuple(float(v) for v in row) for row in self.eps))
        if n < 2:
            raise ValueError("the controller needs at least two layers")
        if len(self.lam) != n or len(self.eps) != n or len(self.tau) != n - 1:
            raise ValueError("per-step gain lists must match the agent order")
        if any(len(row) != 4 for row in self.eps):
            raise ValueError("each step needs four Young constants")
        scalars = [self.eps5, self.delta, self.delta_bar, self.Gamma, self.Gamma_bar,
                   self.Psi, self.Psi_bar, self.epsilon_tanh]
        flat = list(self.k) + list(self.lam) + list(self.tau) + [v for r in self.eps for v in r]
        if not all(v > 0 and math.isfinite(v) for v in flat + scalars):
            raise ValueError("all controller gains must be positive and finite")
        if any(l <= self.filter_error_bound for l in self.lam):
            raise ValueError("every lambda must exceed the filter-error bound")

    @property
    def order(self):
        return len(self.k)


@dataclass
class AdaptiveState:
    Theta_hat: float = 1.0
    vartheta_hat: float = 1.0
    varphi_hat: float = 1.0


@dataclass
class ControllerInternalState:
    eta: np.ndarray
    filter_outputs: np.ndarray
    adaptive: AdaptiveState = field(default_factory=AdaptiveState)
    initialised: bool = False

    @classmethod
    def zeros(cls, order, adaptive=None):
        return cls(np.zeros(order), np.zeros(order - 1), adaptive or AdaptiveState())


@dataclass(frozen=True)
class NeighborhoodView:
    x: np.ndarray            # own state
    neighbor_x: tuple        # state arrays of neighbours, ascending index
    a: tuple                 # weights a_im for those neighbours
    b: float
    y_r: float
    dy_r: float

    @property
    def q(self):
        return float(sum(abs(w) for w in self.a) + abs(self.b))


def sgn(v):
    return float(np.sign(v))


def bipartite_error(v: NeighborhoodView) -> float:
    y = v.x[0]
    z = abs(v.b) * (y - sgn(v.b) * v.y_r)
    for w, xm in zip(v.a, v.neighbor_x):
        z += abs(w) * (y - sgn(w) * xm[0])
    return float(z)


def compensated_errors(zeta, eta):
    zeta = np.asarray(zeta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if zeta.shape != eta.shape:
        raise ValueError("zeta and eta must have equal length")
    return zeta - eta


def _p43(phi):
    return float(np.dot(phi, phi)) ** (2 / 3)


def _p2(phi):
    return float(np.dot(phi, phi))


def virtual_control_1_terms(zeta1, e_star, sigma_dot, xi, q, b, dy_r, phi11, phi12,
                            theta_hat, gains, reg=PRINTED):
    """Return ``(A0, G)`` with ``alpha_1 = A0 - G * zbar_1``."""
    if q <= 0:
        raise UnactuatedAgent("agent has neither neighbours nor a leader link")
    e1, e2, e3, e4 = gains.eps[0]
    a0 = -(gains.k[0] + 1) / (xi * q) * zeta1 + (b * dy_r + ftpf.mu(e_star) * sigma_dot) / q
    g = (0.75 * e1 ** (4 / 3) * xi ** reg.s1_theta_drift * theta_hat * _p43(phi11)
         + 0.75 * e3**2 * xi ** reg.s1_theta_diffusion * theta_hat * _p2(phi12)
         + 0.75 * xi ** reg.s1_young
         + 0.75 * e2 ** (4 / 3) * xi ** reg.s1_drift_bound
         + 0.75 * e4**2 * xi ** reg.s1_diffusion_bound) / q
    return a0, g


def virtual_control_1(zeta1, zbar1, e_star, sigma_dot, xi, q, b, dy_r, phi11, phi12,
                      theta_hat, gains, reg=PRINTED):
    a0, g = virtual_control_1_terms(zeta1, e_star, sigma_dot, xi, q, b, dy_r, phi11, phi12,
                                    theta_hat, gains, reg)
    return a0 - g * zbar1


def _damping(zbar, phi1, phi2, theta_hat, eps_row):
    e1, e2, e3, e4 = eps_row
    return (0.75 * e1 ** (4 / 3) * zbar * theta_hat * _p43(phi1)
            + 0.75 * e3**2 * zbar * theta_hat * _p2(phi2)
            + 0.75 * e2 ** (4 / 3) * zbar
            + 0.75 * e4**2 * zbar)


def virtual_control_mid(o, zeta_o, zbar_o, eta_prev, dalpha_star_prev, phi1, phi2, theta_hat,
                        gains, reg=PRINTED, xi=None, q=None):
    """Virtual control of step ``o`` (1-based, ``2 <= o < n``)."""
    if not 2 <= o < gains.order:
        raise ValueError("middle steps are 2 <= o < n")
    j = o - 1
    out = (-(gains.k[j] + 1) * zeta_o + dalpha_star_prev
           - _damping(zbar_o, phi1, phi2, theta_hat, gains.eps[j]) - 0.75 * zbar_o)
    if o == 2:
        out += -xi * q * eta_prev - reg.s2_cross_coeff * (xi * q) ** reg.s2_cross_power * zbar_o
    else:
        out += -C27_256 * zbar_o - eta_prev
    return out


def intermediate_control(zeta_n, zbar_n, eta_prev, dalpha_star_prev, phi1, phi2,
                         adaptive: AdaptiveState, gains):
    j = gains.order - 1
    return ((gains.k[j] + 1) * zeta_n
            + _damping(zbar_n, phi1, phi2, adaptive.Theta_hat, gains.eps[j])
            + C27_256 * zbar_n
            - dalpha_star_prev + eta_prev
            + adaptive.vartheta_hat * math.tanh(zbar_n**3 / gains.epsilon_tanh))


def actuator_commands(zbar_n, varphi_hat, ubar, l_signs, eps5):
    s3 = zbar_n**3
    p = varphi_hat**2 * ubar**2
    abar = -s3 * p / math.sqrt(s3 * s3 * p + eps5**2)
    return np.asarray(l_signs, dtype=float) * abar


def compensation_derivatives(eta, filter_errors, xi, q, gains, reg=PRINTED):
    """Return the stacked derivative of the compensation signals.

    ``filter_errors[j]`` is ``alpha*_j - alpha_j`` for ``j = 1..n-1``.
    """
    eta = np.asarray(eta, dtype=float)
    fe = np.asarray(filter_errors, dtype=float)
    n = eta.shape[0]
    k, lam = gains.k, gains.lam
    xq = xi * q
    d = np.empty(n)
    d[0] = -(k[0] + 1) * eta[0] + xq * fe[0] + xq * eta[1] - lam[0] * xq * sgn(eta[0])
    for j in range(1, n - 1):
        back = xq if j == 1 else 1.0
        d[j] = (-(k[j] + 1) * eta[j] + fe[j] - back * eta[j - 1] + eta[j + 1]
                - lam[j] * sgn(eta[j]))
    back = xq if (n == 2 and reg.last_stage_coupling == "xi_q") else 1.0
    d[n - 1] = -(k[n - 1] + 1) * eta[n - 1] - back * eta[n - 2] - lam[n - 1] * sgn(eta[n - 1])
    return d


def implicit_eta1(eta1, eta2, alpha_star1, a0, g, zeta1, xi, q, gains, dt):
    """One linearly implicit step of the first compensation signal.

    ``alpha_1`` depends on ``eta_1`` through ``zbar_1 = zeta_1 - eta_1`` with a
    gain ``xi*q*G`` that can exceed 1e6, so the linear part is taken at the new
    time level.  The sign term stays explicit.
    """
    xq = xi * q
    rhs = eta1 + dt * (xq * (alpha_star1 - a0 + g * zeta1) + xq * eta2
                       - gains.lam[0] * xq * sgn(eta1))
    return rhs / (1 + dt * (gains.k[0] + 1) + dt * xq * g)


def delta_accumulate(zbars, phis, xi, gains, reg=PRINTED):
    """Adaptive driving term summed over all steps."""
    total = 0.0
    d = gains.delta
    for j, (zb, (p1, p2)) in enumerate(zip(zbars, phis)):
        e1, _, e3, _ = gains.eps[j]
        f1 = xi ** reg.delta1_drift if j == 0 else 1.0
        f2 = xi ** reg.delta1_diffusion if j == 0 else 1.0
        total += (0.75 * d * e1 ** (4 / 3) * zb**4 * f1 * _p43(p1)
                  + 0.75 * d * e3**2 * zb**4 * f2 * _p2(p2))
    return total


def adaptive_derivatives(Delta, zbar_n, ubar, gains, adaptive: AdaptiveState):
    s3 = zbar_n**3
    return (Delta - gains.delta_bar * adaptive.Theta_hat,
            gains.Gamma * s3 * math.tanh(s3 / gains.epsilon_tanh) - gains.Gamma_bar * adaptive.vartheta_hat,
            gains.Psi * s3 * ubar - gains.Psi_bar * adaptive.varphi_hat)


def filter_derivative(alpha_star, alpha_command, tau):
    return (alpha_command - alpha_star) / tau


@dataclass(frozen=True)
class FuzzyLayout:
    """Membership centres for the drift-type and diffusion-type approximators."""

    drift_centers: tuple = NUMERICAL_GRID_1
    diffusion_centers: tuple = NUMERICAL_GRID_2
    width: float = 1.0

    def _fs(self, centers, dims):
        return FuzzySystem(MembershipGrid.diagonal(centers, dims, self.width))

    def step1_bases(self, v: NeighborhoodView):
        x11 = [v.x[0]] + [c for xm in v.neighbor_x for c in (xm[0], xm[1])]
        x12 = [v.x[0]] + [xm[0] for xm in v.neighbor_x]
        return (basis(self._fs(self.drift_centers, len(x11)), x11),
                basis(self._fs(self.diffusion_centers, len(x12)), x12))

    def step_bases(self, x, j):
        """Bases for step ``j`` (1-based, ``j >= 2``) on the own prefix."""
        prefix = np.asarray(x[:j], dtype=float)
        return (basis(self._fs(self.drift_centers, j), prefix),
                basis(self._fs(self.diffusion_centers, j), prefix))


@dataclass
class StepResult:
    u: np.ndarray
    z: float
    e_star: float
    zeta: np.ndarray
    zbar: np.ndarray
    alpha: np.ndarray
    ubar: float
    eta_next: np.ndarray
    filter_next: np.ndarray
    adaptive_next: AdaptiveState


def agent_step(v: NeighborhoodView, state: ControllerInternalState, t, dt, profile,
               gains: ControllerGains, layout: FuzzyLayout, l_signs, reg=PRINTED) -> StepResult:
    """Evaluate one agent's controller at ``t`` and advance its internal states by ``dt``."""
    n = gains.order
    q = v.q
    z = bipartite_error(v)
    e_star = ftpf.transform_error(profile, t, z)
    s = profile.sigma(t)
    sd = profile.sigma_dot(t)
    xi = math.pi * (1 + e_star**2) / (2 * s)
    phi11, phi12 = layout.step1_bases(v)
    th = state.adaptive.Theta_hat
    a0, g = virtual_control_1_terms(e_star, e_star, sd, xi, q, v.b, v.dy_r, phi11, phi12, th, gains, reg)
    eta = state.eta.copy()
    ast = state.filter_outputs.copy()
    if not state.initialised:
        ast[0] = a0 - g * (e_star - eta[0])

    eta_next = np.empty(n)
    eta_next[0] = implicit_eta1(eta[0], eta[1], ast[0], a0, g, e_star, xi, q, gains, dt)
    eta_use = eta.copy()
    eta_use[0] = eta_next[0]

    zeta = np.empty(n)
    zbar = np.empty(n)
    alpha = np.empty(n - 1)
    dast = np.empty(n - 1)
    phis = [(phi11, phi12)]
    zeta[0] = e_star
    zbar[0] = e_star - eta_use[0]
    alpha[0] = a0 - g * zbar[0]
    dast[0] = filter_derivative(ast[0], alpha[0], gains.tau[0])
    for j in range(1, n - 1):
        zeta[j] = v.x[j] - ast[j - 1]
        zbar[j] = zeta[j] - eta_use[j]
        p1, p2 = layout.step_bases(v.x, j + 1)
        phis.append((p1, p2))
        alpha[j] = virtual_control_mid(j + 1, zeta[j], zbar[j], eta_use[j - 1], dast[j - 1],
                                       p1, p2, th, gains, reg, xi=xi, q=q)
        if not state.initialised:
            ast[j] = alpha[j]
        dast[j] = filter_derivative(ast[j], alpha[j], gains.tau[j])
    zeta[n - 1] = v.x[n - 1] - ast[n - 2]
    zbar[n - 1] = zeta[n - 1] - eta_use[n - 1]
    p1, p2 = layout.step_bases(v.x, n)
    phis.append((p1, p2))
    ubar = intermediate_control(zeta[n - 1], zbar[n - 1], eta_use[n - 2], dast[n - 2], p1, p2,
                                state.adaptive, gains)
    u = actuator_commands(zbar[n - 1], state.adaptive.varphi_hat, ubar, l_signs, gains.eps5)

    d_eta = compensation_derivatives(eta_use, ast - alpha, xi, q, gains, reg)
    eta_next[1:] = eta[1:] + dt * d_eta[1:]
    delta = delta_accumulate(zbar, phis, xi, gains, reg)
    dth, dvt, dph = adaptive_derivatives(delta, zbar[n - 1], ubar, gains, state.adaptive)
    adaptive_next = AdaptiveState(th + dt * dth, state.adaptive.vartheta_hat + dt * dvt,
                                  state.adaptive.varphi_hat + dt * dph)
    return StepResult(u=u, z=z, e_star=e_star, zeta=zeta, zbar=zbar, alpha=alpha, ubar=ubar,
                      eta_next=eta_next, filter_next=ast + dt * dast, adaptive_next=adaptive_next)
