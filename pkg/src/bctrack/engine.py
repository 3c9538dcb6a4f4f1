"""Euler-Maruyama integration of the closed loop and Monte-Carlo ensembles.

Brownian increments come from ``numpy.random.default_rng(seed)`` (PCG64).
Each step consumes ``N * r`` standard normals in agent-major order, scaled by
``sqrt(dt)``.  Two backends share that stream: a compiled kernel for
second-order built-in plants and a pure-Python reference stepper that handles
any scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel, controller, dynamics, metrics
from .errors import BoundaryViolation, DegenerateBasis, NonFiniteState

CHUNK_STEPS = 20_000


def em_step(state, drift, diffusion, dW, dt):
    """``x + drift*dt + diffusion @ dW``; rows of ``diffusion`` that are zero
    (controller states) receive no noise."""
    state = np.asarray(state, dtype=float)
    nxt = state + np.asarray(drift, dtype=float) * dt + np.asarray(diffusion, dtype=float) @ np.asarray(dW, dtype=float)
    bad = np.flatnonzero(~np.isfinite(nxt))
    if bad.size:
        raise NonFiniteState(f"state component {int(bad[0])} became non-finite", component=int(bad[0]))
    return nxt


def brownian_increments(rng, steps, width, dt):
    return rng.standard_normal((steps, width)) * math.sqrt(dt)


@dataclass
class SimulationTrace:
    seed: int
    t: np.ndarray           # R
    x: np.ndarray           # R x N x n
    z: np.ndarray           # R x N
    e_star: np.ndarray      # R x N
    zbar: np.ndarray        # R x N x n
    eta: np.ndarray         # R x N x n
    adaptive: np.ndarray    # R x N x 3 (Theta_hat, vartheta_hat, varphi_hat)
    u: np.ndarray           # R x N x M
    omega: np.ndarray       # R x N x M
    sigma: np.ndarray       # R
    y_r: np.ndarray         # R
    failure: Exception | None = None

    @property
    def ok(self):
        return self.failure is None

    @classmethod
    def allocate(cls, seed, R, N, n, M):
        return cls(seed, np.zeros(R), np.zeros((R, N, n)), np.zeros((R, N)), np.zeros((R, N)),
                   np.zeros((R, N, n)), np.zeros((R, N, n)), np.zeros((R, N, 3)),
                   np.zeros((R, N, M)), np.zeros((R, N, M)), np.zeros(R), np.zeros(R))

    def truncate(self, R):
        for name in ("t", "x", "z", "e_star", "zbar", "eta", "adaptive", "u", "omega", "sigma", "y_r"):
            setattr(self, name, getattr(self, name)[:R])
        return self


def _records(steps, dec):
    return steps // dec + 1 + (1 if steps % dec else 0)


def kernel_supported(sc) -> bool:
    kinds = {m.kind for m in sc.models}
    return (len(kinds) == 1 and kinds <= {"numerical", "vehicle"}
            and all(m.order == 2 and m.r == 1 for m in sc.models))


def _fault_tables(schedules, N, M):
    K = max([len(ivs) for s in schedules for ivs in s.actuators] + [1])
    fk = np.zeros((N, M, K), dtype=np.int64)
    fs = np.zeros((N, M, K))
    fe = np.zeros((N, M, K))
    fv = np.zeros((N, M, K))
    fc = np.zeros((N, M), dtype=np.int64)
    periods = {s.period for s in schedules}
    if len(periods) != 1:
        raise ValueError("the compiled backend needs one fault period for all agents")
    for i, s in enumerate(schedules):
        for h, ivs in enumerate(s.actuators):
            fc[i, h] = len(ivs)
            for k, iv in enumerate(ivs):
                fk[i, h, k] = iv.mode.kind.value
                fs[i, h, k], fe[i, h, k], fv[i, h, k] = iv.start, iv.end, iv.mode.value
    period = periods.pop()
    return fk, fs, fe, fv, fc, (-1.0 if period is None else float(period))


def _gain_table(gains):
    out = np.zeros((len(gains), _kernel.N_GAINS))
    for i, g in enumerate(gains):
        out[i, :] = [g.k[0], g.k[1], g.lam[0], g.lam[1], *g.eps[0], *g.eps[1], g.eps5, g.tau[0],
                     g.delta, g.delta_bar, g.Gamma, g.Gamma_bar, g.Psi, g.Psi_bar, g.epsilon_tanh]
    return out


def _registry_vector(reg):
    return np.array([reg.s1_theta_drift, reg.s1_theta_diffusion, reg.s1_young, reg.s1_drift_bound,
                     reg.s1_diffusion_bound, reg.delta1_drift, reg.delta1_diffusion,
                     1.0 if reg.last_stage_coupling == "unit" else 0.0])


def _failure(status, step, agent, comp, dt):
    t = step * dt
    if status == _kernel.BOUNDARY:
        return BoundaryViolation(f"agent {agent + 1} left the performance envelope at t={t:.6g}",
                                 t=t, agent=agent + 1)
    if status == _kernel.NONFINITE:
        name = _kernel.COMPONENTS[comp]
        return NonFiniteState(f"agent {agent + 1}: {name} became non-finite at t={t:.6g}",
                              t=t, component=f"{name}[{agent + 1}]")
    return DegenerateBasis(f"agent {agent + 1}: fuzzy basis underflowed at t={t:.6g}")


def _simulate_kernel(sc, seed, t_end):
    integ = sc.integrator
    dt, dec = integ.dt, integ.decimation
    steps = int(round(t_end / dt))
    g = sc.graph
    N, M = g.n, sc.models[0].M
    m0 = sc.models[0]
    plant = _kernel.PLANT_NUMERICAL if m0.kind == "numerical" else _kernel.PLANT_VEHICLE
    pp = np.zeros(3)
    if plant == _kernel.PLANT_VEHICLE:
        p = m0.params
        pp[:] = [p["friction"] / p["mass"], p["kappa"] * p["gravity"], p["spread"] / p["mass"]]
    l = np.array([m.l for m in sc.models])
    fk, fs, fe, fv, fc, period = _fault_tables(sc.schedules, N, M)
    A = np.ascontiguousarray(g.a)
    b = np.ascontiguousarray(g.b)
    q = np.abs(A).sum(axis=1) + np.abs(b)
    gains = _gain_table(sc.gains)
    reg = _registry_vector(sc.registry)
    prof = np.array([sc.profile.sigma0, sc.profile.sigma_inf, sc.profile.varsigma, sc.profile.Ts])
    leader = np.array([sc.leader.amplitude, sc.leader.omega])
    c1 = np.array(sc.layout.drift_centers, dtype=float)
    c2 = np.array(sc.layout.diffusion_centers, dtype=float)

    x = np.array(sc.x0, dtype=float)
    eta = np.array(sc.eta0, dtype=float)
    ast = np.zeros(N)
    adapt = np.array(sc.adaptive0, dtype=float)
    R = _records(steps, dec)
    tr = SimulationTrace.allocate(seed, R, N, 2, M)
    rng = np.random.default_rng(seed)
    rec_i = 0
    n0 = 0
    while n0 <= steps:
        n1 = min(n0 + CHUNK_STEPS, steps + 1)
        dW = brownian_increments(rng, min(n1, steps) - n0, N, dt)
        if dW.shape[0] < n1 - n0:
            dW = np.vstack([dW, np.zeros((n1 - n0 - dW.shape[0], N))])
        status, step, agent, comp, rec_i = _kernel.advance(
            n0, n1, steps, dt, dW, dec, A, b, q, l, gains, reg, prof, leader, c1, c2,
            float(sc.layout.width), plant, pp, float(integ.noise_scale),
            fk, fs, fe, fv, fc, period, x, eta, ast, adapt, n0 > 0,
            tr.t, tr.x, tr.z, tr.e_star, tr.zbar, tr.eta, tr.adaptive, tr.u, tr.omega, tr.sigma, rec_i)
        if status != _kernel.OK:
            tr.failure = _failure(status, step, agent, comp, dt)
            break
        n0 = n1
    tr.truncate(rec_i)
    tr.y_r = np.array([sc.leader.value(t) for t in tr.t])
    return tr


def _views(sc, x, t):
    g = sc.graph
    yr, dyr = sc.leader.value(t), sc.leader.derivative(t)
    out = []
    for i in range(g.n):
        nb = g.neighbors(i)
        out.append(controller.NeighborhoodView(
            x=x[i], neighbor_x=tuple(x[m] for m in nb), a=tuple(float(g.a[i, m]) for m in nb),
            b=float(g.b[i]), y_r=yr, dy_r=dyr))
    return out


def simulate_reference(sc, seed, t_end=None):
    """Pure-Python closed loop; the executable definition of one step."""
    integ = sc.integrator
    t_end = integ.t_end if t_end is None else t_end
    dt, dec = integ.dt, integ.decimation
    steps = int(round(t_end / dt))
    N, n = sc.graph.n, sc.models[0].order
    M = sc.models[0].M
    r = sc.models[0].r
    x = np.array(sc.x0, dtype=float)
    states = [controller.ControllerInternalState(
        np.array(sc.eta0[i], dtype=float), np.zeros(n - 1),
        controller.AdaptiveState(*map(float, sc.adaptive0[i]))) for i in range(N)]
    tr = SimulationTrace.allocate(seed, _records(steps, dec), N, n, M)
    rng = np.random.default_rng(seed)
    rec = 0
    dW = None
    for k in range(steps + 1):
        if k % CHUNK_STEPS == 0 and k < steps:
            dW = brownian_increments(rng, min(CHUNK_STEPS, steps - k), N * r, dt)
        t = k * dt
        last = k == steps
        s = sc.profile.sigma(t)
        results = []
        try:
            for i, v in enumerate(_views(sc, x, t)):
                try:
                    results.append(controller.agent_step(
                        v, states[i], t, dt, sc.profile, sc.gains[i], sc.layout,
                        np.sign(sc.models[i].l), sc.registry))
                except BoundaryViolation as exc:
                    raise BoundaryViolation(f"agent {i + 1} left the performance envelope at t={t:.6g}",
                                            t=t, agent=i + 1) from exc
            omegas = [dynamics.apply_faults(sc.schedules[i], res.u, t) for i, res in enumerate(results)]
        except (BoundaryViolation, DegenerateBasis) as exc:
            tr.failure = exc
            break
        if k % dec == 0 or last:
            tr.t[rec], tr.sigma[rec] = t, s
            for i, res in enumerate(results):
                tr.x[rec, i] = x[i]
                tr.z[rec, i], tr.e_star[rec, i] = res.z, res.e_star
                tr.zbar[rec, i] = res.zbar
                tr.eta[rec, i] = np.concatenate([res.eta_next[:1], states[i].eta[1:]])
                a = states[i].adaptive
                tr.adaptive[rec, i] = (a.Theta_hat, a.vartheta_hat, a.varphi_hat)
                tr.u[rec, i], tr.omega[rec, i] = res.u, omegas[i]
            rec += 1
        if last:
            break
        row = dW[k % CHUNK_STEPS]
        nx = np.empty_like(x)
        try:
            for i, res in enumerate(results):
                m = sc.models[i]
                diff = dynamics.diffusion_row(m, x[i]) * integ.noise_scale
                nx[i] = em_step(x[i], dynamics.drift_increment(m, x[i], omegas[i]), diff,
                                row[i * r:(i + 1) * r], dt)
                internal = np.concatenate([res.eta_next, res.filter_next,
                                           [res.adaptive_next.Theta_hat, res.adaptive_next.vartheta_hat,
                                            res.adaptive_next.varphi_hat]])
                if not np.all(np.isfinite(internal)):
                    raise NonFiniteState(f"agent {i + 1}: controller state became non-finite at "
                                         f"t={t + dt:.6g}", t=t + dt, component=f"controller[{i + 1}]")
                states[i] = controller.ControllerInternalState(
                    res.eta_next, res.filter_next, res.adaptive_next, initialised=True)
        except NonFiniteState as exc:
            exc.t = t + dt if exc.t is None else exc.t
            tr.failure = exc
            break
        x = nx
    tr.truncate(rec)
    tr.y_r = np.array([sc.leader.value(t) for t in tr.t])
    return tr


def simulate_trajectory(sc, seed=None, t_end=None, backend="auto"):
    """Run one closed-loop trajectory.  Failures are stored on the trace."""
    seed = sc.integrator.seed if seed is None else int(seed)
    t_end = sc.integrator.t_end if t_end is None else t_end
    if backend == "auto":
        backend = "kernel" if kernel_supported(sc) else "reference"
    if backend == "kernel":
        return _simulate_kernel(sc, seed, t_end)
    if backend == "reference":
        return simulate_reference(sc, seed, t_end)
    raise ValueError(f"unknown backend {backend!r}")


@dataclass
class EnsembleResult:
    traces: list
    seeds: list
    t: np.ndarray
    mean_abs_z: np.ndarray          # R x N, over runs alive at each time
    mean_tracking_norm: np.ndarray  # R
    sup_abs_z: np.ndarray           # runs x N over [Ts, t_end] (NaN for failed runs)
    failures: list = field(default_factory=list)

    @property
    def n_runs(self):
        return len(self.traces)


def run_ensemble(sc, n_runs=None, base_seed=None, t_end=None, backend="auto", progress=None):
    n_runs = sc.integrator.n_runs if n_runs is None else n_runs
    base_seed = sc.integrator.seed if base_seed is None else base_seed
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    traces, seeds = [], []
    for k in range(n_runs):
        tr = simulate_trajectory(sc, base_seed + k, t_end, backend)
        traces.append(tr)
        seeds.append(base_seed + k)
        if progress:
            progress(k, tr)
    stats = metrics.ensemble_statistics(traces, sc)
    return EnsembleResult(traces=traces, seeds=seeds, t=stats.t, mean_abs_z=stats.mean_abs_z,
                          mean_tracking_norm=stats.mean_tracking_norm, sup_abs_z=stats.sup_abs_z,
                          failures=[(tr.seed, str(tr.failure)) for tr in traces if not tr.ok])


def ou_paths(n_paths, t_end, dt, seed, theta=1.0, x0=0.0):
    """Terminal values of ``dx = -theta x dt + dW`` by vectorised Euler-Maruyama."""
    rng = np.random.default_rng(seed)
    x = np.full(n_paths, float(x0))
    for _ in range(int(round(t_end / dt))):
        x = x + (-theta * x) * dt + rng.standard_normal(n_paths) * math.sqrt(dt)
    return x


def integrate_deterministic(model, x0, dt, t_end, omega=None):
    """Noise-free Euler integration of one follower under constant actuator output."""
    omega = np.zeros(model.M) if omega is None else np.asarray(omega, dtype=float)
    x = np.array(x0, dtype=float)
    zero = np.zeros((model.order, model.r))
    for _ in range(int(round(t_end / dt))):
        x = em_step(x, dynamics.drift_increment(model, x, omega), zero, np.zeros(model.r), dt)
    return x
