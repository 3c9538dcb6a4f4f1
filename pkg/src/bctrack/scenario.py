"""Scenario files: TOML grammar, loading and cross-validation.

Key tree (all sections required unless marked optional)::

    name = "..."
    [graph]        adjacency = N x N list, leader = length-N list
    [profile]      sigma0, sigma_inf, varsigma, Ts
    [leader_signal] kind = "sine", amplitude, omega
    [fls]          (optional) drift_centers, diffusion_centers, width
    [plant]        model = "numerical" | "vehicle" | "expression"
                   vehicle: mass, gravity, kappa, friction, spread (optional)
                   expression: order, drift = [...], diffusion = [...], l = [...]
    [faults]       (optional) period, [[faults.actuator]] intervals = [{start, end, mode, value}]
    [gains]        k, lambda, eps, eps5, tau, delta, delta_bar, Gamma, Gamma_bar,
                   Psi, Psi_bar, epsilon_tanh, filter_error_bound (optional)
    [gains.terms]  (optional) overrides for the damping-term registry
    [integrator]   dt, t_end, seed, n_runs, decimation, strict_envelope, noise_scale
    [initial]      x (N x n), eta, Theta_hat, vartheta_hat, varphi_hat
    [acceptance]   (optional) metric = "z_sup" | "tracking_norm", threshold,
                   window_start, run_fraction, h_bar

Per-agent gains accept a scalar, a per-step list or a per-agent list of
per-step lists.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import dynamics, ftpf, graph
from .controller import ControllerGains, FuzzyLayout, TermRegistry
from .errors import (AssumptionViolation, BctrackError, InitialConditionViolation,
                     NotStructurallyBalanced, ParseError, ValidationError)
from .expr import compile_expression
from .fls import NUMERICAL_GRID_1, NUMERICAL_GRID_2

PRESETS = ("numerical", "vehicle")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-4
    t_end: float = 20.0
    seed: int = 0
    n_runs: int = 1
    decimation: int = 100
    strict_envelope: bool = True
    noise_scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.dt <= self.t_end:
            raise ValueError("need 0 < dt <= t_end")
        if self.decimation < 1 or self.n_runs < 1:
            raise ValueError("decimation and n_runs must be >= 1")
        if not self.noise_scale >= 0:
            raise ValueError("noise_scale must be >= 0")

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class Acceptance:
    metric: str = "z_sup"          # or "tracking_norm"
    threshold: float = 0.05
    window_start: float | None = None
    run_fraction: float = 0.9
    h_bar: float | None = None


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    graph: graph.SignedDigraph
    profile: ftpf.PerformanceProfile
    leader: dynamics.LeaderSignal
    layout: FuzzyLayout
    models: tuple
    schedules: tuple
    gains: tuple
    registry: TermRegistry
    integrator: IntegratorConfig
    x0: np.ndarray
    eta0: np.ndarray
    adaptive0: np.ndarray            # N x 3
    acceptance: Acceptance = field(default_factory=Acceptance)

    @property
    def n_agents(self):
        return self.graph.n

    @property
    def order(self):
        return self.models[0].order

    def with_integrator(self, **kw):
        from dataclasses import replace
        return replace(self, integrator=replace(self.integrator, **kw))

    def with_overrides(self, **kw):
        from dataclasses import replace
        return replace(self, **kw)


class _Reader:
    """Typed access into the parsed tree that records field paths in errors."""

    def __init__(self, data, path=""):
        self.data = data
        self.path = path

    def _where(self, key):
        return f"{self.path}.{key}" if self.path else key

    def section(self, key, optional=False):
        v = self.data.get(key)
        if v is None:
            if optional:
                return _Reader({}, self._where(key))
            raise ParseError(f"missing section [{self._where(key)}]")
        if not isinstance(v, dict):
            raise ParseError(f"{self._where(key)}: expected a table")
        return _Reader(v, self._where(key))

    def get(self, key, default=...):
        if key not in self.data:
            if default is ...:
                raise ParseError(f"missing field {self._where(key)}")
            return default
        return self.data[key]

    def num(self, key, default=...):
        v = self.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{self._where(key)}: expected a number, got {v!r}")
        return float(v)

    def int(self, key, default=...):
        v = self.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ParseError(f"{self._where(key)}: expected an integer, got {v!r}")
        return v

    def array(self, key, default=..., ndim=None):
        v = self.get(key, default)
        try:
            arr = np.array(v, dtype=float)
        except (TypeError, ValueError):
            raise ParseError(f"{self._where(key)}: expected a numeric array") from None
        if ndim is not None and arr.ndim != ndim:
            raise ParseError(f"{self._where(key)}: expected {ndim}-d array, got shape {arr.shape}")
        return arr


def _per_agent(value, N, n, name):
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        return np.full((N, n), float(arr))
    if arr.ndim == 1 and arr.shape[0] == n:
        return np.tile(arr, (N, 1))
    if arr.shape == (N, n):
        return arr
    raise ParseError(f"gains.{name}: cannot broadcast shape {arr.shape} to {N} agents x {n} steps")


def _per_agent_scalar(value, N, name):
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        return np.full(N, float(arr))
    if arr.shape == (N,):
        return arr
    raise ParseError(f"gains.{name}: expected a scalar or {N} values")


def _eps_rows(value, N, n):
    arr = np.array(value, dtype=float)
    if arr.shape == (4,):
        return np.broadcast_to(arr, (N, n, 4)).copy()
    if arr.shape == (n, 4):
        return np.broadcast_to(arr, (N, n, 4)).copy()
    if arr.shape == (N, n, 4):
        return arr
    raise ParseError(f"gains.eps: cannot broadcast shape {arr.shape} to ({N}, {n}, 4)")


_MODES = {"normal": dynamics.FaultMode.normal, "ploe": dynamics.FaultMode.ploe,
          "tloe": dynamics.FaultMode.tloe}


def _schedule(sec: _Reader, M, failures):
    period = sec.get("period", None)
    if period is not None:
        period = sec.num("period")
    acts = sec.get("actuator", [])
    if not isinstance(acts, list):
        raise ParseError("faults.actuator: expected an array of tables")
    if len(acts) > M:
        raise ParseError(f"faults: {len(acts)} actuators configured but the plant has {M}")
    out = []
    for h, act in enumerate(acts):
        ivs = []
        for k, iv in enumerate(act.get("intervals", [])):
            where = f"faults.actuator[{h}].intervals[{k}]"
            r = _Reader(iv, where)
            mode = r.get("mode")
            if mode not in _MODES:
                raise ParseError(f"{where}.mode: expected one of {sorted(_MODES)}")
            fm = _MODES[mode]() if mode == "normal" else _MODES[mode](r.num("value"))
            ivs.append(dynamics.FaultInterval(r.num("start"), r.num("end"), fm))
        out.append(tuple(ivs))
    out += [()] * (M - len(out))
    try:
        return dynamics.FaultSchedule(tuple(out), period=period)
    except AssumptionViolation as exc:
        failures.append(f"fault schedule keeps one actuator effective: {exc}")
    except ValueError as exc:
        failures.append(f"fault schedule: {exc}")
    return dynamics.FaultSchedule(tuple(() for _ in range(M)), period=period)


def _plant(sec: _Reader, N):
    model = sec.get("model")
    if model == "numerical":
        m = dynamics.numerical_model()
        if "l" in sec.data:
            from dataclasses import replace
            m = replace(m, l=sec.array("l", ndim=1))
        return m
    if model == "vehicle":
        kw = {k: sec.num(k) for k in ("mass", "gravity", "kappa", "friction", "spread")
              if k in sec.data}
        return dynamics.vehicle_model(**kw)
    if model == "expression":
        n = sec.int("order")
        drift = sec.get("drift")
        diff = sec.get("diffusion")
        if not (isinstance(drift, list) and isinstance(diff, list)) or len(drift) != n or len(diff) != n:
            raise ParseError(f"plant: drift and diffusion need {n} expressions each")
        return dynamics.FollowerModel(
            order=n,
            drift=tuple(compile_expression(e, n) for e in drift),
            diffusion=tuple(compile_expression(e, n) for e in diff),
            l=sec.array("l", ndim=1))
    raise ParseError(f"plant.model: expected numerical, vehicle or expression, got {model!r}")


def parse_scenario(text: str, source="<string>") -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{source}: {exc}") from None
    root = _Reader(data)
    failures: list[str] = []

    g_sec = root.section("graph")
    A = g_sec.array("adjacency", ndim=2)
    b = g_sec.array("leader", ndim=1)
    try:
        g = graph.SignedDigraph(A, b)
    except ValueError as exc:
        raise ParseError(f"graph: {exc}") from None
    N = g.n

    p = root.section("profile")
    try:
        profile = ftpf.PerformanceProfile(p.num("sigma0"), p.num("sigma_inf"),
                                          p.num("varsigma"), p.num("Ts"))
    except ValueError as exc:
        raise ParseError(f"profile: {exc}") from None

    ls = root.section("leader_signal")
    if ls.get("kind", "sine") != "sine":
        raise ParseError("leader_signal.kind: only 'sine' is supported")
    leader = dynamics.LeaderSignal.sine(ls.num("amplitude"), ls.num("omega"))

    f = root.section("fls", optional=True)
    layout = FuzzyLayout(tuple(f.array("drift_centers", NUMERICAL_GRID_1, ndim=1)),
                         tuple(f.array("diffusion_centers", NUMERICAL_GRID_2, ndim=1)),
                         f.num("width", 1.0))

    try:
        model = _plant(root.section("plant"), N)
    except ValueError as exc:
        raise ParseError(f"plant: {exc}") from None
    n, M = model.order, model.M
    if n < 2:
        raise ParseError("plant: order must be at least 2")
    if np.any(model.l == 0):
        failures.append("actuator signs known: every control coefficient l_h must be nonzero")

    schedule = _schedule(root.section("faults", optional=True), M, failures)

    gs = root.section("gains")
    k = _per_agent(gs.get("k"), N, n, "k")
    lam = _per_agent(gs.get("lambda"), N, n, "lambda")
    eps = _eps_rows(gs.get("eps"), N, n)
    tau = _per_agent(gs.get("tau"), N, n - 1, "tau")
    scal = {key: _per_agent_scalar(gs.get(key), N, key)
            for key in ("eps5", "delta", "delta_bar", "Gamma", "Gamma_bar", "Psi", "Psi_bar",
                        "epsilon_tanh")}
    bound = gs.num("filter_error_bound", 0.0)
    gains = []
    for i in range(N):
        try:
            gains.append(ControllerGains(
                k=k[i], lam=lam[i], eps=eps[i], tau=tau[i], filter_error_bound=bound,
                **{key: float(v[i]) for key, v in scal.items()}))
        except ValueError as exc:
            failures.append(f"gains of agent {i + 1}: {exc}")
    try:
        registry = TermRegistry(**gs.section("terms", optional=True).data)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"gains.terms: {exc}") from None

    it = root.section("integrator")
    try:
        integ = IntegratorConfig(
            dt=it.num("dt"), t_end=it.num("t_end", 20.0), seed=it.int("seed", 0),
            n_runs=it.int("n_runs", 1), decimation=it.int("decimation", 100),
            strict_envelope=bool(it.get("strict_envelope", True)),
            noise_scale=it.num("noise_scale", 1.0))
    except ValueError as exc:
        raise ParseError(f"integrator: {exc}") from None
    if gains and integ.dt > min(min(gi.tau) for gi in gains) / 4:
        failures.append("integrator step resolves the filter pole: dt must be <= min(tau)/4")

    ini = root.section("initial")
    x0 = ini.array("x", ndim=2)
    if x0.shape != (N, n):
        raise ParseError(f"initial.x: expected shape ({N}, {n}), got {x0.shape}")
    eta0 = _per_agent(ini.get("eta", 0.0), N, n, "eta")
    adaptive0 = np.column_stack([_per_agent_scalar(ini.get(key, 1.0), N, key)
                                 for key in ("Theta_hat", "vartheta_hat", "varphi_hat")])

    acc = root.section("acceptance", optional=True)
    metric = acc.get("metric", "z_sup")
    if metric not in ("z_sup", "tracking_norm"):
        raise ParseError("acceptance.metric: expected z_sup or tracking_norm")
    acceptance = Acceptance(metric=metric, threshold=acc.num("threshold", 0.05),
                            window_start=acc.num("window_start", profile.Ts),
                            run_fraction=acc.num("run_fraction", 0.9),
                            h_bar=acc.num("h_bar") if "h_bar" in acc.data else None)

    failures += _cross_check(g, profile, x0, leader)
    if failures:
        raise ValidationError(failures)
    return ScenarioConfig(
        name=str(data.get("name", Path(source).stem)), graph=g, profile=profile, leader=leader,
        layout=layout, models=tuple(model for _ in range(N)),
        schedules=tuple(schedule for _ in range(N)), gains=tuple(gains), registry=registry,
        integrator=integ, x0=x0, eta0=eta0, adaptive0=adaptive0, acceptance=acceptance)


def _cross_check(g, profile, x0, leader):
    failures = []
    try:
        graph.gauge_partition(g)
    except NotStructurallyBalanced as exc:
        failures.append(f"structural balance: {exc}")
    if not graph.has_leader_rooted_spanning_tree(g):
        failures.append("leader-rooted spanning tree: some follower is not reachable from the leader")
    for i in range(g.n):
        if graph.total_weight(g, i) == 0:
            failures.append(f"agent {i + 1} has neither neighbours nor a leader link")
    y = x0[:, 0]
    yr = leader.value(0.0)
    for i in range(g.n):
        z = abs(g.b[i]) * (y[i] - np.sign(g.b[i]) * yr)
        z += sum(abs(g.a[i, m]) * (y[i] - np.sign(g.a[i, m]) * y[m]) for m in range(g.n))
        try:
            ftpf.validate_initial(profile, z)
        except InitialConditionViolation as exc:
            failures.append(f"initial error inside envelope (agent {i + 1}): {exc}")
    return failures


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text, str(path))


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ParseError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("bctrack.presets").joinpath(f"{name}.toml").read_text()


def load_preset(name: str) -> ScenarioConfig:
    return parse_scenario(preset_text(name), f"{name}.toml")


def check_scenario(path) -> list[str]:
    """Return every validation failure (empty when the file is valid)."""
    try:
        load_scenario(path)
    except ValidationError as exc:
        return exc.failures
    except BctrackError as exc:
        return [str(exc)]
    return []
