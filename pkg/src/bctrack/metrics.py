"""Tracking metrics, ensemble statistics and acceptance checks.

Everything here is a pure function of traces, so summaries recomputed from
exported CSVs match the in-memory ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import graph

CERTIFICATE_SLACK = 1e-9


def tracking_errors(y, gauge, y_r):
    """``e~_i = y_i - s_i y_r`` per row, plus the Euclidean norm per row."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    y_r = np.asarray(y_r, dtype=float).reshape(-1, 1)
    e = y - np.asarray(gauge, dtype=float)[None, :] * y_r
    return e, np.linalg.norm(e, axis=1)


def h_bar(sc):
    if sc.acceptance.h_bar is not None:
        return float(sc.acceptance.h_bar)
    return graph.error_gain_constant(sc.graph)


def certificate_holds(trace, gauge, hb):
    """Row-wise ``||e~|| <= ||z|| / h_bar`` with a small absolute slack."""
    _, en = tracking_errors(trace.x[:, :, 0], gauge, trace.y_r)
    zn = np.linalg.norm(trace.z, axis=1)
    return bool(np.all(en <= zn / hb + CERTIFICATE_SLACK))


def envelope_holds(trace):
    return trace.ok and bool(np.all(np.abs(trace.z) < trace.sigma[:, None]))


@dataclass
class EnsembleStatistics:
    t: np.ndarray
    mean_abs_z: np.ndarray
    mean_tracking_norm: np.ndarray
    alive: np.ndarray               # runs contributing at each time
    sup_abs_z: np.ndarray           # runs x N over the window; NaN if the run failed


def ensemble_statistics(traces, sc, window_start=None):
    ws = sc.profile.Ts if window_start is None else window_start
    gauge = graph.gauge_partition(sc.graph)
    longest = max(traces, key=lambda tr: tr.t.shape[0])
    t = longest.t
    R, N = t.shape[0], sc.graph.n
    absz = np.full((len(traces), R, N), np.nan)
    en = np.full((len(traces), R), np.nan)
    sup = np.full((len(traces), N), np.nan)
    for k, tr in enumerate(traces):
        r = tr.t.shape[0]
        absz[k, :r] = np.abs(tr.z)
        en[k, :r] = tracking_errors(tr.x[:, :, 0], gauge, tr.y_r)[1] if r else []
        if tr.ok:
            win = tr.t >= ws - 1e-12
            sup[k] = np.abs(tr.z[win]).max(axis=0) if win.any() else 0.0
    alive = np.sum(~np.isnan(en), axis=0)
    with np.errstate(invalid="ignore"):
        mz = np.nanmean(absz, axis=0) if R else np.zeros((0, N))
        me = np.nanmean(en, axis=0) if R else np.zeros(0)
    return EnsembleStatistics(t=t, mean_abs_z=mz, mean_tracking_norm=me, alive=alive, sup_abs_z=sup)


@dataclass
class SummaryMetrics:
    scenario: str
    n_runs: int
    seeds: list
    metric: str
    threshold: float
    window_start: float
    sup_abs_z_mean: list            # per agent, mean over successful runs
    max_mean_abs_z: float           # worst per-time ensemble mean in the window
    max_mean_tracking_norm: float
    run_fraction_within: float
    envelope_ok: bool
    certificate_ok: bool
    h_bar: float
    steady_state_bound: float       # sigma_inf * sqrt(N) / h_bar
    failures: list = field(default_factory=list)
    passed: bool = False
    reasons: list = field(default_factory=list)

    def as_dict(self):
        return dict(self.__dict__)


def summarize(sc, traces, seeds=None):
    acc = sc.acceptance
    ws = acc.window_start if acc.window_start is not None else sc.profile.Ts
    stats = ensemble_statistics(traces, sc, ws)
    gauge = graph.gauge_partition(sc.graph)
    hb = h_bar(sc)
    win = stats.t >= ws - 1e-12
    complete = all(tr.ok for tr in traces)
    ok_runs = [k for k, tr in enumerate(traces) if tr.ok]
    mz = stats.mean_abs_z[win]
    me = stats.mean_tracking_norm[win]
    max_mz = float(np.nanmax(mz)) if mz.size and not np.all(np.isnan(mz)) else float("nan")
    max_me = float(np.nanmax(me)) if me.size and not np.all(np.isnan(me)) else float("nan")
    within = [k for k in ok_runs if np.all(stats.sup_abs_z[k] < acc.threshold)]
    frac = len(within) / len(traces)
    envelope = all(envelope_holds(tr) for tr in traces)
    cert = all(certificate_holds(tr, gauge, graph.error_gain_constant(sc.graph)) for tr in traces)
    sup_mean = (np.nanmean(stats.sup_abs_z[ok_runs], axis=0).tolist() if ok_runs
                else [float("nan")] * sc.graph.n)

    reasons = []
    if not complete:
        reasons.append(f"{len(traces) - len(ok_runs)} of {len(traces)} runs failed")
    if not envelope:
        reasons.append("envelope |z| < sigma violated")
    if not cert:
        reasons.append("tracking-error certificate violated")
    if math.isnan(max_mz):
        reasons.append(f"no run reached the acceptance window t >= {ws:g}")
    elif acc.metric == "z_sup":
        if not max_mz < acc.threshold:
            reasons.append(f"ensemble mean |z| reaches {max_mz:.4g} >= {acc.threshold}")
        if frac < acc.run_fraction:
            reasons.append(f"only {frac:.0%} of runs keep sup|z| < {acc.threshold}")
    else:
        if not max_me < acc.threshold:
            reasons.append(f"ensemble mean ||e~|| reaches {max_me:.4g} >= {acc.threshold}")
    return SummaryMetrics(
        scenario=sc.name, n_runs=len(traces),
        seeds=list(seeds) if seeds is not None else [tr.seed for tr in traces],
        metric=acc.metric, threshold=acc.threshold, window_start=ws,
        sup_abs_z_mean=sup_mean, max_mean_abs_z=max_mz, max_mean_tracking_norm=max_me,
        run_fraction_within=frac, envelope_ok=envelope, certificate_ok=cert, h_bar=hb,
        steady_state_bound=sc.profile.sigma_inf * np.sqrt(sc.graph.n) / hb,
        failures=[f"seed {tr.seed}: {tr.failure}" for tr in traces if not tr.ok],
        passed=not reasons, reasons=reasons)
