"""Figures for replication reports (written next to the CSVs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import graph  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report(sc, traces, stats, out_dir):
    """Render the standard figure set from the first trace and the ensemble
    statistics; return the written paths."""
    out = Path(out_dir)
    tr = traces[0]
    gauge = graph.gauge_partition(sc.graph)
    N = sc.graph.n
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(N):
        ax.plot(tr.t, tr.x[:, i, 0], label=f"y{i + 1}")
    ax.plot(tr.t, tr.y_r, "k--", lw=1, label="y_r")
    ax.plot(tr.t, -tr.y_r, "k:", lw=1, label="-y_r")
    ax.set(xlabel="t [s]", ylabel="output", title="Outputs against the leader")
    ax.legend(ncol=3, fontsize=8)
    paths.append(_save(fig, out / "outputs.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(N):
        ax.plot(tr.t, tr.z[:, i], label=f"z{i + 1}")
    ax.plot(tr.t, tr.sigma, "k--", lw=1, label="envelope")
    ax.plot(tr.t, -tr.sigma, "k--", lw=1)
    ax.set(xlabel="t [s]", ylabel="z", title="Consensus errors inside the envelope")
    ax.legend(ncol=3, fontsize=8)
    paths.append(_save(fig, out / "consensus_errors.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(stats.t, stats.mean_tracking_norm, label="ensemble mean ||e~||")
    for i in range(N):
        ax.plot(stats.t, stats.mean_abs_z[:, i], lw=0.8, label=f"mean |z{i + 1}|")
    ax.axhline(sc.acceptance.threshold, color="k", ls="--", lw=1, label="threshold")
    ax.set(xlabel="t [s]", yscale="log", title=f"Ensemble statistics ({len(traces)} runs)")
    ax.legend(ncol=2, fontsize=8)
    paths.append(_save(fig, out / "ensemble.png"))

    M = tr.u.shape[2]
    fig, axes = plt.subplots(M, 1, figsize=(7, 2.2 * M + 1), sharex=True, squeeze=False)
    for h in range(M):
        for i in range(N):
            axes[h, 0].plot(tr.t, tr.omega[:, i, h], lw=0.8, label=f"agent {i + 1}")
        axes[h, 0].set(ylabel=f"actuator {h + 1}")
    axes[0, 0].set_title("Actuator outputs after faults")
    axes[-1, 0].set_xlabel("t [s]")
    axes[0, 0].legend(ncol=4, fontsize=8)
    paths.append(_save(fig, out / "actuators.png"))

    fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)
    for k, name in enumerate(("Theta_hat", "vartheta_hat", "varphi_hat")):
        for i in range(N):
            axes[k].plot(tr.t, tr.adaptive[:, i, k], lw=0.8, label=f"agent {i + 1}")
        axes[k].set(ylabel=name)
    axes[0].legend(ncol=4, fontsize=8)
    axes[-1].set_xlabel("t [s]")
    paths.append(_save(fig, out / "adaptive.png"))

    e = tr.x[:, :, 0] - gauge[None, :] * tr.y_r[:, None]
    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(N):
        ax.plot(tr.t, e[:, i], label=f"e~{i + 1}")
    ax.set(xlabel="t [s]", ylabel="tracking error", title="Bipartite tracking errors")
    ax.legend(ncol=4, fontsize=8)
    paths.append(_save(fig, out / "tracking_errors.png"))
    return [Path(p) for p in paths]

