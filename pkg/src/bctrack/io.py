"""CSV export of traces and summaries.

Trace files start with two comment lines (shape and run status), then a
header row, then one row per recorded step.  Per agent ``i`` the columns are
``x{i}_{l}``, ``z{i}``, ``e_star{i}``, ``zbar{i}_{l}``, ``eta{i}_{l}``,
``Theta_hat{i}``, ``vartheta_hat{i}``, ``varphi_hat{i}``, ``u{i}_{h}`` and
``omega{i}_{h}``, after the shared ``t``, ``sigma`` and ``y_r``.  That gives
``3 + N * (3n + 5 + 2M)`` columns.  Values use ``%.17g`` so they read back
bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

FMT = "%.17g"


def column_count(N, n, M):
    return 3 + N * (3 * n + 5 + 2 * M)


def header(N, n, M):
    cols = ["t", "sigma", "y_r"]
    for i in range(1, N + 1):
        cols += [f"x{i}_{l}" for l in range(1, n + 1)]
        cols += [f"z{i}", f"e_star{i}"]
        cols += [f"zbar{i}_{l}" for l in range(1, n + 1)]
        cols += [f"eta{i}_{l}" for l in range(1, n + 1)]
        cols += [f"Theta_hat{i}", f"vartheta_hat{i}", f"varphi_hat{i}"]
        cols += [f"u{i}_{h}" for h in range(1, M + 1)]
        cols += [f"omega{i}_{h}" for h in range(1, M + 1)]
    return cols


def _rows(tr):
    R, N, n = tr.x.shape
    parts = [tr.t[:, None], tr.sigma[:, None], tr.y_r[:, None]]
    for i in range(N):
        parts += [tr.x[:, i, :], tr.z[:, i, None], tr.e_star[:, i, None], tr.zbar[:, i, :],
                  tr.eta[:, i, :], tr.adaptive[:, i, :], tr.u[:, i, :], tr.omega[:, i, :]]
    return np.hstack(parts) if R else np.zeros((0, len(parts)))


def export_csv(tr, path):
    path = Path(path)
    _, N, n = tr.x.shape
    M = tr.u.shape[2]
    status = "ok" if tr.ok else f"failed: {tr.failure}"
    try:
        with path.open("w", newline="") as fh:
            fh.write(f"# seed={tr.seed} N={N} n={n} M={M} columns=3+N*(3n+5+2M)={column_count(N, n, M)}\n")
            fh.write(f"# status: {status}\n")
            fh.write(",".join(header(N, n, M)) + "\n")
            rows = _rows(tr)
            if rows.size:
                np.savetxt(fh, rows, fmt=FMT, delimiter=",")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def read_csv(path):
    """Read a trace written by :func:`export_csv` back into a trace object."""
    from .engine import SimulationTrace

    path = Path(path)
    with path.open() as fh:
        meta = dict(kv.split("=", 1) for kv in fh.readline()[2:].split()[:4])
        status = fh.readline()[2:].strip().removeprefix("status: ")
        cols = fh.readline().strip().split(",")
        body = fh.read()
    data = (np.loadtxt(body.splitlines(), delimiter=",", ndmin=2) if body.strip()
            else np.zeros((0, len(cols))))
    N, n, M = int(meta["N"]), int(meta["n"]), int(meta["M"])
    if len(cols) != column_count(N, n, M):
        raise ValueError(f"{path}: header has {len(cols)} columns, expected {column_count(N, n, M)}")
    R = data.shape[0] if data.size else 0
    tr = SimulationTrace.allocate(int(meta["seed"]), R, N, n, M)
    if R:
        tr.t, tr.sigma, tr.y_r = data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy()
        w = 3 * n + 5 + 2 * M
        for i in range(N):
            blk = data[:, 3 + i * w: 3 + (i + 1) * w]
            o = 0
            tr.x[:, i, :] = blk[:, o:o + n]; o += n
            tr.z[:, i] = blk[:, o]; o += 1
            tr.e_star[:, i] = blk[:, o]; o += 1
            tr.zbar[:, i, :] = blk[:, o:o + n]; o += n
            tr.eta[:, i, :] = blk[:, o:o + n]; o += n
            tr.adaptive[:, i, :] = blk[:, o:o + 3]; o += 3
            tr.u[:, i, :] = blk[:, o:o + M]; o += M
            tr.omega[:, i, :] = blk[:, o:o + M]
    if status != "ok":
        tr.failure = RuntimeError(status.removeprefix("failed: "))
    return tr


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, list):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return _clean(v.item())
    return v


def write_summary(summary, stats, path_dir):
    path_dir = Path(path_dir)
    (path_dir / "summary.json").write_text(
        json.dumps({k: _clean(v) for k, v in summary.as_dict().items()}, indent=2) + "\n")
    N = stats.mean_abs_z.shape[1] if stats.mean_abs_z.ndim == 2 else 0
    with (path_dir / "ensemble.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "runs_alive"] + [f"mean_abs_z{i + 1}" for i in range(N)] + ["mean_tracking_norm"])
        for k in range(stats.t.shape[0]):
            w.writerow([FMT % stats.t[k], int(stats.alive[k])]
                       + [FMT % v for v in stats.mean_abs_z[k]] + [FMT % stats.mean_tracking_norm[k]])
