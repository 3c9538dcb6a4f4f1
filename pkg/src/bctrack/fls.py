"""Normalised Gaussian fuzzy basis.

Rules use a diagonal grid: rule ``l`` places the same centre on every input
dimension, so ``P`` centres give ``P`` rules whatever the input size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasis, RankDeficient

NUMERICAL_GRID_1 = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5)
NUMERICAL_GRID_2 = (-2.0, -1.5, -0.5, 0.0, 0.5, 1.5, 2.0)


@dataclass(frozen=True, eq=False)
class MembershipGrid:
    centers: np.ndarray  # P x n
    width: float = 1.0

    def __post_init__(self):
        c = np.array(self.centers, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("centers must be a non-empty P x n array")
        if not self.width > 0:
            raise ValueError("width must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)

    @classmethod
    def diagonal(cls, centers, dims, width=1.0):
        c = np.asarray(centers, dtype=float)
        return cls(np.repeat(c[:, None], dims, axis=1), width)

    @property
    def rules(self):
        return self.centers.shape[0]

    @property
    def dims(self):
        return self.centers.shape[1]


@dataclass(frozen=True, eq=False)
class FuzzySystem:
    grid: MembershipGrid

    def basis(self, x):
        return basis(self, x)

    def evaluate(self, theta, x):
        return evaluate(self, theta, x)


def basis(fs: FuzzySystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != fs.grid.dims:
        raise ValueError(f"expected {fs.grid.dims} inputs, got {x.shape[0]}")
    d2 = ((x[None, :] - fs.grid.centers) ** 2).sum(axis=1)
    w = np.exp(-0.5 * d2 / fs.grid.width**2)
    total = w.sum()
    if not total > 0:
        raise DegenerateBasis(f"all memberships underflow at x={x.tolist()}")
    return w / total


def evaluate(fs, theta, x) -> float:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (fs.grid.rules,):
        raise ValueError("theta length must equal the rule count")
    return float(theta @ basis(fs, x))


def fit_least_squares(fs, samples) -> np.ndarray:
    xs, ys = zip(*samples)
    design = np.array([basis(fs, x) for x in xs])
    if np.linalg.matrix_rank(design) < fs.grid.rules:
        raise RankDeficient("design matrix does not span the basis")
    theta, *_ = np.linalg.lstsq(design, np.asarray(ys, dtype=float), rcond=None)
    return theta
