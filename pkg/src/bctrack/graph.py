"""Signed follower graphs.

A :class:`SignedDigraph` holds the follower adjacency ``a`` (row ``i`` is the
receiver) and the leader weights ``b``.  Everything here is a pure function of
that value.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NotStructurallyBalanced, SingularMatrix

SINGULAR_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class SignedDigraph:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if a.shape[0] != b.shape[0]:
            raise ValueError("leader weights must have one entry per agent")
        if a.shape[0] < 1:
            raise ValueError("graph needs at least one agent")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("weights must be finite")
        if np.any(np.diag(a) != 0):
            raise ValueError("self-loops are not allowed")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def neighbors(self, i: int) -> list[int]:
        """Agents that agent ``i`` listens to, ascending."""
        return [int(m) for m in np.flatnonzero(self.a[i])]


def in_degree(g: SignedDigraph) -> np.ndarray:
    return np.diag(np.abs(g.a).sum(axis=1))


def laplacian(g: SignedDigraph) -> np.ndarray:
    return in_degree(g) - g.a


def leader_matrix(g: SignedDigraph) -> np.ndarray:
    return np.diag(np.abs(g.b))


def total_weight(g: SignedDigraph, i: int) -> float:
    return float(np.abs(g.a[i]).sum() + abs(g.b[i]))


def gauge_partition(g: SignedDigraph) -> np.ndarray:
    """Two-colour the undirected sign support; return the +1/-1 camp of each agent.

    Components touching the leader are oriented so that sign(b_i) matches the
    camp of every leader-linked follower.  Components with neither edges nor a
    leader link default to +1.
    """
    n = g.n
    sym = np.sign(g.a)
    signs = np.zeros(n, dtype=int)
    for root in range(n):
        if signs[root]:
            continue
        signs[root] = 1
        comp = [root]
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for m in range(n):
                s = sym[i, m] or sym[m, i]
                if not s:
                    continue
                if sym[i, m] and sym[m, i] and sym[i, m] != sym[m, i]:
                    raise NotStructurallyBalanced(
                        f"edges {i + 1}->{m + 1} and {m + 1}->{i + 1} disagree in sign")
                want = signs[i] * int(s)
                if signs[m] == 0:
                    signs[m] = want
                    comp.append(m)
                    queue.append(m)
                elif signs[m] != want:
                    raise NotStructurallyBalanced(
                        f"sign-inconsistent cycle through agents {i + 1} and {m + 1}")
        linked = [i for i in comp if g.b[i] != 0]
        if linked:
            i0 = linked[0]
            if signs[i0] != np.sign(g.b[i0]):
                for i in comp:
                    signs[i] = -signs[i]
            for i in linked:
                if signs[i] != np.sign(g.b[i]):
                    raise NotStructurallyBalanced(
                        f"leader weight of agent {i + 1} contradicts its camp")
    return signs


def has_leader_rooted_spanning_tree(g: SignedDigraph) -> bool:
    reached = set(int(i) for i in np.flatnonzero(g.b))
    queue = deque(reached)
    while queue:
        m = queue.popleft()
        for i in np.flatnonzero(g.a[:, m]):
            if int(i) not in reached:
                reached.add(int(i))
                queue.append(int(i))
    return len(reached) == g.n


def error_gain_constant(g: SignedDigraph) -> float:
    """Smallest singular value of L + B."""
    s = np.linalg.svd(laplacian(g) + leader_matrix(g), compute_uv=False)
    if s[0] == 0 or s[-1] < SINGULAR_RTOL * s[0]:
        raise SingularMatrix(f"L+B is numerically singular (min singular value {s[-1]:.3e})")
    return float(s[-1])
