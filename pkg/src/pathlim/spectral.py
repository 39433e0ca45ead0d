"""Perron data of irreducible blocks: spectral radius, period, eigenvector pairs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import ConvergenceError, DegenerateError, PreconditionError
from .graph import WeightedDigraph

RAYLEIGH_TOL = 1e-13
MAX_ITER = 10_000


@dataclass(frozen=True)
class PerronPair:
    """Positive left/right ``rho``-eigenvectors of an irreducible block with
    ``left @ right == 1``. Entries follow the order of ``vertices``."""

    vertices: tuple
    left: np.ndarray
    right: np.ndarray
    rho: float


@dataclass(frozen=True)
class PeriodData:
    period: int
    # periodic classes C_0..C_{d-1}; every edge of the class goes C_j -> C_{j+1 mod d}
    classes: tuple


def _block(g: WeightedDigraph, cls) -> np.ndarray:
    idx = [g.index(v) for v in cls]
    return np.asarray(g.weights[np.ix_(idx, idx)])


def perron_iteration(M: np.ndarray, tol: float = RAYLEIGH_TOL, max_iter: int = MAX_ITER):
    """Perron root and right eigenvector of an irreducible nonnegative matrix.

    Iterates on ``M + c I`` with ``c`` the maximal row sum, which is
    primitive, so the iteration converges geometrically even for periodic
    ``M``. Stops when the relative change of the Rayleigh quotient and the
    relative Collatz-Wielandt gap ``max(Mx/x) - min(Mx/x)`` are both below
    ``tol``. Returns ``(rho, x)`` with ``max(x) == 1``.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    c = float(M.sum(axis=1).max())
    if c == 0.0:
        return 0.0, np.ones(n)
    if n == 1:
        return float(M[0, 0]), np.ones(1)
    S = M + c * np.eye(n)
    x = np.ones(n)
    lam = np.inf
    for _ in range(max_iter):
        y = S @ x
        new = float(x @ y) / float(x @ x)
        ratios = y / x
        gap = (ratios.max() - ratios.min()) / ratios.max()
        x = y / y.max()
        if abs(new - lam) <= tol * new and gap <= tol:
            lam = new
            break
        lam = new
    else:
        raise ConvergenceError("power iteration did not converge", residual=float(gap))
    y = S @ x
    lam = float(x @ y) / float(x @ x)
    return max(lam - c, 0.0), x


def spectral_radius_class(g: WeightedDigraph, cls) -> float:
    """Spectral radius of the block of ``g`` on a strongly connected vertex set.

    A singleton without self-loop has spectral radius 0.
    """
    rho, _ = perron_iteration(_block(g, cls))
    return rho


def period_class(g: WeightedDigraph, cls) -> PeriodData:
    """Period and periodic classes of a strongly connected vertex set.

    Breadth-first levels from the first vertex of ``cls``; the period is the
    gcd of ``level(u) + 1 - level(v)`` over the edges ``(u, v)`` inside the
    class. A class without edges gets period 0.
    """
    cls = tuple(cls)
    members = set(cls)
    level = {cls[0]: 0}
    queue = deque([cls[0]])
    d = 0
    inner = []
    while queue:
        u = queue.popleft()
        for v in g.successors(u):
            if v not in members:
                continue
            inner.append((u, v))
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    back = {cls[0]}
    stack = [cls[0]]
    while stack:
        v = stack.pop()
        for u, w in inner:
            if w == v and u not in back:
                back.add(u)
                stack.append(u)
    if len(level) != len(cls) or len(back) != len(cls):
        raise PreconditionError("vertex set is not strongly connected")
    for u, v in inner:
        d = gcd(d, abs(level[u] + 1 - level[v]))
    if d == 0:
        return PeriodData(0, ())
    classes = tuple(tuple(v for v in cls if level[v] % d == j) for j in range(d))
    return PeriodData(d, classes)


def perron_pair(g: WeightedDigraph, cls) -> PerronPair:
    """Normalized Perron pair of an irreducible block.

    The right vector is scaled to unit maximal entry, then the left vector so
    that ``left @ right == 1``.
    """
    cls = tuple(cls)
    M = _block(g, cls)
    return perron_pair_matrix(M, cls)


def perron_pair_matrix(M: np.ndarray, labels=None) -> PerronPair:
    rho, r = perron_iteration(M)
    if rho <= 0:
        raise DegenerateError("block has spectral radius 0")
    _, l = perron_iteration(np.asarray(M).T)
    r = r / r.max()
    l = l / float(l @ r)
    labels = tuple(labels) if labels is not None else tuple(range(len(r)))
    return PerronPair(labels, l, r, rho)


def transported_pairs(g: WeightedDigraph, cls, period: PeriodData,
                      base: PerronPair | None = None) -> list[PerronPair]:
    """Perron pairs of the diagonal blocks ``S_i`` of ``F^d`` on the periodic classes.

    With ``Q_j`` the block ``C_j x C_{j+1}``, the pair on ``C_i`` is
    ``l_i = rho^-i l_0 Q_0...Q_{i-1}`` and ``r_i = rho^(i-d) Q_i...Q_{d-1} r_0``,
    where ``(l_0, r_0)`` is the Perron pair of ``S_0 = Q_0...Q_{d-1}``
    (computed when ``base`` is None).
    """
    d = period.period
    if d < 1 or len(period.classes) != d:
        raise PreconditionError("inconsistent period data")
    layers = [tuple(c) for c in period.classes]
    if set().union(*layers) != set(cls) or sum(map(len, layers)) != len(set(cls)):
        raise PreconditionError("periodic classes do not partition the class")
    Q = []
    for j in range(d):
        src, dst = layers[j], layers[(j + 1) % d]
        block = g.weights[np.ix_([g.index(v) for v in src], [g.index(v) for v in dst])]
        Q.append(np.asarray(block))
    # every edge of the class must be in some Q_j
    inner = _block(g, cls)
    if np.count_nonzero(inner) != sum(np.count_nonzero(q) for q in Q):
        raise PreconditionError("edges do not follow the periodic classes")
    if base is None:
        S0 = np.eye(len(layers[0]))
        for q in Q:
            S0 = S0 @ q
        base = perron_pair_matrix(S0, layers[0])
    rho = base.rho ** (1.0 / d)
    pairs = []
    for i in range(d):
        l = base.left.copy()
        for j in range(i):
            l = l @ Q[j]
        r = base.right.copy()
        for j in reversed(range(i, d)):
            r = Q[j] @ r
        pairs.append(PerronPair(layers[i], l * rho ** (-i), r * rho ** (i - d), base.rho))
    return pairs
