"""Brute-force and numeric oracles.

Nothing here calls into the structure, spectral, residual or limits
modules: reachability, spectral radii, matrix powers and ranks are
recomputed from the raw weight table so that the checks stay independent
of the code they check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import CapExceededError, NumericError
from .graph import WeightedDigraph

ENUMERATION_CAP = 10**6
EIGENSPACE_MAX_SIZE = 8
RANK_TOL = 1e-8


def enumerate_paths(g: WeightedDigraph, x, k: int, cap: int = ENUMERATION_CAP) -> list:
    """All paths of length ``k`` from ``x`` with their weights, depth first."""
    F = np.asarray(g.weights)
    start = g.index(x)
    out = []
    stack = [((start,), 1.0)]
    while stack:
        path, w = stack.pop()
        if len(path) == k + 1:
            out.append((tuple(g.vertices[i] for i in path), w))
            if len(out) > cap:
                raise CapExceededError(f"more than {cap} paths of length {k} from {x!r}")
            continue
        last = path[-1]
        for j in reversed(range(g.n)):
            if F[last, j] > 0:
                stack.append((path + (j,), w * F[last, j]))
    return out


def reach_matrix(F: np.ndarray) -> np.ndarray:
    """Boolean ``x => y`` by breadth-first search from every vertex."""
    n = F.shape[0]
    reach = np.zeros((n, n), dtype=bool)
    for s in range(n):
        seen = {s}
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v in np.flatnonzero(F[u] > 0):
                    if v not in seen:
                        seen.add(int(v))
                        nxt.append(int(v))
            frontier = nxt
        reach[s, sorted(seen)] = True
    return reach


def spectral_radius_dense(F: np.ndarray) -> float:
    """Largest Perron root over the strongly connected blocks, by dense eigensolves.

    Working block by block keeps the result accurate when the Perron root of
    the whole matrix is defective.
    """
    F = np.asarray(F, dtype=float)
    reach = reach_matrix(F)
    comm = reach & reach.T
    done = set()
    best = 0.0
    for i in range(F.shape[0]):
        if i in done:
            continue
        block = np.flatnonzero(comm[i])
        done.update(int(b) for b in block)
        sub = F[np.ix_(block, block)]
        best = max(best, float(np.abs(np.linalg.eigvals(sub)).max()))
    return best


@dataclass(frozen=True)
class NumericResidual:
    theta: np.ndarray  # last kept iterate
    s: float
    trend: str  # "converging" or "diverging"
    iterates: tuple  # (s, matrix) pairs along the schedule
    stable: bool  # no point of the schedule was dropped
    extrapolated: np.ndarray  # Richardson extrapolation to s = 1/rho


def default_schedule(rho: float, jmax: int = 5) -> list:
    return [(1 - 10.0**-j) / rho for j in range(2, jmax + 1)]


def _richardson(eps, values):
    """Neville extrapolation to ``eps = 0`` of a function analytic at 0."""
    table = list(values)
    eps = list(eps)
    for level in range(1, len(table)):
        table = [(eps[i] * table[i + 1] - eps[i + level] * table[i]) / (eps[i] - eps[i + level])
                 for i in range(len(table) - 1)]
    return table[0]


def numeric_residual(g: WeightedDigraph, h: int, schedule=None, rho: float | None = None) -> NumericResidual:
    """``(1 - rho s)^h (Id - sF)^-1`` along ``s -> 1/rho``.

    Iterates whose linear system is too ill-conditioned for double precision
    (estimated relative error above 1e-5) are dropped; the last kept one is
    returned together with the Richardson extrapolation of all kept ones.
    The trend flag is ``diverging`` when the iterates grow by more than a
    factor 2 between the last two kept points.
    """
    F = np.asarray(g.weights, dtype=float)
    n = g.n
    if rho is None:
        rho = spectral_radius_dense(F)
    if rho <= 0:
        raise NumericError("spectral radius is 0")
    if schedule is None:
        schedule = default_schedule(rho)
    kept = []
    for s in schedule:
        M = np.eye(n) - s * F
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond * np.finfo(float).eps > 1e-5:
            continue
        H = np.linalg.solve(M, np.eye(n))
        kept.append((s, (1 - rho * s) ** h * H))
    if not kept:
        raise NumericError("every point of the schedule is too ill-conditioned")
    trend = "converging"
    if len(kept) >= 2:
        a = np.abs(kept[-2][1]).max()
        b = np.abs(kept[-1][1]).max()
        if b > 2 * a:
            trend = "diverging"
    extrapolated = _richardson([1 - rho * s for s, _ in kept], [m for _, m in kept])
    return NumericResidual(kept[-1][1], kept[-1][0], trend, tuple(kept),
                           len(kept) == len(schedule), extrapolated)


def numeric_rank(M: np.ndarray, tol: float = RANK_TOL):
    """Rank with singular values below ``tol * sigma_max`` counted as zero.

    Raises when the decision is fragile: a singular value sits within two
    orders of magnitude of the threshold on either side.
    """
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    rel = sv / sv[0]
    fragile = rel[(rel > tol * 1e-2) & (rel < tol * 1e2)]
    if fragile.size:
        raise NumericError(f"ill-conditioned rank decision: relative singular values {fragile}")
    return int(np.count_nonzero(rel >= tol))


def _nullities(F, rho: float, max_size: int):
    """Nullities of ``(F - rho Id)^m`` for m = 1, 2, ... up to the first repeat.

    The nullity increases strictly with ``m`` up to the index of ``rho`` and
    is constant afterwards; low powers keep the rank decisions well
    conditioned compared to forming the ``n``-th power directly.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n > max_size:
        raise ValueError(f"matrix of size {n} exceeds the bound {max_size}")
    B = F - rho * np.eye(n)
    P = np.eye(n)
    out = [0]
    for _ in range(n):
        P = P @ B
        out.append(n - numeric_rank(P))
        if out[-1] == out[-2]:
            break
    return out


def generalized_eigenspace_dim(F, rho: float, max_size: int = EIGENSPACE_MAX_SIZE) -> int:
    """Dimension of ``ker (F - rho Id)^n`` (the algebraic multiplicity of ``rho``)."""
    return _nullities(F, rho, max_size)[-1]


def eigenvalue_index(F, rho: float, max_size: int = EIGENSPACE_MAX_SIZE) -> int:
    """Index of ``rho``: its multiplicity in the minimal polynomial, i.e. the
    size of the largest Jordan block, i.e. the least ``m`` with
    ``ker (F - rho Id)^m = ker (F - rho Id)^(m+1)``."""
    nullities = _nullities(F, rho, max_size)
    return sum(1 for a, b in zip(nullities, nullities[1:]) if b > a)


def rho_eigenspace(F, rho: float, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ``ker (F - rho Id)``."""
    F = np.asarray(F, dtype=float)
    B = F - rho * np.eye(F.shape[0])
    rank = numeric_rank(B, tol)
    return np.linalg.svd(B)[2][rank:].T


def has_positive_eigenvector(F, rho: float) -> bool:
    """Whether ``ker (F - rho Id)`` contains a vector with all entries > 0.

    Linear feasibility problem: find coefficients ``c`` with ``N c >= 1``
    where the columns of ``N`` span the eigenspace.
    """
    N = rho_eigenspace(F, rho)
    if N.shape[1] == 0:
        return False
    k = N.shape[1]
    res = linprog(np.zeros(k), A_ub=-N, b_ub=-np.ones(N.shape[0]),
                  bounds=[(None, None)] * k, method="highs")
    return res.status == 0


def random_digraph(seed: int, max_v: int = 6, max_w: int = 3, density: float = 0.4) -> WeightedDigraph:
    """Reproducible digraph with 1..max_v vertices and integer weights in 1..max_w.

    Each ordered pair (loops included) is an edge with probability
    ``density``; ``max_w = 0`` gives no edges.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_v + 1))
    mask = rng.random((n, n)) < density
    if max_w <= 0:
        w = np.zeros((n, n))
    else:
        w = np.where(mask, rng.integers(1, max_w + 1, size=(n, n)), 0).astype(float)
    return WeightedDigraph(tuple(f"v{i}" for i in range(n)), w)


def corpus(count: int, max_v: int = 6, max_w: int = 3, positive: bool = True, start: int = 0):
    """First ``count`` seeds (from ``start``) whose digraph has positive spectral
    radius, or all seeds when ``positive`` is false."""
    seeds = []
    seed = start
    while len(seeds) < count:
        g = random_digraph(seed, max_v, max_w)
        if not positive or spectral_radius_dense(g.weights) > 0:
            seeds.append(seed)
        seed += 1
    return seeds
