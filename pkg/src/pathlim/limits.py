"""Finite-path distributions, their limit cocycle kernels and convergence tests.

Uniform distributions ``mu_{x,k}`` live on the paths of length ``k`` from
``x``; Boltzmann distributions ``theta_{x,s}`` on all finite paths from
``x``. Both are evaluated on cylinders: ``uniform_cylinder`` gives the mass of
the paths of length ``k`` with prefix ``u``, ``boltzmann_cylinder`` the mass
of the paths extending ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import (
    DegenerateError,
    InvalidPathError,
    NoPathError,
    NotUmbrellaError,
    PreconditionError,
)
from .graph import WeightedDigraph, exact_weights, format_number, matrix_csv, path_weight, z_table
from .residual import eigenvector_bases, growth_eval, residual_matrix, residual_umbrella
from .structure import common_period, decompose, reachable, umbrella_spanned

ROW_SUM_TOL = 1e-12
COCYCLE_TOL = 1e-10
AGREEMENT_TOL = 1e-10
POSITIVE_TOL = 1e-12


@dataclass(frozen=True)
class CocycleKernel:
    """Cocycle ``Gamma`` and transition kernel ``q = w Gamma / rho`` on ``support``.

    ``gamma[i, j]`` is meaningful where ``accessible[i, j]`` holds and 0
    elsewhere; ``weights`` is the weight table of ``support``.
    """

    support: tuple
    rho: float
    gamma: np.ndarray
    accessible: np.ndarray
    q: np.ndarray
    weights: np.ndarray

    def index(self, x) -> int:
        try:
            return self.support.index(x)
        except ValueError:
            raise PreconditionError(f"{x!r} is not in the kernel support") from None

    def transition(self, x, y) -> float:
        return float(self.q[self.index(x), self.index(y)])

    def cocycle(self, x, y) -> float:
        return float(self.gamma[self.index(x), self.index(y)])

    def prefix_probability(self, u) -> float:
        """``rho^-|u| w(u) Gamma(x, final u)``: mass of the infinite paths with prefix ``u``."""
        u = tuple(u)
        idx = [self.index(v) for v in u]
        value = 1.0
        for i, j in zip(idx, idx[1:]):
            value *= self.weights[i, j] / self.rho
        return float(value * self.gamma[idx[0], idx[-1]]) if self.accessible[idx[0], idx[-1]] else 0.0

    def to_csv(self) -> str:
        return matrix_csv(self.q, self.support, self.support)


@dataclass(frozen=True)
class Violation:
    kind: str  # "row-sum", "cocycle", "completeness" or "kernel"
    witness: tuple
    value: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def valid(self) -> bool:
        return not any(v.kind != "completeness" for v in self.violations)

    @property
    def complete(self) -> bool:
        return self.valid and not any(v.kind == "completeness" for v in self.violations)


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of the uniform-convergence analysis from ``x0``.

    ``betas[j, i]`` is ``beta_{x,i}`` for ``x = vertices[j]``; ``residue_limits``
    maps each tested cylinder to its ``d`` residue limits.
    """

    x0: object
    vertices: tuple
    d: int
    betas: np.ndarray
    residue_limits: dict
    verdict: str  # "converges" or "diverges"
    witness: tuple | None
    aperiodic: bool
    max_len: int
    note: str = field(default="")

    @property
    def converges(self) -> bool:
        return self.verdict == "converges"

    def beta(self, x, i: int) -> float:
        return float(self.betas[self.vertices.index(x), i])

    def betas_csv(self) -> str:
        return matrix_csv(self.betas, self.vertices, [f"i={i}" for i in range(self.d)])

    def residues_csv(self) -> str:
        lines = ["cylinder," + ",".join(f"i={i}" for i in range(self.d))]
        for u, values in self.residue_limits.items():
            lines.append(" ".join(map(str, u)) + "," + ",".join(format_number(v) for v in values))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# finite distributions


def _check_from(g: WeightedDigraph, x, u) -> tuple:
    u = g.check_path(u)
    g.index(x)
    if u[0] != x:
        raise InvalidPathError(f"path starts at {u[0]!r}, not at {x!r}")
    return u


def boltzmann_cylinder(g: WeightedDigraph, x, s: float, u) -> float:
    """``theta_{x,s}`` of the paths extending ``u``: ``w(u) s^|u| G_{final u}(s) / G_x(s)``.

    Computed on ``V(x)``, so ``s`` ranges over ``[0, 1/gamma(x))``.
    """
    u = _check_from(g, x, u)
    sub, _ = reachable(g, x)
    growth = growth_eval(sub, s)
    return path_weight(g, u) * s ** (len(u) - 1) * growth.G(u[-1]) / growth.G(x)


def uniform_cylinder(g: WeightedDigraph, x, k: int, u, exact: bool = False):
    """``mu_{x,k}`` of the paths with prefix ``u``: ``w(u) Z_{final u}(k - |u|) / Z_x(k)``.

    With ``exact=True`` the value is a Fraction (weights are read as exact
    binary fractions).
    """
    u = _check_from(g, x, u)
    m = len(u) - 1
    if m > k:
        raise PreconditionError(f"cylinder length {m} exceeds k={k}")
    table = z_table(g, k, exact=exact)
    total = table.z(x, k)
    if total == 0:
        raise NoPathError(f"no path of length {k} from {x!r}")
    if exact:
        F = exact_weights(g)
        w = Fraction(1)
        for a, b in zip(u, u[1:]):
            w *= F[g.index(a), g.index(b)]
        return w * table.z(u[-1], k - m) / total
    return path_weight(g, u) * float(table.z(u[-1], k - m)) / float(total)


# ---------------------------------------------------------------------------
# limits


def _reachable_theta(g: WeightedDigraph, x0):
    sub, gamma = reachable(g, x0)
    if gamma == 0:
        raise DegenerateError(f"no infinite paths from {x0!r} (gamma = 0)")
    return sub, gamma, residual_matrix(sub).theta


def boltzmann_limit_cylinder(g: WeightedDigraph, x0, u) -> float:
    """Limit of ``theta_{x0,s}`` on the paths extending ``u`` as ``s -> 1/gamma(x0)``:
    ``gamma^-|u| w(u) [Theta 1]_{final u} / [Theta 1]_{x0}`` with ``Theta`` the
    residual matrix of ``V(x0)``."""
    u = _check_from(g, x0, u)
    sub, gamma, theta = _reachable_theta(g, x0)
    mass = theta.sum(axis=1)
    m = len(u) - 1
    return path_weight(g, u) * gamma ** (-m) * mass[sub.index(u[-1])] / mass[sub.index(x0)]


def _kernel_from_vector(g: WeightedDigraph, rho: float, vec: np.ndarray) -> CocycleKernel:
    dec = decompose(g)
    n = g.n
    cls = [dec.class_of[v] for v in g.vertices]
    accessible = np.array([[cls[j] in dec.reach[cls[i]] for j in range(n)] for i in range(n)])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = vec[None, :] / vec[:, None]
    gamma = np.where(accessible, ratio, 0.0)
    q = g.weights * gamma / rho
    return CocycleKernel(g.vertices, float(rho), gamma, accessible, q, np.array(g.weights))


def limit_kernel(g: WeightedDigraph, x0, source: str = "reachable") -> CocycleKernel:
    """Limit cocycle kernel from ``x0``, supported by ``U(x0)``.

    ``Gamma(x, y) = [Theta 1]_y / [Theta 1]_x``. With ``source="reachable"``
    (default) ``Theta`` is the residual matrix of ``V(x0)``, whose rows
    vanish outside ``U(x0)``; ``source="umbrella"`` uses the residual matrix
    of ``U(x0)`` itself. The two agree unless a basic class of ``U(x0)``
    leads to vertices outside ``U(x0)``, in which case only the former
    matches the limits of the finite distributions.
    """
    support = umbrella_spanned(g, x0)
    U = g.sub(support)
    if source == "reachable":
        sub, gamma, theta = _reachable_theta(g, x0)
        mass = theta.sum(axis=1)
        vec = np.array([mass[sub.index(v)] for v in support])
    elif source == "umbrella":
        res = residual_umbrella(U)
        gamma = decompose(U).rho_total
        vec = res.theta.sum(axis=1)
    else:
        raise ValueError(f"unknown source {source!r}")
    return _kernel_from_vector(U, gamma, vec)


def cocycle_from_alpha(g: WeightedDigraph, alphas) -> CocycleKernel:
    """Complete cocycle kernel ``Gamma(x, y) = r_y / r_x`` with ``r = sum alpha_i r_i``.

    ``alphas`` has one positive entry per basic class (in class order) and is
    normalized to sum 1. Raises :class:`NotUmbrellaError` when ``r`` is not
    strictly positive, which happens exactly when ``g`` is not umbrella.
    """
    dec = decompose(g)
    alphas = np.asarray(alphas, dtype=float).ravel()
    lefts, rights, _ = eigenvector_bases(g)
    if alphas.size != len(rights):
        raise PreconditionError(f"expected {len(rights)} coefficients, got {alphas.size}")
    if np.any(alphas <= 0) or not np.all(np.isfinite(alphas)):
        raise PreconditionError("coefficients must be finite and positive")
    alphas = alphas / alphas.sum()
    r = sum(a * v for a, v in zip(alphas, rights))
    zero = [v for v, x in zip(g.vertices, r) if x <= POSITIVE_TOL * r.max()]
    if zero:
        raise NotUmbrellaError(f"eigenvector vanishes on {zero}: digraph is not umbrella")
    return _kernel_from_vector(g, dec.rho_total, r)


def validate_cocycle_measure(g: WeightedDigraph, kernel: CocycleKernel) -> ValidationReport:
    """Check row sums of ``q``, ``q = w Gamma / rho``, multiplicativity of
    ``Gamma`` on accessible triples and positivity on accessible pairs."""
    sub = g.sub(kernel.support)
    F = sub.weights
    n = sub.n
    out = []
    acc = kernel.accessible
    G = kernel.gamma
    for i, x in enumerate(kernel.support):
        total = float(kernel.q[i].sum())
        if abs(total - 1) > ROW_SUM_TOL:
            out.append(Violation("row-sum", (x,), total))
    expected = F * G / kernel.rho
    for i, j in zip(*np.nonzero(np.abs(kernel.q - expected) > ROW_SUM_TOL)):
        out.append(Violation("kernel", (kernel.support[i], kernel.support[j]), float(kernel.q[i, j])))
    for i, j in zip(*np.nonzero(acc)):
        if not G[i, j] > 0:
            out.append(Violation("completeness", (kernel.support[i], kernel.support[j]), float(G[i, j])))
    for i, j, k in product(range(n), repeat=3):
        if acc[i, j] and acc[j, k]:
            lhs, rhs = G[i, k], G[i, j] * G[j, k]
            if abs(lhs - rhs) > COCYCLE_TOL * max(1.0, abs(lhs)):
                out.append(Violation("cocycle", tuple(kernel.support[t] for t in (i, j, k)), float(lhs - rhs)))
    return ValidationReport(tuple(out))


def _cylinders(g: WeightedDigraph, x0, max_len: int):
    """Paths from ``x0`` of length 1..max_len, shorter first, then in vertex order."""
    level = [(x0,)]
    for _ in range(max_len):
        level = [u + (y,) for u in level for y in g.successors(u[-1])]
        yield from level


def uniform_convergence(g: WeightedDigraph, x0, max_len: int | None = None) -> ConvergenceReport:
    """Whether ``mu_{x0,k}`` converges weakly as ``k -> infinity``.

    With ``d`` the least common multiple of the basic-class periods of
    ``V(x0)``, ``F^(nd+i) 1 ~ n^(h-1) rho^(nd+i) beta_{., i}`` where
    ``beta_{x,i} = rho^-i [F^i P 1]_x`` and ``P`` is the residual matrix of
    the digraph with weights ``F^d`` (the projector ``Pi_d`` at height 1).
    The limit of ``mu_{x0,k}`` on the cylinder ``u`` along ``k = i mod d`` is
    then ``rho^-|u| w(u) beta_{final u, (i - |u|) mod d} / beta_{x0, i}``;
    the verdict compares these residue limits over all cylinders of length
    at most ``max_len`` (default ``2d``).
    """
    sub, rho, _ = _reachable_theta(g, x0)
    dec = decompose(sub)
    d = common_period(dec, dec.basic_classes)
    if max_len is None:
        max_len = 2 * d
    F = sub.weights
    P = residual_matrix(sub.with_weights(np.linalg.matrix_power(F, d))).theta
    betas = np.empty((sub.n, d))
    col = P.sum(axis=1)
    for i in range(d):
        betas[:, i] = col / rho**i
        col = F @ col
    limits = {}
    witness = None
    start = sub.index(x0)
    for u in _cylinders(sub, x0, max_len):
        m = len(u) - 1
        w = path_weight(sub, u) / rho**m
        end = sub.index(u[-1])
        values = tuple(float(w * betas[end, (i - m) % d] / betas[start, i]) for i in range(d))
        limits[u] = values
        if witness is None and max(values) - min(values) > AGREEMENT_TOL:
            witness = u
    return ConvergenceReport(
        x0=x0,
        vertices=sub.vertices,
        d=d,
        betas=betas,
        residue_limits=limits,
        verdict="converges" if witness is None else "diverges",
        witness=witness,
        aperiodic=d == 1,
        max_len=max_len,
        note="" if d == 1 else f"cylinders checked up to length {max_len}",
    )
