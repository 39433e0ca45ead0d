"""Growth matrix, umbrella decompositions and the residual matrix.

The residual matrix of a digraph of spectral radius ``rho > 0`` and height
``h`` is the limit of ``(1 - rho s)^h H(s)`` as ``s`` increases to ``1/rho``,
where ``H(s) = (Id - sF)^-1`` is the growth matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotUmbrellaError, NumericError, PreconditionError, RangeError
from .graph import WeightedDigraph
from .spectral import perron_pair
from .structure import (
    _require_positive,
    chain_height,
    common_period,
    decompose,
    height,
    is_augmented_umbrella,
    theta_support_predicate,
)

__all__ = [
    "GrowthEval",
    "ResidualResult",
    "SpectralDecomposition",
    "block_extension",
    "eigenvector_bases",
    "growth_eval",
    "periodic_decomposition",
    "residual_matrix",
    "residual_strongly_connected",
    "residual_umbrella",
    "theta_support_predicate",
    "umbrella_decomposition",
]

SUPPORT_TOL = 1e-8
IDENTITY_TOL = 1e-9
# condition number above which (rho Id - A) is treated as singular
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class GrowthEval:
    vertices: tuple
    s: float
    H: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        """``G_x(s)``, the total weight of all paths from each vertex."""
        return self.H.sum(axis=1)

    def G(self, x) -> float:
        return float(self.row_sums[self.vertices.index(x)])


@dataclass(frozen=True)
class SpectralDecomposition:
    """``F^d = rho^d (projector + remainder)`` with ``projector = sum r_i l_i``.

    ``left_basis[i]`` and ``right_basis[i]`` live on ``classes[i]`` (a basic
    class of the ``d``-th power digraph) and satisfy ``l_i . r_j = delta_ij``.
    """

    vertices: tuple
    rho: float
    d: int
    projector: np.ndarray
    remainder: np.ndarray
    left_basis: tuple
    right_basis: tuple
    classes: tuple


@dataclass(frozen=True)
class ResidualResult:
    vertices: tuple
    height: int
    theta: np.ndarray
    method: str = field(default="recursive", compare=False)

    @property
    def support(self) -> np.ndarray:
        peak = float(self.theta.max())
        return self.theta > SUPPORT_TOL * peak

    def entry(self, x, y) -> float:
        return float(self.theta[self.vertices.index(x), self.vertices.index(y)])


def _solve(M, B):
    try:
        return np.linalg.solve(M, B)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular system: {exc}") from None


def _resolvent(F, rho):
    """``(Id - F/rho)^-1``, the growth matrix evaluated at ``1/rho``."""
    n = F.shape[0]
    return _solve(np.eye(n) - F / rho, np.eye(n))


def growth_eval(g: WeightedDigraph, s: float) -> GrowthEval:
    rho = decompose(g).rho_total
    if s < 0 or (rho > 0 and s * rho >= 1):
        raise RangeError(f"s={s} is outside [0, 1/rho) with rho={rho:.9g}")
    n = g.n
    H = _solve(np.eye(n) - s * g.weights, np.eye(n))
    return GrowthEval(g.vertices, float(s), H)


def block_extension(h_s, h_t, x, s) -> np.ndarray:
    """Upper-right block ``s H_S X H_T`` of the growth matrix on ``S + T``
    (``T`` final).

    Also used on limit factors: with ``s = 1/rho`` and ``h_s``, ``h_t``
    replaced by the limits of ``(1 - rho s)^a H_S`` and ``(1 - rho s)^b H_T``,
    it returns the limit of ``(1 - rho s)^(a+b) Y(s)``.
    """
    h_s, h_t, x = (np.asarray(m, dtype=float) for m in (h_s, h_t, x))
    if h_s.shape[1] != x.shape[0] or x.shape[1] != h_t.shape[0]:
        raise ValueError(f"dimension mismatch: {h_s.shape} . {x.shape} . {h_t.shape}")
    return s * (h_s @ x @ h_t)


def eigenvector_bases(g: WeightedDigraph):
    """Nonnegative left/right ``rho``-eigenvector bases, one pair per basic class.

    For a basic class ``C`` with Perron pair ``(l, r)`` and ``N`` the
    non-basic vertices with block ``A``, the right vector is ``r`` on ``C``
    and ``(rho Id - A)^-1 F[N, C] r`` on ``N``; the left vector is ``l`` on
    ``C`` and ``l F[C, N] (rho Id - A)^-1`` on ``N``. Requires height 1.
    """
    dec = decompose(g)
    _require_positive(dec)
    if not is_augmented_umbrella(dec):
        raise NotUmbrellaError("basic classes access each other (height > 1)")
    rho = dec.rho_total
    F = g.weights
    n = g.n
    N = [i for i, v in enumerate(g.vertices) if not dec.basic[dec.class_of[v]]]
    K = rho * np.eye(len(N)) - F[np.ix_(N, N)]
    if N and np.linalg.cond(K) > MAX_CONDITION:
        raise NumericError("rho Id - A is numerically singular")
    lefts, rights, classes = [], [], []
    for ci in dec.basic_classes:
        cls = dec.classes[ci]
        C = [g.index(v) for v in cls]
        pair = perron_pair(g, cls)
        r = np.zeros(n)
        l = np.zeros(n)
        r[C] = pair.right
        l[C] = pair.left
        if N:
            r[N] = np.maximum(_solve(K, F[np.ix_(N, C)] @ pair.right), 0.0)
            l[N] = np.maximum(_solve(K.T, pair.left @ F[np.ix_(C, N)]), 0.0)
        lefts.append(l)
        rights.append(r)
        classes.append(cls)
    return tuple(lefts), tuple(rights), tuple(classes)


def umbrella_decomposition(g: WeightedDigraph) -> SpectralDecomposition:
    """``F = rho (Pi + R)`` for a height-1 digraph with aperiodic basic classes."""
    dec = decompose(g)
    _require_positive(dec)
    if not is_augmented_umbrella(dec):
        raise NotUmbrellaError("not an (augmented) umbrella digraph")
    periodic = [dec.classes[i] for i in dec.basic_classes if dec.period[i] != 1]
    if periodic:
        raise PreconditionError(f"basic classes {periodic} are periodic")
    rho = dec.rho_total
    lefts, rights, classes = eigenvector_bases(g)
    Pi = sum(np.outer(r, l) for l, r in zip(lefts, rights))
    R = g.weights / rho - Pi
    scale = max(1.0, float(np.abs(Pi).max()))
    for name, err in (("Pi^2 - Pi", Pi @ Pi - Pi), ("Pi R", Pi @ R), ("R Pi", R @ Pi)):
        if np.abs(err).max() > IDENTITY_TOL * scale:
            raise NumericError(f"decomposition identity {name} = 0 violated by {np.abs(err).max():.3e}")
    return SpectralDecomposition(g.vertices, rho, 1, Pi, R, lefts, rights, classes)


def periodic_decomposition(g: WeightedDigraph, d: int | None = None) -> SpectralDecomposition:
    """``F^d = rho^d (Pi_d + R_d)``, through the ``d``-th power digraph.

    ``d`` defaults to the least common multiple of the basic-class periods.
    """
    dec = decompose(g)
    _require_positive(dec)
    if not is_augmented_umbrella(dec):
        raise NotUmbrellaError("not an (augmented) umbrella digraph")
    periods = [dec.period[i] for i in dec.basic_classes]
    if d is None:
        d = common_period(dec, dec.basic_classes)
    if d < 1 or any(d % p for p in periods):
        raise PreconditionError(f"d={d} is not a common multiple of the periods {periods}")
    if d == 1:
        return umbrella_decomposition(g)
    rho = dec.rho_total
    Fd = np.linalg.matrix_power(g.weights, d)
    sd = umbrella_decomposition(g.with_weights(Fd))
    Rd = Fd / rho**d - sd.projector
    return SpectralDecomposition(g.vertices, rho, d, sd.projector, Rd,
                                 sd.left_basis, sd.right_basis, sd.classes)


def residual_umbrella(g: WeightedDigraph) -> ResidualResult:
    """Residual matrix of a height-1 digraph: ``(1/d) sum_i rho^-i F^i Pi_d``."""
    sd = periodic_decomposition(g)
    F = g.weights
    acc = np.zeros_like(F)
    term = np.eye(g.n)
    for _ in range(sd.d):
        acc += term
        term = term @ F / sd.rho
    theta = acc @ sd.projector / sd.d
    return ResidualResult(g.vertices, 1, theta, method="umbrella")


def residual_strongly_connected(g: WeightedDigraph) -> ResidualResult:
    """Residual matrix ``r l`` of a strongly connected digraph."""
    dec = decompose(g)
    _require_positive(dec)
    if len(dec.classes) != 1:
        raise PreconditionError("digraph is not strongly connected")
    pair = perron_pair(g, g.vertices)
    return ResidualResult(g.vertices, 1, np.outer(pair.right, pair.left), method="strongly-connected")


def residual_matrix(g: WeightedDigraph) -> ResidualResult:
    """Height and residual matrix of any digraph with positive spectral radius.

    Classes are added one at a time to a final set ``V``, from the bottom of
    the class order upwards. While ``V`` has height at most 1 its limit is
    computed directly; afterwards the new upper-right block follows from the
    block formula for the growth matrix, by cases on whether the new class
    is basic and whether the height grows.
    """
    _require_positive(decompose(g))
    return _residual(g, {})


def _residual(g: WeightedDigraph, memo: dict) -> ResidualResult:
    key = frozenset(g.vertices)
    if key in memo:
        cached = memo[key]
        idx = [cached.vertices.index(v) for v in g.vertices]
        return ResidualResult(g.vertices, cached.height, cached.theta[np.ix_(idx, idx)])

    dec = decompose(g)
    rho = dec.rho_total
    F = g.weights
    p = len(dec.classes)
    cur: list[int] = []  # indices into g of the current final set, block order
    h = 0
    M = np.zeros((0, 0))
    for ci in reversed(range(p)):
        D = [g.index(v) for v in dec.classes[ci]]
        new = D + cur
        h_new = chain_height(dec, range(ci, p))
        if h_new == 0:
            # no basic class yet: the growth matrix is finite at 1/rho
            M_new = _resolvent(F[np.ix_(new, new)], rho)
        elif h_new == 1:
            sub = g.sub([g.vertices[i] for i in new])
            M_new = residual_umbrella(sub).theta
        else:
            X = F[np.ix_(D, cur)]
            lower = M
            if not dec.basic[ci]:
                HD = _resolvent(F[np.ix_(D, D)], rho)
                Y = block_extension(HD, M, X, 1 / rho)
            else:
                PiD = residual_strongly_connected(g.sub(dec.classes[ci])).theta
                if h_new == h + 1:
                    Y = block_extension(PiD, M, X, 1 / rho)
                    lower = np.zeros_like(M)
                else:
                    Y = np.zeros((len(D), len(cur)))
                    # Only rows of vertices accessible from ci enter X.H; they
                    # form a final set of height at most h_new - 1 since ci is
                    # basic, and the block is zero unless that bound is met.
                    tilde = sorted(dec.reach[ci] - {ci})
                    if chain_height(dec, tilde) == h_new - 1:
                        tv = [g.vertices[i] for i in cur if dec.class_of[g.vertices[i]] in tilde]
                        theta_t = _residual(g.sub(tv), memo).theta
                        cols = [cur.index(g.index(v)) for v in tv]
                        A = F[np.ix_(D, [g.index(v) for v in tv])]
                        Y[:, cols] = block_extension(PiD, theta_t, A, 1 / rho)
            M_new = np.block([[np.zeros((len(D), len(D))), Y],
                              [np.zeros((len(cur), len(D))), lower]])
        cur, h, M = new, h_new, M_new

    inverse = np.argsort(cur)
    theta = M[np.ix_(inverse, inverse)]
    result = ResidualResult(g.vertices, h, theta)
    memo[key] = result
    return result


def structural_support(g: WeightedDigraph) -> np.ndarray:
    dec = decompose(g)
    return theta_support_predicate(dec, height(dec))
