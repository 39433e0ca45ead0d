"""Exact random generation of paths and empirical cylinder frequencies.

All samplers draw from :class:`SplitMix64`. A uniform double ``u`` selects
the first candidate whose cumulative probability exceeds ``u``, candidates
being taken in vertex order (for the Boltzmann sampler, halting comes
first). Fixed-length samplers consume exactly one double per step, so path
``j`` of a batch uses doubles ``j*k .. j*k + k - 1`` of the stream and batch
and one-at-a-time sampling give identical results.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import NoPathError, PreconditionError
from .graph import WeightedDigraph, z_table
from .limits import CocycleKernel, limit_kernel
from .residual import growth_eval
from .structure import reachable

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
BLOCK = 4096


class SplitMix64:
    """SplitMix64: the state advances by ``GAMMA`` and each output is the
    mixed state

        z = (z ^ (z >> 30)) * MIX1
        z = (z ^ (z >> 27)) * MIX2
        z = z ^ (z >> 31)

    (all arithmetic mod 2^64). Doubles are ``(z >> 11) * 2^-53`` in [0, 1).
    Outputs are produced in blocks with numpy but the stream is the same as
    the scalar recurrence.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64
        self._buf = np.empty(0, dtype=np.uint64)
        self._doubles = None
        self._pos = 0

    def _refill(self, size: int):
        steps = np.arange(1, size + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + size * GAMMA) & MASK64
        self._buf = z
        self._doubles = None
        self._pos = 0

    def next_u64_array(self, count: int) -> np.ndarray:
        parts = []
        while count > 0:
            if self._pos >= self._buf.size:
                self._refill(max(BLOCK, count))
            take = min(count, self._buf.size - self._pos)
            parts.append(self._buf[self._pos:self._pos + take])
            self._pos += take
            count -= take
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.uint64)

    def next_u64(self) -> int:
        return int(self.next_u64_array(1)[0])

    def random_array(self, count: int) -> np.ndarray:
        return (self.next_u64_array(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def random(self) -> float:
        if self._pos >= self._buf.size:
            self._refill(BLOCK)
        if self._doubles is None:
            self._doubles = ((self._buf >> np.uint64(11)).astype(np.float64) * 2.0**-53).tolist()
        u = self._doubles[self._pos]
        self._pos += 1
        return u


def splitmix64_reference(seed: int, count: int) -> list:
    """Scalar SplitMix64 outputs, for cross-checking the block generator."""
    state = seed & MASK64
    out = []
    for _ in range(count):
        state = (state + GAMMA) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        out.append(z ^ (z >> 31))
    return out


def _select(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise index of the first cumulative entry exceeding ``u``; when
    rounding leaves ``u`` above the last entry, the last positive-probability
    candidate."""
    hit = cum > u[:, None]
    choice = hit.argmax(axis=1)
    missed = ~hit.any(axis=1)
    if missed.any():
        probs = np.diff(cum[missed], axis=1, prepend=0.0)
        choice[missed] = probs.shape[1] - 1 - np.argmax(probs[:, ::-1] > 0, axis=1)
    return choice


class UniformSampler:
    """Paths of length ``k`` from ``x`` under ``mu_{x,k}``.

    A path at ``v`` with ``m`` steps left moves to ``y`` with probability
    ``w(v, y) Z_y(m - 1) / Z_v(m)``.
    """

    def __init__(self, g: WeightedDigraph, x, k: int):
        if k < 0:
            raise PreconditionError("k must be nonnegative")
        self.g, self.x, self.k = g, x, k
        self.start = g.index(x)
        Z = z_table(g, k).per_vertex
        if Z[k, self.start] == 0:
            raise NoPathError(f"no path of length {k} from {x!r}")
        # cumulative step tables, one per number of remaining steps
        self.cum = []
        for m in range(1, k + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                P = g.weights * Z[m - 1][None, :] / Z[m][:, None]
            self.cum.append(np.cumsum(np.nan_to_num(P), axis=1))

    def sample_indices(self, rng: SplitMix64, count: int) -> np.ndarray:
        """``count`` paths as rows of vertex indices, shape ``(count, k + 1)``."""
        u = rng.random_array(count * self.k).reshape(count, self.k)
        idx = np.empty((count, self.k + 1), dtype=np.intp)
        idx[:, 0] = self.start
        for step in range(self.k):
            cum = self.cum[self.k - step - 1]
            idx[:, step + 1] = _select(cum[idx[:, step]], u[:, step])
        return idx

    def sample_many(self, rng: SplitMix64, count: int) -> list:
        V = self.g.vertices
        return [tuple(V[i] for i in row) for row in self.sample_indices(rng, count)]

    def sample(self, rng: SplitMix64) -> tuple:
        return self.sample_many(rng, 1)[0]


class LimitWalkSampler:
    """Prefixes of length ``n`` of the Markov chain with kernel ``q`` from ``x``."""

    def __init__(self, kernel: CocycleKernel, x, n: int):
        if n < 0:
            raise PreconditionError("n must be nonnegative")
        self.kernel, self.x, self.n = kernel, x, n
        self.start = kernel.index(x)
        self.cum = np.cumsum(kernel.q, axis=1)

    def sample_indices(self, rng: SplitMix64, count: int) -> np.ndarray:
        """``count`` prefixes as rows of support indices, shape ``(count, n + 1)``."""
        u = rng.random_array(count * self.n).reshape(count, self.n)
        idx = np.empty((count, self.n + 1), dtype=np.intp)
        idx[:, 0] = self.start
        for step in range(self.n):
            idx[:, step + 1] = _select(self.cum[idx[:, step]], u[:, step])
        return idx

    def sample_many(self, rng: SplitMix64, count: int) -> list:
        V = self.kernel.support
        return [tuple(V[i] for i in row) for row in self.sample_indices(rng, count)]

    def sample(self, rng: SplitMix64) -> tuple:
        return self.sample_many(rng, 1)[0]


class BoltzmannSampler:
    """Finite paths from ``x`` under ``theta_{x,s}``.

    At ``v`` the path halts with probability ``1 / G_v(s)`` and otherwise
    moves to ``y`` with probability ``s w(v, y) G_y(s) / G_v(s)``; these sum
    to 1 because ``G_v = 1 + s sum_y w(v, y) G_y``.
    """

    def __init__(self, g: WeightedDigraph, x, s: float):
        sub, _ = reachable(g, x)
        growth = growth_eval(sub, s)
        self.g, self.x, self.s = sub, x, s
        G = growth.row_sums
        self.start = sub.index(x)
        # column 0 is halting, column 1 + j is a move to vertex j
        P = np.hstack([(1 / G)[:, None], s * sub.weights * G[None, :] / G[:, None]])
        self.cum = np.cumsum(P, axis=1)
        self._rows = [row.tolist() for row in self.cum]
        # fallback when rounding leaves u above the last cumulative entry
        self._last = [int(np.flatnonzero(row > 0)[-1]) for row in P]

    def sample(self, rng: SplitMix64) -> tuple:
        V = self.g.vertices
        v = self.start
        path = [V[v]]
        while True:
            row = self._rows[v]
            c = bisect_right(row, rng.random())
            if c == len(row):
                c = self._last[v]
            if c == 0:
                return tuple(path)
            v = c - 1
            path.append(V[v])

    def sample_many(self, rng: SplitMix64, count: int) -> list:
        return [self.sample(rng) for _ in range(count)]


def sample_uniform(g: WeightedDigraph, x, k: int, rng: SplitMix64) -> tuple:
    return UniformSampler(g, x, k).sample(rng)


def sample_boltzmann(g: WeightedDigraph, x, s: float, rng: SplitMix64) -> tuple:
    return BoltzmannSampler(g, x, s).sample(rng)


def sample_limit_walk(g: WeightedDigraph, kernel: CocycleKernel, x, n: int, rng: SplitMix64) -> tuple:
    """Prefix of length ``n`` under the cocycle measure of ``kernel``.

    ``g`` is only used to check that the kernel support belongs to it.
    """
    for v in kernel.support:
        g.index(v)
    return LimitWalkSampler(kernel, x, n).sample(rng)


@dataclass(frozen=True)
class SamplerConfig:
    """``mode`` is ``"uniform"`` (parameter k), ``"boltzmann"`` (parameter s)
    or ``"walk"`` (parameter n, the limit-kernel walk)."""

    seed: int
    mode: str
    param: float
    count: int

    @classmethod
    def parse(cls, mode: str, seed: int, count: int) -> "SamplerConfig":
        """Build from a ``name:value`` mode string such as ``uniform:8``."""
        name, sep, value = mode.partition(":")
        if not sep or name not in ("uniform", "boltzmann", "walk"):
            raise ValueError(f"mode must be uniform:K, boltzmann:S or walk:N, got {mode!r}")
        try:
            param = float(value) if name == "boltzmann" else int(value)
        except ValueError:
            raise ValueError(f"bad parameter in mode {mode!r}") from None
        if count < 0:
            raise ValueError("count must be nonnegative")
        return cls(int(seed), name, param, int(count))

    def sampler(self, g: WeightedDigraph, x):
        if self.mode == "uniform":
            return UniformSampler(g, x, int(self.param))
        if self.mode == "boltzmann":
            return BoltzmannSampler(g, x, float(self.param))
        if self.mode == "walk":
            return LimitWalkSampler(limit_kernel(g, x), x, int(self.param))
        raise ValueError(f"unknown mode {self.mode!r}")

    def run(self, g: WeightedDigraph, x) -> list:
        return self.sampler(g, x).sample_many(SplitMix64(self.seed), self.count)


def empirical_cylinder(samples, u) -> float:
    """Fraction of the samples having ``u`` as a prefix (0 for no samples).

    For fixed-length samples this is the cylinder of paths with prefix ``u``;
    for Boltzmann samples it is the set of paths extending ``u``.
    """
    u = tuple(u)
    samples = list(samples)
    if not samples:
        return 0.0
    m = len(u)
    return sum(1 for p in samples if tuple(p[:m]) == u) / len(samples)


def dump_paths(paths) -> str:
    return "".join(" ".join(map(str, p)) + "\n" for p in paths)
