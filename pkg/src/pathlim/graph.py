"""Weighted digraphs, finite paths and weighted path counts."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidPathError, ParseError, UnknownVertexError

# A finite path is a nonempty tuple of vertex tokens; a single vertex is the
# path of length 0.
Path = tuple


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Finite vertex set with a dense table of nonnegative weights.

    ``weights[i, j]`` is the weight of the pair ``(vertices[i], vertices[j])``;
    pairs of positive weight are the edges. Instances are immutable (the
    weight array is copied and flagged read-only) and hashable by content.
    """

    vertices: tuple
    weights: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(self.vertices)
        w = np.array(self.weights, dtype=float, copy=True)
        n = len(vertices)
        if w.shape != (n, n):
            raise ValueError(f"weight table has shape {w.shape}, expected {(n, n)}")
        if len(set(vertices)) != n:
            raise ValueError("vertex identifiers must be unique")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(vertices)})

    @classmethod
    def from_edges(cls, edges: Iterable, vertices: Sequence | None = None) -> "WeightedDigraph":
        """Build from ``(src, dst, weight)`` triples.

        Vertices not listed in ``vertices`` are appended in order of first
        appearance.
        """
        edges = list(edges)
        order = list(vertices) if vertices is not None else []
        seen = set(order)
        for x, y, _ in edges:
            for v in (x, y):
                if v not in seen:
                    seen.add(v)
                    order.append(v)
        index = {v: i for i, v in enumerate(order)}
        w = np.zeros((len(order), len(order)))
        for x, y, weight in edges:
            w[index[x], index[y]] = weight
        return cls(tuple(order), w)

    def __eq__(self, other):
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return self.vertices == other.vertices and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.vertices, self.weights.tobytes()))

    def __len__(self):
        return len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, v) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertexError(f"unknown vertex {v!r}") from None

    def __contains__(self, v):
        return v in self._index

    def weight(self, x, y) -> float:
        return float(self.weights[self.index(x), self.index(y)])

    def edges(self):
        """Edges as ``(src, dst, weight)`` in row-major vertex order."""
        rows, cols = np.nonzero(self.weights)
        return [(self.vertices[i], self.vertices[j], float(self.weights[i, j]))
                for i, j in zip(rows, cols)]

    def successors(self, x):
        i = self.index(x)
        return [self.vertices[j] for j in np.flatnonzero(self.weights[i])]

    def sub(self, vertices: Iterable) -> "WeightedDigraph":
        """Induced sub-digraph; vertices keep the order in which they are given."""
        vertices = tuple(vertices)
        idx = [self.index(v) for v in vertices]
        return WeightedDigraph(vertices, self.weights[np.ix_(idx, idx)])

    def with_weights(self, weights) -> "WeightedDigraph":
        return WeightedDigraph(self.vertices, weights)

    def check_path(self, u) -> Path:
        u = tuple(u)
        if not u:
            raise InvalidPathError("a path has at least one vertex")
        idx = [self.index(v) for v in u]
        for (i, j), (x, y) in zip(zip(idx, idx[1:]), zip(u, u[1:])):
            if self.weights[i, j] <= 0:
                raise InvalidPathError(f"({x!r}, {y!r}) is not an edge")
        return u


# ---------------------------------------------------------------------------
# edge-list text format


def parse_digraph(text: str) -> WeightedDigraph:
    """Parse an edge-list document: one ``src dst weight`` per line.

    Lines starting with ``#`` and blank lines are skipped. Vertices are
    declared by appearance, so a zero-weight line declares vertices without
    adding an edge.
    """
    triples = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(f"expected 'src dst weight', got {len(tokens)} fields", lineno)
        x, y, tok = tokens
        try:
            weight = float(tok)
        except ValueError:
            raise ParseError(f"weight {tok!r} is not a number", lineno) from None
        if not np.isfinite(weight):
            raise ParseError(f"weight {tok!r} is not finite", lineno)
        if weight < 0:
            raise ParseError(f"negative weight {tok}", lineno)
        if (x, y) in seen:
            raise ParseError(f"duplicate edge {x} {y}", lineno)
        seen.add((x, y))
        triples.append((x, y, weight))
    if not triples:
        raise ParseError("empty digraph")
    return WeightedDigraph.from_edges(triples)


def read_digraph(path) -> WeightedDigraph:
    with open(path, encoding="utf-8") as fh:
        return parse_digraph(fh.read())


def _format_weight(w: float) -> str:
    if float(w).is_integer() and abs(w) < 2**53:
        return str(int(w))
    return repr(float(w))


def serialize_digraph(g: WeightedDigraph) -> str:
    """Edge-list text that parses back to ``g`` with the same vertex order.

    Every vertex first gets its self-pair line (weight 0 when there is no
    loop), which pins the first-appearance order.
    """
    lines = []
    n = g.n
    for i, v in enumerate(g.vertices):
        lines.append(f"{v} {v} {_format_weight(g.weights[i, i])}")
    for i in range(n):
        for j in range(n):
            if i != j and g.weights[i, j] > 0:
                lines.append(f"{g.vertices[i]} {g.vertices[j]} {_format_weight(g.weights[i, j])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# path values and weighted counts


def path_weight(g: WeightedDigraph, u) -> float:
    """Product of the edge weights along ``u`` (1 for a length-0 path)."""
    u = g.check_path(u)
    value = 1.0
    for x, y in zip(u, u[1:]):
        value *= g.weights[g.index(x), g.index(y)]
    return float(value)


def exact_weights(g: WeightedDigraph) -> np.ndarray:
    """The weight table as an object array of exact fractions."""
    return np.array([[Fraction(float(w)) for w in row] for row in g.weights], dtype=object)


@dataclass(frozen=True)
class ZTable:
    """Weighted path counts ``Z_x(k)`` and optionally ``Z_{x,y}(k)``, k = 0..K.

    ``per_vertex[k, i]`` is ``Z_{v_i}(k)``; ``per_pair[k, i, j]`` is entry
    ``(i, j)`` of ``F^k``. With ``exact=True`` the arrays hold Fractions.
    """

    vertices: tuple
    per_vertex: np.ndarray
    per_pair: np.ndarray | None = None

    @property
    def K(self) -> int:
        return self.per_vertex.shape[0] - 1

    def z(self, x, k: int):
        return self.per_vertex[k, self.vertices.index(x)]

    def z_pair(self, x, y, k: int):
        if self.per_pair is None:
            raise ValueError("table was built without per-pair counts")
        return self.per_pair[k, self.vertices.index(x), self.vertices.index(y)]


def z_table(g: WeightedDigraph, K: int, per_pair: bool = False, exact: bool = False) -> ZTable:
    if K < 0:
        raise ValueError("K must be nonnegative")
    n = g.n
    F = exact_weights(g) if exact else g.weights
    dtype = object if exact else float
    one = Fraction(1) if exact else 1.0
    per_vertex = np.empty((K + 1, n), dtype=dtype)
    per_vertex[0] = [one] * n
    for k in range(1, K + 1):
        per_vertex[k] = F.dot(per_vertex[k - 1])
    pairs = None
    if per_pair:
        pairs = np.empty((K + 1, n, n), dtype=dtype)
        eye = np.zeros((n, n), dtype=dtype)
        eye[...] = Fraction(0) if exact else 0.0
        for i in range(n):
            eye[i, i] = one
        pairs[0] = eye
        for k in range(1, K + 1):
            pairs[k] = pairs[k - 1].dot(F)
    return ZTable(g.vertices, per_vertex, pairs)


def matrix_power_apply(g: WeightedDigraph, k: int, v) -> np.ndarray:
    """``F^k v`` by ``k`` successive matrix-vector products."""
    v = np.asarray(v, dtype=float)
    if v.shape != (g.n,):
        raise ValueError(f"vector has shape {v.shape}, expected ({g.n},)")
    if k < 0:
        raise ValueError("k must be nonnegative")
    for _ in range(k):
        v = g.weights @ v
    return v


def format_number(x) -> str:
    return f"{float(x):.9g}"


def matrix_csv(matrix, rows: Sequence, cols: Sequence) -> str:
    """CSV text with a header row of column labels and a label column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([""] + [str(c) for c in cols])
    for label, row in zip(rows, np.asarray(matrix)):
        writer.writerow([str(label)] + [format_number(x) for x in row])
    return buf.getvalue()
