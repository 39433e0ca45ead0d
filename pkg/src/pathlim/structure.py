"""Access classes, their poset, basic/final flags, height and umbrella tests."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from functools import lru_cache
from math import lcm

import networkx as nx
import numpy as np

from .errors import DegenerateError
from .graph import WeightedDigraph
from .spectral import period_class, spectral_radius_class

# relative tolerance when comparing a class radius to the radius of the digraph
RHO_TOL = 1e-9


@dataclass(frozen=True)
class ClassDecomposition:
    """Access classes in an order compatible with accessibility.

    ``classes[i]`` lists the vertices of class ``i`` (input order). If
    ``x => y`` then ``class_of[x] <= class_of[y]``, and final classes come
    last. ``reach[i]`` is the set of class indices accessible from ``i``
    (including ``i``); ``succ[i]`` only holds the direct class successors.
    The per-class fields are ``None`` until :func:`classify` fills them.
    """

    vertices: tuple
    classes: tuple
    class_of: dict
    succ: tuple
    reach: tuple
    rho: tuple | None = None
    period: tuple | None = None
    basic: tuple | None = None
    final: tuple | None = None
    rho_total: float | None = None

    @property
    def order(self) -> tuple:
        """Vertices in the block upper-triangular order."""
        return tuple(v for cls in self.classes for v in cls)

    def accesses(self, x, y) -> bool:
        return self.class_of[y] in self.reach[self.class_of[x]]

    def class_accesses(self, i: int, j: int) -> bool:
        return j in self.reach[i]

    @property
    def basic_classes(self) -> list:
        return [i for i, b in enumerate(self.basic) if b]

    @property
    def final_classes(self) -> list:
        return [i for i, f in enumerate(self.final) if f]

    @property
    def degenerate(self) -> bool:
        return self.rho_total is not None and self.rho_total == 0.0


@dataclass(frozen=True)
class HeightReport:
    height: int
    dominant_chains: tuple  # tuples of class indices, each of length ``height``


def access_classes(g: WeightedDigraph) -> ClassDecomposition:
    """Strongly connected components, topologically sorted.

    Ties are broken by first appearance of the class members in ``g``; all
    final classes are placed after the non-final ones.
    """
    G = nx.DiGraph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(zip(*np.nonzero(g.weights)))
    comps = [sorted(c) for c in nx.strongly_connected_components(G)]
    comp_of = {}
    for ci, members in enumerate(comps):
        for v in members:
            comp_of[v] = ci
    succ = [set() for _ in comps]
    pred_count = [0] * len(comps)
    for i, j in G.edges:
        a, b = comp_of[i], comp_of[j]
        if a != b and b not in succ[a]:
            succ[a].add(b)
            pred_count[b] += 1
    is_final = [not s for s in succ]

    # Kahn's algorithm, smallest first-appearance first; final classes are
    # held back until every non-final class has been placed.
    order = []
    ready = [(comps[c][0], c) for c in range(len(comps)) if pred_count[c] == 0 and not is_final[c]]
    waiting = []
    heapq.heapify(ready)
    remaining = list(pred_count)
    while ready:
        _, c = heapq.heappop(ready)
        order.append(c)
        for s in succ[c]:
            remaining[s] -= 1
            if remaining[s] == 0:
                if is_final[s]:
                    waiting.append(s)
                else:
                    heapq.heappush(ready, (comps[s][0], s))
    waiting += [c for c in range(len(comps)) if is_final[c] and pred_count[c] == 0]
    order += sorted(waiting, key=lambda c: comps[c][0])

    new_index = {c: i for i, c in enumerate(order)}
    classes = tuple(tuple(g.vertices[v] for v in comps[c]) for c in order)
    class_of = {g.vertices[v]: new_index[comp_of[v]] for v in range(g.n)}
    succ_new = tuple(frozenset(new_index[s] for s in succ[c]) for c in order)
    reach = [None] * len(order)
    for i in reversed(range(len(order))):
        acc = {i}
        for s in succ_new[i]:
            acc |= reach[s]
        reach[i] = frozenset(acc)
    return ClassDecomposition(g.vertices, classes, class_of, succ_new, tuple(reach))


def classify(g: WeightedDigraph, dec: ClassDecomposition, spectral_radii, periods=None) -> ClassDecomposition:
    """Fill the basic/final flags from per-class spectral radii."""
    rho = tuple(float(r) for r in spectral_radii)
    total = max(rho) if rho else 0.0
    if total > 0:
        basic = tuple(abs(r - total) <= RHO_TOL * total for r in rho)
    else:
        basic = tuple(False for _ in rho)
    final = tuple(not s for s in dec.succ)
    if periods is None:
        periods = tuple(period_class(g, cls).period for cls in dec.classes)
    return replace(dec, rho=rho, period=tuple(periods), basic=basic, final=final, rho_total=total)


@lru_cache(maxsize=256)
def decompose(g: WeightedDigraph) -> ClassDecomposition:
    """Access classes with spectral radii, periods and flags."""
    dec = access_classes(g)
    radii = [spectral_radius_class(g, cls) for cls in dec.classes]
    return classify(g, dec, radii)


def spectral_radius(g: WeightedDigraph) -> float:
    return decompose(g).rho_total


def _require_positive(dec: ClassDecomposition):
    if not dec.rho_total:
        raise DegenerateError("digraph has spectral radius 0")


def _longest_from(dec: ClassDecomposition, classes=None) -> dict:
    """Length of the longest chain of basic classes starting at each basic class,
    restricted to the class indices in ``classes`` (all by default)."""
    allowed = set(range(len(dec.classes))) if classes is None else set(classes)
    longest = {}
    for i in sorted(allowed, reverse=True):
        if not dec.basic[i]:
            continue
        below = [longest[j] for j in dec.reach[i] if j != i and j in longest]
        longest[i] = 1 + max(below, default=0)
    return longest


def chain_height(dec: ClassDecomposition, classes=None) -> int:
    """Longest chain of (globally) basic classes inside a set of classes; 0 if none."""
    return max(_longest_from(dec, classes).values(), default=0)


def height(dec: ClassDecomposition) -> HeightReport:
    _require_positive(dec)
    longest = _longest_from(dec)
    h = max(longest.values())

    def extend(chain):
        last = chain[-1]
        if len(chain) == h:
            yield tuple(chain)
            return
        for j in sorted(dec.reach[last]):
            if j != last and longest.get(j) == h - len(chain):
                yield from extend(chain + [j])

    chains = []
    for i in sorted(longest):
        if longest[i] == h:
            chains.extend(extend([i]))
    return HeightReport(h, tuple(chains))


def is_umbrella(dec: ClassDecomposition) -> bool:
    _require_positive(dec)
    return dec.basic == dec.final


def is_augmented_umbrella(dec: ClassDecomposition) -> bool:
    _require_positive(dec)
    basic = dec.basic_classes
    return not any(j != i and j in dec.reach[i] for i in basic for j in basic)


def reachable_set(g: WeightedDigraph, x) -> tuple:
    """Vertices accessible from ``x``, in the vertex order of ``g``."""
    g.index(x)
    dec = decompose(g)
    acc = dec.reach[dec.class_of[x]]
    return tuple(v for v in g.vertices if dec.class_of[v] in acc)


def reachable(g: WeightedDigraph, x):
    """Sub-digraph ``V(x)`` induced by the vertices accessible from ``x``, and
    its spectral radius ``gamma(x)``."""
    sub = g.sub(reachable_set(g, x))
    return sub, spectral_radius(sub)


def umbrella_spanned(g: WeightedDigraph, x) -> tuple:
    """Vertex set of ``U(x)``: vertices of ``V(x)`` accessing the head of a
    dominant chain of ``V(x)``."""
    sub, gamma = reachable(g, x)
    if gamma == 0:
        raise DegenerateError(f"no infinite paths from {x!r}")
    dec = decompose(sub)
    heads = {chain[0] for chain in height(dec).dominant_chains}
    return tuple(v for v in sub.vertices if any(h in dec.reach[dec.class_of[v]] for h in heads))


def theta_support_predicate(dec: ClassDecomposition, report: HeightReport | None = None) -> np.ndarray:
    """Pairs ``(x, y)`` such that ``x => L_1`` and ``L_h => y`` for a dominant
    chain ``(L_1, ..., L_h)``. Indexed by ``dec.vertices``."""
    if report is None:
        report = height(dec)
    ends = {(c[0], c[-1]) for c in report.dominant_chains}
    cls = [dec.class_of[v] for v in dec.vertices]
    n = len(cls)
    support = np.zeros((n, n), dtype=bool)
    for a in range(n):
        for b in range(n):
            support[a, b] = any(head in dec.reach[cls[a]] and cls[b] in dec.reach[tail]
                                for head, tail in ends)
    return support


def common_period(dec: ClassDecomposition, classes) -> int:
    return lcm(*[max(dec.period[i], 1) for i in classes]) if classes else 1


def condensation_dot(dec: ClassDecomposition) -> str:
    """DOT text of the class DAG; node labels carry radius, period and flags."""
    lines = ["digraph condensation {", "  node [shape=box];"]
    for i, cls in enumerate(dec.classes):
        flags = []
        if dec.basic is not None:
            if dec.basic[i]:
                flags.append("basic")
            if dec.final[i]:
                flags.append("final")
        label = "{" + ",".join(map(str, cls)) + "}"
        if dec.rho is not None:
            label += f"\\nrho={dec.rho[i]:.9g} d={dec.period[i]}"
        if flags:
            label += "\\n" + " ".join(flags)
        lines.append(f'  c{i} [label="{label}"];')
    for i, succ in enumerate(dec.succ):
        for j in sorted(succ):
            lines.append(f"  c{i} -> c{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
