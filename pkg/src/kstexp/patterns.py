"""Complete bipartite patterns, their r-expansions, and r-density."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ParameterError
from .hypergraph import Hypergraph

__all__ = [
    "GraphPattern",
    "ExpansionPattern",
    "complete_bipartite",
    "expand",
    "r_density",
    "kst_r_density",
    "MAX_DENSITY_EDGES",
]

# exhaustive density search is 2^|F|; beyond this it is refused outright
MAX_DENSITY_EDGES = 20


@dataclass(frozen=True)
class GraphPattern:
    vertex_count: int
    edges: tuple
    left: Optional[tuple] = None
    right: Optional[tuple] = None

    def __post_init__(self):
        edges = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        for e in edges:
            if len(e) != 2 or e[0] == e[1] or e[1] >= self.vertex_count or e[0] < 0:
                raise ParameterError(f"bad pattern edge {e}")
        if (self.left is None) != (self.right is None):
            raise ParameterError("side labels must be given for both sides or neither")
        if self.left is not None:
            L, R = set(self.left), set(self.right)
            if L & R:
                raise ParameterError("sides overlap")
            want = {tuple(sorted((a, b))) for a in L for b in R}
            if set(edges) != want:
                raise ParameterError("side-labelled pattern must be complete bipartite")

    @property
    def size(self) -> int:
        return len(self.edges)

    def degrees(self) -> list:
        deg = [0] * self.vertex_count
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def to_hypergraph(self) -> Hypergraph:
        return Hypergraph(2, self.vertex_count, self.edges)

    def to_hg1(self) -> str:
        return self.to_hypergraph().to_hg1()


@dataclass(frozen=True)
class ExpansionPattern:
    """The r-graph obtained by adding r-2 private vertices to each base edge.

    Core vertices keep their base labels ``0..v-1``; the private vertices of
    base edge number ``i`` (in the base's sorted edge order) are
    ``v + (r-2)*i + j`` for ``j < r-2``.
    """

    base: GraphPattern
    r: int
    edges: tuple = field(init=False)
    expansion_vertices: tuple = field(init=False)

    def __post_init__(self):
        if self.r < 3:
            raise ParameterError(f"expansion needs r >= 3, got {self.r}")
        v = self.base.vertex_count
        groups = []
        edges = []
        for i, e in enumerate(self.base.edges):
            extra = tuple(range(v + (self.r - 2) * i, v + (self.r - 2) * (i + 1)))
            groups.append(extra)
            edges.append(tuple(sorted(e + extra)))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "expansion_vertices", tuple(groups))

    @property
    def core_vertices(self) -> tuple:
        return tuple(range(self.base.vertex_count))

    @property
    def vertex_count(self) -> int:
        return self.base.vertex_count + (self.r - 2) * self.base.size

    @property
    def size(self) -> int:
        return len(self.edges)

    def to_hypergraph(self) -> Hypergraph:
        return Hypergraph(self.r, self.vertex_count, self.edges)

    def to_hg1(self) -> str:
        return self.to_hypergraph().to_hg1()


def complete_bipartite(s: int, t: int) -> GraphPattern:
    """K_{s,t} with left side ``0..s-1`` and right side ``s..s+t-1``."""
    if s < 1 or t < 1:
        raise ParameterError(f"K_(s,t) needs s, t >= 1, got ({s}, {t})")
    left = tuple(range(s))
    right = tuple(range(s, s + t))
    edges = tuple((a, b) for a in left for b in right)
    return GraphPattern(s + t, edges, left, right)


def expand(F: GraphPattern, r: int) -> ExpansionPattern:
    return ExpansionPattern(F, r)


def r_density(P) -> Fraction:
    """max over sub-patterns F' with |F'| >= 2 of (|F'|-1)/(v(F')-r).

    ``P`` may be an ExpansionPattern or a Hypergraph. All edge subsets are
    enumerated; the spanned-vertex mask of each subset is built from the
    subset with its lowest edge removed, so each subset costs O(1).
    """
    edges, r = P.edges, P.r
    m = len(edges)
    if m < 2:
        raise ParameterError("r-density needs at least two edges")
    if m > MAX_DENSITY_EDGES:
        raise ParameterError(f"exhaustive r-density capped at {MAX_DENSITY_EDGES} edges, got {m}")
    edge_mask = []
    for e in edges:
        x = 0
        for v in e:
            x |= 1 << v
        edge_mask.append(x)
    span = [0] * (1 << m)
    best = None
    for sub in range(1, 1 << m):
        low = sub & -sub
        i = low.bit_length() - 1
        span[sub] = span[sub ^ low] | edge_mask[i]
        k = sub.bit_count()
        if k < 2:
            continue
        val = Fraction(k - 1, span[sub].bit_count() - r)
        if best is None or val > best:
            best = val
    return best


def kst_r_density(s: int, t: int, r: int) -> tuple[Fraction, Fraction]:
    """Closed form d_r(K_{s,t}^{(r)}) and its reciprocal r-2+(s+t-2)/(st-1)."""
    if s < 2 or t < 2:
        raise ParameterError(f"closed form needs s, t >= 2, got ({s}, {t})")
    if r < 3:
        raise ParameterError(f"closed form needs r >= 3, got {r}")
    d = Fraction(s * t - 1, (r - 2) * s * t + s + t - r)
    return d, 1 / d
