"""Uniform hypergraphs, shadows, degrees and tripartite structure.

Edges are stored as ascending vertex tuples and the edge list is kept in
lexicographic order, so two hypergraphs with the same edge set compare equal
and serialize to the same bytes.
"""

from __future__ import annotations

import hashlib
import random
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import FormatError, ParameterError, StructuralError

__all__ = [
    "Hypergraph",
    "Tripartition",
    "PairSupport",
    "shadow",
    "degree",
    "restrict_tripartite",
    "pair_support",
    "read_hg1",
    "write_hg1",
]


class Hypergraph:
    """An r-uniform hypergraph on the vertex set ``range(n)``.

    Instances are treated as immutable. Incidence indices are built on first
    use and cached.
    """

    __slots__ = ("r", "n", "edges", "_edge_id", "_vertex_edges", "_pair_edges", "_digest")

    def __init__(self, r: int, n: int, edges: Iterable[Iterable[int]] = ()):
        if r < 1:
            raise ParameterError(f"uniformity must be positive, got {r}")
        if n < 0:
            raise ParameterError(f"vertex count must be nonnegative, got {n}")
        canon = []
        for e in edges:
            t = tuple(sorted(int(v) for v in e))
            if len(t) != r or len(set(t)) != r:
                raise StructuralError(f"edge {t} does not have {r} distinct vertices")
            if t[0] < 0 or t[-1] >= n:
                raise StructuralError(f"edge {t} has a vertex outside [0, {n})")
            canon.append(t)
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise StructuralError(f"duplicate edge {a}")
        self.r = r
        self.n = n
        self.edges: tuple[tuple[int, ...], ...] = tuple(canon)
        self._edge_id = None
        self._vertex_edges = None
        self._pair_edges = None
        self._digest = None

    # -- basic protocol -------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.edges)

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return self.r == other.r and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.r, self.n, self.edges))

    def __repr__(self):
        return f"Hypergraph(r={self.r}, n={self.n}, m={self.m})"

    # -- indices ----------------------------------------------------------
    @property
    def edge_id(self) -> dict:
        if self._edge_id is None:
            self._edge_id = {e: i for i, e in enumerate(self.edges)}
        return self._edge_id

    @property
    def vertex_edges(self) -> list:
        if self._vertex_edges is None:
            inc = [[] for _ in range(self.n)]
            for i, e in enumerate(self.edges):
                for v in e:
                    inc[v].append(i)
            self._vertex_edges = [tuple(x) for x in inc]
        return self._vertex_edges

    @property
    def pair_edges(self) -> dict:
        """Map each 2-set inside some edge to the ids of edges containing it."""
        if self._pair_edges is None:
            idx = defaultdict(list)
            for i, e in enumerate(self.edges):
                for p in combinations(e, 2):
                    idx[p].append(i)
            self._pair_edges = {p: tuple(v) for p, v in idx.items()}
        return self._pair_edges

    def has_edge(self, e) -> bool:
        return tuple(sorted(e)) in self.edge_id

    def neighbors(self, v: int) -> set:
        out = set()
        for i in self.vertex_edges[v]:
            out.update(self.edges[i])
        out.discard(v)
        return out

    def degree(self, S: Iterable[int]) -> int:
        return degree(self, S)

    def subgraph(self, edge_ids: Iterable[int]) -> "Hypergraph":
        """Sub-hypergraph on the same vertex set keeping the given edge ids."""
        return Hypergraph(self.r, self.n, (self.edges[i] for i in sorted(set(edge_ids))))

    # -- serialization ----------------------------------------------------
    def to_hg1(self) -> str:
        return write_hg1(self)

    @classmethod
    def from_hg1(cls, text: str) -> "Hypergraph":
        return read_hg1(text)

    def digest(self) -> str:
        if self._digest is None:
            self._digest = hashlib.sha256(self.to_hg1().encode()).hexdigest()
        return self._digest


def degree(H: Hypergraph, S: Iterable[int]) -> int:
    """Number of edges of ``H`` containing every vertex of ``S``."""
    S = sorted(set(S))
    if not S:
        return H.m
    if len(S) > H.r or S[0] < 0 or S[-1] >= H.n:
        return 0
    if len(S) == 1:
        return len(H.vertex_edges[S[0]])
    ids = H.pair_edges.get((S[0], S[1]), ())
    if len(S) == 2:
        return len(ids)
    rest = S[2:]
    return sum(1 for i in ids if all(v in H.edges[i] for v in rest))


def shadow(H: Hypergraph, k: int) -> Hypergraph:
    """The k-uniform hypergraph of all k-sets lying inside an edge of ``H``."""
    if not 1 <= k <= H.r:
        raise ParameterError(f"shadow order k={k} outside [1, {H.r}]")
    if k == H.r:
        return H
    sets = set()
    for e in H.edges:
        sets.update(combinations(e, k))
    return Hypergraph(k, H.n, sets)


# ---------------------------------------------------------------------------
# HG1 text format
# ---------------------------------------------------------------------------

def write_hg1(H: Hypergraph) -> str:
    lines = [f"{H.r} {H.n} {H.m}"]
    lines.extend(" ".join(map(str, e)) for e in H.edges)
    return "\n".join(lines) + "\n"


def _parse_ints(line: str, lineno: int) -> list:
    out = []
    col = 1
    for tok in line.split(" "):
        if not tok:
            raise FormatError("empty field (fields are separated by single spaces)", lineno, col)
        if not (tok.isdigit()):
            raise FormatError(f"expected a nonnegative integer, got {tok!r}", lineno, col)
        out.append(int(tok))
        col += len(tok) + 1
    return out


def read_hg1(text: str) -> Hypergraph:
    """Parse HG1 text. Lines starting with ``#`` are comments."""
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if line.startswith("#"):
            continue
        if not line.strip():
            if header is None or len(edges) < header[2]:
                raise FormatError("blank line", lineno, 1)
            continue
        vals = _parse_ints(line, lineno)
        if header is None:
            if len(vals) != 3:
                raise FormatError("header must be 'r n m'", lineno, 1)
            header = vals
            continue
        r, n, m = header
        if len(edges) >= m:
            raise FormatError(f"more than the declared {m} edges", lineno, 1)
        if len(vals) != r:
            raise FormatError(f"edge has {len(vals)} vertices, expected {r}", lineno, 1)
        col = 1
        for a, b in zip(vals, vals[1:]):
            col += len(str(a)) + 1
            if b <= a:
                raise FormatError("edge vertices must be strictly ascending", lineno, col)
        if vals[-1] >= n:
            raise FormatError(f"vertex {vals[-1]} not below n={n}", lineno, len(line) - len(str(vals[-1])) + 1)
        edges.append((lineno, tuple(vals)))
    if header is None:
        raise FormatError("missing header line", 1, 1)
    r, n, m = header
    if len(edges) != m:
        raise FormatError(f"declared {m} edges but found {len(edges)}", None)
    seen = {}
    for lineno, e in edges:
        if e in seen:
            raise FormatError(f"duplicate edge {e} (first on line {seen[e]})", lineno, 1)
        seen[e] = lineno
    try:
        return Hypergraph(r, n, (e for _, e in edges))
    except (StructuralError, ParameterError) as exc:
        raise FormatError(str(exc), 1, 1) from exc


# ---------------------------------------------------------------------------
# Tripartite structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tripartition:
    """Three pairwise-disjoint vertex classes, indexed 1, 2, 3."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(frozenset(p) for p in self.parts)
        if len(parts) != 3:
            raise ParameterError("a tripartition needs exactly three parts")
        for a, b in combinations(parts, 2):
            if a & b:
                raise ParameterError("tripartition parts are not disjoint")
        object.__setattr__(self, "parts", parts)
        lookup = {}
        for i, p in enumerate(parts, start=1):
            for v in p:
                lookup[v] = i
        object.__setattr__(self, "_lookup", lookup)

    def __getitem__(self, i: int) -> frozenset:
        if i not in (1, 2, 3):
            raise ParameterError(f"part index must be 1, 2 or 3, got {i}")
        return self.parts[i - 1]

    def part_of(self, v: int) -> int:
        """Part index of ``v`` (1..3), or 0 if ``v`` is in no part."""
        return self._lookup.get(v, 0)

    def sizes(self) -> tuple:
        return tuple(len(p) for p in self.parts)

    def is_rainbow(self, e: Sequence[int]) -> bool:
        return sorted(self.part_of(v) for v in e) == [1, 2, 3]

    def check_universe(self, n: int):
        for p in self.parts:
            for v in p:
                if not 0 <= v < n:
                    raise ParameterError(f"tripartition vertex {v} outside [0, {n})")

    def sorted_by_size(self) -> tuple["Tripartition", tuple]:
        """Reorder parts so sizes are nonincreasing (stable on ties).

        Returns the new partition and ``order`` where new part ``i`` is old
        part ``order[i-1]``.
        """
        order = tuple(sorted((1, 2, 3), key=lambda i: (-len(self[i]), i)))
        return Tripartition(tuple(self[i] for i in order)), order


@dataclass(frozen=True)
class PairSupport:
    i: int
    j: int
    pairs: frozenset

    @property
    def m_ij(self) -> int:
        return len(self.pairs)


def pair_support(H: Hypergraph, P: Tripartition, i: int, j: int) -> PairSupport:
    """Cross pairs between parts ``i`` and ``j`` lying inside an edge of ``H``."""
    if H.r != 3:
        raise ParameterError("pair_support needs a 3-graph")
    if i == j or i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ParameterError(f"invalid part pair ({i}, {j})")
    i, j = min(i, j), max(i, j)
    pairs = set()
    for e in H.edges:
        if not P.is_rainbow(e):
            raise StructuralError(f"edge {e} is not rainbow for the tripartition")
        a = next(v for v in e if P.part_of(v) == i)
        b = next(v for v in e if P.part_of(v) == j)
        pairs.add((min(a, b), max(a, b)))
    return PairSupport(i, j, frozenset(pairs))


def _rainbow_count(H: Hypergraph, part: list) -> int:
    return sum(1 for e in H.edges if len({part[v] for v in e}) == 3)


def _local_search(H: Hypergraph, part: list) -> list:
    """Single-vertex moves until no move increases the rainbow count."""
    improved = True
    while improved:
        improved = False
        for v in range(H.n):
            gain = [0, 0, 0]
            for i in H.vertex_edges[v]:
                x, y = (u for u in H.edges[i] if u != v)
                px, py = part[x], part[y]
                if px != py:
                    gain[3 - px - py] += 1
            best = max(range(3), key=lambda q: (gain[q], q == part[v]))
            if gain[best] > gain[part[v]]:
                part[v] = best
                improved = True
    return part


def _conditional_expectation_partition(H: Hypergraph) -> list:
    """Derandomized uniform 3-colouring; keeps at least 2/9 of the edges."""
    part = [-1] * H.n
    for v in range(H.n):
        score = [0.0, 0.0, 0.0]
        for i in H.vertex_edges[v]:
            x, y = (u for u in H.edges[i] if u != v)
            px, py = part[x], part[y]
            for q in range(3):
                if px >= 0 and py >= 0:
                    score[q] += 1.0 if len({px, py, q}) == 3 else 0.0
                elif px >= 0 or py >= 0:
                    known = px if px >= 0 else py
                    score[q] += 1 / 3 if known != q else 0.0
                else:
                    score[q] += 2 / 9
        part[v] = max(range(3), key=lambda q: (score[q], -q))
    return part


def restrict_tripartite(H: Hypergraph, seed: int = 0, trials: int = 32) -> tuple[Hypergraph, Tripartition]:
    """Keep the edges of a 3-graph that are rainbow under a good 3-colouring.

    Candidates are a derandomized colouring plus ``trials`` random balanced
    colourings, each improved by single-vertex moves; the best is returned.
    The derandomized start guarantees at least ``2|H|/9`` edges survive.
    """
    if H.r != 3:
        raise ParameterError("restrict_tripartite needs a 3-graph")
    rng = random.Random(seed)
    best_part = _local_search(H, _conditional_expectation_partition(H))
    best = _rainbow_count(H, best_part)
    for _ in range(trials):
        if best == H.m:
            break
        order = list(range(H.n))
        rng.shuffle(order)
        part = [0] * H.n
        for pos, v in enumerate(order):
            part[v] = pos % 3
        part = _local_search(H, part)
        score = _rainbow_count(H, part)
        if score > best:
            best, best_part = score, part
    parts = tuple(frozenset(v for v in range(H.n) if best_part[v] == q) for q in range(3))
    keep = [i for i, e in enumerate(H.edges) if len({best_part[v] for v in e}) == 3]
    return H.subgraph(keep), Tripartition(parts)
