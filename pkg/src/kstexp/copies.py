"""Collections of pattern copies inside a host, with codegree queries.

A collection is viewed as a uniform hypergraph whose vertices are host
edges (or host vertices): each copy contributes its support as one
hyperedge. Two pattern families are supported:

* ``kst``: copies of K_{s,t} in a graph host, stored as ``(left, right)``
  vertex tuples with the s-side first.
* ``expansion``: copies of the r-expansion of K_{s,t} in an r-graph host,
  stored as the sorted tuple of host edge ids.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Optional, Sequence

from .errors import (
    DigestMismatchError,
    DuplicateCopyError,
    FormatError,
    ParameterError,
    ResourceError,
    StructuralError,
)
from .hypergraph import Hypergraph, shadow

__all__ = [
    "PatternSpec",
    "SupportSet",
    "KstSides",
    "CopyCollection",
    "is_kst_expansion",
    "enumerate_kst",
    "enumerate_expansion_copies",
    "collection_degree",
    "max_i_codegree",
    "check_balanced",
    "check_phi_bounded",
    "BalanceReport",
    "PhiBoundReport",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class PatternSpec:
    kind: str
    s: int
    t: int
    r: int = 2

    def __post_init__(self):
        if self.kind not in ("kst", "expansion"):
            raise ParameterError(f"unknown pattern kind {self.kind!r}")
        if self.s < 1 or self.t < 1:
            raise ParameterError("pattern sides must be positive")
        if self.kind == "kst" and self.r != 2:
            raise ParameterError("K_(s,t) copies live in graph hosts (r = 2)")
        if self.kind == "expansion" and self.r < 3:
            raise ParameterError("expansion copies need r >= 3")

    @property
    def edge_count(self) -> int:
        return self.s * self.t

    @property
    def vertex_count(self) -> int:
        return self.s + self.t + (self.r - 2) * self.s * self.t

    def describe(self) -> str:
        if self.kind == "kst":
            return f"kst {self.s} {self.t}"
        return f"expansion {self.s} {self.t} {self.r}"


@dataclass(frozen=True)
class SupportSet:
    """A set of host vertices (``kind='vertex'``) or host edge ids (``'edge'``)."""

    kind: str
    items: tuple

    def __post_init__(self):
        if self.kind not in ("vertex", "edge"):
            raise ParameterError(f"unknown support kind {self.kind!r}")
        object.__setattr__(self, "items", tuple(sorted(set(self.items))))

    def __len__(self):
        return len(self.items)


def edges_of(items: Iterable[int]) -> SupportSet:
    return SupportSet("edge", tuple(items))


def vertices_of(items: Iterable[int]) -> SupportSet:
    return SupportSet("vertex", tuple(items))


# ---------------------------------------------------------------------------
# validity
# ---------------------------------------------------------------------------

def is_kst_expansion(edges: Sequence[Sequence[int]], s: int, t: int, r: int) -> bool:
    """Whether the given r-sets form a copy of the r-expansion of K_{s,t}."""
    edges = [tuple(e) for e in edges]
    if len(edges) != s * t or len(set(edges)) != len(edges):
        return False
    if any(len(set(e)) != r or len(e) != r for e in edges):
        return False
    deg = Counter(v for e in edges for v in e)
    if len(deg) != s + t + (r - 2) * s * t:
        return False
    heavy = {v for v, d in deg.items() if d >= 2}
    if s >= 2 and t >= 2:
        if len(heavy) != s + t:
            return False
        pairs = []
        for e in edges:
            core = [v for v in e if v in heavy]
            if len(core) != 2:
                return False
            pairs.append(tuple(sorted(core)))
        return _is_complete_bipartite(pairs, s, t)
    # K_{1,t}: a sunflower whose kernel is a single vertex
    if s * t == 1:
        return True
    if len(heavy) != 1:
        return False
    (c,) = heavy
    return all(c in e for e in edges) and deg[c] == s * t


def _is_complete_bipartite(pairs, s, t) -> bool:
    if len(set(pairs)) != len(pairs):
        return False
    adj = defaultdict(set)
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    verts = sorted(adj)
    start = verts[0]
    side_b = adj[start]
    side_a = set(verts) - side_b
    if not side_a or side_a & side_b or start not in side_a:
        return False
    if sorted((len(side_a), len(side_b))) != sorted((s, t)):
        return False
    if len(side_a) * len(side_b) != len(pairs):
        return False
    return all(adj[a] == side_b for a in side_a) and all(adj[b] == side_a for b in side_b)


# ---------------------------------------------------------------------------
# the collection
# ---------------------------------------------------------------------------

class CopyCollection:
    """A duplicate-free set of pattern copies in a fixed host."""

    def __init__(self, host: Hypergraph, pattern: PatternSpec, copies: Iterable = (), validate: bool = True):
        if pattern.r != host.r:
            raise ParameterError(f"pattern uniformity {pattern.r} != host uniformity {host.r}")
        self.host = host
        self.pattern = pattern
        self.copies: list = []
        self._keys: dict = {}
        self._index: dict = {}
        for c in copies:
            self.add(c, validate=validate)

    # -- canonical forms ---------------------------------------------------
    def canonical(self, copy) -> tuple:
        if self.pattern.kind == "kst":
            left, right = copy
            return (tuple(sorted(left)), tuple(sorted(right)))
        return tuple(sorted(copy))

    def _key(self, canon) -> tuple:
        if self.pattern.kind == "kst" and self.pattern.s == self.pattern.t:
            return tuple(sorted(canon))
        return canon

    def validate(self, canon):
        p = self.pattern
        if p.kind == "kst":
            left, right = canon
            if len(left) != p.s or len(right) != p.t:
                raise StructuralError(f"copy {canon} has wrong side sizes")
            if len(set(left) | set(right)) != p.s + p.t:
                raise StructuralError(f"copy {canon} repeats a vertex")
            ids = self.host.edge_id
            for a in left:
                for b in right:
                    if (min(a, b), max(a, b)) not in ids:
                        raise StructuralError(f"copy {canon} misses host edge {a}-{b}")
        else:
            if any(not 0 <= i < self.host.m for i in canon):
                raise StructuralError(f"copy {canon} refers to a missing host edge")
            if not is_kst_expansion([self.host.edges[i] for i in canon], p.s, p.t, p.r):
                raise StructuralError(f"copy {canon} is not an expansion of K_({p.s},{p.t})")

    def add(self, copy, validate: bool = True) -> int:
        canon = self.canonical(copy)
        key = self._key(canon)
        if key in self._keys:
            raise DuplicateCopyError(f"copy {canon} already present")
        if validate:
            self.validate(canon)
        idx = len(self.copies)
        self.copies.append(canon)
        self._keys[key] = idx
        for kind, index in self._index.items():
            for x in self._support(idx, kind):
                index[x].append(idx)
        return idx

    def __contains__(self, copy) -> bool:
        return self._key(self.canonical(copy)) in self._keys

    def __len__(self):
        return len(self.copies)

    def __iter__(self):
        return iter(self.copies)

    # -- supports ------------------------------------------------------------
    @property
    def universes(self) -> tuple:
        return ("edge", "vertex") if self.pattern.kind == "kst" else ("edge",)

    def uniformity(self, kind: str = "edge") -> int:
        self._check_universe(kind)
        if kind == "edge":
            return self.pattern.edge_count
        return self.pattern.s + self.pattern.t

    def universe_size(self, kind: str = "edge") -> int:
        self._check_universe(kind)
        return self.host.m if kind == "edge" else self.host.n

    def _check_universe(self, kind):
        if kind not in self.universes:
            raise ParameterError(f"{self.pattern.kind} collections have no {kind!r} universe")

    def _support(self, idx: int, kind: str) -> tuple:
        c = self.copies[idx]
        if self.pattern.kind == "kst":
            left, right = c
            if kind == "vertex":
                return tuple(sorted(left + right))
            ids = self.host.edge_id
            return tuple(sorted(ids[(min(a, b), max(a, b))] for a in left for b in right))
        return c

    def support(self, idx: int, kind: str = "edge") -> tuple:
        self._check_universe(kind)
        return self._support(idx, kind)

    def supports(self, kind: str = "edge") -> list:
        self._check_universe(kind)
        return [self._support(i, kind) for i in range(len(self.copies))]

    def index(self, kind: str) -> dict:
        self._check_universe(kind)
        if kind not in self._index:
            idx = defaultdict(list)
            for i in range(len(self.copies)):
                for x in self._support(i, kind):
                    idx[x].append(i)
            self._index[kind] = idx
        return self._index[kind]

    def degree(self, sigma) -> int:
        return collection_degree(self, sigma)

    # -- serialization -------------------------------------------------------
    def to_text(self) -> str:
        lines = ["COLL1", f"host {self.host.digest()}", f"pattern {self.pattern.describe()}", f"copies {len(self.copies)}"]
        for c in self.copies:
            if self.pattern.kind == "kst":
                lines.append(" ".join(map(str, c[0])) + " | " + " ".join(map(str, c[1])))
            else:
                lines.append(" ".join(map(str, c)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, host: Hypergraph) -> "CopyCollection":
        lines = [(i, l) for i, l in enumerate(text.splitlines(), start=1) if l and not l.startswith("#")]
        if len(lines) < 4 or lines[0][1] != "COLL1":
            raise FormatError("missing COLL1 header", lines[0][0] if lines else 1, 1)
        (ln, hl), (lp, pl), (lc, cl) = lines[1], lines[2], lines[3]
        if not hl.startswith("host "):
            raise FormatError("expected 'host <digest>'", ln, 1)
        digest = hl[5:].strip()
        if digest != host.digest():
            raise DigestMismatchError(f"collection was built for host {digest[:12]}..., got {host.digest()[:12]}...", ln, 6)
        parts = pl.split()
        try:
            if parts[:2] == ["pattern", "kst"] and len(parts) == 4:
                pattern = PatternSpec("kst", int(parts[2]), int(parts[3]))
            elif parts[:2] == ["pattern", "expansion"] and len(parts) == 5:
                pattern = PatternSpec("expansion", int(parts[2]), int(parts[3]), int(parts[4]))
            else:
                raise ValueError
        except (ValueError, ParameterError):
            raise FormatError(f"bad pattern line {pl!r}", lp, 1)
        if not cl.startswith("copies "):
            raise FormatError("expected 'copies N'", lc, 1)
        try:
            count = int(cl[7:])
        except ValueError:
            raise FormatError("copy count is not an integer", lc, 8)
        body = lines[4:]
        if len(body) != count:
            raise FormatError(f"declared {count} copies, found {len(body)}", lc, 8)
        coll = cls(host, pattern)
        for lineno, line in body:
            try:
                if pattern.kind == "kst":
                    left_s, right_s = line.split("|")
                    copy = (tuple(int(x) for x in left_s.split()), tuple(int(x) for x in right_s.split()))
                else:
                    copy = tuple(int(x) for x in line.split())
            except ValueError:
                raise FormatError(f"malformed copy line {line!r}", lineno, 1)
            try:
                coll.add(copy)
            except (StructuralError, DuplicateCopyError) as exc:
                raise FormatError(str(exc), lineno, 1) from exc
        return coll


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KstSides:
    """Where the two sides of a K_{s,t} may sit.

    ``left`` lists (vertex class, count) quotas for the s-side; ``right`` is
    the allowed pool for the t-side (None = anywhere).
    """

    left: tuple = ()
    right: Optional[frozenset] = None

    def __post_init__(self):
        object.__setattr__(self, "left", tuple((frozenset(c), int(k)) for c, k in self.left))
        if self.right is not None:
            object.__setattr__(self, "right", frozenset(self.right))


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self, k=1):
        self.used += k
        if self.used > self.limit:
            raise ResourceError(f"enumeration budget of {self.limit} node expansions exhausted")


def _graph_adjacency(G: Hypergraph) -> list:
    adj = [set() for _ in range(G.n)]
    for a, b in G.edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _kst_sides(G, adj, s, t, sides: Optional[KstSides], budget: _Budget):
    """Yield (left, right) with left an s-set and right a t-set of common neighbours."""
    if sides is not None and sides.left:
        if sum(k for _, k in sides.left) != s:
            raise ParameterError("left quotas must sum to s")
        quotas = [(sorted(c), k) for c, k in sides.left]
    else:
        quotas = [(list(range(G.n)), s)]
    right_pool = sides.right if sides is not None else None

    def rec(qi, start, got, chosen, common):
        budget.tick()
        if common is not None and len(common) < t:
            return
        if qi == len(quotas):
            pool = common if right_pool is None else common & right_pool
            pool = sorted(pool - set(chosen))
            for right in combinations(pool, t):
                budget.tick()
                yield tuple(chosen), right
            return
        cls, need = quotas[qi]
        if got == need:
            yield from rec(qi + 1, 0, 0, chosen, common)
            return
        for pos in range(start, len(cls)):
            v = cls[pos]
            if v in chosen:
                continue
            nc = adj[v] if common is None else common & adj[v]
            chosen.append(v)
            yield from rec(qi, pos + 1, got + 1, chosen, nc)
            chosen.pop()

    yield from rec(0, 0, 0, [], None)


def enumerate_kst(G: Hypergraph, s: int, t: int, sides: Optional[KstSides] = None, budget: int = DEFAULT_BUDGET) -> CopyCollection:
    """All copies of K_{s,t} in the graph ``G`` respecting ``sides``."""
    if G.r != 2:
        raise ParameterError("enumerate_kst needs a graph host")
    coll = CopyCollection(G, PatternSpec("kst", s, t))
    adj = _graph_adjacency(G)
    found = {}
    for left, right in _kst_sides(G, adj, s, t, sides, _Budget(budget)):
        c = coll.canonical((left, right))
        if s == t and sides is None:
            c = min(c, (c[1], c[0]))
        found.setdefault(coll._key(c), c)
    for key in sorted(found):
        coll.add(found[key], validate=False)
    return coll


def enumerate_expansion_copies(H: Hypergraph, s: int, t: int, budget: int = DEFAULT_BUDGET) -> CopyCollection:
    """All copies of the r-expansion of K_{s,t} in ``H`` (r >= 3).

    Copies of K_{s,t} in the 2-shadow are extended pair by pair to host
    edges whose other r-2 vertices avoid the core and earlier extensions.
    """
    if H.r < 3:
        raise ParameterError("expansion copies need r >= 3")
    pattern = PatternSpec("expansion", s, t, H.r)
    coll = CopyCollection(H, pattern)
    if H.n < pattern.vertex_count or H.m < s * t:
        return coll
    b = _Budget(budget)
    G = shadow(H, 2)
    adj = _graph_adjacency(G)
    pair_edges = H.pair_edges
    seen_base = set()
    found = set()
    for left, right in _kst_sides(G, adj, s, t, None, b):
        base_key = tuple(sorted((left, right))) if s == t else (left, right)
        if base_key in seen_base:
            continue
        seen_base.add(base_key)
        core = set(left) | set(right)
        pairs = [(min(a, c), max(a, c)) for a in left for c in right]
        chosen = []
        used = set()

        def rec(k):
            b.tick()
            if k == len(pairs):
                found.add(tuple(sorted(chosen)))
                return
            p = pairs[k]
            for eid in pair_edges.get(p, ()):
                extra = [v for v in H.edges[eid] if v not in p]
                if any(v in core or v in used for v in extra):
                    continue
                chosen.append(eid)
                used.update(extra)
                rec(k + 1)
                chosen.pop()
                used.difference_update(extra)

        rec(0)
    for c in sorted(found):
        coll.add(c, validate=False)
    return coll


# ---------------------------------------------------------------------------
# degree queries and certificates
# ---------------------------------------------------------------------------

def collection_degree(C: CopyCollection, sigma) -> int:
    """Number of copies whose support contains every element of ``sigma``."""
    if not isinstance(sigma, SupportSet):
        raise ParameterError("sigma must be a SupportSet")
    C._check_universe(sigma.kind)
    if not sigma.items:
        return len(C)
    size = C.universe_size(sigma.kind)
    if sigma.items[0] < 0 or sigma.items[-1] >= size:
        raise ParameterError(f"support element outside the {sigma.kind} universe of size {size}")
    index = C.index(sigma.kind)
    lists = sorted((index.get(x, ()) for x in sigma.items), key=len)
    if not lists[0]:
        return 0
    common = set(lists[0])
    for lst in lists[1:]:
        common.intersection_update(lst)
        if not common:
            return 0
    return len(common)


def codegree_counts(C: CopyCollection, i: int, kind: str = "edge") -> Counter:
    """Degree of every i-set lying inside some copy's support."""
    cnt = Counter()
    for sup in C.supports(kind):
        cnt.update(combinations(sup, i))
    return cnt


def max_i_codegree(C: CopyCollection, i: int, kind: str = "edge", with_witness: bool = False):
    """Delta_i: the largest number of copies sharing a fixed i-set."""
    u = C.uniformity(kind)
    if not 1 <= i <= u:
        raise ParameterError(f"codegree order {i} outside [1, {u}]")
    cnt = codegree_counts(C, i, kind)
    if not cnt:
        return (0, None) if with_witness else 0
    witness, best = min(cnt.items(), key=lambda kv: (-kv[1], kv[0]))
    return (best, witness) if with_witness else best


@dataclass
class BalanceReport:
    status: str
    size: int
    m: int
    gamma: float
    tau: float
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "vacuous")


def check_balanced(C: CopyCollection, m: int, gamma: float, tau: float, kind: str = "edge") -> BalanceReport:
    """Check Delta_i <= gamma |C| / m * (tau / m)^(i-1) for every i, exactly."""
    if m <= 0 or gamma <= 0 or tau <= 0:
        raise ParameterError("m, gamma and tau must be positive")
    report = BalanceReport("pass", len(C), m, gamma, tau)
    if len(C) == 0:
        report.status = "vacuous"
        return report
    g, tt, mm = Fraction(gamma), Fraction(tau), Fraction(m)
    for i in range(1, C.uniformity(kind) + 1):
        delta, wit = max_i_codegree(C, i, kind, with_witness=True)
        bound = g * len(C) / mm * (tt / mm) ** (i - 1)
        ok = delta <= bound
        report.rows.append((i, delta, float(bound), ok))
        if not ok:
            report.violations.append((i, delta, float(bound), wit))
    if report.violations:
        report.status = "fail"
    return report


@dataclass
class PhiBoundReport:
    passed: bool
    checked: int
    worst_ratio: float
    witness: Optional[tuple]
    witness_degree: int
    witness_phi: float
    violations: list = field(default_factory=list)

    def to_text(self) -> str:
        return (
            f"phi-bounded: {'yes' if self.passed else 'no'}\n"
            f"sets checked: {self.checked}\n"
            f"worst ratio: {self.worst_ratio!r}\n"
            f"witness: {' '.join(map(str, self.witness)) if self.witness else '-'}\n"
            f"witness degree: {self.witness_degree}\n"
            f"witness phi: {self.witness_phi!r}\n"
            f"violations: {len(self.violations)}\n"
        )


def check_phi_bounded(C: CopyCollection, phi: Callable[[tuple], float]) -> PhiBoundReport:
    """Verify deg(nu) <= phi(nu) for every nonempty nu inside a copy's vertex support.

    Sets outside every support have degree 0, and phi is nonnegative, so
    scanning support subsets is the same as scanning all vertex sets.
    """
    cnt = Counter()
    for sup in C.supports("vertex"):
        for k in range(1, len(sup) + 1):
            cnt.update(combinations(sup, k))
    worst, wit, wdeg, wphi = 0.0, None, 0, math.inf
    violations = []
    for nu in sorted(cnt):
        d = cnt[nu]
        f = phi(nu)
        if f == math.inf:
            continue
        ratio = d / f if f > 0 else math.inf
        if d > f:
            violations.append((nu, d, f))
        if ratio > worst:
            worst, wit, wdeg, wphi = ratio, nu, d, f
    return PhiBoundReport(not violations, len(cnt), worst, wit, wdeg, wphi, violations)
