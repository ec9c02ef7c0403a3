"""Degree-capped greedy construction of K_{s,t} copies in a dense bipartite graph.

Candidates come from the usual star count: pick v on the large side, an
s-set S of its neighbours, then t common neighbours of S. A candidate is
accepted only if, for every nonempty A ⊆ S and B ⊆ R, the number of
accepted copies containing A on the small side and B on the large side
stays within cap(|A|, |B|).
"""

from __future__ import annotations

import math
import random
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .copies import CopyCollection, PatternSpec
from .errors import ParameterError, StructuralError
from .hypergraph import Hypergraph

__all__ = ["DenseCaps", "DenseResult", "dense_collection", "audit_caps", "audit_caps_by_edges"]


@dataclass(frozen=True)
class DenseCaps:
    s: int
    t: int
    L: float
    V: int
    kappa: float = 1.0
    edges: int | None = None

    def __post_init__(self):
        if self.L <= 0 or self.V <= 0 or self.kappa <= 0:
            raise ParameterError("caps need positive L, |V| and kappa")

    def cap(self, a: int, b: int) -> float:
        """kappa (L |V|^(1-1/s))^(s-a) (L^s)^(t-b) for 1 <= a <= s, 1 <= b <= t.

        When the edge count is known, L = |E| |V|^(-(2-1/s)) is substituted
        and the power of |V| is formed from its exact rational exponent, so
        caps that are integers come out exactly (up to float rounding when the
        exponent of |V| is fractional).
        """
        if not (1 <= a <= self.s and 1 <= b <= self.t):
            raise ParameterError(f"cap index ({a}, {b}) outside [1,{self.s}]x[1,{self.t}]")
        s, t = self.s, self.t
        if self.edges is None:
            return self.kappa * (self.L * self.V ** (1 - 1 / s)) ** (s - a) * (self.L ** s) ** (t - b)
        e = (s - a) + s * (t - b)
        q = -Fraction(2 * s - 1, s) * e + Fraction(s - 1, s) * (s - a)
        if q.denominator == 1:
            return float(Fraction(self.kappa) * Fraction(self.edges) ** e * Fraction(self.V) ** int(q))
        x = self.kappa * math.exp(e * math.log(self.edges) + float(q) * math.log(self.V))
        # values within rounding noise of an integer are taken as that integer
        k = round(x)
        return float(k) if k > 0 and abs(x - k) <= 1e-9 * x else x

    def table(self) -> dict:
        return {(a, b): self.cap(a, b) for a in range(1, self.s + 1) for b in range(1, self.t + 1)}


@dataclass
class DenseResult:
    collection: CopyCollection
    caps: DenseCaps
    U: frozenset
    V: frozenset
    target: int
    status: str
    swapped: bool
    L_ok: bool
    attempts: int
    rejections: Counter = field(default_factory=Counter)

    @property
    def undersized(self) -> bool:
        return self.status == "undersized"


def _subset_keys(S, R):
    for a in range(1, len(S) + 1):
        for A in combinations(S, a):
            for b in range(1, len(R) + 1):
                for B in combinations(R, b):
                    yield A, B


def dense_collection(
    G: Hypergraph,
    U,
    V,
    s: int,
    t: int,
    kappa: float = 1.0,
    c: float = 1e-3,
    L0: float = 1.0,
    seed: int = 0,
    failure_factor: int = 50,
    target: int | None = None,
) -> DenseResult:
    """Greedy degree-capped collection of K_{s,t}'s with s-sides in the smaller part."""
    if G.r != 2:
        raise ParameterError("dense_collection needs a graph")
    U, V = frozenset(U), frozenset(V)
    if U & V:
        raise StructuralError("bipartition sides overlap")
    for a, b in G.edges:
        if not ((a in U and b in V) or (a in V and b in U)):
            raise StructuralError(f"edge {a}-{b} does not cross the bipartition")
    swapped = False
    if len(U) > len(V):
        warnings.warn("|U| > |V|: swapping the sides so the s-sides go in the smaller part")
        U, V = V, U
        swapped = True
    if s > len(U) or t > len(V) or not V:
        raise ParameterError(f"sides of sizes {len(U)}, {len(V)} cannot host K_({s},{t})")
    L = G.m / len(V) ** (2 - 1 / s)
    coll = CopyCollection(G, PatternSpec("kst", s, t))
    if G.m == 0:
        caps = DenseCaps(s, t, 1.0, len(V), kappa)
        return DenseResult(coll, caps, U, V, target or 0, "undersized", swapped, False, 0)
    caps = DenseCaps(s, t, L, len(V), kappa, G.m)
    cap_table = caps.table()
    if target is None:
        target = max(1, math.ceil(c * L ** (s * t) * len(V) ** s))
    adj = {v: set() for v in U | V}
    for a, b in G.edges:
        adj[a].add(b)
        adj[b].add(a)
    rng = random.Random(seed)
    big = sorted(v for v in V if len(adj[v]) >= s)
    deg = Counter()
    failures = 0
    attempts = 0
    rejections = Counter()
    limit = failure_factor * target
    while len(coll) < target and failures < limit and big:
        attempts += 1
        v = rng.choice(big)
        S = tuple(sorted(rng.sample(sorted(adj[v]), s)))
        common = set.intersection(*(adj[u] for u in S))
        if len(common) < t:
            failures += 1
            rejections["few common neighbours"] += 1
            continue
        R = tuple(sorted(rng.sample(sorted(common), t)))
        if (S, R) in coll:
            failures += 1
            rejections["duplicate"] += 1
            continue
        keys = list(_subset_keys(S, R))
        if any(deg[k] + 1 > cap_table[(len(k[0]), len(k[1]))] for k in keys):
            failures += 1
            rejections["cap"] += 1
            continue
        coll.add((S, R), validate=False)
        deg.update(keys)
        failures = 0
    status = "complete" if len(coll) >= target else "undersized"
    return DenseResult(coll, caps, U, V, target, status, swapped, L >= L0, attempts, rejections)


def audit_caps(C: CopyCollection, caps: DenseCaps, U) -> list:
    """Violations of the cap schedule, checked on vertex-set degrees.

    For A ⊆ U and B outside U, the copies containing every edge between A
    and B are exactly those whose sides contain A and B, so this equals the
    edge-set audit.
    """
    U = frozenset(U)
    deg = Counter()
    bad = []
    for left, right in C.copies:
        if not set(left) <= U:
            bad.append(("s-side outside U", (left, right)))
        deg.update(_subset_keys(left, right))
    for (A, B), d in sorted(deg.items()):
        if d > caps.cap(len(A), len(B)):
            bad.append(((A, B), d, caps.cap(len(A), len(B))))
    return bad


def audit_caps_by_edges(C: CopyCollection, caps: DenseCaps, U) -> list:
    """Same audit over every nonempty set of host edges inside a copy (slow)."""
    U = frozenset(U)
    deg = Counter()
    sups = C.supports("edge")
    for sup in sups:
        for k in range(1, len(sup) + 1):
            deg.update(combinations(sup, k))
    bad = []
    E = C.host.edges
    for sig, d in sorted(deg.items()):
        verts = {v for e in sig for v in E[e]}
        a = len(verts & U)
        b = len(verts) - a
        if d > caps.cap(a, b):
            bad.append((sig, d, caps.cap(a, b)))
    return bad
