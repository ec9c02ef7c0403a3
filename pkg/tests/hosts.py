"""Host builders and naive oracles shared by the test modules.

The oracles here deliberately avoid the package's indices and search code:
they scan edge lists directly so they can serve as independent references.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, permutations, product

from kstexp.hypergraph import Hypergraph, Tripartition


# ---------------------------------------------------------------- builders


def random_hypergraph(n: int, r: int, m: int, rng: random.Random) -> Hypergraph:
    pool = list(combinations(range(n), r))
    return Hypergraph(r, n, rng.sample(pool, min(m, len(pool))))


def parts_of(sizes) -> Tripartition:
    offs = [0, sizes[0], sizes[0] + sizes[1]]
    return Tripartition(tuple(frozenset(range(o, o + z)) for o, z in zip(offs, sizes)))


def complete_tripartite(sizes) -> tuple:
    P = parts_of(sizes)
    edges = product(*(sorted(P[i]) for i in (1, 2, 3)))
    return Hypergraph(3, sum(sizes), edges), P


def random_tripartite(sizes, p: float, rng: random.Random) -> tuple:
    P = parts_of(sizes)
    edges = [e for e in product(*(sorted(P[i]) for i in (1, 2, 3))) if rng.random() < p]
    return Hypergraph(3, sum(sizes), edges), P


def block_host(seed: int, blocks: int = 4, sizes=(2, 3, 4), noise: int = 20, parts=(12, 15, 20)) -> tuple:
    """Disjoint complete 3-partite blocks plus random rainbow noise edges.

    The pair supports stay small relative to the parts, so the sparse
    construction applies, while each block carries many K_{s,t}'s.
    """
    rng = random.Random(seed)
    P = parts_of(parts)
    V1, V2, V3 = (sorted(P[i]) for i in (1, 2, 3))
    a, b, c = rng.sample(V1, len(V1)), rng.sample(V2, len(V2)), rng.sample(V3, len(V3))
    E = set()
    for k in range(blocks):
        B1 = a[k * sizes[0] : (k + 1) * sizes[0]]
        B2 = b[k * sizes[1] : (k + 1) * sizes[1]]
        B3 = c[k * sizes[2] : (k + 1) * sizes[2]]
        E.update(tuple(sorted(e)) for e in product(B1, B2, B3))
    want = len(E) + noise
    while len(E) < want:
        E.add(tuple(sorted((rng.choice(V1), rng.choice(V2), rng.choice(V3)))))
    return Hypergraph(3, sum(parts), E), P


def planted_expansion(s: int, t: int, n: int, offset: int = 0) -> Hypergraph:
    """One copy of K_{s,t}^{(3)} on vertices offset.. inside [0, n)."""
    edges = []
    x = offset + s + t
    for a in range(s):
        for b in range(t):
            edges.append((offset + a, offset + s + b, x))
            x += 1
    return Hypergraph(3, n, edges)


# ---------------------------------------------------------------- oracles


def naive_shadow(edges, k: int) -> set:
    out = set()
    for e in edges:
        for sub in combinations(sorted(e), k):
            out.add(sub)
    return out


def naive_degree(edges, S) -> int:
    S = set(S)
    return sum(1 for e in edges if S <= set(e))


def brute_density(edges, r: int) -> Fraction:
    """max over edge subsets of size >= 2 of (|F'|-1)/(v(F')-r), via combinations."""
    best = None
    for k in range(2, len(edges) + 1):
        for sub in combinations(edges, k):
            v = len({x for e in sub for x in e})
            val = Fraction(k - 1, v - r)
            if best is None or val > best:
                best = val
    return best


def naive_kst(edge_set: set, n: int, s: int, t: int, left_pool=None, right_pool=None) -> set:
    """All (left, right) K_{s,t} copies by checking every s-set against every t-set."""
    L = range(n) if left_pool is None else sorted(left_pool)
    R = range(n) if right_pool is None else sorted(right_pool)
    out = set()
    for A in combinations(L, s):
        for B in combinations(R, t):
            if set(A) & set(B):
                continue
            if all((min(a, b), max(a, b)) in edge_set for a in A for b in B):
                out.add((A, B))
    return out


def naive_expansion_copies(H: Hypergraph, s: int, t: int) -> set:
    """Copies of K_{s,t}^{(3)} as edge-id sets, by mapping the pattern's core injectively.

    Every ordered choice of core vertices is tried and each pattern edge
    picks any host edge through its pair; the result is a set of frozensets
    so automorphic images collapse.
    """
    out = set()
    E = H.edges
    by_pair = {}
    for i, e in enumerate(E):
        for p in combinations(e, 2):
            by_pair.setdefault(p, []).append(i)
    for core in permutations(range(H.n), s + t):
        left, right = core[:s], core[s:]
        if s == t and left > right:
            continue
        if list(left) != sorted(left) or list(right) != sorted(right):
            continue
        pairs = [(min(a, b), max(a, b)) for a in left for b in right]
        options = [by_pair.get(p, []) for p in pairs]
        if any(not o for o in options):
            continue
        for choice in product(*options):
            extras = [next(v for v in E[i] if v not in p) for i, p in zip(choice, pairs)]
            if len(set(extras)) != len(extras) or set(extras) & set(core):
                continue
            out.add(frozenset(choice))
    return out


def exhaustive_ex(H: Hypergraph, copies) -> int:
    """Largest edge subset containing no copy, by trying subsets from largest down."""
    masks = []
    for c in copies:
        x = 0
        for i in c:
            x |= 1 << i
        masks.append(x)
    m = H.m
    for size in range(m, -1, -1):
        for keep in combinations(range(m), size):
            km = 0
            for i in keep:
                km |= 1 << i
            if all(x & km != x for x in masks):
                return size
    return 0
