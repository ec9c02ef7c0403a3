"""Turning graph copies in the 2-shadow into copies of 3-uniform expansions.

Each base copy F' of a graph pattern is extended edge by edge: the k-th
pair e_k is replaced by a host edge h_k containing it whose third vertex
avoids V(F') and every earlier third vertex. The degree of any set of host
edges in the resulting collection is bounded by a sum over projections,
which :func:`certify_translation` checks exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Optional

from .copies import CopyCollection, PatternSpec, SupportSet, collection_degree, is_kst_expansion
from .errors import ParameterError, PreconditionError, StructuralError
from .hypergraph import Hypergraph, Tripartition
from .regularize import DegreeBounds

__all__ = [
    "ProjectionSet",
    "proj",
    "TranslationResult",
    "BaseOutcome",
    "extend_copies",
    "translation_degree_bound",
    "TranslationCertificate",
    "certify_translation",
    "pair_class",
]

DEFAULT_BASE_BUDGET = 10**4


@dataclass(frozen=True)
class ProjectionSet:
    sigma: tuple
    sets: tuple

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)


def _canon_sigma(sigma: Iterable) -> tuple:
    out = sorted({tuple(sorted(h)) for h in sigma})
    for h in out:
        if len(h) != 3 or len(set(h)) != 3:
            raise ParameterError(f"{h} is not a 3-set")
    return tuple(out)


def _overlapping(sigma: tuple) -> bool:
    return any(len(set(h) & set(g)) > 1 for h, g in combinations(sigma, 2))


def proj(sigma: Iterable) -> ProjectionSet:
    """Every way of choosing one pair from each 3-set of ``sigma``.

    The 3-sets are taken in sorted order and each contributes its pairs in
    lexicographic order, so the output follows ``itertools.product`` order.
    """
    sig = _canon_sigma(sigma)
    if _overlapping(sig):
        raise PreconditionError("projection needs pairwise intersections of size at most 1")
    choices = [list(combinations(h, 2)) for h in sig]
    return ProjectionSet(sig, tuple(tuple(c) for c in product(*choices)))


def pair_class(P: Tripartition, a: int, b: int) -> tuple:
    i, j = P.part_of(a), P.part_of(b)
    if i == 0 or j == 0 or i == j:
        raise StructuralError(f"pair {a}-{b} does not cross two parts")
    return (min(i, j), max(i, j))


@dataclass
class BaseOutcome:
    base_index: int
    completions: int
    new_copies: int
    truncated: bool

    @property
    def failed(self) -> bool:
        return self.completions == 0


@dataclass
class TranslationResult:
    collection: CopyCollection
    provenance: dict
    outcomes: list
    c: dict
    precondition: dict = field(default_factory=dict)

    @property
    def successful_bases(self) -> int:
        return sum(1 for o in self.outcomes if not o.failed)

    @property
    def max_provenance(self) -> int:
        return max((len(v) for v in self.provenance.values()), default=0)


def _class_counts(P: Tripartition, pairs) -> Counter:
    return Counter(pair_class(P, a, b) for a, b in pairs)


def extend_copies(
    H3: Hypergraph,
    P: Tripartition,
    C_G: CopyCollection,
    c: dict,
    d: Optional[DegreeBounds] = None,
    budget: int = DEFAULT_BASE_BUDGET,
    bases: Optional[Iterable[int]] = None,
) -> TranslationResult:
    """Extend every selected base copy in all admissible ways (up to ``budget`` each).

    ``c`` maps pair classes (i, j) to the number of base edges each copy has
    in that class; a base copy with a different class profile is a
    structural error.
    """
    if H3.r != 3:
        raise ParameterError("extend_copies needs a 3-graph host")
    if C_G.pattern.kind != "kst":
        raise ParameterError("base collection must hold K_(s,t) copies")
    s, t = C_G.pattern.s, C_G.pattern.t
    want = Counter({tuple(sorted(k)): v for k, v in c.items() if v})
    out = CopyCollection(H3, PatternSpec("expansion", s, t, 3))
    provenance: dict = {}
    outcomes = []
    pair_edges = H3.pair_edges
    v_f, e_f = s + t, s * t
    pre = {}
    if d is not None:
        need = 2 * v_f + 2 * e_f
        for ij, pb in d.classes.items():
            pre[ij] = (pb.d, need, pb.d >= need)
    indices = range(len(C_G)) if bases is None else bases
    for bi in indices:
        left, right = C_G.copies[bi]
        pairs = [(min(a, b), max(a, b)) for a in left for b in right]
        counts = _class_counts(P, pairs)
        if counts != want:
            raise StructuralError(f"base copy {bi} has class counts {dict(counts)}, expected {dict(want)}")
        pairs.sort(key=lambda p: (pair_class(P, *p), p))
        core = set(left) | set(right)
        used: set = set()
        chosen: list = []
        state = {"done": 0, "new": 0, "truncated": False}

        def rec(k):
            if state["done"] >= budget:
                state["truncated"] = True
                return
            if k == len(pairs):
                state["done"] += 1
                copy = tuple(sorted(chosen))
                if copy in out:
                    idx = out._keys[out._key(copy)]
                else:
                    idx = out.add(copy, validate=False)
                    state["new"] += 1
                provenance.setdefault(idx, []).append(bi)
                return
            a, b = pairs[k]
            for eid in pair_edges.get(pairs[k], ()):
                x = next(v for v in H3.edges[eid] if v != a and v != b)
                if x in core or x in used:
                    continue
                chosen.append(eid)
                used.add(x)
                rec(k + 1)
                used.discard(x)
                chosen.pop()
                if state["truncated"]:
                    return

        rec(0)
        outcomes.append(BaseOutcome(bi, state["done"], state["new"], state["truncated"]))
    return TranslationResult(out, provenance, outcomes, dict(want), pre)


def _base_edge_ids(C_G: CopyCollection, sigma_prime) -> Optional[SupportSet]:
    ids = C_G.host.edge_id
    out = []
    for p in sigma_prime:
        eid = ids.get(tuple(sorted(p)))
        if eid is None:
            return None
        out.append(eid)
    return SupportSet("edge", out)


def translation_degree_bound(sigma: Iterable, C_G: CopyCollection, D: DegreeBounds, c: dict, P: Tripartition) -> Fraction:
    """sum over sigma' in proj(sigma) of deg(sigma') * prod D_ij^(c_ij - |sigma' ∩ G_ij|).

    ``sigma`` is a set of host 3-edges given as vertex triples. Returns 0 when
    two of them share a pair, since no expansion copy can contain both.
    """
    sig = _canon_sigma(sigma)
    if _overlapping(sig):
        return Fraction(0)
    cc = {tuple(sorted(k)): v for k, v in c.items() if v}
    Dv = {}
    for ij in cc:
        if ij not in D:
            raise ParameterError(f"no upper degree bound for class {ij}")
        Dv[ij] = Fraction(D.upper(ij))
    total = Fraction(0)
    for sp in proj(sig):
        sup = _base_edge_ids(C_G, sp)
        if sup is None:
            continue
        deg = collection_degree(C_G, sup)
        if deg == 0:
            continue
        used = Counter(pair_class(P, *p) for p in sp)
        term = Fraction(deg)
        for ij, cij in cc.items():
            term *= Dv[ij] ** (cij - used.get(ij, 0))
        total += term
    return total


@dataclass
class TranslationCertificate:
    passed: bool
    checked: int
    violations: list
    invalid_copies: list
    worst_ratio: float
    witness: Optional[tuple]


def certify_translation(
    result: TranslationResult,
    C_G: CopyCollection,
    D: DegreeBounds,
    P: Tripartition,
    depth: int = 3,
) -> TranslationCertificate:
    """Check deg(sigma) <= bound(sigma) for every sigma of size 1..depth inside an emitted support."""
    coll = result.collection
    H = coll.host
    p = coll.pattern
    invalid = [i for i, cp in enumerate(coll.copies) if not is_kst_expansion([H.edges[e] for e in cp], p.s, p.t, p.r)]
    cnt = Counter()
    for sup in coll.supports("edge"):
        for k in range(1, min(depth, len(sup)) + 1):
            cnt.update(combinations(sup, k))
    violations = []
    worst, wit = 0.0, None
    for sig in sorted(cnt):
        deg = cnt[sig]
        bound = translation_degree_bound([H.edges[e] for e in sig], C_G, D, result.c, P)
        if deg > bound:
            violations.append((sig, deg, bound))
        ratio = float(Fraction(deg) / bound) if bound > 0 else float("inf")
        if ratio > worst:
            worst, wit = ratio, sig
    return TranslationCertificate(not violations and not invalid, len(cnt), violations, invalid, worst, wit)
