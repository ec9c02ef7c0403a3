"""Sparse-shadow supersaturation: a phi-bounded greedy collection of K_{s,t}'s.

Every copy has one vertex in V1, s-1 in V2 (together the s-side S) and its
t-side in V3, so a copy is determined by its vertex set. The collection is
grown one copy at a time; a set nu is *saturated* once its degree reaches
floor(phi(nu)), and a new copy is admissible exactly when none of its
vertex subsets is saturated. Candidates are produced by the two-stage star
count: pairs (S, v) built from an edge u1 v, then t-sets of common
extensions of S, pruning with link sets at every step.
"""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from .copies import CopyCollection, PatternSpec, check_phi_bounded, KstSides
from .errors import ParameterError, StructuralError
from .hypergraph import Hypergraph, Tripartition, pair_support, shadow
from .regularize import log_factor

__all__ = [
    "PhiParams",
    "phi",
    "PhiFunction",
    "SaturatedFamily",
    "GoodSubgraph",
    "good_subgraph",
    "build_stars",
    "complete_kst",
    "SparseResult",
    "sparse_collection",
    "condition_report",
    "desk_phi_params",
]


@dataclass(frozen=True)
class PhiParams:
    s: int
    t: int
    delta: float
    ell: float
    K: float
    n: float
    m13: float
    m23: float
    delta_max: float = 0.5

    def __post_init__(self):
        if self.s < 1 or self.t < 1:
            raise ParameterError("s and t must be positive")
        if not 0 < self.delta < 1:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")
        for name in ("ell", "K", "n", "m13", "m23"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    # log-domain pieces
    @property
    def log_A(self) -> float:
        """log of delta ell^-1 K n^(1-2/s), the per-step factor in a."""
        s = self.s
        return math.log(self.delta) - math.log(self.ell) + math.log(self.K) + (1 - 2 / s) * math.log(self.n)

    @property
    def log_B(self) -> float:
        """log of delta ell^(3-2s) K^(s-1), the per-step factor in b."""
        s = self.s
        return math.log(self.delta) + (3 - 2 * s) * math.log(self.ell) + (s - 1) * math.log(self.K)

    @property
    def log_M(self) -> float:
        s, t = self.s, self.t
        return (
            (s - 1) * math.log(self.ell)
            + (s - 1 + 1 / s) * math.log(self.n)
            + t * ((3 - 2 * s) * math.log(self.ell) + (s - 1) * math.log(self.K))
        )

    @property
    def M(self) -> float:
        return _exp(self.log_M)

    @property
    def A(self) -> float:
        return _exp(self.log_A)

    @property
    def B(self) -> float:
        return _exp(self.log_B)

    def monotone(self) -> bool:
        """phi is nonincreasing in a and b exactly when both step factors are >= 1."""
        return self.log_A >= 0 and self.log_B >= 0

    def min_feasible_phi(self) -> float:
        return min(
            phi((a, b, touches), self)
            for a in range(1, self.s + 1)
            for b in range(1, self.t + 1)
            for touches in (True, False)
        )

    def floor_regime(self) -> bool:
        """phi >= 1 on every profile with 1 <= a <= s, 1 <= b <= t."""
        return self.min_feasible_phi() >= 1

    def range_checks(self) -> dict:
        s = self.s
        upper = self.delta * self.K ** ((s - 1) / (2 * s - 3)) if s >= 2 else math.inf
        return {
            "delta<=delta_max": (self.delta <= self.delta_max, self.delta_max - self.delta),
            "ell>=1/delta": (self.ell >= 1 / self.delta, self.ell * self.delta),
            "ell<=delta*K^((s-1)/(2s-3))": (self.ell <= upper, upper / self.ell),
        }


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def phi(profile: tuple, p: PhiParams) -> float:
    """phi for a set meeting V1 ∪ V2 in a vertices and V3 in b vertices.

    ``profile`` is (a, b, touches_V1). Infinite when a = 0 or b = 0.
    """
    a, b, touches = profile
    if a < 0 or b < 0:
        raise ParameterError("profile counts must be nonnegative")
    if a == 0 or b == 0:
        return math.inf
    m = p.m13 if touches else p.m23
    return _exp(p.log_M - math.log(p.delta) - math.log(m) - (a - 1) * p.log_A - (b - 1) * p.log_B)


class PhiFunction:
    """phi evaluated on vertex sets of a tripartite host."""

    def __init__(self, params: PhiParams, P: Tripartition):
        self.params = params
        self.P = P
        self._cache: dict = {}

    def profile(self, nu: Iterable[int]) -> tuple:
        a = b = 0
        touches = False
        for v in nu:
            part = self.P.part_of(v)
            if part == 1:
                a += 1
                touches = True
            elif part == 2:
                a += 1
            elif part == 3:
                b += 1
        return a, b, touches

    def __call__(self, nu: Iterable[int]) -> float:
        prof = self.profile(nu)
        val = self._cache.get(prof)
        if val is None:
            val = phi(prof, self.params)
            self._cache[prof] = val
        return val

    def floor(self, nu) -> float:
        f = self(nu)
        return f if f == math.inf else math.floor(f)


@dataclass
class LinkStats:
    queries: int = 0
    checked: int = 0
    violations: list = field(default_factory=list)
    worst_ratio: float = 0.0


class SaturatedFamily:
    """The family of vertex sets nu with deg(nu) >= floor(phi(nu)).

    Degrees are tracked only for subsets of inserted copies; every other set
    has degree 0 and is saturated exactly when floor(phi) is 0, which
    :meth:`is_saturated` evaluates directly.
    """

    def __init__(self, phi_fn: PhiFunction):
        self.phi = phi_fn
        self.s = phi_fn.params.s
        self.t = phi_fn.params.t
        self.deg: Counter = Counter()
        self.saturated: set = set()
        self.link_stats = LinkStats()
        self.copies = 0

    def degree(self, nu) -> int:
        return self.deg.get(tuple(sorted(nu)), 0)

    def is_saturated(self, nu) -> bool:
        key = tuple(sorted(nu))
        if not key:
            return False
        f = self.phi.floor(key)
        if f == math.inf:
            return False
        return self.deg.get(key, 0) >= f

    def add_copy(self, support: Iterable[int]):
        sup = tuple(sorted(support))
        self.copies += 1
        for k in range(1, len(sup) + 1):
            for nu in combinations(sup, k):
                self.deg[nu] += 1
                if nu not in self.saturated and self.is_saturated(nu):
                    self.saturated.add(nu)

    def is_good(self, K: Iterable[int]) -> bool:
        K = tuple(sorted(K))
        for k in range(1, len(K) + 1):
            for nu in combinations(K, k):
                if self.is_saturated(nu):
                    return False
        return True

    def link(self, nu: Iterable[int], V: Iterable[int], record: bool = True) -> set:
        """J(nu) ∩ V, the u in V with nu ∪ {u} saturated.

        Every query also checks the link bound
        |J(nu) ∩ V| <= 2(s+t) phi(nu) / min_{u in V} phi(nu ∪ {u}).
        """
        nu = tuple(sorted(nu))
        V = [u for u in V if u not in nu]
        out = set()
        finite = []
        for u in V:
            ext = tuple(sorted(nu + (u,)))
            f = self.phi(ext)
            if f != math.inf:
                finite.append(f)
            if self.is_saturated(ext):
                out.add(u)
        if record:
            st = self.link_stats
            st.queries += 1
            if finite:
                st.checked += 1
                bound = 2 * (self.s + self.t) * self.phi(nu) / min(finite)
                ratio = len(out) / bound if bound > 0 else (math.inf if out else 0.0)
                if ratio > st.worst_ratio:
                    st.worst_ratio = ratio
                if len(out) > bound:
                    st.violations.append((nu, len(out), bound))
            elif out:
                st.violations.append((nu, len(out), 0.0))
        return out

    def audit_sample(self, k: int = 100, rng: Optional[random.Random] = None, collection: Optional[CopyCollection] = None) -> list:
        """Recompute degrees and saturation from scratch for up to k tracked sets."""
        rng = rng or random.Random(0)
        keys = sorted(self.deg)
        pick = keys if len(keys) <= k else rng.sample(keys, k)
        bad = []
        sups = collection.supports("vertex") if collection is not None else None
        for nu in pick:
            if sups is not None:
                d = sum(1 for sp in sups if set(nu) <= set(sp))
                if d != self.deg[nu]:
                    bad.append((nu, "degree", d, self.deg[nu]))
            f = self.phi.floor(nu)
            sat = f != math.inf and self.deg[nu] >= f
            if sat != (nu in self.saturated):
                bad.append((nu, "saturation", sat, nu in self.saturated))
        return bad


@dataclass
class GoodSubgraph:
    edges: set
    adj: dict
    triangles: int

    def neighbours(self, v) -> set:
        return self.adj.get(v, set())


def good_subgraph(H: Hypergraph, F: SaturatedFamily) -> GoodSubgraph:
    """Shadow pairs that are not saturated, and the hyperedges that survive whole."""
    if H.r != 3:
        raise ParameterError("good_subgraph needs a 3-graph")
    edges = set()
    for e in H.edges:
        for p in combinations(e, 2):
            edges.add(p)
    edges = {p for p in edges if not F.is_saturated(p)}
    adj = defaultdict(set)
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    tri = sum(1 for e in H.edges if all(p in edges for p in combinations(e, 2)))
    return GoodSubgraph(edges, dict(adj), tri)


def default_degree_floor(p: PhiParams) -> float:
    """ell^-1 K n^(1-2/s)."""
    return _exp(-math.log(p.ell) + math.log(p.K) + (1 - 2 / p.s) * math.log(p.n))


def default_star_floor(p: PhiParams) -> float:
    """(8s)^-s ell^(3-2s) K^(s-1)."""
    s = p.s
    return _exp(-s * math.log(8 * s) + (3 - 2 * s) * math.log(p.ell) + (s - 1) * math.log(p.K))


def _bad_extensions(F: SaturatedFamily, partial: tuple, pool: Iterable[int]) -> set:
    """Union over nu ⊆ partial of J(nu) ∩ pool."""
    pool = list(pool)
    bad = set()
    for k in range(0, len(partial) + 1):
        for nu in combinations(partial, k):
            if not nu:
                # singletons {u}: saturated vertices are never admissible
                bad.update(u for u in pool if F.is_saturated((u,)))
                continue
            bad |= F.link(nu, pool)
    return bad


def build_stars(
    Gp: GoodSubgraph,
    H: Hypergraph,
    P: Tripartition,
    F: SaturatedFamily,
    p: PhiParams,
    degree_floor: Optional[float] = None,
    limit: Optional[int] = None,
) -> list:
    """Pairs (S, v): v in V3, S = {u1} ∪ (s-1 vertices of V2), all in N(v), u1 ~ S∩V2, S ∪ {v} F-good.

    S is returned as (u1, u2, ..., us) with u2 < ... < us.
    """
    s = p.s
    if degree_floor is None:
        degree_floor = default_degree_floor(p)
    V1, V2, V3 = P[1], P[2], P[3]
    out = []
    for u1, v in sorted(Gp.edges):
        if u1 in V3 and v in V1:
            u1, v = v, u1
        if not (u1 in V1 and v in V3):
            continue
        common = Gp.neighbours(u1) & Gp.neighbours(v)
        if len(common) < degree_floor:
            continue
        pool = sorted(common & V2)
        if F.is_saturated((v,)) or F.is_saturated((u1,)) or not F.is_good((u1, v)):
            continue

        def rec(chosen, start):
            if limit is not None and len(out) >= limit:
                return
            if len(chosen) == s - 1:
                out.append(((u1,) + tuple(chosen), v))
                return
            partial = tuple(sorted((v, u1) + tuple(chosen)))
            cand = [u for u in pool[start:] if u not in chosen]
            bad = _bad_extensions(F, partial, cand)
            for u in cand:
                if u in bad:
                    continue
                chosen.append(u)
                rec(chosen, pool.index(u) + 1)
                chosen.pop()

        rec([], 0)
        if limit is not None and len(out) >= limit:
            break
    return out


def complete_kst(
    stars: list,
    F: SaturatedFamily,
    p: PhiParams,
    star_floor: Optional[float] = None,
    limit: Optional[int] = None,
    order_rng: Optional[random.Random] = None,
) -> list:
    """F-good vertex sets S ∪ {v1..vt} with every (S, vi) a star."""
    t = p.t
    if star_floor is None:
        star_floor = default_star_floor(p)
    ext = defaultdict(set)
    for S, v in stars:
        ext[S].add(v)
    groups = sorted(ext)
    if order_rng is not None:
        order_rng.shuffle(groups)
    out = []
    for S in groups:
        pool = sorted(ext[S])
        if len(pool) < star_floor or len(pool) < t:
            continue

        def rec(chosen, start):
            if limit is not None and len(out) >= limit:
                return
            if len(chosen) == t:
                out.append((S, tuple(chosen)))
                return
            partial = tuple(sorted(S + tuple(chosen)))
            cand = pool[start:]
            bad = _bad_extensions(F, partial, cand)
            for i, v in enumerate(cand):
                if v in bad:
                    continue
                chosen.append(v)
                rec(chosen, start + i + 1)
                chosen.pop()

        rec([], 0)
        if limit is not None and len(out) >= limit:
            break
    return out


@dataclass
class SparseResult:
    collection: CopyCollection
    family: SaturatedFamily
    params: PhiParams
    status: str
    rounds: int
    target: Optional[int]
    target_formula: float
    conditions: dict
    phi_report: object
    link_stats: LinkStats
    triangles_initial: int
    floors: tuple

    def audit_text(self) -> str:
        lines = [
            f"status {self.status}",
            f"copies {len(self.collection)}",
            f"target {self.target if self.target is not None else 'maximal'}",
            f"target_formula {self.target_formula!r}",
            f"rounds {self.rounds}",
            f"degree_floor {self.floors[0]!r}",
            f"star_floor {self.floors[1]!r}",
            f"triangles_initial {self.triangles_initial}",
            f"link_queries {self.link_stats.queries}",
            f"link_checked {self.link_stats.checked}",
            f"link_violations {len(self.link_stats.violations)}",
            f"link_worst_ratio {self.link_stats.worst_ratio!r}",
            f"phi_bounded {'yes' if self.phi_report.passed else 'no'}",
            f"phi_worst_ratio {self.phi_report.worst_ratio!r}",
        ]
        for name, (ok, margin) in self.conditions.items():
            lines.append(f"condition {name} {'yes' if ok else 'no'} margin {margin!r}")
        return "\n".join(lines) + "\n"


def condition_report(H: Hypergraph, P: Tripartition, p: PhiParams, log_exponents: Optional[dict] = None) -> dict:
    """Hypotheses (a)-(f) of the sparse construction, each as (holds, margin).

    Margins are ratios rhs/lhs (>= 1 means the condition holds) except for
    (a), which reports n - max |V_i|.
    """
    ex = {"b": 16, "e": 32, "f": 16}
    if log_exponents:
        ex.update(log_exponents)
    s, n = p.s, p.n
    sizes = [len(P[i]) for i in (1, 2, 3)]
    V1 = max(sizes[0], 1)
    out = {}
    out["a"] = (max(sizes) <= n, n - max(sizes))
    need_b = p.K * n ** (3 - 3 / s) * log_factor(n, ex["b"])
    out["b"] = (H.m >= need_b, H.m / need_b)
    cap_c = p.ell * V1 ** (2 - 1 / s)
    ms = {ij: pair_support(H, P, *ij).m_ij for ij in ((1, 2), (1, 3), (2, 3))}
    worst_c = max(ms.values()) if ms else 0
    out["c"] = (worst_c <= cap_c, cap_c / worst_c if worst_c else math.inf)
    lo, hi = 1 / p.delta, p.delta * p.K ** ((s - 1) / (2 * s - 3))
    out["d"] = (lo <= p.ell <= hi, min(p.ell / lo, hi / p.ell))
    margin_e = math.inf
    for ij, mij in ms.items():
        if not mij:
            continue
        cnt = Counter()
        for e in H.edges:
            cnt[tuple(v for v in e if P.part_of(v) in ij)] += 1
        cap = p.K * n ** (3 - 3 / s) / mij * log_factor(n, ex["e"])
        margin_e = min(margin_e, cap / max(cnt.values()))
    out["e"] = (margin_e >= 1, margin_e)
    nb = defaultdict(set)
    for e in H.edges:
        a = next(v for v in e if P.part_of(v) == 1)
        b = next(v for v in e if P.part_of(v) == 2)
        nb[a].add(b)
    worst_f = max((len(x) for x in nb.values()), default=0)
    cap_f = p.ell * V1 ** (1 - 1 / s) * log_factor(n, ex["f"])
    out["f"] = (worst_f <= cap_f, cap_f / worst_f if worst_f else math.inf)
    return out


def sparse_collection(
    H: Hypergraph,
    P: Tripartition,
    p: PhiParams,
    target: Optional[int] = None,
    seed: int = 0,
    permissive: bool = False,
    degree_floor: Optional[float] = None,
    star_floor: Optional[float] = None,
    max_rounds: int = 20,
    candidate_limit: int = 20000,
    log_exponents: Optional[dict] = None,
) -> SparseResult:
    """Greedy maximal phi-bounded collection of (1, s-1, t)-split K_{s,t}'s in the 2-shadow.

    Stops at ``target`` copies (status ``target``) or when a round adds
    nothing: status ``maximal`` if no target was set and some copy was found,
    ``stall`` otherwise. ``permissive`` lowers both degree floors to 1.
    """
    if H.r != 3:
        raise ParameterError("sparse_collection needs a 3-graph")
    for e in H.edges:
        if not P.is_rainbow(e):
            raise StructuralError(f"edge {e} is not rainbow for the tripartition")
    s, t = p.s, p.t
    if degree_floor is None:
        degree_floor = 1.0 if permissive else default_degree_floor(p)
    if star_floor is None:
        star_floor = 1.0 if permissive else default_star_floor(p)
    G = shadow(H, 2)
    coll = CopyCollection(G, PatternSpec("kst", s, t))
    phi_fn = PhiFunction(p, P)
    F = SaturatedFamily(phi_fn)
    rng = random.Random(seed)
    conditions = condition_report(H, P, p, log_exponents)
    tri0 = None
    rounds = 0
    status = "stall"
    while rounds < max_rounds:
        rounds += 1
        Gp = good_subgraph(H, F)
        if tri0 is None:
            tri0 = Gp.triangles
        stars = build_stars(Gp, H, P, F, p, degree_floor, limit=candidate_limit)
        cands = complete_kst(stars, F, p, star_floor, limit=candidate_limit, order_rng=rng)
        added = 0
        for S, R in cands:
            if (S, R) in coll:
                continue
            if not F.is_good(S + R):
                continue
            coll.add((S, R))
            F.add_copy(S + R)
            added += 1
            if target is not None and len(coll) >= target:
                break
        if target is not None and len(coll) >= target:
            status = "target"
            break
        if added == 0:
            # nothing admissible is left: a maximal collection when no
            # target was asked for, otherwise a stall short of the target
            status = "maximal" if target is None and len(coll) else "stall"
            break
    report = check_phi_bounded(coll, phi_fn)
    target_formula = p.M * log_factor(p.n, -16) if p.n > 1 else p.M
    return SparseResult(
        coll, F, p, status, rounds, target, target_formula, conditions, report, F.link_stats, tri0 or 0, (degree_floor, star_floor)
    )


def desk_phi_params(
    H: Hypergraph,
    P: Tripartition,
    s: int,
    t: int,
    delta: float = 0.5,
    phi_floor: float = 1.0,
    n: Optional[float] = None,
) -> PhiParams:
    """Parameters for small hosts chosen so phi is monotone and >= phi_floor on feasible profiles.

    With m = max(m13, m23), ell is set so that the smallest feasible value
    ell n^(2-1/s) / (delta^(s+t-1) m) equals ``phi_floor``; K is the least
    value making both step factors at least 1.
    """
    if n is None:
        n = max(2, max(len(P[i]) for i in (1, 2, 3)))
    m13 = max(1, pair_support(H, P, 1, 3).m_ij)
    m23 = max(1, pair_support(H, P, 2, 3).m_ij)
    m = max(m13, m23)
    ell = phi_floor * (1 + 1e-9) * delta ** (s + t - 1) * m / n ** (2 - 1 / s)
    K_B = (ell ** (2 * s - 3) / delta) ** (1 / (s - 1)) if s > 1 else 1.0
    K_A = ell * n ** (2 / s - 1) / delta
    K = max(K_A, K_B) * (1 + 1e-12)
    return PhiParams(s, t, delta, ell, K, n, m13, m23, delta_max=max(delta, 0.5))
