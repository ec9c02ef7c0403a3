"""End-to-end production of a K_{s,t}^{(3)} collection with a codegree certificate.

Stages: tripartite restriction, regularization, part sorting, the
dense/sparse case split on the pair supports, the matching graph-level
construction, translation into expansion copies and finally the
certificate. Every stage's measurements end up in one report dict.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from math import comb, factorial, perm
from typing import Optional

from .copies import CopyCollection, PatternSpec, enumerate_expansion_copies, is_kst_expansion
from .dense import audit_caps, dense_collection
from .errors import ParameterError, ResourceError
from .hypergraph import Hypergraph, Tripartition, pair_support, restrict_tripartite, shadow
from .params import tau_technical
from .regularize import degree_bounds, log_factor, regularize
from .sparse import PhiParams, desk_phi_params, sparse_collection
from .translate import certify_translation, extend_copies

__all__ = [
    "PipelineParams",
    "CaseDecision",
    "decide_case",
    "naive_pair_counts",
    "Certificate",
    "certify",
    "PipelineResult",
    "run_pipeline",
    "CountReport",
    "count_check",
    "labelled_copy_count",
    "automorphisms",
    "complete_graph",
    "sampled_count",
]

CLASSES = ((1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class PipelineParams:
    s: int
    t: int
    n: Optional[int] = None
    k: Optional[float] = None
    ell: Optional[float] = None
    k0: float = 1.0
    delta: float = 1e-3
    kappa: float = 1.0
    c: float = 1e-3
    lam_target: float = 2.0
    log_multiplier: float = 12.0
    log_exponents: dict = field(default_factory=dict)
    budget: int = 10**4
    max_bases: int = 200
    permissive: bool = False
    sparse_params: str = "desk"
    phi_floor: float = 1.0
    depth: int = 3
    gamma_threshold: Optional[float] = None

    def __post_init__(self):
        if self.s < 2 or self.t < self.s:
            raise ParameterError(f"needs 2 <= s <= t, got s={self.s}, t={self.t}")
        if self.sparse_params not in ("desk", "formula"):
            raise ParameterError(f"sparse_params must be 'desk' or 'formula', got {self.sparse_params!r}")
        if self.depth < 1:
            raise ParameterError("certificate depth must be positive")

    def resolved(self, H: Hypergraph) -> "PipelineParams":
        """Fill n, k and ell from the host: n = |V(H)|, k = |H| n^(-3+3/s), ell = k0."""
        n = self.n if self.n is not None else H.n
        if n < 2:
            raise ParameterError("host needs at least two vertices")
        k = self.k if self.k is not None else H.m / n ** (3 - 3 / self.s)
        ell = self.ell if self.ell is not None else self.k0
        d = asdict(self)
        d.update(n=n, k=k, ell=ell)
        return PipelineParams(**d)

    def checks(self) -> dict:
        """k0 <= ell <= k^(1/3), s >= 3, and the codegree side condition ell >= k^(1/2) n^(-1/s)."""
        out = {"s>=3": self.s >= 3}
        if self.k is None or self.ell is None or self.n is None:
            return out
        hi = self.k ** (1 / 3) if self.k > 0 else 0.0
        out["k0<=ell"] = self.k0 <= self.ell
        out["ell<=k^(1/3)"] = self.ell <= hi
        out["ell>=k^(1/2)n^(-1/s)"] = self.ell >= math.sqrt(max(self.k, 0)) * self.n ** (-1 / self.s)
        return out

    def tau(self) -> float:
        return tau_technical(self.ell, self.k, self.n, self.s, self.t).value

    def exponent(self, name: str, default: float) -> float:
        return float(self.log_exponents.get(name, default))


@dataclass
class CaseDecision:
    branch: str
    pair: Optional[tuple]
    L: Optional[float]
    m: dict
    thresholds: dict
    sizes: tuple

    def as_dict(self) -> dict:
        return {
            "branch": self.branch,
            "pair": list(self.pair) if self.pair else None,
            "L": self.L,
            "m": {f"{i}{j}": v for (i, j), v in sorted(self.m.items())},
            "thresholds": {f"{i}{j}": v for (i, j), v in sorted(self.thresholds.items())},
            "sizes": list(self.sizes),
        }


def decide_case(H: Hypergraph, P: Tripartition, s: int, ell: float) -> CaseDecision:
    """Dense branch iff some m_ij >= ell |V_i|^(2-1/s); the largest L = m_ij / |V_i|^(2-1/s) wins."""
    m = {ij: pair_support(H, P, *ij).m_ij for ij in CLASSES}
    thr, Ls = {}, {}
    for i, j in CLASSES:
        base = len(P[i]) ** (2 - 1 / s)
        thr[(i, j)] = ell * base
        Ls[(i, j)] = m[(i, j)] / base if base else 0.0
    dense = [ij for ij in CLASSES if m[ij] > 0 and m[ij] >= thr[ij]]
    if dense:
        best = max(dense, key=lambda ij: (Ls[ij], tuple(-x for x in ij)))
        return CaseDecision("dense", best, Ls[best], m, thr, P.sizes())
    return CaseDecision("sparse", None, None, m, thr, P.sizes())


def naive_pair_counts(H: Hypergraph, P: Tripartition) -> dict:
    """m_ij by scanning every cross pair of vertices against the edge list."""
    edges = [set(e) for e in H.edges]
    out = {}
    for i, j in CLASSES:
        cnt = 0
        for a in sorted(P[i]):
            for b in sorted(P[j]):
                if any(a in e and b in e for e in edges):
                    cnt += 1
        out[(i, j)] = cnt
    return out


# ---------------------------------------------------------------- certificate


@dataclass
class Certificate:
    copies: int
    host_edges: int
    tau: float
    checked: int
    invalid_copies: int
    gamma: float
    witness: Optional[tuple]
    witness_degree: int
    threshold: Optional[float]

    @property
    def status(self) -> str:
        if self.invalid_copies:
            return "fail"
        if self.copies == 0:
            return "vacuous"
        if self.threshold is None:
            return "report-only"
        return "pass" if self.gamma <= self.threshold else "fail"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "copies": self.copies,
            "host_edges": self.host_edges,
            "tau": self.tau,
            "sigma_checked": self.checked,
            "invalid_copies": self.invalid_copies,
            "gamma": self.gamma,
            "witness": list(self.witness) if self.witness else None,
            "witness_degree": self.witness_degree,
            "threshold": self.threshold,
        }


def sigma_ratio(tau: float, m: int, size: int, deg: int, copies: int) -> float:
    """(tau/m)^(1-|sigma|) deg(sigma) divided by |C|/v(C), with v(C) = m."""
    return (tau / m) ** (1 - size) * deg * m / copies


def certify(H: Hypergraph, C: CopyCollection, tau: float, depth: int = 3, threshold: Optional[float] = None) -> Certificate:
    """Measure gamma = max over sigma of (tau/|H|)^(1-|sigma|) deg(sigma) / (|C|/|H|).

    sigma ranges over nonempty sets of at most ``depth`` host edges inside
    some copy; every copy is also re-validated as a K_{s,t}^{(3)}. Depends
    only on the host, the collection and tau.
    """
    if C.host.digest() != H.digest():
        raise ParameterError("collection was built on a different host")
    p = C.pattern
    invalid = sum(1 for cp in C.copies if not is_kst_expansion([H.edges[e] for e in cp], p.s, p.t, p.r))
    cnt = Counter()
    for sup in C.supports("edge"):
        for k in range(1, min(depth, len(sup)) + 1):
            cnt.update(combinations(sup, k))
    gamma, wit, wdeg = 0.0, None, 0
    for sig in sorted(cnt):
        r = sigma_ratio(tau, H.m, len(sig), cnt[sig], len(C))
        if r > gamma:
            gamma, wit, wdeg = r, sig, cnt[sig]
    return Certificate(len(C), H.m, tau, len(cnt), invalid, gamma, wit, wdeg, threshold)


# ---------------------------------------------------------------- pipeline


@dataclass
class PipelineResult:
    collection: CopyCollection
    decision: Optional[CaseDecision]
    certificate: Certificate
    report: dict
    status: str
    base_collection: Optional[CopyCollection] = None

    @property
    def flagged(self) -> bool:
        return self.status != "ok"

    def report_json(self) -> str:
        return json.dumps(self.report, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, (set, frozenset, tuple)):
        return sorted(x) if isinstance(x, (set, frozenset)) else list(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return str(x)


def _finite(x):
    return x if isinstance(x, (int, float)) and math.isfinite(x) else str(x)


def _log_M_dense(p: PipelineParams, Vi: int) -> float:
    s, t, k, n = p.s, p.t, p.k, p.n
    return (
        s * t * math.log(k)
        + (3 * s * t - 3 * t) * math.log(n)
        + (s + t - 2 * s * t) * math.log(Vi)
        - math.log(k)
        + (-3 + 3 / s) * math.log(n)
    )


def _log_M_sparse(p: PipelineParams, m13: int, m23: int) -> float:
    s, t, k, n, ell = p.s, p.t, p.k, p.n, p.ell
    inner = (3 - 2 * s) * math.log(ell) + (2 * s - 1) * math.log(k) + (3 * s - 3) * math.log(n) - math.log(m13) - (s - 1) * math.log(m23)
    return (s - 1) * math.log(ell) + (s - 1 + 1 / s) * math.log(n) + t * inner - math.log(k) + (-3 + 3 / s) * math.log(n)


def _to_host_ids(C: CopyCollection, sub: Hypergraph, H: Hypergraph) -> CopyCollection:
    """Re-index expansion copies from a subgraph's edge ids to the host's."""
    ids = H.edge_id
    out = CopyCollection(H, C.pattern)
    for cp in C.copies:
        out.add(tuple(sorted(ids[sub.edges[e]] for e in cp)), validate=False)
    return out


def run_pipeline(H: Hypergraph, params: PipelineParams, seed: int = 0) -> PipelineResult:
    """Run every stage and certify the resulting K_{s,t}^{(3)} collection on ``H``."""
    if H.r != 3:
        raise ParameterError("run_pipeline needs a 3-graph")
    p = params.resolved(H)
    s, t = p.s, p.t
    pattern = PatternSpec("expansion", s, t, 3)
    report: dict = {
        "params": {k: _finite(v) if not isinstance(v, dict) else v for k, v in asdict(p).items()},
        "checks": p.checks(),
        "host": {"n": H.n, "edges": H.m, "digest": H.digest()},
        "seed": seed,
    }
    status = "ok"
    empty = CopyCollection(H, pattern)
    if H.m == 0:
        cert = certify(H, empty, 1.0, p.depth, p.gamma_threshold)
        report.update(status="flagged", reason="empty host", certificate=cert.as_dict())
        return PipelineResult(empty, None, cert, report, "flagged")
    tau = p.tau() if p.k > 0 else math.inf

    H3, P0 = restrict_tripartite(H, seed=seed)
    report["restrict"] = {"edges": H3.m, "fraction": H3.m / H.m, "sizes": list(P0.sizes())}
    if H3.m == 0:
        cert = certify(H, empty, tau, p.depth, p.gamma_threshold)
        report.update(status="flagged", reason="no rainbow edges", certificate=cert.as_dict())
        return PipelineResult(empty, None, cert, report, "flagged")
    R = regularize(H3, P0, p.lam_target)
    P, order = R.tripartition.sorted_by_size()
    Hr = R.subgraph
    report["regularize"] = {
        "edges": Hr.m,
        "retained_fraction": R.retained_fraction,
        "guaranteed_fraction": R.guaranteed_fraction(),
        "regular": R.regular,
        "rounds": R.rounds,
        "part_order": list(order),
    }
    Rs = replace(R, tripartition=P)
    dec = decide_case(Hr, P, s, p.ell)
    naive = naive_pair_counts(Hr, P)
    report["case"] = dec.as_dict()
    report["case"]["naive_agrees"] = naive == dec.m
    m = dec.m
    D = degree_bounds(Rs, p.k, p.n, m, s, p.exponent("d_lo", -16), p.exponent("d_hi", 8), p.log_multiplier)
    report["degree_bounds"] = {
        f"{i}{j}": {"d": b.d, "D": b.D, "d_formula": b.d_formula, "D_formula": b.D_formula} for (i, j), b in sorted(D.classes.items())
    }

    base = None
    if dec.branch == "dense":
        i, j = dec.pair
        G_ij = Hypergraph(2, Hr.n, pair_support(Hr, P, i, j).pairs)
        # V_j is the smaller side by the size ordering
        U, V = P[j], P[i]
        if len(U) < s or len(V) < t:
            report["dense"] = {"status": "undersized", "reason": "sides too small"}
            base = CopyCollection(G_ij, PatternSpec("kst", s, t))
            status = "flagged"
        else:
            res = dense_collection(G_ij, U, V, s, t, p.kappa, p.c, p.k0, seed)
            base = res.collection
            audit = audit_caps(base, res.caps, res.U)
            report["dense"] = {
                "status": res.status,
                "copies": len(base),
                "target": res.target,
                "L": res.caps.L,
                "L>=L0": res.L_ok,
                "cap_audit_violations": len(audit),
                "s_sides_in_smaller_part": all(set(left) <= res.U for left, _ in base.copies),
            }
            if res.status != "complete":
                status = "flagged"
        c = {(i, j): s * t}
        log_M = _log_M_dense(p, len(P[i]))
    else:
        m13, m23 = max(m[(1, 3)], 1), max(m[(2, 3)], 1)
        if p.sparse_params == "desk":
            phi_p = desk_phi_params(Hr, P, s, t, delta=min(max(p.delta, 1e-9), 0.999), phi_floor=p.phi_floor, n=p.n)
        else:
            K = p.k * log_factor(p.n, -24, p.log_multiplier)
            phi_p = PhiParams(s, t, p.delta, p.ell, K, p.n, m13, m23)
        res = sparse_collection(Hr, P, phi_p, seed=seed, permissive=p.permissive, log_exponents=p.log_exponents or None)
        base = res.collection
        report["sparse"] = {
            "status": res.status,
            "copies": len(base),
            "phi_bounded": res.phi_report.passed,
            "phi_worst_ratio": res.phi_report.worst_ratio,
            "link_violations": len(res.link_stats.violations),
            "floor_regime": phi_p.floor_regime(),
            "conditions": {k: [ok, _finite(mg)] for k, (ok, mg) in res.conditions.items()},
            "phi_params": {k: _finite(v) for k, v in asdict(phi_p).items()},
        }
        if res.status not in ("maximal", "target"):
            status = "flagged"
        c = {(1, 3): t, (2, 3): (s - 1) * t}
        log_M = _log_M_sparse(p, m13, m23)

    bases = range(min(len(base), p.max_bases))
    tr = extend_copies(Hr, P, base, c, D, budget=p.budget, bases=bases)
    tcert = certify_translation(tr, base, D, P, depth=p.depth)
    report["translate"] = {
        "bases_used": len(bases),
        "bases_total": len(base),
        "successful_bases": tr.successful_bases,
        "copies": len(tr.collection),
        "truncated_bases": sum(1 for o in tr.outcomes if o.truncated),
        "certificate_passed": tcert.passed,
        "certificate_checked": tcert.checked,
        "certificate_worst_ratio": tcert.worst_ratio,
        "degree_precondition": {f"{i}{j}": list(v) for (i, j), v in sorted(tr.precondition.items())},
    }
    coll = _to_host_ids(tr.collection, Hr, H)
    cert = certify(H, coll, tau, p.depth, p.gamma_threshold)
    report["certificate"] = cert.as_dict()
    vC = H.m
    M = math.exp(log_M) if log_M < 700 else math.inf
    report["bookkeeping"] = {
        "M": _finite(M),
        "size_over_v": len(coll) / vC,
        "ratio_to_M": _finite(len(coll) / vC / M) if M > 0 else "inf",
        "M_kind": "dense" if dec.branch == "dense" else "sparse (m13 form)",
    }
    if len(coll) == 0 or not tcert.passed or cert.status == "fail":
        status = "flagged"
    report["status"] = status
    return PipelineResult(coll, dec, cert, report, status, base)


# ---------------------------------------------------------------- counting


def automorphisms(s: int, t: int, r: int = 3) -> int:
    """|Aut(K_{s,t}^{(r)})| = s! t! (2 if s == t) ((r-2)!)^(st) for s, t >= 2.

    With a side of size 1 the expansion is a sunflower (a single edge when
    s = t = 1) and the degree-1 core vertices mix with the extension vertices.
    """
    if min(s, t) == 1:
        k = max(s, t)
        return factorial(r) if k == 1 else factorial(k) * factorial(r - 1) ** k
    return factorial(s) * factorial(t) * (2 if s == t else 1) * factorial(r - 2) ** (s * t)


def labelled_copy_count(n: int, s: int, t: int, r: int = 3) -> int:
    """Copies of K_{s,t}^{(r)} in the complete r-graph on n vertices."""
    v = s + t + (r - 2) * s * t
    if n < v:
        return 0
    return perm(n, v) // automorphisms(s, t, r)


@dataclass
class CountReport:
    n: int
    m: int
    s: int
    t: int
    count: float
    method: str
    reference: float
    ratio: float
    flags: list = field(default_factory=list)
    samples: int = 0
    hits: int = 0

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "s": self.s,
            "t": self.t,
            "count": self.count,
            "method": self.method,
            "reference": self.reference,
            "ratio": self.ratio,
            "flags": list(self.flags),
            "samples": self.samples,
            "hits": self.hits,
        }


def _expansion_template(s: int, t: int) -> list:
    """Edges of K_{s,t}^{(3)} on vertices 0..s+t+st-1."""
    edges = []
    x = s + t
    for a in range(s):
        for b in range(t):
            edges.append((a, s + b, x))
            x += 1
    return edges


def sampled_count(H: Hypergraph, s: int, t: int, samples: int, seed: int = 0) -> tuple:
    """Estimate the copy count by sampling injective maps of the pattern into V(H).

    Returns (estimate, hits). The estimate is (#injective maps) * hit rate / |Aut|.
    """
    rng = random.Random(seed)
    template = _expansion_template(s, t)
    v = s + t + s * t
    if H.n < v:
        return 0.0, 0
    eset = set(H.edges)
    hits = 0
    verts = list(range(H.n))
    for _ in range(samples):
        img = rng.sample(verts, v)
        if all(tuple(sorted(img[x] for x in e)) in eset for e in template):
            hits += 1
    return perm(H.n, v) * hits / samples / automorphisms(s, t, 3), hits


def count_check(H: Hypergraph, s: int, t: int, budget: int = 10**6, samples: int = 2000, seed: int = 0) -> CountReport:
    """Copy count of K_{s,t}^{(3)} in H against the reference m^(st) n^(s+t-2st).

    Exact enumeration first; when the budget runs out the count is a
    sampled estimate (flagged ``estimated``).
    """
    if H.r != 3:
        raise ParameterError("count_check needs a 3-graph")
    n, m = H.n, H.m
    ref = float(m) ** (s * t) * float(n) ** (s + t - 2 * s * t) if n > 0 else 0.0
    flags = []
    v = s + t + s * t
    if n < v:
        flags.append("infeasible host")
        return CountReport(n, m, s, t, 0, "infeasible", ref, 0.0, flags)
    try:
        C = enumerate_expansion_copies(H, s, t, budget=budget)
        count, method, hits, used = float(len(C)), "enumerated", len(C), 0
    except ResourceError:
        flags.append("estimated")
        count, hits = sampled_count(H, s, t, samples, seed)
        method, used = "sampled", samples
    ratio = count / ref if ref > 0 else math.inf
    return CountReport(n, m, s, t, count, method, ref, ratio, flags, used, hits)


def complete_graph(n: int, r: int = 3) -> Hypergraph:
    return Hypergraph(r, n, combinations(range(n), r))

