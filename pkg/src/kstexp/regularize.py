"""Degree regularization of tripartite 3-graphs and per-class degree bounds.

The regularizer repeatedly buckets the supported sets of one index pattern
by the dyadic class of their degree and keeps only the edges whose set lies
in the most popular class. Patterns are visited round-robin until every
pattern's degree spread is within the target ratio.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional

from .errors import InconsistencyError, ParameterError, StructuralError
from .hypergraph import Hypergraph, Tripartition

__all__ = [
    "PATTERN_ORDER",
    "RegularizedSubgraph",
    "PairBound",
    "DegreeBounds",
    "regularize",
    "pattern_degrees",
    "degree_bounds",
    "vertex_degree_bounds",
    "log_factor",
    "observed_degree_bounds",
]

PATTERN_ORDER = ((1, 2), (1, 3), (2, 3), (1,), (2,), (3,))
PAIR_CLASSES = ((1, 2), (1, 3), (2, 3))


def log_factor(n: float, exponent: float, multiplier: float = 12.0) -> float:
    """(multiplier * ln n) ** exponent."""
    return (multiplier * math.log(n)) ** exponent


def pattern_degrees(H: Hypergraph, P: Tripartition, pattern: tuple) -> tuple[Counter, list]:
    """Degrees of the sets S = e ∩ (union of parts in pattern), and each edge's S."""
    keys = []
    for e in H.edges:
        keys.append(tuple(v for v in e if P.part_of(v) in pattern))
    return Counter(keys), keys


@dataclass
class RegularizationStep:
    round: int
    pattern: tuple
    histogram: dict
    kept_class: int
    classes: int
    edges_before: int
    edges_after: int

    @property
    def factor(self) -> float:
        return 1.0 / self.classes


@dataclass
class RegularizedSubgraph:
    subgraph: Hypergraph
    tripartition: Tripartition
    delta: dict
    lam: dict
    min_degree: dict
    retained_fraction: float
    regular: bool
    lam_target: float
    rounds: int
    steps: list = field(default_factory=list)
    original_size: int = 0

    def guaranteed_fraction(self) -> float:
        """Product over bucketing steps of 1/(number of nonempty classes)."""
        out = 1.0
        for st in self.steps:
            out *= st.factor
        return out

    def log_text(self) -> str:
        lines = [f"regularize: |H|={self.original_size} target_ratio={self.lam_target!r}"]
        for st in self.steps:
            hist = " ".join(f"{c}:{ns}/{ne}" for c, (ns, ne) in sorted(st.histogram.items()))
            lines.append(
                f"round {st.round} pattern {''.join(map(str, st.pattern))} classes [{hist}] "
                f"keep {st.kept_class} edges {st.edges_before}->{st.edges_after} factor 1/{st.classes}"
            )
        for pat in PATTERN_ORDER:
            if pat in self.delta:
                lines.append(
                    f"pattern {''.join(map(str, pat))} delta {self.delta[pat]} min {self.min_degree[pat]} ratio {self.lam[pat]!r}"
                )
        lines.append(f"retained_fraction {self.retained_fraction!r}")
        lines.append(f"guaranteed_fraction {self.guaranteed_fraction()!r}")
        lines.append(f"regular {'yes' if self.regular else 'no'}")
        return "\n".join(lines) + "\n"


def _summary(H, P):
    delta, lam, low = {}, {}, {}
    for pat in PATTERN_ORDER:
        cnt, _ = pattern_degrees(H, P, pat)
        if cnt:
            hi, lo = max(cnt.values()), min(cnt.values())
            delta[pat], low[pat], lam[pat] = hi, lo, hi / lo
    return delta, lam, low


def regularize(H: Hypergraph, P: Tripartition, lam_target: float = 2.0, max_rounds: int = 50) -> RegularizedSubgraph:
    """Dyadic-bucketing regularization; deterministic.

    Returns the best-so-far subgraph flagged ``regular=False`` if some
    pattern is still irregular after ``max_rounds`` rounds.
    """
    if H.r != 3:
        raise ParameterError("regularize needs a 3-graph")
    if lam_target < 2:
        raise ParameterError(f"target ratio must be at least 2, got {lam_target}")
    if H.m == 0:
        raise StructuralError("cannot regularize an empty hypergraph")
    for e in H.edges:
        if not P.is_rainbow(e):
            raise StructuralError(f"edge {e} is not rainbow for the tripartition")
    cur = H
    steps = []
    rounds = 0
    regular = False
    while rounds < max_rounds:
        rounds += 1
        changed = False
        for pat in PATTERN_ORDER:
            cnt, keys = pattern_degrees(cur, P, pat)
            if max(cnt.values()) <= lam_target * min(cnt.values()):
                continue
            hist = defaultdict(lambda: [0, 0])
            for S, d in cnt.items():
                c = d.bit_length() - 1
                hist[c][0] += 1
                hist[c][1] += d
            kept = max(sorted(hist), key=lambda c: hist[c][1])
            keep_ids = [i for i, S in enumerate(keys) if cnt[S].bit_length() - 1 == kept]
            steps.append(
                RegularizationStep(rounds, pat, {c: tuple(v) for c, v in hist.items()}, kept, len(hist), cur.m, len(keep_ids))
            )
            if len(keep_ids) < cur.m:
                cur = cur.subgraph(keep_ids)
                changed = True
        if not changed:
            regular = True
            break
    if not regular:
        # the last round may have changed things; recheck directly
        delta, lam, _ = _summary(cur, P)
        regular = all(v <= lam_target for v in lam.values())
    delta, lam, low = _summary(cur, P)
    return RegularizedSubgraph(
        subgraph=cur,
        tripartition=P,
        delta=delta,
        lam=lam,
        min_degree=low,
        retained_fraction=cur.m / H.m,
        regular=regular,
        lam_target=lam_target,
        rounds=rounds,
        steps=steps,
        original_size=H.m,
    )


@dataclass(frozen=True)
class PairBound:
    d_formula: float
    D_formula: float
    d: float
    D: float
    observed_min: int
    observed_max: int
    pairs: int


@dataclass
class DegreeBounds:
    classes: dict

    def __getitem__(self, ij):
        return self.classes[tuple(sorted(ij))]

    def __contains__(self, ij):
        return tuple(sorted(ij)) in self.classes

    def lower(self, ij) -> float:
        return self[ij].d

    def upper(self, ij) -> float:
        return self[ij].D


def _pair_class_degrees(H: Hypergraph, P: Tripartition, ij: tuple) -> Counter:
    cnt, _ = pattern_degrees(H, P, ij)
    return cnt


def degree_bounds(
    R: RegularizedSubgraph,
    k: float,
    n: float,
    m: dict,
    s: int,
    log_lo: float = -16,
    log_hi: float = 8,
    log_multiplier: float = 12.0,
) -> DegreeBounds:
    """Per pair class bounds d <= deg(e) <= D.

    The formula values are k n^(3-3/s) / m_ij * (12 ln n)^(lo|hi). The
    clamped values used downstream are the observed minimum and maximum pair
    degrees in the regularized subgraph, which always satisfy the sandwich.
    """
    H, P = R.subgraph, R.tripartition
    out = {}
    for ij in PAIR_CLASSES:
        cnt = _pair_class_degrees(H, P, ij)
        mij = m.get(ij, 0)
        if not cnt:
            continue
        if mij <= 0:
            raise InconsistencyError(f"class {ij} has {len(cnt)} supported pairs but m={mij}")
        base = k * n ** (3 - 3 / s) / mij
        lo, hi = min(cnt.values()), max(cnt.values())
        out[ij] = PairBound(
            d_formula=base * log_factor(n, log_lo, log_multiplier),
            D_formula=base * log_factor(n, log_hi, log_multiplier),
            d=float(lo),
            D=float(hi),
            observed_min=lo,
            observed_max=hi,
            pairs=len(cnt),
        )
    return DegreeBounds(out)


def vertex_degree_bounds(R: RegularizedSubgraph, k: float, n: float, s: int, log_hi: float = 8, log_multiplier: float = 12.0) -> dict:
    """For each part i: (formula bound k n^(3-3/s)/|V_i| (12 ln n)^hi, observed max degree)."""
    H, P = R.subgraph, R.tripartition
    out = {}
    for i in (1, 2, 3):
        size = len(P[i])
        if size == 0:
            continue
        cnt, _ = pattern_degrees(H, P, (i,))
        bound = k * n ** (3 - 3 / s) / size * log_factor(n, log_hi, log_multiplier)
        out[i] = (bound, max(cnt.values()) if cnt else 0)
    return out


def observed_degree_bounds(H: Hypergraph, P: Tripartition) -> DegreeBounds:
    """Bounds taken straight from the observed pair degrees of ``H``.

    Useful when ``H`` is used as-is (no regularization); the formula fields
    are set equal to the observed values.
    """
    out = {}
    for ij in PAIR_CLASSES:
        cnt = _pair_class_degrees(H, P, ij)
        if not cnt:
            continue
        lo, hi = min(cnt.values()), max(cnt.values())
        out[ij] = PairBound(float(lo), float(hi), float(lo), float(hi), lo, hi, len(cnt))
    return DegreeBounds(out)
