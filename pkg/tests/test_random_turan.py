import csv
import io
import math
import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from kstexp.copies import enumerate_expansion_copies
from kstexp.errors import ParameterError, ResourceError
from kstexp.hypergraph import Hypergraph
from kstexp.pipeline import complete_graph, labelled_copy_count
from kstexp.random_turan import (
    CSV_COLUMNS,
    exact_ex,
    expected_copies,
    greedy_ex,
    min_hitting_set,
    records_csv,
    run_experiment,
    sample_gnp,
    summary_json,
)

from hosts import exhaustive_ex, naive_expansion_copies, planted_expansion, random_hypergraph


def _brute_hitting(sets):
    elems = sorted({x for s in sets for x in s})
    for k in range(len(elems) + 1):
        for cand in combinations(elems, k):
            c = set(cand)
            if all(c & set(s) for s in sets):
                return k
    return None


class TestSample:
    def test_extremes(self):
        assert sample_gnp(8, 3, 0.0, 1).m == 0
        H = sample_gnp(8, 3, 1.0, 1)
        assert H == complete_graph(8)

    def test_bad_p(self):
        with pytest.raises(ParameterError):
            sample_gnp(5, 3, 1.5)

    def test_deterministic(self):
        assert sample_gnp(12, 3, 0.3, 7) == sample_gnp(12, 3, 0.3, 7)
        assert sample_gnp(12, 3, 0.3, 7) != sample_gnp(12, 3, 0.3, 8)

    def test_mean_edge_count(self):
        N, trials = 120, 1000
        counts = [sample_gnp(10, 3, 0.5, seed).m for seed in range(trials)]
        mean = sum(counts) / trials
        sigma = math.sqrt(N * 0.25 / trials)
        assert abs(mean - 60) <= 3 * sigma

    @settings(max_examples=30)
    @given(st.integers(0, 10**6), st.floats(0, 1), st.floats(0, 1))
    def test_coupling(self, seed, a, b):
        lo, hi = min(a, b), max(a, b)
        small, big = sample_gnp(9, 3, lo, seed), sample_gnp(9, 3, hi, seed)
        assert set(small.edges) <= set(big.edges)


class TestHittingSet:
    @settings(max_examples=60)
    @given(st.lists(st.sets(st.integers(0, 9), min_size=1, max_size=4), min_size=0, max_size=10))
    def test_matches_brute(self, sets):
        hs = min_hitting_set([tuple(s) for s in sets])
        assert all(set(hs) & s for s in sets)
        assert len(hs) == _brute_hitting(sets)

    def test_empty_member_rejected(self):
        with pytest.raises(ParameterError):
            min_hitting_set([(1,), ()])

    def test_budget(self):
        rng = random.Random(0)
        sets = [tuple(rng.sample(range(40), 4)) for _ in range(80)]
        with pytest.raises(ResourceError):
            min_hitting_set(sets, budget=5)


class TestExactEx:
    def test_free_host(self):
        H = Hypergraph(3, 9, [(0, 1, 2), (3, 4, 5), (6, 7, 8)])
        res = exact_ex(H, 2, 2)
        assert res.value == H.m and res.copies == 0

    def test_single_planted(self):
        H = planted_expansion(2, 2, 10)
        res = exact_ex(H, 2, 2)
        assert res.value == H.m - 1

    def test_matches_exhaustive(self):
        for seed in range(6):
            H = random_hypergraph(8, 3, 12 + seed, random.Random(seed))
            oracle = naive_expansion_copies(H, 2, 2)
            res = exact_ex(H, 2, 2)
            assert res.value == exhaustive_ex(H, oracle)
            assert res.subgraph.m == res.value
            assert len(enumerate_expansion_copies(res.subgraph, 2, 2)) == 0
            assert res.lower == res.upper == res.value

    def test_complete_small(self):
        # K_{1,2}^{(3)}: two edges meeting in exactly one vertex
        H = complete_graph(5)
        res = exact_ex(H, 1, 2)
        assert res.value == exhaustive_ex(H, naive_expansion_copies(H, 1, 2)) == 4

    def test_greedy_bounds(self):
        H = random_hypergraph(9, 3, 40, random.Random(3))
        copies = [tuple(c) for c in enumerate_expansion_copies(H, 2, 2).copies]
        g = greedy_ex(H, copies)
        exact = exact_ex(H, 2, 2)
        assert g.lower <= exact.value <= g.upper
        assert len(enumerate_expansion_copies(g.subgraph, 2, 2)) == 0

    def test_budget_falls_back(self):
        H = complete_graph(8)
        res = exact_ex(H, 2, 2, budget=50)
        assert res.method == "greedy"
        assert res.lower <= res.upper
        assert len(enumerate_expansion_copies(res.subgraph, 2, 2)) == 0


class TestExpectedCopies:
    def test_p_one_is_labelled_count(self):
        for n in (8, 9, 10):
            assert expected_copies(n, 2, 2, 3, 1) == labelled_copy_count(n, 2, 2)

    def test_exact_value(self):
        assert expected_copies(8, 2, 2, 3, Fraction(1, 2)) == Fraction(5040, 16)

    def test_empirical_mean(self):
        n, p, trials = 9, 0.3, 200
        counts = [len(enumerate_expansion_copies(sample_gnp(n, 3, p, seed), 2, 2)) for seed in range(trials)]
        mean = sum(counts) / trials
        var = sum((c - mean) ** 2 for c in counts) / (trials - 1)
        want = float(expected_copies(n, 2, 2, 3, Fraction(3, 10)))
        assert abs(mean - want) <= 3 * math.sqrt(var / trials)


class TestExperiment:
    def test_records_and_csv(self):
        recs, summary = run_experiment([8], [0.1, 0.4], trials=3, seed=2)
        assert len(recs) == 6
        rows = list(csv.reader(io.StringIO(records_csv(recs))))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 7
        for r in recs:
            assert r.ex <= r.edges
            assert (r.ex == r.edges) == (r.copies == 0)
        assert len(summary["cells"]) == 2
        assert "s, t >= 3" in summary["note"]
        assert summary_json(summary) == summary_json(run_experiment([8], [0.1, 0.4], trials=3, seed=2)[1])

    def test_ex_monotone_under_coupling(self):
        recs, _ = run_experiment([8], [0.2, 0.35, 0.5], trials=4, seed=1)
        by_trial = {}
        for r in recs:
            by_trial.setdefault(r.trial, []).append((r.p, r.ex, r.edges))
        for rows in by_trial.values():
            rows.sort()
            exs = [x for _, x, _ in rows]
            assert exs == sorted(exs)

    def test_sub_threshold_zero_copies(self):
        n = 16
        recs, summary = run_experiment([n], [n**-2.0], s=3, t=3, trials=20, seed=0, compute_ex=False)
        cell = summary["cells"][0]
        assert cell["sub_threshold"]
        assert cell["zero_copy_fraction"] >= 0.9
        assert cell["markov_zero_copy_bound"] > 0.99
