import random
import warnings
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from kstexp.copies import KstSides, enumerate_kst
from kstexp.dense import DenseCaps, audit_caps, audit_caps_by_edges, dense_collection
from kstexp.errors import ParameterError, StructuralError
from kstexp.hypergraph import Hypergraph


def _complete_bipartite(a, b):
    U, V = range(a), range(a, a + b)
    return Hypergraph(2, a + b, product(U, V)), set(U), set(V)


def _random_bipartite(a, b, p, rng):
    U, V = range(a), range(a, a + b)
    return Hypergraph(2, a + b, [e for e in product(U, V) if rng.random() < p]), set(U), set(V)


class TestCaps:
    def test_formula(self):
        caps = DenseCaps(2, 3, 2.0, 16, kappa=3.0)
        assert caps.cap(2, 3) == 3.0
        assert caps.cap(1, 3) == pytest.approx(3.0 * 2.0 * 4)
        assert caps.cap(2, 1) == pytest.approx(3.0 * 2.0**4)

    def test_exact_with_edge_count(self):
        # K_{4,16}: L = 64 / 16^(3/2) = 1
        caps = DenseCaps(2, 2, 1.0, 16, edges=64)
        assert caps.table() == {(1, 1): 4.0, (1, 2): 4.0, (2, 1): 1.0, (2, 2): 1.0}

    @given(st.integers(1, 4), st.integers(1, 4), st.floats(1.0, 5.0), st.integers(2, 100))
    def test_decreasing(self, s, t, L, V):
        caps = DenseCaps(s, t, L, V)
        for a in range(1, s + 1):
            for b in range(1, t + 1):
                c = caps.cap(a, b)
                assert c > 0
                if a < s:
                    assert caps.cap(a + 1, b) <= c
                if b < t:
                    assert caps.cap(a, b + 1) <= c

    def test_index_range(self):
        with pytest.raises(ParameterError):
            DenseCaps(2, 2, 1.0, 4).cap(0, 1)


class TestDenseCollection:
    @pytest.mark.parametrize("s,t", [(1, 1), (2, 2), (2, 3), (3, 3)])
    def test_single_kst(self, s, t):
        G, U, V = _complete_bipartite(s, t)
        res = dense_collection(G, U, V, s, t, target=1)
        assert len(res.collection) == 1
        assert res.collection.copies[0] == (tuple(sorted(U)), tuple(sorted(V)))
        assert res.status == "complete"
        assert not audit_caps(res.collection, res.caps, res.U)

    def test_k66_reaches_enumeration_total(self):
        G, U, V = _complete_bipartite(6, 6)
        oracle = enumerate_kst(G, 2, 2, KstSides(left=((U, 2),), right=frozenset(V)))
        assert len(oracle) == 15 * 15
        res = dense_collection(G, U, V, 2, 2, kappa=1e6, target=len(oracle), seed=1)
        assert len(res.collection) == len(oracle)
        assert set(res.collection.copies) == set(oracle.copies)
        assert not audit_caps(res.collection, res.caps, res.U)

    def test_disjoint_components(self):
        # three disjoint K_{2,2}'s: the only K_{2,2}'s are the components
        U, V = set(range(6)), set(range(6, 12))
        edges = [(a, b) for k in range(3) for a in (2 * k, 2 * k + 1) for b in (6 + 2 * k, 7 + 2 * k)]
        G = Hypergraph(2, 12, edges)
        res = dense_collection(G, U, V, 2, 2, kappa=100.0, target=3)
        assert len(res.collection) == 3
        counts = {}
        for left, right in res.collection.copies:
            for v in left + right:
                counts[v] = counts.get(v, 0) + 1
        assert max(counts.values()) == 1

    def test_swap_warns(self):
        G, U, V = _complete_bipartite(5, 3)
        with pytest.warns(UserWarning):
            res = dense_collection(G, U, V, 2, 2, target=1)
        assert res.swapped and res.U == frozenset(V)

    def test_non_bipartite(self):
        G = Hypergraph(2, 4, [(0, 1), (0, 2)])
        with pytest.raises(StructuralError):
            dense_collection(G, {0, 1}, {2, 3}, 1, 1)

    def test_sides_too_small(self):
        G, U, V = _complete_bipartite(2, 2)
        with pytest.raises(ParameterError):
            dense_collection(G, U, V, 3, 1)

    def test_empty_graph_undersized(self):
        G = Hypergraph(2, 4)
        res = dense_collection(G, {0, 1}, {2, 3}, 1, 1)
        assert res.undersized and len(res.collection) == 0

    def test_deterministic(self):
        G, U, V = _random_bipartite(8, 10, 0.7, random.Random(0))
        a = dense_collection(G, U, V, 2, 2, c=0.5, seed=4)
        b = dense_collection(G, U, V, 2, 2, c=0.5, seed=4)
        assert a.collection.copies == b.collection.copies


class TestAudit:
    @settings(max_examples=20)
    @given(st.integers(0, 10**6))
    def test_random_hosts_pass_audit(self, seed):
        rng = random.Random(seed)
        s, t = rng.choice([(1, 2), (2, 2), (2, 3)])
        G, U, V = _random_bipartite(rng.randint(4, 7), rng.randint(7, 10), rng.uniform(0.4, 0.9), rng)
        res = dense_collection(G, U, V, s, t, c=rng.uniform(0.01, 1.0), seed=seed)
        assert all(set(left) <= res.U for left, _ in res.collection.copies)
        assert audit_caps(res.collection, res.caps, res.U) == []

    def test_vertex_audit_equals_edge_audit(self):
        G, U, V = _random_bipartite(5, 7, 0.8, random.Random(3))
        res = dense_collection(G, U, V, 2, 2, kappa=1e6, c=1.0, seed=3)
        # with small caps the two audits must flag the same violation counts
        tight = DenseCaps(2, 2, 0.5, 7)
        by_vertex = audit_caps(res.collection, tight, res.U)
        by_edge = audit_caps_by_edges(res.collection, tight, res.U)
        assert len(res.collection) > 1
        assert {(d, c) for _, d, c in by_vertex} == {(d, c) for _, d, c in by_edge}
        assert audit_caps_by_edges(res.collection, res.caps, res.U) == []

    def test_audit_flags_overfull_collection(self):
        G, U, V = _complete_bipartite(3, 4)
        res = dense_collection(G, U, V, 2, 2, kappa=1e6, c=10.0, seed=0)
        assert audit_caps(res.collection, DenseCaps(2, 2, Fraction(1, 10), 4), res.U)


class TestMonotone:
    def test_growing_complete_hosts(self):
        # L = |U| |V|^(-1/2) held at 1
        sizes = []
        for u, v in [(2, 4), (3, 9), (4, 16), (5, 25)]:
            G, U, V = _complete_bipartite(u, v)
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                res = dense_collection(G, U, V, 2, 2, c=1.0, seed=0)
            assert audit_caps(res.collection, res.caps, res.U) == []
            sizes.append(len(res.collection))
        assert sizes == sorted(sizes)
        assert sizes[-1] > sizes[0]
