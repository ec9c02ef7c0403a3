import math
import random
from itertools import combinations

import pytest

from kstexp.copies import enumerate_expansion_copies, is_kst_expansion
from kstexp.errors import ParameterError
from kstexp.hypergraph import Hypergraph
from kstexp.pipeline import (
    PipelineParams,
    automorphisms,
    certify,
    complete_graph,
    count_check,
    decide_case,
    labelled_copy_count,
    run_pipeline,
    sampled_count,
    sigma_ratio,
)

from hosts import block_host, complete_tripartite, naive_expansion_copies, planted_expansion, random_hypergraph

CLASSES = ((1, 2), (1, 3), (2, 3))


def _naive_m(H, P, i, j):
    return len({(a, b) for e in H.edges for a in e for b in e if P.part_of(a) == i and P.part_of(b) == j})


def _naive_gamma(H, C, tau, depth):
    sups = [set(sp) for sp in C.supports("edge")]
    best = 0.0
    seen = set()
    for sp in sups:
        for k in range(1, min(depth, len(sp)) + 1):
            for sig in combinations(sorted(sp), k):
                if sig in seen:
                    continue
                seen.add(sig)
                deg = sum(1 for other in sups if set(sig) <= other)
                best = max(best, (tau / H.m) ** (1 - k) * deg / (len(C) / H.m))
    return best


class TestDecideCase:
    def test_complete_all_dense_tie(self):
        H, P = complete_tripartite((5, 5, 5))
        dec = decide_case(H, P, 2, 1.0)
        assert dec.branch == "dense"
        assert dec.m == {ij: 25 for ij in CLASSES}
        # equal L in every class: lexicographically first pair
        assert dec.pair == (1, 2)

    def test_largest_L_wins(self):
        H, P = complete_tripartite((6, 5, 4))
        dec = decide_case(H, P, 2, 0.5)
        Ls = {(i, j): len(P[i]) * len(P[j]) / len(P[i]) ** 1.5 for i, j in CLASSES}
        assert dec.pair == max(Ls, key=Ls.get)

    def test_predicate_recheck(self):
        for seed in range(5):
            H, P = block_host(seed)
            for ell in (0.1, 0.5, 1.0, 3.0):
                dec = decide_case(H, P, 2, ell)
                dense = any(_naive_m(H, P, i, j) >= ell * len(P[i]) ** 1.5 for i, j in CLASSES)
                assert (dec.branch == "dense") == dense


class TestPipeline:
    def test_dense_toy(self):
        H, _ = complete_tripartite((5, 5, 5))
        res = run_pipeline(H, PipelineParams(2, 2, permissive=True), seed=0)
        assert res.decision.branch == "dense"
        rep = res.report
        assert rep["case"]["naive_agrees"]
        assert rep["dense"]["s_sides_in_smaller_part"]
        assert rep["dense"]["cap_audit_violations"] == 0
        assert rep["translate"]["certificate_passed"]
        assert len(res.collection) > 0
        assert res.certificate.status == "report-only"
        assert res.certificate.invalid_copies == 0
        assert "certificate" in rep

    def test_sparse_toy(self):
        H, _ = block_host(1, sizes=(3, 3, 4))
        p = PipelineParams(2, 2, ell=1.0, permissive=True)
        res = run_pipeline(H, p, seed=1)
        assert res.decision.branch == "sparse"
        sizes = res.decision.sizes
        for (i, j), m in res.decision.m.items():
            assert m < 1.0 * sizes[i - 1] ** 1.5
        rep = res.report
        assert rep["sparse"]["phi_bounded"] and rep["sparse"]["link_violations"] == 0
        assert rep["translate"]["certificate_passed"]
        assert len(res.collection) > 0 and res.status == "ok"
        for cp in res.collection.copies:
            assert is_kst_expansion([H.edges[e] for e in cp], 2, 2, 3)

    def test_deterministic(self):
        H, _ = block_host(2, sizes=(3, 3, 4))
        p = PipelineParams(2, 2, ell=1.0, permissive=True)
        a, b = run_pipeline(H, p, seed=5), run_pipeline(H, p, seed=5)
        assert a.report_json() == b.report_json()
        assert a.collection.to_text() == b.collection.to_text()

    def test_certificate_matches_naive(self):
        H, _ = block_host(0, sizes=(3, 3, 3))
        res = run_pipeline(H, PipelineParams(2, 2, ell=1.0, permissive=True), seed=0)
        cert = res.certificate
        assert cert.gamma == pytest.approx(_naive_gamma(H, res.collection, cert.tau, 3), rel=1e-12)

    def test_witness_reproduces(self):
        H, _ = block_host(3, sizes=(3, 3, 4))
        res = run_pipeline(H, PipelineParams(2, 2, ell=1.0, permissive=True), seed=3)
        cert = res.certificate
        wit = set(cert.witness)
        deg = sum(1 for sp in res.collection.supports("edge") if wit <= set(sp))
        assert deg == cert.witness_degree
        assert sigma_ratio(cert.tau, H.m, len(wit), deg, len(res.collection)) == cert.gamma
        assert math.isfinite(cert.gamma)

    def test_threshold_pass_and_fail(self):
        H, _ = block_host(0, sizes=(3, 3, 3))
        res = run_pipeline(H, PipelineParams(2, 2, ell=1.0, permissive=True), seed=0)
        g = res.certificate.gamma
        assert certify(H, res.collection, res.certificate.tau, 3, g * 2).status == "pass"
        assert certify(H, res.collection, res.certificate.tau, 3, g / 2).status == "fail"

    def test_empty_host_flagged(self):
        res = run_pipeline(Hypergraph(3, 9), PipelineParams(2, 2))
        assert res.flagged and res.certificate.status == "vacuous"

    def test_extension_impossible_flagged(self):
        # K_{3,3} cores exist but V3 has too few vertices for nine extensions
        H, _ = complete_tripartite((5, 5, 5))
        res = run_pipeline(H, PipelineParams(3, 3, permissive=True))
        assert res.flagged and len(res.collection) == 0

    def test_param_checks(self):
        with pytest.raises(ParameterError):
            PipelineParams(3, 2)
        p = PipelineParams(2, 2).resolved(complete_graph(6))
        assert p.n == 6 and p.k == pytest.approx(20 / 6**1.5)
        assert p.checks()["s>=3"] is False

    def test_wrong_host_rejected(self):
        H, _ = block_host(0, sizes=(3, 3, 3))
        res = run_pipeline(H, PipelineParams(2, 2, ell=1.0, permissive=True))
        with pytest.raises(ParameterError):
            certify(complete_graph(6), res.collection, 1.0)


class TestCounting:
    @pytest.mark.parametrize("n,s,t", [(5, 1, 1), (6, 1, 2), (7, 1, 3), (8, 2, 2), (9, 2, 2)])
    def test_labelled_count_matches_enumeration(self, n, s, t):
        assert len(enumerate_expansion_copies(complete_graph(n), s, t)) == labelled_copy_count(n, s, t)

    def test_labelled_count_matches_naive(self):
        assert len(naive_expansion_copies(complete_graph(8), 2, 2)) == labelled_copy_count(8, 2, 2)

    def test_automorphisms(self):
        assert automorphisms(3, 3) == 6 * 6 * 2
        assert automorphisms(2, 3) == 2 * 6
        assert automorphisms(2, 2, 4) == 2 * 2 * 2 * 2**4

    def test_sampled_exact_on_complete(self):
        est, hits = sampled_count(complete_graph(10), 2, 2, 200)
        assert hits == 200
        assert est == pytest.approx(labelled_copy_count(10, 2, 2))

    def test_sampled_near_enumerated(self):
        H = random_hypergraph(9, 3, 60, random.Random(0))
        exact = len(enumerate_expansion_copies(H, 2, 2))
        samples = 20000
        est, hits = sampled_count(H, 2, 2, samples, seed=1)
        # binomial hit count: 4 standard deviations
        total = math.perm(9, 8) / automorphisms(2, 2)
        q = exact / total
        assert abs(hits - q * samples) <= 4 * math.sqrt(samples * q * (1 - q)) + 1
        assert est == pytest.approx(total * hits / samples)

    def test_infeasible_host(self):
        rep = count_check(complete_graph(7), 2, 2)
        assert rep.count == 0 and rep.reference > 0
        assert "infeasible host" in rep.flags

    def test_planted_in_noise(self):
        rng = random.Random(4)
        base = planted_expansion(2, 2, 20)
        noise = {tuple(sorted(rng.sample(range(8, 20), 3))) for _ in range(15)}
        H = Hypergraph(3, 20, set(base.edges) | noise)
        rep = count_check(H, 2, 2)
        assert rep.method == "enumerated" and rep.count >= 1

    def test_budget_fallback(self):
        rep = count_check(complete_graph(15), 3, 3, budget=1000, samples=500, seed=0)
        assert rep.method == "sampled" and "estimated" in rep.flags
        assert rep.count > 0 and rep.ratio > 0

    def test_reference_value(self):
        H = complete_graph(9)
        rep = count_check(H, 2, 2)
        assert rep.reference == pytest.approx(84.0**4 * 9.0 ** (4 - 8))
        assert rep.count == labelled_copy_count(9, 2, 2)
