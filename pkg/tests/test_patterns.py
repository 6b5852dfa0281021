import math
from itertools import combinations

import pytest

from conftest import oracle_count_copies
from nibbler import (
    Graph,
    PatternGraph,
    PreconditionError,
    alon_sparse_edge_bound,
    automorphism_count,
    certify_local_sparsity,
    count_copies,
    count_copies_in_neighborhood,
    ex_brute,
    kst_edge_bound,
    local_edge_bound,
)
from nibbler.instances import gnp, two_fold_c6_example
from nibbler.patterns import all_patterns_up_to


K2 = PatternGraph.clique(2)
K3 = PatternGraph.clique(3)
P3 = PatternGraph.path(3)
C4 = PatternGraph.cycle(4)


# -- automorphisms -----------------------------------------------------------


def test_aut_counts():
    assert automorphism_count(K3) == 6
    assert automorphism_count(P3) == 2
    assert automorphism_count(PatternGraph.complete_bipartite(3, 2)) == 12
    assert automorphism_count(PatternGraph.cycle(6)) == 12
    assert automorphism_count(PatternGraph.complete_bipartite(3, 3)) == 72


def test_pattern_size_cap():
    with pytest.raises(PreconditionError):
        PatternGraph.clique(9)


def test_aut_divides_factorial():
    for pat in all_patterns_up_to(4):
        assert math.factorial(pat.n) % pat.aut_count == 0
        assert pat.aut_count >= 1


def test_kst_detection():
    assert PatternGraph.complete_bipartite(3, 2).s_t == (3, 2)
    assert PatternGraph.cycle(4).s_t == (2, 2)  # C4 = K_{2,2}
    assert K3.s_t is None
    assert P3.s_t == (2, 1)  # P3 = K_{1,2}
    assert PatternGraph.path(4).s_t is None


# -- copy counting -----------------------------------------------------------


def test_k2_copies_equal_edge_count():
    for seed in range(5):
        g = gnp(9, 0.4, seed)
        assert count_copies(g, K2) == g.m


def test_k3_in_k5():
    assert count_copies(PatternGraph.clique(5).graph, K3) == 10


def test_p3_in_k4():
    assert count_copies(PatternGraph.clique(4).graph, P3) == 12


def test_clique_host_identity():
    # copies of F in a complete host = C(D, |V(F)|) |V(F)|! / |Aut(F)|
    host = PatternGraph.clique(6).graph
    for pat in (K3, P3, C4, PatternGraph.complete_bipartite(2, 2)):
        expected = (
            math.comb(6, pat.n) * math.factorial(pat.n) // pat.aut_count
        )
        assert count_copies(host, pat) == expected


def test_c6_in_two_fold_cover():
    _, cover = two_fold_c6_example()
    assert count_copies(cover.cover, PatternGraph.cycle(6)) == 1


def test_oracle_agreement_small():
    pats = [p for p in all_patterns_up_to(4)]
    for seed in range(8):
        g = gnp(6, 0.5, seed)
        for pat in pats:
            assert count_copies(g, pat) == oracle_count_copies(g, pat.graph), (
                seed,
                pat.graph.edges(),
            )


def test_monotone_under_edge_addition():
    for seed in range(10):
        g = gnp(7, 0.35, seed)
        non_edges = [
            (u, v)
            for u in range(7)
            for v in range(u + 1, 7)
            if not g.has_edge(u, v)
        ]
        if not non_edges:
            continue
        g2 = Graph(7, list(g.edges()) + [non_edges[0]])
        for pat in (K2, P3, K3, C4):
            assert count_copies(g2, pat) >= count_copies(g, pat)


def test_neighborhood_counts():
    k4 = PatternGraph.clique(4).graph
    k5 = PatternGraph.clique(5).graph
    assert count_copies_in_neighborhood(k4, 0, K2) == 3
    assert count_copies_in_neighborhood(k5, 2, K3) == 4
    bip = PatternGraph.complete_bipartite(3, 3).graph  # triangle-free
    assert all(count_copies_in_neighborhood(bip, v, K2) == 0 for v in range(6))


# -- certification -----------------------------------------------------------


def test_certify_k4_thresholds():
    k4 = PatternGraph.clique(4).graph
    assert certify_local_sparsity(k4, 3, K2).holds
    report = certify_local_sparsity(k4, 2.9, K2)  # floor(2.9) = 2 < 3
    assert not report.holds
    assert report.witness is not None
    v, copies = report.witness
    assert len(copies) == 3  # floor(k) + 1


def test_certify_petersen_triangle_free():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    petersen = Graph(10, outer + inner + spokes)
    assert certify_local_sparsity(petersen, 0, K2).holds


def test_certify_witness_reverifies():
    for seed in range(6):
        g = gnp(10, 0.6, seed)
        report = certify_local_sparsity(g, 1, K3)
        if report.holds:
            continue
        v, copies = report.witness
        assert len(copies) == 2
        assert len(set(copies)) == len(copies)  # pairwise distinct
        nbrs = set(g.neighbors(v))
        for verts, edges in copies:
            assert verts <= nbrs
            for (a, b) in edges:
                assert g.has_edge(a, b)
                assert a in verts and b in verts
            sub = Graph(
                len(verts),
                [
                    (sorted(verts).index(a), sorted(verts).index(b))
                    for (a, b) in edges
                ],
            )
            assert count_copies(sub, K3) >= 1


def test_certify_matches_brute_force_max():
    kst = PatternGraph.complete_bipartite(2, 2)
    g = gnp(20, 0.3, 11)
    report = certify_local_sparsity(g, 10**9, kst)
    brute_max = max(
        oracle_count_copies(g.induced_subgraph(g.neighbors(v)), kst.graph)
        for v in range(g.n)
    )
    assert report.max_count == brute_max
    assert certify_local_sparsity(g, brute_max, kst).holds
    if brute_max > 0:
        assert not certify_local_sparsity(g, brute_max - 1, kst).holds


# -- closed-form bounds ------------------------------------------------------


def test_kst_bound_values():
    assert kst_edge_bound(5, 3, 1, 1) == pytest.approx(5 + 3)
    assert kst_edge_bound(16, 16, 2, 2) == pytest.approx(64 * math.sqrt(2) + 32)
    assert kst_edge_bound(100, 100, 3, 2) == pytest.approx(
        math.sqrt(3) * 10 * 100 + 200
    )


def test_kst_bound_precondition_no_silent_swap():
    with pytest.raises(PreconditionError):
        kst_edge_bound(3, 5, 2, 2)  # m < n
    with pytest.raises(PreconditionError):
        kst_edge_bound(5, 3, 2, 3)  # t > s


def test_alon_bound_values():
    assert alon_sparse_edge_bound(10, 0, 2, 2) == 0.0
    assert alon_sparse_edge_bound(16, 1, 2, 2) == pytest.approx(16.0)
    assert alon_sparse_edge_bound(100, 16, 2, 2) == pytest.approx(200.0)


def test_alon_bound_soundness_spot_check(capsys):
    # The formula is evaluated verbatim; it is an asymptotic bound and small
    # instances can violate it even at s = t = 2, so violations are
    # reported, not asserted.
    kst = PatternGraph.complete_bipartite(2, 2)
    checked = 0
    violations = []
    for seed in range(10):
        g = gnp(14, 0.35, seed)
        k = oracle_count_copies(g, kst.graph)
        if k < 1:
            continue
        checked += 1
        bound = alon_sparse_edge_bound(g.n, k, 2, 2)
        if g.m > bound:
            violations.append((seed, g.m, k, bound))
    print(f"alon bound spot check: {checked} graphs, "
          f"{len(violations)} small-scale violations: {violations}")
    assert checked >= 5  # the spot check actually exercised the bound


# -- extremal numbers --------------------------------------------------------


def test_ex_small_values():
    assert ex_brute(3, K3) == 2
    assert ex_brute(2, K3) == 1
    assert ex_brute(2, C4) == 1
    assert ex_brute(5, C4) == 6


def test_ex_c4_oracle_n5():
    # direct enumeration over all 2^10 labeled graphs on 5 vertices
    pairs = list(combinations(range(5), 2))
    best = 0
    for bits in range(1 << 10):
        edges = [pairs[i] for i in range(10) if bits >> i & 1]
        g = Graph(5, edges)
        if oracle_count_copies(g, C4.graph) == 0:
            best = max(best, len(edges))
    assert ex_brute(5, C4) == best


def test_ex_turan_values():
    # ex(n, K3) = floor(n^2/4)
    for n in range(2, 8):
        assert ex_brute(n, K3) == n * n // 4
    assert ex_brute(7, PatternGraph.clique(4)) == 16  # Turan T(7,3)


def test_ex_path_matching():
    # P3-free graphs are matchings
    for n in range(2, 7):
        assert ex_brute(n, P3) == n // 2


def test_ex_cap():
    with pytest.raises(PreconditionError):
        ex_brute(10, K3)


def test_ex_edgeless_pattern_rejected():
    lonely = PatternGraph.from_edges(2, [])
    with pytest.raises(PreconditionError):
        ex_brute(5, lonely)


# -- local edge bound --------------------------------------------------------


def test_local_edge_bound_cases():
    assert local_edge_bound(3, 5, K3) == pytest.approx(7.0)
    assert local_edge_bound(0, 2.5, K3) == pytest.approx(2.5)
    assert local_edge_bound(16, 0, C4) == pytest.approx(16.0)


def test_local_edge_bound_error_beyond_cutoff():
    with pytest.raises(PreconditionError):
        local_edge_bound(16, 0, K3)  # no closed form for cliques


def test_local_edge_bound_is_sound():
    # e(G[N(v)]) <= k + ex(deg(v), F) on random graphs
    for seed in range(6):
        g = gnp(9, 0.5, seed)
        for pat in (K3, C4):
            k = max(
                oracle_count_copies(g.induced_subgraph(g.neighbors(v)), pat.graph)
                for v in range(g.n)
            )
            for v in range(g.n):
                sub = g.induced_subgraph(g.neighbors(v))
                assert sub.m <= local_edge_bound(g.degree(v), k, pat) + 1e-9
