"""Seeded instance generators for tests and experiments.

Every generator is a pure function of its parameters and seed;
regenerating with the same seed yields byte-identical canonical JSON.
"""

from __future__ import annotations

import numpy as np

from .cover import CorrespondenceCover
from .errors import PreconditionError
from .graph import Graph
from .patterns import _as_pattern, _hom_count_masks, count_copies_in_neighborhood


def gnp(n: int, p: float, seed) -> Graph:
    """Erdos-Renyi sample: each pair independently an edge with prob p."""
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"need 0 <= p <= 1, got {p}")
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not pairs:
        return Graph(n)
    draws = rng.random(len(pairs))
    edges = [pairs[i] for i in np.flatnonzero(draws < p)]
    return Graph(n, edges)


def random_bipartite(a: int, b: int, p: float, seed) -> Graph:
    """Bipartite sample on parts {0..a-1} and {a..a+b-1}; triangle-free by
    construction."""
    if a < 1 or b < 1:
        raise PreconditionError(f"need a, b >= 1, got a={a}, b={b}")
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"need 0 <= p <= 1, got {p}")
    rng = np.random.default_rng(seed)
    pairs = [(u, a + w) for u in range(a) for w in range(b)]
    draws = rng.random(len(pairs))
    edges = [pairs[i] for i in np.flatnonzero(draws < p)]
    return Graph(a + b, edges)


def planted_sparse(
    n: int,
    target_k: float,
    pattern,
    degree_budget: int,
    seed,
    proposal_factor: int = 20,
) -> Graph:
    """Greedy randomized (k, F)-locally-sparse graph: propose uniform
    random pairs, accept an edge only if afterwards no neighborhood holds
    more than floor(target_k) pattern copies and both endpoint degrees stay
    within budget.  May return a sparser graph than the budget allows."""
    if target_k < 0:
        raise PreconditionError(f"need target_k >= 0, got {target_k}")
    pat = _as_pattern(pattern)
    rng = np.random.default_rng(seed)
    threshold = int(np.floor(target_k))
    adj = [set() for _ in range(n)]
    max_proposals = proposal_factor * (n * (n - 1) // 2)

    def nbhd_count(v, adj_sets):
        nbrs = sorted(adj_sets[v])
        idx = {w: i for i, w in enumerate(nbrs)}
        masks = [0] * len(nbrs)
        for i, w in enumerate(nbrs):
            for x in adj_sets[w]:
                j = idx.get(x)
                if j is not None:
                    masks[i] |= 1 << j
        degs = [m.bit_count() for m in masks]
        return _hom_count_masks(pat.plan(), masks, degs) // pat.aut_count

    for _ in range(max_proposals):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v or v in adj[u]:
            continue
        if len(adj[u]) >= degree_budget or len(adj[v]) >= degree_budget:
            continue
        adj[u].add(v)
        adj[v].add(u)
        # the new edge can only raise counts at u, v and their common neighbors
        affected = [u, v] + sorted(adj[u] & adj[v])
        if all(nbhd_count(w, adj) <= threshold for w in affected):
            continue
        adj[u].discard(v)
        adj[v].discard(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph(n, edges)


def pattern_free_graph(n: int, pattern, p_scale: float, seed) -> Graph:
    """Random globally pattern-free graph: visit uniformly shuffled pairs
    and keep an edge when it creates no copy of the pattern; ``p_scale``
    in (0, 1] limits the fraction of pairs visited."""
    pat = _as_pattern(pattern)
    if pat.graph.m == 0:
        raise PreconditionError("pattern needs at least one edge")
    if not 0.0 < p_scale <= 1.0:
        raise PreconditionError(f"need 0 < p_scale <= 1, got {p_scale}")
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    rng.shuffle(pairs)
    pairs = pairs[: max(1, int(round(p_scale * len(pairs))))]
    masks = [0] * n
    plan = pat.plan()
    for (u, v) in pairs:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
        degs = [m.bit_count() for m in masks]
        if _hom_count_masks(plan, masks, degs, cap=1):
            masks[u] &= ~(1 << v)
            masks[v] &= ~(1 << u)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if masks[u] >> v & 1]
    return Graph(n, edges)


def two_fold_c6_example():
    """The classic 5-vertex instance: the base graph holds no 6-cycle, yet
    one of its 2-fold covers does.  Returns (base, cover).

    Base: vertices a..e = 0..4, edges ab, ac, bc, cd, ce, de.  Each vertex
    carries two colors (2v, 2v+1); each base edge carries a single matched
    pair, and the six pairs close the cover 6-cycle
    a1 - c0 - e1 - d0 - c1 - b0 - a1.
    """
    base = Graph(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)],
                 labels=["a", "b", "c", "d", "e"])
    lists = [(2 * v, 2 * v + 1) for v in range(5)]
    # colors: a0=0 a1=1 b0=2 b1=3 c0=4 c1=5 d0=6 d1=7 e0=8 e1=9
    cover_edges = [
        (1, 4),  # a1 - c0   (base edge ac)
        (4, 9),  # c0 - e1   (base edge ce)
        (9, 6),  # e1 - d0   (base edge de)
        (6, 5),  # d0 - c1   (base edge cd)
        (5, 2),  # c1 - b0   (base edge bc)
        (2, 1),  # b0 - a1   (base edge ab)
    ]
    cover = Graph(10, cover_edges)
    return base, CorrespondenceCover(base, cover, lists)


def measured_local_sparsity(g: Graph, pattern) -> int:
    """Largest pattern count over all neighborhoods (the tight k)."""
    pat = _as_pattern(pattern)
    return max(
        (count_copies_in_neighborhood(g, v, pat) for v in range(g.n)), default=0
    )
