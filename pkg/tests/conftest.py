"""Shared test helpers: independent brute-force oracles.

The oracles here deliberately avoid the library's homomorphism engine:
copies are found by enumerating vertex subsets and edge subsets and
testing isomorphism by brute-force permutation.
"""

from itertools import combinations, permutations

from nibbler import Graph


def perm_canonical_key(n, edges):
    """Minimum edge list over all vertex permutations (brute force)."""
    best = None
    for perm in permutations(range(n)):
        relabeled = tuple(
            sorted(
                (perm[u], perm[v]) if perm[u] < perm[v] else (perm[v], perm[u])
                for (u, v) in edges
            )
        )
        if best is None or relabeled < best:
            best = relabeled
    return (n, best)


def oracle_count_copies(g: Graph, pattern_graph: Graph) -> int:
    """Count (S, E') pairs with |S| = |V(F)|, E' a subset of E(G[S]),
    and (S, E') isomorphic to F, by exhaustive enumeration."""
    size = pattern_graph.n
    target = perm_canonical_key(size, pattern_graph.edges())
    count = 0
    for subset in combinations(range(g.n), size):
        index = {v: i for i, v in enumerate(subset)}
        inside = [
            (index[u], index[v])
            for (u, v) in g.edges()
            if u in index and v in index
        ]
        for r in range(len(inside) + 1):
            for chosen in combinations(inside, r):
                if perm_canonical_key(size, chosen) == target:
                    count += 1
    return count


def oracle_copy_tally(g: Graph, max_size: int) -> dict:
    """Canonical-key -> copy count for every pattern size 1..max_size.

    Memoizes permutation canonicalization by (size, local edge tuple), so
    one pass over all subsets covers every pattern at once."""
    canon_cache = {}
    tally = {}
    for size in range(1, max_size + 1):
        for subset in combinations(range(g.n), size):
            index = {v: i for i, v in enumerate(subset)}
            inside = [
                (index[u], index[v])
                for (u, v) in g.edges()
                if u in index and v in index
            ]
            for r in range(len(inside) + 1):
                for chosen in combinations(inside, r):
                    key0 = (size, chosen)
                    key = canon_cache.get(key0)
                    if key is None:
                        key = perm_canonical_key(size, chosen)
                        canon_cache[key0] = key
                    tally[key] = tally.get(key, 0) + 1
    return tally
