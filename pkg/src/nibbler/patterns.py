"""Exact copy counting of small patterns and local-sparsity certification.

A *copy* of a pattern F in G is a subgraph (vertex set + edge set) of G
isomorphic to F, not necessarily induced; two copies are distinct when
their vertex sets or edge sets differ.  Counting works by enumerating
injective homomorphisms F -> G with a degree-descending static vertex
order and adjacency-consistency pruning, then dividing by |Aut(F)|.

G is (k, F)-sparse when it contains at most floor(k) copies of F, and
(k, F)-locally-sparse when every neighborhood subgraph G[N(v)] is
(k, F)-sparse.  ``certify_local_sparsity`` checks the latter and, on
failure, extracts floor(k)+1 pairwise-distinct witness copies.

Closed-form edge bounds for K_{s,t}-type sparsity and a brute-force
extremal number ``ex_brute`` (n <= 9) complete the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations

from .errors import PreconditionError
from .graph import Graph

MAX_PATTERN_VERTICES = 8  # covers K_{4,4}, C_6 and every pattern used in tests
EX_BRUTE_MAX_N = 9


# ---------------------------------------------------------------------------
# Pattern graphs
# ---------------------------------------------------------------------------


class PatternGraph:
    """A small pattern F (at most 8 vertices) with cached metadata."""

    __slots__ = ("graph", "name", "is_bipartite", "s_t", "_aut_count", "_plan")

    def __init__(self, graph: Graph, name: str | None = None):
        if graph.n > MAX_PATTERN_VERTICES:
            raise PreconditionError(
                f"pattern has {graph.n} vertices, max is {MAX_PATTERN_VERTICES}"
            )
        self.graph = graph
        self.name = name
        self.is_bipartite, parts = _bipartition(graph)
        self.s_t = None
        if self.is_bipartite and graph.n >= 2 and parts is not None:
            a, b = len(parts[0]), len(parts[1])
            if a >= 1 and b >= 1 and graph.m == a * b:
                self.s_t = (max(a, b), min(a, b))
        self._aut_count = None
        self._plan = None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def aut_count(self) -> int:
        """|Aut(F)|: adjacency-preserving vertex permutations."""
        if self._aut_count is None:
            self._aut_count = count_injective_homs(self.graph, self.graph)
        return self._aut_count

    def plan(self):
        if self._plan is None:
            self._plan = _pattern_plan(self.graph)
        return self._plan

    def __repr__(self):
        tag = self.name or f"pattern<{self.graph.n}v,{self.graph.m}e>"
        return f"PatternGraph({tag})"

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges, name=None) -> "PatternGraph":
        return cls(Graph(n, edges), name=name)

    @classmethod
    def clique(cls, r: int) -> "PatternGraph":
        return cls(Graph(r, combinations(range(r), 2)), name=f"K{r}")

    @classmethod
    def path(cls, r: int) -> "PatternGraph":
        return cls(Graph(r, [(i, i + 1) for i in range(r - 1)]), name=f"P{r}")

    @classmethod
    def cycle(cls, r: int) -> "PatternGraph":
        if r < 3:
            raise PreconditionError(f"cycle needs >= 3 vertices, got {r}")
        edges = [(i, (i + 1) % r) for i in range(r)]
        return cls(Graph(r, edges), name=f"C{r}")

    @classmethod
    def complete_bipartite(cls, s: int, t: int) -> "PatternGraph":
        if not (s >= t >= 1):
            raise PreconditionError(f"need s >= t >= 1, got ({s},{t})")
        edges = [(i, s + j) for i in range(s) for j in range(t)]
        return cls(Graph(s + t, edges), name=f"K{s},{t}")

    @classmethod
    def complete_multipartite(cls, sizes) -> "PatternGraph":
        sizes = [int(x) for x in sizes]
        if any(x < 1 for x in sizes):
            raise PreconditionError("part sizes must be >= 1")
        bounds = [0]
        for x in sizes:
            bounds.append(bounds[-1] + x)
        edges = []
        for i in range(len(sizes)):
            for j in range(i + 1, len(sizes)):
                for u in range(bounds[i], bounds[i + 1]):
                    for v in range(bounds[j], bounds[j + 1]):
                        edges.append((u, v))
        name = "K" + ",".join(str(x) for x in sizes)
        return cls(Graph(bounds[-1], edges), name=name)


def _bipartition(g: Graph):
    """2-color by BFS; returns (is_bipartite, (part0, part1) or None)."""
    color = [-1] * g.n
    parts = ([], [])
    for start in range(g.n):
        if color[start] != -1:
            continue
        color[start] = 0
        parts[0].append(start)
        queue = [start]
        while queue:
            u = queue.pop()
            for w in g.adj[u]:
                if color[w] == -1:
                    color[w] = 1 - color[u]
                    parts[color[w]].append(w)
                    queue.append(w)
                elif color[w] == color[u]:
                    return False, None
    return True, parts


# ---------------------------------------------------------------------------
# Injective homomorphism engine
# ---------------------------------------------------------------------------


def _pattern_plan(f: Graph):
    """Static backtracking plan: degree-descending vertex order, and for
    each position the earlier positions it must be adjacent to."""
    order = sorted(range(f.n), key=lambda u: (-f.degree(u), u))
    pos = {u: i for i, u in enumerate(order)}
    earlier = []
    degs = []
    for i, u in enumerate(order):
        earlier.append(tuple(pos[w] for w in f.adj[u] if pos[w] < i))
        degs.append(f.degree(u))
    edge_positions = tuple((pos[u], pos[v]) for (u, v) in f.edges())
    return order, tuple(earlier), tuple(degs), edge_positions


def _hom_count_masks(plan, g_masks, g_degs, cap=None) -> int:
    """Count injective homomorphisms into the graph given by adjacency
    bitmasks; stops early once ``cap`` is reached."""
    order, earlier, fdegs, _ = plan
    size = len(order)
    if size > len(g_masks):
        return 0
    full = (1 << len(g_masks)) - 1
    images = [0] * size
    count = 0

    def rec(i, used):
        nonlocal count
        if i == size:
            count += 1
            return cap is not None and count >= cap
        cand = full
        for j in earlier[i]:
            cand &= g_masks[images[j]]
        cand &= ~used
        need = fdegs[i]
        while cand:
            bit = cand & -cand
            cand ^= bit
            v = bit.bit_length() - 1
            if g_degs[v] < need:
                continue
            images[i] = v
            if rec(i + 1, used | bit):
                return True
        return False

    if size == 0:
        return 1
    rec(0, 0)
    return count


def count_injective_homs(f: Graph, g: Graph, cap=None) -> int:
    plan = _pattern_plan(f)
    g_degs = [g.degree(v) for v in range(g.n)]
    return _hom_count_masks(plan, g.adj_masks(), g_degs, cap=cap)


def _as_pattern(f) -> PatternGraph:
    return f if isinstance(f, PatternGraph) else PatternGraph(f)


def automorphism_count(f) -> int:
    return _as_pattern(f).aut_count


def count_copies(g: Graph, f) -> int:
    """Number of distinct subgraphs of ``g`` isomorphic to the pattern."""
    pat = _as_pattern(f)
    g_degs = [g.degree(v) for v in range(g.n)]
    homs = _hom_count_masks(pat.plan(), g.adj_masks(), g_degs)
    aut = pat.aut_count
    if homs % aut:  # every copy is hit exactly |Aut(F)| times
        raise AssertionError(f"hom count {homs} not divisible by |Aut|={aut}")
    return homs // aut


def iter_copies(g: Graph, f, limit=None):
    """Yield distinct copies of the pattern in ``g`` as
    (vertex frozenset, edge frozenset) pairs, up to ``limit``."""
    pat = _as_pattern(f)
    order, earlier, fdegs, edge_positions = pat.plan()
    size = len(order)
    if size > g.n:
        return
    g_masks = g.adj_masks()
    g_degs = [g.degree(v) for v in range(g.n)]
    full = (1 << g.n) - 1
    images = [0] * size
    seen = set()
    emitted = 0

    def rec(i, used):
        nonlocal emitted
        if i == size:
            verts = frozenset(images)
            edges = frozenset(
                (images[a], images[b]) if images[a] < images[b] else (images[b], images[a])
                for (a, b) in edge_positions
            )
            copy = (verts, edges)
            if copy not in seen:
                seen.add(copy)
                emitted += 1
                yield copy
            return
        cand = full
        for j in earlier[i]:
            cand &= g_masks[images[j]]
        cand &= ~used
        while cand:
            bit = cand & -cand
            cand ^= bit
            v = bit.bit_length() - 1
            if g_degs[v] < fdegs[i]:
                continue
            images[i] = v
            yield from rec(i + 1, used | bit)
            if limit is not None and emitted >= limit:
                return
        return

    if size == 0:
        return
    yield from rec(0, 0)


def count_copies_in_neighborhood(g: Graph, v: int, f) -> int:
    g._check_vertex(v)
    return count_copies(g.induced_subgraph(g.adj[v]), f)


# ---------------------------------------------------------------------------
# Local-sparsity certification
# ---------------------------------------------------------------------------


@dataclass
class SparsityReport:
    """Outcome of a (k, F)-local-sparsity check."""

    k: float
    pattern: PatternGraph
    per_vertex_counts: dict = field(repr=False)
    max_count: int = 0
    argmax_vertex: int | None = None
    witness: tuple | None = None  # (vertex, [copy, ...]) in original labels

    @property
    def holds(self) -> bool:
        return self.max_count <= math.floor(self.k)

    def to_json_dict(self) -> dict:
        d = {
            "holds": self.holds,
            "k": self.k,
            "max_count": self.max_count,
            "argmax_vertex": self.argmax_vertex,
            "witness": None,
        }
        if self.witness is not None:
            v, copies = self.witness
            d["witness"] = {
                "vertex": v,
                "copies": [
                    {"vertices": sorted(vs), "edges": sorted(map(list, es))}
                    for (vs, es) in copies
                ],
            }
        return d


def certify_local_sparsity(g: Graph, k: float, f) -> SparsityReport:
    """Check that every neighborhood of ``g`` holds at most floor(k)
    copies of the pattern; extract a witness from the first violator."""
    if k < 0:
        raise PreconditionError(f"k must be >= 0, got {k}")
    pat = _as_pattern(f)
    threshold = math.floor(k)
    counts = {}
    max_count = 0
    argmax = None
    first_violator = None
    for v in range(g.n):
        c = count_copies_in_neighborhood(g, v, pat)
        counts[v] = c
        if c > max_count:
            max_count = c
            argmax = v
        if first_violator is None and c > threshold:
            first_violator = v
    witness = None
    if first_violator is None:
        report_argmax = argmax if g.n else None
        return SparsityReport(k, pat, counts, max_count, report_argmax, None)
    nbrs = sorted(g.adj[first_violator])
    sub = g.induced_subgraph(nbrs)
    copies = []
    for verts, edges in iter_copies(sub, pat, limit=threshold + 1):
        orig_vs = frozenset(nbrs[x] for x in verts)
        orig_es = frozenset(
            (nbrs[a], nbrs[b]) if nbrs[a] < nbrs[b] else (nbrs[b], nbrs[a])
            for (a, b) in edges
        )
        copies.append((orig_vs, orig_es))
    witness = (first_violator, copies)
    return SparsityReport(k, pat, counts, max_count, argmax, witness)


# ---------------------------------------------------------------------------
# Closed-form edge bounds
# ---------------------------------------------------------------------------


def kst_edge_bound(m: int, n: int, s: int, t: int) -> float:
    """Edge bound s^(1/t) m^(1-1/t) n + t m for bipartite graphs with parts
    of sizes m >= n avoiding a complete bipartite s-by-t subgraph."""
    if not m >= n >= 1:
        raise PreconditionError(f"need m >= n >= 1, got m={m}, n={n}")
    if not s >= t >= 1:
        raise PreconditionError(f"need s >= t >= 1, got s={s}, t={t}")
    return s ** (1.0 / t) * m ** (1.0 - 1.0 / t) * n + t * m


def alon_sparse_edge_bound(n: int, k: float, s: int, t: int) -> float:
    """Edge bound (1/2) s^(1/t) t^(1/s) k^(1/(st)) n^(2-1/s-1/t) for
    n-vertex graphs with at most floor(k) copies of K_{s,t}."""
    if n < 1:
        raise PreconditionError(f"need n >= 1, got {n}")
    if k < 0:
        raise PreconditionError(f"need k >= 0, got {k}")
    if not s >= t >= 1:
        raise PreconditionError(f"need s >= t >= 1, got s={s}, t={t}")
    return (
        0.5
        * s ** (1.0 / t)
        * t ** (1.0 / s)
        * k ** (1.0 / (s * t))
        * n ** (2.0 - 1.0 / s - 1.0 / t)
    )


# ---------------------------------------------------------------------------
# Brute-force extremal numbers
# ---------------------------------------------------------------------------

_EX_CACHE: dict = {}


def ex_brute(n: int, f) -> int:
    """Exact extremal number: maximum edges of an n-vertex F-free graph,
    by exhaustive vertex-by-vertex search with isomorph pruning (n <= 9)."""
    pat = _as_pattern(f)
    if n < 0:
        raise PreconditionError(f"need n >= 0, got {n}")
    if n > EX_BRUTE_MAX_N:
        raise PreconditionError(f"exact mode capped at n <= {EX_BRUTE_MAX_N}, got {n}")
    if n < pat.n:
        return n * (n - 1) // 2  # too few vertices to hold any copy
    if pat.graph.m == 0:
        raise PreconditionError(
            "pattern has no edges: every graph on >= |V(F)| vertices contains it"
        )
    key = (n, pat.graph)
    if key in _EX_CACHE:
        return _EX_CACHE[key]
    result = _ex_search(n, pat)
    _EX_CACHE[key] = result
    return result


def _edge_count(masks) -> int:
    return sum(m.bit_count() for m in masks) // 2


def _masks_free_of(masks, plan) -> bool:
    degs = [m.bit_count() for m in masks]
    return _hom_count_masks(plan, masks, degs, cap=1) == 0


def _masks_invariant(masks):
    degs = sorted(m.bit_count() for m in masks)
    profile = tuple(
        sorted(
            tuple(sorted(masks[w].bit_count() for w in _bits(masks[v])))
            for v in range(len(masks))
        )
    )
    return (len(masks), _edge_count(masks), tuple(degs), profile)


def _bits(mask):
    while mask:
        b = mask & -mask
        mask ^= b
        yield b.bit_length() - 1


def _masks_iso(m1, m2) -> bool:
    if len(m1) != len(m2) or _edge_count(m1) != _edge_count(m2):
        return False
    g1 = Graph(len(m1), [(u, v) for u in range(len(m1)) for v in _bits(m1[u]) if u < v])
    plan = _pattern_plan(g1)
    degs2 = [m.bit_count() for m in m2]
    return _hom_count_masks(plan, m2, degs2, cap=1) >= 1


def _greedy_f_free(n, plan) -> int:
    """Edge count of one greedily built F-free graph (incumbent seed)."""
    masks = []
    for i in range(n):
        row = 0
        for w in range(i):
            cand = row | (1 << w)
            trial = [masks[j] | ((cand >> j & 1) << i) for j in range(i)] + [cand]
            if _masks_free_of(trial, plan):
                row = cand
        masks = [masks[j] | ((row >> j & 1) << i) for j in range(i)] + [row]
    return _edge_count(masks)


def _ex_search(n, pat: PatternGraph) -> int:
    plan = pat.plan()
    best = _greedy_f_free(n, plan)
    # Depth-first extension, one vertex at a time, deduplicating partial
    # graphs up to isomorphism per level.
    seen_per_level: list[dict] = [dict() for _ in range(n + 1)]
    start_masks = (0,)
    stack = [start_masks]
    seen_per_level[1][_masks_invariant(start_masks)] = [start_masks]
    # extending from level L to n adds at most sum_{j=L}^{n-1} j edges
    suffix = [0] * (n + 2)
    for lvl in range(n - 1, -1, -1):
        suffix[lvl] = suffix[lvl + 1] + lvl
    while stack:
        masks = stack.pop()
        lvl = len(masks)
        e = _edge_count(masks)
        if lvl == n:
            if e > best:
                best = e
            continue
        if e + suffix[lvl] <= best:
            continue
        children = sorted(range(1 << lvl), key=lambda m: -m.bit_count())
        for row in children:
            child = tuple(
                masks[j] | ((row >> j & 1) << lvl) for j in range(lvl)
            ) + (row,)
            if not _masks_free_of(child, plan):
                continue
            inv = _masks_invariant(child)
            bucket = seen_per_level[lvl + 1].setdefault(inv, [])
            if any(_masks_iso(child, other) for other in bucket):
                continue
            bucket.append(child)
            stack.append(child)
    return best


def local_edge_bound(deg: int, k: float, f) -> float:
    """Upper bound k + ex(deg, F) on the edges of a neighborhood of degree
    ``deg`` in a (k, F)-locally-sparse graph; falls back to the closed-form
    K_{s,t} bound past the exhaustive-search cutoff."""
    pat = _as_pattern(f)
    if deg < 0:
        raise PreconditionError(f"need deg >= 0, got {deg}")
    if deg == 0:
        return float(k)
    if deg <= EX_BRUTE_MAX_N:
        return k + ex_brute(deg, pat)
    if pat.s_t is not None:
        s, t = pat.s_t
        return k + alon_sparse_edge_bound(deg, 1.0, s, t)
    raise PreconditionError(
        f"no closed-form F-free bound for this pattern at deg={deg} > {EX_BRUTE_MAX_N}"
    )


# ---------------------------------------------------------------------------
# Small-pattern catalogue (one representative per isomorphism class)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def all_patterns_up_to(max_vertices: int) -> tuple:
    """All patterns with 1..max_vertices vertices, one per isomorphism
    class, canonicalized by brute-force permutation (max_vertices <= 5)."""
    if max_vertices > 5:
        raise PreconditionError("catalogue generation capped at 5 vertices")
    out = []
    for nv in range(1, max_vertices + 1):
        pairs = list(combinations(range(nv), 2))
        seen = set()
        for bits in range(1 << len(pairs)):
            edges = [pairs[i] for i in range(len(pairs)) if bits >> i & 1]
            key = _perm_canonical(nv, edges)
            if key in seen:
                continue
            seen.add(key)
            out.append(PatternGraph(Graph(nv, edges)))
    return tuple(out)


def _perm_canonical(nv: int, edges) -> tuple:
    best = None
    edge_set = [tuple(e) for e in edges]
    for perm in permutations(range(nv)):
        relabeled = tuple(
            sorted(
                (perm[u], perm[v]) if perm[u] < perm[v] else (perm[v], perm[u])
                for (u, v) in edge_set
            )
        )
        if best is None or relabeled < best:
            best = relabeled
    return (nv, best)
