"""Correspondence covers and partial colorings.

A correspondence cover of a base graph G is a cover graph H plus a list
assignment L mapping each base vertex to a set of cover vertices
("colors"), subject to:

  CC1  the lists partition V(H);
  CC2  each list is an independent set in H;
  CC3  for every base pair u, v the H-edges between L(u) and L(v) form a
       matching, empty when uv is not a base edge.

Matchings are stored only as H-edges; the three clauses are validated,
never assumed.  A partial coloring maps base vertices into their lists
and is proper when its image is independent in H.

The module also houses the lifting predicates (when does a pattern that
is absent from G stay absent from every cover?), the complete-multipartite
envelope construction, and an exact chromatic number solver for small
patterns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .graph import Graph, graph_from_json_dict
from .patterns import PatternGraph, count_injective_homs, _as_pattern


# ---------------------------------------------------------------------------
# Cover type
# ---------------------------------------------------------------------------


class CorrespondenceCover:
    """Base graph + cover graph + list partition.

    ``lists[v]`` holds the cover-vertex indices available to base vertex v;
    ``owner_of(c)`` is the inverse map.  Covers are immutable after
    validation; restriction builds new covers.
    """

    __slots__ = ("base", "cover", "lists", "names", "_owner", "_edge_arrays")

    def __init__(self, base: Graph, cover: Graph, lists, names=None):
        self.base = base
        self.cover = cover
        self.lists = tuple(tuple(sorted(int(c) for c in lst)) for lst in lists)
        if len(self.lists) != base.n:
            raise PreconditionError(
                f"need one list per base vertex: {len(self.lists)} lists, n={base.n}"
            )
        self.names = tuple(names) if names is not None else None
        self._owner = None
        self._edge_arrays = None

    # -- owner map ---------------------------------------------------------

    def owner_array(self):
        """owner[c] = base vertex whose list holds color c (requires CC1)."""
        if self._owner is None:
            owner = np.full(self.cover.n, -1, dtype=np.int64)
            for v, lst in enumerate(self.lists):
                for c in lst:
                    if not (0 <= c < self.cover.n):
                        raise PreconditionError(
                            f"list of vertex {v} references color {c} out of range"
                        )
                    if owner[c] != -1:
                        raise PreconditionError(
                            f"color {c} appears in two lists (CC1 violated)"
                        )
                    owner[c] = v
            if (owner == -1).any():
                missing = int(np.flatnonzero(owner == -1)[0])
                raise PreconditionError(
                    f"color {missing} belongs to no list (CC1 violated)"
                )
            self._owner = owner
        return self._owner

    def owner_of(self, c: int) -> int:
        return int(self.owner_array()[c])

    def edge_arrays(self):
        """Cover edges as two aligned numpy index arrays."""
        if self._edge_arrays is None:
            es = self.cover.edges()
            if es:
                arr = np.asarray(es, dtype=np.int64)
                self._edge_arrays = (arr[:, 0], arr[:, 1])
            else:
                empty = np.empty(0, dtype=np.int64)
                self._edge_arrays = (empty, empty)
        return self._edge_arrays

    def list_sizes(self):
        return [len(lst) for lst in self.lists]

    def min_list_size(self) -> int:
        return min(self.list_sizes(), default=0)

    def max_color_degree(self) -> int:
        return self.cover.max_degree()

    # -- restriction ---------------------------------------------------------

    def restrict(self, base_keep, color_keep_per_vertex):
        """New cover on the given base vertices with the given per-vertex
        color subsets.  Returns (cover, base_map, color_map) where the maps
        send new indices back to the current ones."""
        base_map = sorted(set(base_keep))
        lists_by_old = {v: sorted(set(color_keep_per_vertex[v])) for v in base_map}
        for v in base_map:
            allowed = set(self.lists[v])
            for c in lists_by_old[v]:
                if c not in allowed:
                    raise PreconditionError(
                        f"color {c} not in the current list of vertex {v}"
                    )
        color_map = [c for v in base_map for c in lists_by_old[v]]
        color_index = {c: i for i, c in enumerate(color_map)}
        new_base = self.base.induced_subgraph(base_map)
        keep_colors = set(color_map)
        new_cover_edges = [
            (color_index[a], color_index[b])
            for (a, b) in self.cover.edges()
            if a in keep_colors and b in keep_colors
        ]
        new_cover = Graph(len(color_map), new_cover_edges)
        new_lists = []
        offset = 0
        for v in base_map:
            cnt = len(lists_by_old[v])
            new_lists.append(range(offset, offset + cnt))
            offset += cnt
        names = None
        if self.names is not None:
            names = [self.names[c] for c in color_map]
        return (
            CorrespondenceCover(new_base, new_cover, new_lists, names=names),
            base_map,
            color_map,
        )

    def without_empty_base_edges(self) -> "CorrespondenceCover":
        """Drop base edges whose matchings are empty (degree normalization
        before a nibble stage)."""
        owner = self.owner_array()
        live = set()
        for (a, b) in self.cover.edges():
            u, v = int(owner[a]), int(owner[b])
            live.add((u, v) if u < v else (v, u))
        kept = [e for e in self.base.edges() if e in live]
        if len(kept) == self.base.m:
            return self
        new_base = Graph(self.base.n, kept, labels=self.base.labels)
        return CorrespondenceCover(new_base, self.cover, self.lists, names=self.names)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        d = {
            "base": self.base.to_json_dict(),
            "cover": self.cover.to_json_dict(),
            "lists": [list(lst) for lst in self.lists],
        }
        if self.names is not None:
            d["names"] = list(self.names)
        return d

    def to_canonical_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    def __repr__(self):
        return (
            f"CorrespondenceCover(n={self.base.n}, colors={self.cover.n}, "
            f"H_edges={self.cover.m})"
        )


def cover_from_json_dict(d: dict) -> CorrespondenceCover:
    try:
        base = graph_from_json_dict(d["base"])
        cover = graph_from_json_dict(d["cover"])
        lists = d["lists"]
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed cover JSON: {exc}") from exc
    return CorrespondenceCover(base, cover, lists, names=d.get("names"))


def load_cover(path) -> CorrespondenceCover:
    with open(path, "r", encoding="utf-8") as fh:
        return cover_from_json_dict(json.load(fh))


def save_cover(cover: CorrespondenceCover, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cover.to_canonical_json())
        fh.write("\n")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class Violation:
    clause: str  # "CC1" | "CC2" | "CC3"
    message: str
    data: dict

    def __str__(self):
        return f"[{self.clause}] {self.message}"


def validate_cover(cover: CorrespondenceCover) -> list:
    """All CC1-CC3 violations; an empty list certifies a valid cover."""
    violations = []
    n_h = cover.cover.n
    seen = {}
    for v, lst in enumerate(cover.lists):
        for c in lst:
            if not (0 <= c < n_h):
                violations.append(
                    Violation("CC1", f"list of {v} references color {c} out of range",
                              {"vertex": v, "color": c})
                )
                continue
            if c in seen:
                violations.append(
                    Violation("CC1", f"color {c} owned by both {seen[c]} and {v}",
                              {"color": c, "vertices": [seen[c], v]})
                )
            else:
                seen[c] = v
    for c in range(n_h):
        if c not in seen:
            violations.append(
                Violation("CC1", f"color {c} belongs to no list", {"color": c})
            )
    if any(v.clause == "CC1" for v in violations):
        return violations  # owner map ill-defined; CC2/CC3 not meaningful
    owner = {c: v for c, v in seen.items()}
    base_adj = cover.base.adj_sets()
    pair_edges: dict = {}
    for (a, b) in cover.cover.edges():
        u, v = owner[a], owner[b]
        if u == v:
            violations.append(
                Violation("CC2", f"colors {a},{b} of vertex {u} are adjacent in H",
                          {"vertex": u, "edge": [a, b]})
            )
            continue
        key = (u, v) if u < v else (v, u)
        pair_edges.setdefault(key, []).append((a, b))
    for (u, v), edges in sorted(pair_edges.items()):
        if v not in base_adj[u]:
            violations.append(
                Violation("CC3",
                          f"H-edges between lists of {u} and {v} but {u}{v} not a base edge",
                          {"pair": [u, v], "edges": [list(e) for e in edges]})
            )
        endpoints = [c for e in edges for c in e]
        if len(set(endpoints)) != len(endpoints):
            dup = next(c for c in endpoints if endpoints.count(c) > 1)
            violations.append(
                Violation("CC3",
                          f"edges between lists of {u} and {v} share color {dup} (not a matching)",
                          {"pair": [u, v], "color": dup,
                           "edges": [list(e) for e in edges]})
            )
    return violations


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def list_cover(g: Graph, lists_of_names) -> CorrespondenceCover:
    """Classical list assignment as a correspondence cover: colors with
    equal names correspond across every base edge."""
    lists_of_names = [sorted(set(lst), key=lambda x: (str(type(x)), x)) for lst in lists_of_names]
    if len(lists_of_names) != g.n:
        raise PreconditionError("need one name list per vertex")
    for v, lst in enumerate(lists_of_names):
        if not lst:
            raise PreconditionError(f"empty list for vertex {v}")
    lists = []
    names = []
    offset = 0
    for lst in lists_of_names:
        lists.append(list(range(offset, offset + len(lst))))
        names.extend(lst)
        offset += len(lst)
    name_index = [
        {name: lists[v][i] for i, name in enumerate(lists_of_names[v])}
        for v in range(g.n)
    ]
    cover_edges = []
    for (u, v) in g.edges():
        for name, cu in name_index[u].items():
            cv = name_index[v].get(name)
            if cv is not None:
                cover_edges.append((cu, cv))
    cover = Graph(offset, cover_edges)
    return CorrespondenceCover(g, cover, lists, names=names)


def random_cover(g: Graph, q: int, seed, drop_prob: float = 0.0) -> CorrespondenceCover:
    """q-fold cover with an independent uniform random matching on every
    base edge; each matched pair is dropped with probability ``drop_prob``
    (partial matchings).  Deterministic given the seed."""
    if q < 1:
        raise PreconditionError(f"fold q must be >= 1, got {q}")
    if not (0.0 <= drop_prob <= 1.0):
        raise PreconditionError(f"drop_prob must be in [0,1], got {drop_prob}")
    rng = np.random.default_rng(seed)
    lists = [list(range(v * q, (v + 1) * q)) for v in range(g.n)]
    cover_edges = []
    for (u, v) in g.edges():
        perm = rng.permutation(q)
        for i in range(q):
            if drop_prob and rng.random() < drop_prob:
                continue
            cover_edges.append((u * q + i, v * q + int(perm[i])))
    cover = Graph(g.n * q, cover_edges)
    return CorrespondenceCover(g, cover, lists)


# ---------------------------------------------------------------------------
# Partial colorings
# ---------------------------------------------------------------------------


class PartialColoring:
    """Partial map base vertex -> cover vertex (single-writer)."""

    __slots__ = ("assignment",)

    def __init__(self, assignment=None):
        self.assignment = dict(assignment or {})

    def __len__(self):
        return len(self.assignment)

    def __contains__(self, v):
        return v in self.assignment

    def get(self, v):
        return self.assignment.get(v)

    def set(self, v: int, c: int):
        self.assignment[int(v)] = int(c)

    def domain(self):
        return set(self.assignment)

    def image(self):
        return set(self.assignment.values())

    def is_total_on(self, n: int) -> bool:
        return len(self.assignment) == n and all(v in self.assignment for v in range(n))

    def merged(self, other: "PartialColoring") -> "PartialColoring":
        overlap = self.domain() & other.domain()
        if overlap:
            raise PreconditionError(f"colorings overlap on vertices {sorted(overlap)[:5]}")
        merged = dict(self.assignment)
        merged.update(other.assignment)
        return PartialColoring(merged)

    def to_json_dict(self, n: int) -> dict:
        colors = [None] * n
        for v, c in self.assignment.items():
            colors[v] = c
        return {"n": n, "colors": colors}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PartialColoring":
        try:
            colors = d["colors"]
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f"malformed coloring JSON: {exc}") from exc
        return cls({v: c for v, c in enumerate(colors) if c is not None})

    def __repr__(self):
        return f"PartialColoring(|dom|={len(self.assignment)})"


def save_coloring(phi: PartialColoring, n: int, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(phi.to_json_dict(n), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_coloring(path) -> PartialColoring:
    with open(path, "r", encoding="utf-8") as fh:
        return PartialColoring.from_json_dict(json.load(fh))


def is_proper(cover: CorrespondenceCover, phi: PartialColoring):
    """(True, None) when the image of phi is independent in H, else
    (False, ((u, c), (v, c'))) naming the first violating color pair.

    Raises when an assignment leaves its list.
    """
    owner = cover.owner_array()
    image = {}
    for v, c in sorted(phi.assignment.items()):
        if not (0 <= c < cover.cover.n) or c not in cover.lists[v]:
            raise PreconditionError(f"vertex {v} assigned color {c} outside its list")
        image[c] = v
    adj = cover.cover.adj_sets()
    for c in sorted(image):
        for c2 in adj[c]:
            if c2 in image and c < c2:
                u, v = int(owner[c]), int(owner[c2])
                return False, ((u, c), (v, c2))
    return True, None


def available_list(cover: CorrespondenceCover, phi: PartialColoring, v: int):
    """Colors of L(v) with no H-neighbor in the image of phi."""
    if v in phi.assignment:
        raise PreconditionError(f"vertex {v} is already colored")
    image = phi.image()
    adj = cover.cover.adj_sets()
    return [c for c in cover.lists[v] if not (adj[c] & image)]


# ---------------------------------------------------------------------------
# Lifting predicates and envelope
# ---------------------------------------------------------------------------


def s2_lift_condition(f) -> bool:
    """True iff every non-adjacent vertex pair of the pattern has a common
    neighbor -- the condition under which pattern-freeness of the base
    carries over to every cover."""
    pat = _as_pattern(f)
    g = pat.graph
    sets = g.adj_sets()
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if v not in sets[u] and not (sets[u] & sets[v]):
                return False
    return True


def chromatic_number_exact(f) -> int:
    """Exact chromatic number by branch and bound (patterns only)."""
    pat = _as_pattern(f)
    g = pat.graph
    if g.n == 0:
        return 0
    lb = _greedy_clique_size(g)
    for q in range(lb, g.n + 1):
        if _lex_first_coloring(g, q) is not None:
            return q
    return g.n  # unreachable


def _greedy_clique_size(g: Graph) -> int:
    best = 1 if g.n else 0
    sets = g.adj_sets()
    for v in range(g.n):
        clique = [v]
        cand = set(sets[v])
        while cand:
            w = min(cand)
            clique.append(w)
            cand &= sets[w]
        best = max(best, len(clique))
    return best


def _lex_first_coloring(g: Graph, q: int):
    """Lexicographically-first proper coloring with colors 0..q-1 in vertex
    order, or None.  New colors are introduced in increasing order, so the
    first solution found is canonical."""
    colors = [-1] * g.n
    sets = g.adj_sets()

    def rec(v, used):
        if v == g.n:
            return True
        limit = min(q - 1, used)
        for c in range(limit + 1):
            if all(colors[w] != c for w in sets[v] if w < v):
                colors[v] = c
                if rec(v + 1, max(used, c + 1)):
                    return True
                colors[v] = -1
        return False

    return list(colors) if rec(0, 0) else None


def multipartite_envelope(f, coloring=None) -> PatternGraph:
    """Complete chi(F)-partite pattern whose part sizes are the color-class
    sizes of a proper optimal coloring of F (deterministic default: the
    lexicographically-first optimal coloring; pass ``coloring`` to
    override).  Always satisfies the common-neighbor lift condition, and
    contains F as a subgraph on the same vertex count."""
    pat = _as_pattern(f)
    g = pat.graph
    if g.m == 0:
        raise PreconditionError("envelope needs a pattern with at least one edge")
    if coloring is None:
        q = chromatic_number_exact(pat)
        coloring = _lex_first_coloring(g, q)
    else:
        coloring = list(coloring)
        if len(coloring) != g.n:
            raise PreconditionError("override coloring must color every vertex")
        for (u, v) in g.edges():
            if coloring[u] == coloring[v]:
                raise PreconditionError(f"override coloring not proper on edge ({u},{v})")
        q = len(set(coloring))
    sizes = [coloring.count(c) for c in sorted(set(coloring))]
    return PatternGraph.complete_multipartite(sizes)
