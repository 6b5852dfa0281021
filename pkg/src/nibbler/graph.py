"""Simple undirected graphs on dense integer vertices.

Vertices are the indices 0..n-1; named vertices exist only as an optional
label table in the file format.  Graphs are immutable after construction
and safe to share across workers.

Two on-disk formats are supported:

* JSON: ``{"n": int, "edges": [[u, v], ...], "labels": [str, ...]?}``
  The canonical form stores each edge as ``[min, max]`` and sorts edges
  lexicographically; ``to_canonical_json`` emits it byte-reproducibly.
* DIMACS-like edge lists: a ``p edge <n> <m>`` header followed by
  ``e <u> <v>`` lines with 1-indexed endpoints (``c`` comment lines are
  ignored).

Duplicate edges in input are an error, never silently deduplicated.
"""

from __future__ import annotations

import json

from .errors import PreconditionError


class Graph:
    """Immutable simple graph: no self-loops, symmetric adjacency."""

    __slots__ = ("n", "adj", "labels", "_edges", "_adj_sets", "_masks")

    def __init__(self, n: int, edges=(), labels=None):
        if n < 0:
            raise PreconditionError(f"vertex count must be >= 0, got {n}")
        adj: list[list[int]] = [[] for _ in range(n)]
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise PreconditionError(f"self-loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise PreconditionError(f"duplicate edge ({key[0]},{key[1]})")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        self.n = n
        self.adj = tuple(tuple(sorted(nbrs)) for nbrs in adj)
        self.labels = tuple(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != n:
            raise PreconditionError("label table length must equal n")
        self._edges = tuple(sorted(seen))
        self._adj_sets = None
        self._masks = None

    # -- basic accessors -------------------------------------------------

    def edges(self) -> tuple:
        """All edges as (u, v) with u < v, sorted lexicographically."""
        return self._edges

    @property
    def m(self) -> int:
        return len(self._edges)

    def neighbors(self, v: int) -> tuple:
        self._check_vertex(v)
        return self.adj[v]

    def adj_sets(self):
        if self._adj_sets is None:
            self._adj_sets = tuple(frozenset(a) for a in self.adj)
        return self._adj_sets

    def adj_masks(self) -> tuple:
        """Adjacency rows as int bitmasks (bit v set iff v is a neighbor)."""
        if self._masks is None:
            masks = []
            for nbrs in self.adj:
                m = 0
                for w in nbrs:
                    m |= 1 << w
                masks.append(m)
            self._masks = tuple(masks)
        return self._masks

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj_sets()[u]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def _check_vertex(self, v: int):
        if not (0 <= v < self.n):
            raise PreconditionError(f"vertex {v} out of range (n={self.n})")

    # -- induced subgraphs -----------------------------------------------

    def induced_subgraph(self, vertices) -> "Graph":
        """Subgraph induced on ``vertices``, relabeled 0..|S|-1 in
        ascending original-index order."""
        order = sorted(set(vertices))
        for v in order:
            self._check_vertex(v)
        index = {v: i for i, v in enumerate(order)}
        keep = set(order)
        sub_edges = [
            (index[u], index[v]) for (u, v) in self._edges if u in keep and v in keep
        ]
        return Graph(len(order), sub_edges)

    # -- equality / hashing ----------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Graph) and self.n == other.n and self._edges == other._edges
        )

    def __hash__(self):
        return hash((self.n, self._edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        d = {"n": self.n, "edges": [[u, v] for (u, v) in self._edges]}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d

    def to_canonical_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


def induced_subgraph(g: Graph, vertices) -> Graph:
    return g.induced_subgraph(vertices)


def graph_from_json_dict(d: dict) -> Graph:
    try:
        n = int(d["n"])
        edges = d.get("edges", [])
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed graph JSON: {exc}") from exc
    return Graph(n, edges, labels=d.get("labels"))


def parse_graph(text: str) -> Graph:
    """Parse graph text, auto-detecting JSON vs DIMACS-like edge lists."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return graph_from_json_dict(json.loads(text))
    return parse_dimacs(text)


def parse_dimacs(text: str) -> Graph:
    n = None
    declared_m = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) < 4 or parts[1] != "edge":
                raise PreconditionError(f"line {lineno}: bad problem line {line!r}")
            n, declared_m = int(parts[2]), int(parts[3])
        elif parts[0] == "e":
            if n is None:
                raise PreconditionError(f"line {lineno}: edge before 'p edge' header")
            u, v = int(parts[1]) - 1, int(parts[2]) - 1
            edges.append((u, v))
        else:
            raise PreconditionError(f"line {lineno}: unrecognized line {line!r}")
    if n is None:
        raise PreconditionError("missing 'p edge' header")
    if declared_m is not None and declared_m != len(edges):
        raise PreconditionError(
            f"header declares {declared_m} edges, found {len(edges)}"
        )
    return Graph(n, edges)


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def save_graph(g: Graph, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(g.to_canonical_json())
        fh.write("\n")
