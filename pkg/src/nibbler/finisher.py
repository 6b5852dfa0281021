"""Completion of a coloring once lists dominate color-degrees eightfold.

When every list has at least ``ell`` colors and every color has cover-
degree at most ell/8, a proper coloring exists; the constructive route is
resampling in the Moser-Tardos style: color every vertex uniformly from
its list, then repeatedly pick the lowest-indexed cover edge whose two
endpoints are both chosen and redraw both underlying vertices.  Under the
eightfold domination the expected number of resamples is tiny; a round
cap guards against misuse.

``lll_margin`` computes 4 * p * dep, the quantity the symmetric local
lemma compares against 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cover import CorrespondenceCover, PartialColoring
from .errors import BudgetExhaustedError, PreconditionError


def lll_margin(p: float, dep: int) -> float:
    """4 p dep; at most 1 means the symmetric local lemma applies."""
    if not 0.0 <= p < 1.0:
        raise PreconditionError(f"need 0 <= p < 1, got {p}")
    if dep < 0:
        raise PreconditionError(f"need dep >= 0, got {dep}")
    return 4.0 * p * dep


@dataclass
class ResampleTrace:
    rounds: int
    resampled_events: int
    final_proper: bool


def final_blow(
    cover: CorrespondenceCover,
    ell: int,
    seed,
    round_cap: int = 10**6,
) -> tuple:
    """Total proper coloring by uniform assignment plus resampling.

    Requires |L(v)| >= ell >= 1 for every vertex and deg_H(c) <= ell/8
    for every color (checked; a violation is an error, not a fallback).
    Returns (PartialColoring, ResampleTrace); raises BudgetExhaustedError
    with the trace in its payload if the round cap is exceeded.
    """
    ell = int(ell)
    if ell < 1:
        raise PreconditionError(f"need ell >= 1, got {ell}")
    min_list = cover.min_list_size()
    if min_list < ell:
        raise PreconditionError(
            f"minimum list size {min_list} below required ell = {ell}"
        )
    max_deg = cover.max_color_degree()
    if 8 * max_deg > ell:  # integer form of deg <= ell/8
        raise PreconditionError(
            f"max color degree {max_deg} exceeds ell/8 = {ell / 8:.6g} "
            f"(min list {min_list})"
        )

    n = cover.base.n
    owner = cover.owner_array()
    rng = np.random.default_rng(
        seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    )
    lists = cover.lists
    choice = [0] * n
    for v in range(n):  # vertices ascending: fixed draw order
        lst = lists[v]
        choice[v] = lst[int(rng.integers(0, len(lst)))]

    edges = cover.cover.edges()
    adj = cover.cover.adj_sets()
    rounds = 0
    resampled = 0
    while True:
        violated = None
        for idx, (a, b) in enumerate(edges):  # lowest H-edge index first
            if choice[owner[a]] == a and choice[owner[b]] == b:
                violated = (a, b)
                break
        if violated is None:
            break
        if rounds >= round_cap:
            trace = ResampleTrace(rounds, resampled, final_proper=False)
            raise BudgetExhaustedError(
                f"round cap {round_cap} exceeded", payload={"trace": trace}
            )
        rounds += 1
        resampled += 1
        a, b = violated
        for c in (a, b):  # lower endpoint's vertex first
            v = int(owner[c])
            lst = lists[v]
            choice[v] = lst[int(rng.integers(0, len(lst)))]

    phi = PartialColoring({v: int(choice[v]) for v in range(n)})
    # the loop exits only when no cover edge has both endpoints chosen
    for v in range(n):
        for c2 in adj[choice[v]]:
            assert choice[owner[c2]] != c2, "resampling loop exited improperly"
    return phi, ResampleTrace(rounds, resampled, final_proper=True)
