"""One round of the Wasteful Coloring Procedure.

Given a cover (L, H) and parameters (eta, ell, d, beta) the round:

  1. activates each color independently with probability eta/ell;
  2. flips an equalizing coin per color with success probability
     keep / (1 - eta/ell)^deg_H(c), so every color is *kept* with
     probability exactly keep = (1 - eta/ell)^(2d);
  3. keeps the colors whose coin succeeded and whose H-neighborhood holds
     no activated color;
  4. colors each vertex with the least activated-and-kept color of its
     list, if any;
  5. collects the colors owned by still-uncolored vertices;
  6. prunes each kept list to the colors with at most 2 d' kept-and-
     uncolored H-neighbors, where d' = keep * uncolor * d.

Randomness comes from one seeded generator split into three fixed streams
(activation, equalizing, reserved), drawn in ascending color order, so
outcomes are bit-reproducible.  Properness of the produced partial
coloring is structural (a kept color has no activated neighbor while every
assigned color is activated) and asserted on every run.

``check_hypotheses`` measures the nine-condition checklist under which a
round is guaranteed (for sufficiently large d) to admit an acceptable
outcome; it reports, never blocks: the procedure itself is well defined
whenever Delta(H) <= 2d and eta < ell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cover import CorrespondenceCover, PartialColoring
from .errors import PreconditionError
from .numerics import pow1m, pow1m_array
from .patterns import MAX_PATTERN_VERTICES, PatternGraph, certify_local_sparsity


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NibbleParams:
    """One round's inputs (eta, ell, d, beta) and derived quantities."""

    eta: float
    ell: float
    d: float
    beta: float
    keep: float = field(init=False)
    uncolor: float = field(init=False)
    ell_next: float = field(init=False)
    d_next: float = field(init=False)
    beta_next: float = field(init=False)

    def __post_init__(self):
        if not self.eta > 0:
            raise PreconditionError(f"need eta > 0, got {self.eta}")
        if not self.eta < self.ell:
            raise PreconditionError(
                f"need eta < ell for well-defined equalizing flips, got "
                f"eta={self.eta}, ell={self.ell}"
            )
        if not self.d > 0:
            raise PreconditionError(f"need d > 0, got {self.d}")
        if self.beta < 0:
            raise PreconditionError(f"need beta >= 0, got {self.beta}")
        x = self.eta / self.ell
        keep = pow1m(x, 2.0 * self.d)
        uncolor = pow1m(x, keep * self.ell / 2.0)
        object.__setattr__(self, "keep", keep)
        object.__setattr__(self, "uncolor", uncolor)
        object.__setattr__(self, "ell_next", keep * self.ell)
        object.__setattr__(self, "d_next", keep * uncolor * self.d)
        object.__setattr__(self, "beta_next", (1.0 + 36.0 * self.eta) * self.beta)


def derived_params(eta: float, ell: float, d: float, beta: float) -> NibbleParams:
    return NibbleParams(eta=eta, ell=ell, d=d, beta=beta)


# ---------------------------------------------------------------------------
# The round itself
# ---------------------------------------------------------------------------


@dataclass
class NibbleTrace:
    activated_count: int
    kept_count: int
    colored_count: int
    kept_per_vertex: list  # |K(v)|
    kept_uncolored_edges_per_vertex: list  # |E_K(v) cap E_U(v)|


@dataclass
class NibbleOutcome:
    phi: PartialColoring
    pruned_lists: dict  # uncolored vertex -> list of colors, subset of K(v)
    trace: NibbleTrace

    def to_json_dict(self, cover: CorrespondenceCover) -> dict:
        return {
            "phi": self.phi.to_json_dict(cover.base.n),
            "pruned_lists": {str(v): list(cs) for v, cs in sorted(self.pruned_lists.items())},
            "trace": {
                "activated_count": self.trace.activated_count,
                "kept_count": self.trace.kept_count,
                "colored_count": self.trace.colored_count,
                "kept_per_vertex": list(self.trace.kept_per_vertex),
                "kept_uncolored_edges_per_vertex": list(
                    self.trace.kept_uncolored_edges_per_vertex
                ),
            },
        }


def wasteful_step(cover: CorrespondenceCover, params: NibbleParams, seed) -> NibbleOutcome:
    """Execute activation, equalizing flips, keep, assignment and pruning.

    Requires Delta(H) <= 2d (otherwise an equalizing probability would
    exceed one) and eta < ell.  Deterministic given (cover, params, seed).
    """
    n = cover.base.n
    n_h = cover.cover.n
    owner = cover.owner_array()
    degrees = np.fromiter((len(a) for a in cover.cover.adj), dtype=np.int64, count=n_h)
    max_deg = int(degrees.max(initial=0))
    if max_deg > 2.0 * params.d:
        raise PreconditionError(
            f"Delta(H) = {max_deg} exceeds 2d = {2.0 * params.d}: "
            "equalizing probability would exceed 1"
        )

    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    act_stream, eq_stream, _reserved = seq.spawn(3)
    act_rng = np.random.default_rng(act_stream)
    eq_rng = np.random.default_rng(eq_stream)

    x = params.eta / params.ell

    # 1. activation, drawn in ascending color order
    activated = act_rng.random(n_h) < x

    # 2. equalizing flips: success prob (1 - x)^(2d - deg_H(c))
    p_eq = pow1m_array(x, 2.0 * params.d - degrees)
    eq = eq_rng.random(n_h) < p_eq

    # 3. kept colors: coin succeeded and no activated H-neighbor
    e_u, e_v = cover.edge_arrays()
    nbr_activated = np.zeros(n_h, dtype=bool)
    if e_u.size:
        np.logical_or.at(nbr_activated, e_u, activated[e_v])
        np.logical_or.at(nbr_activated, e_v, activated[e_u])
    kept = eq & ~nbr_activated

    # 4. assign each vertex the least activated-and-kept color of its list
    phi_arr = np.full(n, -1, dtype=np.int64)
    both = np.flatnonzero(activated & kept)  # ascending color index
    if both.size:
        owners = owner[both]
        uniq, first = np.unique(owners, return_index=True)
        phi_arr[uniq] = both[first]

    # 5. colors of uncolored vertices
    uncolored_vertex = phi_arr < 0
    in_u = uncolored_vertex[owner]

    # 6. prune kept lists by the 2d' threshold on kept-and-uncolored neighbors
    kept_unc = kept & in_u
    nbr_count = np.zeros(n_h, dtype=np.int64)
    if e_u.size:
        np.add.at(nbr_count, e_u, kept_unc[e_v].astype(np.int64))
        np.add.at(nbr_count, e_v, kept_unc[e_u].astype(np.int64))
    keep_in_list = kept & (nbr_count <= 2.0 * params.d_next)

    pruned = {
        v: [c for c in cover.lists[v] if keep_in_list[c]]
        for v in range(n)
        if uncolored_vertex[v]
    }

    # structural properness: assigned colors are activated, kept colors
    # have no activated neighbor, hence no two assigned colors correspond
    chosen = np.zeros(n_h, dtype=bool)
    chosen[phi_arr[phi_arr >= 0]] = True
    if e_u.size and bool((chosen[e_u] & chosen[e_v]).any()):
        raise RuntimeError("structural properness violated; cover or RNG state corrupt")

    kept_per_vertex = np.zeros(n, dtype=np.int64)
    np.add.at(kept_per_vertex, owner, kept.astype(np.int64))
    ek_eu = np.zeros(n, dtype=np.int64)
    if e_u.size:
        both_kept = kept[e_u] & kept[e_v]
        np.add.at(ek_eu, owner[e_u], (both_kept & in_u[e_v]).astype(np.int64))
        np.add.at(ek_eu, owner[e_v], (both_kept & in_u[e_u]).astype(np.int64))

    phi = PartialColoring(
        {int(v): int(c) for v, c in enumerate(phi_arr) if c >= 0}
    )
    trace = NibbleTrace(
        activated_count=int(activated.sum()),
        kept_count=int(kept.sum()),
        colored_count=int((~uncolored_vertex).sum()),
        kept_per_vertex=kept_per_vertex.tolist(),
        kept_uncolored_edges_per_vertex=ek_eu.tolist(),
    )
    return NibbleOutcome(phi=phi, pruned_lists=pruned, trace=trace)


# ---------------------------------------------------------------------------
# Average color degree
# ---------------------------------------------------------------------------


def avg_color_degree(cover: CorrespondenceCover, v: int) -> float:
    """Mean cover-degree over the list of v."""
    lst = cover.lists[v]
    if not lst:
        raise PreconditionError(f"vertex {v} has an empty list")
    return sum(cover.cover.degree(c) for c in lst) / len(lst)


# ---------------------------------------------------------------------------
# Hypothesis checklist
# ---------------------------------------------------------------------------


@dataclass
class HypothesisItem:
    index: int
    label: str
    passed: bool | None  # None: not decidable (existential threshold not supplied)
    measured: dict

    def __str__(self):
        status = {True: "pass", False: "FAIL", None: "n/a"}[self.passed]
        return f"({self.index}) {status}: {self.label} {self.measured}"


@dataclass
class HypothesisReport:
    items: list

    @property
    def all_passed(self) -> bool:
        return all(item.passed is not False for item in self.items)

    def failed(self) -> list:
        return [item for item in self.items if item.passed is False]


def check_hypotheses(
    cover: CorrespondenceCover,
    params: NibbleParams,
    k: float,
    s: int,
    t: int,
    d_tilde: float | None = None,
    alpha_tilde: float | None = None,
) -> HypothesisReport:
    """Measure the nine-part precondition checklist for one round.

    The "d sufficiently large" and "t <= alpha * log d / log log d"
    conditions involve existential constants that are never quantified;
    they are reported against user-supplied thresholds when given and
    marked undecidable otherwise.
    """
    d, ell, eta, beta = params.d, params.ell, params.eta, params.beta
    items = []

    items.append(
        HypothesisItem(
            1,
            "d large enough (threshold user-supplied)",
            None if d_tilde is None else d >= d_tilde,
            {"d": d, "threshold": d_tilde},
        )
    )

    k_hi = d ** ((s + t) / 5.0)
    items.append(
        HypothesisItem(
            2, "1/2 <= k <= d^((s+t)/5)", 0.5 <= k <= k_hi, {"k": k, "upper": k_hi}
        )
    )

    items.append(
        HypothesisItem(
            3,
            "4*eta*d < ell < 100*d",
            4.0 * eta * d < ell < 100.0 * d,
            {"4_eta_d": 4.0 * eta * d, "ell": ell, "100_d": 100.0 * d},
        )
    )

    s_cap = d ** (2.0 / 25.0)
    t_cap = None
    if alpha_tilde is not None and d > math.e:
        loglog = math.log(math.log(d))
        t_cap = alpha_tilde * math.log(d) / loglog if loglog > 0 else None
    sub_ok = s <= s_cap and 1 <= t <= s
    passed4 = sub_ok if t_cap is None else (sub_ok and t <= t_cap)
    items.append(
        HypothesisItem(
            4,
            "s <= d^(2/25), 1 <= t <= s, t within log window",
            passed4 if (alpha_tilde is None or t_cap is not None) else None,
            {"s": s, "s_cap": s_cap, "t": t, "t_cap": t_cap},
        )
    )

    arg = d * k ** (-1.0 / (s + t)) if k > 0 else math.inf
    lo = 1.0 / math.log(d) ** 5 if d > 1 else math.inf
    hi = 1.0 / math.log(arg) if arg > 1 else 0.0
    items.append(
        HypothesisItem(
            5,
            "1/log^5(d) < eta < 1/log(d k^(-1/(s+t)))",
            lo < eta < hi,
            {"lower": lo, "eta": eta, "upper": hi},
        )
    )

    if s + t <= MAX_PATTERN_VERTICES:
        pattern = PatternGraph.complete_bipartite(max(s, t), min(s, t))
        report = certify_local_sparsity(cover.cover, k, pattern)
        items.append(
            HypothesisItem(
                6,
                f"H is (k, K_{{{s},{t}}})-locally-sparse",
                report.holds,
                {"max_count": report.max_count, "floor_k": math.floor(k)},
            )
        )
    else:
        items.append(
            HypothesisItem(
                6,
                f"H is (k, K_{{{s},{t}}})-locally-sparse",
                None,
                {"note": f"s+t={s + t} exceeds pattern cap {MAX_PATTERN_VERTICES}"},
            )
        )

    delta_h = cover.max_color_degree()
    items.append(
        HypothesisItem(7, "Delta(H) <= 2d", delta_h <= 2.0 * d, {"Delta_H": delta_h, "2d": 2.0 * d})
    )

    lo8, hi8 = (1.0 - beta) * ell / 2.0, (1.0 + beta) * ell
    offender = None
    for v, lst in enumerate(cover.lists):
        if not (lo8 <= len(lst) <= hi8):
            offender = (v, len(lst))
            break
    items.append(
        HypothesisItem(
            8,
            "(1-beta)*ell/2 <= |L(v)| <= (1+beta)*ell",
            offender is None,
            {"lower": lo8, "upper": hi8, "offender": offender},
        )
    )

    offender9 = None
    for v, lst in enumerate(cover.lists):
        if not lst:
            offender9 = (v, "empty list")
            break
        bound = (2.0 - (1.0 - beta) * ell / len(lst)) * d
        mean = avg_color_degree(cover, v)
        if mean > bound:
            offender9 = (v, mean, bound)
            break
    items.append(
        HypothesisItem(
            9,
            "avg color degree <= (2 - (1-beta)*ell/|L(v)|)*d",
            offender9 is None,
            {"offender": offender9},
        )
    )

    return HypothesisReport(items)


# ---------------------------------------------------------------------------
# Round acceptance
# ---------------------------------------------------------------------------


def iteration_accept(
    outcome: NibbleOutcome,
    params_next: NibbleParams,
    next_cover: CorrespondenceCover,
) -> tuple:
    """Accept a round when every still-uncolored vertex keeps a list in the
    primed window, the pruned cover's degree is within 2d', and average
    color degrees satisfy the primed inequality.

    ``params_next`` carries (ell, d, beta) = (ell', d', beta') for the next
    round; sparsity of the pruned cover is inherited and not rechecked.
    """
    ell_p, d_p, beta_p = params_next.ell, params_next.d, params_next.beta
    failures = []
    if next_cover.base.n == 0:
        return True, []

    hi = (1.0 + beta_p) * ell_p
    lo = (1.0 - beta_p) * ell_p / 2.0
    for v, lst in enumerate(next_cover.lists):
        size = len(lst)
        if size == 0:
            failures.append(f"(ii) pruned list empty at vertex {v}")
        elif size > hi:
            failures.append(f"(i) |L'(v)| = {size} > (1+beta')ell' = {hi:.6g} at vertex {v}")
        elif size < lo:
            failures.append(f"(ii) |L'(v)| = {size} < (1-beta')ell'/2 = {lo:.6g} at vertex {v}")

    delta = next_cover.max_color_degree()
    if delta > 2.0 * d_p:
        failures.append(f"(iii) Delta(H') = {delta} > 2d' = {2.0 * d_p:.6g}")

    for v, lst in enumerate(next_cover.lists):
        if not lst:
            continue
        bound = (2.0 - (1.0 - beta_p) * ell_p / len(lst)) * d_p
        mean = avg_color_degree(next_cover, v)
        if mean > bound:
            failures.append(
                f"(iv) avg color degree {mean:.6g} > {bound:.6g} at vertex {v}"
            )
            break

    return (not failures), failures
