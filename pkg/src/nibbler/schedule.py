"""Iterated parameter schedule and the full coloring pipeline.

Given a safety margin eps, a degree bound d, a sparsity level k and the
bipartite pattern parameters s >= t >= 1, the schedule fixes

    C   = 4 + eps  if k <= d^(eps (s+t)/200), else 8
    mu  = (C - eps)/2 * log(1 + eps/(8C))
    eta = mu / log(d k^(-1/(s+t)))
    ell_0 = C d / log(d k^(-1/(s+t)))        d_0 = d
    beta_0 = d^(-1/(200 t))

and iterates, with keep_i = (1 - eta/ell_i)^(2 d_i) and
uncolor_i = (1 - eta/ell_i)^(keep_i ell_i / 2):

    ell_{i+1}  = keep_i * ell_i
    d_{i+1}    = keep_i * uncolor_i * d_i
    beta_{i+1} = max((1 + 36 eta) beta_i, d_{i+1}^(-1/(200 t)))

until the first index i* with d_i <= ell_i / 100, where a local-lemma
finisher takes over.  The sanity checker verifies, numerically at the
given parameters, the three scheduling facts the iterated argument rests
on: the ratio d_i/ell_i never increases; every ell_i stays above the
power-law floor d (d k^(-1/(s+t)))^(-4/(C - 7 eps/8)); and i* exists
within an explicit cap.  The floor is an asymptotic statement -- at
moderate d and small eps it genuinely fails, and the checker reports
exactly that.

All arithmetic runs in double precision through log1p-based powers; the
extended mode (NIBBLER_PRECISION=extended, or precision="extended")
recomputes the recurrence with 80-bit or arbitrary-precision arithmetic
and records the worst relative deviation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .cover import (
    CorrespondenceCover,
    PartialColoring,
    is_proper,
    validate_cover,
)
from .errors import BudgetExhaustedError, PreconditionError
from .finisher import ResampleTrace, final_blow
from .nibble import NibbleParams, iteration_accept, wasteful_step
from .numerics import FloatBackend, extended_backend
from .patterns import MAX_PATTERN_VERTICES, PatternGraph, certify_local_sparsity


# ---------------------------------------------------------------------------
# Schedule construction
# ---------------------------------------------------------------------------


@dataclass
class RecheckReport:
    backend: str
    max_rel_dev: float
    i_star_match: bool
    per_sequence: dict


@dataclass
class Schedule:
    epsilon: float
    d0: float
    k: float
    s: int
    t: int
    C: float
    mu: float
    eta: float
    cap: int
    i_star: int | None  # None: divergence, no index within cap reached d <= ell/100
    ell: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    keep: np.ndarray = field(repr=False)
    uncolor: np.ndarray = field(repr=False)
    recheck: RecheckReport | None = None

    @property
    def log_dk(self) -> float:
        return math.log(self.d0 * self.k ** (-1.0 / (self.s + self.t)))

    def to_json_dict(self, max_sequence: int | None = None) -> dict:
        def seq(a):
            a = np.asarray(a, dtype=float)
            if max_sequence is None or len(a) <= max_sequence:
                return {"values": a.tolist()}
            head = max_sequence // 2
            tail = max_sequence - head
            return {
                "length": int(len(a)),
                "head": a[:head].tolist(),
                "tail": a[-tail:].tolist(),
                "truncated": True,
            }

        d = {
            "epsilon": self.epsilon,
            "d": self.d0,
            "k": self.k,
            "s": self.s,
            "t": self.t,
            "C": self.C,
            "mu": self.mu,
            "eta": self.eta,
            "cap": self.cap,
            "i_star": self.i_star,
            "ell": seq(self.ell),
            "d_seq": seq(self.d),
            "beta": seq(self.beta),
            "keep": seq(self.keep),
            "uncolor": seq(self.uncolor),
        }
        if self.recheck is not None:
            d["recheck"] = {
                "backend": self.recheck.backend,
                "max_rel_dev": self.recheck.max_rel_dev,
                "i_star_match": self.recheck.i_star_match,
            }
        return d


def select_c(epsilon: float, d: float, k: float, s: int, t: int) -> float:
    """C = 4 + eps in the small-k branch, 8 otherwise."""
    return 4.0 + epsilon if k <= d ** (epsilon * (s + t) / 200.0) else 8.0


def _iterate(epsilon, d, k, s, t, C, cap, backend):
    """Run the recurrence in the given arithmetic backend."""
    b = backend
    eps_b = b.num(epsilon)
    d_b = b.num(d)
    k_b = b.num(k)
    C_b = b.num(C)
    arg = d_b * k_b ** (b.num(-1.0) / b.num(s + t))
    log_dk = b.log(arg)
    mu = (C_b - eps_b) / b.num(2) * b.log(b.num(1) + eps_b / (b.num(8) * C_b))
    eta = mu / log_dk
    ell = C_b * d_b / log_dk
    dd = d_b
    beta = d_b ** (b.num(-1.0) / b.num(200 * t))
    ells, ds, betas, keeps, uncolors = [ell], [dd], [beta], [], []
    i = 0
    i_star = None
    hundred = b.num(100)
    two = b.num(2)
    while True:
        if dd <= ell / hundred:
            i_star = i
            break
        if i >= cap:
            break
        x = eta / ell
        if not x < 1:
            raise PreconditionError(
                f"eta >= ell at stage {i}: eta={float(eta):.6g}, ell={float(ell):.6g}"
            )
        keep = b.pow1m(x, two * dd)
        uncolor = b.pow1m(x, keep * ell / two)
        ell = keep * ell
        dd = keep * uncolor * dd
        floor_beta = dd ** (b.num(-1.0) / b.num(200 * t))
        grown = (b.num(1) + b.num(36) * eta) * beta
        beta = grown if grown > floor_beta else floor_beta
        keeps.append(keep)
        uncolors.append(uncolor)
        ells.append(ell)
        ds.append(dd)
        betas.append(beta)
        i += 1
    return {
        "mu": b.to_float(mu),
        "eta": b.to_float(eta),
        "i_star": i_star,
        "ell": [b.to_float(v) for v in ells],
        "d": [b.to_float(v) for v in ds],
        "beta": [b.to_float(v) for v in betas],
        "keep": [b.to_float(v) for v in keeps],
        "uncolor": [b.to_float(v) for v in uncolors],
    }


def build_schedule(
    epsilon: float,
    d: float,
    k: float,
    s: int,
    t: int,
    precision: str | None = None,
) -> Schedule:
    """Build the full parameter schedule; ``precision="extended"`` (or the
    NIBBLER_PRECISION environment variable) additionally recomputes it in
    extended precision and records the worst relative deviation."""
    if precision is None:
        precision = os.environ.get("NIBBLER_PRECISION", "double")
    if precision not in ("double", "extended"):
        raise PreconditionError(f"unknown precision mode {precision!r}")
    if not epsilon > 0:
        raise PreconditionError(f"need epsilon > 0, got {epsilon}")
    if d < 3:
        raise PreconditionError(f"need d >= 3, got {d}")
    if k < 0.5:
        raise PreconditionError(f"need k >= 1/2, got {k}")
    if not (isinstance(s, int) and isinstance(t, int) and s >= t >= 1):
        raise PreconditionError(f"need integers s >= t >= 1, got s={s}, t={t}")
    arg = d * k ** (-1.0 / (s + t))
    if not arg > 1.0:
        raise PreconditionError(
            f"need d k^(-1/(s+t)) > 1 for a positive log, got {arg:.6g}"
        )
    log_dk = math.log(arg)
    if not log_dk > 1.0:
        raise PreconditionError(
            f"stage cap undefined: log(d k^(-1/(s+t))) = {log_dk:.6g} <= 1"
        )
    # The branch for C and the integer cap are discrete choices; they are
    # fixed in double precision and shared by every backend.
    C = select_c(epsilon, d, k, s, t)
    mu = (C - epsilon) / 2.0 * math.log(1.0 + epsilon / (8.0 * C))
    cap = math.ceil(16.0 / mu * log_dk * math.log(log_dk))

    base = _iterate(epsilon, d, k, s, t, C, cap, FloatBackend())
    recheck = None
    if precision == "extended":
        ext_backend = extended_backend()
        ext = _iterate(epsilon, d, k, s, t, C, cap, ext_backend)
        per_sequence = {}
        worst = 0.0
        for name in ("ell", "d", "beta", "keep", "uncolor"):
            a = np.asarray(base[name], dtype=float)
            bseq = np.asarray(ext[name], dtype=float)
            m = min(len(a), len(bseq))
            if m == 0:
                per_sequence[name] = 0.0
                continue
            dev = float(np.max(np.abs(a[:m] - bseq[:m]) / np.abs(bseq[:m])))
            per_sequence[name] = dev
            worst = max(worst, dev)
        recheck = RecheckReport(
            backend=ext_backend.name,
            max_rel_dev=worst,
            i_star_match=base["i_star"] == ext["i_star"],
            per_sequence=per_sequence,
        )

    return Schedule(
        epsilon=epsilon,
        d0=float(d),
        k=float(k),
        s=s,
        t=t,
        C=C,
        mu=base["mu"],
        eta=base["eta"],
        cap=cap,
        i_star=base["i_star"],
        ell=np.asarray(base["ell"], dtype=float),
        d=np.asarray(base["d"], dtype=float),
        beta=np.asarray(base["beta"], dtype=float),
        keep=np.asarray(base["keep"], dtype=float),
        uncolor=np.asarray(base["uncolor"], dtype=float),
        recheck=recheck,
    )


# ---------------------------------------------------------------------------
# Sanity checks on a built schedule
# ---------------------------------------------------------------------------


@dataclass
class ScheduleSanity:
    ratio_monotone: bool
    ratio_first_bad: int | None
    ratio_start_identity: bool  # d0/ell0 == log(d k^(-1/(s+t)))/C
    exponent_in_range: bool  # 0 < 4/(C - 7 eps/8) < 1
    list_floor_value: float
    list_floor_ok: bool
    list_floor_first_bad: int | None
    list_floor_min_margin: float  # min_i ell_i / floor
    i_star_found: bool
    i_star_within_cap: bool
    i_star_minimal: bool

    @property
    def all_passed(self) -> bool:
        return (
            self.ratio_monotone
            and self.ratio_start_identity
            and self.exponent_in_range
            and self.list_floor_ok
            and self.i_star_found
            and self.i_star_within_cap
            and self.i_star_minimal
        )

    def failures(self) -> list:
        out = []
        if not self.ratio_monotone:
            out.append(f"ratio d_i/ell_i increases at index {self.ratio_first_bad}")
        if not self.ratio_start_identity:
            out.append("d0/ell0 does not equal log(d k^(-1/(s+t)))/C")
        if not self.exponent_in_range:
            out.append("floor exponent 4/(C - 7eps/8) outside (0,1)")
        if not self.list_floor_ok:
            out.append(
                f"list floor {self.list_floor_value:.6g} violated first at index "
                f"{self.list_floor_first_bad} (min margin {self.list_floor_min_margin:.4g})"
            )
        if not self.i_star_found:
            out.append("no index reached d <= ell/100 within the cap")
        elif not self.i_star_within_cap:
            out.append("i* exceeds the cap")
        elif not self.i_star_minimal:
            out.append("i* is not the minimal index with d <= ell/100")
        return out


def check_schedule_sanity(schedule: Schedule) -> ScheduleSanity:
    """Numerically verify, for all i <= i*, ratio monotonicity, the
    power-law list floor, and the existence/minimality of i* within cap."""
    ell = schedule.ell
    d = schedule.d
    ratios = d / ell
    bad = np.flatnonzero(ratios[1:] > ratios[:-1])
    ratio_monotone = bad.size == 0
    ratio_first_bad = int(bad[0]) + 1 if bad.size else None

    expected0 = schedule.log_dk / schedule.C
    ratio_start_identity = math.isclose(ratios[0], expected0, rel_tol=1e-12)

    expo = 4.0 / (schedule.C - 7.0 * schedule.epsilon / 8.0)
    exponent_in_range = 0.0 < expo < 1.0

    floor = schedule.d0 * math.exp(-expo * schedule.log_dk)
    below = np.flatnonzero(ell < floor)
    list_floor_ok = below.size == 0
    list_floor_first_bad = int(below[0]) if below.size else None
    list_floor_min_margin = float(np.min(ell) / floor)

    i_star_found = schedule.i_star is not None
    i_star_within_cap = i_star_found and schedule.i_star <= schedule.cap
    if i_star_found:
        i = schedule.i_star
        minimal = d[i] <= ell[i] / 100.0 and all(
            d[j] > ell[j] / 100.0 for j in range(i)
        )
    else:
        minimal = False
    return ScheduleSanity(
        ratio_monotone=ratio_monotone,
        ratio_first_bad=ratio_first_bad,
        ratio_start_identity=ratio_start_identity,
        exponent_in_range=exponent_in_range,
        list_floor_value=floor,
        list_floor_ok=list_floor_ok,
        list_floor_first_bad=list_floor_first_bad,
        list_floor_min_margin=list_floor_min_margin,
        i_star_found=i_star_found,
        i_star_within_cap=bool(i_star_within_cap),
        i_star_minimal=bool(minimal),
    )


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


@dataclass
class StageTrace:
    stage: int
    attempts: int
    accepted: bool
    forced: bool
    colored: int
    remaining: int
    min_list: int
    delta_h: int
    failed_conditions: list

    def to_json_dict(self) -> dict:
        return {
            "stage": self.stage,
            "attempts": self.attempts,
            "accepted": self.accepted,
            "forced": self.forced,
            "colored": self.colored,
            "remaining": self.remaining,
            "min_list": self.min_list,
            "delta_h": self.delta_h,
            "failed_conditions": list(self.failed_conditions),
        }


@dataclass
class PipelineResult:
    success: bool
    coloring: PartialColoring | None
    stage_traces: list
    schedule: Schedule | None
    i_star: int | None
    finisher_stage: int | None
    finisher_trace: ResampleTrace | None
    failure: dict | None

    def to_json_dict(self, n: int | None = None) -> dict:
        d = {
            "success": self.success,
            "i_star": self.i_star,
            "stages": [st.to_json_dict() for st in self.stage_traces],
            "finisher_stage": self.finisher_stage,
            "failure": self.failure,
        }
        if self.finisher_trace is not None:
            d["finisher"] = {
                "rounds": self.finisher_trace.rounds,
                "resampled_events": self.finisher_trace.resampled_events,
                "final_proper": self.finisher_trace.final_proper,
            }
        if self.coloring is not None and n is not None:
            d["coloring"] = self.coloring.to_json_dict(n)
        return d


def _finish(cover, b2o, c2o, master_seq, stage, round_cap):
    ell = cover.min_list_size()
    phi_local, trace = final_blow(
        cover, ell, np.random.SeedSequence(entropy=master_seq, spawn_key=(2, stage)),
        round_cap=round_cap,
    )
    mapped = {b2o[v]: c2o[c] for v, c in phi_local.assignment.items()}
    return mapped, trace


def run_pipeline(
    cover: CorrespondenceCover,
    epsilon: float,
    k: float,
    s: int,
    t: int,
    seed,
    retry_budget: int = 200,
    best_effort: bool = False,
    assume_sparse: bool = False,
    round_cap: int = 10**6,
    precision: str | None = None,
) -> PipelineResult:
    """Color the base graph through iterated wasteful rounds plus the
    local-lemma finisher.

    Preconditions (raised as errors): the cover validates, every list has
    at least ceil(ell_0) colors, and the cover graph is (k, K_{s,t})-
    locally-sparse (certified here unless ``assume_sparse``).  Runtime
    failures (retry budget, finisher preconditions at stage i*, resample
    cap) come back as a failure report, never as a bogus coloring; every
    returned coloring is re-verified against the original cover.
    """
    violations = validate_cover(cover)
    if violations:
        raise PreconditionError(
            f"cover invalid: {'; '.join(str(v) for v in violations[:3])}"
        )
    if not isinstance(seed, (int, np.integer)):
        raise PreconditionError("seed must be an integer")
    master = int(seed)

    n = cover.base.n
    if n == 0:
        return PipelineResult(True, PartialColoring(), [], None, None, None, None, None)

    # Lists that already dominate the color degrees eightfold go straight
    # to the finisher, before any trimming.
    min_list = cover.min_list_size()
    delta_h = cover.max_color_degree()
    identity = list(range(n)), list(range(cover.cover.n))
    if min_list >= 1 and 8 * delta_h <= min_list:
        try:
            mapped, trace = _finish(cover, identity[0], identity[1], master, 0, round_cap)
        except BudgetExhaustedError as exc:
            return PipelineResult(
                False, None, [], None, None, 0, exc.payload.get("trace"),
                {"kind": "round-cap", "stage": 0},
            )
        phi = PartialColoring(mapped)
        ok, pair = is_proper(cover, phi)
        if not ok:
            raise RuntimeError(f"finisher emitted an improper coloring: {pair}")
        return PipelineResult(True, phi, [], None, None, 0, trace, None)

    d_param = max(float(delta_h), 3.0)
    k_sched = max(float(k), 1.0)  # any k < 1 forbids the same copies as k = 1
    schedule = build_schedule(epsilon, d_param, k_sched, s, t, precision=precision)
    if schedule.i_star is None:
        raise PreconditionError(
            f"schedule diverged: no stage within cap {schedule.cap} reaches d <= ell/100"
        )

    if not assume_sparse:
        if s + t > MAX_PATTERN_VERTICES:
            raise PreconditionError(
                f"cannot certify K_{{{s},{t}}} sparsity (s+t > {MAX_PATTERN_VERTICES}); "
                "pass assume_sparse=True to assert it"
            )
        pattern = PatternGraph.complete_bipartite(max(s, t), min(s, t))
        report = certify_local_sparsity(cover.cover, k, pattern)
        if not report.holds:
            raise PreconditionError(
                f"cover graph is not ({k}, K_{{{s},{t}}})-locally-sparse: "
                f"max neighborhood count {report.max_count} at color {report.argmax_vertex}"
            )

    ell0 = math.ceil(schedule.ell[0])
    if min_list < ell0:
        raise PreconditionError(
            f"lists too small: min |L(v)| = {min_list} < ceil(ell_0) = {ell0}"
        )

    # Trim every list to exactly ceil(ell_0) colors (dropping the
    # highest-index ones), then drop base edges with empty matchings.
    trimmed = {v: cover.lists[v][:ell0] for v in range(n)}
    cur, b2o, c2o = cover.restrict(range(n), trimmed)
    cur = cur.without_empty_base_edges()

    total: dict = {}
    traces: list = []
    master_seq = master

    for stage in range(schedule.i_star + 1):
        if cur.base.n == 0:
            break
        min_l = cur.min_list_size()
        delta = cur.max_color_degree()
        if min_l >= 1 and 8 * delta <= min_l:
            try:
                mapped, ftrace = _finish(cur, b2o, c2o, master_seq, stage, round_cap)
            except BudgetExhaustedError as exc:
                return PipelineResult(
                    False, None, traces, schedule, schedule.i_star, stage,
                    exc.payload.get("trace"), {"kind": "round-cap", "stage": stage},
                )
            total.update(mapped)
            phi = PartialColoring(total)
            ok, pair = is_proper(cover, phi)
            if not ok:
                raise RuntimeError(f"pipeline emitted an improper coloring: {pair}")
            if not phi.is_total_on(n):
                raise RuntimeError("finisher returned with uncolored vertices")
            return PipelineResult(
                True, phi, traces, schedule, schedule.i_star, stage, ftrace, None
            )
        if stage == schedule.i_star:
            return PipelineResult(
                False, None, traces, schedule, schedule.i_star, None, None,
                {
                    "kind": "final-blow-precondition",
                    "stage": stage,
                    "min_list": min_l,
                    "eight_delta": 8 * delta,
                },
            )

        params = NibbleParams(
            eta=schedule.eta,
            ell=float(schedule.ell[stage]),
            d=float(schedule.d[stage]),
            beta=float(schedule.beta[stage]),
        )
        if cur.max_color_degree() > 2.0 * params.d:
            if not best_effort:
                return PipelineResult(
                    False, None, traces, schedule, schedule.i_star, None, None,
                    {
                        "kind": "degree-overflow",
                        "stage": stage,
                        "delta_h": cur.max_color_degree(),
                        "two_d": 2.0 * params.d,
                    },
                )
            params = NibbleParams(
                eta=params.eta,
                ell=params.ell,
                d=cur.max_color_degree() / 2.0,
                beta=params.beta,
            )

        first_attempt = None
        advanced = False
        for attempt in range(max(1, retry_budget)):
            seq = np.random.SeedSequence(entropy=master_seq, spawn_key=(1, stage, attempt))
            outcome = wasteful_step(cur, params, seq)
            uncolored = sorted(outcome.pruned_lists)
            nxt, vmap, cmap = cur.restrict(uncolored, outcome.pruned_lists)
            try:
                params_next = NibbleParams(
                    eta=params.eta,
                    ell=params.ell_next,
                    d=params.d_next,
                    beta=params.beta_next,
                )
            except PreconditionError:
                return PipelineResult(
                    False, None, traces, schedule, schedule.i_star, None, None,
                    {
                        "kind": "eta-guard",
                        "stage": stage,
                        "eta": params.eta,
                        "ell_next": params.ell_next,
                    },
                )
            accepted, fails = iteration_accept(outcome, params_next, nxt)
            if first_attempt is None:
                first_attempt = (outcome, nxt, vmap, cmap, fails)
            if accepted:
                for v_loc, c_loc in outcome.phi.assignment.items():
                    total[b2o[v_loc]] = c2o[c_loc]
                traces.append(StageTrace(
                    stage=stage, attempts=attempt + 1, accepted=True, forced=False,
                    colored=len(outcome.phi), remaining=nxt.base.n,
                    min_list=nxt.min_list_size(), delta_h=nxt.max_color_degree(),
                    failed_conditions=[],
                ))
                b2o = [b2o[v] for v in vmap]
                c2o = [c2o[c] for c in cmap]
                cur = nxt
                advanced = True
                break
        if not advanced:
            if best_effort:
                outcome, nxt, vmap, cmap, fails = first_attempt
                for v_loc, c_loc in outcome.phi.assignment.items():
                    total[b2o[v_loc]] = c2o[c_loc]
                traces.append(StageTrace(
                    stage=stage, attempts=max(1, retry_budget), accepted=False,
                    forced=True, colored=len(outcome.phi), remaining=nxt.base.n,
                    min_list=nxt.min_list_size(), delta_h=nxt.max_color_degree(),
                    failed_conditions=fails,
                ))
                b2o = [b2o[v] for v in vmap]
                c2o = [c2o[c] for c in cmap]
                cur = nxt
            else:
                return PipelineResult(
                    False, None, traces, schedule, schedule.i_star, None, None,
                    {
                        "kind": "retry-budget",
                        "stage": stage,
                        "attempts": max(1, retry_budget),
                        "failed_conditions": first_attempt[4] if first_attempt else [],
                    },
                )

    phi = PartialColoring(total)
    if cur.base.n == 0:
        ok, pair = is_proper(cover, phi)
        if not ok:
            raise RuntimeError(f"pipeline emitted an improper coloring: {pair}")
        if not phi.is_total_on(n):
            raise RuntimeError("stage loop ended with uncolored vertices unaccounted")
        return PipelineResult(
            True, phi, traces, schedule, schedule.i_star, None, None, None
        )
    # Fell through the stage loop without reaching the finisher condition.
    return PipelineResult(
        False, None, traces, schedule, schedule.i_star, None, None,
        {
            "kind": "final-blow-precondition",
            "stage": schedule.i_star,
            "min_list": cur.min_list_size(),
            "eight_delta": 8 * cur.max_color_degree(),
        },
    )
