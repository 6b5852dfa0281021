"""Command-line entry point.

Subcommands: gen, certify, validate-cover, nibble-step, schedule, color,
finish, verify, sweep.  Every randomized command requires an explicit
--seed; there is no ambient entropy.  Exit codes: 0 success, 2
precondition or validation failure, 3 budget exhaustion, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cover import (
    CorrespondenceCover,
    PartialColoring,
    load_cover,
    load_coloring,
    random_cover,
    save_cover,
    save_coloring,
    validate_cover,
)
from .errors import BudgetExhaustedError, PreconditionError
from .finisher import final_blow
from .graph import Graph, load_graph, save_graph
from .instances import gnp, measured_local_sparsity, planted_sparse, random_bipartite
from .nibble import NibbleParams, wasteful_step
from .patterns import PatternGraph, certify_local_sparsity
from .schedule import build_schedule, check_schedule_sanity, run_pipeline

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_BUDGET = 3
EXIT_IO = 4

_PATTERN_RE = re.compile(r"^([KPC])(\d+)(?:,(\d+))?$")


def pattern_from_spec(spec: str) -> PatternGraph:
    """Parse 'K3', 'P4', 'C6', 'K2,2' or fall back to a graph JSON path."""
    m = _PATTERN_RE.match(spec.strip())
    if m:
        kind, a, b = m.group(1), int(m.group(2)), m.group(3)
        if b is not None:
            if kind != "K":
                raise PreconditionError(f"two-part pattern spec must be K<s>,<t>: {spec}")
            s, t = int(a), int(b)
            return PatternGraph.complete_bipartite(max(s, t), min(s, t))
        if kind == "K":
            return PatternGraph.clique(a)
        if kind == "P":
            return PatternGraph.path(a)
        return PatternGraph.cycle(a)
    return PatternGraph(load_graph(spec))


def _emit(obj, out_path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.kind == "gnp":
        g = gnp(args.n, args.p, args.seed)
    elif args.kind == "bipartite":
        g = random_bipartite(args.a, args.b, args.p, args.seed)
    else:
        pattern = pattern_from_spec(args.pattern)
        g = planted_sparse(args.n, args.target_k, pattern, args.degree_budget, args.seed)
    save_graph(g, args.out)
    print(f"wrote {args.out} (n={g.n}, m={g.m})")
    return EXIT_OK


def cmd_certify(args) -> int:
    g = load_graph(args.graph)
    pattern = pattern_from_spec(args.pattern)
    report = certify_local_sparsity(g, args.k, pattern)
    _emit(report.to_json_dict(), args.out)
    return EXIT_OK


def cmd_validate_cover(args) -> int:
    cover = load_cover(args.cover)
    violations = validate_cover(cover)
    if violations:
        for v in violations:
            print(str(v))
        return EXIT_PRECONDITION
    print("cover valid: CC1-CC3 hold")
    return EXIT_OK


def cmd_nibble_step(args) -> int:
    cover = load_cover(args.cover)
    params = NibbleParams(eta=args.eta, ell=args.ell, d=args.d, beta=args.beta)
    outcome = wasteful_step(cover, params, args.seed)
    _emit(outcome.to_json_dict(cover), args.out)
    return EXIT_OK


def cmd_schedule(args) -> int:
    sched = build_schedule(args.eps, args.d, args.k, args.s, args.t,
                           precision=args.precision)
    sanity = check_schedule_sanity(sched)
    max_seq = None if args.full_sequences else 32
    _emit(
        {
            "schedule": sched.to_json_dict(max_sequence=max_seq),
            "sanity": {
                "all_passed": sanity.all_passed,
                "failures": sanity.failures(),
                "list_floor_value": sanity.list_floor_value,
                "list_floor_min_margin": sanity.list_floor_min_margin,
            },
        },
        args.out,
    )
    return EXIT_OK


def cmd_color(args) -> int:
    cover = load_cover(args.cover)
    result = run_pipeline(
        cover,
        epsilon=args.eps,
        k=args.k,
        s=args.s,
        t=args.t,
        seed=args.seed,
        retry_budget=args.retries,
        best_effort=args.best_effort,
        assume_sparse=args.assume_sparse,
    )
    trace = result.to_json_dict(cover.base.n)
    if args.trace:
        _emit(trace, args.trace)
    if result.success:
        save_coloring(result.coloring, cover.base.n, args.out)
        print(f"wrote {args.out} (stages={len(result.stage_traces)}, "
              f"finisher_stage={result.finisher_stage})")
        return EXIT_OK
    print(json.dumps({"failure": result.failure}, indent=2, sort_keys=True))
    kind = (result.failure or {}).get("kind", "")
    return EXIT_BUDGET if kind in ("retry-budget", "round-cap") else EXIT_PRECONDITION


def cmd_finish(args) -> int:
    cover = load_cover(args.cover)
    try:
        phi, trace = final_blow(cover, args.ell, args.seed, round_cap=args.round_cap)
    except BudgetExhaustedError as exc:
        t = exc.payload.get("trace")
        print(json.dumps({"failure": "round-cap", "rounds": t.rounds if t else None}))
        return EXIT_BUDGET
    save_coloring(phi, cover.base.n, args.out)
    print(json.dumps({
        "rounds": trace.rounds,
        "resampled_events": trace.resampled_events,
        "final_proper": trace.final_proper,
        "out": str(args.out),
    }, sort_keys=True))
    return EXIT_OK


def verify_files(cover_path, coloring_path, require_total=False):
    """File-based verifier: reruns properness from disk, not memory.

    Returns (ok, message)."""
    cover = load_cover(cover_path)
    phi = load_coloring(coloring_path)
    problems = validate_cover(cover)
    if problems:
        return False, f"cover invalid: {problems[0]}"
    owner = cover.owner_array()
    for v, c in sorted(phi.assignment.items()):
        if not (0 <= v < cover.base.n):
            return False, f"vertex {v} out of range"
        if not (0 <= c < cover.cover.n) or c not in cover.lists[v]:
            return False, f"vertex {v} assigned color {c} outside its list"
    image = {c: v for v, c in phi.assignment.items()}
    for (a, b) in cover.cover.edges():
        if a in image and b in image:
            u, w = int(owner[a]), int(owner[b])
            return False, (
                f"improper: colors ({u},{a}) and ({w},{b}) correspond in the cover"
            )
    if require_total and not phi.is_total_on(cover.base.n):
        missing = [v for v in range(cover.base.n) if v not in phi.assignment]
        return False, f"coloring not total: vertex {missing[0]} uncolored"
    return True, "coloring verified proper"


def cmd_verify(args) -> int:
    ok, message = verify_files(args.cover, args.coloring, require_total=args.require_total)
    print(message)
    return EXIT_OK if ok else EXIT_PRECONDITION


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = [
    "name", "seed", "instance_hash", "delta_H", "measured_k", "ell0",
    "stages_run", "i_star", "success", "failure_kind", "wall_time_s",
]


def _load_config(path) -> dict:
    text = Path(path).read_bytes()
    if str(path).endswith(".toml"):
        try:
            import tomllib  # py311+
        except ImportError:  # pragma: no cover - py310 path
            import tomli as tomllib
        return tomllib.loads(text.decode("utf-8"))
    return json.loads(text.decode("utf-8"))


def _check_run_config(i, run) -> None:
    for key in ("generator", "q", "epsilon", "k", "s", "t", "seeds"):
        if key not in run:
            raise PreconditionError(f"runs[{i}]: missing required key {key!r}")
    gen = run["generator"]
    kind = gen.get("kind")
    if kind not in ("gnp", "bipartite", "planted"):
        raise PreconditionError(f"runs[{i}]: unknown generator kind {kind!r}")
    needed = {
        "gnp": ("n", "p"),
        "bipartite": ("a", "b", "p"),
        "planted": ("n", "target_k", "pattern", "degree_budget"),
    }[kind]
    for key in needed:
        if key not in gen:
            raise PreconditionError(f"runs[{i}].generator: missing {key!r}")
    if not isinstance(run["seeds"], list):
        raise PreconditionError(f"runs[{i}]: seeds must be a list of integers")


def _make_instance(gen_cfg: dict, seed: int) -> Graph:
    kind = gen_cfg["kind"]
    if kind == "gnp":
        return gnp(gen_cfg["n"], gen_cfg["p"], seed)
    if kind == "bipartite":
        return random_bipartite(gen_cfg["a"], gen_cfg["b"], gen_cfg["p"], seed)
    pattern = pattern_from_spec(gen_cfg["pattern"])
    return planted_sparse(
        gen_cfg["n"], gen_cfg["target_k"], pattern, gen_cfg["degree_budget"], seed
    )


def _sweep_one(item):
    """One grid point: certify -> pipeline -> file-based verify."""
    run, seed, out_dir = item
    t0 = time.perf_counter()
    g = _make_instance(run["generator"], seed)
    cover_seed = np.random.SeedSequence(entropy=seed, spawn_key=(17,))
    cover = random_cover(g, int(run["q"]), cover_seed,
                         drop_prob=float(run.get("drop_prob", 0.0)))
    s, t = int(run["s"]), int(run["t"])
    pattern = PatternGraph.complete_bipartite(max(s, t), min(s, t))
    measured_k = measured_local_sparsity(cover.cover, pattern)
    instance_hash = hashlib.sha256(cover.to_canonical_json().encode()).hexdigest()[:12]
    stem = f"{instance_hash}_s{seed}"
    out_dir = Path(out_dir)
    cover_path = out_dir / f"{stem}.cover.json"
    save_cover(cover, cover_path)

    failure_kind = ""
    ell0 = ""
    i_star = ""
    stages_run = 0
    success = False
    try:
        result = run_pipeline(
            cover,
            epsilon=float(run["epsilon"]),
            k=float(run["k"]),
            s=s,
            t=t,
            seed=seed,
            retry_budget=int(run.get("retry_budget", 200)),
            best_effort=bool(run.get("best_effort", False)),
        )
        stages_run = len(result.stage_traces)
        if result.schedule is not None:
            ell0 = math.ceil(result.schedule.ell[0])
            i_star = result.schedule.i_star
        trace_payload = result.to_json_dict(cover.base.n)
        if result.success:
            coloring_path = out_dir / f"{stem}.coloring.json"
            save_coloring(result.coloring, cover.base.n, coloring_path)
            ok, msg = verify_files(cover_path, coloring_path, require_total=True)
            success = ok
            if not ok:
                failure_kind = f"verifier-rejected: {msg}"
        else:
            failure_kind = (result.failure or {}).get("kind", "unknown")
    except PreconditionError as exc:
        failure_kind = f"precondition: {exc}"
        trace_payload = {"error": str(exc)}
    wall = time.perf_counter() - t0
    trace_payload["grid"] = {k: v for k, v in run.items()}
    trace_payload["seed"] = seed
    (out_dir / f"{stem}.trace.json").write_text(
        json.dumps(trace_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return {
        "name": run.get("name", ""),
        "seed": seed,
        "instance_hash": instance_hash,
        "delta_H": cover.max_color_degree(),
        "measured_k": measured_k,
        "ell0": ell0,
        "stages_run": stages_run,
        "i_star": i_star,
        "success": success,
        "failure_kind": failure_kind,
        "wall_time_s": f"{wall:.3f}",
    }


def cmd_sweep(args) -> int:
    config = _load_config(args.config)
    runs = config.get("runs", [])
    for i, run in enumerate(runs):
        _check_run_config(i, run)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    items = [(run, int(seed), str(out_dir)) for run in runs for seed in run["seeds"]]
    if args.workers > 1 and items:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_one, items))
    else:
        rows = [_sweep_one(item) for item in items]
    csv_path = out_dir / "summary.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    successes = sum(1 for r in rows if r["success"])
    print(f"wrote {csv_path} ({len(rows)} runs, {successes} verified successes)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nibbler",
        description="Correspondence coloring of locally sparse graphs "
                    "via the semi-random method.",
    )
    parser.add_argument("--version", action="version", version=f"nibbler {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded instance")
    gen_sub = p.add_subparsers(dest="kind", required=True)
    g1 = gen_sub.add_parser("gnp")
    g1.add_argument("--n", type=int, required=True)
    g1.add_argument("--p", type=float, required=True)
    g1.add_argument("--seed", type=int, required=True)
    g1.add_argument("--out", required=True)
    g2 = gen_sub.add_parser("bipartite")
    g2.add_argument("--a", type=int, required=True)
    g2.add_argument("--b", type=int, required=True)
    g2.add_argument("--p", type=float, required=True)
    g2.add_argument("--seed", type=int, required=True)
    g2.add_argument("--out", required=True)
    g3 = gen_sub.add_parser("planted")
    g3.add_argument("--n", type=int, required=True)
    g3.add_argument("--target-k", type=float, required=True)
    g3.add_argument("--pattern", required=True, help="K3 / P4 / C6 / K2,2 / graph.json")
    g3.add_argument("--degree-budget", type=int, required=True)
    g3.add_argument("--seed", type=int, required=True)
    g3.add_argument("--out", required=True)
    for gp in (g1, g2, g3):
        gp.set_defaults(func=cmd_gen)

    p = sub.add_parser("certify", help="(k, F)-local-sparsity report for a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("validate-cover", help="check CC1-CC3 on a cover file")
    p.add_argument("--cover", required=True)
    p.set_defaults(func=cmd_validate_cover)

    p = sub.add_parser("nibble-step", help="run one wasteful coloring round")
    p.add_argument("--cover", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--ell", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_nibble_step)

    p = sub.add_parser("schedule", help="build and sanity-check a parameter schedule")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--precision", choices=["double", "extended"], default=None,
                   help="default: NIBBLER_PRECISION env var, else double")
    p.add_argument("--full-sequences", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("color", help="run the full pipeline on a cover")
    p.add_argument("--cover", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--retries", type=int, default=200)
    p.add_argument("--best-effort", action="store_true")
    p.add_argument("--assume-sparse", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--trace")
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("finish", help="local-lemma completion on a cover")
    p.add_argument("--cover", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--round-cap", type=int, default=10**6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_finish)

    p = sub.add_parser("verify", help="file-based proper-coloring verifier")
    p.add_argument("--cover", required=True)
    p.add_argument("--coloring", required=True)
    p.add_argument("--require-total", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a config-driven experiment grid")
    p.add_argument("--config", required=True, help="TOML or JSON config file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetExhaustedError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
