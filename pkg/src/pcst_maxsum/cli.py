"""Command-line front end: ``solve``, ``generate``, ``oracle``, ``verify``, ``bench``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from typing import Optional, Sequence

from .bench import aggregate, load_suite, rows_to_csv, rows_to_json, run_bench
from .formats import InstanceFormatError, parse_instance, write_instance
from .generators import generate, spec_from_dict
from .instance import InvalidInstanceError
from .maxsum import SolverConfig, solve_rooted
from .oracle import InstanceTooLargeError, exact_pcst
from .postprocess import POST_MODES, apply_post
from .rooting import solve_pcst
from .verify import (ComputationTreeTooLarge, check_lifted_fixed_point,
                     check_fixed_point_optimality, check_subtree_optimality)

EXIT_OK, EXIT_INPUT, EXIT_ROW_FAILURE = 0, 1, 2


def _solver_flags(p: argparse.ArgumentParser) -> None:
    d = SolverConfig()
    p.add_argument("--depth", type=int, default=None, help="depth bound D (default |V|)")
    p.add_argument("--rho", type=float, default=d.rho, help="reinforcement step")
    p.add_argument("--max-sweeps", type=int, default=d.max_sweeps)
    p.add_argument("--tol", type=float, default=d.msg_tol, help="message convergence tolerance")
    p.add_argument("--stable", type=int, default=d.stable_sweeps,
                   help="sweeps of unchanged decisions that end a run")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--noise", type=float, default=d.noise_eps, help="initial message noise")
    p.add_argument("--cost-noise", type=float, default=d.cost_noise,
                   help="relative tie-breaking perturbation of edge costs")
    p.add_argument("--workers", type=int, default=d.workers)


def _config(args) -> SolverConfig:
    return SolverConfig(depth_bound=args.depth, rho=args.rho, max_sweeps=args.max_sweeps,
                        msg_tol=args.tol, stable_sweeps=args.stable, seed=args.seed,
                        noise_eps=args.noise, cost_noise=args.cost_noise,
                        workers=args.workers)


def _guess_format(path: str, given: Optional[str]) -> str:
    if given:
        return given
    return "json" if path.endswith(".json") else "stp"


def _load(args):
    with open(args.file) as fh:
        text = fh.read()
    inst = parse_instance(text, _guess_format(args.file, args.format))
    if getattr(args, "lam", None) is not None:
        inst = inst.replace(lam=args.lam)
    return inst


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def cmd_solve(args) -> int:
    inst = _load(args)
    cfg = _config(args)
    t0 = time.perf_counter()
    sol, stats = solve_pcst(inst, cfg, root=args.root, mu=args.mu)
    elapsed = time.perf_counter() - t0
    sol = apply_post(inst, sol, args.post)
    payload = sol.to_dict()
    if args.stats:
        payload["stats"] = stats.summary()
        payload["stats"]["wall_time"] = elapsed
    _emit(json.dumps(payload, sort_keys=True), args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    spec_text = args.spec
    if os.path.exists(spec_text):
        with open(spec_text) as fh:
            spec_text = fh.read()
    spec = spec_from_dict(json.loads(spec_text))
    inst = generate(spec, args.seed)
    _emit(write_instance(inst, args.format or "stp"), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args)
    res = exact_pcst(inst, root=args.root, depth_bound=args.depth)
    payload = {"cost": res.cost, "root": res.tree.root,
               "edges": sorted([int(v), int(p)] for v, p in res.tree.parent.items()),
               "vertices": sorted(res.tree.vertices)}
    _emit(json.dumps(payload, sort_keys=True), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    """Unreinforced, unbounded run followed by every applicable check."""
    inst = _load(args)
    cfg = replace(_config(args), rho=0.0, depth_bound=None)
    if args.root is not None:
        root = args.root
        sol, stats = solve_rooted(inst, root, cfg)
    else:
        sol, pstats = solve_pcst(inst, cfg)
        stats = pstats.final
    report = {"solution": sol.to_dict(), "checks": {}}
    checks = report["checks"]
    checks["optimality"] = check_fixed_point_optimality(inst, sol, stats.state,
                                                         msg_tol=cfg.msg_tol)
    try:
        checks["lifting"] = check_lifted_fixed_point(stats.state, radius=args.radius)
    except (ValueError, ComputationTreeTooLarge) as exc:
        checks["lifting"] = {"pass": None, "note": str(exc)}
    try:
        checks["subtree_optimality"] = check_subtree_optimality(inst, sol)
    except InstanceTooLargeError as exc:
        checks["subtree_optimality"] = {"pass": None, "note": str(exc)}
    _emit(json.dumps(report, sort_keys=True, default=float), args.out)
    failed = any(item.get("pass") is False
                 for item in checks["optimality"]["items"]) or \
        checks["lifting"].get("pass") is False or \
        checks["subtree_optimality"].get("pass") is False
    return EXIT_ROW_FAILURE if failed else EXIT_OK


def cmd_bench(args) -> int:
    suite = load_suite(args.suite)
    cfg = suite.config
    overrides = {k: v for k, v in (("depth_bound", args.depth), ("rho", args.rho),
                                   ("max_sweeps", args.max_sweeps), ("seed", args.seed))
                 if v is not None}
    cfg = replace(cfg, **overrides)
    post = args.post or suite.post
    rows, _ = run_bench(suite.entries, cfg, suite.oracle_guard, post, jobs=args.jobs)
    if args.format == "json":
        text = rows_to_json(rows, aggregate(rows))
    else:
        text = rows_to_csv(rows)
    _emit(text, args.out)
    return EXIT_ROW_FAILURE if any(r.failed for r in rows) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcst-maxsum",
                                description="Prize-collecting Steiner trees by max-sum.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("solve", help="solve one instance, print the solution as json")
    s.add_argument("file")
    s.add_argument("--format", choices=("stp", "json"))
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--root", type=int, default=None, help="skip root selection")
    s.add_argument("--mu", type=float, default=None, help="virtual-root edge cost")
    s.add_argument("--post", choices=POST_MODES, default="none")
    s.add_argument("--stats", action="store_true", help="include solver statistics")
    s.add_argument("--out")
    _solver_flags(s)
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="draw an instance from a class spec (json or file)")
    g.add_argument("spec")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("stp", "json"))
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    o = sub.add_parser("oracle", help="exact optimum of a small instance")
    o.add_argument("file")
    o.add_argument("--format", choices=("stp", "json"))
    o.add_argument("--lambda", dest="lam", type=float, default=None)
    o.add_argument("--root", type=int, default=None)
    o.add_argument("--depth", type=int, default=None)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("verify", help="fixed-point and optimality checks")
    v.add_argument("file")
    v.add_argument("--format", choices=("stp", "json"))
    v.add_argument("--lambda", dest="lam", type=float, default=None)
    v.add_argument("--root", type=int, default=None)
    v.add_argument("--radius", type=int, default=None,
                   help="computation-tree radius (default |V| + 1)")
    v.add_argument("--out")
    _solver_flags(v)
    v.set_defaults(func=cmd_verify, cost_noise=0.0)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("suite")
    b.add_argument("--depth", type=int, default=None)
    b.add_argument("--rho", type=float, default=None)
    b.add_argument("--max-sweeps", type=int, default=None)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--post", choices=POST_MODES, default=None)
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, InstanceFormatError, InvalidInstanceError, InstanceTooLargeError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
