"""Benchmark harness: solve a suite of generated instances and tabulate.

A suite is a list of ``(ClassSpec, seeds)`` pairs.  On disk it is JSON::

    {"entries": [{"spec": {"family": "R", "n": 200, "nu": 8, "lambda": 1.2},
                  "seeds": 10}],
     "config": {"depth_bound": 20},
     "oracle_guard": 12,
     "post": "none"}

``seeds`` is either a list of integers or a count ``k`` meaning ``0..k-1``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

from .generators import ClassSpec, generate, spec_from_dict, spec_to_dict
from .instance import Instance
from .maxsum import SolverConfig
from .oracle import InstanceTooLargeError, exact_pcst
from .postprocess import POST_MODES, apply_post
from .rooting import solve_pcst

DEFAULT_ORACLE_GUARD = 12


@dataclass
class BenchRow:
    name: str
    cls: str
    n: int
    m: int
    cost: Optional[float] = None
    bound: Optional[float] = None
    gap: Optional[float] = None
    sweeps: Optional[int] = None
    wall_time: Optional[float] = None
    converged: Optional[bool] = None
    solution_fraction: Optional[float] = None
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


@dataclass
class Suite:
    entries: list
    config: SolverConfig = SolverConfig()
    oracle_guard: int = DEFAULT_ORACLE_GUARD
    post: str = "none"


def class_label(spec: ClassSpec) -> str:
    d = spec_to_dict(spec)
    return " ".join(f"{k}={v}" for k, v in d.items())


def _seeds(value) -> list[int]:
    if isinstance(value, int):
        if value < 1:
            raise ValueError("seed count must be positive")
        return list(range(value))
    seeds = [int(s) for s in value]
    if not seeds:
        raise ValueError("empty seed list")
    return seeds


def suite_from_dict(d) -> Suite:
    """Parse and validate a suite; every spec is checked before anything runs."""
    if isinstance(d, list):
        d = {"entries": d}
    raw = d.get("entries")
    if not raw:
        raise ValueError("suite has no entries")
    entries = []
    for k, item in enumerate(raw):
        if "spec" not in item:
            raise ValueError(f"suite entry {k} has no spec")
        spec = spec_from_dict(item["spec"])
        entries.append((spec, _seeds(item.get("seeds", 1))))
    cfg = SolverConfig(**d.get("config", {}))
    post = d.get("post", "none")
    if post not in POST_MODES:
        raise ValueError(f"unknown post-processing mode {post!r}")
    return Suite(entries, cfg, int(d.get("oracle_guard", DEFAULT_ORACLE_GUARD)), post)


def load_suite(path: str) -> Suite:
    with open(path) as fh:
        return suite_from_dict(json.load(fh))


def _gap(cost: float, bound: float) -> Optional[float]:
    if bound > 0:
        return 100.0 * (cost - bound) / bound
    return 0.0 if cost == bound else None


def bench_instance(inst: Instance, cls: str, cfg: SolverConfig,
                   oracle_guard: int = DEFAULT_ORACLE_GUARD, post: str = "none") -> BenchRow:
    """Solve one instance; failures are recorded in the row, not raised."""
    row = BenchRow(inst.name, cls, inst.node_count, inst.edge_count)
    try:
        t0 = time.perf_counter()
        sol, stats = solve_pcst(inst, cfg)
        row.wall_time = time.perf_counter() - t0
        sol = apply_post(inst, sol, post)
        row.cost = float(sol.cost)
        row.sweeps = stats.sweeps_used
        row.converged = stats.converged
        row.solution_fraction = sol.size / inst.node_count
        if inst.node_count <= oracle_guard:
            try:
                row.bound = float(exact_pcst(inst).cost)
                row.gap = _gap(row.cost, row.bound)
            except InstanceTooLargeError:
                pass
    except Exception as exc:  # noqa: BLE001 - reported in-row by design
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_bench(suite: Sequence, cfg: SolverConfig = SolverConfig(),
              oracle_guard: int = DEFAULT_ORACLE_GUARD, post: str = "none",
              jobs: int = 1) -> tuple[list[BenchRow], dict]:
    """Run every ``(spec, seeds)`` entry; rows come back in suite order.

    Instances are generated up front so a bad spec fails before any solve.
    """
    if not suite:
        raise ValueError("suite is empty")
    work = []
    for spec, seeds in suite:
        label = class_label(spec)
        for s in _seeds(seeds):
            work.append((generate(spec, s), label))

    def one(item):
        inst, label = item
        return bench_instance(inst, label, cfg, oracle_guard, post)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(one, work))
    else:
        rows = [one(w) for w in work]
    return rows, aggregate(rows)


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def aggregate(rows: Sequence[BenchRow]) -> dict:
    """Per-class means of gap, wall time, solution fraction and cost."""
    groups: dict[str, list[BenchRow]] = OrderedDict()
    for r in rows:
        groups.setdefault(r.cls, []).append(r)
    out = OrderedDict()
    for cls, rs in groups.items():
        ok = [r for r in rs if not r.failed]
        out[cls] = {"instances": len(rs), "failures": len(rs) - len(ok),
                    "mean_cost": _mean(r.cost for r in ok),
                    "mean_gap": _mean(r.gap for r in ok),
                    "mean_wall_time": _mean(r.wall_time for r in ok),
                    "mean_solution_fraction": _mean(r.solution_fraction for r in ok),
                    "converged": sum(bool(r.converged) for r in ok)}
    return out


_FIELDS = [f.name for f in fields(BenchRow)]
_TYPES = {"n": int, "m": int, "sweeps": int, "cost": float, "bound": float, "gap": float,
          "wall_time": float, "solution_fraction": float}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_FIELDS)
    for r in rows:
        w.writerow([_cell(getattr(r, k)) for k in _FIELDS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[BenchRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != _FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        kw = {}
        for k in _FIELDS:
            v = rec[k]
            if k in ("name", "cls", "error"):
                kw[k] = v
            elif v == "":
                kw[k] = None
            elif k == "converged":
                kw[k] = v == "true"
            else:
                kw[k] = _TYPES[k](v)
        rows.append(BenchRow(**kw))
    return rows


def rows_to_json(rows: Sequence[BenchRow], agg: Optional[dict] = None) -> str:
    def clean(d):
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                for k, v in d.items()}
    payload = {"rows": [clean(asdict(r)) for r in rows]}
    if agg is not None:
        payload["classes"] = agg
    return json.dumps(payload, indent=2)
