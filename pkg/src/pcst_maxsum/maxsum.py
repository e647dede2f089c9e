"""Zero-temperature cavity (Max-Sum) equations for the rooted, depth-bounded
prize-collecting Steiner tree.

Every node ``j`` carries a pair ``(p_j, d_j)``: its parent (a neighbour, or
``*`` for "not in the tree") and its depth ``1..D``.  The root sits at depth 0
and never points anywhere.  The message travelling on the directed edge
``j -> i`` is stored as

* ``A[e, d]``   best field of ``j`` at depth ``d`` with a parent other than ``i``,
* ``B[e]``      field of ``j`` being out of the tree,
* ``C[e, d]``   field of ``j`` at depth ``d`` with parent ``i``,

and the derived quantities ``Dm = max(max_d A, B)``,
``E[d] = max(C[d + 1], Dm)``.  One synchronous sweep recomputes ``A, B, C``
for every directed edge from the previous generation in ``O(|E| D)``:

    A_ji[d] = S_j[d] - E_ij[d] + max_{k in dj \\ i} (-c_jk - E_kj[d] + A_kj[d-1] + g F_j(k, d))
    B_ji    = -lam b_j + sum_{k in dj \\ i} D_kj + g G_j
    C_ji[d] = -c_ji + S_j[d] - E_ij[d] + g F_j(i, d)

with ``S_j[d] = sum_{k in dj} E_kj[d]``.  Forbidden states are ``-inf``.

Directed edges are kept sorted by (destination, source) so the incoming
messages of a node are contiguous, which turns all per-node reductions
into ``ufunc.reduceat`` calls.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .instance import Instance

NEG_INF = -np.inf
NOT_IN_TREE = -1
ROOT = -2


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the iteration.

    ``depth_bound=None`` means ``D = node_count`` (no effective bound).
    ``rho = 0`` disables reinforcement altogether.  ``noise_eps`` is the
    amplitude of the random initial messages; ``cost_noise`` adds a tiny
    random amount (relative to the mean edge cost) to every edge cost seen
    by the messages, which breaks the exact ties integer costs produce.
    Reported costs always use the unperturbed instance.
    """

    depth_bound: Optional[int] = None
    rho: float = 1e-4
    max_sweeps: int = 120_000
    msg_tol: float = 1e-10
    stable_sweeps: int = 30
    seed: int = 0
    noise_eps: float = 1e-7
    cost_noise: float = 1e-7
    workers: int = 1

    def __post_init__(self):
        if self.depth_bound is not None and self.depth_bound < 1:
            raise ValueError("depth_bound must be >= 1")
        if min(self.rho, self.msg_tol, self.noise_eps, self.cost_noise) < 0:
            raise ValueError("rho, msg_tol, noise_eps and cost_noise must be nonnegative")
        if self.max_sweeps < 1 or self.stable_sweeps < 1 or self.workers < 1:
            raise ValueError("max_sweeps, stable_sweeps and workers must be >= 1")

    def depth_for(self, inst: Instance) -> int:
        return self.depth_bound if self.depth_bound is not None else max(1, inst.node_count)


class Topology:
    """Directed-edge layout of an instance with a fixed set of roots."""

    def __init__(self, inst: Instance, roots, cost_noise: float = 0.0, seed: int = 0):
        n = inst.node_count
        self.inst = inst
        self.n = n
        src = np.concatenate([inst.tails, inst.heads])
        dst = np.concatenate([inst.heads, inst.tails])
        costs, rcosts = inst.costs, inst.rcosts
        if cost_noise > 0 and inst.edge_count:
            rng = np.random.Generator(np.random.PCG64([seed, 1]))
            scale = float(np.mean(costs)) or 1.0
            bump = rng.random(inst.edge_count) * (cost_noise * scale)
            costs, rcosts = costs + bump, rcosts + bump
        # w[e]: cost paid by src[e] when it takes dst[e] as parent
        w = np.concatenate([costs, rcosts])
        order = np.lexsort((src, dst))
        self.src = src[order]
        self.dst = dst[order]
        self.w = w[order]
        self.m = len(self.src)
        key = self.src * n + self.dst
        rkey = self.dst * n + self.src
        sorter = np.argsort(key, kind="stable")
        self.rev = sorter[np.searchsorted(key, rkey, sorter=sorter)]
        # cost paid by dst[e] when it takes src[e] as parent
        self.w_in = self.w[self.rev]
        self.in_ptr = np.searchsorted(self.dst, np.arange(n + 1))
        indeg = np.diff(self.in_ptr)
        self.active = np.flatnonzero(indeg > 0)
        self.starts = self.in_ptr[self.active]
        self.excl = inst.lam * inst.prizes
        mask = np.zeros(n, dtype=bool)
        mask[np.asarray(roots, dtype=np.int64)] = True
        self.is_root = mask
        self.root_src = mask[self.src]
        self.root_dst = mask[self.dst]

    @property
    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.is_root)

    def edge_index(self, j: int, i: int) -> int:
        """Index of the directed edge ``j -> i``."""
        lo, hi = self.in_ptr[i], self.in_ptr[i + 1]
        k = lo + np.searchsorted(self.src[lo:hi], j)
        if k >= hi or self.src[k] != j:
            raise KeyError(f"no edge {j}->{i}")
        return int(k)


@dataclass
class MessageState:
    topo: Topology
    depth: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Dm: np.ndarray = None
    E: np.ndarray = None
    t: int = 0
    gamma: float = 0.0
    max_gamma: float = 0.0
    _agg: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.Dm is None or self.E is None:
            self.Dm, self.E = _derived(self.A, self.B, self.C, self.depth)


@dataclass
class NodeFields:
    """Total fields.  ``F[e, d]`` belongs to node ``dst[e]`` and is the field of
    choosing parent ``src[e]`` at depth ``d``; ``G[j]`` is the field of ``p_j = *``.
    Roots have every entry at ``-inf`` (their only state, depth 0, is implicit)."""

    topo: Topology
    F: np.ndarray
    G: np.ndarray
    shift: np.ndarray
    gamma: float = 0.0


@dataclass
class Decisions:
    parent: np.ndarray
    depth: np.ndarray
    degenerate: np.ndarray


@dataclass
class Solution:
    root: int
    parents: np.ndarray
    depths: np.ndarray
    cost: float
    converged: bool = False
    sweeps_used: int = 0
    repaired: bool = False

    @property
    def vertex_set(self) -> set[int]:
        return set(np.flatnonzero(self.depths >= 0).tolist())

    @property
    def edge_set(self) -> set[tuple[int, int]]:
        return {(i, int(p)) for i, p in enumerate(self.parents.tolist()) if p >= 0}

    @property
    def size(self) -> int:
        return int((self.depths >= 0).sum())

    def to_dict(self) -> dict:
        return {"root": int(self.root), "parents": self.parents.tolist(),
                "depths": self.depths.tolist(), "cost": float(self.cost),
                "converged": bool(self.converged), "sweeps": int(self.sweeps_used),
                "repaired": bool(self.repaired)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> Solution:
        return cls(root=int(d["root"]), parents=np.array(d["parents"], dtype=np.int64),
                   depths=np.array(d["depths"], dtype=np.int64), cost=float(d["cost"]),
                   converged=bool(d.get("converged", False)),
                   sweeps_used=int(d.get("sweeps", 0)),
                   repaired=bool(d.get("repaired", False)))


@dataclass
class SolveStats:
    sweeps_used: int
    converged: bool
    fixed_point: bool
    final_gamma: float
    wall_time: float
    max_delta: float
    root: int
    state: MessageState = field(repr=False, default=None)
    fields: NodeFields = field(repr=False, default=None)
    decisions: Decisions = field(repr=False, default=None)

    def summary(self) -> dict:
        return {"sweeps_used": self.sweeps_used, "converged": self.converged,
                "fixed_point": self.fixed_point, "final_gamma": self.final_gamma,
                "wall_time": self.wall_time, "max_delta": self.max_delta,
                "root": self.root}


# ---------------------------------------------------------------------------
# message state

def _derived(A, B, C, depth):
    Dm = np.maximum(A.max(axis=1), B)
    E = np.empty_like(A)
    np.maximum(C[:, 1:], Dm[:, None], out=E[:, :depth])
    E[:, depth] = Dm
    return Dm, E


def _pin_roots(topo: Topology, A, B, C):
    r = topo.root_src
    if r.any():
        A[r] = NEG_INF
        A[r, 0] = 0.0
        B[r] = NEG_INF
        C[r] = NEG_INF


def _normalize(A, B, C):
    top = np.maximum(np.maximum(A.max(axis=1), B), C.max(axis=1))
    A -= top[:, None]
    B -= top
    C -= top[:, None]


def init_state(inst: Instance, root, cfg: SolverConfig, topo: Topology = None) -> MessageState:
    """All allowed entries at 0 plus uniform noise in ``[-noise_eps, noise_eps]``.

    ``root`` may be a single node or a collection of roots."""
    roots = np.atleast_1d(np.asarray(root, dtype=np.int64))
    if roots.size == 0 or roots.min() < 0 or roots.max() >= inst.node_count:
        raise ValueError(f"invalid root {root!r}")
    if topo is None:
        topo = Topology(inst, roots, cfg.cost_noise, cfg.seed)
    depth = cfg.depth_for(inst)
    m = topo.m
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    shape = (m, depth + 1)
    if cfg.noise_eps > 0:
        A = rng.uniform(-cfg.noise_eps, cfg.noise_eps, size=shape)
        B = rng.uniform(-cfg.noise_eps, cfg.noise_eps, size=m)
        C = rng.uniform(-cfg.noise_eps, cfg.noise_eps, size=shape)
    else:
        A, B, C = np.zeros(shape), np.zeros(m), np.zeros(shape)
    A[:, 0] = NEG_INF
    C[:, 0] = NEG_INF
    _pin_roots(topo, A, B, C)
    _normalize(A, B, C)
    return MessageState(topo, depth, A, B, C)


def _chunks(bounds, workers):
    lo, hi = bounds
    k = max(1, min(workers, hi - lo))
    cuts = np.linspace(lo, hi, k + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]


def _run(fn, ranges, workers):
    if workers <= 1 or len(ranges) <= 1:
        for a, b in ranges:
            fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda ab: fn(*ab), ranges))


def _aggregates(state: MessageState, workers: int = 1):
    """Per-node sums ``S_j[d]``, ``sum_k D_kj`` and, per incoming edge ``k -> j``,
    ``-c_jk - E_kj[d] + A_kj[d-1]`` (column 0 is ``-inf``)."""
    if state._agg is not None:
        return state._agg
    topo, E, A = state.topo, state.E, state.A
    n, cols = topo.n, state.depth + 1
    sumE = np.zeros((n, cols))
    sumD = np.zeros(n)
    val0 = np.empty_like(A)
    act, starts, ptr = topo.active, topo.starts, topo.in_ptr

    def work(a, b):
        nodes = act[a:b]
        elo, ehi = ptr[nodes[0]], ptr[nodes[-1] + 1]
        local = starts[a:b] - elo
        sumE[nodes] = np.add.reduceat(E[elo:ehi], local, axis=0)
        sumD[nodes] = np.add.reduceat(state.Dm[elo:ehi], local)
        v = val0[elo:ehi]
        v[:, 0] = NEG_INF
        np.subtract(A[elo:ehi, :-1], E[elo:ehi, 1:], out=v[:, 1:])
        v[:, 1:] -= topo.w_in[elo:ehi, None]

    _run(work, _chunks((0, len(act)), workers), workers)
    state._agg = (sumE, sumD, val0)
    return state._agg


def sweep(state: MessageState, fields: Optional[NodeFields], gamma: float = 0.0,
          workers: int = 1) -> tuple[MessageState, float]:
    """One synchronous update of every directed message.

    Returns the new state and the largest absolute change of any entry
    (``inf`` if the set of finite entries changed)."""
    topo, depth = state.topo, state.depth
    sumE, sumD, val0 = _aggregates(state, workers)
    reinforce = gamma > 0 and fields is not None
    n, m, cols = topo.n, topo.m, depth + 1
    act, starts, ptr = topo.active, topo.starts, topo.in_ptr

    best1 = np.full((n, cols), NEG_INF)
    best2 = np.full((n, cols), NEG_INF)
    if reinforce:
        val = val0 + gamma * np.where(np.isneginf(fields.F), NEG_INF, fields.F)
        val[:, 0] = NEG_INF
    else:
        val = val0

    def node_work(a, b):
        nodes = act[a:b]
        elo, ehi = ptr[nodes[0]], ptr[nodes[-1] + 1]
        local = starts[a:b] - elo
        v = val[elo:ehi]
        b1 = np.maximum.reduceat(v, local, axis=0)
        owner = np.repeat(np.arange(len(nodes)), np.diff(np.append(local, ehi - elo)))
        hit = v == b1[owner]
        count = np.add.reduceat(hit.astype(np.int64), local, axis=0)
        b2 = np.maximum.reduceat(np.where(hit, NEG_INF, v), local, axis=0)
        b2 = np.where(count >= 2, b1, b2)
        best1[nodes] = b1
        best2[nodes] = b2

    _run(node_work, _chunks((0, len(act)), workers), workers)

    A = np.empty((m, cols))
    B = np.empty(m)
    C = np.empty((m, cols))
    src, rev = topo.src, topo.rev
    # root rows are overwritten by _pin_roots; keep them finite meanwhile
    G = np.where(topo.is_root, 0.0, fields.G) if reinforce else None
    F = fields.F if reinforce else None

    def edge_work(a, b):
        j = src[a:b]
        r = rev[a:b]
        base = sumE[j] - state.E[r]
        vr = val[r]
        b1, b2 = best1[j], best2[j]
        excl = np.where(vr == b1, b2, b1)
        Ab = A[a:b]
        np.add(base, excl, out=Ab)
        Ab[:, 0] = NEG_INF
        Bb = -topo.excl[j] + sumD[j] - state.Dm[r]
        Cb = C[a:b]
        np.subtract(base, topo.w[a:b, None], out=Cb)
        if reinforce:
            Bb = Bb + gamma * G[j]
            Cb += gamma * np.where(np.isneginf(F[r]), NEG_INF, F[r])
        Cb[:, 0] = NEG_INF
        B[a:b] = Bb
        sub_B = B[a:b]
        top = np.maximum(np.maximum(Ab.max(axis=1), sub_B), Cb.max(axis=1))
        Ab -= top[:, None]
        sub_B -= top
        Cb -= top[:, None]

    _run(edge_work, _chunks((0, m), workers), workers)
    _pin_roots(topo, A, B, C)

    delta = _max_delta((state.A, state.B, state.C), (A, B, C))
    new = MessageState(topo, depth, A, B, C, t=state.t + 1, gamma=gamma,
                       max_gamma=max(state.max_gamma, gamma))
    return new, delta


def _max_delta(old, new) -> float:
    worst = 0.0
    for x, y in zip(old, new):
        fx, fy = np.isfinite(x), np.isfinite(y)
        if not np.array_equal(fx, fy):
            return float("inf")
        if fx.any():
            worst = max(worst, float(np.abs(x[fx] - y[fx]).max()))
    return worst


def node_fields(state: MessageState, prev: Optional[NodeFields] = None,
                gamma: float = 0.0, workers: int = 1) -> NodeFields:
    """Total fields of every node, normalised so each node's maximum is 0.

    With ``gamma > 0`` the previous fields are added with weight ``gamma``
    (the reinforcement memory term)."""
    topo = state.topo
    sumE, sumD, val0 = _aggregates(state, workers)
    F = sumE[topo.dst] + val0
    G = -topo.excl + sumD
    if gamma > 0 and prev is not None:
        F += gamma * np.where(np.isneginf(prev.F), NEG_INF, prev.F)
        G = G + gamma * prev.G
    F[:, 0] = NEG_INF
    F[topo.root_dst] = NEG_INF
    top = G.copy()
    if len(topo.active):
        rowmax = F.max(axis=1)
        top[topo.active] = np.maximum(top[topo.active],
                                      np.maximum.reduceat(rowmax, topo.starts))
    top[topo.is_root] = 0.0
    F -= top[topo.dst][:, None]
    G = G - top
    G[topo.is_root] = NEG_INF
    return NodeFields(topo, F, G, top, gamma)


def extract_decisions(fields: NodeFields, msg_tol: float = 0.0) -> Decisions:
    """Argmax of the total fields with ties resolved as ``*`` first, then
    lowest neighbour index, then smallest depth."""
    topo, F, G = fields.topo, fields.F, fields.G
    n, m = topo.n, topo.m
    rowmax = F.max(axis=1) if m else np.empty(0)
    rowarg = F.argmax(axis=1) if m else np.empty(0, dtype=np.int64)
    top = G.copy()
    top[topo.is_root] = 0.0
    first = np.full(n, m, dtype=np.int64)
    near = np.zeros(n, dtype=np.int64)
    if len(topo.active):
        bestF = np.maximum.reduceat(rowmax, topo.starts)
        top[topo.active] = np.maximum(top[topo.active], bestF)
        hit = (rowmax == top[topo.dst]) & np.isfinite(rowmax)
        cand = np.where(hit, np.arange(m), m)
        first[topo.active] = np.minimum.reduceat(cand, topo.starts)
        close = (top[topo.dst][:, None] - F) <= msg_tol
        near[topo.active] = np.add.reduceat(close.sum(axis=1), topo.starts)
    near += (top - G) <= msg_tol
    parent = np.full(n, NOT_IN_TREE, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    use_edge = (G < top) & (first < m)
    e = first[use_edge]
    parent[use_edge] = topo.src[e]
    depth[use_edge] = rowarg[e]
    degenerate = near >= 2
    parent[topo.is_root] = ROOT
    depth[topo.is_root] = 0
    degenerate[topo.is_root] = False
    return Decisions(parent, depth, degenerate)


# ---------------------------------------------------------------------------
# solutions

def decisions_to_solution(inst: Instance, dec: Decisions, root: int,
                          depth_bound: Optional[int] = None) -> Solution:
    """Induced tree of the decisions.  Pointers that do not lead to the root
    within ``depth_bound`` hops (cycles, chains through ``*``) are cut and
    the affected nodes set to ``*``."""
    n = inst.node_count
    D = depth_bound if depth_bound is not None else max(1, n)
    p = dec.parent
    children = [[] for _ in range(n)]
    claimed = 0
    for i, q in enumerate(p.tolist()):
        if q >= 0 and i != root:
            children[q].append(i)
            claimed += 1
    parents = np.full(n, NOT_IN_TREE, dtype=np.int64)
    depths = np.full(n, -1, dtype=np.int64)
    depths[root] = 0
    frontier = [root]
    level = 0
    reached = 0
    while frontier and level < D:
        level += 1
        nxt = []
        for v in frontier:
            for c in children[v]:
                parents[c] = v
                depths[c] = level
                nxt.append(c)
        reached += len(nxt)
        frontier = nxt
    sol = Solution(root=root, parents=parents, depths=depths, cost=0.0,
                   repaired=reached != claimed)
    sol.cost = solution_cost(inst, sol)
    return sol


def solution_cost(inst: Instance, sol: Solution) -> float:
    """``sum_i c[i, p_i]`` with ``c[i, *] = lam b_i``; the root pays nothing."""
    if len(sol.parents) != inst.node_count or len(sol.depths) != inst.node_count:
        raise ValueError("solution and instance sizes differ")
    total = 0.0
    adj = inst.adjacency
    for i, q in enumerate(sol.parents.tolist()):
        if i == sol.root:
            continue
        if q < 0:
            total += inst.exclusion_cost(i)
        else:
            for k, c in adj[i]:
                if k == q:
                    total += c
                    break
            else:
                raise ValueError(f"node {i} points to non-neighbour {q}")
    return total


def solve_rooted(inst: Instance, root: int, cfg: SolverConfig = SolverConfig()
                 ) -> tuple[Solution, SolveStats]:
    """Iterate the equations from ``root`` until the decisions settle.

    Reinforcement starts (``gamma = rho * t`` with ``t`` counted from the
    switch) once the message change has not reached a new minimum for
    ``stable_sweeps`` sweeps.  Stops at an exact fixed point (change below
    ``msg_tol``), after ``stable_sweeps`` sweeps with unchanged decisions, or
    at ``max_sweeps``.  Without convergence the cheapest decision snapshot
    seen is returned."""
    t0 = time.perf_counter()
    D = cfg.depth_for(inst)
    state = init_state(inst, root, cfg)
    fields = node_fields(state, workers=cfg.workers)
    dec = extract_decisions(fields, cfg.msg_tol)
    sol = decisions_to_solution(inst, dec, root, D)
    best = sol
    stable = 0
    min_delta = float("inf")
    since_min = 0
    reinforcing = False
    tr = 0
    converged = fixed = False
    delta = float("inf")
    for _ in range(cfg.max_sweeps):
        gamma = tr * cfg.rho if reinforcing else 0.0
        state, delta = sweep(state, fields, gamma, cfg.workers)
        fields = node_fields(state, fields, gamma, cfg.workers)
        new_dec = extract_decisions(fields, cfg.msg_tol)
        same = (np.array_equal(new_dec.parent, dec.parent)
                and np.array_equal(new_dec.depth, dec.depth))
        dec = new_dec
        if same and np.isfinite(delta):
            stable += 1
        else:
            stable = 0
        if not same:
            sol = decisions_to_solution(inst, dec, root, D)
            if sol.cost < best.cost:
                best = sol
        if delta <= cfg.msg_tol:
            converged = fixed = True
            break
        if stable >= cfg.stable_sweeps:
            converged = True
            break
        # the finite/-inf pattern settles within D sweeps; only count after that
        if delta < min_delta or not np.isfinite(delta):
            min_delta, since_min = min(delta, min_delta), 0
        else:
            since_min += 1
        if not reinforcing and cfg.rho > 0 and since_min >= cfg.stable_sweeps:
            reinforcing = True
        if reinforcing:
            tr += 1
    out = sol if converged else best
    out = replace(out, converged=converged, sweeps_used=state.t)
    stats = SolveStats(sweeps_used=state.t, converged=converged, fixed_point=fixed,
                       final_gamma=state.gamma, wall_time=time.perf_counter() - t0,
                       max_delta=delta, root=int(root), state=state, fields=fields,
                       decisions=dec)
    return out, stats
