"""Executable checks of fixed-point properties.

* :func:`computation_tree` unrolls a graph into the tree of non-backtracking
  walks from a centre node;
* :func:`check_lifted_fixed_point` copies a converged message state onto
  that tree and re-applies the update at every interior node;
* :func:`check_fixed_point_optimality` verifies that MST rewiring and strong
  pruning cannot improve a converged, non-reinforced solution, and that a
  solution spanning every node matches the exact optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .instance import Instance
from .maxsum import (MessageState, Solution, Topology, decisions_to_solution,
                     extract_decisions, node_fields, sweep, _max_delta)
from .oracle import MAX_ENUM_NODES, InstanceTooLargeError, exact_pcst
from .postprocess import Tree, kruskal, mst_respan, strong_prune

DEFAULT_NODE_CAP = 250_000


class ComputationTreeTooLarge(ValueError):
    pass


@dataclass
class CompTree:
    center: int
    radius: int
    proj: np.ndarray
    parent: np.ndarray
    level: np.ndarray
    inst: Instance = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.proj)

    @property
    def interior(self) -> np.ndarray:
        return self.level < self.radius

    def neighbors(self) -> list[list[int]]:
        nb = [[] for _ in range(self.size)]
        for v, p in enumerate(self.parent.tolist()):
            if p >= 0:
                nb[v].append(p)
                nb[p].append(v)
        return nb


def computation_tree(inst: Instance, v0: int, t: int, cap: int = DEFAULT_NODE_CAP,
                     costs: Optional[dict] = None) -> CompTree:
    """Tree of non-backtracking walks of length ``<= t`` starting at ``v0``.

    ``costs`` optionally maps directed graph edges ``(i, j)`` to the cost of
    ``i`` taking ``j`` as parent; by default the instance costs are lifted.
    """
    if t < 1:
        raise ValueError("radius must be >= 1")
    if not 0 <= v0 < inst.node_count:
        raise ValueError(f"invalid centre {v0}")
    adj = inst.adjacency
    proj, parent, level = [v0], [-1], [0]
    frontier = [0]
    for depth in range(1, t + 1):
        nxt = []
        for a in frontier:
            back = proj[parent[a]] if parent[a] >= 0 else -1
            for w, _ in adj[proj[a]]:
                if w == back:
                    continue
                proj.append(w)
                parent.append(a)
                level.append(depth)
                nxt.append(len(proj) - 1)
                if len(proj) > cap:
                    raise ComputationTreeTooLarge(
                        f"computation tree exceeds {cap} nodes at radius {depth}")
        frontier = nxt
    proj = np.array(proj, dtype=np.int64)
    parent = np.array(parent, dtype=np.int64)
    child = np.arange(1, len(proj))
    up, down = proj[child], proj[parent[child]]
    if costs is None:
        c_up = [inst.cost(int(a), int(b)) for a, b in zip(up, down)]
        c_down = [inst.cost(int(b), int(a)) for a, b in zip(up, down)]
    else:
        c_up = [costs[(int(a), int(b))] for a, b in zip(up, down)]
        c_down = [costs[(int(b), int(a))] for a, b in zip(up, down)]
    lifted = Instance(len(proj), child, parent[child], c_up, c_down,
                      inst.prizes[proj], inst.lam, f"T({inst.name},{v0},{t})")
    return CompTree(v0, t, proj, parent, np.array(level, dtype=np.int64), lifted)


def is_local_cover(inst: Instance, ct: CompTree) -> bool:
    """Every interior tree node sees exactly the neighbourhood of its image."""
    nb = ct.neighbors()
    for a in np.flatnonzero(ct.interior).tolist():
        images = sorted(int(ct.proj[b]) for b in nb[a])
        if images != inst.neighbors(int(ct.proj[a])):
            return False
    return True


def lift_messages(state: MessageState, ct: CompTree) -> MessageState:
    """Messages on the tree copied from their images: ``Psi_ab = psi_pi(a)pi(b)``.

    Every copy of a root of ``state`` is a root of the lifted state."""
    g = state.topo
    roots = np.flatnonzero(g.is_root[ct.proj])
    topo = Topology(ct.inst, roots)
    img = np.array([g.edge_index(int(ct.proj[a]), int(ct.proj[b]))
                    for a, b in zip(topo.src.tolist(), topo.dst.tolist())], dtype=np.int64)
    if len(img) == 0:
        img = np.zeros(0, dtype=np.int64)
    return MessageState(topo, state.depth, state.A[img].copy(), state.B[img].copy(),
                        state.C[img].copy(), gamma=state.gamma, max_gamma=state.max_gamma)


def _lifted_costs(state: MessageState) -> dict:
    g = state.topo
    return {(int(a), int(b)): float(c) for a, b, c in zip(g.src, g.dst, g.w)}


def interior_residual(tree_state: MessageState, ct: CompTree) -> float:
    """Largest change one update makes to a message leaving an interior node."""
    new, _ = sweep(tree_state, None, 0.0)
    keep = ct.interior[tree_state.topo.src]
    if not keep.any():
        return 0.0
    old = (tree_state.A[keep], tree_state.B[keep], tree_state.C[keep])
    upd = (new.A[keep], new.B[keep], new.C[keep])
    return _max_delta(old, upd)


def fixed_point_residual(state: MessageState) -> float:
    """Change produced by one more non-reinforced sweep."""
    _, delta = sweep(state, None, 0.0)
    return delta


def check_lifted_fixed_point(state: MessageState, ct: Optional[CompTree] = None,
                             tol: float = 1e-9, center: Optional[int] = None,
                             radius: Optional[int] = None) -> dict:
    """Lift a converged, non-reinforced fixed point onto a computation tree and
    report the largest interior residual.  Default tree: radius ``|V| + 1``
    around the root."""
    if state.max_gamma > 0:
        raise ValueError("state comes from a reinforced run")
    base = fixed_point_residual(state)
    if not base <= tol:
        raise ValueError(f"state is not a fixed point (residual {base:g})")
    g = state.topo
    if ct is None:
        v0 = int(g.roots[0]) if center is None else center
        t = g.n + 1 if radius is None else radius
        ct = computation_tree(g.inst, v0, t, costs=_lifted_costs(state))
    lifted = lift_messages(state, ct)
    res = interior_residual(lifted, ct)
    return {"tree_nodes": ct.size, "radius": ct.radius, "center": ct.center,
            "graph_residual": base, "interior_residual": res, "tol": tol,
            "pass": bool(res <= tol)}


def _item(name, lhs, rhs, tol):
    return {"name": name, "lhs": lhs, "rhs": rhs, "pass": bool(abs(lhs - rhs) <= tol)}


def check_fixed_point_optimality(inst: Instance, sol: Solution, state: MessageState,
                                 tol: float = 1e-9, msg_tol: float = 1e-10) -> dict:
    """Post-processing and full-set optimality checks for a converged,
    non-reinforced, unbounded-depth run.

    Returns ``{"preconditions_met": bool, "reasons": [...], "items": [...]}``;
    items are only evaluated when every precondition holds."""
    reasons = []
    n = inst.node_count
    if state.max_gamma > 0:
        reasons.append("reinforced run (gamma > 0)")
    if state.depth < n - 1:
        reasons.append(f"depth bound {state.depth} < |V| - 1")
    residual = fixed_point_residual(state)
    if not residual <= msg_tol:
        reasons.append(f"not a fixed point (residual {residual:g})")
    fields = node_fields(state)
    dec = extract_decisions(fields, msg_tol)
    if dec.degenerate.any():
        reasons.append(f"{int(dec.degenerate.sum())} degenerate node(s)")
    induced = decisions_to_solution(inst, dec, sol.root, state.depth)
    if induced.repaired:
        reasons.append("decisions do not form a tree")
    if not np.array_equal(induced.parents, sol.parents):
        reasons.append("solution differs from the state's decisions")
    report = {"preconditions_met": not reasons, "reasons": reasons, "items": []}
    if reasons:
        return report
    h = float(sol.cost)
    star = Tree.from_solution(sol)
    vstar = star.vertices
    if not inst.symmetric:
        report["items"].append({"name": "mst_respan", "pass": None,
                                "note": "asymmetric costs"})
    else:
        mst = mst_respan(inst, vstar, root=sol.root)
        report["items"].append(_item("mst_respan", mst.cost(inst), h, tol))
    pruned = strong_prune(inst, star)
    report["items"].append(_item("strong_prune", pruned.cost(inst), h, tol))
    if len(vstar) == n:
        try:
            opt = exact_pcst(inst, root=sol.root)
            report["items"].append(_item("full_vertex_set_optimal", h, opt.cost, tol))
        except InstanceTooLargeError:
            report["items"].append({"name": "full_vertex_set_optimal", "pass": None,
                                    "note": "instance too large for the oracle"})
    return report


def check_subtree_optimality(inst: Instance, sol: Solution, tol: float = 1e-9,
                   max_vertices: int = 16) -> dict:
    """Compare ``H(S*)`` with the best tree on every connected vertex set
    ``V'`` with ``root in V' subset V*``; the best tree on ``V'`` is its MST."""
    star = sorted(Tree.from_solution(sol).vertices)
    if len(star) > max_vertices:
        raise InstanceTooLargeError(f"|V*| = {len(star)} exceeds {max_vertices}")
    others = [v for v in star if v != sol.root]
    excl = [inst.exclusion_cost(i) for i in range(inst.node_count)]
    total = sum(excl)
    h = float(sol.cost)
    worst = None
    checked = 0
    for mask in range(1 << len(others)):
        verts = [sol.root] + [others[k] for k in range(len(others)) if (mask >> k) & 1]
        edges = kruskal(inst, verts)
        if edges is None:
            continue
        checked += 1
        cost = sum(c for _, _, c in edges) + total - sum(excl[v] for v in verts if v != sol.root) \
            - excl[sol.root]
        if worst is None or cost < worst[0]:
            worst = (cost, verts)
    return {"subsets_checked": checked, "h_star": h, "best_subtree": worst[0],
            "best_vertices": worst[1], "pass": bool(h <= worst[0] + tol)}
