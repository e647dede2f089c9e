"""Exact solutions of small instances, used as ground truth.

Three exact methods, chosen by the shape of the problem:

* forests: dynamic programming over the tree, any size, any depth bound;
* symmetric costs, no depth bound: enumerate every connected vertex set
  (containing the root, when given) and span it with its MST;
* depth bound or asymmetric costs: a layered search that assigns nodes to
  depth levels 1, 2, ... each node hooking to its cheapest neighbour on the
  previous level.

Costs are energies ``edge costs + lam * prizes left outside`` of a tree
that always contains its root.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .instance import Instance
from .postprocess import Tree, kruskal

MAX_ENUM_NODES = 20
MAX_LAYERED_NODES = 12
_TIE = 1e-12


class InstanceTooLargeError(ValueError):
    pass


@dataclass
class OptResult:
    cost: float
    tree: Tree
    nodes_explored: int


def gap_percent(cost: float, lower_bound: float) -> float:
    """``100 * (cost - lower_bound) / lower_bound``."""
    if not lower_bound > 0:
        raise ValueError(f"lower bound must be positive, got {lower_bound}")
    return 100.0 * (cost - lower_bound) / lower_bound


def is_forest(inst: Instance) -> bool:
    parent = list(range(inst.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in zip(inst.tails.tolist(), inst.heads.tolist()):
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def exact_pcst(inst: Instance, root: Optional[int] = None,
               depth_bound: Optional[int] = None) -> OptResult:
    """Optimal tree, rooted at ``root`` if given, with depth at most
    ``depth_bound`` if given."""
    n = inst.node_count
    if n == 0:
        raise ValueError("empty instance")
    if root is not None and not 0 <= root < n:
        raise ValueError(f"invalid root {root}")
    if depth_bound is not None and depth_bound < 1:
        raise ValueError("depth_bound must be >= 1")
    bounded = depth_bound is not None and depth_bound < n - 1
    if is_forest(inst):
        return _forest_dp(inst, root, depth_bound if bounded else None)
    if not bounded and inst.symmetric:
        if n > MAX_ENUM_NODES:
            raise InstanceTooLargeError(
                f"{n} nodes exceeds the exhaustive-search limit of {MAX_ENUM_NODES}")
        return _enumerate(inst, root)
    if n > MAX_LAYERED_NODES:
        raise InstanceTooLargeError(
            f"{n} nodes exceeds the depth-bounded search limit of {MAX_LAYERED_NODES}")
    return _layered(inst, root, depth_bound if bounded else n - 1)


def _better(cost, verts, best_cost, best_verts):
    if best_verts is None or cost < best_cost - _TIE:
        return True
    return abs(cost - best_cost) <= _TIE and verts < best_verts


def _enumerate(inst: Instance, root: Optional[int]) -> OptResult:
    n = inst.node_count
    nbr_mask = [0] * n
    for i, row in enumerate(inst.adjacency):
        for j, _ in row:
            nbr_mask[i] |= 1 << j
    excl = [inst.exclusion_cost(i) for i in range(n)]
    best_cost, best_verts, best_edges = None, None, None
    explored = 0
    for mask in range(1, 1 << n):
        if root is not None and not (mask >> root) & 1:
            continue
        explored += 1
        low = mask & -mask
        reach = low
        frontier = low
        while frontier:
            grow = 0
            f = frontier
            while f:
                b = f & -f
                grow |= nbr_mask[b.bit_length() - 1]
                f ^= b
            frontier = grow & mask & ~reach
            reach |= frontier
        if reach != mask:
            continue
        verts = tuple(i for i in range(n) if (mask >> i) & 1)
        edges = kruskal(inst, verts)
        cost = sum(c for _, _, c in edges)
        cost += sum(excl[i] for i in range(n) if not (mask >> i) & 1)
        if _better(cost, verts, best_cost, best_verts):
            best_cost, best_verts, best_edges = cost, verts, edges
    r = root if root is not None else best_verts[0]
    parent = {}
    nbrs = {v: [] for v in best_verts}
    for u, v, _ in best_edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    stack = [r]
    seen = {r}
    while stack:
        v = stack.pop()
        for w in nbrs[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                stack.append(w)
    return OptResult(best_cost, Tree(r, parent), explored)


def _forest_dp(inst: Instance, root: Optional[int], depth_bound: Optional[int]) -> OptResult:
    n = inst.node_count
    adj = inst.adjacency
    excl = [inst.exclusion_cost(i) for i in range(n)]
    total = sum(excl)
    limit = depth_bound if depth_bound is not None else n
    explored = 0

    def solve_from(r):
        # iterative DFS; worth[v][h] = best prize-minus-cost of v's subtree
        # when v may have descendants h more levels down
        nonlocal explored
        order, par = [], {r: -1}
        stack = [r]
        while stack:
            v = stack.pop()
            order.append(v)
            for w, _ in adj[v]:
                if w not in par:
                    par[w] = v
                    stack.append(w)
        explored += len(order)
        worth = {}
        for v in reversed(order):
            row = [excl[v]] * (limit + 1)
            for w, c_vw in adj[v]:
                if par.get(w) != v:
                    continue
                c = inst.cost(w, v)
                for h in range(1, limit + 1):
                    gain = worth[w][h - 1] - c
                    if gain > 0:
                        row[h] += gain
            worth[v] = row
        # rebuild the tree
        parent = {}
        stack = [(r, limit)]
        while stack:
            v, h = stack.pop()
            if h == 0:
                continue
            for w, _ in adj[v]:
                if par.get(w) != v:
                    continue
                if worth[w][h - 1] - inst.cost(w, v) > 0:
                    parent[w] = v
                    stack.append((w, h - 1))
        return total - worth[r][limit], Tree(r, parent)

    roots = [root] if root is not None else range(n)
    best = None
    for r in roots:
        cost, tree = solve_from(r)
        verts = tuple(sorted(tree.vertices))
        if best is None or _better(cost, verts, best[0], best[2]):
            best = (cost, tree, verts)
    return OptResult(best[0], best[1], explored)


def _layered(inst: Instance, root: Optional[int], depth_bound: int) -> OptResult:
    n = inst.node_count
    adj = inst.adjacency
    cost_to = [dict(row) for row in adj]
    nbr_mask = [sum(1 << j for j, _ in row) for row in adj]
    excl = [inst.exclusion_cost(i) for i in range(n)]
    explored = 0

    def bits(mask):
        while mask:
            b = mask & -mask
            yield b.bit_length() - 1
            mask ^= b

    def hook(i, prev):
        best_c, best_p = None, None
        for p in bits(prev):
            c = cost_to[i].get(p)
            if c is not None and (best_c is None or c < best_c):
                best_c, best_p = c, p
        return best_c, best_p

    @lru_cache(maxsize=None)
    def best(prev, rem, level):
        # cheapest completion when `prev` sits at depth `level` and `rem` is unassigned
        nonlocal explored
        explored += 1
        stop = sum(excl[i] for i in bits(rem))
        result = (stop, 0)
        if level >= depth_bound:
            return result
        reach = 0
        for p in bits(prev):
            reach |= nbr_mask[p]
        cand = rem & reach
        hooks = {i: hook(i, prev)[0] for i in bits(cand)}
        sub = cand
        while sub:
            c = sum(hooks[i] for i in bits(sub))
            if c < result[0]:
                tail, _ = best(sub, rem & ~sub, level + 1)
                if c + tail < result[0] - _TIE:
                    result = (c + tail, sub)
            sub = (sub - 1) & cand
        return result

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * n + 100))
    try:
        roots = [root] if root is not None else range(n)
        best_res = None
        for r in roots:
            full = ((1 << n) - 1) & ~(1 << r)
            cost, _ = best(1 << r, full, 0)
            parent = {}
            prev, rem, level = 1 << r, full, 0
            while True:
                _, layer = best(prev, rem, level)
                if not layer:
                    break
                for i in bits(layer):
                    parent[i] = hook(i, prev)[1]
                prev, rem, level = layer, rem & ~layer, level + 1
            tree = Tree(r, parent)
            verts = tuple(sorted(tree.vertices))
            if best_res is None or _better(cost, verts, best_res[0], best_res[2]):
                best_res = (cost, tree, verts)
    finally:
        sys.setrecursionlimit(old)
    return OptResult(best_res[0], best_res[1], explored)
