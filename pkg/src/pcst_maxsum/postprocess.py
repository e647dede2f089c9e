"""Strong pruning and minimum-spanning-tree rewiring of a rooted tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .instance import Instance


@dataclass(frozen=True)
class Tree:
    """A tree of the host graph oriented towards ``root``.

    ``parent`` maps every non-root vertex of the tree to its parent.
    """

    root: int
    parent: dict = field(default_factory=dict)

    @property
    def vertices(self) -> set[int]:
        return {self.root, *self.parent}

    @property
    def edges(self) -> set[tuple[int, int]]:
        return set(self.parent.items())

    def children(self) -> dict[int, list[int]]:
        kids = {v: [] for v in self.vertices}
        for v, p in self.parent.items():
            kids[p].append(v)
        for v in kids:
            kids[v].sort()
        return kids

    def edge_weight(self, inst: Instance) -> float:
        return sum(inst.cost(v, p) for v, p in self.parent.items())

    def cost(self, inst: Instance) -> float:
        """Energy ``sum of edge costs + lam * prizes left outside``."""
        inside = self.vertices
        left = sum(inst.exclusion_cost(i) for i in range(inst.node_count) if i not in inside)
        return self.edge_weight(inst) + left

    def is_valid(self, inst: Instance) -> bool:
        kids = self.children()
        seen = {self.root}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in kids[v]:
                if c in seen:
                    return False
                seen.add(c)
                stack.append(c)
        if seen != self.vertices:
            return False
        adj = inst.adjacency
        return all(any(k == p for k, _ in adj[v]) for v, p in self.parent.items())

    @classmethod
    def from_solution(cls, sol) -> Tree:
        return cls(int(sol.root),
                   {i: int(p) for i, p in enumerate(sol.parents.tolist()) if p >= 0})

    def to_solution_arrays(self, n: int):
        parents = np.full(n, -1, dtype=np.int64)
        depths = np.full(n, -1, dtype=np.int64)
        depths[self.root] = 0
        kids = self.children()
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in kids[v]:
                parents[c] = v
                depths[c] = depths[v] + 1
                stack.append(c)
        return parents, depths


class _DisjointSets:
    def __init__(self, items):
        self.up = {v: v for v in items}

    def find(self, x):
        root = x
        while self.up[root] != root:
            root = self.up[root]
        while self.up[x] != root:
            self.up[x], x = root, self.up[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.up[rb] = ra
        return True


def kruskal(inst: Instance, vertex_set: Iterable[int]):
    """MST edges ``(u, v, cost)`` of the subgraph induced by ``vertex_set``,
    or ``None`` when that subgraph is disconnected.  Ties go to the lower
    edge index."""
    vs = set(int(v) for v in vertex_set)
    if not inst.symmetric:
        raise ValueError("spanning trees need symmetric edge costs")
    inside = np.zeros(inst.node_count, dtype=bool)
    inside[list(vs)] = True
    idx = np.flatnonzero(inside[inst.tails] & inside[inst.heads])
    order = idx[np.argsort(inst.costs[idx], kind="stable")]
    dsu = _DisjointSets(vs)
    chosen = []
    for e in order.tolist():
        u, v = int(inst.tails[e]), int(inst.heads[e])
        if dsu.union(u, v):
            chosen.append((u, v, float(inst.costs[e])))
            if len(chosen) == len(vs) - 1:
                break
    if len(chosen) != max(0, len(vs) - 1):
        return None
    return chosen


def mst_respan(inst: Instance, vertex_set: Iterable[int], root: Optional[int] = None
               ) -> Optional[Tree]:
    """Minimum spanning tree of the induced subgraph on ``vertex_set`` oriented
    towards ``root`` (default: smallest vertex).  ``None`` if disconnected."""
    vs = sorted(set(int(v) for v in vertex_set))
    if not vs:
        raise ValueError("empty vertex set")
    if root is None:
        root = vs[0]
    elif root not in vs:
        raise ValueError(f"root {root} not in vertex set")
    edges = kruskal(inst, vs)
    if edges is None:
        return None
    nbrs = {v: [] for v in vs}
    for u, v, _ in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    parent = {}
    stack = [root]
    seen = {root}
    while stack:
        v = stack.pop()
        for w in sorted(nbrs[v]):
            if w not in seen:
                seen.add(w)
                parent[w] = v
                stack.append(w)
    return Tree(root, parent)


def strong_prune(inst: Instance, tree: Tree) -> Tree:
    """Drop every subtree whose net worth does not pay for its connecting edge.

    Net worth is computed bottom-up as
    ``W(v) = lam b_v + sum over children u of max(0, W(u) - c_uv)``
    and child ``u`` is cut when ``W(u) - c_uv <= 0``.
    """
    kids = tree.children()
    order = []
    stack = [tree.root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kids[v])
    worth = {}
    keep_child = {}
    for v in reversed(order):
        w = inst.exclusion_cost(v)
        for u in kids[v]:
            margin = worth[u] - inst.cost(u, v)
            keep_child[u] = margin > 0
            if margin > 0:
                w += margin
        worth[v] = w
    parent = {}
    stack = [tree.root]
    while stack:
        v = stack.pop()
        for u in kids[v]:
            if keep_child[u]:
                parent[u] = v
                stack.append(u)
    return Tree(tree.root, parent)


POST_MODES = ("none", "prune", "mst", "both")


def apply_post(inst: Instance, sol, mode: str = "none"):
    """Return ``sol`` rewired by MST (``mst``), pruned (``prune``) or both,
    MST first.  Costs are recomputed; other fields are carried over."""
    from dataclasses import replace

    from .maxsum import solution_cost

    if mode not in POST_MODES:
        raise ValueError(f"unknown post-processing mode {mode!r}")
    if mode == "none":
        return sol
    tree = Tree.from_solution(sol)
    if mode in ("mst", "both") and inst.symmetric:
        tree = mst_respan(inst, tree.vertices, root=tree.root) or tree
    if mode in ("prune", "both"):
        tree = strong_prune(inst, tree)
    parents, depths = tree.to_solution_arrays(inst.node_count)
    out = replace(sol, parents=parents, depths=depths)
    out.cost = solution_cost(inst, out)
    return out
