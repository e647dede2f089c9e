"""Prize-collecting Steiner tree instances.

An :class:`Instance` is an undirected graph whose edges carry a cost for
each orientation.  ``costs[e]`` is the price paid when ``tails[e]`` takes
``heads[e]`` as its parent, ``rcosts[e]`` the price for the opposite
orientation.  Symmetric instances simply have ``costs == rcosts``.

The energy minimised by every solver in this package is

    H(p) = sum_i c[i, p_i]      with   c[i, *] = lam * prizes[i],

i.e. the cost of the tree edges plus the prizes left uncollected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class InvalidInstanceError(ValueError):
    """Raised when an instance violates one of its invariants."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    node_count: int
    tails: np.ndarray
    heads: np.ndarray
    costs: np.ndarray
    rcosts: np.ndarray
    prizes: np.ndarray
    lam: float = 1.0
    name: str = ""
    _adj: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(self, "tails", _frozen(self.tails, np.int64))
        object.__setattr__(self, "heads", _frozen(self.heads, np.int64))
        object.__setattr__(self, "costs", _frozen(self.costs, np.float64))
        rc = self.costs if self.rcosts is None else self.rcosts
        object.__setattr__(self, "rcosts", _frozen(rc, np.float64))
        object.__setattr__(self, "prizes", _frozen(self.prizes, np.float64))
        object.__setattr__(self, "lam", float(self.lam))
        m = len(self.tails)
        if not (len(self.heads) == len(self.costs) == len(self.rcosts) == m):
            raise InvalidInstanceError("edge arrays have different lengths")
        if len(self.prizes) != self.node_count:
            raise InvalidInstanceError(
                f"expected {self.node_count} prizes, got {len(self.prizes)}")

    @classmethod
    def from_edges(cls, node_count, edges, prizes, lam=1.0, name=""):
        """Build from ``(i, j, cost)`` or ``(i, j, c_ij, c_ji)`` tuples."""
        edges = list(edges)
        tails = [e[0] for e in edges]
        heads = [e[1] for e in edges]
        costs = [e[2] for e in edges]
        rcosts = [e[3] if len(e) > 3 else e[2] for e in edges]
        return cls(node_count, tails, heads, costs, rcosts, prizes, lam, name)

    @property
    def edge_count(self) -> int:
        return len(self.tails)

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.costs, self.rcosts))

    def exclusion_cost(self, i: int) -> float:
        """Cost of leaving node ``i`` out of the tree (``lam * b_i``)."""
        return self.lam * float(self.prizes[i])

    @property
    def exclusion_costs(self) -> np.ndarray:
        return self.lam * self.prizes

    def cost(self, i: int, j: int) -> float:
        """Cost paid when ``i`` takes neighbour ``j`` as parent."""
        for k, c in self.adjacency[i]:
            if k == j:
                return c
        raise KeyError(f"no edge {i}-{j}")

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        """``adjacency[i]`` lists ``(j, c_ij)`` sorted by neighbour index."""
        if self._adj is None:
            adj = [[] for _ in range(self.node_count)]
            for t, h, c, rc in zip(self.tails.tolist(), self.heads.tolist(),
                                   self.costs.tolist(), self.rcosts.tolist()):
                adj[t].append((h, c))
                adj[h].append((t, rc))
            for row in adj:
                row.sort()
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def neighbors(self, i: int) -> list[int]:
        return [j for j, _ in self.adjacency[i]]

    def degrees(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.tails, self.heads]),
                           minlength=self.node_count)

    def total_edge_cost(self) -> float:
        return float(np.maximum(self.costs, self.rcosts).sum())

    def replace(self, **changes) -> Instance:
        kw = dict(node_count=self.node_count, tails=self.tails, heads=self.heads,
                  costs=self.costs, rcosts=self.rcosts, prizes=self.prizes,
                  lam=self.lam, name=self.name)
        kw.update(changes)
        return Instance(**kw)

    def same_as(self, other: Instance) -> bool:
        """Field-for-field equality, bitwise on the float arrays."""
        return (self.node_count == other.node_count
                and self.name == other.name
                and self.lam == other.lam
                and np.array_equal(self.tails, other.tails)
                and np.array_equal(self.heads, other.heads)
                and np.array_equal(self.costs, other.costs)
                and np.array_equal(self.rcosts, other.rcosts)
                and np.array_equal(self.prizes, other.prizes))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.same_as(other)

    __hash__ = None


def validate(inst: Instance) -> list[str]:
    """Return the list of invariant violations (empty when valid)."""
    problems = []
    n = inst.node_count
    if n < 0:
        problems.append(f"negative node count {n}")
    if not math.isfinite(inst.lam):
        problems.append(f"non-finite lambda {inst.lam}")
    elif inst.lam < 0:
        problems.append(f"negative lambda {inst.lam}")
    for i, b in enumerate(inst.prizes.tolist()):
        if not math.isfinite(b):
            problems.append(f"non-finite prize node {i}")
        elif b < 0:
            problems.append(f"negative prize node {i}")
    seen = set()
    for t, h, c, rc in zip(inst.tails.tolist(), inst.heads.tolist(),
                           inst.costs.tolist(), inst.rcosts.tolist()):
        if not (0 <= t < n and 0 <= h < n):
            problems.append(f"node index out of range in edge {t}-{h}")
            continue
        if t == h:
            problems.append(f"self-loop on node {t}")
            continue
        key = (min(t, h), max(t, h))
        if key in seen:
            problems.append(f"duplicate edge {key[0]}-{key[1]}")
        seen.add(key)
        for value in (c, rc):
            if not math.isfinite(value):
                problems.append(f"non-finite cost on edge {t}-{h}")
                break
            if value < 0:
                problems.append(f"negative cost on edge {t}-{h}")
                break
    return problems


def check(inst: Instance) -> Instance:
    problems = validate(inst)
    if problems:
        raise InvalidInstanceError("; ".join(problems))
    return inst
