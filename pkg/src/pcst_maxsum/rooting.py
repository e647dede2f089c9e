"""Unrooted PCST through a virtual root.

A new node ``r`` joined to every original node at a uniform cost ``mu``
larger than any tree could ever cost makes ``{r}`` the optimum of the
augmented instance.  After solving it, ``alpha_j = -F_j(r, 1)`` measures the
best energy reachable when ``j`` is the only node hanging from ``r``, i.e.
the best tree rooted at ``j`` in the original graph.  The smallest
``alpha`` picks the root of a second, ordinary rooted solve.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .instance import Instance
from .maxsum import NodeFields, Solution, SolverConfig, SolveStats, solve_rooted


@dataclass
class RootScores:
    alpha: np.ndarray
    best_root: int
    mu_used: float


@dataclass
class PcstStats:
    root: int
    selection: str
    wall_time: float
    final: SolveStats = field(repr=False)
    virtual: Optional[SolveStats] = field(default=None, repr=False)
    scores: Optional[RootScores] = field(default=None, repr=False)

    @property
    def sweeps_used(self) -> int:
        extra = self.virtual.sweeps_used if self.virtual is not None else 0
        return self.final.sweeps_used + extra

    @property
    def converged(self) -> bool:
        return self.final.converged

    def summary(self) -> dict:
        out = {"root": self.root, "selection": self.selection,
               "wall_time": self.wall_time, "sweeps_used": self.sweeps_used,
               "converged": self.converged, "final": self.final.summary()}
        if self.virtual is not None:
            out["virtual"] = self.virtual.summary()
        return out


def default_mu(inst: Instance) -> float:
    return inst.total_edge_cost() + inst.lam * float(inst.prizes.sum()) + 1.0


def augment_virtual_root(inst: Instance, mu: Optional[float] = None
                         ) -> tuple[Instance, float]:
    """Append node ``n`` connected to every node at cost ``mu``, prize 0."""
    if mu is None:
        mu = default_mu(inst)
    n = inst.node_count
    nodes = np.arange(n)
    aug = Instance(
        n + 1,
        np.concatenate([inst.tails, nodes]),
        np.concatenate([inst.heads, np.full(n, n)]),
        np.concatenate([inst.costs, np.full(n, mu)]),
        np.concatenate([inst.rcosts, np.full(n, mu)]),
        np.append(inst.prizes, 0.0),
        inst.lam,
        f"{inst.name}+vroot" if inst.name else "vroot",
    )
    return aug, float(mu)


def root_scores(fields: NodeFields, r: int, mu: float = float("nan")) -> RootScores:
    """``alpha_j = -F_j(r, 1)``: best energy of a tree hanging from ``r`` through
    ``j`` alone.  Entry ``r`` (and any unreachable node) is ``inf``."""
    topo = fields.topo
    n = topo.n
    alpha = np.full(n, np.inf)
    out = np.flatnonzero(topo.src == r)
    if fields.F.shape[1] > 1:
        alpha[topo.dst[out]] = -fields.F[out, 1]
    alpha[np.isnan(alpha)] = np.inf
    alpha[r] = np.inf
    if r == n - 1:
        # the usual virtual root is the last node; report original nodes only
        alpha = alpha[:-1]
    return RootScores(alpha, int(np.argmin(alpha)), mu)


def solve_pcst(inst: Instance, cfg: SolverConfig = SolverConfig(),
               root: Optional[int] = None, mu: Optional[float] = None
               ) -> tuple[Solution, PcstStats]:
    """Solve the unrooted problem: pick a root, then run the rooted solver."""
    t0 = time.perf_counter()
    n = inst.node_count
    if n == 0:
        raise ValueError("empty instance")
    virtual = scores = None
    if root is not None:
        if not 0 <= root < n:
            raise ValueError(f"invalid root {root}")
        selection = "given"
    elif n == 1:
        root, selection = 0, "single"
    else:
        excl = inst.exclusion_costs
        heavy = int(np.argmax(excl))
        if excl[heavy] > inst.total_edge_cost():
            root, selection = heavy, "heavy-prize"
        else:
            aug, mu = augment_virtual_root(inst, mu)
            depth = cfg.depth_for(inst) + 1
            _, virtual = solve_rooted(aug, n, replace(cfg, depth_bound=depth))
            scores = root_scores(virtual.fields, n, mu)
            root, selection = scores.best_root, "virtual-root"
    sol, final = solve_rooted(inst, root, cfg)
    stats = PcstStats(root=int(root), selection=selection,
                      wall_time=time.perf_counter() - t0, final=final,
                      virtual=virtual, scores=scores)
    return sol, stats
