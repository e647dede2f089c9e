"""What a converged, unreinforced run guarantees, checked numerically.

1. The fixed point stays a fixed point when the graph is unrolled into its
   tree of non-backtracking walks (checked away from the tree's leaves).
2. Neither MST rewiring nor strong pruning can improve the solution.
3. If every node is in the tree, the solution is optimal.

Run with ``python demos/03_fixed_point_checks.py``.
"""

import numpy as np

from pcst_maxsum import (Instance, SolverConfig, check_fixed_point_optimality,
                         check_lifted_fixed_point, check_subtree_optimality, computation_tree,
                         solve_rooted)

rng = np.random.default_rng(7)
edges = []
for r in range(3):
    for c in range(3):
        v = 3 * r + c
        if c < 2:
            edges.append((v, v + 1, float(rng.uniform(1, 3))))
        if r < 2:
            edges.append((v, v + 3, float(rng.uniform(1, 3))))
grid = Instance.from_edges(9, edges, rng.uniform(0, 3, 9), lam=1.5, name="3x3 grid")

# rho = 0 switches reinforcement off; cost_noise = 0 keeps the costs exact.
plain = SolverConfig(rho=0.0, cost_noise=0.0, max_sweeps=5000, stable_sweeps=5000)
sol, stats = solve_rooted(grid, root=4, cfg=plain)
print(f"converged to a fixed point: {stats.fixed_point} after {stats.sweeps_used} sweeps")
print(f"tree {sorted(sol.vertex_set)}, cost {sol.cost:.6f}")

# %% The unrolled tree grows quickly: radius 10 around the centre of a 3x3 grid.
ct = computation_tree(grid, 4, 10)
print(f"\ncomputation tree of radius 10 has {ct.size} nodes, "
      f"{int(ct.interior.sum())} interior")
print("lifting:", check_lifted_fixed_point(stats.state))

# %% Post-processing and full-set optimality.
rep = check_fixed_point_optimality(grid, sol, stats.state)
print("\npreconditions met:", rep["preconditions_met"], rep["reasons"])
for item in rep["items"]:
    print(f"  {item['name']:24s} {item.get('lhs')!s:>20} {item.get('rhs')!s:>20}  "
          f"pass={item['pass']}")

# %% No subtree of the solution that keeps the root does better.
print("\nsubtree check:", check_subtree_optimality(grid, sol))
