"""A first tour: build an instance, solve it, compare with the exact optimum.

Run with ``python demos/01_first_solve.py``.
"""

import numpy as np

from pcst_maxsum import (Instance, RSpec, SolverConfig, apply_post, exact_pcst, generate,
                         solve_pcst, solve_rooted, write_instance)

# %% A three-node path r - a - b.  Reaching b (prize 3) costs 1 + 2.
path = Instance.from_edges(3, [(0, 1, 1.0), (1, 2, 2.0)], prizes=[0.0, 0.5, 3.0], lam=1.0)
print(write_instance(path))

# With r forced into the tree the whole path is worth buying.
sol, stats = solve_rooted(path, root=0)
print("rooted at r:", sol.parents.tolist(), "cost", sol.cost, "sweeps", stats.sweeps_used)

# Left free to choose, the solver keeps b alone and gives up a's 0.5.
sol, stats = solve_pcst(path)
print("unrooted:", sorted(sol.vertex_set), "cost", sol.cost, "root via", stats.selection)

# %% A small random graph where the exact optimum is still cheap to enumerate.
inst = generate(RSpec(n=12, nu=3, lam=1.2, costs="uniform"), seed=5)
sol, stats = solve_pcst(inst)
opt = exact_pcst(inst)
print(f"\n{inst.name}: {inst.edge_count} edges")
print(f"max-sum cost {sol.cost:.6f} with {sol.size} nodes, {stats.sweeps_used} sweeps")
print(f"exact   cost {opt.cost:.6f} with {len(opt.tree.vertices)} nodes")

# %% Reinforcement trades accuracy for speed.  A large rho freezes the
# decisions early; post-processing can repair some of the damage.
hasty = SolverConfig(rho=0.05, stable_sweeps=3)
sol, _ = solve_pcst(inst, hasty)
fixed = apply_post(inst, sol, "both")
print(f"\nrho=0.05: cost {sol.cost:.6f}, after MST + pruning {fixed.cost:.6f}")

# %% The solution serializes to plain JSON.
print("\n" + sol.to_json()[:120] + " ...")
print("depth histogram:", np.bincount(sol.depths[sol.depths >= 0]).tolist())
