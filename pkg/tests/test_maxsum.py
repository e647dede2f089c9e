import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import path3, random_connected, random_tree, two_node
from pcst_maxsum import (Instance, Solution, SolverConfig, exact_pcst, extract_decisions,
                         init_state, kruskal, node_fields, solution_cost, solve_rooted, sweep)
from pcst_maxsum.maxsum import (NOT_IN_TREE, ROOT, Decisions, decisions_to_solution)

EXACT = SolverConfig(rho=0.0, cost_noise=0.0, max_sweeps=400, stable_sweeps=400)


def test_zero_noise_initial_state_is_flat():
    state = init_state(path3(), 0, SolverConfig(noise_eps=0.0))
    free = ~state.topo.root_src
    assert np.all(state.B[free] == 0.0)
    assert np.all(state.A[free, 1:] == 0.0) and np.all(state.C[free, 1:] == 0.0)
    assert np.all(np.isneginf(state.A[free, 0])) and np.all(np.isneginf(state.C[:, 0]))


def test_initial_state_is_deterministic():
    inst = random_connected(8, 5, 1)
    a = init_state(inst, 0, SolverConfig(seed=4))
    b = init_state(inst, 0, SolverConfig(seed=4))
    for x, y in ((a.A, b.A), (a.B, b.B), (a.C, b.C)):
        assert np.array_equal(x, y)


def test_root_messages():
    state = init_state(path3(), 0, SolverConfig())
    t = state.topo
    out, into = t.edge_index(0, 1), t.edge_index(1, 0)
    assert state.A[out, 0] == 0.0 and np.all(np.isneginf(state.A[out, 1:]))
    assert np.isneginf(state.B[out]) and np.all(np.isneginf(state.C[out]))
    assert state.E[out, 0] == 0.0
    new, _ = sweep(state, None)
    assert np.all(np.isfinite(new.C[into, 1:]))
    assert np.all(np.isneginf(new.C[out]))


def test_leaf_message_after_one_sweep():
    inst = path3()
    state, _ = sweep(init_state(inst, 0, SolverConfig()), None)
    e = state.topo.edge_index(2, 1)
    assert np.all(np.isneginf(state.A[e]))
    # B = -lam b = -3, C[d] = -c = -2, then shifted so the maximum is 0
    assert state.B[e] == pytest.approx(-1.0)
    assert np.allclose(state.C[e, 1:], 0.0)


def test_messages_stay_normalised():
    inst = random_connected(10, 8, 3)
    state = init_state(inst, 0, SolverConfig(depth_bound=5))
    for _ in range(6):
        state, _ = sweep(state, None)
        top = np.maximum(np.maximum(state.A.max(axis=1), state.B), state.C.max(axis=1))
        assert np.all(top == 0.0)
        assert np.array_equal(state.Dm, np.maximum(state.A.max(axis=1), state.B))
        assert np.array_equal(state.E[:, :-1], np.maximum(state.C[:, 1:], state.Dm[:, None]))
        assert np.array_equal(state.E[:, -1], state.Dm)


def test_sweep_is_identical_for_any_worker_count():
    inst = random_connected(40, 60, 9)
    base = init_state(inst, 3, SolverConfig(depth_bound=8))
    one, d1 = sweep(base, None, workers=1)
    many, dk = sweep(base, None, workers=4)
    assert d1 == dk
    for x, y in ((one.A, many.A), (one.B, many.B), (one.C, many.C)):
        assert np.array_equal(x, y)


def test_two_node_include():
    inst = two_node()
    state = init_state(inst, 0, SolverConfig(depth_bound=1))
    for _ in range(2):
        state, _ = sweep(state, None)
    f = node_fields(state)
    dec = extract_decisions(f)
    assert dec.parent.tolist() == [ROOT, 0]
    e = f.topo.edge_index(0, 1)
    assert f.F[e, 1] == 0.0 and f.G[1] < 0.0
    sol, stats = solve_rooted(inst, 0, SolverConfig(depth_bound=1))
    assert stats.converged and stats.sweeps_used <= 10
    assert sol.cost == 1.0


def test_path3_rooted():
    sol, stats = solve_rooted(path3(), 0, SolverConfig(depth_bound=3))
    assert sol.parents.tolist() == [NOT_IN_TREE, 0, 1]
    assert sol.depths.tolist() == [0, 1, 2]
    assert sol.cost == 3.0 and not sol.repaired and stats.converged


def test_fields_of_isolated_node_and_root():
    inst = Instance.from_edges(3, [(0, 1, 1.0)], [0.0, 1.0, 2.0])
    f = node_fields(init_state(inst, 0, SolverConfig()))
    assert f.G[2] == 0.0
    assert not np.any(f.topo.dst == 2)
    assert np.isneginf(f.G[0])
    assert np.all(np.isneginf(f.F[f.topo.dst == 0]))


def _star_fields():
    # node 0 with neighbours 3 and 5; node 1 is the root
    inst = Instance.from_edges(6, [(0, 3, 1.0), (0, 5, 1.0), (1, 2, 1.0)], [1.0] * 6)
    f = node_fields(init_state(inst, 1, SolverConfig(depth_bound=4)))
    f.F[:, 1:] = -10.0
    f.G[:] = -10.0
    return f


def test_decision_unique_maximum():
    f = _star_fields()
    f.F[f.topo.edge_index(5, 0), 2] = 0.0
    dec = extract_decisions(f)
    assert dec.parent[0] == 5 and dec.depth[0] == 2 and not dec.degenerate[0]


def test_decision_tie_prefers_out_of_tree():
    f = _star_fields()
    f.F[f.topo.edge_index(3, 0), 1] = 0.0
    f.G[0] = 0.0
    dec = extract_decisions(f)
    assert dec.parent[0] == NOT_IN_TREE and dec.degenerate[0]


def test_decision_tie_prefers_lowest_neighbour():
    f = _star_fields()
    f.F[f.topo.edge_index(5, 0), 1] = 0.0
    f.F[f.topo.edge_index(3, 0), 3] = 0.0
    dec = extract_decisions(f)
    assert dec.parent[0] == 3 and dec.depth[0] == 3 and dec.degenerate[0]


def test_decision_only_out_of_tree_finite():
    f = _star_fields()
    f.F[:] = -np.inf
    f.G[0] = 0.0
    assert extract_decisions(f).parent[0] == NOT_IN_TREE


def test_cycle_is_repaired():
    inst = Instance.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)],
                               [0.0, 1.0, 1.0, 1.0])
    dec = Decisions(np.array([ROOT, 0, 3, 2]), np.array([0, 1, 2, 3]),
                    np.zeros(4, dtype=bool))
    sol = decisions_to_solution(inst, dec, 0)
    assert sol.repaired
    assert sol.parents.tolist() == [NOT_IN_TREE, 0, NOT_IN_TREE, NOT_IN_TREE]
    assert sol.cost == 1.0 + 2.0


def test_all_out_of_tree_costs_lambda_prizes():
    inst = path3(lam=2.0)
    dec = Decisions(np.array([ROOT, -1, -1]), np.zeros(3, dtype=np.int64),
                    np.zeros(3, dtype=bool))
    sol = decisions_to_solution(inst, dec, 0)
    assert sol.size == 1 and not sol.repaired
    assert sol.cost == 2.0 * 3.5


def test_solution_cost_examples():
    inst = path3()
    empty = Solution(0, np.array([-1, -1, -1]), np.array([0, -1, -1]), 0.0)
    full = Solution(0, np.array([-1, 0, 1]), np.array([0, 1, 2]), 0.0)
    assert solution_cost(inst, empty) == 3.5
    assert solution_cost(inst, full) == 3.0
    assert solution_cost(path3(lam=0.0), empty) == 0.0
    bad = Solution(0, np.array([-1, 0, 0]), np.array([0, 1, 1]), 0.0)
    with pytest.raises(ValueError):
        solution_cost(inst, bad)


def test_solution_json_round_trip():
    sol, _ = solve_rooted(path3(), 0)
    back = Solution.from_dict(json.loads(sol.to_json()))
    assert back.to_json() == sol.to_json()
    assert set(sol.to_dict()) >= {"parents", "depths", "cost", "converged", "sweeps"}


@pytest.mark.parametrize("seed", range(5))
def test_large_lambda_spans_everything_at_mst_cost(seed):
    inst = random_connected(9, 6, seed)
    lam = (inst.costs.sum() + 1.0) / inst.prizes.min()
    inst = inst.replace(lam=lam)
    sol, _ = solve_rooted(inst, 0)
    assert sol.size == inst.node_count
    assert sol.cost == pytest.approx(sum(c for *_, c in kruskal(inst, range(9))), abs=1e-9)


@pytest.mark.parametrize("seed", range(8))
def test_exact_on_trees(seed):
    inst = random_tree(5 + 3 * seed, seed, lam=1.0 + 0.2 * seed)
    sol, stats = solve_rooted(inst, 0, EXACT)
    opt = exact_pcst(inst, root=0)
    assert stats.fixed_point and stats.sweeps_used <= 200
    assert sol.cost == pytest.approx(opt.cost, abs=1e-9)


def test_depth_bound_is_respected():
    inst = Instance.from_edges(5, [(i, i + 1, 0.1) for i in range(4)], [0, 1, 1, 1, 5.0])
    sol, _ = solve_rooted(inst, 0, SolverConfig(depth_bound=2, rho=0.0, cost_noise=0.0))
    assert sol.depths.max() <= 2
    assert sol.cost == pytest.approx(exact_pcst(inst, root=0, depth_bound=2).cost)


def test_reinforcement_kicks_in_and_snapshot_is_best():
    inst = random_connected(30, 60, 5, cost_range=(1.0, 1.0))
    cfg = SolverConfig(rho=1e-2, stable_sweeps=5, max_sweeps=400, cost_noise=0.0)
    sol, stats = solve_rooted(inst, 0, cfg)
    assert sol.cost == solution_cost(inst, sol)
    if not stats.converged:
        last = decisions_to_solution(inst, stats.decisions, 0, cfg.depth_for(inst))
        assert sol.cost <= last.cost


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 9), st.integers(0, 6), st.integers(0, 10_000),
       st.sampled_from([0.5, 1.0, 2.0]))
def test_rooted_solution_is_a_feasible_tree(n, extra, seed, lam):
    inst = random_connected(n, extra, seed, lam)
    sol, _ = solve_rooted(inst, 0, SolverConfig(max_sweeps=3000))
    assert sol.depths[0] == 0
    for i, p in enumerate(sol.parents.tolist()):
        if p >= 0:
            assert p in inst.neighbors(i)
            assert sol.depths[i] == sol.depths[p] + 1
        elif i != 0:
            assert sol.depths[i] == -1
    assert sol.cost >= exact_pcst(inst, root=0).cost - 1e-9
