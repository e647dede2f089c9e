import pytest
from hypothesis import given, settings, strategies as st

from conftest import path3, random_connected
from pcst_maxsum import (Instance, SolverConfig, Tree, apply_post, exact_pcst, kruskal,
                         mst_respan, solve_pcst, strong_prune)


def test_prune_keeps_path3_optimum():
    t = Tree(0, {1: 0, 2: 1})
    assert strong_prune(path3(), t) == t


def test_prune_drops_worthless_leaf():
    inst = Instance.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], [0.0, 5.0, 0.0])
    assert strong_prune(inst, Tree(0, {1: 0, 2: 1})) == Tree(0, {1: 0})


def test_prune_drops_whole_unprofitable_branch():
    inst = Instance.from_edges(4, [(0, 1, 3.0), (1, 2, 1.0), (0, 3, 1.0)],
                               [0.0, 1.0, 1.5, 2.0])
    # branch 1-2 is worth 2.5 but costs 3 to attach
    assert strong_prune(inst, Tree(0, {1: 0, 2: 1, 3: 0})) == Tree(0, {3: 0})


def test_prune_single_node():
    assert strong_prune(path3(), Tree(1)) == Tree(1)


def test_mst_on_path3_and_triangle():
    t = mst_respan(path3(), {0, 1, 2}, root=0)
    assert t.edges == {(1, 0), (2, 1)} and t.edge_weight(path3()) == 3.0
    tri = Instance.from_edges(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 4.0)], [1.0] * 3)
    assert mst_respan(tri, {0, 1, 2}).edge_weight(tri) == 3.0


def test_mst_infeasible_and_bad_input():
    inst = Instance.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)], [1.0] * 4)
    assert mst_respan(inst, {0, 1, 2, 3}) is None
    assert kruskal(inst, {0, 2}) is None
    with pytest.raises(ValueError):
        mst_respan(inst, set())
    with pytest.raises(ValueError):
        mst_respan(inst, {0, 1}, root=3)
    asym = Instance.from_edges(2, [(0, 1, 1.0, 2.0)], [1.0, 1.0])
    with pytest.raises(ValueError):
        kruskal(asym, {0, 1})


def test_kruskal_ties_go_to_lower_edge_index():
    sq = Instance.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)], [1.0] * 4)
    assert [(u, v) for u, v, _ in kruskal(sq, range(4))] == [(0, 1), (1, 2), (2, 3)]


def test_tree_round_trips_through_solution_arrays():
    t = Tree(2, {0: 1, 1: 2, 3: 2})
    parents, depths = t.to_solution_arrays(5)
    assert parents.tolist() == [1, 2, -1, 2, -1]
    assert depths.tolist() == [2, 1, 0, 1, -1]


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 10), st.integers(0, 8), st.integers(0, 10_000))
def test_post_processing_never_hurts(n, extra, seed):
    inst = random_connected(n, extra, seed, lam=1.2)
    sol, _ = solve_pcst(inst, SolverConfig(max_sweeps=2000))
    for mode in ("prune", "mst", "both"):
        out = apply_post(inst, sol, mode)
        assert out.cost <= sol.cost + 1e-9
        assert out.cost >= exact_pcst(inst).cost - 1e-9
        assert Tree.from_solution(out).is_valid(inst)


def test_apply_post_rejects_unknown_mode():
    sol, _ = solve_pcst(path3())
    with pytest.raises(ValueError):
        apply_post(path3(), sol, "trim")
    assert apply_post(path3(), sol, "none") is sol
