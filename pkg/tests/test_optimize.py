import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import complete_graph, graphs, random_operation
from sird.errors import HeightCapExceeded, InvalidInitialTree, LeafOperand, NotBrothers
from sird.graph import one_dim_entropy
from sird.optimize import (
    apply_combine,
    apply_merge,
    delta_combine,
    delta_merge,
    optimize,
)
from sird.synthetic import random_graph, random_knn_graph, two_triangles
from sird.tree import flat_tree, from_structure, tree_entropy, validate, validate_optimizer_caches


def triangle_clusters(g):
    return from_structure(g, {6: [0, 1, 2], 7: [3, 4, 5], 8: [6, 7]}, {v: v for v in range(6)}, 8)


def apply(t, kind, b1, b2, cap=None):
    return apply_merge(t, b1, b2) if kind == "merge" else apply_combine(t, b1, b2, cap)


def predicted(g, t, kind, b1, b2, cap=None):
    return delta_merge(g, t, b1, b2) if kind == "merge" else delta_combine(g, t, b1, b2, cap)


# -- single operators ------------------------------------------------------------

def test_combine_two_triangle_leaves_matches_recompute(triangles):
    t = flat_tree(triangles)
    before = tree_entropy(triangles, t)
    d = delta_combine(triangles, t, 0, 1)
    new = apply_combine(t, 0, 1)
    assert before - tree_entropy(triangles, t) == pytest.approx(d, abs=1e-12)
    assert t.children(new) == [0, 1] and validate(triangles, t).valid


def test_combine_only_two_brothers_adds_pass_through(triangles):
    t = triangle_clusters(triangles)
    before = tree_entropy(triangles, t)
    d = delta_combine(triangles, t, 6, 7, height_cap=3)
    new = apply_combine(t, 6, 7, height_cap=3)
    assert t.node(new).V == t.node(t.root).V
    assert t.node(new).term == 0.0
    assert before - tree_entropy(triangles, t) == pytest.approx(d, abs=1e-12)
    assert abs(d) <= 1e-12


def test_combine_respects_height_cap(triangles):
    t = triangle_clusters(triangles)
    with pytest.raises(HeightCapExceeded):
        delta_combine(triangles, t, 6, 7, height_cap=2)
    with pytest.raises(HeightCapExceeded):
        apply_combine(t, 6, 7, height_cap=2)


def test_merge_of_singleton_clusters_equals_pair_cluster():
    g = two_triangles(0.1)
    leaves = {v: v for v in range(6)}
    t = from_structure(g, {6: [0], 7: [1], 8: [6, 7, 2, 3, 4, 5]}, leaves, 8)
    ref = from_structure(g, {6: [0, 1], 8: [6, 2, 3, 4, 5]}, leaves, 8)
    before = tree_entropy(g, t)
    d = delta_merge(g, t, 6, 7)
    nodes = len(t.nodes)
    apply_merge(t, 6, 7)
    assert len(t.nodes) == nodes - 1
    assert tree_entropy(g, t) == pytest.approx(tree_entropy(g, ref), abs=1e-12)
    assert before - tree_entropy(g, t) == pytest.approx(d, abs=1e-12)


def test_merging_the_triangles_worsens_entropy(triangles):
    t = triangle_clusters(triangles)
    d = delta_merge(triangles, t, 6, 7)
    assert d < 0
    new = apply_merge(t, 6, 7)
    # sole child of the root: a pass-through node contributing nothing
    assert t.node(new).V == t.node(t.root).V and t.node(new).term == 0.0
    assert validate(triangles, t).valid


def test_operator_preconditions(triangles):
    t = triangle_clusters(triangles)
    with pytest.raises(LeafOperand):
        delta_merge(triangles, t, 0, 1)
    with pytest.raises(LeafOperand):
        apply_merge(t, 0, 1)
    with pytest.raises(NotBrothers):
        delta_combine(triangles, t, 0, 3)
    with pytest.raises(NotBrothers):
        delta_merge(triangles, t, 6, 6)


@given(graphs(max_n=12), st.integers(0, 2**31), st.sampled_from([2, 3]))
def test_random_operator_sequences_match_recompute(g, seed, cap):
    rng = np.random.default_rng(seed)
    t = flat_tree(g)
    h = tree_entropy(g, t)
    for _ in range(8):
        op = random_operation(rng, t, cap)
        if op is None:
            break
        d = predicted(g, t, *op, cap)
        apply(t, *op, cap)
        h_new = tree_entropy(g, t)
        assert abs((h - h_new) - d) <= 1e-9
        assert t.cached_entropy() == pytest.approx(h_new, abs=1e-9)
        assert t.height <= cap
        h = h_new
    assert validate(g, t).valid
    assert validate_optimizer_caches(g, t) == []


# -- greedy loop -----------------------------------------------------------------

def test_two_triangles_recovered(triangles):
    for strategy in ("heap", "scan"):
        t = optimize(triangles, flat_tree(triangles), 2, strategy=strategy)
        assert sorted(t.partition()) == [[0, 1, 2], [3, 4, 5]]
        assert validate(triangles, t, height_cap=2).valid


def test_k4_never_worse_than_flat():
    g = complete_graph(4)
    t = optimize(g, flat_tree(g), 2)
    assert tree_entropy(g, t) <= 2.0 + 1e-12


def test_optimize_rejects_bad_input(triangles):
    with pytest.raises(InvalidInitialTree):
        optimize(triangles, flat_tree(triangles), 1)
    bad = flat_tree(triangles)
    bad.nodes[0].V = 99.0
    with pytest.raises(InvalidInitialTree):
        optimize(triangles, bad, 2)


def test_optimize_leaves_input_untouched(triangles):
    t0 = flat_tree(triangles)
    snapshot = t0.to_json_nodes()
    optimize(triangles, t0, 2)
    assert t0.to_json_nodes() == snapshot


@given(graphs(max_n=14), st.sampled_from([2, 3, 4]))
def test_trace_is_strictly_improving_and_consistent(g, cap):
    trace = []
    t0 = flat_tree(g)
    t = optimize(g, t0, cap, trace=trace, prune=False)
    h = tree_entropy(g, t0)
    replay = t0.copy()
    replay.graph = g
    for step in trace:
        assert step.delta_se > 1e-12
        assert step.height <= cap
        new = apply(replay, step.kind, step.beta1, step.beta2, cap)
        assert new == step.new_node
        h_new = tree_entropy(g, replay)
        assert abs((h - h_new) - step.delta_se) <= 1e-9
        h = h_new
    assert tree_entropy(g, t) == pytest.approx(h, abs=1e-9)
    assert t.height <= cap
    assert tree_entropy(g, t) <= one_dim_entropy(g) + 1e-9


@given(graphs(max_n=14), st.sampled_from([2, 3]))
def test_heap_and_scan_agree(g, cap):
    ta, tb = [], []
    a = optimize(g, flat_tree(g), cap, strategy="heap", trace=ta)
    b = optimize(g, flat_tree(g), cap, strategy="scan", trace=tb)
    assert [s.to_dict() for s in ta] == [s.to_dict() for s in tb]
    assert a.to_json_nodes() == b.to_json_nodes()


@given(graphs(max_n=12), st.sampled_from([0.01, 100.0]))
def test_operation_sequence_scale_invariant(g, c):
    ta, tb = [], []
    optimize(g, flat_tree(g), 2, trace=ta)
    optimize(g.scaled(c), flat_tree(g.scaled(c)), 2, trace=tb)
    assert [(s.kind, s.beta1, s.beta2) for s in ta] == [(s.kind, s.beta1, s.beta2) for s in tb]
    for x, y in zip(ta, tb):
        assert x.delta_se == pytest.approx(y.delta_se, abs=1e-9)


def test_pruned_output_has_no_pass_through(rng):
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(4, 15)))
        t = optimize(g, flat_tree(g), 3)
        assert all(len(t.children(a)) != 1 for a in t.internal_nodes())
        assert validate(g, t, height_cap=3).valid


def test_optimize_is_deterministic(rng):
    g = random_knn_graph(rng, 60)
    a = optimize(g, flat_tree(g), 2)
    b = optimize(g, flat_tree(g), 2)
    assert a.to_json_nodes() == b.to_json_nodes()
