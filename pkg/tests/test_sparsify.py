import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import complete_from_matrix, complete_graph, dense_knn, random_complete, reference_selection
from sird.errors import EmptyGraph, KOutOfRange, TooFewVertices
from sird.graph import build_graph, one_dim_entropy
from sird.sparsify import (
    SparsificationReport,
    correct_weights,
    knn_graph,
    local_minima,
    select_k_star,
)


# -- correction --------------------------------------------------------------

@pytest.mark.parametrize("n, w", [(3, 1.0), (5, 0.4), (8, 2.0)])
def test_correction_of_equal_weights(n, w):
    g, delta = correct_weights(complete_graph(n, w))
    assert delta == pytest.approx(w / (2 * n), rel=1e-15)
    for *_, x in g.edges():
        assert x == pytest.approx(w * (1 + 1 / (2 * n)), rel=1e-15)


def test_correction_with_one_zero_edge():
    edges = [(u, v, 0.8) for u, v in itertools.combinations(range(4), 2)]
    edges[-1] = (2, 3, 0.0)
    g, delta = correct_weights(build_graph(4, edges))
    assert delta == pytest.approx(1 / 12, rel=1e-14)
    assert g.weight(2, 3) == pytest.approx(1 / 12, rel=1e-14)
    assert g.weight(0, 1) == pytest.approx(0.8 + 1 / 12, rel=1e-14)


def test_correction_single_edge():
    g, delta = correct_weights(build_graph(2, [(0, 1, 0.6)]))
    assert delta == pytest.approx(0.15)
    assert g.weight(0, 1) == pytest.approx(0.75)


def test_correction_rejects_edgeless_graph():
    with pytest.raises(EmptyGraph):
        correct_weights(build_graph(3, []))


# -- k-NN ------------------------------------------------------------------------

def test_full_k_is_identity():
    g = random_complete(0, 6)
    assert knn_graph(g, 5) == g


def test_triangle_top1_union():
    g = build_graph(3, [(0, 1, 0.9), (0, 2, 0.1), (1, 2, 0.5)])
    kept = {(u, v): w for u, v, w in knn_graph(g, 1).edges()}
    assert kept == {(0, 1): 0.9, (1, 2): 0.5}


def test_equal_weights_k1_leaves_nobody_isolated():
    g = knn_graph(complete_graph(7), 1)
    assert all(g.degree(v) > 0 for v in range(7))


def test_k_out_of_range():
    g = complete_graph(4)
    for k in (0, 4):
        with pytest.raises(KOutOfRange):
            knn_graph(g, k)


@given(st.integers(3, 12), st.integers(0, 2**31), st.booleans())
def test_knn_nesting_and_reference(n, seed, ties):
    g = random_complete(seed, n)
    if ties:
        g = g.with_weights({(u, v): round(w, 1) + 0.05 for u, v, w in g.edges()})
    adj = g.adjacency_matrix()
    prev = set()
    for k in range(1, n):
        gk = knn_graph(g, k)
        edges = {(u, v) for u, v, _ in gk.edges()}
        assert prev <= edges
        assert all(gk.degree(v) > 0 for v in range(n))
        assert np.array_equal(gk.adjacency_matrix(), dense_knn(adj, k))
        prev = edges


# -- selection ---------------------------------------------------------------------

def test_local_minima_interior_only():
    hs = {1: 0.5, 2: 1.0, 3: 0.8, 4: 0.9, 5: 0.7}
    assert local_minima(hs) == [3]


def test_two_triangles_with_weak_cross_edges():
    adj = np.full((6, 6), 0.05)
    adj[:3, :3] = adj[3:, 3:] = 1.0
    np.fill_diagonal(adj, 0)
    g = complete_from_matrix(adj)
    rep, gs = select_k_star(g)
    # G_2 is two disjoint triangles: all degrees equal, so H1 peaks at log2(6)
    assert rep.entropies[2] == pytest.approx(np.log2(6), abs=1e-12)
    expected_k, hs = reference_selection(adj)
    assert rep.k_star == expected_k == 3
    assert not rep.fallback
    for u, v in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]:
        assert gs.has_edge(u, v)


def test_monotone_decreasing_entropy_falls_back_to_last_k():
    rep = SparsificationReport.from_dict({
        "n": 5, "k_star": 4, "delta": 0.0, "mean_weight": 1.0, "lmse_ks": [], "fallback": True,
        "entropies": {"1": 2.0, "2": 1.9, "3": 1.8, "4": 1.7},
    })
    assert local_minima(rep.entropies) == []
    assert min(rep.entropies, key=lambda k: (rep.entropies[k], k)) == 4


def test_three_equal_vertices_fall_back_to_k1():
    rep, g = select_k_star(complete_graph(3, 0.5))
    assert rep.fallback and rep.lmse_ks == [] and rep.k_star == 1
    assert g.volume > 0


def test_too_few_vertices():
    with pytest.raises(TooFewVertices):
        select_k_star(complete_graph(2))


@given(st.integers(3, 14), st.integers(0, 2**31))
def test_selection_matches_reference(n, seed):
    g = random_complete(seed, n)
    rep, gs = select_k_star(g)
    expected_k, hs = reference_selection(g.adjacency_matrix())
    assert rep.k_star == expected_k
    assert sorted(rep.entropies) == list(range(1, n))
    for k, h in hs.items():
        assert rep.entropies[k] == pytest.approx(h, abs=1e-9)
    if rep.lmse_ks:
        assert rep.k_star == min(rep.lmse_ks) and not rep.fallback
    assert gs.volume > 0
    assert one_dim_entropy(gs) == pytest.approx(rep.entropies[rep.k_star], abs=1e-12)


def test_report_json_round_trip(tmp_path):
    rep, _ = select_k_star(random_complete(4, 9))
    rep.write_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert set(data) >= {"k_star", "delta", "entropies", "lmse_ks"}
    back = SparsificationReport.from_dict(data)
    assert back.entropies == rep.entropies and back.k_star == rep.k_star
