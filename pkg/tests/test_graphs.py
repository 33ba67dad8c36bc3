import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynperc import graphs


def brute_force_torus_edges(n, d):
    """Independent lattice-with-wraparound enumeration."""
    verts = list(itertools.product(range(n), repeat=d))
    edges = set()
    for v in verts:
        for axis in range(d):
            w = list(v)
            w[axis] = (w[axis] + 1) % n
            w = tuple(w)
            if w != v:
                edges.add(frozenset((v, w)))
    return edges


def test_torus_3_1_is_triangle():
    g = graphs.build_torus(3, 1)
    assert g.n == 3 and g.n_edges == 3


def test_torus_4_1_is_c4():
    g = graphs.build_torus(4, 1)
    assert g.n == 4 and all(d == 2 for d in g.degrees)


def test_torus_3_2_counts_match_bruteforce():
    g = graphs.build_torus(3, 2)
    oracle = brute_force_torus_edges(3, 2)
    assert g.n == 9
    assert g.n_edges == len(oracle) == 18
    assert set(g.degrees) == {4}


def test_torus_n2_collapses_to_hypercube():
    for d in (1, 2, 3):
        t = graphs.build_torus(2, d)
        h = graphs.build_hypercube(d)
        assert t.n == h.n and t.n_edges == h.n_edges
        assert sorted(t.edges) == sorted(h.edges)


def test_torus_isomorphic_to_cycle():
    # canonical relabeling: walk around the cycle from 0, compare edge sets
    for n in (3, 5, 8):
        g = graphs.build_torus(n, 1)
        assert set(g.degrees) == {2}
        order = [0]
        prev = None
        while len(order) < n:
            nxt = [w for w, _ in g.adjacency[order[-1]] if w != prev]
            prev = order[-1]
            order.append(nxt[0])
        relabel = {v: i for i, v in enumerate(order)}
        edges = {frozenset((relabel[u], relabel[v])) for u, v in g.edges}
        expect = {frozenset((i, (i + 1) % n)) for i in range(n)}
        assert edges == expect


def test_hypercube_k2_and_counts():
    assert graphs.build_hypercube(1).n_edges == 1
    g = graphs.build_hypercube(3)
    assert g.n == 8 and g.n_edges == 12 and set(g.degrees) == {3}


def test_hypercube_4_bipartite_diameter():
    g = graphs.build_hypercube(4)
    dist = graphs.bfs_distances(g, 0)
    # bipartite: parity of the BFS distance matches popcount parity
    for v in range(g.n):
        assert dist[v] % 2 == bin(v).count("1") % 2
    assert graphs.diameter(g) == 4


def test_build_from_edges_examples():
    p3 = graphs.build_from_edges(3, [(0, 1), (1, 2)])
    assert p3.degrees == (1, 2, 1)
    star = graphs.build_from_edges(4, [(0, 1), (0, 2), (0, 3)])
    assert star.degrees == (3, 1, 1, 1)
    assert star.edges[0] == (0, 1)  # input order preserved


def test_build_from_edges_errors():
    with pytest.raises(graphs.LoopEdge):
        graphs.build_from_edges(2, [(0, 0)])
    with pytest.raises(graphs.DuplicateEdge):
        graphs.build_from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(graphs.Disconnected):
        graphs.build_from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(graphs.OutOfRange):
        graphs.build_from_edges(2, [(0, 5)])


def test_stationary_examples(k2, p3, star3):
    np.testing.assert_allclose(graphs.stationary_distribution(k2), [0.5, 0.5])
    np.testing.assert_allclose(graphs.stationary_distribution(p3), [0.25, 0.5, 0.25])
    np.testing.assert_allclose(graphs.stationary_distribution(star3),
                               [0.5, 1 / 6, 1 / 6, 1 / 6])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.randoms(use_true_random=False))
def test_degree_sum_and_stationarity(n, rnd):
    # random connected graph: spanning path plus extra random edges
    pairs = [(i, i + 1) for i in range(n - 1)]
    extra = [(i, j) for i in range(n) for j in range(i + 1, n) if j > i + 1]
    rnd.shuffle(extra)
    pairs += extra[: rnd.randint(0, len(extra))]
    g = graphs.build_from_edges(n, pairs)
    assert sum(g.degrees) == 2 * g.n_edges
    pi = graphs.stationary_distribution(g)
    assert abs(pi.sum() - 1.0) < 1e-12
    # pi is invariant for the SRW transition matrix
    from dynperc.chains import srw_chain

    P = srw_chain(g).matrix
    assert np.abs(pi @ P - pi).max() < 1e-12


def test_torus_edge_ids_lexicographic():
    g = graphs.build_torus(3, 2)
    assert list(g.edges) == sorted(g.edges)


def test_vertex_transitivity_flags(c4, p3, star3):
    assert c4.transitive
    assert graphs.is_vertex_transitive(c4)
    assert not graphs.is_vertex_transitive(p3)
    assert not graphs.is_vertex_transitive(star3)
    # heuristic path: an uncertified cycle is still detected
    ring = graphs.build_from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert not ring.transitive and graphs.is_vertex_transitive(ring)


def test_read_edge_list_roundtrip():
    text = "3 2\n0 1\n1 2\n"
    g = graphs.read_edge_list(text)
    assert g.n == 3 and g.n_edges == 2
    with pytest.raises(graphs.GraphError):
        graphs.read_edge_list("3 5\n0 1\n")
    with pytest.raises(graphs.GraphError):
        graphs.read_edge_list("nonsense here\n")
