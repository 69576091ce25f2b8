import math
import random

import pytest

from systolic import lattice
from systolic.pantsgraph import (
    InvalidGraphError,
    PantsGraph,
    bridges,
    cap_cusp,
    girth,
    homology_basis,
    k33,
    modified_k33,
    random_pants_graph,
    random_signature_graph,
    signature,
    theta,
    tripod_replace,
)
from systolic.words import exponent_vector


def k4() -> PantsGraph:
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    used = [0] * 4
    gl = []
    for p, q in pairs:
        gl.append(((p, used[p]), (q, used[q])))
        used[p] += 1
        used[q] += 1
    return PantsGraph(4, tuple(gl))


def brute_girth(graph: PantsGraph) -> float:
    # shortest closed trail without immediate edge reversal, by exhaustive DFS
    adj = graph.adjacency()
    best = math.inf

    def walk(start, u, used, depth):
        nonlocal best
        if depth >= best:
            return
        for v, e in adj[u]:
            if e in used:
                continue
            if v == start:
                best = min(best, depth + 1)
            else:
                walk(start, v, used | {e}, depth + 1)

    for s in range(graph.n_pants):
        walk(s, s, frozenset(), 0)
    return best


def edge_trivial(graph: PantsGraph, e: int) -> bool:
    data = homology_basis(graph)
    r = data.n_generators
    v = exponent_vector(data.edge_words[e], r)
    return lattice.in_lattice(v, lattice.row_hnf(data.cusp_class_vectors, r))


def test_girth_examples():
    assert girth(k33()) == 4
    assert girth(k4()) == 3
    assert girth(theta()) == 2
    assert girth(PantsGraph(1, (((0, 0), (0, 1)),), ((0, 2),))) == 1
    assert girth(PantsGraph(1, (), ((0, 0), (0, 1), (0, 2)))) == math.inf


def test_girth_matches_brute_force():
    rng = random.Random(3)
    for _ in range(60):
        v = rng.randrange(2, 9)
        n = rng.randrange(0, v + 1)
        if (3 * v - n) % 2:
            n += 1
        g = random_pants_graph(rng, v, n)
        assert girth(g) == brute_girth(g)


def test_k33_structure():
    g = k33()
    assert (g.n_pants, g.n_edges, g.n_cusps) == (6, 9, 0)
    assert signature(g) == (4, 0)
    assert not bridges(g)


@pytest.mark.parametrize("e", range(9))
def test_tripod_on_k33(e):
    g = tripod_replace(k33(), e)
    assert (g.n_pants, g.n_edges, g.n_cusps) == (7, 10, 1)
    assert girth(g) == 4


def test_modified_k33():
    g = modified_k33()
    assert g.n_pants == 8
    assert signature(g) == (4, 2)
    assert bridges(g) == {g.n_edges - 1}
    assert edge_trivial(g, g.n_edges - 1)
    assert all(not edge_trivial(g, e) for e in range(g.n_edges - 1))


def test_tripod_rejects_loop():
    g = PantsGraph(1, (((0, 0), (0, 1)),), ((0, 2),))
    with pytest.raises(InvalidGraphError):
        tripod_replace(g, 0)


def test_cap_cusp_requires_cusp():
    with pytest.raises(InvalidGraphError):
        cap_cusp(k33(), (0, 0))


def test_signature_examples():
    assert signature(theta()) == (2, 0)
    assert signature(PantsGraph(1, (((0, 0), (0, 1)),), ((0, 2),))) == (1, 1)
    assert signature(PantsGraph(1, (), ((0, 0), (0, 1), (0, 2)))) == (0, 3)


def test_invalid_graphs():
    with pytest.raises(InvalidGraphError):
        PantsGraph(1, (((0, 0), (0, 1)),), ())
    with pytest.raises(InvalidGraphError):
        PantsGraph(1, (((0, 0), (0, 0)),), ((0, 2),))
    with pytest.raises(InvalidGraphError):
        PantsGraph(1, (((0, 0), (0, 3)),), ((0, 1),))
    with pytest.raises(InvalidGraphError):
        PantsGraph(2, (), tuple((p, k) for p in range(2) for k in range(3)))
    disconnected = PantsGraph(2, (((0, 0), (0, 1)), ((1, 0), (1, 1))), ((0, 2), (1, 2)))
    with pytest.raises(InvalidGraphError):
        signature(disconnected)
    with pytest.raises(InvalidGraphError):
        homology_basis(disconnected)


def test_homology_ranks():
    tree = PantsGraph(2, (((0, 0), (1, 0)),), ((0, 1), (0, 2), (1, 1), (1, 2)))
    assert homology_basis(tree).rank == 0
    th = homology_basis(theta())
    assert len(th.non_tree_edges) == 2
    assert th.rank == 4
    assert homology_basis(k33()).rank == 8


def test_spanning_tree_is_deterministic():
    g = random_signature_graph(random.Random(5), 3, 2)
    a, b = homology_basis(g), homology_basis(g)
    assert a.spanning_tree == b.spanning_tree
    assert a.edge_words == b.edge_words


def random_graphs(seed: int, count: int):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        v = rng.randrange(2, 13)
        n = rng.randrange(0, v + 1)
        if (3 * v - n) % 2:
            continue
        out.append(random_pants_graph(rng, v, n))
    return rng, out


def test_euler_and_rank_on_random_graphs():
    _, graphs = random_graphs(11, 200)
    for g in graphs:
        assert 3 * g.n_pants == 2 * g.n_edges + g.n_cusps
        data = homology_basis(g)
        assert len(data.non_tree_edges) == g.n_edges - (g.n_pants - 1)
        assert data.rank == 2 * signature(g)[0]


def test_tripod_never_decreases_girth():
    rng, graphs = random_graphs(12, 200)
    for g in graphs:
        edges = [e for e in range(g.n_edges) if len(set(g.endpoints(e))) == 2]
        if not edges:
            continue
        e = rng.choice(edges)
        h = tripod_replace(g, e)
        assert girth(h) >= girth(g)
        assert 3 * h.n_pants == 2 * h.n_edges + h.n_cusps


def test_bridge_iff_trivial_on_random_graphs():
    _, graphs = random_graphs(13, 200)
    for g in graphs:
        br = bridges(g)
        for e in range(g.n_edges):
            assert (e in br) == edge_trivial(g, e)
