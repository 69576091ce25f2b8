"""Trivalent pants graphs: combinatorics of a pants decomposition.

Vertices are pairs of pants, each with three slots ``(pants, slot)``.
A slot is either glued to another slot (an internal edge, i.e. a pants
curve) or is a cusp.  Loops and multi-edges are allowed.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

from . import lattice
from .words import Word, concat, exponent_vector, free_reduce, gen, inverse, substitute

Slot = tuple[int, int]
Gluing = tuple[Slot, Slot]


class InvalidGraphError(ValueError):
    pass


@dataclass(frozen=True)
class PantsGraph:
    n_pants: int
    gluings: tuple[Gluing, ...]
    cusps: tuple[Slot, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "gluings", tuple((tuple(a), tuple(b)) for a, b in self.gluings)
        )
        object.__setattr__(self, "cusps", tuple(tuple(c) for c in self.cusps))
        seen: dict[Slot, str] = {}
        used = [s for g in self.gluings for s in g] + list(self.cusps)
        for s in used:
            p, k = s
            if not (0 <= p < self.n_pants and 0 <= k < 3):
                raise InvalidGraphError(f"slot {s} out of range")
            if s in seen:
                raise InvalidGraphError(f"slot {s} used twice")
            seen[s] = "x"
        if len(seen) != 3 * self.n_pants:
            missing = sorted(
                {(p, k) for p in range(self.n_pants) for k in range(3)} - set(seen)
            )
            raise InvalidGraphError(f"slots neither glued nor cusped: {missing}")
        twice_g = self.n_pants - len(self.cusps) + 2
        if twice_g < 0 or twice_g % 2:
            raise InvalidGraphError(
                f"V={self.n_pants}, n={len(self.cusps)} gives non-integral genus"
            )

    @property
    def n_edges(self) -> int:
        return len(self.gluings)

    @property
    def n_cusps(self) -> int:
        return len(self.cusps)

    def endpoints(self, e: int) -> tuple[int, int]:
        (p, _), (q, _) = self.gluings[e]
        return p, q

    def slot_map(self) -> dict[Slot, tuple[int, Slot]]:
        """slot -> (edge id, partner slot) for glued slots."""
        out = {}
        for e, (a, b) in enumerate(self.gluings):
            out[a] = (e, b)
            out[b] = (e, a)
        return out

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per vertex, sorted list of (neighbour, edge id)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_pants)]
        for e, ((p, _), (q, _)) in enumerate(self.gluings):
            adj[p].append((q, e))
            if p != q:
                adj[q].append((p, e))
        for row in adj:
            row.sort()
        return adj

    def is_connected(self, skip_edge: int | None = None) -> bool:
        if self.n_pants == 0:
            return True
        adj = self.adjacency()
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, e in adj[u]:
                if e != skip_edge and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n_pants


def signature(graph: PantsGraph) -> tuple[int, int]:
    if not graph.is_connected():
        raise InvalidGraphError("disconnected pants graph has no signature")
    n = graph.n_cusps
    return (graph.n_pants - n + 2) // 2, n


def girth(graph: PantsGraph) -> float:
    """Length of the shortest cycle; loops count 1 and double edges 2.

    Returns ``math.inf`` for an acyclic graph.
    """
    best = math.inf
    for e, ((p, _), (q, _)) in enumerate(graph.gluings):
        if p == q:
            return 1
    adj = graph.adjacency()
    for root in range(graph.n_pants):
        dist = {root: 0}
        parent_edge = {root: None}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for v, e in adj[u]:
                if e == parent_edge[u]:
                    continue
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent_edge[v] = e
                    queue.append(v)
                else:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


def bridges(graph: PantsGraph) -> set[int]:
    """Edges whose removal disconnects the graph (brute force)."""
    return {
        e
        for e, ((p, _), (q, _)) in enumerate(graph.gluings)
        if p != q and not graph.is_connected(skip_edge=e)
    }


def tripod_replace(graph: PantsGraph, e: int) -> PantsGraph:
    """Replace edge ``e`` by a new trivalent vertex whose third slot is a cusp."""
    a, b = graph.gluings[e]
    if a[0] == b[0]:
        raise InvalidGraphError("tripod replacement is only defined on non-loop edges")
    w = graph.n_pants
    gluings = list(graph.gluings)
    gluings[e] = (a, (w, 0))
    gluings.append((b, (w, 1)))
    return PantsGraph(w + 1, tuple(gluings), graph.cusps + ((w, 2),))


def cap_cusp(graph: PantsGraph, cusp: Slot) -> PantsGraph:
    """Glue a pants with two cusps onto a cusp slot."""
    if cusp not in graph.cusps:
        raise InvalidGraphError(f"{cusp} is not a cusp slot")
    w = graph.n_pants
    cusps = tuple(c for c in graph.cusps if c != cusp) + ((w, 1), (w, 2))
    return PantsGraph(w + 1, graph.gluings + ((cusp, (w, 0)),), cusps)


def k33() -> PantsGraph:
    """K_{3,3} with parts {0,1,2} and {3,4,5}; edge (i, j) uses slot j-3 at i
    and slot i at j.  Edges are listed lexicographically."""
    gl = [((i, j - 3), (j, i)) for i in range(3) for j in range(3, 6)]
    return PantsGraph(6, tuple(gl))


def modified_k33() -> PantsGraph:
    """K_{3,3} with its first edge replaced by a tripod whose free slot is
    capped by a twice-cusped pants.  All edges of K_{3,3} are equivalent
    under its automorphism group, so the first edge is taken.

    The capping edge (the last gluing) is the separating curve."""
    g = tripod_replace(k33(), 0)
    return cap_cusp(g, g.cusps[-1])


def theta() -> PantsGraph:
    return PantsGraph(2, (((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))))


def random_pants_graph(rng: random.Random, n_pants: int, n_cusps: int,
                       max_tries: int = 1000) -> PantsGraph:
    """Pairing-model sample, rejecting disconnected configurations."""
    slots = [(p, k) for p in range(n_pants) for k in range(3)]
    if (len(slots) - n_cusps) % 2 or n_cusps > len(slots):
        raise InvalidGraphError("slot count does not admit a pairing")
    for _ in range(max_tries):
        perm = slots[:]
        rng.shuffle(perm)
        cusps = tuple(sorted(perm[:n_cusps]))
        rest = perm[n_cusps:]
        gl = tuple(tuple(sorted((rest[i], rest[i + 1]))) for i in range(0, len(rest), 2))
        graph = PantsGraph(n_pants, tuple(sorted(gl)), cusps)
        if graph.is_connected():
            return graph
    raise InvalidGraphError("could not sample a connected graph")


def random_signature_graph(rng: random.Random, g: int, n: int) -> PantsGraph:
    return random_pants_graph(rng, 2 * g - 2 + n, n)


# Fundamental group presentation

@dataclass
class HomologyBasisData:
    """Combinatorial presentation of the fundamental group and its homology.

    Generators are the boundary loops of leaf slots (cusps and one side of
    each non-tree edge) plus one stable letter per non-tree edge.  One side
    of each non-tree edge is eliminated through its stable-letter relation,
    and one cusp (if any) through the product relation, which leaves a free
    basis when the surface has cusps.
    """

    spanning_tree: list[int]
    non_tree_edges: list[int]
    generators: list[tuple[str, object]]
    slot_words: dict[Slot, Word]
    edge_words: dict[int, Word]
    cusp_words: dict[Slot, Word]
    relator: Word | None
    cusp_class_vectors: list[list[int]]
    rank: int
    tree_parent: dict[int, tuple[int, int, int]] = field(default_factory=dict)
    bfs_order: list[int] = field(default_factory=list)

    @property
    def n_generators(self) -> int:
        return len(self.generators)


def spanning_tree(graph: PantsGraph) -> tuple[list[int], dict[int, tuple[int, int, int]], list[int]]:
    """Lowest-id-first BFS tree from pants 0.

    Returns (tree edges, parent map child -> (parent, parent slot, edge), BFS order).
    """
    adj = graph.adjacency()
    parent: dict[int, tuple[int, int, int]] = {}
    order = [0]
    seen = {0}
    queue = deque([0])
    tree: list[int] = []
    while queue:
        u = queue.popleft()
        for v, e in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            a, b = graph.gluings[e]
            pslot = a[1] if a[0] == u else b[1]
            parent[v] = (u, pslot, e)
            tree.append(e)
            order.append(v)
            queue.append(v)
    if len(seen) != graph.n_pants:
        raise InvalidGraphError("pants graph is disconnected")
    return sorted(tree), parent, order


def homology_basis(graph: PantsGraph) -> HomologyBasisData:
    if graph.n_pants == 0:
        raise InvalidGraphError("empty pants graph")
    tree, parent, order = spanning_tree(graph)
    tree_set = set(tree)
    non_tree = [e for e in range(graph.n_edges) if e not in tree_set]

    up_slot: dict[int, int] = {}
    children: dict[Slot, int] = {}
    for v, (u, pslot, e) in parent.items():
        a, b = graph.gluings[e]
        up_slot[v] = b[1] if (a[0], a[1]) == (u, pslot) else a[1]
        children[(u, pslot)] = v

    tree_slots = {s for e in tree for s in graph.gluings[e]}
    leaves = sorted(
        (p, k) for p in range(graph.n_pants) for k in range(3) if (p, k) not in tree_slots
    )
    leaf_index = {s: i for i, s in enumerate(leaves)}
    stable_index = {e: len(leaves) + i for i, e in enumerate(non_tree)}
    n_raw = len(leaves) + len(non_tree)

    slot_words: dict[Slot, Word] = {}

    def down_word(p: int, k: int) -> Word:
        # word for C_k of pants p when slot k is a leaf or leads to a child
        if (p, k) in leaf_index:
            return gen(leaf_index[(p, k)])
        q = children[(p, k)]
        u = up_slot[q]
        return concat(down_word(q, (u + 1) % 3), down_word(q, (u + 2) % 3))

    for p in reversed(order):
        for k in range(3):
            if p in up_slot and k == up_slot[p]:
                continue
            slot_words[(p, k)] = down_word(p, k)
    for p in order:
        if p in up_slot:
            u, pslot, _ = parent[p]
            slot_words[(p, up_slot[p])] = inverse(slot_words[(u, pslot)])
    relator = concat(*(slot_words[(0, k)] for k in range(3)))

    # C_i^P = t_e (C_j^Q)^-1 t_e^-1 for a non-tree edge e = ((P,i),(Q,j)).
    images: dict[int, Word] = {}
    for e in non_tree:
        a, b = graph.gluings[e]
        t = gen(stable_index[e])
        images[leaf_index[a]] = concat(t, gen(leaf_index[b], -1), inverse(t))

    def apply(w: Word) -> Word:
        return substitute(w, images)

    slot_words = {s: apply(w) for s, w in slot_words.items()}
    relator = apply(relator)

    eliminated = set(images)
    if graph.cusps:
        c = leaf_index[min(graph.cusps)]
        pos = [i for i, x in enumerate(relator) if x >> 1 == c]
        assert len(pos) == 1 and relator[pos[0]] == 2 * c
        i = pos[0]
        solved = free_reduce(inverse(relator[:i]) + inverse(relator[i + 1:]))
        slot_words = {s: substitute(w, {c: solved}) for s, w in slot_words.items()}
        eliminated.add(c)
        relator_out = None
    else:
        relator_out = relator

    kept = [i for i in range(n_raw) if i not in eliminated]
    renum = {old: new for new, old in enumerate(kept)}

    def renumber(w: Word) -> Word:
        return tuple(2 * renum[x >> 1] + (x & 1) for x in w)

    slot_words = {s: renumber(w) for s, w in slot_words.items()}
    if relator_out is not None:
        relator_out = renumber(relator_out)

    generators: list[tuple[str, object]] = []
    inv_leaf = {i: s for s, i in leaf_index.items()}
    inv_stable = {i: e for e, i in stable_index.items()}
    for old in kept:
        if old in inv_leaf:
            generators.append(("boundary", inv_leaf[old]))
        else:
            generators.append(("stable", inv_stable[old]))

    edge_words = {e: slot_words[graph.gluings[e][0]] for e in range(graph.n_edges)}
    cusp_words = {c: slot_words[c] for c in graph.cusps}
    r = len(generators)
    cusp_vectors = [exponent_vector(w, r) for w in cusp_words.values()]
    basis = lattice.row_hnf(cusp_vectors, r)
    rank = r - len(basis) if graph.cusps else r
    return HomologyBasisData(
        spanning_tree=tree,
        non_tree_edges=non_tree,
        generators=generators,
        slot_words=slot_words,
        edge_words=edge_words,
        cusp_words=cusp_words,
        relator=relator_out,
        cusp_class_vectors=cusp_vectors,
        rank=rank,
        tree_parent=parent,
        bfs_order=order,
    )
