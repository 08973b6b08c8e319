"""Stable graphs of fixed genus and marking set.

A stable graph is stored as three tuples:

* ``genera[v]``  -- genus of vertex ``v``
* ``legs[i]``    -- vertex carrying marking ``i + 1``
* ``edges[e]``   -- ``(a, b)``, the vertices of the two half-edges of ``e``

Half-edge ``(e, 0)`` sits at ``edges[e][0]`` and ``(e, 1)`` at ``edges[e][1]``.
The *local points* of a vertex are its legs (by increasing marking) followed by
its half-edges (by edge index, then side).  Classes living on the vertex moduli
space M_{g(v), n(v)} use this order for their markings.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Any, NamedTuple, Sequence

MAX_GENUS = 3

LocalPoint = tuple  # ("leg", marking_index) or ("half", edge, side)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class StableGraph:
    genera: tuple[int, ...]
    legs: tuple[int, ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "genera", tuple(int(x) for x in self.genera))
        object.__setattr__(self, "legs", tuple(int(x) for x in self.legs))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        self._check()

    def _check(self):
        nv = len(self.genera)
        if nv == 0:
            raise GraphError("graph without vertices")
        if any(x < 0 for x in self.genera):
            raise GraphError("negative vertex genus")
        for v in itertools.chain(self.legs, *self.edges):
            if not 0 <= v < nv:
                raise GraphError(f"vertex index {v} out of range")
        if not self.is_connected():
            raise GraphError("graph is not connected")
        for v in range(nv):
            if 2 * self.genera[v] - 2 + self.valence(v) <= 0:
                raise GraphError(f"vertex {v} is unstable")

    # -- basic invariants -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.legs)

    @property
    def num_vertices(self) -> int:
        return len(self.genera)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def h1(self) -> int:
        return self.num_edges - self.num_vertices + 1

    @property
    def genus(self) -> int:
        return sum(self.genera) + self.h1

    def valence(self, v: int) -> int:
        """n(v): legs plus half-edges at ``v`` (a self-loop counts twice)."""
        return self.legs.count(v) + sum((a == v) + (b == v) for a, b in self.edges)

    def markings_at(self, v: int) -> list[int]:
        return [i + 1 for i, x in enumerate(self.legs) if x == v]

    def local_points(self, v: int) -> list[LocalPoint]:
        pts: list[LocalPoint] = [("leg", i) for i in self.markings_at(v)]
        for e, ends in enumerate(self.edges):
            for s in (0, 1):
                if ends[s] == v:
                    pts.append(("half", e, s))
        return pts

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for a, b in self.edges:
                for x, y in ((a, b), (b, a)):
                    if x == v and y not in seen:
                        seen.add(y)
                        stack.append(y)
        return len(seen) == self.num_vertices

    def is_trivial(self) -> bool:
        return self.num_vertices == 1 and self.num_edges == 0

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "vertices": [{"genus": x} for x in self.genera],
            "legs": [{"marking": i + 1, "vertex": v} for i, v in enumerate(self.legs)],
            "edges": [[{"vertex": a}, {"vertex": b}] for a, b in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "StableGraph":
        genera = [v["genus"] for v in data["vertices"]]
        n = len(data["legs"])
        legs = [None] * n
        for leg in data["legs"]:
            i = leg["marking"]
            if not 1 <= i <= n or legs[i - 1] is not None:
                raise GraphError(f"bad marking index {i}")
            legs[i - 1] = leg["vertex"]
        edges = [(a["vertex"], b["vertex"]) for a, b in data["edges"]]
        return cls(tuple(genera), tuple(legs), tuple(edges))

    def __str__(self):
        parts = []
        for v, g in enumerate(self.genera):
            ms = ",".join(map(str, self.markings_at(v)))
            parts.append(f"v{v}(g{g}" + (f";{ms})" if ms else ")"))
        es = " ".join(f"{a}-{b}" for a, b in self.edges)
        return " ".join(parts) + (f" | {es}" if es else "")


def trivial_graph(g: int, n: int) -> StableGraph:
    return StableGraph((g,), (0,) * n, ())


# -- canonical forms --------------------------------------------------------


class Canonical(NamedTuple):
    key: tuple
    graph: StableGraph
    vattr: tuple
    legattr: tuple
    hattr: tuple
    automorphisms: int


def _vertex_invariant(graph, v, vattr, legattr, hattr):
    marks = tuple((i, legattr[i]) for i, x in enumerate(graph.legs) if x == v)
    hs = []
    loops = 0
    for e, (a, b) in enumerate(graph.edges):
        if a == v:
            hs.append(hattr[e][0])
        if b == v:
            hs.append(hattr[e][1])
        loops += a == b == v
    return (graph.genera[v], vattr[v], marks, graph.valence(v), loops, tuple(sorted(hs)))


def _key_for_order(graph, order, vattr, legattr, hattr):
    pos = [0] * len(order)
    for new, old in enumerate(order):
        pos[old] = new
    verts = tuple((graph.genera[old], vattr[old]) for old in order)
    legs = tuple((pos[v], legattr[i]) for i, v in enumerate(graph.legs))
    descs = []
    for e, (a, b) in enumerate(graph.edges):
        h0 = (pos[a], hattr[e][0])
        h1 = (pos[b], hattr[e][1])
        descs.append(((h0, h1) if h0 <= h1 else (h1, h0), e, h0 > h1))
    descs.sort(key=lambda t: t[0])
    key = (verts, legs, tuple(d for d, _, _ in descs))
    return key, pos, descs


def canonize(
    graph: StableGraph,
    vattr: Sequence | None = None,
    legattr: Sequence | None = None,
    hattr: Sequence | None = None,
) -> Canonical:
    """Canonical form of a graph carrying attributes on vertices, legs and half-edges.

    The key is the lexicographic minimum over vertex orderings that respect a
    relabeling-invariant vertex signature; edges are sorted inside the key, so
    edge order and half-edge orientation never matter.  Attributes must be
    mutually comparable within each slot.
    """
    nv = graph.num_vertices
    vattr = tuple(vattr) if vattr is not None else (0,) * nv
    legattr = tuple(legattr) if legattr is not None else (0,) * graph.n
    hattr = tuple(tuple(h) for h in hattr) if hattr is not None else ((0, 0),) * graph.num_edges
    inv = [_vertex_invariant(graph, v, vattr, legattr, hattr) for v in range(nv)]
    blocks: list[list[int]] = []
    for v in sorted(range(nv), key=lambda v: inv[v]):
        if blocks and inv[blocks[-1][0]] == inv[v]:
            blocks[-1].append(v)
        else:
            blocks.append([v])

    best = None
    count = 0
    for perms in itertools.product(*(itertools.permutations(b) for b in blocks)):
        order = [v for p in perms for v in p]
        key, pos, descs = _key_for_order(graph, order, vattr, legattr, hattr)
        if best is None or key < best[0]:
            best = (key, order, pos, descs)
            count = 1
        elif key == best[0]:
            count += 1

    key, order, pos, descs = best
    # edge-level symmetries: identical edge descriptors permute, symmetric edges flip
    edge_factor = 1
    for _, grp in itertools.groupby(d for d, _, _ in descs):
        edge_factor *= factorial(len(list(grp)))
    edge_factor *= 2 ** sum(1 for d, _, _ in descs if d[0] == d[1])

    new_genera = tuple(graph.genera[old] for old in order)
    new_vattr = tuple(vattr[old] for old in order)
    new_legs = tuple(pos[v] for v in graph.legs)
    new_edges = []
    new_hattr = []
    for _, e, flipped in descs:
        a, b = graph.edges[e]
        ha, hb = hattr[e]
        if flipped:
            a, b, ha, hb = b, a, hb, ha
        new_edges.append((pos[a], pos[b]))
        new_hattr.append((ha, hb))
    new_graph = StableGraph(new_genera, new_legs, tuple(new_edges))
    return Canonical(key, new_graph, new_vattr, legattr, tuple(new_hattr), count * edge_factor)


@lru_cache(maxsize=None)
def canonical_form(graph: StableGraph) -> tuple[tuple, StableGraph]:
    c = canonize(graph)
    return c.key, c.graph


def canonical_key(graph: StableGraph) -> tuple:
    return canonical_form(graph)[0]


@lru_cache(maxsize=None)
def automorphism_count(graph: StableGraph) -> int:
    """Order of Aut(graph): vertex, edge and half-edge permutations fixing every leg."""
    return canonize(graph).automorphisms


def relabel(graph: StableGraph, vertex_perm: Sequence[int], edge_perm: Sequence[int],
            flips: Sequence[bool]) -> StableGraph:
    """Isomorphic copy: old vertex v becomes vertex_perm[v], old edge e becomes edge_perm[e]."""
    edges = [None] * graph.num_edges
    for e, (a, b) in enumerate(graph.edges):
        if flips[e]:
            a, b = b, a
        edges[edge_perm[e]] = (vertex_perm[a], vertex_perm[b])
    genera = [None] * graph.num_vertices
    for v, g in enumerate(graph.genera):
        genera[vertex_perm[v]] = g
    return StableGraph(tuple(genera), tuple(vertex_perm[v] for v in graph.legs), tuple(edges))


# -- enumeration ------------------------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _connected(nv, edges):
    seen = {0}
    grew = True
    while grew:
        grew = False
        for a, b in edges:
            if (a in seen) != (b in seen):
                seen.update((a, b))
                grew = True
    return len(seen) == nv


@lru_cache(maxsize=None)
def _enumerate(g: int, n: int, max_edges: int) -> tuple[StableGraph, ...]:
    found: dict[tuple, StableGraph] = {}
    for nv in range(1, max_edges + 2):
        pairs = [(a, b) for a in range(nv) for b in range(a, nv)]
        for ne in range(nv - 1, max_edges + 1):
            h1 = ne - nv + 1
            if h1 > g:
                continue
            for edges in itertools.combinations_with_replacement(pairs, ne):
                if not _connected(nv, edges):
                    continue
                deg = [sum((a == v) + (b == v) for a, b in edges) for v in range(nv)]
                for genera in _compositions(g - h1, nv):
                    need = [max(0, 3 - 2 * genera[v] - deg[v]) for v in range(nv)]
                    if sum(need) > n:
                        continue
                    for legs in itertools.product(range(nv), repeat=n):
                        if any(legs.count(v) < need[v] for v in range(nv)):
                            continue
                        graph = StableGraph(genera, legs, edges)
                        key, canon = canonical_form(graph)
                        found.setdefault(key, canon)
    return tuple(found[k] for k in sorted(found))


def enumerate_stable_graphs(g: int, n: int, max_edges: int) -> list[StableGraph]:
    """One representative per isomorphism class with at most ``max_edges`` edges."""
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise GraphError(f"(g, n) = ({g}, {n}) is not stable")
    if g > MAX_GENUS:
        raise GraphError(f"genus {g} exceeds the configured cap {MAX_GENUS}")
    if max_edges < 0:
        raise GraphError("max_edges must be nonnegative")
    return list(_enumerate(g, n, max_edges))


# -- insertion --------------------------------------------------------------


class Splice(NamedTuple):
    graph: StableGraph
    outer_vertex: tuple  # old vertex of the outer graph -> new vertex (None for the replaced one)
    inner_vertex: tuple  # inner vertex -> new vertex
    inner_edge_offset: int
    point_leg: tuple  # local point index of the replaced vertex -> inner leg index (0-based)


def splice(graph: StableGraph, v: int, inner: StableGraph,
           boundary_match: Sequence[int] | None = None) -> Splice:
    """Replace vertex ``v`` by ``inner``; ``boundary_match[j]`` is the local point of ``v``
    glued to leg ``j + 1`` of ``inner``.  Outer edges keep their indices; inner edges follow."""
    pts = graph.local_points(v)
    if inner.genus != graph.genera[v] or inner.n != len(pts):
        raise GraphError(
            f"cannot insert a ({inner.genus},{inner.n}) graph at a ({graph.genera[v]},{len(pts)}) vertex")
    match = tuple(boundary_match) if boundary_match is not None else tuple(range(inner.n))
    if sorted(match) != list(range(inner.n)):
        raise GraphError("boundary_match is not a bijection")
    point_leg = [0] * inner.n
    for j, p in enumerate(match):
        point_leg[p] = j

    nv = graph.num_vertices
    outer = tuple(None if u == v else (u if u < v else u - 1) for u in range(nv))
    inner_map = tuple(nv - 1 + u for u in range(inner.num_vertices))
    index = {pt: i for i, pt in enumerate(pts)}

    def target(pt):
        return inner_map[inner.legs[point_leg[index[pt]]]]

    legs = []
    for i, u in enumerate(graph.legs):
        legs.append(target(("leg", i + 1)) if u == v else outer[u])
    edges = []
    for e, (a, b) in enumerate(graph.edges):
        a2 = target(("half", e, 0)) if a == v else outer[a]
        b2 = target(("half", e, 1)) if b == v else outer[b]
        edges.append((a2, b2))
    for a, b in inner.edges:
        edges.append((inner_map[a], inner_map[b]))
    genera = [graph.genera[u] for u in range(nv) if u != v] + list(inner.genera)
    new = StableGraph(tuple(genera), tuple(legs), tuple(edges))
    return Splice(new, outer, inner_map, graph.num_edges, tuple(point_leg))


def insert_graph_at_vertex(graph: StableGraph, v: int, inner: StableGraph,
                           boundary_match: Sequence[int] | None = None) -> StableGraph:
    return splice(graph, v, inner, boundary_match).graph
