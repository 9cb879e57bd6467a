"""Shared test fixtures and independent oracles.

The oracles here deliberately avoid the production code paths: matching is
solved by exhaustive subset search, composition by explicit 2-hop path
enumeration, and the buffer by a plain dict-and-list LRU.  Tests compare the
package's answers against these.
"""

from __future__ import annotations

import numpy as np

from hetgtools import (
    HetGraph,
    Metapath,
    Relation,
    SemanticGraph,
    VertexType,
)


def semantic_graph(n_src: int, n_dst: int, edges, src_name="U", dst_name="V",
                   label=None) -> SemanticGraph:
    """Semantic graph from an explicit edge list."""
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    return SemanticGraph.from_pairs(
        label or Metapath((src_name, dst_name)),
        VertexType(src_name, n_src), VertexType(dst_name, n_dst), src, dst)


def random_semantic_graph(rng: np.random.Generator, n_src: int, n_dst: int,
                          density: float, src_name="U", dst_name="V",
                          **kw) -> SemanticGraph:
    mask = rng.random((n_src, n_dst)) < density
    src, dst = np.nonzero(mask)
    return semantic_graph(n_src, n_dst, list(zip(src.tolist(), dst.tolist())),
                          src_name, dst_name, **kw)


def edge_set(sg: SemanticGraph) -> set[tuple[int, int]]:
    src, dst = sg.edge_pairs()
    return set(zip(src.tolist(), dst.tolist()))


def tiny_hetgraph(relations: dict[str, tuple[str, str]],
                  counts: dict[str, int],
                  edges: dict[str, list[tuple[int, int]]] | None = None) -> HetGraph:
    """Heterogeneous graph from short-hand dicts; omitted relations are empty."""
    edges = edges or {}
    vts = [VertexType(n, c) for n, c in counts.items()]
    rels = [Relation(name, s, d) for name, (s, d) in relations.items()]
    arrays = {}
    for name in relations:
        pairs = edges.get(name, [])
        arrays[name] = ([p[0] for p in pairs], [p[1] for p in pairs])
    return HetGraph.from_edge_arrays(vts, rels, arrays)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def brute_force_matching_size(edges, n_src: int) -> int:
    """Exhaustive maximum matching size via memoized subset search."""
    adj = [0] * n_src
    for u, v in edges:
        adj[u] |= 1 << v
    memo: dict[tuple[int, int], int] = {}

    def best(u: int, used: int) -> int:
        if u == n_src:
            return 0
        key = (u, used)
        cached = memo.get(key)
        if cached is not None:
            return cached
        result = best(u + 1, used)
        free = adj[u] & ~used
        while free:
            bit = free & -free
            result = max(result, 1 + best(u + 1, used | bit))
            free ^= bit
        memo[key] = result
        return result

    return best(0, 0)


def brute_force_compose(g1: SemanticGraph, g2: SemanticGraph):
    """2-hop path enumeration: result edge set and the probe count."""
    out: set[tuple[int, int]] = set()
    probes = 0
    right = {v: g2.forward.row(v).tolist() for v in range(g2.src_type.count)}
    src, dst = g1.edge_pairs()
    for u, v in zip(src.tolist(), dst.tolist()):
        for w in right[v]:
            probes += 1
            out.add((u, w))
    return out, probes


class ReferenceLru:
    """Plain-dict LRU used as the simulator oracle."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.order: list[int] = []  # least-recent first
        self.loaded: set[int] = set()
        self.hits = 0
        self.cold = 0
        self.dram = 0
        self.total = 0
        self.evictions: dict[int, int] = {}
        self.dram_per_vertex: dict[int, int] = {}

    def access(self, key: int) -> None:
        self.total += 1
        if key in self.order:
            self.hits += 1
            self.order.remove(key)
            self.order.append(key)
            return
        self.dram += 1
        self.dram_per_vertex[key] = self.dram_per_vertex.get(key, 0) + 1
        if key not in self.loaded:
            self.loaded.add(key)
            self.cold += 1
        if len(self.order) >= self.capacity:
            victim = self.order.pop(0)
            self.evictions[victim] = self.evictions.get(victim, 0) + 1
        self.order.append(key)

    @property
    def replacements(self) -> int:
        return sum(self.evictions.values())


def replay_reference(units, capacity: int) -> ReferenceLru:
    """Replay TraceUnits through the reference LRU (dst-major, ascending)."""
    lru = ReferenceLru(capacity)
    for unit in units:
        rev = unit.graph.reverse
        for v in range(rev.n_rows):
            for s in rev.row(v).tolist():
                lru.access(int(s) if unit.src_map is None else int(unit.src_map[s]))
    return lru


def two_community_fixture(stars: int = 8, leaves: int = 8):
    """Two interleaved communities with opposite star orientations.

    Community A is ``stars`` source-centered stars (one source, one matched
    hub destination, ``leaves`` leaf destinations); community B mirrors it
    with destination-centered stars.  Source and destination ids interleave
    the communities, so ascending-destination order keeps flushing community
    A's sources while B's one-shot sources stream through.  With capacity =
    ``stars`` (community A's source count) the restructured schedule isolates
    the phases and avoids nearly all refetches.
    """
    a_sources = stars
    b_sources = stars * (leaves + 1)
    n_src = a_sources + b_sources
    # interleave: A source i sits at id i*(leaves+2); B sources fill the rest
    src_slots = list(range(n_src))
    a_src = [i * (leaves + 2) for i in range(stars)]
    b_src = [s for s in src_slots if s not in set(a_src)]
    # destinations: round 0 holds the A hubs, rounds 1..leaves the A leaves,
    # with one B star destination spliced in after every round
    a_dst_rounds = [[None] * stars for _ in range(leaves + 1)]
    b_dst = []
    cursor = 0
    for r in range(leaves + 1):
        for i in range(stars):
            a_dst_rounds[r][i] = cursor
            cursor += 1
        if len(b_dst) < stars:
            b_dst.append(cursor)
            cursor += 1
    while len(b_dst) < stars:  # spare B stars trail the last round
        b_dst.append(cursor)
        cursor += 1
    n_dst = cursor
    edges = []
    for i in range(stars):
        for r in range(leaves + 1):
            edges.append((a_src[i], a_dst_rounds[r][i]))
    for j in range(stars):
        for k in range(leaves + 1):
            edges.append((b_src[j * (leaves + 1) + k], b_dst[j]))
    return semantic_graph(n_src, n_dst, edges), stars
