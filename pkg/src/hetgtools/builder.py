"""Metapath composition engine with trie-guided reuse.

Composing a metapath means folding boolean relational joins over its one-hop
relations.  Long metapaths share prefixes, so a naive per-target rebuild
repeats work; this module keeps every materialized graph in a cache indexed
by a trie over vertex-type sequences.  Each trie node carries a callback link
to the level-1 node of its own type, which is how a greedy decomposition
resumes after cutting a segment: descend as deep as the trie allows, cut at
the deepest node marked terminal, follow the callback, continue from the
junction type.

Two build modes are exposed:

* ``ctt``   -- decompose against the trie and fold over cached segments,
  inserting the finished target back into the trie.
* ``naive`` -- fold left-to-right over the one-hop relations with no reuse
  across targets; intermediates are discarded.

Both modes produce edge-identical graphs; they differ only in cost, which is
tracked by :class:`CostReport` (``macs`` counts join probes, the unit of work
of a sparse boolean product).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import (
    Csr,
    HetGraph,
    HetgError,
    InvalidMetapathError,
    Metapath,
    SemanticGraph,
    relation_adjacency,
)

__all__ = [
    "CompositionError",
    "CostReport",
    "GenerationPlan",
    "CallbackTrie",
    "SemanticCache",
    "init_trie",
    "compose",
    "Builder",
    "enumerate_metapaths",
    "MODES",
]

MODES = ("ctt", "naive")


class CompositionError(HetgError):
    """Join endpoints do not line up."""


@dataclass
class CostReport:
    """Work counters for one build (or an aggregate of builds).

    ``macs`` is the join probe count (for each junction vertex, in-degree of
    the left operand times out-degree of the right); ``edges_read`` and
    ``edges_written`` count operand and result edges; ``cache_hits`` counts
    reused materialized graphs (multi-hop segments, or the target itself when
    it is served whole from the cache); ``segments_built`` counts join
    operations, i.e. newly materialized graphs.
    """

    target: str = ""
    mode: str = ""
    macs: int = 0
    edges_read: int = 0
    edges_written: int = 0
    cache_hits: int = 0
    segments_built: int = 0

    def merge(self, other: "CostReport") -> None:
        self.macs += other.macs
        self.edges_read += other.edges_read
        self.edges_written += other.edges_written
        self.cache_hits += other.cache_hits
        self.segments_built += other.segments_built

    def to_dict(self) -> dict:
        return {"target": self.target, "mode": self.mode, "macs": self.macs,
                "edges_read": self.edges_read, "edges_written": self.edges_written,
                "cache_hits": self.cache_hits, "segments_built": self.segments_built}


@dataclass(frozen=True)
class GenerationPlan:
    """Ordered segments whose junction-overlapped concatenation is the target."""

    segments: tuple[Metapath, ...]

    def target(self) -> Metapath:
        types = list(self.segments[0].types)
        for seg in self.segments[1:]:
            if seg.types[0] != types[-1]:
                raise HetgError("plan segments do not chain at junctions")
            types.extend(seg.types[1:])
        return Metapath(tuple(types))


class _Node:
    __slots__ = ("vertex_type", "children", "terminal", "callback")

    def __init__(self, vertex_type: str, callback: int):
        self.vertex_type = vertex_type
        self.children: dict[str, int] = {}
        self.terminal = False
        self.callback = callback


class CallbackTrie:
    """Trie over vertex-type sequences with callback links to level 1.

    Node 0 is a virtual root whose children are the level-1 nodes (one per
    vertex type that participates in any relation).  A path from the root to
    a terminal node spells a metapath that is currently materialized.
    """

    def __init__(self):
        self.nodes: list[_Node] = [_Node("", 0)]
        self.level1: dict[str, int] = {}

    def _new_node(self, vertex_type: str, callback: int) -> int:
        self.nodes.append(_Node(vertex_type, callback))
        return len(self.nodes) - 1

    def add_level1(self, vertex_type: str) -> int:
        nid = self.level1.get(vertex_type)
        if nid is None:
            nid = self._new_node(vertex_type, 0)
            self.nodes[nid].callback = nid  # level-1 nodes call back to themselves
            self.level1[vertex_type] = nid
            self.nodes[0].children[vertex_type] = nid
        return nid

    def insert(self, path: Metapath) -> bool:
        """Create nodes along ``path`` and mark the last terminal.

        Returns False (with a warning) when the path was already terminal.
        """
        first = self.level1.get(path.types[0])
        if first is None:
            raise InvalidMetapathError(
                f"cannot insert {path}: type {path.types[0]!r} has no level-1 node")
        nid = first
        for t in path.types[1:]:
            if t not in self.level1:
                raise InvalidMetapathError(
                    f"cannot insert {path}: type {t!r} has no level-1 node")
            child = self.nodes[nid].children.get(t)
            if child is None:
                child = self._new_node(t, self.level1[t])
                self.nodes[nid].children[t] = child
            nid = child
        if self.nodes[nid].terminal:
            warnings.warn(f"duplicate insert of {path}", stacklevel=2)
            return False
        self.nodes[nid].terminal = True
        return True

    def is_terminal(self, path: Metapath) -> bool:
        nid = self.level1.get(path.types[0])
        if nid is None:
            return False
        for t in path.types[1:]:
            nid = self.nodes[nid].children.get(t)
            if nid is None:
                return False
        return self.nodes[nid].terminal

    def decompose(self, target: Metapath) -> GenerationPlan:
        """Greedy longest-terminal-prefix traversal.

        From the level-1 node of the current type, descend child links
        matching the target as deep as possible, cut at the deepest terminal
        passed, emit that segment, and resume from the junction type via the
        callback link.
        """
        types = target.types
        segments: list[Metapath] = []
        pos = 0
        while pos < len(types) - 1:
            start = self.level1.get(types[pos])
            if start is None:
                raise InvalidMetapathError(
                    f"undecomposable metapath {target}: no node for type {types[pos]!r}")
            nid = start
            cut = -1
            j = pos
            while j + 1 < len(types):
                child = self.nodes[nid].children.get(types[j + 1])
                if child is None:
                    break
                nid = child
                j += 1
                if self.nodes[nid].terminal:
                    cut = j
            if cut < 0:
                raise InvalidMetapathError(
                    f"undecomposable metapath {target}: no terminal covers "
                    f"{types[pos]}->{types[pos + 1]}")
            segments.append(Metapath(types[pos:cut + 1]))
            pos = cut  # callback to level1[types[cut]]
        return GenerationPlan(tuple(segments))

    def terminal_paths(self) -> list[tuple[str, ...]]:
        """All metapaths spelled by root-to-terminal paths (sorted)."""
        out: list[tuple[str, ...]] = []

        def walk(nid: int, prefix: tuple[str, ...]) -> None:
            node = self.nodes[nid]
            path = prefix + (node.vertex_type,)
            if node.terminal:
                out.append(path)
            for t in sorted(node.children):
                walk(node.children[t], path)

        for t in sorted(self.level1):
            walk(self.level1[t], ())
        return sorted(out)

    @property
    def node_count(self) -> int:
        return len(self.nodes)


class SemanticCache:
    """Materialized semantic graphs keyed by metapath, with byte accounting.

    Keys stay in lockstep with the trie's terminal paths; use
    :func:`store_semantic_graph` to grow both together.
    """

    def __init__(self):
        self._graphs: dict[tuple[str, ...], SemanticGraph] = {}
        self.total_bytes = 0

    def put(self, sg: SemanticGraph) -> None:
        key = sg.label.types
        if key in self._graphs:
            return
        self._graphs[key] = sg
        self.total_bytes += sg.nbytes

    def get(self, path: Metapath) -> SemanticGraph:
        try:
            return self._graphs[path.types]
        except KeyError:
            raise HetgError(f"semantic graph {path} is not materialized") from None

    def __contains__(self, path: Metapath) -> bool:
        return path.types in self._graphs

    def __len__(self) -> int:
        return len(self._graphs)

    def keys(self) -> list[tuple[str, ...]]:
        return sorted(self._graphs)


def store_semantic_graph(trie: CallbackTrie, cache: SemanticCache,
                         path: Metapath, sg: SemanticGraph) -> None:
    """Insert ``path`` into the trie and its graph into the cache together."""
    if sg.label.types != path.types:
        raise HetgError(f"graph label {sg.label} does not match path {path}")
    trie.insert(path)
    cache.put(sg)


def init_trie(graph: HetGraph, relations=None) -> tuple[CallbackTrie, SemanticCache]:
    """Seed a trie and cache with the graph's one-hop semantic graphs.

    Level-1 nodes are created for every vertex type that appears as a
    relation endpoint; each distinct ordered type pair contributes one
    terminal level-2 node, backed by the first relation declared for that
    pair.
    """
    if relations is None:
        relations = graph.relations
    if not relations:
        raise HetgError("cannot initialize a trie without relations")
    trie = CallbackTrie()
    cache = SemanticCache()
    for rel in relations:
        trie.add_level1(rel.src_type)
        trie.add_level1(rel.dst_type)
    for src, dst in graph.type_pairs():
        rel = graph.relation_for_pair(src, dst)
        store_semantic_graph(trie, cache, Metapath((src, dst)),
                             relation_adjacency(graph, rel.name))
    return trie, cache


# ---------------------------------------------------------------------------
# Boolean join
# ---------------------------------------------------------------------------


def _to_scipy(sg: SemanticGraph) -> sp.csr_matrix:
    f = sg.forward
    return sp.csr_matrix(
        (np.ones(f.nnz, dtype=np.float64), f.indices, f.offsets),
        shape=(f.n_rows, f.n_cols))


def compose(g1: SemanticGraph, g2: SemanticGraph,
            counter: CostReport | None = None) -> SemanticGraph:
    """Boolean relational join: edge (u, w) iff some v links u->v->w.

    Counter effects: ``macs`` grows by the probe count (sum over junction
    vertices of in-degree in ``g1`` times out-degree in ``g2``),
    ``edges_read`` by both operands' edge counts, ``edges_written`` by the
    result's.
    """
    if g1.dst_type != g2.src_type or g1.label.types[-1] != g2.label.types[0]:
        raise CompositionError(
            f"cannot join {g1.label} with {g2.label}: junction mismatch "
            f"({g1.dst_type.name} vs {g2.src_type.name})")
    label = Metapath(g1.label.types + g2.label.types[1:])

    product = _to_scipy(g1) @ _to_scipy(g2)
    product.sort_indices()
    forward = Csr(product.indptr.astype(np.int64), product.indices.astype(np.int64),
                  g1.src_type.count, g2.dst_type.count)
    result = SemanticGraph(label, g1.src_type, g2.dst_type, forward)

    if counter is not None:
        junction = g1.dst_type.count
        indeg = np.bincount(g1.forward.indices, minlength=junction)
        outdeg = g2.forward.degrees()
        counter.macs += int(np.dot(indeg, outdeg))
        counter.edges_read += g1.edge_count + g2.edge_count
        counter.edges_written += result.edge_count
    return result


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------


class Builder:
    """One graph's trie, cache, and one-hop operands.

    A builder is confined to one thread of control; independent builders over
    the same (immutable) graph may run concurrently.  The trie and cache
    persist across builds, so batch workloads reuse earlier targets.
    """

    def __init__(self, graph: HetGraph, insert_intermediates: bool = False):
        self.graph = graph
        self.insert_intermediates = insert_intermediates
        self.trie, self.cache = init_trie(graph)

    def one_hop(self, src: str, dst: str) -> SemanticGraph:
        return self.cache.get(Metapath((src, dst)))

    def build(self, target: Metapath, mode: str) -> tuple[SemanticGraph, CostReport]:
        """Materialize ``target``; see the module docstring for mode semantics."""
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.graph.validate_metapath(target)
        report = CostReport(target=target.label, mode=mode)
        if mode == "naive":
            acc = self.one_hop(*target.types[:2])
            for a, b in zip(target.types[1:], target.types[2:]):
                acc = compose(acc, self.one_hop(a, b), report)
                report.segments_built += 1
            return acc, report

        plan = self.trie.decompose(target)
        if len(plan.segments) == 1:
            # target already materialized (one-hop, or inserted earlier)
            report.cache_hits += 1
            return self.cache.get(plan.segments[0]), report
        report.cache_hits += sum(1 for seg in plan.segments if seg.hops > 1)
        acc = self.cache.get(plan.segments[0])
        for seg in plan.segments[1:]:
            acc = compose(acc, self.cache.get(seg), report)
            report.segments_built += 1
            if self.insert_intermediates and acc.label.types != target.types:
                store_semantic_graph(self.trie, self.cache, acc.label, acc)
        store_semantic_graph(self.trie, self.cache, target, acc)
        return acc, report

    def build_many(self, targets, mode: str) -> tuple[CostReport, list[CostReport]]:
        """Build targets in order, accumulating counters.

        Returns the aggregate report and the per-target reports.  Graphs are
        not returned; in ``ctt`` mode they stay reachable through the cache.
        """
        aggregate = CostReport(target="(aggregate)", mode=mode)
        per_target = []
        for target in targets:
            _, report = self.build(target, mode)
            aggregate.merge(report)
            per_target.append(report)
        return aggregate, per_target


def enumerate_metapaths(graph: HetGraph, hops: int) -> list[Metapath]:
    """All valid metapaths with exactly ``hops`` hops, lexicographic by types."""
    if hops < 1:
        raise ValueError("hops must be >= 1")
    successors: dict[str, list[str]] = {}
    for src, dst in graph.type_pairs():
        successors.setdefault(src, []).append(dst)
    for succ in successors.values():
        succ.sort()

    out: list[Metapath] = []

    def extend(prefix: list[str]) -> None:
        if len(prefix) == hops + 1:
            out.append(Metapath(tuple(prefix)))
            return
        for nxt in successors.get(prefix[-1], ()):
            prefix.append(nxt)
            extend(prefix)
            prefix.pop()

    for start in sorted(successors):
        extend([start])
    return out
