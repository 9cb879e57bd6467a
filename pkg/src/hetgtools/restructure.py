"""Bipartite graph restructuring: matching, backbone classes, subgraph split.

A semantic graph is directed and bipartite, so it admits a maximum matching.
The matched vertices form a backbone that touches every edge (any edge with
two unmatched endpoints would extend the matching), which yields four vertex
classes -- matched/unmatched sources and destinations -- and a partition of
the edges into three subgraphs:

* ``gs1``: unmatched-source -> matched-destination edges
* ``gs2``: matched-source  -> unmatched-destination edges
* ``gs3``: matched-source  -> matched-destination edges

No edge can join an unmatched source to an unmatched destination, so the
three subgraphs cover the edge set exactly.  Each subgraph is compacted to
its incident vertices, with id-remap tables back to the parent graph.

The matching algorithm is alternating-path augmentation scanning sources in
ascending id and neighbors in CSR order, so results are deterministic.  The
search stops early once every destination is matched (no augmenting path can
exist past that point, and failed searches never modify the matching).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import HetgError, Metapath, SemanticGraph, VertexType

__all__ = [
    "NO_MATCH",
    "Matching",
    "PartitionSubgraph",
    "BackbonePartition",
    "CheckResult",
    "Diagnostics",
    "PartitionVerificationError",
    "maximum_matching",
    "partition_graph",
    "verify_partition",
    "restructure",
    "save_partition",
    "load_partition",
]

NO_MATCH = -1


class PartitionVerificationError(HetgError):
    """A produced partition failed its own invariants (internal error)."""


@dataclass
class Matching:
    """Mutual src<->dst match arrays; ``NO_MATCH`` marks unmatched vertices."""

    match_src: np.ndarray
    match_dst: np.ndarray

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.match_src >= 0))

    def matched_src_ids(self) -> np.ndarray:
        return np.flatnonzero(self.match_src >= 0)

    def matched_dst_ids(self) -> np.ndarray:
        return np.flatnonzero(self.match_dst >= 0)


def maximum_matching(sg: SemanticGraph) -> Matching:
    """Maximum-cardinality matching on a bipartite semantic graph.

    Deterministic: sources are scanned in ascending id, neighbors in CSR
    (ascending) order, and each free source gets one augmenting-path search.
    """
    # plain lists in the hot loop; numpy scalar indexing dominates otherwise
    offsets = sg.forward.offsets.tolist()
    indices = sg.forward.indices.tolist()
    n_src, n_dst = sg.src_type.count, sg.dst_type.count
    match_src = [NO_MATCH] * n_src
    match_dst = [NO_MATCH] * n_dst
    visited = [0] * n_dst  # generation stamps
    free_dst = n_dst
    generation = 0

    for s in range(n_src):
        if free_dst == 0:
            break
        if offsets[s] == offsets[s + 1]:
            continue
        generation += 1
        # iterative DFS; stack holds [source, next neighbor cursor],
        # chosen[i] is the destination linking frame i to frame i+1
        stack: list[list[int]] = [[s, offsets[s]]]
        chosen: list[int] = []
        augmented = False
        while stack:
            frame = stack[-1]
            u, ptr = frame
            end = offsets[u + 1]
            moved = False
            while ptr < end:
                v = indices[ptr]
                ptr += 1
                if visited[v] == generation:
                    continue
                visited[v] = generation
                frame[1] = ptr
                chosen.append(v)
                owner = match_dst[v]
                if owner == NO_MATCH:
                    augmented = True
                else:
                    stack.append([owner, offsets[owner]])
                moved = True
                break
            if augmented:
                break
            if not moved:
                stack.pop()
                if chosen:
                    chosen.pop()
        if augmented:
            for (u, _), v in zip(stack, chosen):
                match_src[u] = v
                match_dst[v] = u
            free_dst -= 1
    return Matching(np.asarray(match_src, dtype=np.int64),
                    np.asarray(match_dst, dtype=np.int64))


def check_matching(sg: SemanticGraph, m: Matching) -> list[str]:
    """Return violation messages (empty when the matching is valid and maximal)."""
    problems = []
    n_src, n_dst = sg.src_type.count, sg.dst_type.count
    if m.match_src.shape != (n_src,) or m.match_dst.shape != (n_dst,):
        return ["match array shapes do not fit the graph"]
    src_ids = m.matched_src_ids()
    for u in src_ids.tolist():
        v = int(m.match_src[u])
        if not (0 <= v < n_dst) or m.match_dst[v] != u:
            problems.append(f"pair ({u},{v}) is not mutual")
        elif not np.any(sg.forward.row(u) == v):
            problems.append(f"pair ({u},{v}) is not an edge")
    if len(src_ids) != len(m.matched_dst_ids()):
        problems.append("matched source and destination counts differ")
    esrc, edst = sg.edge_pairs()
    both_free = (m.match_src[esrc] == NO_MATCH) & (m.match_dst[edst] == NO_MATCH)
    if np.any(both_free):
        i = int(np.flatnonzero(both_free)[0])
        problems.append(f"not maximal: edge ({esrc[i]},{edst[i]}) has both ends free")
    return problems


# ---------------------------------------------------------------------------
# Partition
# ---------------------------------------------------------------------------


@dataclass
class PartitionSubgraph:
    """A compacted subgraph plus id-remap tables into the parent graph."""

    name: str
    graph: SemanticGraph
    src_ids: np.ndarray  # compact src id -> parent src id
    dst_ids: np.ndarray

    @property
    def edge_count(self) -> int:
        return self.graph.edge_count

    def parent_edge_keys(self, parent_dst_count: int) -> np.ndarray:
        src, dst = self.graph.edge_pairs()
        return np.sort(self.src_ids[src] * np.int64(max(parent_dst_count, 1))
                       + self.dst_ids[dst])


@dataclass
class BackbonePartition:
    """Vertex classes and the three-way edge split of one semantic graph."""

    label: Metapath
    src_type: VertexType
    dst_type: VertexType
    parent_edge_count: int
    matching: Matching
    src_in: np.ndarray
    src_out: np.ndarray
    dst_in: np.ndarray
    dst_out: np.ndarray
    gs1: PartitionSubgraph
    gs2: PartitionSubgraph
    gs3: PartitionSubgraph

    def subgraphs(self) -> list[PartitionSubgraph]:
        return [self.gs1, self.gs2, self.gs3]

    def stats(self) -> dict:
        return {
            "label": self.label.label,
            "edge_count": self.parent_edge_count,
            "matching_size": self.matching.size,
            "src_in": int(self.src_in.size),
            "src_out": int(self.src_out.size),
            "dst_in": int(self.dst_in.size),
            "dst_out": int(self.dst_out.size),
            "edges_gs1": self.gs1.edge_count,
            "edges_gs2": self.gs2.edge_count,
            "edges_gs3": self.gs3.edge_count,
        }


def _compact(name: str, parent: SemanticGraph, esrc: np.ndarray,
             edst: np.ndarray, mask: np.ndarray) -> PartitionSubgraph:
    s, d = esrc[mask], edst[mask]
    src_ids, cs = np.unique(s, return_inverse=True)
    dst_ids, cd = np.unique(d, return_inverse=True)
    src_t = VertexType(parent.src_type.name, int(src_ids.size),
                       parent.src_type.feature_dim)
    dst_t = VertexType(parent.dst_type.name, int(dst_ids.size),
                       parent.dst_type.feature_dim)
    graph = SemanticGraph.from_pairs(parent.label, src_t, dst_t, cs, cd)
    return PartitionSubgraph(name, graph, src_ids, dst_ids)


def partition_graph(sg: SemanticGraph, m: Matching) -> BackbonePartition:
    """Classify vertices around the matching and split the edges three ways.

    Matched vertices whose neighborhoods are fully matched would fall through
    the neighbor-scan step, so classification closes over them: every matched
    vertex lands inside the backbone, every unmatched vertex outside.  This
    keeps the no-outside-to-outside-edge guarantee on all inputs.
    """
    problems = check_matching(sg, m)
    if problems:
        raise HetgError("invalid matching: " + "; ".join(problems[:3]))

    src_matched = m.match_src >= 0
    dst_matched = m.match_dst >= 0
    src_in = np.flatnonzero(src_matched)
    src_out = np.flatnonzero(~src_matched)
    dst_in = np.flatnonzero(dst_matched)
    dst_out = np.flatnonzero(~dst_matched)

    esrc, edst = sg.edge_pairs()
    e_src_in = src_matched[esrc]
    e_dst_in = dst_matched[edst]
    gs1 = _compact("gs1", sg, esrc, edst, ~e_src_in & e_dst_in)
    gs2 = _compact("gs2", sg, esrc, edst, e_src_in & ~e_dst_in)
    gs3 = _compact("gs3", sg, esrc, edst, e_src_in & e_dst_in)

    return BackbonePartition(sg.label, sg.src_type, sg.dst_type, sg.edge_count,
                             m, src_in, src_out, dst_in, dst_out, gs1, gs2, gs3)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"check": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class Diagnostics:
    checks: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks]}


def _edge_examples(esrc, edst, mask, limit=3) -> str:
    idx = np.flatnonzero(mask)[:limit]
    return ", ".join(f"({int(esrc[i])},{int(edst[i])})" for i in idx)


def verify_partition(sg: SemanticGraph, p: BackbonePartition) -> Diagnostics:
    """Check every partition invariant; failures carry counterexample edges."""
    checks: list[CheckResult] = []
    n_src, n_dst = sg.src_type.count, sg.dst_type.count
    esrc, edst = sg.edge_pairs()

    def add(name: str, passed: bool, detail: str = "") -> None:
        checks.append(CheckResult(name, bool(passed), detail if not passed else ""))

    src_union = np.concatenate([p.src_in, p.src_out])
    dst_union = np.concatenate([p.dst_in, p.dst_out])
    add("vertex-classes-partition-sources",
        src_union.size == n_src and np.array_equal(np.sort(src_union),
                                                   np.arange(n_src)),
        f"src_in/src_out do not partition {n_src} sources")
    add("vertex-classes-partition-destinations",
        dst_union.size == n_dst and np.array_equal(np.sort(dst_union),
                                                   np.arange(n_dst)),
        f"dst_in/dst_out do not partition {n_dst} destinations")

    in_src = np.zeros(n_src, dtype=bool)
    in_src[p.src_in] = True
    in_dst = np.zeros(n_dst, dtype=bool)
    in_dst[p.dst_in] = True
    outside = ~in_src[esrc] & ~in_dst[edst]
    add("no-outside-to-outside-edge", not np.any(outside),
        "edges between src_out and dst_out: " + _edge_examples(esrc, edst, outside))
    add("backbone-covers-every-edge", not np.any(outside),
        "uncovered edges: " + _edge_examples(esrc, edst, outside))

    parent_keys = sg.edge_keys()
    sub_keys = np.concatenate([s.parent_edge_keys(n_dst) for s in p.subgraphs()]) \
        if sg.edge_count else np.zeros(0, dtype=np.int64)
    sub_sorted = np.sort(sub_keys)
    disjoint = sub_sorted.size == np.unique(sub_sorted).size
    add("subgraph-edges-disjoint", disjoint, "subgraphs share at least one edge")
    add("subgraph-union-equals-parent",
        disjoint and np.array_equal(sub_sorted, parent_keys),
        f"subgraph edges ({sub_sorted.size}) do not reassemble the parent "
        f"({parent_keys.size})")

    matching_problems = check_matching(sg, p.matching)
    add("matching-valid-and-maximal", not matching_problems,
        "; ".join(matching_problems[:3]))

    typing_ok = (
        np.all(~in_src[p.gs1.src_ids]) and np.all(in_dst[p.gs1.dst_ids])
        and np.all(in_src[p.gs2.src_ids]) and np.all(~in_dst[p.gs2.dst_ids])
        and np.all(in_src[p.gs3.src_ids]) and np.all(in_dst[p.gs3.dst_ids]))
    add("subgraph-endpoint-typing", typing_ok,
        "a subgraph touches a vertex outside its declared classes")

    return Diagnostics(checks)


def restructure(sg: SemanticGraph) -> BackbonePartition:
    """Match, partition, and verify; verification failures are internal errors."""
    p = partition_graph(sg, maximum_matching(sg))
    diag = verify_partition(sg, p)
    if not diag.ok:
        raise PartitionVerificationError(
            "; ".join(f"{c.name}: {c.detail}" for c in diag.failures()))
    return p


# ---------------------------------------------------------------------------
# On-disk format
# ---------------------------------------------------------------------------


def save_partition(p: BackbonePartition, path) -> None:
    """Write ``partition.json`` plus ``gs1/gs2/gs3.edges`` (compact ids)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    doc = {
        "label": p.label.label,
        "src_type": {"name": p.src_type.name, "count": p.src_type.count},
        "dst_type": {"name": p.dst_type.name, "count": p.dst_type.count},
        "edge_count": p.parent_edge_count,
        "matching": {
            "size": p.matching.size,
            "match_src": p.matching.match_src.tolist(),
            "match_dst": p.matching.match_dst.tolist(),
        },
        "classes": {
            "src_in": p.src_in.tolist(),
            "src_out": p.src_out.tolist(),
            "dst_in": p.dst_in.tolist(),
            "dst_out": p.dst_out.tolist(),
        },
        "subgraphs": {
            s.name: {
                "edge_count": s.edge_count,
                "src_ids": s.src_ids.tolist(),
                "dst_ids": s.dst_ids.tolist(),
            } for s in p.subgraphs()
        },
    }
    (path / "partition.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for s in p.subgraphs():
        src, dst = s.graph.edge_pairs()
        lines = [f"# {s.name} of {p.label.label} (compact ids)"]
        lines.extend(f"{u} {v}" for u, v in zip(src.tolist(), dst.tolist()))
        (path / f"{s.name}.edges").write_text("\n".join(lines) + "\n",
                                              encoding="utf-8")


def load_partition(path, sg: SemanticGraph) -> BackbonePartition:
    """Load a partition directory and bind it to its parent semantic graph.

    Raises when the stored types, counts, or edge totals do not match ``sg``.
    """
    path = Path(path)
    doc_file = path / "partition.json"
    if not doc_file.is_file():
        raise HetgError(f"missing partition file: {doc_file}")
    try:
        doc = json.loads(doc_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise HetgError(f"{doc_file}: invalid JSON ({exc})") from exc
    if (doc["src_type"]["name"] != sg.src_type.name
            or doc["src_type"]["count"] != sg.src_type.count
            or doc["dst_type"]["name"] != sg.dst_type.name
            or doc["dst_type"]["count"] != sg.dst_type.count
            or doc["edge_count"] != sg.edge_count):
        raise HetgError(f"partition at {path} does not pair with graph {sg.label}")
    matching = Matching(np.asarray(doc["matching"]["match_src"], dtype=np.int64),
                        np.asarray(doc["matching"]["match_dst"], dtype=np.int64))
    subs = {}
    for name in ("gs1", "gs2", "gs3"):
        meta = doc["subgraphs"][name]
        src_ids = np.asarray(meta["src_ids"], dtype=np.int64)
        dst_ids = np.asarray(meta["dst_ids"], dtype=np.int64)
        srcs, dsts = _read_compact_edges(path / f"{name}.edges")
        src_t = VertexType(sg.src_type.name, int(src_ids.size),
                           sg.src_type.feature_dim)
        dst_t = VertexType(sg.dst_type.name, int(dst_ids.size),
                           sg.dst_type.feature_dim)
        graph = SemanticGraph.from_pairs(sg.label, src_t, dst_t, srcs, dsts)
        if graph.edge_count != meta["edge_count"]:
            raise HetgError(f"{path / name}.edges: edge count mismatch")
        subs[name] = PartitionSubgraph(name, graph, src_ids, dst_ids)
    classes = doc["classes"]
    return BackbonePartition(
        sg.label, sg.src_type, sg.dst_type, sg.edge_count, matching,
        np.asarray(classes["src_in"], dtype=np.int64),
        np.asarray(classes["src_out"], dtype=np.int64),
        np.asarray(classes["dst_in"], dtype=np.int64),
        np.asarray(classes["dst_out"], dtype=np.int64),
        subs["gs1"], subs["gs2"], subs["gs3"])


def _read_compact_edges(file: Path):
    srcs: list[int] = []
    dsts: list[int] = []
    with open(file, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            u, v = line.split()
            srcs.append(int(u))
            dsts.append(int(v))
    return srcs, dsts
