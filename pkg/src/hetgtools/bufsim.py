"""Trace-driven vertex-feature buffer simulation.

The aggregation stage walks destination vertices in ascending id and reads
one source feature per incoming edge.  This module replays that access
stream against a capacity-bounded, fully associative LRU buffer and counts
hits, cold misses, replacements, and DRAM traffic.

A replacement is an eviction of a resident feature.  Per-vertex replacement
counts feed two histograms over replacement-count buckets: the fraction of
touched vertices in each bucket, and the fraction of DRAM accesses performed
by vertices in each bucket.

Schedules are lists of :class:`TraceUnit`.  A unit is a (sub)graph plus an
optional id remap into the shared source feature space, so the subgraphs of
a backbone partition replay against the same features as their parent.  The
buffer persists across the units of one schedule and starts empty for each
``simulate_buffer`` call.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .model import HetgError, SemanticGraph
from .restructure import BackbonePartition

__all__ = [
    "SimConfig",
    "TraceUnit",
    "SimReport",
    "LayoutComparison",
    "graph_schedule",
    "restructured_schedule",
    "simulate_buffer",
    "compare_layouts",
]

POLICIES = ("lru",)


@dataclass(frozen=True)
class SimConfig:
    """Buffer geometry: capacity in features, bytes per feature vector."""

    capacity: int
    feature_bytes: int = 256
    policy: str = "lru"

    def __post_init__(self):
        if self.capacity < 1:
            raise HetgError("buffer capacity must be >= 1 feature")
        if self.feature_bytes < 1:
            raise HetgError("feature_bytes must be >= 1")
        if self.policy not in POLICIES:
            raise HetgError(f"unknown replacement policy {self.policy!r}")


@dataclass(frozen=True)
class TraceUnit:
    """One execution unit: a graph whose sources map into a feature space."""

    graph: SemanticGraph
    src_map: np.ndarray | None = None  # unit src id -> feature id; None = identity
    feature_count: int | None = None   # size of the shared feature space

    @property
    def space(self) -> int:
        if self.feature_count is not None:
            return self.feature_count
        return self.graph.src_type.count


def graph_schedule(sg: SemanticGraph) -> list[TraceUnit]:
    """The whole graph as a single unit (ascending destination order)."""
    return [TraceUnit(sg)]


def restructured_schedule(p: BackbonePartition) -> list[TraceUnit]:
    """Subgraph order gs2, gs3, gs1; empty subgraphs are omitted.

    gs2 and gs3 read matched-source features, so running them back to back
    maximizes warm reuse; gs1's unmatched-source features are one-shot.
    """
    n = p.src_type.count
    units = []
    for sub in (p.gs2, p.gs3, p.gs1):
        if sub.edge_count:
            units.append(TraceUnit(sub.graph, sub.src_ids, n))
    return units


@dataclass
class SimReport:
    """Counters from one buffer replay.

    ``hits + dram_accesses == total_accesses``; ``dram_accesses`` splits into
    ``cold_misses`` (first touch) and refetches of previously evicted
    features; ``replacements`` counts evictions, so it exceeds the refetch
    count by the number of touched features that end the run evicted.
    """

    total_accesses: int = 0
    hits: int = 0
    cold_misses: int = 0
    replacements: int = 0
    dram_accesses: int = 0
    dram_bytes: int = 0
    distinct_sources: int = 0
    per_vertex_replacements: np.ndarray | None = None
    per_vertex_dram: np.ndarray | None = None
    touched: np.ndarray | None = None

    def histogram(self) -> list[tuple[int, float, float]]:
        """Rows of (replacement count, ratio of vertices, ratio of accesses)."""
        if self.touched is None or not np.any(self.touched):
            return []
        reps = self.per_vertex_replacements[self.touched]
        dram = self.per_vertex_dram[self.touched]
        total_v = reps.size
        total_d = dram.sum()
        rows = []
        for k in np.unique(reps).tolist():
            sel = reps == k
            rows.append((int(k),
                         float(np.count_nonzero(sel) / total_v),
                         float(dram[sel].sum() / total_d) if total_d else 0.0))
        return rows

    def to_dict(self) -> dict:
        hist = self.histogram()
        return {
            "total_accesses": self.total_accesses,
            "hits": self.hits,
            "cold_misses": self.cold_misses,
            "replacements": self.replacements,
            "dram_accesses": self.dram_accesses,
            "dram_bytes": self.dram_bytes,
            "distinct_sources": self.distinct_sources,
            "histogram": {
                "replacements": [r[0] for r in hist],
                "ratio_vertex": [r[1] for r in hist],
                "ratio_access": [r[2] for r in hist],
            },
        }

    def histogram_csv(self) -> str:
        lines = ["replacements,ratio_vertex,ratio_access"]
        for k, rv, ra in self.histogram():
            lines.append(f"{k},{rv!r},{ra!r}")
        return "\n".join(lines) + "\n"


def simulate_buffer(units: list[TraceUnit], config: SimConfig) -> SimReport:
    """Replay the units' access stream against an LRU buffer.

    All units must share one source feature space; destination vertices are
    visited in ascending id within each unit.
    """
    if not units:
        return SimReport(touched=np.zeros(0, dtype=bool),
                         per_vertex_replacements=np.zeros(0, dtype=np.int64),
                         per_vertex_dram=np.zeros(0, dtype=np.int64))
    space = max(u.space for u in units)
    for u in units:
        if u.src_map is not None:
            if u.src_map.shape[0] != u.graph.src_type.count:
                raise HetgError(f"unit {u.graph.label}: src_map length mismatch")
            if u.src_map.size and int(u.src_map.max()) >= space:
                raise HetgError(f"unit {u.graph.label}: src_map exceeds feature space")

    capacity = config.capacity
    buffer: OrderedDict[int, None] = OrderedDict()
    loaded = np.zeros(space, dtype=bool)
    evictions = np.zeros(space, dtype=np.int64)
    dram_per_vertex = np.zeros(space, dtype=np.int64)
    hits = dram = cold = total = 0

    for unit in units:
        rev = unit.graph.reverse  # destination-major edge walk
        stream = rev.indices if unit.src_map is None else unit.src_map[rev.indices]
        for key in stream.tolist():
            total += 1
            if key in buffer:
                hits += 1
                buffer.move_to_end(key)
                continue
            dram += 1
            dram_per_vertex[key] += 1
            if not loaded[key]:
                loaded[key] = True
                cold += 1
            if len(buffer) >= capacity:
                victim, _ = buffer.popitem(last=False)
                evictions[victim] += 1
            buffer[key] = None

    return SimReport(
        total_accesses=total,
        hits=hits,
        cold_misses=cold,
        replacements=int(evictions.sum()),
        dram_accesses=dram,
        dram_bytes=dram * config.feature_bytes,
        distinct_sources=int(np.count_nonzero(loaded)),
        per_vertex_replacements=evictions,
        per_vertex_dram=dram_per_vertex,
        touched=loaded,
    )


@dataclass
class LayoutComparison:
    """Original versus restructured replay of the same edge set."""

    original: SimReport
    restructured: SimReport

    @property
    def replacement_reduction(self) -> float:
        if self.original.replacements == 0:
            return 0.0
        return (self.original.replacements - self.restructured.replacements) \
            / self.original.replacements

    @property
    def dram_bytes_ratio(self) -> float:
        if self.original.dram_bytes == 0:
            return 1.0
        return self.restructured.dram_bytes / self.original.dram_bytes

    def to_dict(self) -> dict:
        return {
            "original": self.original.to_dict(),
            "restructured": self.restructured.to_dict(),
            "deltas": {
                "replacement_reduction": self.replacement_reduction,
                "dram_bytes_ratio": self.dram_bytes_ratio,
                "replacements_delta":
                    self.original.replacements - self.restructured.replacements,
                "dram_accesses_delta":
                    self.original.dram_accesses - self.restructured.dram_accesses,
            },
        }


def compare_layouts(sg: SemanticGraph, p: BackbonePartition,
                    config: SimConfig) -> LayoutComparison:
    """Simulate the graph in ascending order and via its restructured schedule."""
    if (p.src_type != sg.src_type or p.dst_type != sg.dst_type
            or p.parent_edge_count != sg.edge_count):
        raise HetgError("partition does not pair with this semantic graph")
    original = simulate_buffer(graph_schedule(sg), config)
    restructured = simulate_buffer(restructured_schedule(p), config)
    return LayoutComparison(original, restructured)
