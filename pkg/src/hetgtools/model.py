"""Heterogeneous graph data model, on-disk formats, and synthetic generation.

A heterogeneous graph is a set of typed vertex spaces plus directed, typed
relations between them.  Vertex ids are dense and 0-based within each type.
Every relation's edge list is stored as CSR over the source type's id space;
semantic graphs (the directed bipartite graphs produced by metapath
composition) share the same CSR building block.  Adjacency is boolean: edges
are deduplicated and neighbor lists kept sorted, so two graphs are equal
exactly when their edge sets are.

On-disk layout of a graph directory:

* ``schema.json``  -- vertex types and relations
  (``{"vertex_types":[{"name","count","feature_dim"}...],
  "relations":[{"name","src","dst"}...]}``)
* ``<relation>.edges`` -- one ``<src_id> <dst_id>`` pair per line, decimal,
  LF-terminated, ``#`` comments allowed.

Synthetic generation draws from a fixed, named PRNG (PCG64) with one
substream per relation, so identical configs produce identical graphs.
"""

from __future__ import annotations

import hashlib
import json
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# type names feed metapath syntax (no separators), relation names feed paths
_TYPE_NAME = re.compile(r"^[A-Za-z0-9_]+$")
_RELATION_NAME = re.compile(r"^[A-Za-z0-9_.\-]+$")

__all__ = [
    "HetgError",
    "SchemaError",
    "EdgeFileError",
    "InfeasibleConfigError",
    "InvalidMetapathError",
    "Csr",
    "VertexType",
    "Relation",
    "Metapath",
    "SemanticGraph",
    "HetGraph",
    "SynthConfig",
    "RelationSpec",
    "load_graph",
    "save_graph",
    "generate_synthetic",
    "relation_adjacency",
    "parse_synth_config",
    "read_edge_file",
    "rng_stream",
]


class HetgError(Exception):
    """Base class for toolkit errors."""


class SchemaError(HetgError):
    """Invalid or inconsistent graph schema."""


class EdgeFileError(HetgError):
    """Missing, malformed, or out-of-range edge data."""


class InfeasibleConfigError(HetgError):
    """Synthetic config requests something impossible."""


class InvalidMetapathError(HetgError):
    """Metapath references a type pair with no registered relation."""


# ---------------------------------------------------------------------------
# CSR building block
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Csr:
    """Compressed sparse rows over dense integer ids.

    ``indices[offsets[i]:offsets[i+1]]`` are the neighbors of row ``i``,
    sorted ascending with duplicates removed.  Arrays are int64 and must not
    be mutated after construction.
    """

    offsets: np.ndarray
    indices: np.ndarray
    n_rows: int
    n_cols: int

    @classmethod
    def from_pairs(cls, src, dst, n_rows: int, n_cols: int) -> "Csr":
        """Build a CSR from parallel (src, dst) id arrays; sorts and dedups."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src/dst arrays differ in length")
        if src.size:
            if src.min() < 0 or src.max() >= n_rows:
                raise ValueError("src id out of range")
            if dst.min() < 0 or dst.max() >= n_cols:
                raise ValueError("dst id out of range")
            keys = np.unique(src * np.int64(n_cols) + dst)
            src = keys // n_cols
            dst = keys % n_cols
        offsets = np.zeros(n_rows + 1, dtype=np.int64)
        if src.size:
            np.cumsum(np.bincount(src, minlength=n_rows), out=offsets[1:])
        return cls(offsets, dst.astype(np.int64), n_rows, n_cols)

    @classmethod
    def empty(cls, n_rows: int, n_cols: int) -> "Csr":
        return cls(np.zeros(n_rows + 1, dtype=np.int64),
                   np.zeros(0, dtype=np.int64), n_rows, n_cols)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def row(self, i: int) -> np.ndarray:
        return self.indices[self.offsets[i]:self.offsets[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge list as (src, dst) arrays in row-major sorted order."""
        src = np.repeat(np.arange(self.n_rows, dtype=np.int64), self.degrees())
        return src, self.indices

    def keys(self) -> np.ndarray:
        """Edges encoded as ``src * n_cols + dst``, ascending."""
        src, dst = self.pairs()
        return src * np.int64(max(self.n_cols, 1)) + dst

    def transpose(self) -> "Csr":
        src, dst = self.pairs()
        return Csr.from_pairs(dst, src, self.n_cols, self.n_rows)

    def check(self) -> None:
        """Raise if structural invariants are broken (used by tests and I/O)."""
        if self.offsets.shape != (self.n_rows + 1,):
            raise ValueError("offsets length mismatch")
        if self.offsets[0] != 0 or self.offsets[-1] != self.nnz:
            raise ValueError("offsets do not span the index array")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets not monotone")
        if self.nnz:
            if self.indices.min() < 0 or self.indices.max() >= self.n_cols:
                raise ValueError("index out of range")
            for i in range(self.n_rows):
                row = self.row(i)
                if row.size > 1 and np.any(np.diff(row) <= 0):
                    raise ValueError(f"row {i} not strictly sorted")

    @property
    def nbytes(self) -> int:
        return int(self.offsets.nbytes + self.indices.nbytes)


# ---------------------------------------------------------------------------
# Schema types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VertexType:
    """A vertex type: ``count`` dense ids, ``feature_dim`` raw feature width."""

    name: str
    count: int
    feature_dim: int = 0

    def __post_init__(self):
        if not _TYPE_NAME.match(self.name):
            raise SchemaError(f"invalid vertex type name {self.name!r} "
                              "(letters, digits, underscore)")
        if self.count < 0 or self.feature_dim < 0:
            raise SchemaError(f"vertex type {self.name!r}: negative count or feature_dim")


@dataclass(frozen=True)
class Relation:
    """A directed edge type from ``src_type`` to ``dst_type`` vertices."""

    name: str
    src_type: str
    dst_type: str

    def __post_init__(self):
        if not _RELATION_NAME.match(self.name):
            raise SchemaError(f"invalid relation name {self.name!r} "
                              "(letters, digits, underscore, dot, dash)")


@dataclass(frozen=True)
class Metapath:
    """A sequence of vertex-type names; hop count is ``len(types) - 1``.

    The textual form uses ``-`` separators when any type name has more than
    one character (``A-P-A``); all-single-character paths may be written bare
    (``APA``).
    """

    types: tuple[str, ...]

    def __post_init__(self):
        if len(self.types) < 2:
            raise InvalidMetapathError("metapath needs at least two vertex types")
        if any(not t for t in self.types):
            raise InvalidMetapathError("metapath contains an empty type name")

    @classmethod
    def parse(cls, text: str) -> "Metapath":
        text = text.strip()
        if "-" in text:
            parts = tuple(p for p in text.split("-"))
        else:
            parts = tuple(text)
        return cls(parts)

    @property
    def hops(self) -> int:
        return len(self.types) - 1

    @property
    def label(self) -> str:
        if all(len(t) == 1 for t in self.types):
            return "".join(self.types)
        return "-".join(self.types)

    def __str__(self) -> str:
        return self.label


# ---------------------------------------------------------------------------
# Semantic graph
# ---------------------------------------------------------------------------


class SemanticGraph:
    """Directed bipartite graph for one metapath.

    ``forward`` is CSR src->dst; ``reverse`` (dst->src) is derived lazily and
    encodes the same edge set.  Source and destination ids live in distinct
    index spaces even when the endpoint types coincide.  Instances are
    immutable once built and safe to read from multiple threads.
    """

    __slots__ = ("label", "src_type", "dst_type", "forward", "_reverse")

    def __init__(self, label: Metapath, src_type: VertexType,
                 dst_type: VertexType, forward: Csr):
        if forward.n_rows != src_type.count or forward.n_cols != dst_type.count:
            raise SchemaError(
                f"semantic graph {label}: CSR shape {forward.n_rows}x{forward.n_cols} "
                f"does not match types {src_type.count}x{dst_type.count}")
        self.label = label
        self.src_type = src_type
        self.dst_type = dst_type
        self.forward = forward
        self._reverse = None

    @classmethod
    def from_pairs(cls, label: Metapath, src_type: VertexType,
                   dst_type: VertexType, src_ids, dst_ids) -> "SemanticGraph":
        csr = Csr.from_pairs(src_ids, dst_ids, src_type.count, dst_type.count)
        return cls(label, src_type, dst_type, csr)

    @property
    def reverse(self) -> Csr:
        if self._reverse is None:
            self._reverse = self.forward.transpose()
        return self._reverse

    @property
    def edge_count(self) -> int:
        return self.forward.nnz

    def edge_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return self.forward.pairs()

    def edge_keys(self) -> np.ndarray:
        return self.forward.keys()

    def same_edges(self, other: "SemanticGraph") -> bool:
        if (self.src_type.count, self.dst_type.count) != \
                (other.src_type.count, other.dst_type.count):
            return False
        return np.array_equal(self.edge_keys(), other.edge_keys())

    @property
    def nbytes(self) -> int:
        return self.forward.nbytes

    def __repr__(self) -> str:
        return (f"SemanticGraph({self.label}, {self.src_type.name}->"
                f"{self.dst_type.name}, edges={self.edge_count})")


# ---------------------------------------------------------------------------
# Heterogeneous graph
# ---------------------------------------------------------------------------


class HetGraph:
    """Typed vertex sets plus per-relation CSR edge lists.

    Immutable after construction; all mutation-free accessors are safe for
    concurrent readers.
    """

    def __init__(self, vertex_types: list[VertexType], relations: list[Relation],
                 edges: dict[str, Csr]):
        names = [t.name for t in vertex_types]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate vertex type names")
        rel_names = [r.name for r in relations]
        if len(set(rel_names)) != len(rel_names):
            raise SchemaError("duplicate relation names")
        self.vertex_types = list(vertex_types)
        self.relations = list(relations)
        self._types = {t.name: t for t in vertex_types}
        for r in relations:
            if r.src_type not in self._types or r.dst_type not in self._types:
                raise SchemaError(f"relation {r.name!r} references unknown vertex type")
        self._edges: dict[str, Csr] = {}
        for r in relations:
            csr = edges.get(r.name)
            if csr is None:
                raise SchemaError(f"missing edges for relation {r.name!r}")
            st, dt = self._types[r.src_type], self._types[r.dst_type]
            if csr.n_rows != st.count or csr.n_cols != dt.count:
                raise SchemaError(f"relation {r.name!r}: CSR shape mismatch")
            self._edges[r.name] = csr
        # first declared relation wins for each ordered type pair
        self._by_pair: dict[tuple[str, str], Relation] = {}
        for r in relations:
            self._by_pair.setdefault((r.src_type, r.dst_type), r)
        if len(self.vertex_types) + len(self.relations) <= 2:
            warnings.warn("graph is not heterogeneous (|types| + |relations| <= 2)",
                          stacklevel=2)

    @classmethod
    def from_edge_arrays(cls, vertex_types, relations,
                         edge_arrays: dict[str, tuple]) -> "HetGraph":
        """Build from raw (src, dst) id arrays per relation; sorts and dedups."""
        types = {t.name: t for t in vertex_types}
        edges = {}
        for r in relations:
            src, dst = edge_arrays.get(r.name, ((), ()))
            try:
                edges[r.name] = Csr.from_pairs(
                    src, dst, types[r.src_type].count, types[r.dst_type].count)
            except ValueError as exc:
                raise SchemaError(f"relation {r.name!r}: {exc}") from exc
        return cls(list(vertex_types), list(relations), edges)

    def type(self, name: str) -> VertexType:
        try:
            return self._types[name]
        except KeyError:
            raise SchemaError(f"unknown vertex type {name!r}") from None

    def has_type(self, name: str) -> bool:
        return name in self._types

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise SchemaError(f"unknown relation {name!r}")

    def relation_csr(self, name: str) -> Csr:
        self.relation(name)
        return self._edges[name]

    def relation_for_pair(self, src: str, dst: str) -> Relation | None:
        return self._by_pair.get((src, dst))

    def type_pairs(self) -> list[tuple[str, str]]:
        return list(self._by_pair)

    def validate_metapath(self, mp: Metapath) -> None:
        """Raise unless every consecutive type pair names a registered relation."""
        for t in mp.types:
            if t not in self._types:
                raise InvalidMetapathError(f"metapath {mp}: unknown vertex type {t!r}")
        for a, b in zip(mp.types, mp.types[1:]):
            if (a, b) not in self._by_pair:
                raise InvalidMetapathError(
                    f"metapath {mp}: no relation registered for {a}->{b}")

    @property
    def edge_total(self) -> int:
        return sum(c.nnz for c in self._edges.values())

    def equals(self, other: "HetGraph") -> bool:
        """Schema plus edge-set equality."""
        if self.vertex_types != other.vertex_types:
            return False
        if self.relations != other.relations:
            return False
        return all(np.array_equal(self._edges[r.name].keys(),
                                  other._edges[r.name].keys())
                   for r in self.relations)


def relation_adjacency(graph: HetGraph, relation: str) -> SemanticGraph:
    """One-hop semantic graph: the relation's edge list under a 2-type metapath."""
    rel = graph.relation(relation)
    label = Metapath((rel.src_type, rel.dst_type))
    return SemanticGraph(label, graph.type(rel.src_type), graph.type(rel.dst_type),
                         graph.relation_csr(relation))


# ---------------------------------------------------------------------------
# On-disk formats
# ---------------------------------------------------------------------------


def load_graph(path) -> HetGraph:
    """Load a graph directory (``schema.json`` + one ``.edges`` file per relation).

    Neighbor lists are sorted and duplicate edges removed.  Malformed or
    out-of-range lines raise :class:`EdgeFileError` naming the file and line;
    stray ``.edges`` files only produce a warning.
    """
    path = Path(path)
    schema_file = path / "schema.json"
    if not schema_file.is_file():
        raise SchemaError(f"missing schema file: {schema_file}")
    try:
        data = json.loads(schema_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{schema_file}: invalid JSON ({exc})") from exc

    try:
        vertex_types = [VertexType(v["name"], int(v["count"]), int(v["feature_dim"]))
                        for v in data["vertex_types"]]
        relations = [Relation(r["name"], r["src"], r["dst"])
                     for r in data["relations"]]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{schema_file}: missing or malformed field ({exc})") from exc

    counts = {t.name: t.count for t in vertex_types}
    edge_arrays = {}
    for rel in relations:
        if rel.src_type not in counts or rel.dst_type not in counts:
            raise SchemaError(f"relation {rel.name!r} references unknown vertex type")
        edge_arrays[rel.name] = read_edge_file(
            path / f"{rel.name}.edges", counts[rel.src_type], counts[rel.dst_type])

    known = {r.name for r in relations}
    for stray in sorted(path.glob("*.edges")):
        if stray.stem not in known:
            warnings.warn(f"ignoring unknown relation file: {stray.name}", stacklevel=2)

    return HetGraph.from_edge_arrays(vertex_types, relations, edge_arrays)


def read_edge_file(file, src_count: int, dst_count: int):
    """Parse one edge file; raises :class:`EdgeFileError` with file and line."""
    file = Path(file)
    if not file.is_file():
        raise EdgeFileError(f"missing edge file: {file}")
    srcs: list[int] = []
    dsts: list[int] = []
    with open(file, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeFileError(f"{file}:{lineno}: malformed line {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeFileError(f"{file}:{lineno}: malformed line {line!r}") from None
            if not (0 <= u < src_count) or not (0 <= v < dst_count):
                raise EdgeFileError(f"{file}:{lineno}: id out of range ({u} {v})")
            srcs.append(u)
            dsts.append(v)
    return srcs, dsts


def save_graph(graph: HetGraph, path) -> None:
    """Write a graph directory; ``load_graph(save_graph(g))`` equals ``g``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    schema = {
        "vertex_types": [{"name": t.name, "count": t.count, "feature_dim": t.feature_dim}
                         for t in graph.vertex_types],
        "relations": [{"name": r.name, "src": r.src_type, "dst": r.dst_type}
                      for r in graph.relations],
    }
    (path / "schema.json").write_text(
        json.dumps(schema, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for rel in graph.relations:
        csr = graph.relation_csr(rel.name)
        src, dst = csr.pairs()
        lines = [f"# {rel.name}: {rel.src_type} -> {rel.dst_type}"]
        lines.extend(f"{u} {v}" for u, v in zip(src.tolist(), dst.tolist()))
        (path / f"{rel.name}.edges").write_text("\n".join(lines) + "\n",
                                                encoding="utf-8")


# ---------------------------------------------------------------------------
# Synthetic generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationSpec:
    """Synthetic target for one relation: edge count plus degree model."""

    name: str
    src: str
    dst: str
    edges: int
    degree_model: str = "uniform"
    exponent: float = 2.1

    def __post_init__(self):
        if self.edges < 0:
            raise InfeasibleConfigError(f"relation {self.name!r}: negative edge count")
        if self.degree_model not in ("uniform", "powerlaw"):
            raise InfeasibleConfigError(
                f"relation {self.name!r}: unknown degree model {self.degree_model!r}")


@dataclass(frozen=True)
class SynthConfig:
    """Full synthetic dataset description; a pure function of ``seed``."""

    vertex_types: tuple[VertexType, ...]
    relations: tuple[RelationSpec, ...]
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "vertex_types": [{"name": t.name, "count": t.count,
                              "feature_dim": t.feature_dim} for t in self.vertex_types],
            "relations": [{"name": r.name, "src": r.src, "dst": r.dst,
                           "edges": r.edges, "degree_model": r.degree_model,
                           "exponent": r.exponent} for r in self.relations],
            "seed": self.seed,
        }


def parse_synth_config(data: dict) -> SynthConfig:
    """Parse the JSON envelope (schema keys plus per-relation edge targets)."""
    try:
        vts = tuple(VertexType(v["name"], int(v["count"]), int(v.get("feature_dim", 0)))
                    for v in data["vertex_types"])
        rels = tuple(RelationSpec(r["name"], r["src"], r["dst"], int(r["edges"]),
                                  r.get("degree_model", "uniform"),
                                  float(r.get("exponent", 2.1)))
                     for r in data["relations"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed synthetic config ({exc})") from exc
    return SynthConfig(vts, rels, int(data.get("seed", 0)))


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Named PCG64 substream: all toolkit randomness flows through these."""
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    key = int.from_bytes(digest, "little")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & (2**64 - 1), key])))


def _sample_edges(rng: np.random.Generator, m: int, n: int, k: int,
                  model: str, exponent: float):
    """Exactly ``k`` distinct (src, dst) pairs, deterministic per generator state."""
    total = m * n
    if k > total:
        raise InfeasibleConfigError(f"requested {k} edges but only {total} pairs exist")
    if k == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if 2 * k >= total:
        # near saturation: permute the full pair space
        if total > 50_000_000:
            raise InfeasibleConfigError(
                f"near-saturated relation too large to enumerate ({total} pairs)")
        perm = rng.permutation(total)[:k]
        return perm // n, perm % n

    cum = None
    if model == "powerlaw":
        weights = np.empty(m, dtype=np.float64)
        weights[rng.permutation(m)] = (np.arange(m, dtype=np.float64) + 1.0) ** (-exponent)
        cum = np.cumsum(weights)
        cum /= cum[-1]

    seen: set[int] = set()
    out: list[int] = []
    while len(out) < k:
        batch = max(1024, 2 * (k - len(out)))
        if cum is None:
            src = rng.integers(0, m, size=batch, dtype=np.int64)
        else:
            src = np.minimum(np.searchsorted(cum, rng.random(batch), side="right"),
                             m - 1).astype(np.int64)
        dst = rng.integers(0, n, size=batch, dtype=np.int64)
        for key in (src * np.int64(n) + dst).tolist():
            if key not in seen:
                seen.add(key)
                out.append(key)
                if len(out) == k:
                    break
    keys = np.asarray(out, dtype=np.int64)
    return keys // n, keys % n


def generate_synthetic(config: SynthConfig) -> HetGraph:
    """Generate a graph with exactly the requested edge counts per relation.

    Output is a pure function of the config: each relation draws from its own
    seeded substream, so adding or reordering relations does not perturb the
    others.
    """
    types = {t.name: t for t in config.vertex_types}
    relations = []
    edge_arrays = {}
    for spec in config.relations:
        if spec.src not in types or spec.dst not in types:
            raise SchemaError(f"relation {spec.name!r} references unknown vertex type")
        rng = rng_stream(config.seed, f"relation:{spec.name}")
        src, dst = _sample_edges(rng, types[spec.src].count, types[spec.dst].count,
                                 spec.edges, spec.degree_model, spec.exponent)
        relations.append(Relation(spec.name, spec.src, spec.dst))
        edge_arrays[spec.name] = (src, dst)
    return HetGraph.from_edge_arrays(list(config.vertex_types), relations, edge_arrays)
