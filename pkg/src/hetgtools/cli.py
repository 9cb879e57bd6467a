"""Command-line frontend: reproducible experiments with machine-readable reports.

Subcommands::

    hetg gen          generate a synthetic graph directory (presets or config)
    hetg build        compose metapath graphs, compare reuse vs naive cost
    hetg restructure  match + partition a semantic graph, verify, save
    hetg simulate     replay buffer traces for original/restructured layouts
    hetg report       aggregate run directories into one CSV table

Every run writes ``manifest.json`` (toolkit version, input/output digests,
per-step wall times) into its output directory.  Timestamps live only in the
manifest; all other payloads are byte-identical across reruns with identical
inputs and seed.  ``--json`` prints the primary report to stdout.  The
``HETG_THREADS`` environment variable caps worker processes for batch jobs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .builder import Builder, CostReport, enumerate_metapaths
from .bufsim import (
    SimConfig,
    compare_layouts,
    graph_schedule,
    restructured_schedule,
    simulate_buffer,
)
from .model import (
    HetGraph,
    HetgError,
    Metapath,
    RelationSpec,
    SemanticGraph,
    SynthConfig,
    VertexType,
    generate_synthetic,
    load_graph,
    parse_synth_config,
    read_edge_file,
    relation_adjacency,
    rng_stream,
    save_graph,
)
from .restructure import (
    load_partition,
    maximum_matching,
    partition_graph,
    restructure,
    save_partition,
    verify_partition,
)

__all__ = ["main", "preset_config", "PRESETS"]


# ---------------------------------------------------------------------------
# Presets (vertex counts and relation lists of the common benchmark datasets;
# per-relation edge counts default to 10x the source count, a toolkit default)
# ---------------------------------------------------------------------------

PRESETS = {
    "acm": {
        "types": [("P", 3025, 1902), ("A", 5959, 1902), ("S", 56, 1902),
                  ("T", 1902, 0)],
        "relations": [("TP", "T", "P"), ("PT", "P", "T"), ("SP", "S", "P"),
                      ("PS", "P", "S"), ("PP", "P", "P"), ("PP_rev", "P", "P"),
                      ("AP", "A", "P"), ("PA", "P", "A")],
    },
    "dblp": {
        "types": [("A", 4057, 334), ("P", 14328, 4231), ("T", 7723, 50),
                  ("V", 20, 0)],
        "relations": [("AP", "A", "P"), ("PA", "P", "A"), ("VP", "V", "P"),
                      ("PV", "P", "V"), ("TP", "T", "P"), ("PT", "P", "T")],
    },
    "imdb": {
        "types": [("M", 4932, 3489), ("D", 2393, 3341), ("A", 6124, 3341),
                  ("K", 7971, 0)],
        "relations": [("AM", "A", "M"), ("MA", "M", "A"), ("KM", "K", "M"),
                      ("MK", "M", "K"), ("DM", "D", "M"), ("MD", "M", "D")],
    },
}

DEFAULT_EDGE_FACTOR = 10.0


def preset_config(name: str, seed: int = 0, edge_factor: float = DEFAULT_EDGE_FACTOR,
                  degree_model: str = "uniform", exponent: float = 2.1) -> SynthConfig:
    """Synthetic config for a named preset; edges = edge_factor x source count."""
    try:
        preset = PRESETS[name]
    except KeyError:
        raise HetgError(f"unknown preset {name!r} (choose from {sorted(PRESETS)})") \
            from None
    types = tuple(VertexType(n, c, f) for n, c, f in preset["types"])
    counts = {t.name: t.count for t in types}
    rels = []
    for rel_name, src, dst in preset["relations"]:
        edges = min(max(1, round(edge_factor * counts[src])),
                    counts[src] * counts[dst])
        rels.append(RelationSpec(rel_name, src, dst, edges, degree_model, exponent))
    return SynthConfig(types, tuple(rels), seed)


# ---------------------------------------------------------------------------
# Manifest and deterministic serialization
# ---------------------------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_json(path: Path, obj) -> None:
    path.write_text(_dump_json(obj), encoding="utf-8")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _digest_tree(root: Path, skip=("manifest.json",)) -> dict[str, str]:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name not in skip:
            out[p.relative_to(root).as_posix()] = _sha256(p)
    return out


class Manifest:
    """Collects per-step wall times and input/output digests for one run."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.steps: list[dict] = []
        self.inputs: dict[str, str] = {}

    def step(self, name: str):
        manifest = self

        class _Step:
            def __enter__(self):
                self.t0 = time.perf_counter()
                return self

            def __exit__(self, exc_type, exc, tb):
                manifest.steps.append({
                    "name": name,
                    "status": "ok" if exc_type is None else "failed",
                    "seconds": time.perf_counter() - self.t0,
                })
                return False

        return _Step()

    def add_input(self, path: Path) -> None:
        path = Path(path)
        if path.is_dir():
            for rel, digest in _digest_tree(path).items():
                self.inputs[(path / rel).as_posix()] = digest
        elif path.is_file():
            self.inputs[path.as_posix()] = _sha256(path)

    def write(self, out_dir: Path) -> None:
        doc = {
            "toolkit_version": __version__,
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": _digest_tree(out_dir),
            "steps": self.steps,
            "created_utc": datetime.now(timezone.utc).isoformat(),
        }
        _write_json(out_dir / "manifest.json", doc)


def _out_dir(arg: str) -> Path:
    path = Path(arg)
    path.mkdir(parents=True, exist_ok=True)
    return path


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("HETG_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    workers = worker_count()
    if workers == 1 or len(items) < 4:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (workers * 4))))


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def _cmd_gen(args) -> int:
    if bool(args.preset) == bool(args.config):
        print("gen: exactly one of --preset or --config is required", file=sys.stderr)
        return 2
    manifest = Manifest("gen", {
        "preset": args.preset, "config": args.config, "seed": args.seed,
        "edge_factor": args.edge_factor, "degree_model": args.degree_model,
        "out": str(args.out),
    })
    if args.preset:
        config = preset_config(args.preset, seed=args.seed or 0,
                               edge_factor=args.edge_factor,
                               degree_model=args.degree_model)
    else:
        config_path = Path(args.config)
        manifest.add_input(config_path)
        data = json.loads(config_path.read_text(encoding="utf-8"))
        config = parse_synth_config(data)
        if args.seed is not None:
            config = SynthConfig(config.vertex_types, config.relations, args.seed)
    manifest.config["seed"] = config.seed

    out = _out_dir(args.out)
    with manifest.step("generate"):
        graph = generate_synthetic(config)
    with manifest.step("save"):
        save_graph(graph, out)
        _write_json(out / "synth_config.json", config.to_dict())
    manifest.write(out)

    summary = {
        "out": str(out),
        "vertex_types": {t.name: t.count for t in graph.vertex_types},
        "relations": len(graph.relations),
        "edges": graph.edge_total,
    }
    if args.json:
        print(_dump_json(summary), end="")
    else:
        print(f"wrote {summary['relations']} relations, {summary['edges']} edges "
              f"to {out}")
    return 0


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------


def _parse_hop_range(text: str) -> range:
    try:
        lo, hi = text.split(":")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise HetgError(f"bad hop range {text!r}; expected LO:HI") from None
    if lo < 1 or hi < lo:
        raise HetgError(f"bad hop range {text!r}")
    return range(lo, hi + 1)


def _reduction_pct(naive: int, ctt: int) -> float:
    return 100.0 * (naive - ctt) / naive if naive else 0.0


def _cmd_build(args) -> int:
    if bool(args.metapaths) == bool(args.sweep_hops):
        print("build: exactly one of --metapaths or --sweep-hops is required",
              file=sys.stderr)
        return 2
    manifest = Manifest("build", {
        "graph": str(args.graph), "metapaths": args.metapaths,
        "sweep_hops": args.sweep_hops, "mode": args.mode,
        "insert_intermediates": args.insert_intermediates, "out": str(args.out),
    })
    manifest.add_input(Path(args.graph))
    with manifest.step("load-graph"):
        graph = load_graph(args.graph)
    out = _out_dir(args.out)
    modes = ["ctt", "naive"] if args.mode == "both" else [args.mode]

    if args.sweep_hops:
        rows = _run_sweep(graph, _parse_hop_range(args.sweep_hops),
                          args.insert_intermediates, manifest)
        header = list(rows[0]) if rows else []
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        (out / "sweep.csv").write_text(buf.getvalue(), encoding="utf-8")
        report = {"config": manifest.config, "results": {"sweep": rows}}
        _write_json(out / "cost_report.json", report)
        manifest.write(out)
        if args.json:
            print(_dump_json(report), end="")
        else:
            for row in rows:
                print(f"hops={row['hops']} targets={row['n_targets']} "
                      f"cum reduction: macs {row['cum_macs_reduction_pct']:.2f}%")
        return 0

    targets = []
    for text in args.metapaths.split(","):
        mp = Metapath.parse(text)
        graph.validate_metapath(mp)  # raises naming the offender
        targets.append(mp)

    results: dict = {"targets": [], "aggregate": {}}
    aggregates: dict[str, CostReport] = {}
    per_mode: dict[str, list[CostReport]] = {}
    for mode in modes:
        builder = Builder(graph, insert_intermediates=args.insert_intermediates)
        with manifest.step(f"build-{mode}"):
            aggregate, per_target = builder.build_many(targets, mode)
        aggregates[mode] = aggregate
        per_mode[mode] = per_target
        results["aggregate"][mode] = aggregate.to_dict()
        results["targets"].extend(r.to_dict() for r in per_target)
        if mode == "ctt":
            results["cache_bytes"] = builder.cache.total_bytes
    if args.mode == "both":
        naive, ctt = aggregates["naive"], aggregates["ctt"]
        results["reduction"] = {
            "macs_pct": _reduction_pct(naive.macs, ctt.macs),
            "edges_read_pct": _reduction_pct(naive.edges_read, ctt.edges_read),
        }
        results["per_target_reduction"] = [
            {"target": c.target,
             "macs_pct": _reduction_pct(n.macs, c.macs),
             "edges_read_pct": _reduction_pct(n.edges_read, c.edges_read)}
            for c, n in zip(per_mode["ctt"], per_mode["naive"])
        ]
    report = {"config": manifest.config, "results": results}
    _write_json(out / "cost_report.json", report)
    manifest.write(out)
    if args.json:
        print(_dump_json(report), end="")
    else:
        for mode in modes:
            agg = aggregates[mode]
            print(f"{mode}: macs={agg.macs} edges_read={agg.edges_read} "
                  f"edges_written={agg.edges_written} cache_hits={agg.cache_hits}")
        if args.mode == "both":
            red = results["reduction"]
            print(f"reduction: macs {red['macs_pct']:.2f}% "
                  f"edges_read {red['edges_read_pct']:.2f}%")
    return 0


def _run_sweep(graph: HetGraph, hops: range, insert_intermediates: bool,
               manifest: Manifest) -> list[dict]:
    ctt_builder = Builder(graph, insert_intermediates=insert_intermediates)
    naive_builder = Builder(graph)
    rows = []
    cum = {"ctt_macs": 0, "naive_macs": 0, "ctt_edges_read": 0,
           "naive_edges_read": 0}
    for length in hops:
        targets = enumerate_metapaths(graph, length)
        with manifest.step(f"sweep-hops-{length}"):
            ctt_agg, _ = ctt_builder.build_many(targets, "ctt")
            naive_agg, _ = naive_builder.build_many(targets, "naive")
        cum["ctt_macs"] += ctt_agg.macs
        cum["naive_macs"] += naive_agg.macs
        cum["ctt_edges_read"] += ctt_agg.edges_read
        cum["naive_edges_read"] += naive_agg.edges_read
        rows.append({
            "hops": length,
            "n_targets": len(targets),
            "ctt_macs": ctt_agg.macs,
            "naive_macs": naive_agg.macs,
            "ctt_edges_read": ctt_agg.edges_read,
            "naive_edges_read": naive_agg.edges_read,
            "cum_ctt_macs": cum["ctt_macs"],
            "cum_naive_macs": cum["naive_macs"],
            "macs_reduction_pct": _reduction_pct(naive_agg.macs, ctt_agg.macs),
            "cum_macs_reduction_pct": _reduction_pct(cum["naive_macs"],
                                                     cum["ctt_macs"]),
            "edges_read_reduction_pct": _reduction_pct(naive_agg.edges_read,
                                                       ctt_agg.edges_read),
            "cum_edges_read_reduction_pct": _reduction_pct(
                cum["naive_edges_read"], cum["ctt_edges_read"]),
            "ctt_cache_bytes": ctt_builder.cache.total_bytes,
        })
    return rows


# ---------------------------------------------------------------------------
# restructure
# ---------------------------------------------------------------------------


def _fuzz_case(params: tuple[int, int]) -> tuple[int, bool, str]:
    seed, index = params
    rng = rng_stream(seed, f"fuzz:{index}")
    n_src = int(rng.integers(1, 81))
    n_dst = int(rng.integers(1, 81))
    density = float(rng.choice([0.02, 0.05, 0.1, 0.2, 0.4]))
    mask = rng.random((n_src, n_dst)) < density
    src, dst = np.nonzero(mask)
    sg = SemanticGraph.from_pairs(Metapath(("U", "V")), VertexType("U", n_src),
                                  VertexType("V", n_dst), src, dst)
    p = partition_graph(sg, maximum_matching(sg))
    diag = verify_partition(sg, p)
    if diag.ok:
        return index, True, ""
    return index, False, "; ".join(f"{c.name}: {c.detail}" for c in diag.failures())


def _cmd_restructure(args) -> int:
    manifest = Manifest("restructure", {
        "graph": str(args.graph) if args.graph else None, "relation": args.relation,
        "edges": args.edges, "src_type": args.src_type, "dst_type": args.dst_type,
        "fuzz": args.fuzz, "seed": args.seed, "out": str(args.out),
    })
    out = _out_dir(args.out)

    if args.fuzz:
        with manifest.step("fuzz"):
            outcomes = _parallel_map(_fuzz_case,
                                     [(args.seed, i) for i in range(args.fuzz)])
        failures = [{"case": i, "detail": detail}
                    for i, ok, detail in outcomes if not ok]
        report = {"config": manifest.config,
                  "results": {"runs": args.fuzz, "failed": len(failures),
                              "failures": failures}}
        _write_json(out / "fuzz_report.json", report)
        manifest.write(out)
        if args.json:
            print(_dump_json(report), end="")
        else:
            print(f"fuzz: {args.fuzz - len(failures)}/{args.fuzz} partitions verified")
        return 0 if not failures else 1

    if not args.graph:
        print("restructure: --graph is required", file=sys.stderr)
        return 2
    if bool(args.relation) == bool(args.edges):
        print("restructure: exactly one of --relation or --edges is required",
              file=sys.stderr)
        return 2
    manifest.add_input(Path(args.graph))
    with manifest.step("load-graph"):
        graph = load_graph(args.graph)
        if args.relation:
            sg = relation_adjacency(graph, args.relation)
        else:
            if not args.src_type or not args.dst_type:
                print("restructure: --edges needs --src-type and --dst-type",
                      file=sys.stderr)
                return 2
            manifest.add_input(Path(args.edges))
            src_t = graph.type(args.src_type)
            dst_t = graph.type(args.dst_type)
            srcs, dsts = read_edge_file(Path(args.edges), src_t.count, dst_t.count)
            sg = SemanticGraph.from_pairs(
                Metapath((src_t.name, dst_t.name)), src_t, dst_t, srcs, dsts)

    with manifest.step("match"):
        matching = maximum_matching(sg)
    with manifest.step("partition"):
        partition = partition_graph(sg, matching)
    with manifest.step("verify"):
        diag = verify_partition(sg, partition)
    with manifest.step("save"):
        save_partition(partition, out)
        report = {"config": manifest.config,
                  "results": {**partition.stats(),
                              "verification": diag.to_dict()}}
        _write_json(out / "restructure_report.json", report)
    manifest.write(out)
    if args.json:
        print(_dump_json(report), end="")
    else:
        s = partition.stats()
        print(f"matching size {s['matching_size']}; "
              f"subgraph edges {s['edges_gs1']}/{s['edges_gs2']}/{s['edges_gs3']}; "
              f"verification {'passed' if diag.ok else 'FAILED'}")
    if not diag.ok:
        print("restructure: partition verification failed", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    if bool(args.capacity_features) == bool(args.capacity_bytes):
        print("simulate: exactly one of --capacity-features or --capacity-bytes "
              "is required", file=sys.stderr)
        return 2
    capacity = args.capacity_features or args.capacity_bytes // args.feature_bytes
    if capacity < 1:
        print("simulate: capacity must be at least one feature", file=sys.stderr)
        return 2
    manifest = Manifest("simulate", {
        "graph": str(args.graph), "relation": args.relation,
        "partition": args.partition, "capacity_features": capacity,
        "feature_bytes": args.feature_bytes, "order": args.order,
        "out": str(args.out),
    })
    manifest.add_input(Path(args.graph))
    with manifest.step("load-graph"):
        graph = load_graph(args.graph)
        sg = relation_adjacency(graph, args.relation)
    config = SimConfig(capacity=capacity, feature_bytes=args.feature_bytes)
    out = _out_dir(args.out)

    partition = None
    if args.order in ("restructured", "both"):
        if args.partition:
            manifest.add_input(Path(args.partition))
            with manifest.step("load-partition"):
                partition = load_partition(args.partition, sg)
        else:
            with manifest.step("restructure"):
                partition = restructure(sg)

    reports = {}
    if args.order in ("original", "both"):
        with manifest.step("simulate-original"):
            reports["original"] = simulate_buffer(graph_schedule(sg), config)
    if args.order in ("restructured", "both"):
        with manifest.step("simulate-restructured"):
            reports["restructured"] = simulate_buffer(
                restructured_schedule(partition), config)

    primary = {}
    for name, rep in reports.items():
        doc = {"config": manifest.config, "results": rep.to_dict()}
        _write_json(out / f"sim_report_{name}.json", doc)
        (out / f"histogram_{name}.csv").write_text(rep.histogram_csv(),
                                                   encoding="utf-8")
        primary[name] = doc
    if args.order == "both":
        comparison = compare_layouts(sg, partition, config).to_dict()
        doc = {"config": manifest.config, "results": comparison["deltas"]}
        _write_json(out / "comparison.json", doc)
        primary["comparison"] = doc
    manifest.write(out)
    if args.json:
        print(_dump_json(primary), end="")
    else:
        for name, rep in reports.items():
            print(f"{name}: accesses={rep.total_accesses} hits={rep.hits} "
                  f"dram={rep.dram_accesses} replacements={rep.replacements}")
        if args.order == "both":
            delta = primary["comparison"]["results"]
            print(f"replacement reduction: {delta['replacement_reduction']:.3f}")
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

_REPORT_FILES = ("cost_report.json", "sim_report_original.json",
                 "sim_report_restructured.json", "comparison.json",
                 "restructure_report.json", "fuzz_report.json")


def _flatten(prefix: str, obj, row: dict) -> None:
    if isinstance(obj, dict):
        for key in sorted(obj):
            _flatten(f"{prefix}.{key}" if prefix else str(key), obj[key], row)
    elif isinstance(obj, (str, int, float, bool)) or obj is None:
        row[prefix] = "" if obj is None else obj
    # lists (per-target details, histograms) stay in their own files


def _cmd_report(args) -> int:
    rows = []
    for run in args.runs:
        run_dir = Path(run)
        manifest_file = run_dir / "manifest.json"
        if not manifest_file.is_file():
            print(f"report: missing manifest in {run_dir}", file=sys.stderr)
            return 1
        try:
            manifest = json.loads(manifest_file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            print(f"report: corrupt manifest in {run_dir}: {exc}", file=sys.stderr)
            return 1
        row = {"run": run_dir.name, "command": manifest.get("command", "")}
        for name in _REPORT_FILES:
            payload = run_dir / name
            if not payload.is_file():
                continue
            doc = json.loads(payload.read_text(encoding="utf-8"))
            stem = payload.stem
            _flatten(f"{stem}.config", doc.get("config", {}), row)
            _flatten(f"{stem}", doc.get("results", {}), row)
        rows.append(row)

    columns = ["run", "command"] + sorted(
        {k for row in rows for k in row} - {"run", "command"})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, restval="",
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    text = buf.getvalue()

    if args.out:
        out = _out_dir(args.out)
        (out / "aggregate.csv").write_text(text, encoding="utf-8")
        manifest = Manifest("report", {"runs": [str(r) for r in args.runs],
                                       "out": str(args.out)})
        for run in args.runs:
            manifest.add_input(Path(run))
        manifest.write(out)
    if args.json:
        print(_dump_json(rows), end="")
    elif not args.out:
        print(text, end="")
    else:
        print(f"wrote {len(rows)} rows to {Path(args.out) / 'aggregate.csv'}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetg", description="heterogeneous-graph experiment toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic graph directory")
    gen.add_argument("--preset", choices=sorted(PRESETS))
    gen.add_argument("--config", help="synthetic config JSON file")
    gen.add_argument("--seed", type=int, default=None,
                     help="overrides the config seed (presets default to 0)")
    gen.add_argument("--edge-factor", type=float, default=DEFAULT_EDGE_FACTOR,
                     help="preset edges per source vertex (default 10)")
    gen.add_argument("--degree-model", choices=["uniform", "powerlaw"],
                     default="uniform")
    gen.add_argument("--out", required=True)
    gen.add_argument("--json", action="store_true")
    gen.set_defaults(func=_cmd_gen)

    build = sub.add_parser("build", help="compose metapath semantic graphs")
    build.add_argument("--graph", required=True)
    build.add_argument("--metapaths", help="comma-separated metapaths (APA or A-P-A)")
    build.add_argument("--sweep-hops", help="hop range LO:HI; builds all valid "
                                            "metapaths per length, both modes")
    build.add_argument("--mode", choices=["ctt", "naive", "both"], default="both")
    build.add_argument("--insert-intermediates", action="store_true",
                       help="also cache intermediates of each build")
    build.add_argument("--out", required=True)
    build.add_argument("--json", action="store_true")
    build.set_defaults(func=_cmd_build)

    restr = sub.add_parser("restructure", help="match, partition, and verify")
    restr.add_argument("--graph")
    restr.add_argument("--relation")
    restr.add_argument("--edges", help="semantic-graph edge file")
    restr.add_argument("--src-type")
    restr.add_argument("--dst-type")
    restr.add_argument("--fuzz", type=int,
                       help="verify N random graphs instead of one input")
    restr.add_argument("--seed", type=int, default=0)
    restr.add_argument("--out", required=True)
    restr.add_argument("--json", action="store_true")
    restr.set_defaults(func=_cmd_restructure)

    sim = sub.add_parser("simulate", help="replay buffer traces")
    sim.add_argument("--graph", required=True)
    sim.add_argument("--relation", required=True)
    sim.add_argument("--partition", help="reuse a saved partition directory")
    sim.add_argument("--capacity-features", type=int)
    sim.add_argument("--capacity-bytes", type=int)
    sim.add_argument("--feature-bytes", type=int, default=256)
    sim.add_argument("--order", choices=["original", "restructured", "both"],
                     default="original")
    sim.add_argument("--out", required=True)
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    rep = sub.add_parser("report", help="aggregate run directories into CSV")
    rep.add_argument("runs", nargs="+")
    rep.add_argument("--out", help="directory for aggregate.csv (stdout if omitted)")
    rep.add_argument("--json", action="store_true")
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HetgError, OSError, json.JSONDecodeError) as exc:
        print(f"hetg {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
