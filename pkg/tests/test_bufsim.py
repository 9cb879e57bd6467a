"""LRU buffer replay tests against an independent reference simulator."""

from __future__ import annotations

import numpy as np
import pytest

from hetgtools import (
    HetgError,
    SimConfig,
    compare_layouts,
    graph_schedule,
    restructure,
    restructured_schedule,
    simulate_buffer,
)

from helpers import (
    random_semantic_graph,
    replay_reference,
    semantic_graph,
    two_community_fixture,
)


class TestBasics:
    def test_no_contention_when_everything_fits(self):
        sg = semantic_graph(4, 3, [(0, 0), (1, 0), (2, 1), (0, 1), (3, 2)])
        rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=100))
        assert rep.replacements == 0
        assert rep.dram_accesses == rep.cold_misses == 4  # distinct sources touched
        assert rep.hits == rep.total_accesses - 4

    def test_capacity_one_hand_replay(self):
        # two destinations each reading sources s1, s2 under capacity 1:
        # every access misses, and three evictions occur (s2 stays resident)
        sg = semantic_graph(2, 2, [(0, 0), (1, 0), (0, 1), (1, 1)])
        rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=1))
        assert rep.total_accesses == 4
        assert rep.dram_accesses == 4
        assert rep.hits == 0
        assert rep.replacements == 3
        assert rep.cold_misses == 2

    def test_empty_graph(self):
        sg = semantic_graph(3, 3, [])
        rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=4))
        assert rep.total_accesses == 0
        assert rep.hits == 0 and rep.dram_accesses == 0 and rep.replacements == 0
        assert rep.histogram() == []

    def test_empty_schedule(self):
        rep = simulate_buffer([], SimConfig(capacity=4))
        assert rep.total_accesses == 0

    def test_config_validation(self):
        with pytest.raises(HetgError):
            SimConfig(capacity=0)
        with pytest.raises(HetgError):
            SimConfig(capacity=4, policy="fifo")
        with pytest.raises(HetgError):
            SimConfig(capacity=4, feature_bytes=0)

    def test_dram_bytes(self):
        sg = semantic_graph(2, 1, [(0, 0), (1, 0)])
        rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=1,
                                                            feature_bytes=128))
        assert rep.dram_bytes == rep.dram_accesses * 128


class TestConservation:
    def test_hits_plus_misses_and_access_totals(self):
        rng = np.random.default_rng(40)
        for _ in range(40):
            sg = random_semantic_graph(rng, int(rng.integers(1, 60)),
                                       int(rng.integers(1, 60)),
                                       float(rng.uniform(0, 0.3)))
            cap = int(rng.integers(1, 40))
            rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=cap))
            assert rep.hits + rep.dram_accesses == rep.total_accesses
            assert rep.total_accesses == int(sg.reverse.degrees().sum())
            assert rep.dram_accesses >= rep.cold_misses
            assert rep.replacements >= rep.dram_accesses - rep.cold_misses

    def test_eviction_identity(self):
        # evictions = refetches + touched features not resident at the end
        rng = np.random.default_rng(41)
        for _ in range(30):
            sg = random_semantic_graph(rng, 40, 40, 0.15)
            cap = int(rng.integers(1, 30))
            rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=cap))
            ref = replay_reference(graph_schedule(sg), cap)
            not_resident = len(ref.loaded) - len(ref.order)
            assert rep.replacements == (rep.dram_accesses - rep.cold_misses
                                        + not_resident)

    def test_restructured_trace_covers_parent_accesses(self):
        rng = np.random.default_rng(42)
        sg = random_semantic_graph(rng, 50, 30, 0.2)
        p = restructure(sg)
        units = restructured_schedule(p)
        per_source = np.zeros(sg.src_type.count, dtype=np.int64)
        for unit in units:
            counts = np.bincount(unit.src_map[unit.graph.reverse.indices],
                                 minlength=sg.src_type.count)
            per_source += counts
        parent_counts = np.bincount(sg.forward.pairs()[0],
                                    minlength=sg.src_type.count)
        assert np.array_equal(per_source, parent_counts)


class TestAgainstReference:
    def test_counters_match_reference_lru(self):
        rng = np.random.default_rng(43)
        for _ in range(40):
            sg = random_semantic_graph(rng, int(rng.integers(1, 40)),
                                       int(rng.integers(1, 40)),
                                       float(rng.uniform(0.05, 0.4)))
            cap = int(rng.integers(1, 25))
            units = graph_schedule(sg)
            rep = simulate_buffer(units, SimConfig(capacity=cap))
            ref = replay_reference(units, cap)
            assert rep.total_accesses == ref.total
            assert rep.hits == ref.hits
            assert rep.cold_misses == ref.cold
            assert rep.dram_accesses == ref.dram
            assert rep.replacements == ref.replacements
            per_vertex = {i: int(c) for i, c in enumerate(rep.per_vertex_replacements)
                          if c}
            assert per_vertex == ref.evictions

    def test_restructured_schedule_matches_reference(self):
        rng = np.random.default_rng(44)
        for _ in range(15):
            sg = random_semantic_graph(rng, 35, 25, 0.2)
            p = restructure(sg)
            units = restructured_schedule(p)
            cap = int(rng.integers(1, 20))
            rep = simulate_buffer(units, SimConfig(capacity=cap))
            ref = replay_reference(units, cap)
            assert (rep.hits, rep.dram_accesses, rep.replacements) == \
                   (ref.hits, ref.dram, ref.replacements)


class TestLruProperties:
    def test_miss_count_non_increasing_with_capacity(self):
        rng = np.random.default_rng(45)
        sg = random_semantic_graph(rng, 80, 60, 0.15)
        units = graph_schedule(sg)
        misses = [simulate_buffer(units, SimConfig(capacity=c)).dram_accesses
                  for c in (1, 2, 4, 8, 16, 32, 64, 128)]
        assert all(a >= b for a, b in zip(misses, misses[1:]))

    def test_infinite_capacity_floor_is_schedule_invariant(self):
        rng = np.random.default_rng(46)
        sg = random_semantic_graph(rng, 60, 40, 0.2)
        p = restructure(sg)
        big = SimConfig(capacity=10 ** 6)
        orig = simulate_buffer(graph_schedule(sg), big)
        rest = simulate_buffer(restructured_schedule(p), big)
        distinct = int(np.count_nonzero(np.bincount(
            sg.forward.pairs()[0], minlength=sg.src_type.count)))
        assert orig.dram_accesses == rest.dram_accesses == distinct
        assert orig.replacements == rest.replacements == 0


class TestHistogram:
    def test_ratios_sum_to_one(self):
        rng = np.random.default_rng(47)
        for _ in range(20):
            sg = random_semantic_graph(rng, 40, 40, 0.2)
            rep = simulate_buffer(graph_schedule(sg),
                                  SimConfig(capacity=int(rng.integers(1, 20))))
            hist = rep.histogram()
            if not hist:
                continue
            assert sum(r[1] for r in hist) == pytest.approx(1.0)
            assert sum(r[2] for r in hist) == pytest.approx(1.0)

    def test_bucket_masses_match_reference(self):
        rng = np.random.default_rng(48)
        sg = random_semantic_graph(rng, 30, 30, 0.3)
        cap = 7
        rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=cap))
        ref = replay_reference(graph_schedule(sg), cap)
        touched = sorted(ref.loaded)
        by_bucket: dict[int, list[int]] = {}
        for v in touched:
            by_bucket.setdefault(ref.evictions.get(v, 0), []).append(v)
        expected = {
            k: (len(vs) / len(touched),
                sum(ref.dram_per_vertex[v] for v in vs) / ref.dram)
            for k, vs in by_bucket.items()}
        got = {k: (rv, ra) for k, rv, ra in rep.histogram()}
        assert got.keys() == expected.keys()
        for k in expected:
            assert got[k][0] == pytest.approx(expected[k][0])
            assert got[k][1] == pytest.approx(expected[k][1])

    def test_csv_shape(self):
        sg = semantic_graph(2, 2, [(0, 0), (1, 0), (0, 1), (1, 1)])
        rep = simulate_buffer(graph_schedule(sg), SimConfig(capacity=1))
        lines = rep.histogram_csv().strip().split("\n")
        assert lines[0] == "replacements,ratio_vertex,ratio_access"
        assert len(lines) >= 2


class TestSchedules:
    def test_three_unit_schedule(self):
        sg = semantic_graph(3, 3, [(0, 0), (0, 1), (1, 0), (2, 0), (1, 2)])
        p = restructure(sg)
        units = restructured_schedule(p)
        if all(s.edge_count for s in p.subgraphs()):
            assert len(units) == 3
        assert [u.graph.edge_count for u in units] == \
            [s.edge_count for s in (p.gs2, p.gs3, p.gs1) if s.edge_count]

    def test_single_unit_when_perfectly_matched(self):
        sg = semantic_graph(2, 2, [(0, 0), (1, 1)])
        p = restructure(sg)
        units = restructured_schedule(p)
        assert len(units) == 1
        assert units[0].graph.edge_count == 2  # everything inside the backbone

    def test_planted_two_community_reduction(self):
        sg, capacity = two_community_fixture(stars=8, leaves=8)
        p = restructure(sg)
        cmp = compare_layouts(sg, p, SimConfig(capacity=capacity))
        ref_orig = replay_reference(graph_schedule(sg), capacity)
        ref_rest = replay_reference(restructured_schedule(p), capacity)
        assert cmp.original.replacements == ref_orig.replacements
        assert cmp.restructured.replacements == ref_rest.replacements
        assert cmp.restructured.replacements < cmp.original.replacements
        assert cmp.replacement_reduction > 0

    def test_compare_layouts_unbounded_capacity_no_delta(self):
        rng = np.random.default_rng(49)
        sg = random_semantic_graph(rng, 30, 30, 0.2)
        cmp = compare_layouts(sg, restructure(sg), SimConfig(capacity=10 ** 6))
        assert cmp.original.dram_accesses == cmp.restructured.dram_accesses
        assert cmp.replacement_reduction == 0.0
        assert cmp.dram_bytes_ratio == 1.0

    def test_compare_layouts_pairing_check(self):
        rng = np.random.default_rng(50)
        sg = random_semantic_graph(rng, 20, 20, 0.2)
        other = random_semantic_graph(rng, 20, 20, 0.25)
        with pytest.raises(HetgError, match="does not pair"):
            compare_layouts(other, restructure(sg), SimConfig(capacity=4))

    def test_determinism(self):
        rng = np.random.default_rng(51)
        sg = random_semantic_graph(rng, 40, 40, 0.2)
        r1 = simulate_buffer(graph_schedule(sg), SimConfig(capacity=9))
        r2 = simulate_buffer(graph_schedule(sg), SimConfig(capacity=9))
        assert r1.to_dict() == r2.to_dict()
