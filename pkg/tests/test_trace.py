"""Feature-read trace generation, LRU cache behavior, and burst expansion."""

import numpy as np
import pytest

from rowsim.dram import preset, service_array
from rowsim.graph import load_edge_list, synth_graph
from rowsim.trace import (
    FeatureLayout,
    LayoutError,
    LruCache,
    access_breakdown,
    bursts_for_range,
    cache_filter,
    expand_misses,
    feature_range,
    gen_trace,
)


def test_feature_range_base_zero():
    layout = FeatureLayout(base_address=0, feature_length=256)
    assert feature_range(0, layout) == (0, 1024)
    assert feature_range(3, layout) == (3072, 4096)


def test_feature_range_offset_base():
    layout = FeatureLayout(base_address=8192, alignment_kb=8, feature_length=64)
    assert feature_range(10, layout) == (10752, 11008)


def test_layout_alignment_enforced():
    with pytest.raises(LayoutError, match="aligned"):
        FeatureLayout(base_address=100, alignment_kb=4)


def test_bursts_for_range_counts():
    cfg, mapping = preset("HBM")  # 32-byte bursts
    reqs = bursts_for_range((0, 1024), mapping, cfg)
    assert len(reqs) == 1024 // 32
    cfg4, map4 = preset("DDR4")  # 64-byte bursts
    reqs4 = bursts_for_range((0, 64), map4, cfg4)
    assert len(reqs4) == 1


def test_bursts_partition_range():
    cfg, mapping = preset("HBM")
    start, end = 2048, 2048 + 1024
    reqs = bursts_for_range((start, end), mapping, cfg)
    covered = sorted(a for r in reqs for a in range(r.address, r.address + cfg.bytes_per_burst))
    assert covered == list(range(start, end))
    for r in reqs:
        assert r.vector == mapping.decompose(r.address)


def test_bursts_misaligned_range():
    cfg, mapping = preset("HBM")
    with pytest.raises(LayoutError, match="aligned"):
        bursts_for_range((1, 33), mapping, cfg)


def test_gen_trace_small_graph():
    g = load_edge_list(b"0 1\n1 2\n0 2", num_vertices=3)
    tr = gen_trace(g, FeatureLayout(feature_length=256))
    assert tr.src.tolist() == [0, 1, 0]
    assert tr.dst.tolist() == [1, 2, 2]
    reqs = list(tr.requests())
    assert reqs[0].address_range == (0, 1024)
    assert reqs[1].src == 1 and reqs[1].dst == 2


def test_gen_trace_cardinality_and_bytes():
    g = synth_graph("uniform-random", 500, 5000, seed=1)
    layout = FeatureLayout(feature_length=256)
    tr = gen_trace(g, layout)
    assert len(tr) == 5000
    assert tr.desired_bytes == 5000 * 256 * 4


def test_lru_capacity_two():
    cache = LruCache(2)
    assert [cache.access(k) for k in ("A", "B", "A")] == [False, False, True]


def test_lru_capacity_one_thrashes():
    cache = LruCache(1)
    assert [cache.access(k) for k in ("A", "B", "A")] == [False, False, False]


def test_lru_recency_order():
    cache = LruCache(2)
    for k in ("A", "B"):
        cache.access(k)
    cache.access("A")       # A most recent; B is the LRU victim
    cache.access("C")
    assert cache.access("B") is False
    assert len(cache) == 2


def test_cache_inclusion_property():
    rng = np.random.default_rng(8)
    stream = rng.integers(0, 200, 3000)
    misses = []
    for cap in (16, 64, 256):
        res = cache_filter(stream, LruCache(cap))
        misses.append(res.misses)
    assert misses[0] >= misses[1] >= misses[2]


def test_cache_none_forwards_all():
    res = cache_filter(np.array([1, 1, 1]), None)
    assert res.misses == 3 and res.hits == 0


def test_expansion_lossless_multiset():
    g = synth_graph("uniform-random", 64, 400, seed=2)
    layout = FeatureLayout(feature_length=256)
    tr = gen_trace(g, layout)
    cfg, mapping = preset("HBM")
    for window in (1, 2, 4):
        stream = expand_misses(tr, np.arange(len(tr)), tr.src, cfg, access_window=window)
        expected = []
        for s in tr.src.tolist():
            start, end = feature_range(s, layout)
            expected.extend(range(start, end, cfg.bytes_per_burst))
        assert sorted(stream.addresses.tolist()) == sorted(expected)
        assert int(stream.completes.sum()) == len(tr)


def test_expansion_window_one_is_sequential():
    g = load_edge_list(b"0 1\n1 2", num_vertices=3)
    tr = gen_trace(g, FeatureLayout(feature_length=16))  # 64 B: 2 HBM bursts
    cfg, mapping = preset("HBM")
    stream = expand_misses(tr, np.arange(2), tr.src, cfg, access_window=1)
    assert stream.addresses.tolist() == [0, 32, 64, 96]
    assert stream.completes.tolist() == [False, True, False, True]


def test_expansion_window_two_interleaves():
    g = load_edge_list(b"0 1\n1 2", num_vertices=3)
    tr = gen_trace(g, FeatureLayout(feature_length=16))
    cfg, mapping = preset("HBM")
    stream = expand_misses(tr, np.arange(2), tr.src, cfg, access_window=2)
    assert stream.addresses.tolist() == [0, 64, 32, 96]  # round-robin across the pair
    assert stream.completes.tolist() == [False, False, True, True]


def test_desired_equals_actual_bytes_when_dropout_off():
    g = synth_graph("uniform-random", 256, 2000, seed=3)
    layout = FeatureLayout(feature_length=256)
    tr = gen_trace(g, layout)
    cfg, mapping = preset("HBM")
    res = cache_filter(tr.src, LruCache(64))
    miss_pos = np.flatnonzero(res.miss_mask)
    stream = expand_misses(tr, miss_pos, tr.src[miss_pos], cfg, access_window=2)
    assert len(stream.addresses) * cfg.bytes_per_burst == res.misses * layout.feature_bytes


def test_trace_dump_csv(tmp_path):
    from rowsim.trace import dump_trace_csv

    g = load_edge_list(b"0 1\n1 2", num_vertices=3)
    tr = gen_trace(g, FeatureLayout(feature_length=16))
    path = tmp_path / "trace.csv"
    dump_trace_csv(str(path), tr, classes=["hit", "new"])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "seq,dst,src,address,class"
    assert lines[1] == "0,1,0,0,hit"
    assert lines[2] == "1,2,1,64,new"


def test_breakdown_conservation():
    g = synth_graph("uniform-random", 256, 2000, seed=4)
    layout = FeatureLayout(feature_length=256)
    tr = gen_trace(g, layout)
    cfg, mapping = preset("HBM")
    res = cache_filter(tr.src, LruCache(64))
    miss_pos = np.flatnonzero(res.miss_mask)
    stream = expand_misses(tr, miss_pos, tr.src[miss_pos], cfg, access_window=2)
    counters, activated = service_array(stream.addresses, cfg, mapping)
    parts = access_breakdown(res.hits, stream.bursts_per_feature,
                             counters.bursts_served, counters.row_activations)
    total = len(tr) * stream.bursts_per_feature
    assert parts["hit"] + parts["new"] + parts["merge"] == total
    assert parts["new"] == counters.row_activations
