"""Row-equivalence-class hashing and merge reordering."""

import json
import os

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rowsim.dram import preset, service
from rowsim.merge import (
    RecHasher,
    RecTable,
    eviction_policy,
    merge_stream,
    reference_hasher,
    row_hash,
    write_rowclass_fixture,
)
from rowsim.trace import FeatureLayout, expand_misses, feature_range, Trace

FIXTURE_PATH = os.path.join(os.path.dirname(__file__), "..", "fixtures",
                            "rowclass_fixture.json")


def test_row_hash_paper_style_examples():
    hasher, _ = reference_hasher()
    assert row_hash(5, hasher) == row_hash(2, hasher)      # both in v >> 3 == 0
    assert row_hash(8, hasher) != row_hash(7, hasher)      # straddles the group


def test_row_hash_of_vertex_zero_is_base_row():
    hasher, _ = reference_hasher()
    base_row = hasher.mapping.decompose(hasher.layout.base_address).row
    assert row_hash(0, hasher) == base_row


def test_row_hash_matches_full_decomposition_oracle():
    hasher, _ = reference_hasher()
    rng = np.random.default_rng(14)
    for v in rng.integers(0, 1 << 16, 4096).tolist():
        start, _ = feature_range(v, hasher.layout)
        assert row_hash(v, hasher) == hasher.mapping.decompose(start).row


def test_row_hash_array_agrees_with_scalar():
    hasher, _ = reference_hasher()
    vs = np.arange(4096)
    arr = hasher.row_hash_array(vs)
    assert arr.tolist() == [hasher.row_hash(int(v)) for v in vs]


def test_row_hash_non_pow2_feature_falls_back():
    _, mapping = preset("HBM", channels=1, banks_per_channel=4)
    layout = FeatureLayout(base_address=0, feature_length=96)  # 384 B, not pow2
    hasher = RecHasher(layout=layout, mapping=mapping)
    assert not hasher.fast_path
    for v in range(0, 500, 7):
        start, _ = feature_range(v, layout)
        assert hasher.row_hash(v) == mapping.decompose(start).row


def test_merge_single_class_is_fifo():
    hasher, _ = reference_hasher()
    src = np.array([3, 1, 4, 1, 5])  # all in class 0
    dst = np.arange(5)
    res = merge_stream(src, dst, hasher)
    assert res.src.tolist() == src.tolist()
    assert res.dst.tolist() == dst.tolist()


def test_merge_alternating_classes_depth_two():
    hasher, _ = reference_hasher()
    src = np.array([0, 8, 1, 9])  # classes a, b, a, b
    dst = np.arange(4)
    res = merge_stream(src, dst, hasher, RecTable(max_entries=64, max_depth=2))
    assert res.src.tolist() == [0, 1, 8, 9]  # a, a, b, b


def test_merge_preserves_destination_pairing():
    hasher, _ = reference_hasher()
    rng = np.random.default_rng(15)
    src = rng.integers(0, 4096, 500)
    dst = rng.integers(0, 100, 500)
    res = merge_stream(src, dst, hasher, RecTable(8, 4))
    assert np.array_equal(src[res.positions], res.src)
    assert np.array_equal(dst[res.positions], res.dst)


@settings(max_examples=100, derandomize=True)
@given(st.lists(st.integers(0, 2**14 - 1), max_size=300),
       st.integers(1, 16), st.integers(1, 16))
def test_merge_permutation_property(srcs, entries, depth):
    hasher, _ = reference_hasher()
    src = np.asarray(srcs, dtype=np.int64)
    dst = np.arange(len(src))
    res = merge_stream(src, dst, hasher, RecTable(entries, depth))
    assert sorted(res.src.tolist()) == sorted(src.tolist())
    assert sorted(res.positions.tolist()) == list(range(len(src)))


def test_eviction_longest_first():
    table = RecTable(2, 32)
    table.entries[10] = [0, 1, 2]
    table.entries[20] = [3]
    assert eviction_policy(table) == 10


def test_eviction_tie_goes_to_older_entry():
    table = RecTable(2, 32)
    table.entries[20] = [0, 1]
    table.entries[10] = [2, 3]
    assert eviction_policy(table) == 20  # inserted first


def test_no_queue_splitting_on_large_stream():
    hasher, _ = reference_hasher()
    rng = np.random.default_rng(16)
    src = rng.integers(0, 2**14, 100_000)
    dst = rng.integers(0, 2**14, 100_000)
    res = merge_stream(src, dst, hasher, RecTable(64, 32))
    classes = hasher.row_hash_array(res.src)
    assert sum(length for _, _, length, _ in res.emission_log) == len(src)
    pos = 0
    for _, class_id, length, _ in res.emission_log:
        chunk = classes[pos:pos + length]
        assert (chunk == class_id).all()  # each emission is one whole queue
        pos += length


def test_merge_never_increases_activations():
    # cache disabled; same DRAM model on merged vs unmerged expansions
    hasher, cfg = reference_hasher()
    rng = np.random.default_rng(17)
    for trial in range(5):
        src = rng.integers(0, 2048, 400)
        dst = np.arange(400)
        tr = Trace(dst=dst, src=src, layout=hasher.layout)
        base_stream = expand_misses(tr, np.arange(400), src, cfg, access_window=2)
        base = service(base_stream.addresses, cfg, hasher.mapping)
        res = merge_stream(src, dst, hasher, RecTable(64, 32))
        m_stream = expand_misses(tr, res.positions, res.src, cfg, access_window=2)
        merged = service(m_stream.addresses, cfg, hasher.mapping)
        assert merged.bursts_served == base.bursts_served
        assert merged.row_activations <= base.row_activations


def test_merge_reduces_singleton_sessions_on_clustered_trace():
    # neighbors drawn from a narrow vertex range: many row-class mates
    hasher, cfg = reference_hasher()
    rng = np.random.default_rng(18)
    src = rng.integers(0, 256, 2000)
    dst = np.arange(2000)
    tr = Trace(dst=dst, src=src, layout=hasher.layout)
    base_stream = expand_misses(tr, np.arange(2000), src, cfg, access_window=2)
    base = service(base_stream.addresses, cfg, hasher.mapping)
    res = merge_stream(src, dst, hasher, RecTable(64, 32))
    m_stream = expand_misses(tr, res.positions, res.src, cfg, access_window=2)
    merged = service(m_stream.addresses, cfg, hasher.mapping)
    assert merged.session_sizes.get(1, 0) < base.session_sizes.get(1, 0)


def test_emission_log_dump(tmp_path):
    from rowsim.merge import dump_emission_log

    hasher, _ = reference_hasher()
    res = merge_stream(np.array([0, 8, 1]), np.arange(3), hasher, RecTable(2, 2))
    path = tmp_path / "emissions.csv"
    dump_emission_log(str(path), res.emission_log)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "batch,class_id,queue_len,reason"
    assert len(lines) == 1 + len(res.emission_log)


def test_rowclass_fixture_golden_file(tmp_path):
    """The checked-in fixture matches what the current hasher emits."""
    regenerated = write_rowclass_fixture(tmp_path / "fixture.json")
    with open(FIXTURE_PATH) as fh:
        checked_in = json.load(fh)
    assert checked_in == regenerated
    classes = np.asarray(checked_in["classes"])
    groups = np.arange(1024) >> 3
    same = classes[:, None] == classes[None, :]
    expected = groups[:, None] == groups[None, :]
    assert np.array_equal(same, expected)
