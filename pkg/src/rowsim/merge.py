"""Row-equivalence-class merging: reorder aggregation edges by shared DRAM row.

Two source vertices belong to the same class exactly when their feature start
addresses fall in the same DRAM row, so issuing a class's reads back to back
turns scattered single-burst row visits into longer row sessions.  The
reordering is a pure permutation of the input edge stream: nothing is lost,
duplicated, or split across emissions.
"""

import json
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ._util import is_pow2, write_csv
from .dram import AddressMapping, DramConfig, preset
from .trace import FeatureLayout, feature_range


@dataclass(frozen=True)
class RecHasher:
    """Maps a vertex id to the row field of its feature's start address."""

    layout: FeatureLayout
    mapping: AddressMapping

    @property
    def fast_path(self) -> bool:
        return is_pow2(self.layout.feature_bytes)

    def row_hash(self, v: int) -> int:
        if self.fast_path:
            start = self.layout.base_address + (v << (self.layout.feature_bytes.bit_length() - 1))
            return (start >> self.mapping.row_shift) & self.mapping.row_mask
        start, _ = feature_range(v, self.layout)
        return self.mapping.decompose(start).row

    def row_hash_array(self, vertices: np.ndarray) -> np.ndarray:
        starts = (
            np.uint64(self.layout.base_address)
            + vertices.astype(np.uint64) * np.uint64(self.layout.feature_bytes)
        )
        return ((starts >> np.uint64(self.mapping.row_shift))
                & np.uint64(self.mapping.row_mask)).astype(np.int64)


def row_hash(v: int, hasher: RecHasher) -> int:
    return hasher.row_hash(v)


class RecTable:
    """Bounded map of class id -> FIFO edge queue with whole-queue emission."""

    def __init__(self, max_entries: int = 64, max_depth: int = 32):
        if max_entries < 1 or max_depth < 1:
            raise ValueError("table dimensions must be >= 1")
        self.max_entries = max_entries
        self.max_depth = max_depth
        self.entries: OrderedDict[int, list] = OrderedDict()

    def __len__(self) -> int:
        return len(self.entries)


def eviction_policy(table: RecTable) -> int:
    """Class to emit under capacity pressure: longest queue, oldest on ties."""
    best_key = None
    best_len = -1
    for key, q in table.entries.items():  # insertion order makes ties oldest-first
        if len(q) > best_len:
            best_key, best_len = key, len(q)
    return best_key


@dataclass
class MergeResult:
    src: np.ndarray
    dst: np.ndarray
    positions: np.ndarray  # permutation of input positions, for audits
    emission_log: list     # (batch, class_id, queue_len, reason)


def merge_stream(
    src: np.ndarray,
    dst: np.ndarray,
    hasher: RecHasher,
    table: RecTable | None = None,
) -> MergeResult:
    """Reorder an edge stream so same-row-class reads become contiguous.

    Edges append to their class queue; a queue is emitted whole when it
    reaches the depth threshold, when a new class needs a full table's entry
    (longest queue evicted), and at the final flush (oldest class first).
    """
    if table is None:
        table = RecTable()
    classes = hasher.row_hash_array(np.asarray(src)).tolist()
    out: list[int] = []
    log: list[tuple] = []
    entries = table.entries
    batch = 0

    def emit(key: int, reason: str) -> None:
        nonlocal batch
        q = entries.pop(key)
        out.extend(q)
        log.append((batch, key, len(q), reason))
        batch += 1

    for pos, cls in enumerate(classes):
        q = entries.get(cls)
        if q is None:
            if len(entries) >= table.max_entries:
                emit(eviction_policy(table), "capacity")
            q = entries[cls] = []
        q.append(pos)
        if len(q) >= table.max_depth:
            emit(cls, "depth")
    for key in list(entries.keys()):
        emit(key, "flush")

    positions = np.asarray(out, dtype=np.int64)
    src = np.asarray(src)
    dst = np.asarray(dst)
    return MergeResult(
        src=src[positions], dst=dst[positions], positions=positions, emission_log=log
    )


def dump_emission_log(path, log) -> None:
    write_csv(path, ("batch", "class_id", "queue_len", "reason"), log)


def reference_hasher() -> tuple[RecHasher, DramConfig]:
    """The shared row-class fixture configuration.

    HBM-style geometry (32-byte bursts, 64 bursts per row) on one channel with
    four banks puts the row field at bit 13, so with 1024-byte features based
    at a row-aligned address, vertices share a row class exactly when they
    agree on all bits above the low three (v & ~7).
    """
    cfg, mapping = preset("HBM", channels=1, banks_per_channel=4)
    layout = FeatureLayout(base_address=0, alignment_kb=4, feature_length=256, element_size=4)
    return RecHasher(layout=layout, mapping=mapping), cfg


def write_rowclass_fixture(path, hasher: RecHasher | None = None, num_vertices: int = 1024) -> dict:
    """Emit the row-class grouping fixture consumed by external mask checks."""
    if hasher is None:
        hasher, _ = reference_hasher()
    classes = hasher.row_hash_array(np.arange(num_vertices)).tolist()
    payload = {
        "config": {
            "base_address": hasher.layout.base_address,
            "alignment_kb": hasher.layout.alignment_kb,
            "feature_length": hasher.layout.feature_length,
            "element_size": hasher.layout.element_size,
            "row_shift": hasher.mapping.row_shift,
        },
        "num_vertices": num_vertices,
        "classes": classes,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return payload
