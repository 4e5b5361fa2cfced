"""Aggregation traces: feature-read requests, LRU feature cache, burst expansion.

The trace walks destinations in ascending id and reads each neighbor's source
feature in CSR order.  Only these neighbor-feature reads are modeled; weights,
outputs, and graph-structure reads are untimed.  The on-chip cache holds whole
feature vectors and is checked before any DRAM traffic is generated.
"""

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .dram import AddressMapping, BurstRequest, DramConfig
from .graph import Graph

HIT, NEW, MERGE = "hit", "new", "merge"


class LayoutError(ValueError):
    """Feature layout violates an alignment premise."""


@dataclass(frozen=True)
class FeatureLayout:
    base_address: int = 0
    alignment_kb: int = 4
    feature_length: int = 256   # elements per feature vector
    element_size: int = 4       # bytes

    def __post_init__(self):
        if self.base_address % (self.alignment_kb * 1024):
            raise LayoutError(
                f"base address {self.base_address:#x} not aligned to {self.alignment_kb} KB"
            )
        if self.feature_length < 1 or self.element_size < 1:
            raise LayoutError("feature_length and element_size must be positive")

    @property
    def feature_bytes(self) -> int:
        return self.feature_length * self.element_size


@dataclass(frozen=True)
class FeatureReadRequest:
    dst: int
    src: int
    address_range: tuple[int, int]


def feature_range(v: int, layout: FeatureLayout) -> tuple[int, int]:
    start = layout.base_address + layout.feature_bytes * v
    return start, start + layout.feature_bytes


def bursts_for_range(
    address_range: tuple[int, int],
    mapping: AddressMapping,
    cfg: DramConfig,
    tag: tuple = (),
) -> list[BurstRequest]:
    """One burst per bytes_per_burst chunk, ascending, with decomposed vectors."""
    start, end = address_range
    bpb = cfg.bytes_per_burst
    if start % bpb or end % bpb:
        raise LayoutError(
            f"range [{start:#x}, {end:#x}) not aligned to the {bpb}-byte burst size"
        )
    return [
        BurstRequest(address=a, vector=mapping.decompose(a), tag=tag)
        for a in range(start, end, bpb)
    ]


@dataclass
class Trace:
    dst: np.ndarray
    src: np.ndarray
    layout: FeatureLayout

    def __len__(self) -> int:
        return len(self.src)

    def requests(self):
        for d, s in zip(self.dst.tolist(), self.src.tolist()):
            yield FeatureReadRequest(dst=d, src=s, address_range=feature_range(s, self.layout))

    @property
    def desired_bytes(self) -> int:
        return len(self.src) * self.layout.feature_bytes


def gen_trace(g: Graph, layout: FeatureLayout, order: str = "sequential-by-destination") -> Trace:
    if order != "sequential-by-destination":
        raise ValueError(f"unsupported traversal order {order!r}")
    src, dst = g.edge_arrays()
    return Trace(dst=dst, src=src, layout=layout)


class LruCache:
    """Whole-feature LRU cache; ``access`` returns True on a hit."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("cache capacity must be >= 1")
        self.capacity = capacity
        self._slots: OrderedDict[int, None] = OrderedDict()

    def __len__(self) -> int:
        return len(self._slots)

    def access(self, key: int) -> bool:
        if key in self._slots:
            self._slots.move_to_end(key)
            return True
        if len(self._slots) >= self.capacity:
            self._slots.popitem(last=False)
        self._slots[key] = None
        return False


@dataclass
class CacheResult:
    miss_mask: np.ndarray  # per trace position, True where the read goes to DRAM
    hits: int
    misses: int


def cache_filter(src_ids: np.ndarray, cache: LruCache | None) -> CacheResult:
    """Classify each feature read as resident (hit) or forwarded (miss).

    Misses are inserted with LRU eviction regardless of any later dropout
    decision; a ``None`` cache forwards everything.
    """
    n = len(src_ids)
    if cache is None:
        return CacheResult(miss_mask=np.ones(n, dtype=bool), hits=0, misses=n)
    miss = np.empty(n, dtype=bool)
    access = cache.access
    for i, s in enumerate(np.asarray(src_ids).tolist()):
        miss[i] = not access(s)
    misses = int(miss.sum())
    return CacheResult(miss_mask=miss, hits=n - misses, misses=misses)


@dataclass
class BurstStream:
    """Flat burst-level view of a miss stream, in DRAM arrival order.

    ``completes[i]`` marks the last burst of its feature read, which is what
    feature-granularity triggers key on.  ``edge_pos`` indexes back into the
    original trace so masks can be reassembled in trace order.
    """

    addresses: np.ndarray  # uint64
    edge_pos: np.ndarray   # int64, position in the original trace
    segment: np.ndarray    # int32, burst index within the feature
    completes: np.ndarray  # bool
    bursts_per_feature: int


def expand_misses(
    trace: Trace,
    miss_positions: np.ndarray,
    src_ids: np.ndarray,
    cfg: DramConfig,
    access_window: int = 1,
) -> BurstStream:
    """Expand miss features to bursts, interleaving ``access_window`` features.

    The window models concurrent in-flight reads: bursts of a window's
    features are emitted round-robin, so with window 1 the expansion is purely
    sequential.  The multiset of emitted addresses always equals the exact
    byte coverage of the requested ranges.
    """
    bpb = cfg.bytes_per_burst
    fb = trace.layout.feature_bytes
    if fb % bpb:
        raise LayoutError(f"feature size {fb} is not a multiple of the {bpb}-byte burst")
    m = fb // bpb
    nf = len(miss_positions)
    if nf == 0:
        empty = np.zeros(0, dtype=np.uint64)
        return BurstStream(empty, empty.astype(np.int64), empty.astype(np.int32),
                           np.zeros(0, dtype=bool), m)
    starts = (trace.layout.base_address + fb * src_ids.astype(np.uint64)).astype(np.uint64)
    segs = np.arange(m, dtype=np.uint64) * np.uint64(bpb)
    addr2d = starts[:, None] + segs[None, :]              # (features, m)
    edge2d = np.repeat(miss_positions.astype(np.int64)[:, None], m, axis=1)
    seg2d = np.repeat(np.arange(m, dtype=np.int32)[None, :], nf, axis=0)

    a = max(1, access_window)
    addr_parts, edge_parts, seg_parts, comp_parts = [], [], [], []
    for lo in range(0, nf, a):
        hi = min(lo + a, nf)
        w = hi - lo
        addr_parts.append(addr2d[lo:hi].T.ravel())
        edge_parts.append(edge2d[lo:hi].T.ravel())
        seg_parts.append(seg2d[lo:hi].T.ravel())
        comp = np.zeros(w * m, dtype=bool)
        comp[-w:] = True  # each feature's last burst lands in the final round
        comp_parts.append(comp)
    return BurstStream(
        addresses=np.concatenate(addr_parts),
        edge_pos=np.concatenate(edge_parts),
        segment=np.concatenate(seg_parts),
        completes=np.concatenate(comp_parts),
        bursts_per_feature=m,
    )


def access_breakdown(hits: int, bursts_per_feature: int, bursts_served: int,
                     row_activations: int) -> dict[str, int]:
    """hit/new/merge counts in burst equivalents (hits count as whole features)."""
    return {
        HIT: hits * bursts_per_feature,
        NEW: row_activations,
        MERGE: bursts_served - row_activations,
    }


def dump_trace_csv(path, trace: Trace, classes=None) -> None:
    """Optional offline-inspection dump: seq, dst, src, start address, class."""
    from ._util import write_csv

    rows = []
    for i, (d, s) in enumerate(zip(trace.dst.tolist(), trace.src.tolist())):
        start, _ = feature_range(s, trace.layout)
        cls = classes[i] if classes is not None else ""
        rows.append((i, d, s, start, cls))
    write_csv(path, ("seq", "dst", "src", "address", "class"), rows)
