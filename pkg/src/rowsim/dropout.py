"""Locality-aware dropout: burst filter, locality group table, row-drop balance.

The pipeline stage here takes an expanded burst stream, optionally thins it
with a per-burst filter, then groups survivors into row-keyed FIFO queues (the
locality group table).  A trigger decides when grouped bursts are released;
the release step drops or keeps whole queues, steering a persistent balance so
the long-run dropped fraction converges to the configured droprate while each
DRAM row's pending bursts stay together.
"""

from dataclasses import dataclass, field

import numpy as np

from ._util import counter_uniforms
from .dram import AddressMapping, DramConfig
from .trace import BurstStream

FILTER_MODES = ("element-mask", "effective-ratio", "burst")
CRITERIA_MODES = ("longest-queue", "any-queue", "channel-balance")


@dataclass(frozen=True)
class BurstFilter:
    """Per-burst drop decision driven by reproducible per-element masks.

    element-mask     drop a burst only when all K of its elements are masked
    effective-ratio  drop when the kept fraction of its elements is below theta
    burst            one Bernoulli(alpha) draw per burst (linear thinning)
    """

    droprate: float
    elements_per_burst: int
    mode: str = "element-mask"
    theta: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.droprate <= 1.0:
            raise ValueError("droprate must be in [0, 1]")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be in [0, 1]")
        if self.mode not in FILTER_MODES:
            raise ValueError(f"mode must be one of {FILTER_MODES}")

    def kept_element_fraction(self, edge_ids: np.ndarray, segments: np.ndarray) -> np.ndarray:
        k = self.elements_per_burst
        kept = np.zeros(len(edge_ids), dtype=np.int64)
        base = edge_ids.astype(np.uint64) * np.uint64(1 << 24) + segments.astype(np.uint64) * np.uint64(k)
        for e in range(k):
            u = counter_uniforms(self.seed, base + np.uint64(e))
            kept += (u >= self.droprate).astype(np.int64)
        return kept / k

    def drop_mask(self, edge_ids: np.ndarray, segments: np.ndarray) -> np.ndarray:
        """True where the burst is dropped; pure function of (seed, edge, segment)."""
        if self.droprate == 0.0:
            return np.zeros(len(edge_ids), dtype=bool)
        if self.mode == "burst":
            tags = (edge_ids.astype(np.uint64) * np.uint64(1 << 24)
                    + np.uint64(1 << 23) + segments.astype(np.uint64))
            return counter_uniforms(self.seed, tags) < self.droprate
        frac = self.kept_element_fraction(edge_ids, segments)
        if self.mode == "element-mask":
            return frac == 0.0
        return frac < self.theta


@dataclass(frozen=True)
class Trigger:
    """When to release grouped bursts.

    per-feature       fire at the end of every feature read
    every-n-features  fire at the end of every n-th feature read
    occupancy         fire when the table reaches entry_threshold entries or
                      any queue reaches depth_threshold bursts
    """

    policy: str = "per-feature"
    n: int = 1
    entry_threshold: int = 0
    depth_threshold: int = 0

    def __post_init__(self):
        if self.policy not in ("per-feature", "every-n-features", "occupancy"):
            raise ValueError(f"unknown trigger policy {self.policy!r}")
        if self.policy == "every-n-features" and self.n < 1:
            raise ValueError("n must be >= 1")


def row_keys(addresses: np.ndarray, mapping: AddressMapping) -> np.ndarray:
    """Row identifier per burst: the (row, bank, channel) prefix packed to int.

    This names a physical row buffer, so keys from different channels never
    collide and a per-channel filter split would partition them cleanly.
    """
    ch_bits = mapping._field("channel").width
    bank_bits = mapping._field("bank").width
    ch_shift = mapping._field("channel").shift
    low_bits = ch_bits + bank_bits
    prefix = (addresses >> np.uint64(ch_shift)).astype(np.int64)
    chan_bank = prefix & ((1 << low_bits) - 1)
    row = (addresses >> np.uint64(mapping.row_shift)).astype(np.int64)
    return (row << low_bits) | chan_bank


def key_channel(key: int, mapping: AddressMapping) -> int:
    """Channel index back out of a packed row key."""
    ch_bits = mapping._field("channel").width
    return key & ((1 << ch_bits) - 1) if ch_bits else 0


class LocalityGroupTable:
    """Associative row-keyed table of FIFO burst queues with bounded shape."""

    def __init__(self, max_entries: int, max_depth: int):
        if max_entries < 1 or max_depth < 1:
            raise ValueError("table dimensions must be >= 1")
        self.max_entries = max_entries
        self.max_depth = max_depth
        self.entries: dict[int, list] = {}
        self.occupancy = 0

    def __len__(self) -> int:
        return len(self.entries)

    def pop(self, key: int) -> list:
        q = self.entries.pop(key)
        self.occupancy -= len(q)
        return q

    def queue_sizes(self) -> dict[int, int]:
        return {k: len(q) for k, q in self.entries.items()}


@dataclass
class RowDropoutState:
    """Persistent balance steering keep/drop; survives across trigger firings."""

    alpha: float
    criteria: str = "longest-queue"
    channel_quota: int = 32
    delta: float = 0.0
    kept_total: int = 0
    dropped_total: int = 0
    criteria_misses: int = 0
    delta_history: list = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("row dropout needs alpha in (0, 1)")
        if self.criteria not in CRITERIA_MODES:
            raise ValueError(f"criteria must be one of {CRITERIA_MODES}")


def select_extreme(table: LocalityGroupTable, mode: str, criteria=None,
                   rng: np.random.Generator | None = None,
                   channel_of=None, kept_per_channel=None, quota: int = 0):
    """Key of a minimal/maximal-length queue; uniform among ties.

    In ``longest`` mode a criteria constraint may narrow the candidate set;
    if nothing satisfies it the caller falls back to the unconstrained pick.
    Returns (key, criteria_satisfied).
    """
    if not table.entries:
        raise ValueError("table is empty")
    keys = list(table.entries.keys())
    satisfied = True
    if mode == "longest" and criteria == "channel-balance" and channel_of is not None:
        floor = min(kept_per_channel.values()) if kept_per_channel else 0
        allowed = [k for k in keys if kept_per_channel.get(channel_of(k), 0) <= floor + quota]
        if allowed:
            keys = allowed
        else:
            satisfied = False
    if mode == "longest" and criteria == "any-queue":
        best = keys
    else:
        sizes = [len(table.entries[k]) for k in keys]
        target = min(sizes) if mode == "shortest" else max(sizes)
        best = [k for k, s in zip(keys, sizes) if s == target]
    if len(best) == 1 or rng is None:
        return best[0], satisfied
    return best[int(rng.integers(len(best)))], satisfied


def ordering_output(table: LocalityGroupTable, n: int, state: RowDropoutState,
                    rng: np.random.Generator | None = None,
                    channel_of=None, kept_per_channel=None):
    """Release up to ``n`` bursts as whole queues, steering the drop balance.

    While the table is non-empty and fewer than n bursts have moved: a
    positive test value ``delta + (k+d)*alpha - d`` drops the shortest queue,
    otherwise the longest queue satisfying the criteria is kept.  The balance
    is updated once at the end of the call.
    """
    kept: list = []
    dropped: list = []
    k = d = 0
    entries = table.entries
    fast = state.criteria == "longest-queue"
    if fast and entries:
        keys = list(entries.keys())
        if rng is not None and len(keys) > 1:
            perm = rng.permutation(len(keys))
            keys = [keys[i] for i in perm]  # pre-shuffle: uniform tie order
        keys.sort(key=lambda kk: len(entries[kk]))
        lo, hi = 0, len(keys) - 1
        while lo <= hi and k + d < n:
            if state.delta + (k + d) * state.alpha - d > 0:
                q = table.pop(keys[lo])
                lo += 1
                dropped.extend(q)
                d += len(q)
            else:
                q = table.pop(keys[hi])
                hi -= 1
                kept.extend(q)
                k += len(q)
    else:
        while entries and k + d < n:
            if state.delta + (k + d) * state.alpha - d > 0:
                key, _ = select_extreme(table, "shortest", rng=rng)
                q = table.pop(key)
                dropped.extend(q)
                d += len(q)
            else:
                key, ok = select_extreme(
                    table, "longest", criteria=state.criteria, rng=rng,
                    channel_of=channel_of, kept_per_channel=kept_per_channel,
                    quota=state.channel_quota,
                )
                if not ok:
                    state.criteria_misses += 1
                q = table.pop(key)
                kept.extend(q)
                k += len(q)
                if kept_per_channel is not None and channel_of is not None:
                    ch = channel_of(key)
                    kept_per_channel[ch] = kept_per_channel.get(ch, 0) + len(q)
    state.delta += (k + d) * state.alpha - d
    state.kept_total += k
    state.dropped_total += d
    state.delta_history.append(state.delta)
    return kept, dropped


@dataclass
class GroupResult:
    """Outcome of one pass through filter + table for a burst stream.

    Index arrays point into the input stream; the partition invariant is
    ``filtered + kept + dropped + residual == len(stream)``.
    """

    kept: np.ndarray            # emitted as kept, in emission order
    dropped: np.ndarray         # dropped by the row filter
    filter_dropped: np.ndarray  # dropped by the per-burst filter
    residual: np.ndarray        # drained as kept at end of stream
    forced_outputs: int
    criteria_misses: int
    kept_total: int             # balance-accounted kept bursts
    dropped_total: int          # balance-accounted dropped bursts
    delta_history: list

    @property
    def kept_stream(self) -> np.ndarray:
        return np.concatenate([self.kept, self.residual])


def group_bursts(
    stream: BurstStream,
    burst_filter: BurstFilter | None,
    trigger: Trigger | None,
    table: LocalityGroupTable | None,
    state: RowDropoutState | None,
    mapping: AddressMapping,
    cfg: DramConfig,
    rng: np.random.Generator | None = None,
    output_batch: int | None = None,
) -> GroupResult:
    """Run the grouping/dropout stage over an expanded burst stream.

    Bursts failing the filter are discarded; survivors are appended to their
    row queue, the trigger is notified after each append, and a firing trigger
    releases queues through :func:`ordering_output` (``output_batch`` bursts,
    or the whole occupancy when unset).  Without a trigger plus state the
    table is bypassed entirely and filter survivors stream straight through.
    A full table forces out its longest queue as kept (counted, not balanced).
    """
    n = len(stream.addresses)
    empty = np.zeros(0, dtype=np.int64)
    if burst_filter is not None:
        drops = burst_filter.drop_mask(stream.edge_pos, stream.segment)
    else:
        drops = np.zeros(n, dtype=bool)
    filter_dropped = np.flatnonzero(drops).astype(np.int64)

    if table is None or state is None or trigger is None:
        kept = np.flatnonzero(~drops).astype(np.int64)
        return GroupResult(kept=kept, dropped=empty, filter_dropped=filter_dropped,
                           residual=empty, forced_outputs=0, criteria_misses=0,
                           kept_total=0, dropped_total=0,
                           delta_history=[] if state is None else state.delta_history)

    keys = row_keys(stream.addresses, mapping)
    key_list = keys.tolist()
    comp_list = stream.completes.tolist()
    drop_list = drops.tolist()

    kept_parts: list[int] = []
    dropped_parts: list[int] = []
    forced = 0
    features_done = 0
    per_feature = trigger.policy == "per-feature"
    every_n = trigger.policy == "every-n-features"
    occupancy = trigger.policy == "occupancy"
    entry_thr = trigger.entry_threshold or table.max_entries
    depth_thr = trigger.depth_threshold or table.max_depth
    entries = table.entries
    fire_pending = False
    chan_of = kept_pc = None
    if state.criteria == "channel-balance":
        chan_of = lambda key: key_channel(key, mapping)
        kept_pc = {c: 0 for c in range(cfg.channels)}

    for i in range(n):
        completes = comp_list[i]
        if not drop_list[i]:
            key = key_list[i]
            q = entries.get(key)
            if q is None:
                if len(entries) >= table.max_entries:
                    longest, _ = select_extreme(table, "longest", rng=rng)
                    kept_parts.extend(table.pop(longest))
                    forced += 1
                q = entries[key] = []
            elif len(q) >= table.max_depth:
                kept_parts.extend(table.pop(key))
                forced += 1
                q = entries[key] = []
            q.append(i)
            table.occupancy += 1
            if occupancy and (len(entries) >= entry_thr or len(q) >= depth_thr):
                fire_pending = True
        if completes:
            features_done += 1
            if per_feature or (every_n and features_done % trigger.n == 0):
                fire_pending = True
        if fire_pending:
            fire_pending = False
            size = table.occupancy if output_batch is None else min(output_batch, table.occupancy)
            if size:
                k_idx, d_idx = ordering_output(table, size, state, rng=rng,
                                               channel_of=chan_of,
                                               kept_per_channel=kept_pc)
                kept_parts.extend(k_idx)
                dropped_parts.extend(d_idx)

    residual_parts: list[int] = []
    for key in list(entries.keys()):
        residual_parts.extend(table.pop(key))

    return GroupResult(
        kept=np.asarray(kept_parts, dtype=np.int64),
        dropped=np.asarray(dropped_parts, dtype=np.int64),
        filter_dropped=filter_dropped,
        residual=np.asarray(residual_parts, dtype=np.int64),
        forced_outputs=forced,
        criteria_misses=state.criteria_misses,
        kept_total=state.kept_total,
        dropped_total=state.dropped_total,
        delta_history=state.delta_history,
    )


def emit_mask(num_edges: int, bursts_per_feature: int, stream: BurstStream,
              dropped_indices: np.ndarray) -> np.ndarray:
    """Boolean per (edge, burst segment) in trace order; False means dropped.

    Cache hits never reach the stream, so their segments stay True (the data
    was served on chip).  Downstream consumers substitute zeros for False
    segments and may scale kept data; that scaling is recorded metadata here,
    not applied.
    """
    mask = np.ones(num_edges * bursts_per_feature, dtype=bool)
    if len(dropped_indices):
        edges = stream.edge_pos[dropped_indices].astype(np.int64)
        segs = stream.segment[dropped_indices].astype(np.int64)
        mask[edges * bursts_per_feature + segs] = False
    return mask


def pack_mask(mask: np.ndarray) -> bytes:
    return np.packbits(mask.astype(np.uint8)).tobytes()


def dump_mask(path, mask: np.ndarray) -> None:
    """Write the keep/drop mask as a packed bitstream file."""
    with open(path, "wb") as fh:
        fh.write(pack_mask(mask))
