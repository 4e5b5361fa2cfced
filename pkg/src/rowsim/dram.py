"""DRAM geometry, address-bit mapping, and an open-page row-buffer service model.

The service model is deliberately simple and deterministic: per-bank open-row
state, flat costs per burst (``tCL + burst_cycles`` on a row hit, plus
``tRP + tRCD`` on a row miss), in-order issue within a channel, and total
cycles equal to the busiest channel.  Counts and trends are what downstream
experiments assert on, not absolute latencies.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._util import ilog2, is_pow2


class DramConfigError(ValueError):
    """Inconsistent geometry, mapping, or address outside modeled capacity."""


@dataclass(frozen=True)
class DramTiming:
    t_rcd: int = 14
    t_rp: int = 14
    t_cl: int = 14
    burst_cycles: int = 1

    @property
    def hit_cost(self) -> int:
        return self.t_cl + self.burst_cycles

    @property
    def miss_cost(self) -> int:
        return self.t_rp + self.t_rcd + self.t_cl + self.burst_cycles


@dataclass(frozen=True)
class DramConfig:
    standard: str
    channels: int
    banks_per_channel: int
    columns_per_row: int
    column_size_bits: int
    burst_length: int
    clock_mhz: int
    timing: DramTiming

    def __post_init__(self):
        for name in ("channels", "banks_per_channel", "columns_per_row", "burst_length"):
            if not is_pow2(getattr(self, name)):
                raise DramConfigError(f"{name} must be a power of two")
        if self.columns_per_row % self.burst_length:
            raise DramConfigError("burst_length must divide columns_per_row")
        if self.column_size_bits % 8:
            raise DramConfigError("column_size_bits must be a whole number of bytes")

    @property
    def bytes_per_burst(self) -> int:
        return self.column_size_bits // 8 * self.burst_length

    @property
    def bursts_per_row(self) -> int:
        return self.columns_per_row // self.burst_length

    @property
    def row_bytes(self) -> int:
        return self.columns_per_row * self.column_size_bits // 8


class AddressVector(NamedTuple):
    channel: int
    bank: int
    row: int
    column: int
    burst_offset: int


@dataclass(frozen=True)
class BitField:
    name: str
    shift: int
    width: int

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    def extract(self, addr):
        return (addr >> self.shift) & self.mask if self.width else addr * 0


_FIELD_ORDER = ("burst_offset", "channel", "bank", "column", "row")


@dataclass(frozen=True)
class AddressMapping:
    """Ordered, contiguous bit fields from LSB up: offset, channel, bank, column, row."""

    fields: tuple[BitField, ...]
    capacity_bits: int = 34

    def __post_init__(self):
        names = tuple(f.name for f in self.fields)
        if names != _FIELD_ORDER:
            raise DramConfigError(f"fields must be {_FIELD_ORDER} in order, got {names}")
        shift = 0
        for f in self.fields:
            if f.shift != shift:
                raise DramConfigError(
                    f"field {f.name} starts at bit {f.shift}, expected {shift} "
                    "(fields must be disjoint and cover all bits below the row field)"
                )
            shift += f.width
        if shift > self.capacity_bits:
            raise DramConfigError("fields exceed modeled capacity")

    @classmethod
    def default(cls, cfg: DramConfig, capacity_bits: int = 34) -> "AddressMapping":
        """Small-interleave default: offset, channel, bank, column, then row on top."""
        widths = (
            ilog2(cfg.bytes_per_burst),
            ilog2(cfg.channels),
            ilog2(cfg.banks_per_channel),
            ilog2(cfg.bursts_per_row),
        )
        fields = []
        shift = 0
        for name, width in zip(_FIELD_ORDER[:-1], widths):
            fields.append(BitField(name, shift, width))
            shift += width
        fields.append(BitField("row", shift, capacity_bits - shift))
        return cls(fields=tuple(fields), capacity_bits=capacity_bits)

    def _field(self, name: str) -> BitField:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def row_shift(self) -> int:
        return self._field("row").shift

    @property
    def row_mask(self) -> int:
        return self._field("row").mask

    def decompose(self, address: int) -> AddressVector:
        if address < 0 or address >> self.capacity_bits:
            raise DramConfigError(f"address {address:#x} outside modeled capacity")
        get = lambda n: int(self._field(n).extract(address))
        return AddressVector(
            channel=get("channel"),
            bank=get("bank"),
            row=get("row"),
            column=get("column"),
            burst_offset=get("burst_offset"),
        )

    def recompose(self, vec: AddressVector) -> int:
        addr = 0
        for f in self.fields:
            part = getattr(vec, f.name)
            if part < 0 or part > f.mask:
                raise DramConfigError(f"{f.name} value {part} exceeds field width {f.width}")
            addr |= part << f.shift
        return addr

    def extract(self, name: str, addresses: np.ndarray) -> np.ndarray:
        """Vectorized field extraction for uint64 address arrays."""
        f = self._field(name)
        if f.width == 0:
            return np.zeros(len(addresses), dtype=np.int64)
        return ((addresses >> np.uint64(f.shift)) & np.uint64(f.mask)).astype(np.int64)


def validate_pair(cfg: DramConfig, mapping: AddressMapping) -> None:
    """Field widths must agree with the geometry they index."""
    expect = {
        "burst_offset": ilog2(cfg.bytes_per_burst),
        "channel": ilog2(cfg.channels),
        "bank": ilog2(cfg.banks_per_channel),
        "column": ilog2(cfg.bursts_per_row),
    }
    for name, width in expect.items():
        actual = mapping._field(name).width
        if actual != width:
            raise DramConfigError(
                f"mapping field {name} is {actual} bits but geometry needs {width}"
            )


def decompose(address: int, mapping: AddressMapping) -> AddressVector:
    return mapping.decompose(address)


def recompose(vec: AddressVector, mapping: AddressMapping) -> int:
    return mapping.recompose(vec)


@dataclass
class BurstRequest:
    address: int
    vector: AddressVector
    tag: tuple = ()          # originating (dst, src, segment)
    droppable: bool = True


@dataclass
class DramCounters:
    bursts_served: int = 0
    row_activations: int = 0
    session_sizes: Counter = field(default_factory=Counter)
    cycles: int = 0

    def csv_rows(self):
        yield ("bursts_served", self.bursts_served)
        yield ("row_activations", self.row_activations)
        yield ("cycles", self.cycles)
        for size in sorted(self.session_sizes):
            yield (f"session_{size}", self.session_sizes[size])


def _as_address_array(stream) -> np.ndarray:
    if isinstance(stream, np.ndarray):
        return stream.astype(np.uint64, copy=False)
    return np.fromiter(
        (b.address if isinstance(b, BurstRequest) else int(b) for b in stream),
        dtype=np.uint64,
    )


def service_array(addresses: np.ndarray, cfg: DramConfig, mapping: AddressMapping):
    """Run the open-page model; returns (DramCounters, per-burst activation mask)."""
    validate_pair(cfg, mapping)
    n = len(addresses)
    counters = DramCounters()
    if n == 0:
        return counters, np.zeros(0, dtype=bool)
    addresses = addresses.astype(np.uint64, copy=False)
    if int(addresses.max()) >> mapping.capacity_bits:
        raise DramConfigError("address outside modeled capacity")
    ch = mapping.extract("channel", addresses)
    bank = mapping.extract("bank", addresses)
    row = mapping.extract("row", addresses)
    bank_global = ch * cfg.banks_per_channel + bank

    order = np.argsort(bank_global, kind="stable")
    b_sorted = bank_global[order]
    r_sorted = row[order]
    new_bank = np.empty(n, dtype=bool)
    new_bank[0] = True
    new_bank[1:] = b_sorted[1:] != b_sorted[:-1]
    same_row = np.empty(n, dtype=bool)
    same_row[0] = False
    same_row[1:] = r_sorted[1:] == r_sorted[:-1]
    act_sorted = new_bank | ~same_row

    activated = np.empty(n, dtype=bool)
    activated[order] = act_sorted

    starts = np.flatnonzero(act_sorted)
    sizes = np.diff(np.append(starts, n))
    uniq, freq = np.unique(sizes, return_counts=True)

    counters.bursts_served = n
    counters.row_activations = int(act_sorted.sum())
    counters.session_sizes = Counter(dict(zip(uniq.tolist(), freq.tolist())))

    t = cfg.timing
    per_channel_bursts = np.bincount(ch, minlength=cfg.channels)
    per_channel_acts = np.bincount(ch, weights=activated.astype(np.int64), minlength=cfg.channels)
    busy = per_channel_bursts * t.hit_cost + per_channel_acts * (t.t_rp + t.t_rcd)
    counters.cycles = int(busy.max())
    return counters, activated


def service(stream, cfg: DramConfig, mapping: AddressMapping) -> DramCounters:
    """Service an ordered burst stream and return locality counters."""
    counters, _ = service_array(_as_address_array(stream), cfg, mapping)
    return counters


# Geometry per standard: columns/row, column bits, burst length, clock MHz.
# Channel and bank counts are desk-scale modeling defaults (one channel, eight
# banks) so a single filter instance sees the whole stream; both are
# configurable through the experiment config file.
_STANDARDS = {
    "DDR3": (1024, 64, 8, 1066),
    "DDR4": (1024, 64, 8, 3200),
    "GDDR5": (1024, 32, 8, 2000),
    "GDDR6": (1024, 32, 16, 3500),
    "LPDDR4": (1024, 64, 16, 4266),
    "LPDDR5": (1024, 64, 16, 6400),
    "HBM": (128, 128, 2, 500),
    "HBM2": (64, 128, 2, 1200),
}


def preset(
    standard: str,
    channels: int = 1,
    banks_per_channel: int = 8,
    timing: DramTiming | None = None,
) -> tuple[DramConfig, AddressMapping]:
    """Config and default mapping for a named DRAM standard."""
    if standard not in _STANDARDS:
        raise DramConfigError(
            f"unknown standard {standard!r}; supported: {', '.join(sorted(_STANDARDS))}"
        )
    columns, colbits, burst, clock = _STANDARDS[standard]
    if timing is None:
        timing = DramTiming(burst_cycles=max(1, burst // 2))
    cfg = DramConfig(
        standard=standard,
        channels=channels,
        banks_per_channel=banks_per_channel,
        columns_per_row=columns,
        column_size_bits=colbits,
        burst_length=burst,
        clock_mhz=clock,
        timing=timing,
    )
    return cfg, AddressMapping.default(cfg)
