"""CSR graph container, edge-list IO, synthetic generators, and locality metrics.

Graphs are stored compressed by destination: ``offsets[d]:offsets[d+1]`` indexes
the source vertices feeding destination ``d``.  Duplicate edges are kept on
purpose (aggregation issues one feature read per edge), so the structure is a
multigraph.  The traversal order used everywhere is sequential by destination.
"""

import io
import struct
from dataclasses import dataclass

import numpy as np

from ._util import ilog2, is_pow2


class GraphError(ValueError):
    """Malformed edge-list input or inconsistent CSR arrays."""


@dataclass(eq=False)
class Graph:
    offsets: np.ndarray    # int64, length num_vertices + 1
    neighbors: np.ndarray  # int64, source vertex per edge, grouped by destination

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=np.int64)
        self.neighbors = np.asarray(self.neighbors, dtype=np.int64)
        self.validate()

    @property
    def num_vertices(self) -> int:
        return len(self.offsets) - 1

    @property
    def num_edges(self) -> int:
        return len(self.neighbors)

    def validate(self) -> None:
        if len(self.offsets) < 1 or self.offsets[0] != 0:
            raise GraphError("offsets must start with 0")
        if np.any(np.diff(self.offsets) < 0):
            raise GraphError("offsets must be non-decreasing")
        if self.offsets[-1] != len(self.neighbors):
            raise GraphError("offsets[-1] must equal the neighbor count")
        if len(self.neighbors) and (
            self.neighbors.min() < 0 or self.neighbors.max() >= self.num_vertices
        ):
            raise GraphError("neighbor id out of range")

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(src, dst) arrays in traversal (destination-major) order."""
        dst = np.repeat(np.arange(self.num_vertices, dtype=np.int64), self.degrees())
        return self.neighbors.copy(), dst

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
        )


@dataclass(frozen=True)
class GraphStats:
    density: float            # |E| / |V|^2
    xi_arith: float | None    # mean |index difference| between consecutive accesses
    xi_geom: float | None     # geometric mean over the strictly positive differences


def _csr_from_edges(src: np.ndarray, dst: np.ndarray, num_vertices: int) -> Graph:
    if len(src) and (src.min() < 0 or dst.min() < 0):
        raise GraphError("negative vertex id")
    if len(src) and (src.max() >= num_vertices or dst.max() >= num_vertices):
        bad = max(int(src.max()), int(dst.max()))
        raise GraphError(f"vertex id {bad} out of range for {num_vertices} vertices")
    order = np.argsort(dst, kind="stable")  # stable: keeps file order per destination
    counts = np.bincount(dst, minlength=num_vertices) if len(dst) else np.zeros(num_vertices, dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return Graph(offsets=offsets, neighbors=src[order])


def load_edge_list(source, fmt: str = "text", num_vertices: int | None = None) -> Graph:
    """Build a CSR graph from an edge list.

    ``source`` may be a path, bytes, or a binary file object.  Text format is
    one ``src dst`` pair per line with ``#`` comments; binary format is a
    little-endian header (u64 vertex count, u64 edge count) followed by u32
    pairs.  ``num_vertices`` is required for text input unless it should be
    inferred as ``max id + 1``.
    """
    data = _read_bytes(source)
    if fmt == "text":
        src, dst = _parse_text(data)
        if num_vertices is None:
            num_vertices = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1) if len(src) else 0
        return _csr_from_edges(src, dst, num_vertices)
    if fmt == "binary":
        if len(data) < 16:
            raise GraphError("binary edge list shorter than its 16-byte header")
        nv, ne = struct.unpack("<QQ", data[:16])
        body = np.frombuffer(data[16:], dtype="<u4")
        if len(body) != 2 * ne:
            raise GraphError(f"expected {2 * ne} u32 values, found {len(body)}")
        pairs = body.astype(np.int64).reshape(-1, 2)
        if num_vertices is not None and num_vertices != nv:
            raise GraphError(f"declared {num_vertices} vertices but header says {nv}")
        return _csr_from_edges(pairs[:, 0], pairs[:, 1], int(nv))
    raise GraphError(f"unknown edge-list format {fmt!r}")


def _read_bytes(source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return fh.read()
    if hasattr(source, "read"):
        data = source.read()
        return data.encode() if isinstance(data, str) else data
    raise GraphError(f"unsupported edge-list source {type(source).__name__}")


def _parse_text(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    src, dst = [], []
    for lineno, raw in enumerate(io.BytesIO(data).read().decode().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'src dst', got {raw!r}")
        try:
            s, d = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer vertex id in {raw!r}") from None
        src.append(s)
        dst.append(d)
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def save_edge_list(g: Graph, target, fmt: str = "text") -> None:
    """Serialize destination-major so a reload reproduces the same CSR."""
    src, dst = g.edge_arrays()
    if fmt == "text":
        with open(target, "w") as fh:
            for s, d in zip(src.tolist(), dst.tolist()):
                fh.write(f"{s} {d}\n")
        return
    if fmt == "binary":
        with open(target, "wb") as fh:
            fh.write(struct.pack("<QQ", g.num_vertices, g.num_edges))
            inter = np.empty(2 * g.num_edges, dtype="<u4")
            inter[0::2] = src
            inter[1::2] = dst
            fh.write(inter.tobytes())
        return
    raise GraphError(f"unknown edge-list format {fmt!r}")


def synth_graph(
    kind: str,
    num_vertices: int,
    num_edges: int,
    seed: int,
    a: float = 0.57,
    b: float = 0.19,
    c: float = 0.19,
) -> Graph:
    """Deterministic synthetic graph with exactly ``num_edges`` edges.

    ``uniform-random`` draws endpoints independently; ``rmat`` uses the usual
    recursive quadrant construction (vertex count must be a power of two) and
    produces a heavier-tailed degree distribution at equal edge count.
    """
    if num_vertices < 1:
        raise GraphError("num_vertices must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "uniform-random":
        src = rng.integers(0, num_vertices, num_edges, dtype=np.int64)
        dst = rng.integers(0, num_vertices, num_edges, dtype=np.int64)
    elif kind == "rmat":
        if not is_pow2(num_vertices):
            raise GraphError("rmat requires a power-of-two vertex count")
        if not 0.0 < a + b + c <= 1.0:
            raise GraphError("rmat probabilities must satisfy 0 < a+b+c <= 1")
        scale = ilog2(num_vertices)
        src = np.zeros(num_edges, dtype=np.int64)
        dst = np.zeros(num_edges, dtype=np.int64)
        cuts = np.array([a, a + b, a + b + c])
        for _ in range(scale):
            quad = np.searchsorted(cuts, rng.random(num_edges), side="right")
            src = (src << 1) | (quad >> 1)
            dst = (dst << 1) | (quad & 1)
    else:
        raise GraphError(f"unknown generator kind {kind!r}")
    return _csr_from_edges(src, dst, num_vertices)


def stats(g: Graph, traversal: str = "sequential-by-destination") -> GraphStats:
    """Density plus arithmetic/geometric irregularity of the access sequence.

    Irregularity is taken over absolute index differences between consecutive
    neighbor accesses along the traversal; zeros are excluded from the
    geometric mean only (a single zero would collapse it).
    """
    if traversal != "sequential-by-destination":
        raise GraphError(f"unsupported traversal {traversal!r}")
    density = g.num_edges / g.num_vertices**2
    seq = g.neighbors
    if len(seq) < 2:
        return GraphStats(density=density, xi_arith=None, xi_geom=None)
    diffs = np.abs(np.diff(seq))
    xi_a = float(diffs.mean())
    positive = diffs[diffs > 0]
    xi_g = float(np.exp(np.log(positive).mean())) if len(positive) else None
    return GraphStats(density=density, xi_arith=xi_a, xi_geom=xi_g)
