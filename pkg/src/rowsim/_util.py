"""Small shared helpers: power-of-two math, counter-based RNG, stable CSV output."""

import numpy as np

_U64 = np.uint64
_MIX1 = np.uint64(0x9E3779B97F4A7C15)
_MIX2 = np.uint64(0xBF58476D1CE4E5B9)
_MIX3 = np.uint64(0x94D049BB133111EB)


def is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def ilog2(n: int) -> int:
    if not is_pow2(n):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


def counter_uniforms(seed: int, counters: np.ndarray) -> np.ndarray:
    """Map (seed, counter) pairs to uniforms in [0, 1) via a splitmix64-style mix.

    Purely a function of its inputs, so masks derived from it do not depend on
    iteration order or on how many draws happened before.
    """
    with np.errstate(over="ignore"):
        x = counters.astype(_U64) + _U64(seed & 0xFFFFFFFFFFFFFFFF) * _MIX1
        x = x + _MIX1
        x = (x ^ (x >> _U64(30))) * _MIX2
        x = (x ^ (x >> _U64(27))) * _MIX3
        x = x ^ (x >> _U64(31))
    # keep the top 53 bits so the float64 conversion is exact
    return (x >> _U64(11)).astype(np.float64) / float(1 << 53)


def fmt_num(x) -> str:
    """Stable text form for CSV cells (no float repr jitter across runs)."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def write_csv(path, header, rows) -> None:
    """Write rows with '\\n' newlines and fixed number formatting (byte-stable)."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_num(v) for v in row) + "\n")
