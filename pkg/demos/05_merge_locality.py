#!/usr/bin/env python3
"""Merge-only mode: same traffic, better row sessions.

Compares the unmerged LRU baseline against the row-equivalence-class merger
with dropout off.  The merger is a pure permutation of the cache-miss stream,
so the DRAM burst count is untouched; what changes is the session shape:
size-1 sessions move into larger ones and activations (and cycles) fall.
"""

from rowsim.experiment import build_graph, reference_spec, run_cell, variant
from rowsim.merge import RecTable, merge_stream, reference_hasher

spec = reference_spec(num_vertices=2**12, num_edges=2**15, capacity=256)
g = build_graph(spec)

base = run_cell(g, spec, variant("LG-A"), 0.0, "HBM")
merged = run_cell(g, spec, variant("merge-only"), 0.0, "HBM")

print(f"{'':16s} {'baseline':>12s} {'merge-only':>12s}")
print(f"{'bursts':16s} {base.actual_bursts:>12d} {merged.actual_bursts:>12d}")
print(f"{'activations':16s} {base.row_activations:>12d} {merged.row_activations:>12d}")
print(f"{'cycles':16s} {base.cycles:>12d} {merged.cycles:>12d}")
print(f"{'speedup':16s} {'1.00':>12s} {base.cycles / merged.cycles:>12.2f}")

print("\nrow session size distribution (top sizes):")
sizes = sorted(set(base.session_sizes) | set(merged.session_sizes))[:8]
print(f"{'size':>6s} {'baseline':>12s} {'merge-only':>12s}")
for s in sizes:
    print(f"{s:>6d} {base.session_sizes.get(s, 0):>12d} {merged.session_sizes.get(s, 0):>12d}")

hasher, _ = reference_hasher()
res = merge_stream(g.neighbors[:2000], g.neighbors[:2000] * 0, hasher, RecTable(64, 32))
reasons = {}
for _, _, length, reason in res.emission_log:
    reasons[reason] = reasons.get(reason, 0) + 1
print(f"\nmerger emissions on a 2000-edge prefix, by reason: {reasons}")
print("every emission is one whole class queue, so merged reads stay contiguous")
