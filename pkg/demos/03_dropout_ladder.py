#!/usr/bin/env python3
"""The variant ladder across a droprate sweep, with SVG charts.

Runs LG-A through LG-T on a scaled-down workload for droprates 0.0 to 1.0 and
prints the normalized metric table.  The element-masked baseline LG-A barely
moves; the per-burst filter LG-B cuts traffic linearly; the row-integrity
variants LG-R/S/T additionally collapse row activations by keeping or
dropping whole row queues; LG-T's merger clusters what survives.
"""

import os

from rowsim.experiment import reference_spec, run, sweep_alphas
from rowsim.plots import emit_plots

OUT = os.path.join(os.path.dirname(__file__), "out", "ladder")

spec = reference_spec(num_vertices=2**12, num_edges=2**15, capacity=256,
                      alphas=sweep_alphas())
report = run(spec, out_dir=OUT)

print(f"{'variant':9s} {'alpha':>5s} {'norm cycles':>12s} {'norm bursts':>12s} "
      f"{'norm activations':>17s} {'speedup':>8s}")
for cell in report.cells:
    if cell.alpha in (0.0, 0.3, 0.5, 0.8):
        print(f"{cell.variant:9s} {cell.alpha:>5.1f} {cell.norm_cycles:>12.3f} "
              f"{cell.norm_bursts:>12.3f} {cell.norm_activations:>17.3f} "
              f"{cell.speedup:>8.2f}")

charts = emit_plots(report, OUT)
print(f"\nwrote {len(charts)} charts and CSV reports under {OUT}")
