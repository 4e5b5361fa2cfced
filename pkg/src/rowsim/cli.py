"""Command-line front end: run experiments, compare reports, render plots."""

import argparse
import os
import sys

from . import experiment
from ._util import fmt_num, write_csv


def _spec_from_args(args) -> experiment.ExperimentSpec:
    if args.config:
        spec = experiment.load_spec(args.config)
    else:
        spec = experiment.ExperimentSpec()
    overrides = {}
    if args.variant:
        overrides["variants"] = tuple(args.variant)
    if args.alpha is not None:
        overrides["alphas"] = tuple(args.alpha)
    if args.standard:
        overrides["standards"] = tuple(args.standard)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace

        spec = replace(spec, **overrides)
    return spec


def cmd_run(args) -> int:
    spec = _spec_from_args(args)
    report = experiment.run(spec, out_dir=args.out_dir)
    print(f"wrote metrics.csv, sessions.csv, manifest.json to {args.out_dir}")
    for c in report.cells:
        print(
            f"{c.variant:10s} alpha={c.alpha:<4} {c.standard:6s} "
            f"cycles={c.cycles} bursts={c.actual_bursts} acts={c.row_activations} "
            f"speedup={fmt_num(c.speedup)}"
        )
    return 0


def cmd_compare(args) -> int:
    cells_a = experiment.cells_from_csv(os.path.join(args.report_a, "metrics.csv"))
    cells_b = experiment.cells_from_csv(os.path.join(args.report_b, "metrics.csv"))
    rows = experiment.compare(cells_a, cells_b)
    out = [(r.variant, r.alpha, r.standard, r.speedup, r.access_reduction,
            r.activation_reduction) for r in rows]
    header = ("pair", "alpha", "standard", "speedup", "access_reduction",
              "activation_reduction")
    if args.out:
        write_csv(args.out, header, out)
        print(f"wrote {args.out}")
    else:
        print(",".join(header))
        for row in out:
            print(",".join(fmt_num(v) for v in row))
    return 0


def cmd_plot(args) -> int:
    from . import plots

    spec = experiment.load_spec(os.path.join(args.report, "manifest.json"))
    report = experiment.ExperimentReport(
        spec=spec,
        cells=experiment.cells_from_csv(os.path.join(args.report, "metrics.csv")),
        baselines={},
    )
    _load_sessions(report, os.path.join(args.report, "sessions.csv"))
    report.cells = [c for c in report.cells if c.variant != "baseline"]
    charts = plots.emit_plots(report, args.out_dir)
    for path in charts:
        print(path)
    return 0


def _load_sessions(report, path) -> None:
    if not os.path.exists(path):
        return
    with open(path) as fh:
        fh.readline()
        for line in fh:
            v, alpha, standard, size, count = line.strip().split(",")
            for c in report.cells:
                if c.variant == v and abs(c.alpha - float(alpha)) < 1e-9 and c.standard == standard:
                    c.session_sizes[int(size)] = int(count)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rowsim",
        description="Trace-driven DRAM row-locality simulator for GNN aggregation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment matrix")
    p_run.add_argument("--config", help="INI config or JSON manifest")
    p_run.add_argument("--out-dir", required=True)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--variant", action="append", help="repeatable variant name")
    p_run.add_argument("--alpha", action="append", type=float, help="repeatable droprate")
    p_run.add_argument("--standard", action="append", help="repeatable DRAM standard")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="delta table between two report dirs")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b")
    p_cmp.add_argument("--out", help="write CSV instead of printing")
    p_cmp.set_defaults(func=cmd_compare)

    p_plot = sub.add_parser("plot", help="render SVG charts from a report dir")
    p_plot.add_argument("report")
    p_plot.add_argument("--out-dir", required=True)
    p_plot.set_defaults(func=cmd_plot)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
