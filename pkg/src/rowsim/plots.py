"""SVG chart emission for experiment reports.

One chart per figure family and standard: normalized cycles / accesses /
activations against droprate, the row-session size distribution, and the
stacked hit/new/merge access breakdown.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiment import ExperimentReport  # noqa: E402

_SERIES_METRICS = (
    ("norm_cycles", "cycles", "normalized execution cycles"),
    ("norm_bursts", "access", "normalized actual DRAM accesses"),
    ("norm_activations", "activations", "normalized row activations"),
)


def _save(fig, path, created):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    created.append(path)


def emit_plots(report: ExperimentReport, out_dir: str, breakdown_alpha: float = 0.5) -> list:
    """Write all chart families; returns the created file paths."""
    if not report.cells:
        raise ValueError("report has no cells to plot")
    os.makedirs(out_dir, exist_ok=True)
    created: list[str] = []
    variants = list(dict.fromkeys(c.variant for c in report.cells))
    for standard in report.spec.standards:
        cells = [c for c in report.cells if c.standard == standard]

        for attr, slug, label in _SERIES_METRICS:
            fig, ax = plt.subplots(figsize=(5, 3.4))
            for v in variants:
                pts = sorted((c.alpha, getattr(c, attr)) for c in cells if c.variant == v)
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=v)
            ax.set_xlabel("droprate")
            ax.set_ylabel(label)
            ax.set_title(f"{label} vs droprate ({standard})")
            ax.legend(fontsize=7)
            _save(fig, os.path.join(out_dir, f"{slug}_vs_alpha_{standard}.svg"), created)

        alphas = sorted({c.alpha for c in cells})
        pick = min(alphas, key=lambda a: abs(a - breakdown_alpha))

        fig, ax = plt.subplots(figsize=(5, 3.4))
        width = 0.8 / max(1, len(variants))
        sizes = sorted({s for c in cells if c.alpha == pick for s in c.session_sizes})
        for i, v in enumerate(variants):
            cell = next((c for c in cells if c.variant == v and c.alpha == pick), None)
            if cell is None:
                continue
            xs = [s + i * width for s in range(len(sizes))]
            ys = [cell.session_sizes.get(s, 0) for s in sizes]
            ax.bar(xs, ys, width=width, label=v)
        ax.set_xticks(range(len(sizes)), [str(s) for s in sizes])
        ax.set_xlabel("row session size (bursts)")
        ax.set_ylabel("count")
        ax.set_title(f"row session size distribution at droprate {pick} ({standard})")
        ax.legend(fontsize=7)
        _save(fig, os.path.join(out_dir, f"sessions_{standard}.svg"), created)

        fig, ax = plt.subplots(figsize=(5, 3.4))
        bottoms = [0] * len(variants)
        for cls in ("hit_bursts", "new_bursts", "merge_bursts"):
            vals = []
            for v in variants:
                cell = next((c for c in cells if c.variant == v and c.alpha == pick), None)
                vals.append(getattr(cell, cls) if cell else 0)
            ax.bar(variants, vals, bottom=bottoms, label=cls.split("_")[0])
            bottoms = [b + v for b, v in zip(bottoms, vals)]
        ax.set_ylabel("burst-equivalent accesses")
        ax.set_title(f"access breakdown at droprate {pick} ({standard})")
        ax.legend(fontsize=7)
        _save(fig, os.path.join(out_dir, f"breakdown_{standard}.svg"), created)
    return created
