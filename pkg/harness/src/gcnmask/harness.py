"""Accuracy table across droprates and mask granularities."""

from dataclasses import dataclass

import numpy as np

from .data import Dataset, citation_style
from .gcn import train_once
from .masks import MaskSpec, load_rowclass_fixture, row_class_of


@dataclass
class TrialSummary:
    granularity: str
    alpha: float
    mean: float
    std: float
    trials: int
    discarded: int


def train_eval(
    data: Dataset,
    spec: MaskSpec | None,
    trials: int = 10,
    epochs: int = 150,
    row_classes=None,
) -> TrialSummary:
    """Mean test accuracy over seeded trials; NaN-diverged trials are discarded."""
    accs = []
    discarded = 0
    for seed in range(trials):
        acc = train_once(data, spec, seed=seed, epochs=epochs, row_classes=row_classes)
        if acc is None:
            discarded += 1
            continue
        accs.append(acc)
    arr = np.asarray(accs)
    return TrialSummary(
        granularity=spec.granularity if spec else "none",
        alpha=spec.alpha if spec else 0.0,
        mean=float(arr.mean()),
        std=float(arr.std()),
        trials=len(accs),
        discarded=discarded,
    )


def run_table(
    fixture_path: str,
    alphas=(0.0, 0.1, 0.2, 0.5),
    granularities=("burst-segment", "row-class"),
    trials: int = 10,
    epochs: int = 150,
    data: Dataset | None = None,
) -> list:
    """The accuracy grid: one row per granularity, one column per droprate."""
    if data is None:
        data = citation_style(seed=0)
    fixture = load_rowclass_fixture(fixture_path)
    classes = row_class_of(np.arange(data.num_nodes), fixture["config"])
    rows = []
    for gran in granularities:
        for alpha in alphas:
            spec = MaskSpec(granularity=gran, alpha=alpha)
            summary = train_eval(data, spec, trials=trials, epochs=epochs,
                                 row_classes=classes if gran == "row-class" else None)
            rows.append(summary)
    return rows


def write_table_csv(path: str, rows: list) -> None:
    alphas = sorted({r.alpha for r in rows})
    grans = list(dict.fromkeys(r.granularity for r in rows))
    with open(path, "w", newline="") as fh:
        fh.write("granularity," + ",".join(f"alpha_{a:g}" for a in alphas) + "\n")
        for gran in grans:
            cells = []
            for a in alphas:
                match = [r for r in rows if r.granularity == gran and r.alpha == a]
                cells.append(f"{match[0].mean:.4f}" if match else "")
            fh.write(f"{gran}," + ",".join(cells) + "\n")
