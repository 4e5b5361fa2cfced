"""Dropout masks at the three hardware-relevant granularities.

element        independent Bernoulli per scalar feature value
burst-segment  whole contiguous groups of K elements share one draw
row-class      whole feature vectors of every vertex in one row class share
               one draw; the grouping rule comes from the fixture file the
               memory simulator emits, so both sides agree bit for bit

Kept values are scaled by 1/(1 - alpha) so activations keep their expected
magnitude (the usual inverted-dropout convention).
"""

import json
from dataclasses import dataclass

import numpy as np
import torch

GRANULARITIES = ("element", "burst-segment", "row-class")


@dataclass(frozen=True)
class MaskSpec:
    granularity: str
    alpha: float
    seed: int = 0
    elements_per_segment: int = 8
    scale_kept: bool = True

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must be in [0, 1)")


def load_rowclass_fixture(path: str) -> dict:
    with open(path) as fh:
        fixture = json.load(fh)
    for key in ("config", "classes", "num_vertices"):
        if key not in fixture:
            raise ValueError(f"fixture is missing {key!r}")
    return fixture


def row_class_of(vertices: np.ndarray, config: dict) -> np.ndarray:
    """Row class from the fixture's layout arithmetic (independent of the emitter).

    A vertex's feature starts at base + v * flen * element_size; its row class
    is that start address shifted down by the configured row bit position.
    """
    feature_bytes = config["feature_length"] * config["element_size"]
    starts = config["base_address"] + vertices.astype(np.int64) * feature_bytes
    return starts >> config["row_shift"]


def sample_mask(
    spec: MaskSpec,
    num_nodes: int,
    feature_dim: int,
    generator: torch.Generator,
    row_classes: np.ndarray | None = None,
) -> torch.Tensor:
    """Multiplicative mask tensor (num_nodes x feature_dim) for one iteration."""
    if spec.alpha == 0.0:
        return torch.ones(num_nodes, feature_dim)
    if spec.granularity == "element":
        drops = torch.rand(num_nodes, feature_dim, generator=generator) < spec.alpha
    elif spec.granularity == "burst-segment":
        k = spec.elements_per_segment
        if feature_dim % k:
            raise ValueError(f"feature dim {feature_dim} not divisible by segment size {k}")
        seg = torch.rand(num_nodes, feature_dim // k, generator=generator) < spec.alpha
        drops = seg.repeat_interleave(k, dim=1)
    else:
        if row_classes is None:
            raise ValueError("row-class masks need the fixture's class assignment")
        classes = torch.from_numpy(np.asarray(row_classes, dtype=np.int64))
        uniq, inverse = torch.unique(classes, return_inverse=True)
        class_drop = torch.rand(len(uniq), generator=generator) < spec.alpha
        drops = class_drop[inverse][:, None].expand(num_nodes, feature_dim)
    mask = (~drops).float()
    if spec.scale_kept:
        mask = mask / (1.0 - spec.alpha)
    return mask


def dropped_fraction(spec: MaskSpec, num_nodes: int, feature_dim: int,
                     draws: int, seed: int = 0,
                     row_classes: np.ndarray | None = None) -> float:
    """Average share of zeroed scalars across repeated mask draws."""
    gen = torch.Generator().manual_seed(seed)
    zeroed = 0
    total = 0
    for _ in range(draws):
        m = sample_mask(spec, num_nodes, feature_dim, gen, row_classes=row_classes)
        zeroed += int((m == 0).sum())
        total += m.numel()
    return zeroed / total
