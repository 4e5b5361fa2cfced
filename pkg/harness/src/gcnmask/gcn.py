"""Two-layer GCN whose aggregation input can be masked each iteration."""

import torch
import torch.nn as nn

from .data import Dataset
from .masks import MaskSpec, sample_mask


class TwoLayerGCN(nn.Module):
    def __init__(self, feature_dim: int, hidden: int, num_classes: int):
        super().__init__()
        self.lin1 = nn.Linear(feature_dim, hidden)
        self.lin2 = nn.Linear(hidden, num_classes)

    def forward(self, a_hat, x, masks=(None, None)):
        m1, m2 = masks
        h = x if m1 is None else x * m1
        h = torch.relu(self.lin1(a_hat @ h))
        h = h if m2 is None else h * m2
        return self.lin2(a_hat @ h)


def train_once(
    data: Dataset,
    spec: MaskSpec | None,
    seed: int,
    epochs: int = 150,
    hidden: int = 32,
    lr: float = 0.01,
    weight_decay: float = 5e-4,
    row_classes=None,
) -> float | None:
    """One training run; returns test accuracy, or None on divergence.

    Masks are resampled every iteration (fresh aggregation-input dropout per
    optimizer step) and applied at both layers' aggregations during training;
    evaluation always runs unmasked.
    """
    torch.manual_seed(seed)
    model = TwoLayerGCN(data.feature_dim, hidden, int(data.labels.max()) + 1)
    opt = torch.optim.Adam(model.parameters(), lr=lr, weight_decay=weight_decay)
    loss_fn = nn.CrossEntropyLoss()
    gen = torch.Generator().manual_seed(seed * 1_000_003 + 17)

    hidden_classes = row_classes
    for _ in range(epochs):
        model.train()
        masks = (None, None)
        if spec is not None and spec.alpha > 0.0:
            m1 = sample_mask(spec, data.num_nodes, data.feature_dim, gen,
                             row_classes=row_classes)
            m2 = sample_mask(spec, data.num_nodes, _hidden_dim_like(spec, hidden), gen,
                             row_classes=hidden_classes)
            masks = (m1, m2[:, :hidden])
        opt.zero_grad()
        out = model(data.adjacency, data.features, masks)
        loss = loss_fn(out[data.train_mask], data.labels[data.train_mask])
        if torch.isnan(loss):
            return None
        loss.backward()
        opt.step()

    model.eval()
    with torch.no_grad():
        pred = model(data.adjacency, data.features).argmax(dim=1)
        correct = (pred[data.test_mask] == data.labels[data.test_mask]).sum()
    return float(correct) / int(data.test_mask.sum())


def _hidden_dim_like(spec: MaskSpec, hidden: int) -> int:
    # segment masks need a dimension divisible by the segment size
    k = spec.elements_per_segment
    if spec.granularity == "burst-segment" and hidden % k:
        return (hidden // k + 1) * k
    return hidden
