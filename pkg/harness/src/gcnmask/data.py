"""A small citation-style node-classification benchmark, generated on the fly.

Mirrors the shape of the classic citation graphs (sparse, homophilous, a few
labeled nodes per class): labels come from a stochastic block model and each
node's feature vector is its class signature plus noise.  Everything is
deterministic in the seed, so accuracy comparisons across mask settings are
seed-for-seed paired.
"""

from dataclasses import dataclass

import numpy as np
import torch


@dataclass
class Dataset:
    adjacency: torch.Tensor   # normalized (A + I), dense float32
    features: torch.Tensor    # num_nodes x feature_dim
    labels: torch.Tensor      # int64
    train_mask: torch.Tensor
    test_mask: torch.Tensor

    @property
    def num_nodes(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


def citation_style(
    num_nodes: int = 800,
    num_classes: int = 4,
    feature_dim: int = 64,
    intra_degree: float = 6.0,
    inter_degree: float = 1.5,
    noise: float = 1.2,
    train_per_class: int = 20,
    seed: int = 0,
) -> Dataset:
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, num_classes, num_nodes)

    p_intra = intra_degree / num_nodes * num_classes
    p_inter = inter_degree / num_nodes * num_classes
    same = labels[:, None] == labels[None, :]
    probs = np.where(same, p_intra, p_inter)
    upper = np.triu(rng.random((num_nodes, num_nodes)) < probs, k=1)
    adj = (upper | upper.T).astype(np.float32)

    signatures = rng.normal(0.0, 1.0, (num_classes, feature_dim))
    feats = signatures[labels] + noise * rng.normal(0.0, 1.0, (num_nodes, feature_dim))

    train_mask = np.zeros(num_nodes, dtype=bool)
    for c in range(num_classes):
        members = np.flatnonzero(labels == c)
        train_mask[rng.choice(members, size=min(train_per_class, len(members)),
                              replace=False)] = True
    test_mask = ~train_mask

    a_hat = adj + np.eye(num_nodes, dtype=np.float32)
    deg = a_hat.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    a_hat = a_hat * inv_sqrt[:, None] * inv_sqrt[None, :]

    return Dataset(
        adjacency=torch.from_numpy(a_hat.astype(np.float32)),
        features=torch.from_numpy(feats.astype(np.float32)),
        labels=torch.from_numpy(labels.astype(np.int64)),
        train_mask=torch.from_numpy(train_mask),
        test_mask=torch.from_numpy(test_mask),
    )
