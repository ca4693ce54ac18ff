"""Contrastive self-supervised pretraining.

The two encoder views of the same node form a positive pair; views of
different same-hemisphere nodes in the same subject form negatives. A
bilinear discriminator is trained jointly with both encoders to tell the
pairs apart, which maximizes a mutual-information lower bound between
the views. The classifier head is untouched by this stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .graph_model import Hemisphere, HeteroBrainGraph
from .numerics import (
    Adam,
    Parameter,
    Tensor,
    add,
    clamped_log,
    gather_rows,
    hadamard,
    matmul,
    row_sums,
    scale,
    shift,
    sigmoid,
    sum_all,
)
from .numerics.rng import SeedFanout


@dataclass
class Discriminator:
    """Bilinear pair scorer sigma(z^T W h)."""

    w: Parameter

    def __post_init__(self):
        if self.w.shape[0] != self.w.shape[1]:
            raise ShapeError(f"discriminator matrix must be square, got {self.w.shape}")


def init_discriminator(rng: np.random.Generator, d: int) -> Discriminator:
    from .encoders import glorot_uniform

    return Discriminator(w=Parameter(glorot_uniform(rng, d, d), name="disc_w"))


@dataclass
class SSLConfig:
    """Hyperparameters of the pretraining stage."""

    K: int = 2
    epochs: int = 20
    lr: float = 1e-4
    l2: float = 1e-5
    batch_size: int = 128

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if self.lr < 0 or self.l2 < 0:
            raise ConfigError("lr and l2 must be non-negative")


def discriminate(z: np.ndarray, h: np.ndarray, disc: Discriminator) -> float:
    """Probability that embedding vectors z and h belong to the same node."""
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    d0, d1 = disc.w.shape
    if z.size != d0 or h.size != d1:
        raise ShapeError(
            f"discriminator expects vectors of length {d0} and {d1}, got {z.size} and {h.size}"
        )
    score = float(z @ disc.w.data @ h)
    if score >= 0:
        return 1.0 / (1.0 + np.exp(-score))
    e = np.exp(score)
    return e / (1.0 + e)


def sample_negatives(rng: np.random.Generator, i: int, same_type_nodes, K: int) -> list[int]:
    """Draw K distinct nodes != i uniformly without replacement."""
    candidates = sorted(set(same_type_nodes) - {i})
    if K > len(candidates):
        raise ConfigError(
            f"cannot draw {K} negatives for node {i} from {len(candidates)} candidates"
        )
    picked = rng.choice(len(candidates), size=K, replace=False)
    return [candidates[j] for j in picked]


def ssl_loss(
    z: Tensor,
    h_phi: Tensor,
    g: HeteroBrainGraph,
    disc: Discriminator,
    rng: np.random.Generator,
    K: int,
) -> Tensor:
    """Negated pair-classification objective for one subject (to be minimized).

    Per hemisphere, each node contributes K times the log-probability of its
    own pair plus the log-improbability of K sampled negatives, averaged over
    the hemisphere's nodes; hemispheres are averaged with weight 1/2. Logs
    are floored so saturated scores stay finite. Negatives are drawn left
    hemisphere first, nodes in ascending order, so a fixed rng replays the
    exact pairing.
    """
    loss_terms = None
    for hemi in (Hemisphere.LEFT, Hemisphere.RIGHT):
        ids = g.nodes_of(hemi)
        n_m = ids.size
        if n_m <= K:
            raise ConfigError(
                f"hemisphere {hemi.value} has {n_m} nodes; need more than K={K}"
            )
        local = {node: pos for pos, node in enumerate(ids.tolist())}
        id_set = set(ids.tolist())
        neg_local = np.empty((n_m, K), dtype=np.intp)
        for pos, node in enumerate(ids.tolist()):
            for k, neg in enumerate(sample_negatives(rng, node, id_set, K)):
                neg_local[pos, k] = local[neg]
        z_m = gather_rows(z, ids)
        h_m = gather_rows(h_phi, ids)
        zw = matmul(z_m, disc.w)
        pos_prob = sigmoid(row_sums(hadamard(zw, h_m)))
        term = scale(sum_all(clamped_log(pos_prob)), float(K))
        for k in range(K):
            neg_prob = sigmoid(row_sums(hadamard(zw, gather_rows(h_m, neg_local[:, k]))))
            term = add(term, sum_all(clamped_log(shift(scale(neg_prob, -1.0), 1.0))))
        term = scale(term, 1.0 / n_m)
        loss_terms = term if loss_terms is None else add(loss_terms, term)
    return scale(loss_terms, -0.5)


def pretrain(dataset, model, cfg: SSLConfig, streams: SeedFanout):
    """Minibatch descent on the mean subject loss; returns the per-epoch trace.

    Updates both encoders and the discriminator. A zero learning rate
    freezes all parameters (loss is still evaluated), which is the
    smoke-test mode. Negatives are resampled from a fresh stream each epoch.
    """
    from .model import encode

    graphs = [g for g, _ in dataset.subjects]
    opt = None
    if cfg.lr > 0:
        trainable = model.encoder_parameters() + [model.discriminator.w]
        opt = Adam(trainable, lr=cfg.lr, weight_decay=cfg.l2)
    trace = []
    for epoch in range(1, cfg.epochs + 1):
        order = streams.stream(f"shuffle/pretrain/{epoch}").permutation(len(graphs))
        neg_rng = streams.stream(f"negatives/{epoch}")
        drop_rng = streams.stream(f"dropout/pretrain/{epoch}")
        total, seen = 0.0, 0
        for lo in range(0, len(order), cfg.batch_size):
            batch = order[lo : lo + cfg.batch_size]
            batch_loss = None
            for idx in batch:
                g = graphs[idx]
                emb = encode(g, model, training=True, rng=drop_rng)
                loss = ssl_loss(emb.z, emb.h_phi, g, model.discriminator, neg_rng, cfg.K)
                batch_loss = loss if batch_loss is None else add(batch_loss, loss)
            batch_loss = scale(batch_loss, 1.0 / batch.size)
            if opt is not None:
                opt.zero_grad()
                batch_loss.backward()
                opt.step()
            total += batch_loss.item() * batch.size
            seen += batch.size
        trace.append(total / seen)
    return trace


def discriminator_pair_auc(dataset, model, rng: np.random.Generator, K: int) -> float:
    """AUC of the discriminator separating same-node from different-node pairs.

    Evaluation mode: no dropout; pairs drawn the same way the loss draws
    them. Used to judge pretraining on held-out subjects.
    """
    from .model import encode
    from .prediction import mann_whitney_auc

    scores, labels = [], []
    for g, _ in dataset.subjects:
        emb = encode(g, model, training=False)
        z = emb.z.data
        h = emb.h_phi.data
        for hemi in (Hemisphere.LEFT, Hemisphere.RIGHT):
            ids = g.nodes_of(hemi)
            id_set = set(ids.tolist())
            for node in ids.tolist():
                scores.append(discriminate(z[node], h[node], model.discriminator))
                labels.append(1)
                for neg in sample_negatives(rng, node, id_set, K):
                    scores.append(discriminate(z[node], h[neg], model.discriminator))
                    labels.append(0)
    return mann_whitney_auc(np.array(scores), np.array(labels))
