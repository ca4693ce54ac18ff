"""Graph-level readout, classifier head, supervised training, and metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MetricUndefinedError, ShapeError
from .numerics import (
    Adam,
    Parameter,
    Tensor,
    add,
    clamped_log,
    constant,
    dropout,
    hadamard,
    matmul,
    relu,
    scale,
    shift,
    softmax_rows,
    sum_all,
    transpose,
    vstack,
)
from .numerics.rng import SeedFanout

CLASS_1_SELECTOR = np.array([[0.0], [1.0]])


@dataclass
class ReadoutParams:
    """Shared per-node projection d -> 1 producing the 2N graph vector."""

    w: Parameter
    b: Parameter


def init_readout(rng: np.random.Generator, d: int) -> ReadoutParams:
    from .encoders import glorot_uniform

    return ReadoutParams(
        w=Parameter(glorot_uniform(rng, d, 1), name="readout_w"),
        b=Parameter(np.zeros((1, 1)), name="readout_b"),
    )


@dataclass
class MLPParams:
    """Affine layers ending in 2 output units; ReLU between layers."""

    layers: list[tuple[Parameter, Parameter]]


def init_mlp(rng: np.random.Generator, in_dim: int, hidden=(), out_dim: int = 2) -> MLPParams:
    dims = [in_dim, *hidden, out_dim]
    layers = []
    for li, (a, b) in enumerate(zip(dims[:-1], dims[1:])):
        from .encoders import glorot_uniform

        layers.append(
            (
                Parameter(glorot_uniform(rng, a, b), name=f"mlp{li}_w"),
                Parameter(np.zeros((1, b)), name=f"mlp{li}_b"),
            )
        )
    return MLPParams(layers=layers)


def readout(
    emb,
    params: ReadoutParams,
    *,
    training: bool = False,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Stack the two views (z rows first, then h_phi) and project each row to a scalar."""
    stacked = vstack([emb.z, emb.h_phi])
    if stacked.shape[1] != params.w.shape[0]:
        raise ShapeError(
            f"readout expects width {params.w.shape[0]}, got embeddings of width {stacked.shape[1]}"
        )
    gh = add(matmul(stacked, params.w), params.b)
    if training and dropout_rate > 0.0:
        gh = dropout(gh, dropout_rate, rng, training)
    return gh


def predict(gh: Tensor, mlp: MLPParams) -> Tensor:
    """Class probabilities for one subject from its graph vector (2N x 1)."""
    x = transpose(gh)
    last = len(mlp.layers) - 1
    for li, (w, b) in enumerate(mlp.layers):
        x = add(matmul(x, w), b)
        if li != last:
            x = relu(x)
    return softmax_rows(x)


def ce_loss(probs_batch: Tensor, labels) -> Tensor:
    """Binary cross-entropy over the class-1 probability column, clamped logs."""
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != probs_batch.shape[0]:
        raise ShapeError(
            f"labels shape {labels.shape} does not match {probs_batch.shape[0]} probability rows"
        )
    bad = np.setdiff1d(np.unique(labels), [0, 1])
    if bad.size:
        raise ConfigError(f"labels must be 0 or 1, got {bad[0]!r}")
    t = labels.shape[0]
    y = constant(labels.astype(np.float64).reshape(t, 1))
    p1 = matmul(probs_batch, constant(CLASS_1_SELECTOR))
    ll = add(
        hadamard(y, clamped_log(p1)),
        hadamard(shift(scale(y, -1.0), 1.0), clamped_log(shift(scale(p1, -1.0), 1.0))),
    )
    return scale(sum_all(ll), -1.0 / t)


@dataclass
class Metrics:
    """Binary classification scores; class 1 (patient) is the positive class."""

    accuracy: float
    f1: float
    auc: float | None
    sensitivity: float | None


def mann_whitney_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outscores a random negative, ties at 0.5.

    Computed with integer pair counts over sorted tie groups, so it agrees
    exactly with the quadratic pairwise definition.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricUndefinedError("AUC needs both classes present")
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    y = labels[order]
    concordant = 0
    tied = 0
    neg_below = 0
    i = 0
    n = s.size
    while i < n:
        j = i
        while j < n and s[j] == s[i]:
            j += 1
        group_pos = int((y[i:j] == 1).sum())
        group_neg = (j - i) - group_pos
        concordant += group_pos * neg_below
        tied += group_pos * group_neg
        neg_below += group_neg
        i = j
    return (concordant + 0.5 * tied) / (n_pos * n_neg)


def compute_metrics(scores, labels, allow_undefined: bool = False) -> Metrics:
    """Accuracy at threshold 0.5, F1 and sensitivity on class 1, rank AUC.

    A label set with one class leaves AUC (and sensitivity, when there are
    no positives) undefined: raises unless `allow_undefined`, in which case
    the undefined fields are None.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.size == 0:
        raise MetricUndefinedError("cannot score an empty evaluation set")
    pred = (scores >= 0.5).astype(int)
    tp = int(((pred == 1) & (labels == 1)).sum())
    fp = int(((pred == 1) & (labels == 0)).sum())
    fn = int(((pred == 0) & (labels == 1)).sum())
    accuracy = float((pred == labels).mean())
    f1 = 2.0 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else 0.0
    has_pos = bool((labels == 1).any())
    has_neg = bool((labels == 0).any())
    if has_pos and has_neg:
        auc = mann_whitney_auc(scores, labels)
        sensitivity = tp / (tp + fn)
    elif allow_undefined:
        auc = None
        sensitivity = tp / (tp + fn) if has_pos else None
    else:
        raise MetricUndefinedError("AUC undefined: evaluation labels contain a single class")
    return Metrics(accuracy=accuracy, f1=f1, auc=auc, sensitivity=sensitivity)


def evaluate_split(model, dataset, captures_by_layer=None):
    """Eval-mode class-1 scores, labels, and mean cross-entropy for a dataset.

    When `captures_by_layer` is a list it receives, per relational layer, the
    per-subject edge-type aggregates for the analysis instruments.
    """
    from .model import encode, graph_vector_from_embeddings

    scores, labels = [], []
    probs_rows = []
    for g, label in dataset.subjects:
        per_subject = [] if captures_by_layer is not None else None
        emb = encode(g, model, training=False, captures=per_subject)
        gh = graph_vector_from_embeddings(emb, model, training=False)
        probs = predict(gh, model.mlp)
        probs_rows.append(probs)
        scores.append(probs.data[0, 1])
        labels.append(label)
        if captures_by_layer is not None:
            while len(captures_by_layer) < len(per_subject):
                captures_by_layer.append([])
            for li, cap in enumerate(per_subject):
                captures_by_layer[li].append(cap)
    ce = ce_loss(vstack(probs_rows), np.array(labels)).item()
    return np.array(scores), np.array(labels), ce


def finetune(train, test, model, cfg, streams: SeedFanout, ems_capture: bool = False):
    """Supervised minibatch training of every parameter on the cross-entropy.

    Returns (metrics_rows, ems_rows): per-epoch rows for both splits, and,
    when requested, per-epoch per-layer edge-type activation summaries
    computed on the training split in evaluation mode. The learning rate is
    multiplied by cfg.lr_decay_multiplier every cfg.decay_every epochs once
    past cfg.decay_after. lr 0 freezes parameters.
    """
    from .analysis import ems
    from .model import encode, graph_vector_from_embeddings

    if not train.subjects:
        raise ConfigError("training split is empty")
    graphs = [g for g, _ in train.subjects]
    labels = np.array([y for _, y in train.subjects])
    opt = Adam(model.parameters(), lr=cfg.lr_finetune, weight_decay=cfg.l2) if cfg.lr_finetune > 0 else None
    lr = cfg.lr_finetune
    metrics_rows = []
    ems_rows = []
    for epoch in range(1, cfg.epochs_finetune + 1):
        if opt is not None and epoch > cfg.decay_after and (epoch - cfg.decay_after - 1) % cfg.decay_every == 0:
            lr *= cfg.lr_decay_multiplier
            opt.lr = lr
        order = streams.stream(f"shuffle/finetune/{epoch}").permutation(len(graphs))
        drop_rng = streams.stream(f"dropout/finetune/{epoch}")
        for lo in range(0, len(order), cfg.batch_size):
            batch = order[lo : lo + cfg.batch_size]
            probs_rows = []
            for idx in batch:
                emb = encode(graphs[idx], model, training=True, rng=drop_rng)
                gh = graph_vector_from_embeddings(emb, model, training=True, rng=drop_rng)
                probs_rows.append(predict(gh, model.mlp))
            loss = ce_loss(vstack(probs_rows), labels[batch])
            if opt is not None:
                opt.zero_grad()
                loss.backward()
                opt.step()
        captures = [] if ems_capture else None
        for split_name, split in (("train", train), ("test", test)):
            cap = captures if split_name == "train" else None
            scores, ys, ce = evaluate_split(model, split, captures_by_layer=cap)
            m = compute_metrics(scores, ys, allow_undefined=True)
            metrics_rows.append(
                {
                    "epoch": epoch,
                    "split": split_name,
                    "accuracy": m.accuracy,
                    "f1": m.f1,
                    "auc": m.auc,
                    "sensitivity": m.sensitivity,
                    "ce_loss": ce,
                }
            )
        if ems_capture:
            n_nodes = graphs[0].n_nodes
            for li, layer_caps in enumerate(captures):
                ems_intra, ems_inter = ems(layer_caps, n_nodes, len(graphs))
                ems_rows.append(
                    {"epoch": epoch, "layer": li, "ems_intra": ems_intra, "ems_inter": ems_inter}
                )
    return metrics_rows, ems_rows
