"""Assembles every trainable component and the whole-subject forward passes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoders import (
    HBNLayerParams,
    NodeEmbeddings,
    UCNEncoderParams,
    hbn_encode,
    init_hbn_layer,
    init_ucn_params,
    ucn_encode,
)
from .errors import ConfigError
from .graph_model import HeteroBrainGraph
from .numerics import Parameter, Tensor
from .prediction import MLPParams, ReadoutParams, init_mlp, init_readout, predict, readout
from .pretraining import Discriminator, init_discriminator


@dataclass
class ModelParams:
    """All trainable parameters plus the dropout rate they were built for."""

    hbn_layers: list[HBNLayerParams]
    ucn: UCNEncoderParams
    discriminator: Discriminator
    readout: ReadoutParams
    mlp: MLPParams
    dropout: float

    def encoder_parameters(self) -> list[Parameter]:
        out: list[Parameter] = []
        for layer in self.hbn_layers:
            out.extend(layer.parameters())
        out.extend(self.ucn.parameters())
        return out

    def parameters(self) -> list[Parameter]:
        out = self.encoder_parameters()
        out.append(self.discriminator.w)
        out.extend([self.readout.w, self.readout.b])
        for w, b in self.mlp.layers:
            out.extend([w, b])
        return out


def init_model(
    rng: np.random.Generator,
    *,
    n_nodes: int,
    feature_dim: int,
    hidden_dim: int,
    hbn_layers: int,
    sgc_k: int,
    edge_types,
    dropout: float,
    mlp_hidden=(),
) -> ModelParams:
    """Build a fresh model; the rng draw order is fixed, so seeds reproduce it."""
    if hbn_layers < 1:
        raise ConfigError(f"need at least one relational layer, got {hbn_layers}")
    if not 0.0 <= dropout < 1.0:
        raise ConfigError(f"dropout must lie in [0, 1), got {dropout}")
    layers = []
    d_in = feature_dim
    for li in range(hbn_layers):
        layers.append(init_hbn_layer(rng, d_in, hidden_dim, edge_types, tag=f"hbn{li}_"))
        d_in = hidden_dim
    return ModelParams(
        hbn_layers=layers,
        ucn=init_ucn_params(rng, feature_dim, hidden_dim, sgc_k),
        discriminator=init_discriminator(rng, hidden_dim),
        readout=init_readout(rng, hidden_dim),
        mlp=init_mlp(rng, 2 * n_nodes, hidden=mlp_hidden),
        dropout=dropout,
    )


def encode(
    g: HeteroBrainGraph,
    model: ModelParams,
    *,
    training: bool = False,
    rng: np.random.Generator | None = None,
    captures: list | None = None,
) -> NodeEmbeddings:
    """Run both encoder views on a subject's raw features."""
    z = hbn_encode(
        g, g.features, model.hbn_layers,
        training=training, dropout_rate=model.dropout, rng=rng, captures=captures,
    )
    h_phi = ucn_encode(g, g.features, model.ucn)
    return NodeEmbeddings(z=z, h_phi=h_phi)


def graph_vector_from_embeddings(
    emb: NodeEmbeddings,
    model: ModelParams,
    *,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    return readout(emb, model.readout, training=training, dropout_rate=model.dropout, rng=rng)


def subject_probs(
    g: HeteroBrainGraph,
    model: ModelParams,
    *,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Class probabilities (1x2) for one subject."""
    emb = encode(g, model, training=training, rng=rng)
    gh = graph_vector_from_embeddings(emb, model, training=training, rng=rng)
    return predict(gh, model.mlp)
