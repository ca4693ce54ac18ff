"""Node encoders over the typed brain graph.

Two parallel views are produced per subject: a relational message-passing
encoder over the typed first-order edges (edge weights gated through a
learned per-type affine map), and a parameter-light propagation encoder
over each hemisphere's second-order cross-hemisphere network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .graph_model import ALL, INTER, INTRA, Hemisphere, HeteroBrainGraph, UCNGraph
from .numerics import (
    Parameter,
    Tensor,
    add,
    constant,
    dropout,
    gather_rows,
    hadamard,
    matmul,
    relu,
    vstack,
)

MODES = ("hetero", "homo", "intra_only", "inter_only")


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    if shape is None:
        shape = (fan_in, fan_out)
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class HBNLayerParams:
    """One relational layer: per-edge-type projection and edge-weight map, shared self map.

    The edge map is affine per type, f_r(e) = e * gain_r + bias_r, producing
    a vector in the incoming feature space that gates neighbour features
    elementwise before projection.
    """

    w_rel: dict[str, Parameter]
    edge_gain: dict[str, Parameter]
    edge_bias: dict[str, Parameter]
    w_self: Parameter

    @property
    def edge_types(self) -> tuple[str, ...]:
        return tuple(self.w_rel.keys())

    def parameters(self) -> list[Parameter]:
        out = []
        for r in self.edge_types:
            out.extend([self.w_rel[r], self.edge_gain[r], self.edge_bias[r]])
        out.append(self.w_self)
        return out


def init_hbn_layer(
    rng: np.random.Generator, d_in: int, d_out: int, edge_types, tag: str = ""
) -> HBNLayerParams:
    w_rel, gain, bias = {}, {}, {}
    for r in edge_types:
        w_rel[r] = Parameter(glorot_uniform(rng, d_in, d_out), name=f"{tag}w_{r}")
        gain[r] = Parameter(glorot_uniform(rng, 1, d_in, shape=(1, d_in)), name=f"{tag}gain_{r}")
        bias[r] = Parameter(np.zeros((1, d_in)), name=f"{tag}bias_{r}")
    w_self = Parameter(glorot_uniform(rng, d_in, d_out), name=f"{tag}w_self")
    return HBNLayerParams(w_rel=w_rel, edge_gain=gain, edge_bias=bias, w_self=w_self)


def hbn_layer(
    g: HeteroBrainGraph,
    z_prev: Tensor,
    params: HBNLayerParams,
    *,
    training: bool = False,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
    captures: dict | None = None,
) -> Tensor:
    """One round of typed message passing.

    Per node: the mean neighbour message of each connected edge type,
    averaged over the number of connected types, rectified, plus the
    node's own projected features. Nodes without edges of a type simply
    skip it; fully isolated nodes reduce to the self term. When `captures`
    is given, each edge type's per-node aggregate (pre-rectifier,
    pre-type-average) is stored under its name for the analysis
    instruments.
    """
    if params.edge_types != g.edge_types:
        raise ShapeError(
            f"layer edge types {params.edge_types} do not match graph {g.edge_types}"
        )
    if z_prev.shape[0] != g.n_nodes:
        raise ShapeError(f"expected {g.n_nodes} embedding rows, got {z_prev.shape}")
    n_connected = np.zeros(g.n_nodes)
    agg_total = None
    for r in g.edge_types:
        weights = g.adjacency(r)
        support = (weights > 0).astype(np.float64)
        deg = support.sum(axis=1)
        inv_deg = np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0)[:, None]
        n_connected += deg > 0
        gated = add(
            hadamard(params.edge_gain[r], matmul(constant(inv_deg * weights), z_prev)),
            hadamard(params.edge_bias[r], matmul(constant(inv_deg * support), z_prev)),
        )
        agg = matmul(gated, params.w_rel[r])
        if captures is not None:
            captures[r] = agg.data.copy()
        agg_total = agg if agg_total is None else add(agg_total, agg)
    inv_c = np.where(n_connected > 0, 1.0 / np.maximum(n_connected, 1.0), 0.0)[:, None]
    out = add(relu(hadamard(constant(inv_c), agg_total)), matmul(z_prev, params.w_self))
    if training and dropout_rate > 0.0:
        out = dropout(out, dropout_rate, rng, training)
    return out


def hbn_encode(
    g: HeteroBrainGraph,
    x: np.ndarray,
    layers,
    *,
    training: bool = False,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
    captures: list | None = None,
) -> Tensor:
    """Sequential application of relational layers starting from raw features."""
    z = constant(x)
    for layer in layers:
        layer_capture = {} if captures is not None else None
        z = hbn_layer(
            g, z, layer, training=training, dropout_rate=dropout_rate, rng=rng,
            captures=layer_capture,
        )
        if captures is not None:
            captures.append(layer_capture)
    return z


@dataclass
class UCNEncoderParams:
    """Per-hemisphere propagation encoder: k-step propagation plus a shared self map."""

    w_path: dict[Hemisphere, Parameter]
    w_self: Parameter
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"propagation order k must be >= 1, got {self.k}")

    def parameters(self) -> list[Parameter]:
        return [self.w_path[Hemisphere.LEFT], self.w_path[Hemisphere.RIGHT], self.w_self]


def init_ucn_params(rng: np.random.Generator, feat_dim: int, d: int, k: int) -> UCNEncoderParams:
    w_path = {
        h: Parameter(glorot_uniform(rng, feat_dim, d), name=f"ucn_w_{h.value}")
        for h in (Hemisphere.LEFT, Hemisphere.RIGHT)
    }
    w_self = Parameter(glorot_uniform(rng, feat_dim, d), name="ucn_w_self")
    return UCNEncoderParams(w_path=w_path, w_self=w_self, k=k)


def ucn_encode(
    g: HeteroBrainGraph,
    x: np.ndarray,
    params: UCNEncoderParams,
    ucns: dict[Hemisphere, UCNGraph] | None = None,
) -> Tensor:
    """Encode each hemisphere block through its propagation matrix.

    H_m = S_m^k X_m W_m + X_m W_self on the hemisphere's raw feature rows;
    the blocks are scattered back to global node order.
    """
    x = np.asarray(x, dtype=np.float64)
    blocks = []
    position = np.empty(g.n_nodes, dtype=np.intp)
    offset = 0
    for hemi in (Hemisphere.LEFT, Hemisphere.RIGHT):
        ucn = ucns[hemi] if ucns is not None else g.ucn(hemi)
        x_m = x[ucn.node_ids]
        propagated = np.linalg.matrix_power(ucn.prop, params.k) @ x_m
        blocks.append(
            add(matmul(constant(propagated), params.w_path[hemi]),
                matmul(constant(x_m), params.w_self))
        )
        position[ucn.node_ids] = offset + np.arange(ucn.node_ids.size)
        offset += ucn.node_ids.size
    return gather_rows(vstack(blocks), position)


@dataclass
class NodeEmbeddings:
    """The two per-node views: relational output z and propagation output h_phi."""

    z: Tensor
    h_phi: Tensor


def make_ablation(g: HeteroBrainGraph, mode: str) -> HeteroBrainGraph:
    """Reshape a graph for an ablation mode.

    homo presents both blocks as one edge type; intra_only / inter_only
    zero the other block; hetero returns the graph unchanged.
    """
    if mode == "hetero":
        return g
    if mode == "homo":
        return HeteroBrainGraph(
            hemisphere=g.hemisphere, intra_adj=g.intra_adj, inter_adj=g.inter_adj,
            features=g.features, merged_edge_types=True,
        )
    if mode == "intra_only":
        return HeteroBrainGraph(
            hemisphere=g.hemisphere, intra_adj=g.intra_adj,
            inter_adj=np.zeros_like(g.inter_adj), features=g.features,
        )
    if mode == "inter_only":
        return HeteroBrainGraph(
            hemisphere=g.hemisphere, intra_adj=np.zeros_like(g.intra_adj),
            inter_adj=g.inter_adj, features=g.features,
        )
    raise ConfigError(f"unknown ablation mode {mode!r}; expected one of {MODES}")
