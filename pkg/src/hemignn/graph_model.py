"""Hemisphere-labelled brain graphs and their cross-hemispheric networks.

A subject's structural network is stored as two weighted adjacency blocks,
within-hemisphere and between-hemisphere, plus a node feature matrix from
functional connectivity. From the between-hemisphere block we derive, per
hemisphere, an unweighted second-order graph: two same-side nodes become
neighbours when some opposite-side node links to both. That graph and its
self-loop-normalized propagation matrix drive the propagation encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EmptyHemisphereError, GraphValidationError

SYMMETRY_TOL = 1e-9

INTRA = "intra"
INTER = "inter"
ALL = "all"


class Hemisphere(Enum):
    LEFT = "L"
    RIGHT = "R"

    def opposite(self) -> "Hemisphere":
        return Hemisphere.RIGHT if self is Hemisphere.LEFT else Hemisphere.LEFT


def _check_square(name: str, m: np.ndarray, n: int) -> None:
    if m.shape != (n, n):
        raise GraphValidationError(f"{name} must be {n}x{n}, got {m.shape}")
    bad = np.argwhere(np.abs(m - m.T) > SYMMETRY_TOL)
    if bad.size:
        i, j = bad[0]
        raise GraphValidationError(
            f"{name} is asymmetric at entry ({i}, {j}): {m[i, j]!r} vs {m[j, i]!r}"
        )
    diag = np.flatnonzero(np.diag(m) != 0.0)
    if diag.size:
        i = diag[0]
        raise GraphValidationError(f"{name} has nonzero diagonal at entry ({i}, {i}): {m[i, i]!r}")
    neg = np.argwhere(m < 0.0)
    if neg.size:
        i, j = neg[0]
        raise GraphValidationError(f"{name} has negative weight at entry ({i}, {j}): {m[i, j]!r}")
    if not np.all(np.isfinite(m)):
        i, j = np.argwhere(~np.isfinite(m))[0]
        raise GraphValidationError(f"{name} has non-finite weight at entry ({i}, {j})")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HeteroBrainGraph:
    """One subject's brain network with typed nodes and edges.

    `merged_edge_types` presents both adjacency blocks as a single edge
    type (the homogeneous ablation); the blocks themselves stay separate
    so structural invariants keep holding.
    """

    hemisphere: tuple[Hemisphere, ...]
    intra_adj: np.ndarray
    inter_adj: np.ndarray
    features: np.ndarray
    merged_edge_types: bool = False
    _ucn_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.hemisphere)
        if n == 0:
            raise GraphValidationError("graph has no nodes")
        if not all(isinstance(h, Hemisphere) for h in self.hemisphere):
            raise GraphValidationError("every node needs a Hemisphere label")
        object.__setattr__(self, "intra_adj", _freeze(self.intra_adj))
        object.__setattr__(self, "inter_adj", _freeze(self.inter_adj))
        object.__setattr__(self, "features", _freeze(self.features))
        _check_square("intra_adj", self.intra_adj, n)
        _check_square("inter_adj", self.inter_adj, n)
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise GraphValidationError(
                f"features must have {n} rows, got shape {self.features.shape}"
            )
        if not np.all(np.isfinite(self.features)):
            raise GraphValidationError("features contain non-finite values")
        same = _same_hemisphere_mask(self.hemisphere)
        bad = np.argwhere((self.intra_adj > 0) & ~same)
        if bad.size:
            i, j = bad[0]
            raise GraphValidationError(
                f"intra_adj entry ({i}, {j}) links different hemispheres"
            )
        bad = np.argwhere((self.inter_adj > 0) & same)
        if bad.size:
            i, j = bad[0]
            raise GraphValidationError(f"inter_adj entry ({i}, {j}) links one hemisphere")
        overlap = np.argwhere((self.intra_adj * self.inter_adj) != 0.0)
        if overlap.size:
            i, j = overlap[0]
            raise GraphValidationError(
                f"entry ({i}, {j}) appears in both adjacency blocks"
            )

    @property
    def n_nodes(self) -> int:
        return len(self.hemisphere)

    @property
    def edge_types(self) -> tuple[str, ...]:
        return (ALL,) if self.merged_edge_types else (INTRA, INTER)

    def nodes_of(self, hemi: Hemisphere) -> np.ndarray:
        return np.flatnonzero([h is hemi for h in self.hemisphere])

    def adjacency(self, edge_type: str) -> np.ndarray:
        if edge_type == INTRA:
            return self.intra_adj
        if edge_type == INTER:
            return self.inter_adj
        if edge_type == ALL:
            return self.intra_adj + self.inter_adj
        raise GraphValidationError(f"unknown edge type {edge_type!r}")

    def ucn(self, hemi: Hemisphere) -> "UCNGraph":
        """Cached accessor for build_ucn; graphs are immutable so this is safe."""
        if hemi not in self._ucn_cache:
            self._ucn_cache[hemi] = build_ucn(self, hemi)
        return self._ucn_cache[hemi]


def _same_hemisphere_mask(hemisphere) -> np.ndarray:
    left = np.array([h is Hemisphere.LEFT for h in hemisphere])
    return left[:, None] == left[None, :]


@dataclass(frozen=True)
class UCNGraph:
    """Second-order same-hemisphere network and its propagation matrix."""

    node_ids: np.ndarray
    adj: np.ndarray
    prop: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "node_ids", _freeze(self.node_ids).astype(np.intp))
        object.__setattr__(self, "adj", _freeze(self.adj))
        object.__setattr__(self, "prop", _freeze(self.prop))


def partition_edges(sc: np.ndarray, hemisphere) -> tuple[np.ndarray, np.ndarray]:
    """Split a structural-connectivity matrix into within/between-hemisphere blocks.

    The two outputs sum back to the input exactly; placement follows the
    node labels.
    """
    sc = np.asarray(sc, dtype=np.float64)
    n = len(hemisphere)
    _check_square("sc", sc, n)
    same = _same_hemisphere_mask(hemisphere)
    intra = np.where(same, sc, 0.0)
    inter = np.where(same, 0.0, sc)
    return intra, inter


def build_ucn(g: HeteroBrainGraph, m: Hemisphere) -> UCNGraph:
    """Construct the unweighted cross-hemisphere 2-hop network for hemisphere m.

    Nodes i and j (both in m, i != j) are adjacent when some opposite-side
    node r has positive between-hemisphere weight to both. The propagation
    matrix renormalizes adj+I by its degree, SGC style, so isolated nodes
    keep their own features.
    """
    ids = g.nodes_of(m)
    if ids.size == 0:
        raise EmptyHemisphereError(f"hemisphere {m.value} has no nodes")
    opp = g.nodes_of(m.opposite())
    bridge = (g.inter_adj[np.ix_(ids, opp)] > 0).astype(np.float64)
    adj = (bridge @ bridge.T > 0).astype(np.float64)
    np.fill_diagonal(adj, 0.0)
    loopy = adj + np.eye(ids.size)
    inv_sqrt_deg = 1.0 / np.sqrt(loopy.sum(axis=1))
    prop = loopy * inv_sqrt_deg[:, None] * inv_sqrt_deg[None, :]
    return UCNGraph(node_ids=ids, adj=adj, prop=prop)


def neighbor_set(g: HeteroBrainGraph, i: int, edge_type: str) -> set[int]:
    """Nodes with positive weight to node i under the given edge type."""
    if not 0 <= i < g.n_nodes:
        raise IndexError(f"node {i} out of range for graph with {g.n_nodes} nodes")
    return set(np.flatnonzero(g.adjacency(edge_type)[i] > 0).tolist())
