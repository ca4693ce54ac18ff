"""Hemisphere-aware brain-network modeling, pretraining, and classification."""

from .graph_model import (
    ALL,
    INTER,
    INTRA,
    Hemisphere,
    HeteroBrainGraph,
    UCNGraph,
    build_ucn,
    neighbor_set,
    partition_edges,
)
from .datagen import Dataset, GenConfig, generate_dataset, ingest, split
from .config import RunConfig

__all__ = [
    "ALL",
    "Dataset",
    "GenConfig",
    "Hemisphere",
    "HeteroBrainGraph",
    "INTER",
    "INTRA",
    "RunConfig",
    "UCNGraph",
    "build_ucn",
    "generate_dataset",
    "ingest",
    "neighbor_set",
    "partition_edges",
    "split",
]
