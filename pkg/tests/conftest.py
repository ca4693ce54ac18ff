import numpy as np
import pytest

from hemignn.graph_model import Hemisphere, HeteroBrainGraph, partition_edges


def build_graph(labels, edges, features=None, merged=False):
    """Construct a graph from 'L'/'R' labels and {(i, j): weight} edges."""
    hemis = tuple(Hemisphere(c) for c in labels)
    n = len(hemis)
    sc = np.zeros((n, n))
    for (i, j), w in edges.items():
        sc[i, j] = sc[j, i] = w
    if features is None:
        features = np.eye(n)
    intra, inter = partition_edges(sc, hemis)
    return HeteroBrainGraph(
        hemisphere=hemis, intra_adj=intra, inter_adj=inter,
        features=np.asarray(features, dtype=float), merged_edge_types=merged,
    )


def random_graph(rng, n, feature_dim=None, density=0.5):
    """Random valid graph with a random hemisphere labelling (both sides non-empty)."""
    while True:
        labels = rng.choice(["L", "R"], size=n)
        if "L" in labels and "R" in labels:
            break
    sc = np.triu(rng.random((n, n)) * (rng.random((n, n)) < density), k=1)
    sc = sc + sc.T
    f = rng.standard_normal((n, feature_dim or n))
    hemis = tuple(Hemisphere(c) for c in labels)
    intra, inter = partition_edges(sc, hemis)
    return HeteroBrainGraph(hemisphere=hemis, intra_adj=intra, inter_adj=inter, features=f)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
