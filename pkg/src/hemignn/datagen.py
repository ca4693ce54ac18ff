"""Synthetic lateralized-connectome generation, file ingestion, and splits.

Generated subjects follow the qualitative regime of real structural data:
within-hemisphere edges are denser and stronger than between-hemisphere
edges, and the class signal lives entirely on a fixed subset of
between-hemisphere pairs. Features are a row-normalized correlation
surrogate of the structural rows plus noise, so perturbed nodes carry a
weaker echo of the signal.

Graph file schema (version 1), one JSON object per subject:

    {"n": int, "hemisphere": ["L"|"R", ...], "sc": [[float]],
     "fc": [[float]], "label": 0|1}

Matrices are row-major and full. `sc` must be symmetric, non-negative,
zero-diagonal; placement of its entries must match the hemisphere labels.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, GraphValidationError, SchemaError
from .graph_model import Hemisphere, HeteroBrainGraph, partition_edges
from .numerics.rng import named_stream

SCHEMA_VERSION = 1


@dataclass
class GenConfig:
    """Knobs of the synthetic generator; all overridable, defaults are desk-scale."""

    n_nodes: int = 20
    n_subjects: int = 200
    intra_density: float = 0.4
    inter_density: float = 0.15
    mu_intra: float = 1.0
    mu_inter: float = 0.4
    sigma_w: float = 0.2
    signal_strength: float = 0.6
    feature_noise: float = 0.3
    seed: int = 7

    def __post_init__(self):
        if self.n_nodes < 4 or self.n_nodes % 2:
            raise ConfigError(f"n_nodes must be even and >= 4, got {self.n_nodes}")
        if self.n_subjects < 2:
            raise ConfigError(f"need at least 2 subjects, got {self.n_subjects}")
        for name in ("intra_density", "inter_density"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")
        for name in ("sigma_w", "signal_strength", "feature_noise"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")


@dataclass
class Dataset:
    """Subjects with binary labels plus the manifest describing their origin."""

    subjects: list
    manifest: dict
    subject_ids: tuple = ()

    def __post_init__(self):
        if not self.subjects:
            raise ConfigError("dataset has no subjects")
        n = self.subjects[0][0].n_nodes
        width = self.subjects[0][0].features.shape[1]
        for g, label in self.subjects:
            if g.n_nodes != n:
                raise ConfigError(f"mixed node counts in dataset: {n} vs {g.n_nodes}")
            if g.features.shape[1] != width:
                raise ConfigError("mixed feature widths in dataset")
            if label not in (0, 1):
                raise ConfigError(f"labels must be 0 or 1, got {label!r}")
        labels = {label for _, label in self.subjects}
        if labels != {0, 1}:
            raise ConfigError("dataset must contain both classes")
        if not self.subject_ids:
            object.__setattr__(
                self, "subject_ids", tuple(f"subject_{i:04d}" for i in range(len(self.subjects)))
            )
        elif len(self.subject_ids) != len(self.subjects):
            raise ConfigError("subject_ids length does not match subjects")

    @property
    def labels(self) -> np.ndarray:
        return np.array([y for _, y in self.subjects])


def generate_dataset(cfg: GenConfig) -> Dataset:
    """Sample a balanced synthetic dataset, bit-reproducible from cfg.seed."""
    n = cfg.n_nodes
    half = n // 2
    hemisphere = tuple(
        Hemisphere.LEFT if i < half else Hemisphere.RIGHT for i in range(n)
    )
    same = np.array([[hemisphere[i] is hemisphere[j] for j in range(n)] for i in range(n)])
    cross_pairs = [(i, j) for i in range(half) for j in range(half, n)]
    pattern_rng = named_stream(cfg.seed, "data/signal-pattern")
    n_signal = max(1, round(cfg.inter_density * len(cross_pairs)))
    picked = sorted(pattern_rng.choice(len(cross_pairs), size=n_signal, replace=False).tolist())
    signal_pairs = [cross_pairs[p] for p in picked]

    density = np.where(same, cfg.intra_density, cfg.inter_density)
    mu = np.where(same, cfg.mu_intra, cfg.mu_inter)
    subjects = []
    for s in range(cfg.n_subjects):
        label = s % 2
        rng = named_stream(cfg.seed, f"data/subject/{s}")
        present = rng.random((n, n)) < density
        weights = np.abs(mu + cfg.sigma_w * rng.standard_normal((n, n)))
        upper = np.triu(np.ones((n, n), dtype=bool), k=1)
        sc = np.where(present & upper, weights, 0.0)
        base = np.abs(cfg.mu_inter + cfg.sigma_w * rng.standard_normal(n_signal))
        bump = cfg.signal_strength * np.abs(1.0 + cfg.sigma_w * rng.standard_normal(n_signal))
        for (p, q), w0, dw in zip(signal_pairs, base, bump):
            sc[p, q] = w0 + label * dw
        sc = sc + sc.T
        norms = np.linalg.norm(sc, axis=1, keepdims=True)
        rows = sc / np.where(norms > 0, norms, 1.0)
        fc = rows @ rows.T + cfg.feature_noise * rng.standard_normal((n, n))
        intra, inter = partition_edges(sc, hemisphere)
        subjects.append(
            (
                HeteroBrainGraph(
                    hemisphere=hemisphere, intra_adj=intra, inter_adj=inter, features=fc
                ),
                label,
            )
        )
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "generated",
        "generator": asdict(cfg),
    }
    return Dataset(subjects=subjects, manifest=manifest)


def _require(cond: bool, message: str, file, field_name: str) -> None:
    if not cond:
        raise SchemaError(message, file=str(file), field=field_name)


def _load_graph_file(path, normalize_sc: bool):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}", file=str(path)) from e
    _require(isinstance(raw, dict), "top level must be an object", path, "")
    expected = {"n", "hemisphere", "sc", "fc", "label"}
    extra = set(raw) - expected
    _require(not extra, f"unknown keys {sorted(extra)}", path, sorted(extra)[0] if extra else "")
    missing = expected - set(raw)
    _require(not missing, f"missing keys {sorted(missing)}", path, sorted(missing)[0] if missing else "")
    n = raw["n"]
    _require(isinstance(n, int) and n > 0, "n must be a positive integer", path, "n")
    hemi_raw = raw["hemisphere"]
    _require(
        isinstance(hemi_raw, list) and len(hemi_raw) == n and set(hemi_raw) <= {"L", "R"},
        f"hemisphere must be a list of {n} 'L'/'R' labels", path, "hemisphere",
    )
    hemisphere = tuple(Hemisphere(h) for h in hemi_raw)
    try:
        sc = np.array(raw["sc"], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"sc is not numeric: {e}", file=str(path), field="sc") from e
    _require(sc.shape == (n, n), f"sc must be {n}x{n}, got {sc.shape}", path, "sc")
    try:
        fc = np.array(raw["fc"], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"fc is not numeric: {e}", file=str(path), field="fc") from e
    _require(fc.ndim == 2 and fc.shape[0] == n, f"fc must have {n} rows", path, "fc")
    _require(raw["label"] in (0, 1), "label must be 0 or 1", path, "label")
    if normalize_sc and sc.size and sc.max() > 0:
        sc = sc / sc.max()
    try:
        intra, inter = partition_edges(sc, hemisphere)
        graph = HeteroBrainGraph(
            hemisphere=hemisphere, intra_adj=intra, inter_adj=inter, features=fc
        )
    except GraphValidationError as e:
        raise SchemaError(str(e), file=str(path), field="sc") from e
    return graph, raw["label"]


def ingest(graph_files, normalize_sc: bool = False) -> Dataset:
    """Load and validate graph JSON files into a dataset.

    Files are processed in sorted order; any schema or structural violation
    names the file and field. All subjects must share one node count.
    """
    paths = sorted(Path(p) for p in graph_files)
    if not paths:
        raise ConfigError("no graph files to ingest")
    subjects = []
    ids = []
    n_ref = None
    for path in paths:
        graph, label = _load_graph_file(path, normalize_sc)
        if n_ref is None:
            n_ref = graph.n_nodes
        elif graph.n_nodes != n_ref:
            raise SchemaError(
                f"node count {graph.n_nodes} differs from the first file's {n_ref}",
                file=str(path), field="n",
            )
        subjects.append((graph, label))
        ids.append(path.stem)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "ingested",
        "normalize_sc": bool(normalize_sc),
        "source_files": [p.name for p in paths],
    }
    return Dataset(subjects=subjects, manifest=manifest, subject_ids=tuple(ids))


def export_dataset(dataset: Dataset, out_dir) -> list[Path]:
    """Write one schema-conformant JSON file per subject plus the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for sid, (g, label) in zip(dataset.subject_ids, dataset.subjects):
        payload = {
            "n": g.n_nodes,
            "hemisphere": [h.value for h in g.hemisphere],
            "sc": (g.intra_adj + g.inter_adj).tolist(),
            "fc": g.features.tolist(),
            "label": int(label),
        }
        path = out / f"{sid}.json"
        path.write_text(json.dumps(payload, sort_keys=True))
        written.append(path)
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(dataset.manifest, sort_keys=True, indent=2))
    return written


def _stratified_take(labels: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    chosen = []
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        take = int(fraction * idx.size)
        perm = rng.permutation(idx.size)
        chosen.extend(idx[perm[:take]].tolist())
    return np.array(sorted(chosen), dtype=int)


def _subset(dataset: Dataset, indices: np.ndarray, note: dict) -> Dataset:
    manifest = dict(dataset.manifest)
    manifest["derived"] = note
    return Dataset(
        subjects=[dataset.subjects[i] for i in indices],
        manifest=manifest,
        subject_ids=tuple(dataset.subject_ids[i] for i in indices),
    )


def split(dataset: Dataset, train_ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Label-stratified disjoint split whose union is the dataset."""
    if not 0.0 < train_ratio < 1.0:
        raise ConfigError(f"train_ratio must lie in (0, 1), got {train_ratio}")
    rng = named_stream(seed, "split")
    labels = dataset.labels
    train_idx = _stratified_take(labels, train_ratio, rng)
    test_idx = np.setdiff1d(np.arange(len(dataset.subjects)), train_idx)
    train = _subset(dataset, train_idx, {"role": "train", "ratio": train_ratio, "seed": seed})
    test = _subset(dataset, test_idx, {"role": "test", "ratio": train_ratio, "seed": seed})
    return train, test


def subsample(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    """Stratified subsample of a training pool (fraction 1.0 returns it unchanged)."""
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must lie in (0, 1], got {fraction}")
    if fraction == 1.0:
        return dataset
    rng = named_stream(seed, "subsample")
    idx = _stratified_take(dataset.labels, fraction, rng)
    return _subset(dataset, idx, {"role": "subsample", "fraction": fraction, "seed": seed})
