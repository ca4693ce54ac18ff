"""Drives whole experiments: split, pretrain, fine-tune, evaluate, write artifacts.

Everything here is a pure function of (config, dataset), so a manifest plus
the dataset reproduces every number bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import edge_strength_stats
from .config import CONFIG_SCHEMA_VERSION, RunConfig
from .datagen import Dataset, split, subsample
from .encoders import make_ablation
from .graph_model import ALL
from .model import encode, graph_vector_from_embeddings, init_model
from .numerics.rng import SeedFanout
from .prediction import compute_metrics, evaluate_split, finetune
from .pretraining import SSLConfig, pretrain

METRIC_NAMES = ("accuracy", "f1", "auc", "sensitivity")


def apply_mode(dataset: Dataset, mode: str) -> Dataset:
    if mode == "hetero":
        return dataset
    manifest = dict(dataset.manifest)
    manifest["ablation_mode"] = mode
    return Dataset(
        subjects=[(make_ablation(g, mode), y) for g, y in dataset.subjects],
        manifest=manifest,
        subject_ids=dataset.subject_ids,
    )


@dataclass
class SeedResult:
    seed: int
    final_test: dict
    ssl_trace: list
    metrics_rows: list
    ems_rows: list


def run_single_seed(
    cfg: RunConfig,
    dataset: Dataset,
    seed: int,
    *,
    train_fraction: float = 1.0,
    ems_capture: bool = True,
):
    """One full train/evaluate cycle; returns the result and the trained model."""
    streams = SeedFanout(seed)
    train, test = split(dataset, cfg.train_ratio, seed)
    if train_fraction < 1.0:
        train = subsample(train, train_fraction, seed)
    train = apply_mode(train, cfg.mode)
    test = apply_mode(test, cfg.mode)
    g0 = train.subjects[0][0]
    model = init_model(
        streams.stream("init"),
        n_nodes=g0.n_nodes,
        feature_dim=g0.features.shape[1],
        hidden_dim=cfg.hidden_dim,
        hbn_layers=cfg.hbn_layers,
        sgc_k=cfg.sgc_k,
        edge_types=(ALL,) if cfg.mode == "homo" else g0.edge_types,
        dropout=cfg.dropout,
        mlp_hidden=cfg.mlp_hidden,
    )
    ssl_trace = []
    if cfg.pretrain and cfg.epochs_pretrain > 0:
        ssl_cfg = SSLConfig(
            K=cfg.K, epochs=cfg.epochs_pretrain, lr=cfg.lr_pretrain, l2=cfg.l2,
            batch_size=cfg.batch_size,
        )
        ssl_trace = pretrain(train, model, ssl_cfg, streams)
    metrics_rows, ems_rows = finetune(
        train, test, model, cfg, streams, ems_capture=ems_capture
    )
    scores, labels, _ = evaluate_split(model, test)
    final = compute_metrics(scores, labels, allow_undefined=True)
    result = SeedResult(
        seed=seed,
        final_test={name: getattr(final, name) for name in METRIC_NAMES},
        ssl_trace=ssl_trace,
        metrics_rows=metrics_rows,
        ems_rows=ems_rows,
    )
    return result, model


def summarize_seed_results(results) -> dict:
    per_seed = [{"seed": r.seed, **r.final_test} for r in results]
    mean, std = {}, {}
    for name in METRIC_NAMES:
        vals = [r.final_test[name] for r in results if r.final_test[name] is not None]
        mean[name] = float(np.mean(vals)) if vals else None
        std[name] = float(np.std(vals)) if vals else None
    return {"per_seed": per_seed, "mean": mean, "std": std}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[h]) for h in header))
    Path(path).write_text("\n".join(lines) + "\n")


def run_experiment(cfg: RunConfig, dataset: Dataset, out_dir, *, render_figures: bool = True) -> dict:
    """Run every seed, write manifest.json and the trace CSVs, return the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    ssl_rows, metric_rows, ems_rows = [], [], []
    for seed in cfg.seeds:
        result, _ = run_single_seed(cfg, dataset, seed)
        results.append(result)
        for epoch, loss in enumerate(result.ssl_trace, start=1):
            ssl_rows.append({"seed": seed, "epoch": epoch, "mean_ssl_loss": loss})
        for row in result.metrics_rows:
            metric_rows.append({"seed": seed, **row})
        for row in result.ems_rows:
            ems_rows.append({"seed": seed, **row})
    manifest = {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "optimizer": "adam",
        "config": cfg.to_dict(),
        "results": summarize_seed_results(results),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    if cfg.pretrain:
        write_csv(out / "ssl_trace.csv", ["seed", "epoch", "mean_ssl_loss"], ssl_rows)
    write_csv(
        out / "metrics_trace.csv",
        ["seed", "epoch", "split", "accuracy", "f1", "auc", "sensitivity", "ce_loss"],
        metric_rows,
    )
    write_csv(
        out / "ems_trace.csv",
        ["seed", "epoch", "layer", "ems_intra", "ems_inter"],
        ems_rows,
    )
    if render_figures:
        from . import reporting

        reporting.render_run_figures(out, ssl_rows, metric_rows, ems_rows)
    return manifest


def run_sweep(cfg: RunConfig, dataset: Dataset, ratios, out_dir, *, render_figures: bool = True) -> dict:
    """Pretrained-vs-scratch comparison at each training-pool fraction.

    Each (ratio, variant) pair gets a full run directory; the summary
    records mean metrics and the relative improvement from pretraining.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"schema_version": CONFIG_SCHEMA_VERSION, "ratios": {}}
    for ratio in ratios:
        if not 0.0 < ratio <= 1.0:
            raise ValueError(f"sweep ratios must lie in (0, 1], got {ratio}")
        entry = {}
        for variant, with_pretrain in (("pretrained", True), ("scratch", False)):
            sub_cfg = dataclasses.replace(cfg, pretrain=with_pretrain)
            results = []
            for seed in sub_cfg.seeds:
                result, _ = run_single_seed(
                    sub_cfg, dataset, seed, train_fraction=ratio, ems_capture=False
                )
                results.append(result)
            run_dir = out / f"ratio_{ratio}" / variant
            run_dir.mkdir(parents=True, exist_ok=True)
            manifest = {
                "schema_version": CONFIG_SCHEMA_VERSION,
                "optimizer": "adam",
                "config": {**sub_cfg.to_dict(), "train_fraction": ratio},
                "results": summarize_seed_results(results),
            }
            (run_dir / "manifest.json").write_text(
                json.dumps(manifest, sort_keys=True, indent=2) + "\n"
            )
            entry[variant] = manifest["results"]["mean"]
        improvement = {}
        for name in ("f1", "auc", "accuracy"):
            scratch = entry["scratch"][name]
            pre = entry["pretrained"][name]
            improvement[name] = (pre - scratch) / scratch if scratch else None
        entry["relative_improvement"] = improvement
        summary["ratios"][repr(float(ratio))] = entry
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    if render_figures:
        from . import reporting

        reporting.render_sweep_figure(out, summary)
    return summary


def run_stats(dataset: Dataset, out_dir, absolute: bool = False, *, render_figures: bool = True) -> dict:
    """Edge-strength report (stats.json) plus its figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats = edge_strength_stats(dataset, absolute=absolute)
    report = {"schema_version": CONFIG_SCHEMA_VERSION, **stats.to_report()}
    (out / "stats.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    if render_figures:
        from . import reporting

        reporting.render_stats_figure(out, stats)
    return report


def export_embeddings(cfg: RunConfig, dataset: Dataset, out_path) -> Path:
    """Train with the first seed, then write each subject's graph vector to CSV."""
    _, model = run_single_seed(cfg, dataset, cfg.seeds[0], ems_capture=False)
    shaped = apply_mode(dataset, cfg.mode)
    rows = []
    for sid, (g, _) in zip(shaped.subject_ids, shaped.subjects):
        emb = encode(g, model, training=False)
        gh = graph_vector_from_embeddings(emb, model, training=False)
        rows.append((sid, gh.data[:, 0]))
    width = rows[0][1].size
    header = ["subject_id"] + [f"g{i}" for i in range(width)]
    lines = [",".join(header)]
    for sid, vec in rows:
        lines.append(",".join([sid] + [repr(float(v)) for v in vec]))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n")
    return out_path
