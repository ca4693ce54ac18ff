"""Figure rendering for the CLI report paths.

Figures sit next to the delimited output they visualize and are purely
presentational; nothing downstream reads them back.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_run_figures(out_dir, ssl_rows, metric_rows, ems_rows) -> None:
    out = Path(out_dir)
    if ssl_rows:
        fig, ax = plt.subplots(figsize=(6, 4))
        seeds = sorted({r["seed"] for r in ssl_rows})
        for seed in seeds:
            rows = [r for r in ssl_rows if r["seed"] == seed]
            ax.plot([r["epoch"] for r in rows], [r["mean_ssl_loss"] for r in rows],
                    label=f"seed {seed}", alpha=0.8)
        ax.set_xlabel("epoch")
        ax.set_ylabel("mean pretraining loss")
        ax.legend(fontsize=8)
        _save(fig, out / "ssl_loss.png")
    if metric_rows:
        fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
        for ax, metric in zip(axes, ("accuracy", "f1")):
            for split, style in (("train", "--"), ("test", "-")):
                epochs = sorted({r["epoch"] for r in metric_rows})
                means = []
                for e in epochs:
                    vals = [r[metric] for r in metric_rows
                            if r["epoch"] == e and r["split"] == split and r[metric] is not None]
                    means.append(np.mean(vals) if vals else np.nan)
                ax.plot(epochs, means, style, label=split)
            ax.set_xlabel("epoch")
            ax.set_ylabel(metric)
            ax.legend(fontsize=8)
        _save(fig, out / "metrics.png")
    if ems_rows:
        layers = sorted({r["layer"] for r in ems_rows})
        fig, axes = plt.subplots(1, len(layers), figsize=(5 * len(layers), 4), squeeze=False)
        for ax, layer in zip(axes[0], layers):
            epochs = sorted({r["epoch"] for r in ems_rows})
            for key, label in (("ems_intra", "intra"), ("ems_inter", "inter")):
                means = []
                for e in epochs:
                    vals = [r[key] for r in ems_rows if r["epoch"] == e and r["layer"] == layer]
                    means.append(np.mean(vals) if vals else np.nan)
                ax.plot(epochs, means, label=label)
            ax.set_title(f"layer {layer}")
            ax.set_xlabel("epoch")
            ax.set_ylabel("edge-type activation")
            ax.legend(fontsize=8)
        _save(fig, out / "ems.png")


def render_sweep_figure(out_dir, summary) -> None:
    ratios = sorted(summary["ratios"], key=float)
    xs = [float(r) for r in ratios]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, metric in zip(axes, ("f1", "auc")):
        for variant, style in (("pretrained", "-o"), ("scratch", "--s")):
            ys = [summary["ratios"][r][variant][metric] for r in ratios]
            ax.plot(xs, ys, style, label=variant)
        ax.set_xlabel("training-pool fraction")
        ax.set_ylabel(metric)
        ax.legend(fontsize=8)
    _save(fig, Path(out_dir) / "sweep.png")


def render_stats_figure(out_dir, stats) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    data, labels = [], []
    for vals, name in (
        (stats.left_intra, "left intra"),
        (stats.right_intra, "right intra"),
        (stats.inter, "inter"),
    ):
        data.append(vals[np.isfinite(vals)])
        labels.append(name)
    ax.boxplot(data, tick_labels=labels)
    ax.set_ylabel("|weight|" if stats.absolute else "weight")
    ax.set_title("per-subject mean edge strength")
    _save(fig, Path(out_dir) / "strengths.png")
