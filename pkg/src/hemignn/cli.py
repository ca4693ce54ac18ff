"""Command-line experiment driver."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .config import load_gen_config, load_run_config
from .datagen import export_dataset, generate_dataset, ingest
from .errors import HemignnError
from . import runner


def _load_dataset(path: str, normalize_sc: bool = False):
    p = Path(path)
    if not p.exists():
        raise click.ClickException(f"dataset path does not exist: {p}")
    files = sorted(f for f in p.glob("*.json") if f.name != "manifest.json") if p.is_dir() else [p]
    if not files:
        raise click.ClickException(f"no subject files under {p}")
    return ingest(files, normalize_sc=normalize_sc)


def _dataset_for(cfg):
    if not cfg.dataset:
        raise click.ClickException("run config has an empty 'dataset' path")
    return _load_dataset(cfg.dataset)


@click.group()
def main():
    """Hemisphere-aware brain-network experiments."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
def generate(config_path, out_dir):
    """Generate a synthetic dataset: one JSON per subject plus manifest.json."""
    try:
        cfg = load_gen_config(config_path)
        dataset = generate_dataset(cfg)
        written = export_dataset(dataset, out_dir)
    except HemignnError as e:
        raise click.ClickException(str(e))
    click.echo(f"wrote {len(written)} subjects to {out_dir}")


@main.command("ingest")
@click.argument("files", nargs=-1, required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--normalize-sc", is_flag=True, help="Divide each subject's sc by its max weight.")
def ingest_cmd(files, out_dir, normalize_sc):
    """Validate graph files and re-export them as a canonical dataset."""
    try:
        dataset = ingest(files, normalize_sc=normalize_sc)
        written = export_dataset(dataset, out_dir)
    except HemignnError as e:
        raise click.ClickException(str(e))
    click.echo(f"ingested {len(written)} subjects into {out_dir}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
def run(config_path, out_dir):
    """Split, optionally pretrain, fine-tune, and evaluate for every seed."""
    try:
        cfg = load_run_config(config_path)
        dataset = _dataset_for(cfg)
        manifest = runner.run_experiment(cfg, dataset, out_dir)
    except HemignnError as e:
        raise click.ClickException(str(e))
    mean = manifest["results"]["mean"]
    stage = "pretrain+finetune" if cfg.pretrain else "scratch"
    click.echo(
        f"{stage} [{cfg.mode}] mean test accuracy {mean['accuracy']:.4f}, f1 {mean['f1']:.4f}"
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--ratios", required=True, help="Comma-separated training-pool fractions, e.g. 0.5,0.7,0.9")
@click.option("--out", "out_dir", required=True, type=click.Path())
def sweep(config_path, ratios, out_dir):
    """Compare pretrained vs scratch across training-set fractions."""
    try:
        ratio_list = [float(r) for r in ratios.split(",") if r.strip()]
    except ValueError as e:
        raise click.ClickException(f"bad --ratios value: {e}")
    try:
        cfg = load_run_config(config_path)
        dataset = _dataset_for(cfg)
        summary = runner.run_sweep(cfg, dataset, ratio_list, out_dir)
    except (HemignnError, ValueError) as e:
        raise click.ClickException(str(e))
    improvements = [
        (float(r), entry["relative_improvement"]["f1"])
        for r, entry in summary["ratios"].items()
    ]
    improvements.sort()
    for r, imp in improvements:
        click.echo(f"ratio {r}: relative f1 improvement from pretraining {imp:+.4f}")
    if len(improvements) >= 2 and improvements[0][1] < improvements[-1][1]:
        click.echo(
            "note: improvement at the smallest ratio is not the largest "
            "(informational trend check)"
        )


@main.command()
@click.option("--dataset", "dataset_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--absolute", is_flag=True, help="Use |weight| as the strength.")
def stats(dataset_path, out_dir, absolute):
    """Edge-strength statistics with paired t-tests (stats.json + figure)."""
    try:
        dataset = _load_dataset(dataset_path)
        report = runner.run_stats(dataset, out_dir, absolute=absolute)
    except HemignnError as e:
        raise click.ClickException(str(e))
    for name, comp in report["comparisons"].items():
        click.echo(f"{name}: t={comp['t']:.4f}, p={comp['p']:.3e}")


@main.command("export-embeddings")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
def export_embeddings(config_path, out_path):
    """Train with the first seed and export every subject's graph vector."""
    try:
        cfg = load_run_config(config_path)
        dataset = _dataset_for(cfg)
        path = runner.export_embeddings(cfg, dataset, out_path)
    except HemignnError as e:
        raise click.ClickException(str(e))
    click.echo(f"wrote embeddings for {len(dataset.subjects)} subjects to {path}")


if __name__ == "__main__":
    main()
