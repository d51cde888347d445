"""Command line entry points for the adapter."""

from __future__ import annotations

import sys

import click

from .config import AdapterConfig
from .train import finetune as _finetune
from .train import predict as _predict
from .train import pretrain as _pretrain


def _load_config(path: str | None, seed: int | None) -> AdapterConfig:
    cfg = AdapterConfig.from_json(path) if path else AdapterConfig()
    if seed is not None:
        cfg = AdapterConfig(**{**cfg.__dict__, "seed": seed})
    return cfg


def _echo(line: str) -> None:
    click.echo(line, err=True)


@click.group()
def main() -> None:
    """Toy seq2seq trained on structured-reporting JSONL corpora."""


@main.command()
@click.option("--in", "in_path", required=True, help="Masked corpus JSONL.")
@click.option("--out", "out_path", required=True, help="Checkpoint path (.pt).")
@click.option("--config", "config_path", default=None, help="Config JSON.")
@click.option("--seed", type=int, default=None, help="Override config seed.")
@click.option("--quiet", is_flag=True)
def pretrain(in_path, out_path, config_path, seed, quiet):
    """Denoising pretraining on a masked corpus."""
    cfg = _load_config(config_path, seed)
    history = _pretrain(in_path, out_path, cfg, None if quiet else _echo)
    click.echo(f"best val loss {history['best_val_loss']:.4f} -> {out_path}")


@main.command()
@click.option("--in", "in_path", required=True, help="Prepared pairs JSONL.")
@click.option("--out", "out_path", required=True, help="Checkpoint path (.pt).")
@click.option("--init", "init_path", default=None, help="Pretrained checkpoint.")
@click.option("--config", "config_path", default=None, help="Config JSON.")
@click.option("--seed", type=int, default=None, help="Override config seed.")
@click.option("--quiet", is_flag=True)
def finetune(in_path, out_path, init_path, config_path, seed, quiet):
    """Supervised finetuning on input/target pairs."""
    cfg = _load_config(config_path, seed)
    history = _finetune(in_path, out_path, cfg, init_path, None if quiet else _echo)
    click.echo(f"best val loss {history['best_val_loss']:.4f} -> {out_path}")


@main.command()
@click.option("--in", "in_path", required=True, help="Prepared pairs JSONL.")
@click.option("--model", "checkpoint_path", required=True, help="Checkpoint (.pt).")
@click.option("--out", "out_path", required=True, help="Predictions JSONL.")
def predict(in_path, checkpoint_path, out_path):
    """Greedy decoding; writes {id, prediction} lines."""
    n = _predict(in_path, checkpoint_path, out_path)
    click.echo(f"wrote {n} predictions -> {out_path}")


if __name__ == "__main__":
    sys.exit(main())
