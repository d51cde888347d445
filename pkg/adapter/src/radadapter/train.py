"""Two-stage training: pretrain on a masked corpus, finetune on prepared
pairs, greedy prediction. Everything runs on CPU and is fully seeded.
"""

from __future__ import annotations

import random

import torch
from torch import nn

from .config import AdapterConfig
from .data import Pair, load_pairs, write_predictions
from .model import PAD_ID, Seq2Seq
from .vocab import Vocab


def save_checkpoint(path: str, model: Seq2Seq, vocab: Vocab, cfg: AdapterConfig) -> None:
    torch.save({"config": cfg.__dict__, "vocab": vocab.tokens,
                "state": model.state_dict()}, path)


def load_checkpoint(path: str) -> tuple[Seq2Seq, Vocab, AdapterConfig]:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    cfg = AdapterConfig(**blob["config"])
    vocab = Vocab(blob["vocab"])
    model = Seq2Seq(len(vocab), cfg)
    model.load_state_dict(blob["state"])
    return model, vocab, cfg


def _batches(pairs: list[Pair], vocab: Vocab, cfg: AdapterConfig, shuffle_rng=None):
    order = list(range(len(pairs)))
    if shuffle_rng is not None:
        shuffle_rng.shuffle(order)
    for lo in range(0, len(order), cfg.batch_size):
        chunk = [pairs[i] for i in order[lo : lo + cfg.batch_size]]
        src = [vocab.encode(p.input, cfg.max_len) for p in chunk]
        tgt = [vocab.encode(p.target or "", cfg.max_len) for p in chunk]
        yield _pad(src), _pad(tgt)


def _pad(rows: list[list[int]]) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([r + [PAD_ID] * (width - len(r)) for r in rows])


def _epoch_loss(model: Seq2Seq, batches, loss_fn, optim=None) -> float:
    total, count = 0.0, 0
    for src, tgt in batches:
        logits = model(src, tgt[:, :-1])
        loss = loss_fn(logits.reshape(-1, model.vocab_size), tgt[:, 1:].reshape(-1))
        if optim is not None:
            optim.zero_grad()
            loss.backward()
            optim.step()
        n = int((tgt[:, 1:] != PAD_ID).sum())
        total += float(loss.detach()) * n
        count += n
    return total / max(count, 1)


def fit(model: Seq2Seq, pairs: list[Pair], vocab: Vocab, cfg: AdapterConfig,
        log=None) -> dict:
    """Train with early stopping on held-out loss; returns a history dict.
    The model is left holding its best (lowest validation loss) weights.
    """
    torch.manual_seed(cfg.seed)
    rng = random.Random(cfg.seed)
    order = list(range(len(pairs)))
    rng.shuffle(order)
    n_val = max(1, int(cfg.val_fraction * len(pairs))) if len(pairs) > 1 else 0
    val = [pairs[i] for i in order[:n_val]]
    train = [pairs[i] for i in order[n_val:]] or list(pairs)

    optim = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD_ID)
    best_loss, best_state, stale = float("inf"), None, 0
    history = {"train_loss": [], "val_loss": []}
    for epoch in range(cfg.max_epochs):
        model.train()
        train_loss = _epoch_loss(model, _batches(train, vocab, cfg, rng), loss_fn, optim)
        model.eval()
        with torch.no_grad():
            val_loss = _epoch_loss(model, _batches(val or train, vocab, cfg), loss_fn)
        history["train_loss"].append(train_loss)
        history["val_loss"].append(val_loss)
        if log:
            log(f"epoch {epoch + 1}: train {train_loss:.4f} val {val_loss:.4f}")
        if val_loss < best_loss - 1e-5:
            best_loss, stale = val_loss, 0
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    history["best_val_loss"] = best_loss
    return history


def pretrain(masked_path: str, out_path: str, cfg: AdapterConfig, log=None) -> dict:
    pairs = load_pairs(masked_path, require_target=True)
    vocab = Vocab.build(p.input for p in pairs)
    vocab.extend(p.target or "" for p in pairs)
    torch.manual_seed(cfg.seed)
    model = Seq2Seq(len(vocab), cfg)
    history = fit(model, pairs, vocab, cfg, log)
    save_checkpoint(out_path, model, vocab, cfg)
    return history


def finetune(prepared_path: str, out_path: str, cfg: AdapterConfig,
             init_path: str | None = None, log=None) -> dict:
    pairs = load_pairs(prepared_path, require_target=True)
    if init_path:
        model, vocab, init_cfg = load_checkpoint(init_path)
        if (init_cfg.d_model, init_cfg.n_heads) != (cfg.d_model, cfg.n_heads):
            raise ValueError("finetune config must match the pretrained architecture")
        added = vocab.extend([p.input for p in pairs] + [p.target or "" for p in pairs])
        if added:
            torch.manual_seed(cfg.seed)
            model.resize_vocab(len(vocab))
    else:
        vocab = Vocab.build([p.input for p in pairs] + [p.target or "" for p in pairs])
        torch.manual_seed(cfg.seed)
        model = Seq2Seq(len(vocab), cfg)
    history = fit(model, pairs, vocab, cfg, log)
    save_checkpoint(out_path, model, vocab, cfg)
    return history


def predict(prepared_path: str, checkpoint_path: str, out_path: str) -> int:
    model, vocab, cfg = load_checkpoint(checkpoint_path)
    pairs = load_pairs(prepared_path)
    rows = []
    for lo in range(0, len(pairs), cfg.batch_size):
        chunk = pairs[lo : lo + cfg.batch_size]
        src = _pad([vocab.encode(p.input, cfg.max_len) for p in chunk])
        for pair, ids in zip(chunk, model.greedy_decode(src)):
            rows.append((pair.id, vocab.decode(ids)))
    write_predictions(out_path, rows)
    return len(rows)
