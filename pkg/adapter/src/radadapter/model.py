"""Small transformer encoder-decoder with greedy decoding."""

from __future__ import annotations

import math

import torch
from torch import nn

from .config import AdapterConfig

PAD_ID, BOS_ID, EOS_ID = 0, 1, 2


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, cfg: AdapterConfig):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Embedding(vocab_size, cfg.d_model, padding_idx=PAD_ID)
        self.pos = nn.Embedding(cfg.max_len, cfg.d_model)
        self.core = nn.Transformer(
            d_model=cfg.d_model,
            nhead=cfg.n_heads,
            num_encoder_layers=cfg.n_encoder_layers,
            num_decoder_layers=cfg.n_decoder_layers,
            dim_feedforward=cfg.ffn_dim,
            dropout=cfg.dropout,
            batch_first=True,
        )
        self.out = nn.Linear(cfg.d_model, vocab_size)

    @property
    def vocab_size(self) -> int:
        return self.embed.num_embeddings

    def _represent(self, ids: torch.Tensor) -> torch.Tensor:
        n = ids.size(1)
        pos = torch.arange(n, device=ids.device)
        return self.embed(ids) * math.sqrt(self.cfg.d_model) + self.pos(pos)

    @staticmethod
    def _causal(n: int, device) -> torch.Tensor:
        return torch.triu(torch.ones(n, n, dtype=torch.bool, device=device), 1)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        causal = self._causal(tgt_in.size(1), src.device)
        hidden = self.core(
            self._represent(src),
            self._represent(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=src == PAD_ID,
            tgt_key_padding_mask=tgt_in == PAD_ID,
            memory_key_padding_mask=src == PAD_ID,
        )
        return self.out(hidden)

    @torch.no_grad()
    def greedy_decode(self, src: torch.Tensor, max_new: int | None = None) -> list[list[int]]:
        """Batch greedy decoding; returns id lists without BOS, cut at EOS."""
        self.eval()
        limit = max_new or self.cfg.max_len - 1
        pad_mask = src == PAD_ID
        memory = self.core.encoder(self._represent(src), src_key_padding_mask=pad_mask)
        batch = src.size(0)
        tgt = torch.full((batch, 1), BOS_ID, dtype=torch.long, device=src.device)
        done = torch.zeros(batch, dtype=torch.bool, device=src.device)
        for _ in range(limit):
            causal = self._causal(tgt.size(1), src.device)
            hidden = self.core.decoder(
                self._represent(tgt), memory,
                tgt_mask=causal, memory_key_padding_mask=pad_mask)
            step = self.out(hidden[:, -1, :]).argmax(dim=-1)
            step = torch.where(done, torch.full_like(step, PAD_ID), step)
            tgt = torch.cat([tgt, step.unsqueeze(1)], dim=1)
            done = done | (step == EOS_ID)
            if bool(done.all()):
                break
        out = []
        for row in tgt[:, 1:].tolist():
            ids = []
            for i in row:
                if i == EOS_ID:
                    break
                if i != PAD_ID:
                    ids.append(i)
            out.append(ids)
        return out

    def resize_vocab(self, new_size: int) -> None:
        """Grow embedding and output rows for tokens added at finetune time."""
        if new_size < self.vocab_size:
            raise ValueError("vocab can only grow")
        if new_size == self.vocab_size:
            return
        old_embed, old_out = self.embed, self.out
        self.embed = nn.Embedding(new_size, self.cfg.d_model, padding_idx=PAD_ID)
        self.out = nn.Linear(self.cfg.d_model, new_size)
        with torch.no_grad():
            self.embed.weight[: old_embed.num_embeddings] = old_embed.weight
            self.out.weight[: old_out.out_features] = old_out.weight
            self.out.bias[: old_out.out_features] = old_out.bias
