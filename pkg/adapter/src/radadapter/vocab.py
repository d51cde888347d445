"""Whitespace-token vocabulary with reserved specials."""

from __future__ import annotations

import json
from typing import Iterable

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = [PAD, BOS, EOS, UNK]


class Vocab:
    def __init__(self, tokens: list[str]):
        if tokens[: len(SPECIALS)] != SPECIALS:
            raise ValueError("vocab must start with the reserved specials")
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate tokens in vocab")
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(tokens)}

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocab":
        seen: dict[str, None] = {}
        for text in texts:
            for tok in text.split():
                seen.setdefault(tok, None)
        return cls(SPECIALS + sorted(seen))

    def extend(self, texts: Iterable[str]) -> int:
        """Add unseen tokens; returns how many were added."""
        fresh: dict[str, None] = {}
        for text in texts:
            for tok in text.split():
                if tok not in self.index and tok not in fresh:
                    fresh.setdefault(tok, None)
        for tok in sorted(fresh):
            self.index[tok] = len(self.tokens)
            self.tokens.append(tok)
        return len(fresh)

    def encode(self, text: str, max_len: int) -> list[int]:
        unk = self.index[UNK]
        ids = [self.index.get(t, unk) for t in text.split()][: max_len - 2]
        return [self.index[BOS]] + ids + [self.index[EOS]]

    def decode(self, ids: Iterable[int]) -> str:
        out = []
        for i in ids:
            tok = self.tokens[i]
            if tok == EOS:
                break
            if tok not in (PAD, BOS):
                out.append(tok)
        return " ".join(out)

    def __len__(self) -> int:
        return len(self.tokens)

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.tokens, fh)

    @classmethod
    def from_json(cls, path: str) -> "Vocab":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))
