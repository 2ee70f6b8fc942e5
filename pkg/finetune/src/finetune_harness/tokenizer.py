"""Whitespace tokenizer with a hash-bucket vocabulary.

No learned vocabulary and no downloads: every lowercased whitespace token
hashes into a fixed bucket range with a keyless blake2b, so the id of a
token is identical across runs, processes, and machines. Sequences are
always exactly max_seq_len long: a leading [CLS] bucket, then token ids,
truncated or right-padded with [PAD].
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import torch

VOCAB_SIZE = 4096
PAD_ID = 0
CLS_ID = 1
_RESERVED = 2


def token_id(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return _RESERVED + int.from_bytes(digest, "little") % (VOCAB_SIZE - _RESERVED)


def tokenize(text: str) -> list[str]:
    return text.lower().split()


def encode(text: str, max_seq_len: int) -> tuple[list[int], int]:
    """Fixed-length id sequence and the count of real (non-pad) positions."""
    ids = [CLS_ID] + [token_id(tok) for tok in tokenize(text)[: max_seq_len - 1]]
    real = len(ids)
    return ids + [PAD_ID] * (max_seq_len - real), real


def encode_corpus(texts: Sequence[str], max_seq_len: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack a corpus into (ids, pad_mask); mask is True on padded positions."""
    ids = torch.empty((len(texts), max_seq_len), dtype=torch.long)
    pad_mask = torch.ones((len(texts), max_seq_len), dtype=torch.bool)
    for row, text in enumerate(texts):
        encoded, real = encode(text, max_seq_len)
        ids[row] = torch.tensor(encoded, dtype=torch.long)
        pad_mask[row, :real] = False
    return ids, pad_mask
