"""Small bidirectional transformer encoders with a classification head.

Two fixed sizes stand in for full-scale pretrained checkpoints: "toy" is 2
layers of width 128, "small" is 4 layers of width 256. Every parameter
lives under either the `backbone` or the `head` submodule so optimizer
grouping and gradual unfreezing can address them by prefix.
"""

from __future__ import annotations

import torch
from torch import nn

from .config import FinetuneConfig
from .tokenizer import PAD_ID, VOCAB_SIZE

ENCODER_SHAPES = {"toy": (2, 128), "small": (4, 256)}
N_CLASSES = 2


class Backbone(nn.Module):
    def __init__(self, layers: int, hidden: int, max_seq_len: int, dropout: float) -> None:
        super().__init__()
        self.token_embedding = nn.Embedding(VOCAB_SIZE, hidden, padding_idx=PAD_ID)
        self.position_embedding = nn.Embedding(max_seq_len, hidden)
        self.embedding_norm = nn.LayerNorm(hidden)
        self.dropout = nn.Dropout(dropout)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden,
            nhead=hidden // 32,
            dim_feedforward=4 * hidden,
            dropout=dropout,
            batch_first=True,
            norm_first=True,
        )
        self.layers = nn.TransformerEncoder(
            layer, num_layers=layers, norm=nn.LayerNorm(hidden), enable_nested_tensor=False
        )
        positions = torch.arange(max_seq_len)
        self.register_buffer("positions", positions, persistent=False)

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        hidden = self.token_embedding(ids) + self.position_embedding(self.positions[: ids.shape[1]])
        hidden = self.dropout(self.embedding_norm(hidden))
        return self.layers(hidden, src_key_padding_mask=pad_mask)


class QualityClassifier(nn.Module):
    """Backbone encoder plus a linear head reading the [CLS] position."""

    def __init__(self, cfg: FinetuneConfig) -> None:
        super().__init__()
        layers, hidden = ENCODER_SHAPES[cfg.encoder_size]
        self.backbone = Backbone(layers, hidden, cfg.max_seq_len, cfg.dropout)
        self.head = nn.Linear(hidden, N_CLASSES)

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        hidden = self.backbone(ids, pad_mask)
        return self.head(hidden[:, 0])


def build_model(cfg: FinetuneConfig, seed: int | None = None) -> QualityClassifier:
    torch.manual_seed(cfg.seed if seed is None else seed)
    return QualityClassifier(cfg)


def set_backbone_frozen(model: QualityClassifier, frozen: bool) -> None:
    """Gradual unfreezing switch: the head always trains, the backbone may not."""
    for param in model.backbone.parameters():
        param.requires_grad_(not frozen)
