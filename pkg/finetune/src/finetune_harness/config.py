"""Run configuration for the fine-tuning harness."""

from __future__ import annotations

from dataclasses import dataclass

ENCODER_SIZES = ("toy", "small")
SEQ_LENGTHS = (256, 512)


class FinetuneError(Exception):
    """Raised for invalid configuration or a failed training run."""


@dataclass(frozen=True)
class FinetuneConfig:
    max_seq_len: int = 256
    epochs: int = 4
    effective_batch: int = 128
    micro_batch: int = 32
    grad_accum: int | None = None
    head_lr: float = 2e-5
    backbone_lr: float = 1e-5
    weight_decay: float = 0.01
    warmup_ratio: float = 0.1
    dropout: float = 0.0
    seed: int = 42
    encoder_size: str = "toy"

    def __post_init__(self) -> None:
        if self.max_seq_len not in SEQ_LENGTHS:
            raise FinetuneError(f"max_seq_len must be one of {SEQ_LENGTHS}, got {self.max_seq_len}")
        if self.encoder_size not in ENCODER_SIZES:
            raise FinetuneError(f"encoder_size must be one of {ENCODER_SIZES}, got {self.encoder_size!r}")
        if self.epochs < 1:
            raise FinetuneError("epochs must be >= 1")
        if self.micro_batch < 1 or self.effective_batch < 1:
            raise FinetuneError("batch sizes must be >= 1")
        if self.grad_accum is None:
            if self.effective_batch % self.micro_batch:
                raise FinetuneError(
                    f"effective_batch {self.effective_batch} is not a multiple of "
                    f"micro_batch {self.micro_batch}"
                )
            object.__setattr__(self, "grad_accum", self.effective_batch // self.micro_batch)
        if self.micro_batch * self.grad_accum != self.effective_batch:
            raise FinetuneError(
                f"micro_batch {self.micro_batch} x grad_accum {self.grad_accum} "
                f"!= effective_batch {self.effective_batch}"
            )
        if not 0.0 < self.warmup_ratio < 1.0:
            raise FinetuneError(f"warmup_ratio {self.warmup_ratio} outside (0, 1)")
        if self.head_lr <= 0 or self.backbone_lr <= 0:
            raise FinetuneError("learning rates must be > 0")
        if self.weight_decay < 0:
            raise FinetuneError("weight_decay must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise FinetuneError(f"dropout {self.dropout} outside [0, 1)")
