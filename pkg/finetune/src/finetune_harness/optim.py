"""Optimizer grouping and the warmup/cosine learning-rate schedule."""

from __future__ import annotations

import math

import torch
from torch import nn

from .config import FinetuneConfig, FinetuneError

GROUP_NAMES = ("head-decay", "head-no-decay", "backbone-decay", "backbone-no-decay")


def _is_no_decay(name: str, owners: dict[str, nn.Module]) -> bool:
    # biases (including fused ones like in_proj_bias) and every parameter of
    # a normalization layer train without weight decay
    leaf = name.rsplit(".", 1)[-1]
    if leaf.endswith("bias"):
        return True
    owner = owners.get(name.rsplit(".", 1)[0])
    return isinstance(owner, nn.LayerNorm)


def build_optimizer_groups(model: nn.Module, cfg: FinetuneConfig) -> list[dict]:
    """Four parameter groups: {head, backbone} x {decay, no-decay}."""
    owners = dict(model.named_modules())
    buckets: dict[str, list[tuple[str, nn.Parameter]]] = {name: [] for name in GROUP_NAMES}
    for name, param in model.named_parameters():
        if name.startswith("head."):
            part = "head"
        elif name.startswith("backbone."):
            part = "backbone"
        else:
            raise FinetuneError(f"parameter {name!r} is neither head nor backbone")
        kind = "no-decay" if _is_no_decay(name, owners) else "decay"
        buckets[f"{part}-{kind}"].append((name, param))
    groups = []
    for key in GROUP_NAMES:
        part = key.split("-", 1)[0]
        groups.append(
            {
                "name": key,
                "params": [param for _, param in buckets[key]],
                "param_names": [name for name, _ in buckets[key]],
                "lr": cfg.head_lr if part == "head" else cfg.backbone_lr,
                "weight_decay": 0.0 if key.endswith("-no-decay") else cfg.weight_decay,
            }
        )
    return groups


def make_optimizer(model: nn.Module, cfg: FinetuneConfig) -> torch.optim.AdamW:
    return torch.optim.AdamW(build_optimizer_groups(model, cfg))


def lr_schedule(step: float, total_steps: int, warmup_ratio: float = 0.1) -> float:
    """Linear 0 -> 1 over the warmup steps, then cosine decay 1 -> 0.

    Warmup rounds to a whole number of steps so the boundary multiplier is
    exactly 1.0 rather than off by float dust.
    """
    if total_steps <= 0:
        raise FinetuneError("total_steps must be positive")
    if not 0 <= step <= total_steps:
        raise FinetuneError(f"step {step} outside [0, {total_steps}]")
    warmup = max(1, round(warmup_ratio * total_steps))
    if step < warmup:
        return step / warmup
    progress = (step - warmup) / max(total_steps - warmup, 1)
    return 0.5 * (1.0 + math.cos(math.pi * progress))


def make_scheduler(
    optimizer: torch.optim.Optimizer, total_steps: int, cfg: FinetuneConfig
) -> torch.optim.lr_scheduler.LambdaLR:
    return torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: lr_schedule(step, total_steps, cfg.warmup_ratio)
    )
