"""Training loop: gradual unfreezing, gradient accumulation, checkpointing.

Each fold trains a fresh model for a fixed number of epochs. The backbone
stays frozen through epoch 1 and unfreezes at the start of epoch 2. Within
an epoch, micro-batch losses are scaled by 1/grad_accum and accumulated,
so a step over grad_accum micro-batches equals one step over the full
effective batch. After every epoch the model is checkpointed and scored on
the fold's validation rows; the minimum-validation-loss checkpoint is
restored for the fold's reported metrics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from .bundle import Bundle
from .config import FinetuneConfig, FinetuneError
from .encoder import QualityClassifier, build_model, set_backbone_frozen
from .metrics import METRIC_NAMES, summarize
from .optim import make_optimizer, make_scheduler
from .tokenizer import encode_corpus

Batch = tuple[torch.Tensor, torch.Tensor, torch.Tensor]


@dataclass(frozen=True)
class EpochLog:
    fold: int
    epoch: int
    train_loss: float
    val_loss: float
    val_metrics: dict[str, float]
    checkpoint_path: str


def micro_batches(
    ids: torch.Tensor, pad_mask: torch.Tensor, y: torch.Tensor, size: int
) -> Iterable[Batch]:
    for start in range(0, len(y), size):
        stop = start + size
        yield ids[start:stop], pad_mask[start:stop], y[start:stop]


def train_epoch(
    model: QualityClassifier,
    optimizer: torch.optim.Optimizer,
    scheduler,
    batches: Iterable[Batch],
    grad_accum: int,
) -> float:
    """One accumulate-then-step pass; returns the example-weighted mean loss."""
    model.train()
    optimizer.zero_grad()
    total = 0.0
    examples = 0
    pending = 0
    for micro_index, (ids, pad_mask, y) in enumerate(batches):
        logits = model(ids, pad_mask)
        loss = F.cross_entropy(logits, y)
        if not torch.isfinite(loss):
            raise FinetuneError(f"non-finite loss at micro-batch {micro_index}")
        (loss / grad_accum).backward()
        total += float(loss.detach()) * len(y)
        examples += len(y)
        pending += 1
        if pending == grad_accum:
            optimizer.step()
            if scheduler is not None:
                scheduler.step()
            optimizer.zero_grad()
            pending = 0
    if pending:
        optimizer.step()
        if scheduler is not None:
            scheduler.step()
        optimizer.zero_grad()
    return total / examples


@torch.no_grad()
def evaluate(
    model: QualityClassifier, ids: torch.Tensor, pad_mask: torch.Tensor, y: torch.Tensor, size: int
) -> tuple[float, np.ndarray]:
    """Mean validation loss and P(HIGH) per row."""
    model.eval()
    total = 0.0
    probs = []
    for bids, bmask, by in micro_batches(ids, pad_mask, y, size):
        logits = model(bids, bmask)
        total += float(F.cross_entropy(logits, by, reduction="sum"))
        probs.append(torch.softmax(logits, dim=1)[:, 1].numpy())
    return total / len(y), np.concatenate(probs)


def steps_per_epoch(n_train: int, cfg: FinetuneConfig) -> int:
    n_micro = math.ceil(n_train / cfg.micro_batch)
    return math.ceil(n_micro / cfg.grad_accum)


def train_fold(
    bundle: Bundle,
    fold: int,
    cfg: FinetuneConfig,
    out_dir: str | Path,
    tensors: tuple[torch.Tensor, torch.Tensor] | None = None,
) -> list[EpochLog]:
    """Train one fold from scratch and log every epoch."""
    out = Path(out_dir)
    (out / "checkpoints").mkdir(parents=True, exist_ok=True)
    if tensors is None:
        tensors = encode_corpus(bundle.texts, cfg.max_seq_len)
    all_ids, all_mask = tensors
    y = torch.tensor(bundle.labels, dtype=torch.long)
    train_rows, val_rows = bundle.fold_indices(fold)
    if not train_rows or not val_rows:
        raise FinetuneError(f"fold {fold} has an empty split")
    train_idx = torch.tensor(train_rows)
    val_idx = torch.tensor(val_rows)

    model = build_model(cfg, seed=cfg.seed * 1000 + fold)
    optimizer = make_optimizer(model, cfg)
    total_steps = cfg.epochs * steps_per_epoch(len(train_rows), cfg)
    scheduler = make_scheduler(optimizer, total_steps, cfg)
    shuffle_rng = torch.Generator().manual_seed(cfg.seed * 1000 + fold + 1)

    set_backbone_frozen(model, True)
    logs: list[EpochLog] = []
    for epoch in range(1, cfg.epochs + 1):
        if epoch == 2:
            set_backbone_frozen(model, False)
        order = train_idx[torch.randperm(len(train_idx), generator=shuffle_rng)]
        train_loss = train_epoch(
            model,
            optimizer,
            scheduler,
            micro_batches(all_ids[order], all_mask[order], y[order], cfg.micro_batch),
            cfg.grad_accum,
        )
        val_loss, probs = evaluate(
            model, all_ids[val_idx], all_mask[val_idx], y[val_idx], cfg.micro_batch
        )
        path = out / "checkpoints" / f"fold{fold}_epoch{epoch}.pt"
        torch.save(model.state_dict(), path)
        logs.append(
            EpochLog(
                fold=fold,
                epoch=epoch,
                train_loss=train_loss,
                val_loss=val_loss,
                val_metrics=summarize(probs, y[val_idx].numpy()),
                checkpoint_path=str(path),
            )
        )
    return logs


def select_checkpoint(logs: Sequence[EpochLog]) -> EpochLog:
    """Minimum validation loss; ties resolve to the earliest epoch."""
    if not logs:
        raise FinetuneError("no epochs logged")
    return min(logs, key=lambda log: (log.val_loss, log.epoch))


def aggregate_cv(
    per_fold: Sequence[dict[str, float]], k: int, fold_hash: str, model_kind: str
) -> dict:
    """Mean and spread per metric, in the upstream report shape."""
    if len(per_fold) != k:
        raise FinetuneError(f"expected {k} fold results, got {len(per_fold)}")
    mean = {name: float(np.mean([m[name] for m in per_fold])) for name in METRIC_NAMES}
    std = {name: float(np.std([m[name] for m in per_fold])) for name in METRIC_NAMES}
    return {
        "model_kind": model_kind,
        "fold_spec_hash": fold_hash,
        "per_fold": [dict(m) for m in per_fold],
        "mean": mean,
        "std": std,
    }


def write_loss_csv(logs: Sequence[EpochLog], path: str | Path) -> None:
    lines = ["fold,epoch,train_loss,val_loss"]
    for log in logs:
        lines.append(f"{log.fold},{log.epoch},{log.train_loss!r},{log.val_loss!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_harness(bundle: Bundle, cfg: FinetuneConfig, out_dir: str | Path) -> dict:
    """Cross-validate the encoder over the bundle's folds and write artifacts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tensors = encode_corpus(bundle.texts, cfg.max_seq_len)
    all_ids, all_mask = tensors
    y = torch.tensor(bundle.labels, dtype=torch.long)
    all_logs: list[EpochLog] = []
    per_fold: list[dict[str, float]] = []
    for fold in range(bundle.k):
        logs = train_fold(bundle, fold, cfg, out, tensors=tensors)
        all_logs.extend(logs)
        best = select_checkpoint(logs)
        model = build_model(cfg, seed=cfg.seed * 1000 + fold)
        model.load_state_dict(torch.load(best.checkpoint_path))
        _, val_rows = bundle.fold_indices(fold)
        val_idx = torch.tensor(val_rows)
        _, probs = evaluate(model, all_ids[val_idx], all_mask[val_idx], y[val_idx], cfg.micro_batch)
        per_fold.append(summarize(probs, y[val_idx].numpy()))
    report = aggregate_cv(per_fold, bundle.k, bundle.fold_hash, cfg.encoder_size.upper())
    with open(out / "report.json", "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")
    write_loss_csv(all_logs, out / "loss_per_epoch.csv")
    return report
