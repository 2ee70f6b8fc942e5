"""Command line entry point for the finetune harness."""

from __future__ import annotations

import argparse
import sys

from .bundle import BundleError, load_bundle
from .config import FinetuneConfig, FinetuneError
from .trainer import run_harness


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finetune", description="Fine-tune a transformer classifier on an exported bundle."
    )
    parser.add_argument("--bundle", required=True, help="directory holding the exported bundle")
    parser.add_argument("--output-dir", default="finetune_out")
    parser.add_argument("--max-seq-len", type=int, default=256, choices=(256, 512))
    parser.add_argument("--encoder", default="toy", choices=("toy", "small"))
    parser.add_argument("--epochs", type=int, default=4)
    parser.add_argument("--micro-batch", type=int, default=32)
    parser.add_argument("--effective-batch", type=int, default=128)
    parser.add_argument("--head-lr", type=float, default=2e-5)
    parser.add_argument("--backbone-lr", type=float, default=1e-5)
    parser.add_argument("--seed", type=int, default=42)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = FinetuneConfig(
            max_seq_len=args.max_seq_len,
            epochs=args.epochs,
            effective_batch=args.effective_batch,
            micro_batch=args.micro_batch,
            head_lr=args.head_lr,
            backbone_lr=args.backbone_lr,
            seed=args.seed,
            encoder_size=args.encoder,
        )
        bundle = load_bundle(args.bundle)
        report = run_harness(bundle, cfg, args.output_dir)
    except BundleError as exc:
        print(f"finetune: {exc}", file=sys.stderr)
        return 1
    except FinetuneError as exc:
        print(f"finetune: {exc}", file=sys.stderr)
        return 2
    accuracy = report["mean"]["accuracy"]
    print(f"finetune: {bundle.k} folds done, mean accuracy {accuracy:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
