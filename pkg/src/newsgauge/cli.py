"""Argparse front-end for the newsgauge pipeline."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .pipeline import (
    PipelineError,
    cmd_export_finetune,
    cmd_featurize,
    cmd_ingest,
    cmd_label,
    cmd_train_eval,
    load_config,
)

_COMMANDS = {
    "ingest": cmd_ingest,
    "featurize": cmd_featurize,
    "label": cmd_label,
    "train-eval": cmd_train_eval,
    "export-finetune": cmd_export_finetune,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--output-dir", dest="output_dir", help="directory for outputs and manifest")
    sub.add_argument("--seed", type=int, help="seed for folds and models")
    sub.add_argument("--created", help="timestamp recorded in manifests")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsgauge",
        description="Classify news articles by perceived quality: ingest, featurize, label, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="extract English article text from WARC or HTML dir")
    _add_common(p)
    p.add_argument("--input", help="WARC file or directory of HTML pages")
    p.add_argument("--language-threshold", dest="language_threshold", type=float,
                   help="minimum English confidence to keep a page")
    p.add_argument("--trace", action="store_const", const=True, default=None,
                   help="also write per-candidate score breakdowns to trace.jsonl")

    p = sub.add_parser("featurize", help="turn annotated documents into the feature matrix")
    _add_common(p)
    p.add_argument("--annotations", help="column-format annotation file")
    p.add_argument("--articles", help="articles JSONL to annotate with the built-in tagger")
    p.add_argument("--registry", help="feature registry manifest (default: bundled)")

    p = sub.add_parser("label", help="join PC1 scores and binarize at the median")
    _add_common(p)
    p.add_argument("--articles", help="articles JSONL")
    p.add_argument("--pc1", help="CSV of domain,pc1 scores")
    p.add_argument("--threshold", type=float, help="override the computed median threshold")

    p = sub.add_parser("train-eval", help="cross-validate the classifiers on shared folds")
    _add_common(p)
    p.add_argument("--features", help="feature matrix CSV")
    p.add_argument("--labels", help="labeled articles JSONL")
    p.add_argument("--folds", help="existing fold spec JSON to reuse")
    p.add_argument("--models", help="comma list from gnb,logreg,rf (default: all)")
    p.add_argument("--k", type=int, help="number of folds")

    p = sub.add_parser("export-finetune", help="bundle labeled text and folds for fine-tuning")
    _add_common(p)
    p.add_argument("--labels", help="labeled articles JSONL")
    p.add_argument("--folds", help="fold spec JSON")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config") and value is not None
    }
    try:
        cfg = load_config(args.config, overrides)
        _COMMANDS[args.command](cfg)
    except PipelineError as exc:
        print(f"newsgauge: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
