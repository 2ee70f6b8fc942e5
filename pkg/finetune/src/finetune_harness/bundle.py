"""Loader for the export bundle: articles, fold assignment, manifest.

The bundle is the only interface to the upstream pipeline. Its fold file is
authenticated against the manifest by recomputing the sha256 of the
canonical fold serialization, so a tampered assignment aborts the run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

LOW = "LOW"
HIGH = "HIGH"
REQUIRED_FILES = ("articles.jsonl", "folds.json", "manifest.json")


class BundleError(Exception):
    """Raised when the bundle is missing, malformed, or fails the fold hash."""


@dataclass(frozen=True)
class Bundle:
    doc_ids: tuple[str, ...]
    texts: tuple[str, ...]
    labels: tuple[int, ...]
    seed: int
    k: int
    assignment: tuple[int, ...]
    fold_hash: str

    def fold_indices(self, fold: int) -> tuple[list[int], list[int]]:
        """Row indices (train, validation) for one fold."""
        val = [i for i, f in enumerate(self.assignment) if f == fold]
        train = [i for i, f in enumerate(self.assignment) if f != fold]
        return train, val


def canonical_fold_json(seed: int, k: int, assignment) -> str:
    """The canonical fold serialization; sha256 of this string is the contract."""
    payload = {"seed": seed, "k": k, "assignment": list(assignment)}
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def fold_hash_of(seed: int, k: int, assignment) -> str:
    return hashlib.sha256(canonical_fold_json(seed, k, assignment).encode("utf-8")).hexdigest()


def _load_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"{path.name} is not valid JSON: {exc}")


def _join_text(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, list) and all(isinstance(p, str) for p in value):
        return "\n".join(value)
    raise TypeError


def load_bundle(directory: str | Path) -> Bundle:
    """Read and validate a bundle directory, aborting on any contract break."""
    root = Path(directory)
    for name in REQUIRED_FILES:
        if not (root / name).is_file():
            raise BundleError(f"bundle is missing {name}")
    manifest = _load_json(root / "manifest.json")
    folds = _load_json(root / "folds.json")
    try:
        seed = int(folds["seed"])
        k = int(folds["k"])
        assignment = tuple(int(v) for v in folds["assignment"])
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleError(f"folds.json is missing or mistypes a field: {exc}")
    recorded = manifest.get("fold_hash")
    if not isinstance(recorded, str):
        raise BundleError("manifest.json has no fold_hash")
    computed = fold_hash_of(seed, k, assignment)
    if computed != recorded:
        raise BundleError(
            f"fold hash mismatch: folds.json hashes to {computed[:12]}... but the "
            f"manifest records {recorded[:12]}..."
        )

    doc_ids: list[str] = []
    texts: list[str] = []
    labels: list[int] = []
    with open(root / "articles.jsonl", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BundleError(f"articles.jsonl:{lineno}: bad JSON ({exc})")
            try:
                doc_ids.append(str(row["doc_id"]))
                texts.append(_join_text(row["text"]))
                value = row["label"]
            except (KeyError, TypeError):
                raise BundleError(f"articles.jsonl:{lineno}: row needs doc_id, text and label")
            if value not in (LOW, HIGH):
                raise BundleError(f"articles.jsonl:{lineno}: label must be LOW or HIGH, got {value!r}")
            labels.append(1 if value == HIGH else 0)

    if len(doc_ids) != len(assignment):
        raise BundleError(
            f"fold assignment covers {len(assignment)} rows, articles has {len(doc_ids)}"
        )
    counts = manifest.get("counts", {})
    if "rows" in counts and counts["rows"] != len(doc_ids):
        raise BundleError(
            f"manifest counts {counts['rows']} rows, articles has {len(doc_ids)}"
        )
    return Bundle(
        doc_ids=tuple(doc_ids),
        texts=tuple(texts),
        labels=tuple(labels),
        seed=seed,
        k=k,
        assignment=assignment,
        fold_hash=computed,
    )
