"""Stage orchestration: config, run manifests, and the five commands.

Every stage reads and writes plain files (JSONL between stages, JSON
manifests beside them) so runs are resumable and diffable. Reruns with
unchanged inputs and config produce byte-identical outputs; manifest
timestamps default to a fixed placeholder unless the config or the
NEWSGAUGE_CREATED environment variable supplies one.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Any, Iterator

from .annotations import AnnotationCounters, read_annotations
from .cv import (
    EvalError,
    FoldSpec,
    cross_validate,
    fold_spec_hash,
    read_fold_spec,
    render_table,
    report_to_json,
    stratified_kfold,
    write_fold_spec,
)
from .features import CorpusCounters, featurize_corpus, read_matrix_csv, write_matrix_csv
from .ingest import IngestCounters, dedupe_by_url, iter_dir, iter_warc
from .labels import (
    HIGH,
    LOW,
    DomainError,
    LabelError,
    binarize,
    median_threshold,
    normalize_domain,
    read_pc1_table,
)
from .langdetect import detect_language
from .models import GNB, LOGREG, RF, Dataset, ModelError, TrainConfig
from .parser import DEFAULT_CONFIG, ParserConfig, extract_article
from .registry import RegistryError, default_registry, load_registry_file
from .tagger import annotate
from .warc import WarcFormatError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EMPTY = 4
EXIT_MISALIGNED = 5

_DEFAULT_CREATED = "unspecified"
_MODEL_ALIASES = {"gnb": GNB, "logreg": LOGREG, "rf": RF}

_PARSER_KEYS = {
    "positive_keywords",
    "negative_keywords",
    "cookie_keywords",
    "copyright_patterns",
    "noise_tags",
    "link_ratio_threshold",
    "link_penalty",
    "positive_bonus",
    "negative_bonus",
    "min_score",
    "min_paragraph_tokens",
}
_TRAIN_KEYS = {
    "rf_trees",
    "rf_max_features",
    "rf_bootstrap",
    "logreg_max_iter",
    "logreg_lr",
    "logreg_tol",
    "class_weight",
    "gnb_var_smoothing",
}


class PipelineError(Exception):
    def __init__(self, exit_code: int, message: str) -> None:
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 42
    k: int = 5
    language_threshold: float = 0.8
    threshold: float | None = None
    models: tuple[str, ...] = (GNB, LOGREG, RF)
    created: str | None = None
    input: str | None = None
    output_dir: str | None = None
    annotations: str | None = None
    articles: str | None = None
    pc1: str | None = None
    features: str | None = None
    labels: str | None = None
    folds: str | None = None
    registry: str | None = None
    trace: bool = False
    parser: dict[str, Any] = field(default_factory=dict)
    train: dict[str, Any] = field(default_factory=dict)


_TOP_KEYS = set(PipelineConfig.__dataclass_fields__)


def load_config(path: str | None, overrides: dict[str, Any] | None = None) -> PipelineConfig:
    """Config file merged with CLI overrides; unknown keys are rejected."""
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise PipelineError(EXIT_IO, f"cannot read config: {exc}")
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PipelineError(EXIT_CONFIG, f"config is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise PipelineError(EXIT_CONFIG, "config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise PipelineError(EXIT_CONFIG, f"unknown config keys: {', '.join(sorted(unknown))}")
    for sub, allowed in (("parser", _PARSER_KEYS), ("train", _TRAIN_KEYS)):
        block = raw.get(sub, {})
        if not isinstance(block, dict):
            raise PipelineError(EXIT_CONFIG, f"config key {sub!r} must be an object")
        bad = set(block) - allowed
        if bad:
            raise PipelineError(EXIT_CONFIG, f"unknown {sub} keys: {', '.join(sorted(bad))}")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    if "models" in raw:
        raw["models"] = _parse_models(raw["models"])
    try:
        cfg = PipelineConfig(**raw)
    except TypeError as exc:
        raise PipelineError(EXIT_CONFIG, f"bad config: {exc}")
    for name in ("seed", "k"):
        if not isinstance(getattr(cfg, name), int):
            raise PipelineError(EXIT_CONFIG, f"config key {name!r} must be an integer")
    if cfg.threshold is not None and not 0.0 <= cfg.threshold <= 1.0:
        raise PipelineError(EXIT_CONFIG, f"threshold {cfg.threshold} outside [0, 1]")
    return cfg


def _parse_models(value: Any) -> tuple[str, ...]:
    if isinstance(value, str):
        names = [part.strip() for part in value.split(",") if part.strip()]
    else:
        names = list(value)
    out = []
    for name in names:
        kind = _MODEL_ALIASES.get(str(name).lower())
        if kind is None:
            raise PipelineError(EXIT_CONFIG, f"unknown model {name!r}")
        out.append(kind)
    if not out:
        raise PipelineError(EXIT_CONFIG, "no models requested")
    return tuple(out)


def config_hash(cfg: PipelineConfig) -> str:
    payload = asdict(cfg)
    payload["models"] = list(payload["models"])
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def effective_created(cfg: PipelineConfig) -> str:
    if cfg.created is not None:
        return cfg.created
    return os.environ.get("NEWSGAUGE_CREATED", _DEFAULT_CREATED)


def parser_config(cfg: PipelineConfig) -> ParserConfig:
    if not cfg.parser:
        return DEFAULT_CONFIG
    kwargs = dict(cfg.parser)
    for key in ("positive_keywords", "negative_keywords", "cookie_keywords",
                "copyright_patterns", "noise_tags"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return replace(DEFAULT_CONFIG, **kwargs)
    except TypeError as exc:
        raise PipelineError(EXIT_CONFIG, f"bad parser config: {exc}")


def train_config(cfg: PipelineConfig, kind: str) -> TrainConfig:
    try:
        return TrainConfig(model_kind=kind, seed=cfg.seed, **cfg.train)
    except (ModelError, TypeError) as exc:
        raise PipelineError(EXIT_CONFIG, f"bad train config: {exc}")


def _output_dir(cfg: PipelineConfig) -> Path:
    if not cfg.output_dir:
        raise PipelineError(EXIT_CONFIG, "output_dir is required")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


@contextlib.contextmanager
def output_lock(out: Path) -> Iterator[None]:
    """One command at a time per output directory."""
    lock = out / ".newsgauge.lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise PipelineError(EXIT_IO, f"output directory is locked by {lock}")
    try:
        os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(OSError):
            lock.unlink()


def doc_id_for(url: str, fetch_date: date) -> str:
    """Stable content hash of (url, fetch_date)."""
    digest = hashlib.sha256(f"{url}\n{fetch_date.isoformat()}".encode("utf-8"))
    return digest.hexdigest()[:16]


def _dump_row(row: dict[str, Any]) -> str:
    return json.dumps(row, sort_keys=True, separators=(",", ":"))


def write_jsonl(rows: list[dict[str, Any]], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as out:
        for row in rows:
            out.write(_dump_row(row) + "\n")


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise PipelineError(EXIT_IO, f"cannot read {path}: {exc}")
    with handle:
        rows = []
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise PipelineError(EXIT_IO, f"{path}:{lineno}: bad JSON ({exc})")
    return rows


def write_manifest(out: Path, payload: dict[str, Any]) -> None:
    with open(out / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _iter_input_pages(cfg: PipelineConfig, counters: IngestCounters):
    if not cfg.input:
        raise PipelineError(EXIT_CONFIG, "input path is required")
    path = Path(cfg.input)
    if path.is_dir():
        yield from dedupe_by_url(iter_dir(path, counters), counters)
        return
    if not path.is_file():
        raise PipelineError(EXIT_IO, f"input not found: {path}")
    with open(path, "rb") as stream:
        try:
            yield from dedupe_by_url(iter_warc(stream, counters), counters)
        except WarcFormatError as exc:
            raise PipelineError(EXIT_IO, f"{path}: {exc}")


def cmd_ingest(cfg: PipelineConfig) -> Path:
    """WARC or HTML dir -> extracted English articles as JSONL."""
    out = _output_dir(cfg)
    pconfig = parser_config(cfg)
    counters = IngestCounters()
    drop_reasons: dict[str, int] = {}
    rows: list[dict[str, Any]] = []
    trace_rows: list[dict[str, Any]] = []
    with output_lock(out):
        for page in _iter_input_pages(cfg, counters):
            extraction = extract_article(page.decode(), pconfig, trace=cfg.trace)
            if cfg.trace:
                trace_rows.append(
                    {
                        "url": page.url,
                        "candidates": [
                            {
                                "doc_order": section.doc_order,
                                "tag": section.node.tag,
                                **breakdown.as_dict(),
                            }
                            for section, breakdown in extraction.candidates
                        ],
                    }
                )
            if extraction.article is None:
                reason = extraction.drop_reason or "unknown"
                drop_reasons[reason] = drop_reasons.get(reason, 0) + 1
                continue
            text = "\n".join(extraction.article.paragraphs)
            verdict = detect_language(text)
            if verdict.language != "en" or verdict.confidence < cfg.language_threshold:
                drop_reasons["non-english"] = drop_reasons.get("non-english", 0) + 1
                continue
            try:
                domain = normalize_domain(page.url)
            except DomainError:
                domain = ""
            rows.append(
                {
                    "doc_id": doc_id_for(page.url, page.fetch_date),
                    "url": page.url,
                    "domain": domain,
                    "date": page.fetch_date.isoformat(),
                    "text": extraction.article.paragraphs,
                    "parser_score": extraction.article.parser_score,
                    "lang": verdict.language,
                }
            )
        write_jsonl(rows, out / "articles.jsonl")
        if cfg.trace:
            write_jsonl(trace_rows, out / "trace.jsonl")
        write_manifest(
            out,
            {
                "command": "ingest",
                "config_hash": config_hash(cfg),
                "created": effective_created(cfg),
                "counts": {
                    "records": counters.records,
                    "pages": counters.pages,
                    "non_html": counters.non_html,
                    "skipped": counters.skipped,
                    "duplicates": counters.duplicates,
                    "articles": len(rows),
                },
                "drop_reasons": dict(sorted(drop_reasons.items())),
            },
        )
    return out / "articles.jsonl"


def _load_registry(cfg: PipelineConfig):
    try:
        if cfg.registry:
            return load_registry_file(cfg.registry)
        return default_registry()
    except RegistryError as exc:
        raise PipelineError(EXIT_CONFIG, f"bad registry: {exc}")
    except OSError as exc:
        raise PipelineError(EXIT_IO, f"cannot read registry: {exc}")


def _annotated_docs(cfg: PipelineConfig, counters: AnnotationCounters):
    if cfg.annotations:
        try:
            handle = open(cfg.annotations, encoding="utf-8")
        except OSError as exc:
            raise PipelineError(EXIT_IO, f"cannot read annotations: {exc}")
        with handle:
            yield from read_annotations(handle, counters)
        return
    if cfg.articles:
        for row in read_jsonl(cfg.articles):
            counters.docs += 1
            yield annotate(row["doc_id"], "\n\n".join(row["text"]))
        return
    raise PipelineError(EXIT_CONFIG, "featurize needs an annotations file or an articles JSONL")


def cmd_featurize(cfg: PipelineConfig) -> Path:
    """Annotations (or articles via the built-in tagger) -> feature CSV."""
    out = _output_dir(cfg)
    registry = _load_registry(cfg)
    ann_counters = AnnotationCounters()
    corpus_counters = CorpusCounters()
    with output_lock(out):
        matrix = featurize_corpus(_annotated_docs(cfg, ann_counters), registry, corpus_counters)
        write_matrix_csv(matrix, registry, out / "features.csv", effective_created(cfg))
        write_manifest(
            out,
            {
                "command": "featurize",
                "config_hash": config_hash(cfg),
                "created": effective_created(cfg),
                "registry_version": registry.version,
                "counts": {
                    "docs": ann_counters.docs,
                    "rejected": ann_counters.rejected,
                    "rows": corpus_counters.rows,
                    "skipped": corpus_counters.skipped,
                },
            },
        )
    return out / "features.csv"


def cmd_label(cfg: PipelineConfig) -> Path:
    """Join PC1 scores by domain, binarize at the median (or override)."""
    out = _output_dir(cfg)
    articles_path = cfg.articles or cfg.input
    if not articles_path:
        raise PipelineError(EXIT_CONFIG, "label needs an articles JSONL path")
    if not cfg.pc1:
        raise PipelineError(EXIT_CONFIG, "label needs a PC1 table path")
    try:
        handle = open(cfg.pc1, encoding="utf-8", newline="")
    except OSError as exc:
        raise PipelineError(EXIT_IO, f"cannot read PC1 table: {exc}")
    with handle:
        try:
            table = read_pc1_table(handle)
        except (LabelError, DomainError) as exc:
            raise PipelineError(EXIT_CONFIG, f"bad PC1 table: {exc}")
    rows = read_jsonl(articles_path)
    matched: list[tuple[dict[str, Any], float]] = []
    unmatched = 0
    for row in rows:
        try:
            domain = normalize_domain(row.get("domain") or row["url"])
        except DomainError:
            unmatched += 1
            continue
        score = table.get(domain)
        if score is None:
            unmatched += 1
            continue
        matched.append((row, score))
    if not matched:
        raise PipelineError(EXIT_EMPTY, "no matched domains")
    threshold = cfg.threshold
    if threshold is None:
        threshold = median_threshold([score for _, score in matched])
    labeled = []
    class_counts = {LOW: 0, HIGH: 0}
    for row, score in matched:
        label = binarize(score, threshold)
        class_counts[label.value] += 1
        combined = dict(row)
        combined["pc1"] = score
        combined["threshold"] = threshold
        combined["label"] = label.value
        labeled.append(combined)
    with output_lock(out):
        write_jsonl(labeled, out / "labeled.jsonl")
        write_manifest(
            out,
            {
                "command": "label",
                "config_hash": config_hash(cfg),
                "created": effective_created(cfg),
                "threshold": threshold,
                "counts": {
                    "articles": len(rows),
                    "matched": len(matched),
                    "unmatched": unmatched,
                    "low": class_counts[LOW],
                    "high": class_counts[HIGH],
                },
            },
        )
    return out / "labeled.jsonl"


def _read_labels(path: str | Path) -> dict[str, int]:
    out: dict[str, int] = {}
    for row in read_jsonl(path):
        value = row.get("label")
        if value not in (LOW, HIGH):
            raise PipelineError(EXIT_MISALIGNED, f"row {row.get('doc_id')!r} has no label")
        out[row["doc_id"]] = 1 if value == HIGH else 0
    return out


def cmd_train_eval(cfg: PipelineConfig) -> Path:
    """Cross-validate every requested model on one shared fold spec."""
    out = _output_dir(cfg)
    if not cfg.features or not cfg.labels:
        raise PipelineError(EXIT_CONFIG, "train-eval needs features and labels paths")
    try:
        matrix = read_matrix_csv(cfg.features)
    except OSError as exc:
        raise PipelineError(EXIT_IO, f"cannot read features: {exc}")
    labels = _read_labels(cfg.labels)
    feature_ids = set(matrix.doc_ids)
    label_ids = set(labels)
    if feature_ids != label_ids:
        missing = len(feature_ids - label_ids)
        extra = len(label_ids - feature_ids)
        raise PipelineError(
            EXIT_MISALIGNED,
            f"doc ids disagree: {missing} without labels, {extra} without features",
        )
    y = [labels[doc_id] for doc_id in matrix.doc_ids]
    with output_lock(out):
        if cfg.folds:
            try:
                spec = read_fold_spec(cfg.folds)
            except OSError as exc:
                raise PipelineError(EXIT_IO, f"cannot read folds: {exc}")
            if len(spec.assignment) != len(y):
                raise PipelineError(EXIT_MISALIGNED, "fold spec does not cover the dataset")
        else:
            try:
                spec = stratified_kfold(y, cfg.k, cfg.seed)
            except EvalError as exc:
                raise PipelineError(EXIT_CONFIG, str(exc))
            write_fold_spec(spec, out / "folds.json")
        data = Dataset(matrix.values, y, tuple(matrix.doc_ids))
        reports = []
        for kind in cfg.models:
            tcfg = train_config(cfg, kind)
            try:
                report = cross_validate(data, tcfg, spec, matrix.registry_version)
            except EvalError as exc:
                raise PipelineError(EXIT_MISALIGNED, str(exc))
            reports.append(report)
            with open(out / f"report_{kind.lower()}.json", "w", encoding="utf-8") as f:
                f.write(report_to_json(report))
        with open(out / "summary.txt", "w", encoding="utf-8") as f:
            f.write(render_table(reports))
        write_manifest(
            out,
            {
                "command": "train-eval",
                "config_hash": config_hash(cfg),
                "created": effective_created(cfg),
                "fold_hash": fold_spec_hash(spec),
                "registry_version": matrix.registry_version,
                "counts": {"rows": len(y), "models": len(reports)},
                "models": list(cfg.models),
            },
        )
    return out / "summary.txt"


def cmd_export_finetune(cfg: PipelineConfig) -> Path:
    """Bundle labeled articles + fold spec for the fine-tuning harness."""
    out = _output_dir(cfg)
    if not cfg.labels:
        raise PipelineError(EXIT_CONFIG, "export-finetune needs a labels path")
    if not cfg.folds:
        raise PipelineError(EXIT_CONFIG, "export-finetune needs a folds path")
    rows = read_jsonl(cfg.labels)
    try:
        spec = read_fold_spec(cfg.folds)
    except OSError as exc:
        raise PipelineError(EXIT_IO, f"cannot read folds: {exc}")
    except (json.JSONDecodeError, KeyError) as exc:
        raise PipelineError(EXIT_CONFIG, f"bad fold spec: {exc}")
    if len(spec.assignment) != len(rows):
        raise PipelineError(
            EXIT_MISALIGNED,
            f"fold spec covers {len(spec.assignment)} rows, bundle has {len(rows)}",
        )
    class_counts = {LOW: 0, HIGH: 0}
    for row in rows:
        value = row.get("label")
        if value not in class_counts:
            raise PipelineError(EXIT_MISALIGNED, f"row {row.get('doc_id')!r} has no label")
        class_counts[value] += 1
    with output_lock(out):
        write_jsonl(rows, out / "articles.jsonl")
        write_fold_spec(spec, out / "folds.json")
        write_manifest(
            out,
            {
                "command": "export-finetune",
                "config_hash": config_hash(cfg),
                "created": effective_created(cfg),
                "fold_hash": fold_spec_hash(spec),
                "counts": {
                    "rows": len(rows),
                    "low": class_counts[LOW],
                    "high": class_counts[HIGH],
                },
                "seed": spec.seed,
                "k": spec.k,
            },
        )
    return out / "manifest.json"
