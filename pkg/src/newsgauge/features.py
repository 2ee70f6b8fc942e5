"""Per-document linguistic feature vectors.

Tag groups (POS, TREEBANK, DEPENDENCY, NER) are ratios: count of the tag
divided by token count, with unknown tags pooled into the group's reserved
bucket. NER counts entity-tagged tokens only, so "O" contributes nothing.
The MISC group holds 21 fixed stylometric formulas. Every division follows
the 0/0 -> 0 contract; an empty document maps to the zero vector.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable

import numpy as np

from .annotations import AnnotatedDoc, Token
from .registry import OTHER_BUCKETS, FeatureRegistry

CONTENT_POS = frozenset({"NOUN", "PROPN", "VERB", "ADJ", "ADV"})
NOUN_POS = frozenset({"NOUN", "PROPN"})
_QUOTE_CHARS = set("\"'‘’“”«»`")
_VOWELS = set("aeiouy")
NOUN_VERB_CAP = 10.0


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    raw = resources.files("newsgauge.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(w.strip() for w in raw.splitlines() if w.strip())


def is_word(text: str) -> bool:
    return any(ch.isalnum() for ch in text)


def count_syllables(word: str) -> int:
    """Vowel-group count with a silent trailing-e adjustment, minimum one."""
    letters = [ch for ch in word.lower() if ch.isalpha()]
    if not letters:
        return 0
    groups = 0
    previous_vowel = False
    for ch in letters:
        vowel = ch in _VOWELS
        if vowel and not previous_vowel:
            groups += 1
        previous_vowel = vowel
    if groups > 1 and letters[-1] == "e" and not (len(letters) >= 2 and letters[-2] == "l"):
        groups -= 1
    return max(groups, 1)


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def _tag_lookup(registry: FeatureRegistry, group: str) -> tuple[dict[str, int], int]:
    mapping = {name: registry.slot_index[name] for name in registry.groups[group]}
    other = registry.slot_index[OTHER_BUCKETS[group]]
    return mapping, other


def _parse_depth(tokens: list[Token], start: int, end: int) -> int:
    depth = 0
    for i in range(start, end):
        steps = 0
        node = i
        # Bounded walk; a malformed cycle cannot loop forever.
        while tokens[node].head_index != node and steps < (end - start):
            node = tokens[node].head_index
            steps += 1
        depth = max(depth, steps)
    return depth


def _misc_values(doc: AnnotatedDoc) -> dict[str, float]:
    tokens = doc.tokens
    n = len(tokens)
    n_sent = len(doc.sentence_spans)

    word_texts = [t.text for t in tokens if is_word(t.text)]
    n_words = len(word_texts)
    lowered = [w.lower() for w in word_texts]
    type_counts: dict[str, int] = {}
    for w in lowered:
        type_counts[w] = type_counts.get(w, 0) + 1

    stops = stopwords()
    n_syllables = sum(count_syllables(w) for w in word_texts)
    words_per_sentence = _ratio(n_words, n_sent)
    syllables_per_word = _ratio(n_syllables, n_words)

    nouns = sum(1 for t in tokens if t.coarse_pos in NOUN_POS)
    verbs = sum(1 for t in tokens if t.coarse_pos == "VERB")
    if verbs:
        noun_verb = min(nouns / verbs, NOUN_VERB_CAP)
    else:
        noun_verb = NOUN_VERB_CAP if nouns else 0.0

    flesch_re = 0.0
    flesch_kg = 0.0
    if n_words and n_sent:
        flesch_re = 206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word
        flesch_kg = 0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59

    return {
        "token_count_log": math.log(1 + n),
        "sentence_count_log": math.log(1 + n_sent),
        "avg_sentence_len_tokens": _ratio(n, n_sent),
        "avg_word_len_chars": _ratio(sum(len(w) for w in word_texts), n_words),
        "type_token_ratio": _ratio(len(type_counts), n_words),
        "hapax_ratio": _ratio(sum(1 for c in type_counts.values() if c == 1), n_words),
        "stopword_ratio": _ratio(sum(1 for w in lowered if w in stops), n),
        "punctuation_ratio": _ratio(sum(1 for t in tokens if not is_word(t.text)), n),
        "digit_ratio": _ratio(sum(1 for t in tokens if any(c.isdigit() for c in t.text)), n),
        "uppercase_token_ratio": _ratio(sum(1 for t in tokens if t.text.isupper()), n),
        "titlecase_token_ratio": _ratio(sum(1 for t in tokens if t.text.istitle()), n),
        "question_mark_ratio": _ratio(sum(1 for t in tokens if "?" in t.text), n),
        "exclamation_ratio": _ratio(sum(1 for t in tokens if "!" in t.text), n),
        "quote_char_ratio": _ratio(sum(1 for t in tokens if any(c in _QUOTE_CHARS for c in t.text)), n),
        "long_word_ratio": _ratio(sum(1 for w in word_texts if len(w) > 6), n_words),
        "lexical_density": _ratio(sum(1 for t in tokens if t.coarse_pos in CONTENT_POS), n),
        "noun_verb_ratio": noun_verb,
        "avg_dependency_distance": _ratio(sum(abs(i - t.head_index) for i, t in enumerate(tokens)), n),
        "max_parse_depth_mean": _ratio(
            sum(_parse_depth(tokens, s, e) for s, e in doc.sentence_spans), n_sent
        ),
        "flesch_reading_ease": flesch_re,
        "flesch_kincaid_grade": flesch_kg,
    }


@dataclass
class FeatureVector:
    values: np.ndarray
    token_count: int


def featurize(doc: AnnotatedDoc, registry: FeatureRegistry) -> FeatureVector:
    """One vector of registry.total reals; deterministic per document."""
    values = np.zeros(registry.total, dtype=np.float64)
    n = len(doc.tokens)
    if n == 0:
        return FeatureVector(values, 0)

    pos_map, pos_other = _tag_lookup(registry, "POS")
    tb_map, tb_other = _tag_lookup(registry, "TREEBANK")
    dep_map, dep_other = _tag_lookup(registry, "DEPENDENCY")
    ner_map, ner_other = _tag_lookup(registry, "NER")

    for token in doc.tokens:
        values[pos_map.get(token.coarse_pos, pos_other)] += 1.0
        values[tb_map.get(token.fine_tag, tb_other)] += 1.0
        values[dep_map.get(token.dep_label, dep_other)] += 1.0
        if token.ner_tag and token.ner_tag != "O":
            values[ner_map.get(token.ner_tag, ner_other)] += 1.0
    values /= n

    misc = _misc_values(doc)
    for name, value in misc.items():
        values[registry.slot_index[name]] = value
    return FeatureVector(values, n)


@dataclass
class FeatureMatrix:
    doc_ids: list[str]
    values: np.ndarray
    registry_version: str

    @property
    def row_count(self) -> int:
        return len(self.doc_ids)


@dataclass
class CorpusCounters:
    rows: int = 0
    skipped: int = 0
    diagnostics: list[str] = field(default_factory=list)


def featurize_corpus(
    docs: Iterable[AnnotatedDoc],
    registry: FeatureRegistry,
    counters: CorpusCounters | None = None,
) -> FeatureMatrix:
    """Row-per-document matrix in input order."""
    counters = counters if counters is not None else CorpusCounters()
    ids: list[str] = []
    rows: list[np.ndarray] = []
    for doc in docs:
        try:
            vector = featurize(doc, registry)
        except Exception as exc:  # malformed doc slipped through validation
            counters.skipped += 1
            counters.diagnostics.append(f"doc {doc.doc_id!r} skipped: {exc}")
            continue
        ids.append(doc.doc_id)
        rows.append(vector.values)
        counters.rows += 1
    values = np.vstack(rows) if rows else np.zeros((0, registry.total))
    return FeatureMatrix(ids, values, registry.version)


def write_matrix_csv(matrix: FeatureMatrix, registry: FeatureRegistry, path, created: str) -> None:
    """CSV with doc_id + one column per registry slot, plus a JSON sidecar."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["doc_id", *registry.slot_names])
        for doc_id, row in zip(matrix.doc_ids, matrix.values):
            writer.writerow([doc_id, *(repr(float(v)) for v in row)])
    sidecar = {
        "registry_version": matrix.registry_version,
        "row_count": matrix.row_count,
        "created": created,
    }
    with open(str(path) + ".json", "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=1, sort_keys=True)
        f.write("\n")


def read_matrix_csv(path) -> FeatureMatrix:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        ids = []
        rows = []
        for record in reader:
            ids.append(record[0])
            rows.append(np.array([float(v) for v in record[1:]], dtype=np.float64))
    values = np.vstack(rows) if rows else np.zeros((0, len(header) - 1))
    version = "unknown"
    try:
        with open(str(path) + ".json", encoding="utf-8") as f:
            version = json.load(f).get("registry_version", version)
    except (OSError, json.JSONDecodeError):
        pass
    return FeatureMatrix(ids, values, version)
