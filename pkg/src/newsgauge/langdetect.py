"""Character n-gram language identification.

Profiles are built once from bundled seed texts (one per supported
language); a document is classified by cosine similarity between its
n-gram count vector and each profile. The detector is deterministic and
fully offline. Texts below a minimum length come back as `und` since short
fragments carry too little signal.
"""

from __future__ import annotations

import json
import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Iterator, TypeVar

UNDETERMINED = "und"
DEFAULT_MIN_CHARS = 40
_NGRAM_ORDERS = (1, 2, 3)

_T = TypeVar("_T")


@dataclass(frozen=True)
class LanguageVerdict:
    language: str
    confidence: float


def _normalize(text: str) -> str:
    letters = []
    for ch in text.lower():
        if unicodedata.category(ch).startswith("L"):
            letters.append(ch)
        else:
            letters.append(" ")
    return " " + re.sub(r"\s+", " ", "".join(letters)).strip() + " "


def _ngram_counts(text: str) -> Counter:
    normalized = _normalize(text)
    counts: Counter = Counter()
    for n in _NGRAM_ORDERS:
        for i in range(len(normalized) - n + 1):
            counts[normalized[i : i + n]] += 1
    return counts


def _cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    dot = sum(count * large.get(gram, 0) for gram, count in small.items())
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


@lru_cache(maxsize=1)
def _profiles() -> dict[str, Counter]:
    raw = resources.files("newsgauge.data").joinpath("lang_seeds.json").read_text("utf-8")
    seeds: dict[str, str] = json.loads(raw)
    return {lang: _ngram_counts(text) for lang, text in seeds.items()}


def supported_languages() -> tuple[str, ...]:
    return tuple(sorted(_profiles())) + (UNDETERMINED,)


def detect_language(text: str, min_chars: int = DEFAULT_MIN_CHARS) -> LanguageVerdict:
    """Best-matching language profile for the text plus a confidence.

    Pure function of the input: identical text always yields the identical
    verdict. Returns ("und", 0.0) below the minimum length.
    """
    if len(text.strip()) < min_chars:
        return LanguageVerdict(UNDETERMINED, 0.0)
    doc = _ngram_counts(text)
    best_lang = UNDETERMINED
    best_sim = 0.0
    for lang in sorted(_profiles()):
        sim = _cosine(doc, _profiles()[lang])
        if sim > best_sim:
            best_lang, best_sim = lang, sim
    if best_sim <= 0.0:
        return LanguageVerdict(UNDETERMINED, 0.0)
    return LanguageVerdict(best_lang, min(best_sim, 1.0))


@dataclass
class FilterCounts:
    input: int = 0
    kept: int = 0
    dropped: int = 0


def filter_english(
    items: Iterable[_T],
    text_of: Callable[[_T], str],
    threshold: float = 0.8,
    counters: FilterCounts | None = None,
    min_chars: int = DEFAULT_MIN_CHARS,
) -> Iterator[tuple[_T, LanguageVerdict]]:
    """Pass items detected as English with confidence at or above threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    counters = counters if counters is not None else FilterCounts()
    for item in items:
        counters.input += 1
        verdict = detect_language(text_of(item), min_chars=min_chars)
        if verdict.language == "en" and verdict.confidence >= threshold:
            counters.kept += 1
            yield item, verdict
        else:
            counters.dropped += 1
