"""Domain-level quality scores joined onto articles and binarized.

Registrable domains come from a bundled public-suffix snapshot so that
subdomain handling stays deterministic and offline. PC1 scores live in a
domain-keyed table; each article inherits its domain's score, and the
corpus median over article scores becomes the split threshold.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Iterator, TextIO, TypeVar
from urllib.parse import urlsplit

LOW = "LOW"
HIGH = "HIGH"

T = TypeVar("T")


class DomainError(ValueError):
    """Raised when a registrable domain cannot be extracted."""


class LabelError(ValueError):
    """Raised for invalid PC1 tables or scores."""


@dataclass(frozen=True)
class QualityLabel:
    value: str
    pc1: float
    threshold: float


@dataclass
class JoinCounters:
    matched: int = 0
    unmatched: int = 0


@dataclass(frozen=True)
class SuffixRules:
    """Parsed public-suffix rules split by kind."""

    exact: frozenset[str]
    wildcard: frozenset[str]
    exceptions: frozenset[str]


def parse_suffix_rules(text: str) -> SuffixRules:
    exact: set[str] = set()
    wildcard: set[str] = set()
    exceptions: set[str] = set()
    for raw in text.splitlines():
        line = raw.strip().lower()
        if not line or line.startswith("//"):
            continue
        if line.startswith("!"):
            exceptions.add(line[1:])
        elif line.startswith("*."):
            wildcard.add(line[2:])
        else:
            exact.add(line)
    return SuffixRules(frozenset(exact), frozenset(wildcard), frozenset(exceptions))


@lru_cache(maxsize=1)
def default_suffix_rules() -> SuffixRules:
    text = resources.files("newsgauge.data").joinpath("public_suffixes.txt").read_text("utf-8")
    return parse_suffix_rules(text)


def _suffix_length(labels: list[str], rules: SuffixRules) -> int:
    """Number of labels in the public suffix, per the standard algorithm."""
    n = len(labels)
    best = 1
    for i in range(n):
        name = ".".join(labels[i:])
        if name in rules.exceptions:
            return n - i - 1
        if name in rules.exact:
            best = max(best, n - i)
        if i + 1 <= n and ".".join(labels[i + 1:]) in rules.wildcard:
            best = max(best, n - i)
    return best


def _host_of(url: str) -> str:
    text = url.strip()
    if not text or any(ch.isspace() for ch in text):
        raise DomainError(f"cannot parse domain from {url!r}")
    if "//" in text:
        host = urlsplit(text).hostname or ""
    else:
        host = text.split("/", 1)[0]
        host = host.rsplit("@", 1)[-1]
        if host.count(":") == 1:
            host = host.split(":", 1)[0]
    host = host.strip(".").lower()
    if not host or any(not label for label in host.split(".")):
        raise DomainError(f"cannot parse domain from {url!r}")
    return host


def normalize_domain(url: str, rules: SuffixRules | None = None) -> str:
    """Lowercase registrable domain of a URL or bare hostname."""
    if rules is None:
        rules = default_suffix_rules()
    host = _host_of(url)
    labels = host.split(".")
    if len(labels) < 2 or not any(ch.isalnum() for ch in host):
        raise DomainError(f"no registrable domain in {url!r}")
    suffix_len = _suffix_length(labels, rules)
    if len(labels) <= suffix_len:
        raise DomainError(f"no registrable domain in {url!r}")
    return ".".join(labels[-(suffix_len + 1):])


def read_pc1_table(handle: TextIO, rules: SuffixRules | None = None) -> dict[str, float]:
    """Load a domain,pc1 CSV into a normalized score table."""
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise LabelError("PC1 table is empty, expected a domain,pc1 header")
    if [col.strip().lower() for col in header] != ["domain", "pc1"]:
        raise LabelError(f"PC1 table header must be domain,pc1, got {header!r}")
    table: dict[str, float] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise LabelError(f"PC1 table line {lineno}: expected 2 columns, got {len(row)}")
        domain = normalize_domain(row[0], rules)
        try:
            score = float(row[1])
        except ValueError:
            raise LabelError(f"PC1 table line {lineno}: bad score {row[1]!r}")
        if not 0.0 <= score <= 1.0:
            raise LabelError(f"PC1 table line {lineno}: score {score} outside [0, 1]")
        if domain in table:
            raise LabelError(f"PC1 table line {lineno}: duplicate domain {domain!r}")
        table[domain] = score
    return table


def join_pc1(
    items: Iterable[T],
    table: dict[str, float],
    domain_of: Callable[[T], str],
    counters: JoinCounters | None = None,
    rules: SuffixRules | None = None,
) -> Iterator[tuple[T, float]]:
    """Pass through items whose registrable domain has a PC1 score."""
    if counters is None:
        counters = JoinCounters()
    for item in items:
        try:
            domain = normalize_domain(domain_of(item), rules)
        except DomainError:
            counters.unmatched += 1
            continue
        score = table.get(domain)
        if score is None:
            counters.unmatched += 1
            continue
        counters.matched += 1
        yield item, score


def median_threshold(scores: list[float]) -> float:
    """Median of article-level scores; even counts average the middle pair."""
    if not scores:
        raise LabelError("cannot take the median of an empty score list")
    return float(statistics.median(scores))


def binarize(pc1: float, threshold: float) -> QualityLabel:
    """HIGH strictly above the threshold, ties go LOW."""
    if not 0.0 <= pc1 <= 1.0:
        raise LabelError(f"pc1 score {pc1} outside [0, 1]")
    value = HIGH if pc1 > threshold else LOW
    return QualityLabel(value=value, pc1=pc1, threshold=threshold)
