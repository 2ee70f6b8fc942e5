"""Heuristic main-content extraction.

The extractor strips obvious noise from the DOM, enumerates candidate
container elements, scores each one from structural signals (paragraph and
word counts, link density, class/id keywords), picks the top scorer, and
refines its text down to clean article paragraphs.

Scoring is integer arithmetic throughout: +2 per paragraph, +1 per 10 words,
-10 for link-dense sections, +100 / -500 for positive / negative class-id
keywords. Typical article bodies land in the 150-300 band while navigation
and footer blocks stay below 50, which is what makes a fixed acceptance
floor workable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .dom import DomNode, parse_html

CANDIDATE_TAGS = frozenset({"div", "section", "article", "main"})

_RUN_RE = re.compile(r"\S+")
_WS_RE = re.compile(r"\s+")


def words(text: str) -> list[str]:
    """Maximal non-whitespace runs containing at least one alphanumeric."""
    return [w for w in _RUN_RE.findall(text) if any(ch.isalnum() for ch in w)]


def count_words(text: str) -> int:
    return len(words(text))


def visible_char_count(text: str) -> int:
    """Character count with all whitespace ignored.

    Whitespace is excluded so that source indentation cannot shift link
    density; the ratio is over characters a reader would actually see.
    """
    return sum(1 for ch in text if not ch.isspace())


def normalize_block(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


@dataclass(frozen=True)
class ParserConfig:
    positive_keywords: tuple[str, ...] = ("article", "content", "body", "story")
    negative_keywords: tuple[str, ...] = ("comment", "footer", "sidebar", "scrollbar")
    cookie_keywords: tuple[str, ...] = ("cookie", "consent", "gdpr", "privacy-banner")
    copyright_patterns: tuple[str, ...] = ("©", "copyright", "all rights reserved")
    noise_tags: tuple[str, ...] = ("script", "style", "noscript", "iframe", "svg", "form", "nav")
    link_ratio_threshold: float = 0.3
    link_penalty: int = -10
    positive_bonus: int = 100
    negative_bonus: int = -500
    min_score: int = 50
    min_paragraph_tokens: int = 5


DEFAULT_CONFIG = ParserConfig()


@dataclass
class CandidateSection:
    node: DomNode
    paragraph_count: int
    word_count: int
    link_char_count: int
    text_char_count: int
    doc_order: int


@dataclass(frozen=True)
class ScoreBreakdown:
    paragraph_points: int
    word_points: int
    link_penalty: int
    attr_bonus: int

    @property
    def total(self) -> int:
        return self.paragraph_points + self.word_points + self.link_penalty + self.attr_bonus

    def as_dict(self) -> dict:
        return {
            "paragraph_points": self.paragraph_points,
            "word_points": self.word_points,
            "link_penalty": self.link_penalty,
            "attr_bonus": self.attr_bonus,
            "total": self.total,
        }


@dataclass
class ArticleText:
    paragraphs: list[str]
    title: str | None
    parser_score: int
    dropped_paragraphs: int


@dataclass
class Extraction:
    """Outcome of extract_article: either an article or a drop reason."""

    article: ArticleText | None
    drop_reason: str | None
    candidates: list[tuple[CandidateSection, ScoreBreakdown]] = field(default_factory=list)


def _attr_haystack(node: DomNode) -> str:
    # Space-joined so a keyword cannot straddle the class/id boundary.
    return (node.attr("class") + " " + node.attr("id")).lower()


def strip_noise(dom: DomNode, config: ParserConfig = DEFAULT_CONFIG) -> DomNode:
    """Return a copy of the tree without scripts, chrome, and consent widgets.

    Removes the configured noise tags, HTML comments, and any element whose
    class or id mentions a cookie-consent keyword. The input tree is left
    untouched.
    """
    noise_tags = set(config.noise_tags)

    def keep(node: DomNode) -> bool:
        if node.is_comment:
            return False
        if node.is_element:
            if node.tag in noise_tags:
                return False
            haystack = _attr_haystack(node)
            if any(k in haystack for k in config.cookie_keywords):
                return False
        return True

    def copy(node: DomNode) -> DomNode:
        dup = DomNode(node.tag, dict(node.attrs), node.text)
        for child in node.children:
            if keep(child):
                dup.append(copy(child))
        return dup

    return copy(dom)


def _collect_counts(root: DomNode) -> tuple[int, int, int, int]:
    """(paragraphs, words, link chars, text chars) for a candidate subtree."""
    paragraphs = 0
    word_count = 0
    link_chars = 0
    text_chars = 0
    # (node, inside_anchor) so nested anchors never double-count.
    stack = [(root, False)]
    while stack:
        node, in_anchor = stack.pop()
        if node.is_text:
            n = visible_char_count(node.text)
            text_chars += n
            if in_anchor:
                link_chars += n
            word_count += count_words(node.text)
            continue
        if node.is_element and node.tag == "p" and node is not root:
            if count_words(node.subtree_text()) >= 1:
                paragraphs += 1
        child_in_anchor = in_anchor or (node.is_element and node.tag == "a")
        for child in reversed(node.children):
            stack.append((child, child_in_anchor))
    return paragraphs, word_count, link_chars, text_chars


def enumerate_candidates(dom: DomNode) -> list[CandidateSection]:
    """All div/section/article/main elements in preorder, counts included.

    Nested candidates each get their own entry; counts always cover the
    candidate's full subtree.
    """
    out: list[CandidateSection] = []
    order = 0
    for node in dom.walk():
        if not node.is_element:
            continue
        order += 1
        if node.tag in CANDIDATE_TAGS:
            p, w, lc, tc = _collect_counts(node)
            out.append(CandidateSection(node, p, w, lc, tc, doc_order=order))
    return out


def score_candidate(c: CandidateSection, config: ParserConfig = DEFAULT_CONFIG) -> ScoreBreakdown:
    """Integer score from paragraph/word counts, link density, and keywords."""
    paragraph_points = 2 * c.paragraph_count
    word_points = c.word_count // 10

    ratio = c.link_char_count / max(c.text_char_count, 1)
    link_penalty = config.link_penalty if ratio > config.link_ratio_threshold else 0

    haystack = _attr_haystack(c.node)
    attr_bonus = 0
    if any(k in haystack for k in config.positive_keywords):
        attr_bonus += config.positive_bonus
    if any(k in haystack for k in config.negative_keywords):
        attr_bonus += config.negative_bonus

    return ScoreBreakdown(paragraph_points, word_points, link_penalty, attr_bonus)


def select_main(
    scored: list[tuple[CandidateSection, ScoreBreakdown]],
    min_score: int = DEFAULT_CONFIG.min_score,
) -> tuple[CandidateSection, ScoreBreakdown] | None:
    """Highest-scoring candidate, ties to the earliest in document order."""
    best: tuple[CandidateSection, ScoreBreakdown] | None = None
    for section, breakdown in scored:
        if best is None:
            best = (section, breakdown)
            continue
        if breakdown.total > best[1].total or (
            breakdown.total == best[1].total and section.doc_order < best[0].doc_order
        ):
            best = (section, breakdown)
    if best is None or best[1].total < min_score:
        return None
    return best


def _collect_blocks(root: DomNode) -> list[str]:
    """Text blocks of a subtree in document order.

    A `<p>` element is one atomic block (its whole subtree text). Outside
    paragraphs, each maximal run of adjacent sibling text nodes forms a
    block, so inline markup splits raw text.
    """
    blocks: list[str] = []
    run: list[str] = []

    def flush():
        if run:
            blocks.append(normalize_block("".join(run)))
            run.clear()

    def visit(node: DomNode):
        for child in node.children:
            if child.is_text:
                run.append(child.text)
                continue
            flush()
            if child.is_element and child.tag == "p":
                blocks.append(normalize_block(child.subtree_text()))
            else:
                visit(child)
        flush()

    visit(root)
    return [b for b in blocks if b]


def refine_text(
    section: CandidateSection,
    config: ParserConfig = DEFAULT_CONFIG,
    title: str | None = None,
    score: int = 0,
) -> ArticleText:
    """Keep substantial blocks, dropping short fragments and legal footers."""
    kept: list[str] = []
    dropped = 0
    for block in _collect_blocks(section.node):
        lowered = block.lower()
        if count_words(block) < config.min_paragraph_tokens:
            dropped += 1
            continue
        if any(pat in lowered for pat in config.copyright_patterns):
            dropped += 1
            continue
        kept.append(block)
    return ArticleText(paragraphs=kept, title=title, parser_score=score, dropped_paragraphs=dropped)


def _find_title(dom: DomNode) -> str | None:
    for node in dom.iter_elements():
        if node.tag == "title":
            text = normalize_block(node.subtree_text())
            return text or None
    return None


def extract_article(html: str, config: ParserConfig = DEFAULT_CONFIG, trace: bool = False) -> Extraction:
    """Full pipeline: parse, strip, enumerate, score, select, refine.

    Deterministic for a fixed config. A page with no candidate sections,
    no candidate above the score floor, or nothing left after refinement
    comes back with a drop reason instead of an article.
    """
    dom = parse_html(html)
    clean = strip_noise(dom, config)
    candidates = enumerate_candidates(clean)
    scored = [(c, score_candidate(c, config)) for c in candidates]
    kept_trace = scored if trace else []

    if not candidates:
        return Extraction(None, "no-candidates", kept_trace)

    best = select_main(scored, config.min_score)
    if best is None:
        return Extraction(None, "below-min-score", kept_trace)

    section, breakdown = best
    article = refine_text(section, config, title=_find_title(clean), score=breakdown.total)
    if not article.paragraphs:
        return Extraction(None, "refined-empty", kept_trace)
    return Extraction(article, None, kept_trace)
