"""Token-level annotation records and their column-format reader.

Documents arrive as CoNLL-U-style text: one `# doc_id = ...` comment per
document, one token per line with tab-separated columns
(index, text, coarse_pos, fine_tag, head, dep_label, ner_tag), and a blank
line between sentences. Heads use the CoNLL convention (1-based within the
sentence, 0 for the root); in memory they become document-level indices
with the root pointing at itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, TextIO

N_COLUMNS = 7


@dataclass(frozen=True)
class Token:
    text: str
    coarse_pos: str
    fine_tag: str
    dep_label: str
    head_index: int
    ner_tag: str


@dataclass
class AnnotatedDoc:
    doc_id: str
    tokens: list[Token]
    sentence_spans: list[tuple[int, int]]


@dataclass
class AnnotationCounters:
    docs: int = 0
    rejected: int = 0
    diagnostics: list[str] = field(default_factory=list)


class _DocBuilder:
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        self.tokens: list[Token] = []
        self.spans: list[tuple[int, int]] = []
        self.sentence: list[tuple[int, str, str, str, str, int, str]] = []
        self.failure: str | None = None

    def fail(self, message: str) -> None:
        if self.failure is None:
            self.failure = message

    def add_line(self, line: str, lineno: int) -> None:
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            self.fail(f"line {lineno}: expected {N_COLUMNS} columns, got {len(cols)}")
            return
        try:
            idx = int(cols[0])
            head = int(cols[4])
        except ValueError:
            self.fail(f"line {lineno}: non-integer index or head")
            return
        if idx != len(self.sentence) + 1:
            self.fail(f"line {lineno}: token index {idx} out of sequence")
            return
        self.sentence.append((lineno, cols[1], cols[2], cols[3], cols[5], head, cols[6]))

    def end_sentence(self) -> None:
        if not self.sentence:
            return
        start = len(self.tokens)
        n = len(self.sentence)
        roots = 0
        for lineno, text, coarse, fine, dep, head, ner in self.sentence:
            if not 0 <= head <= n:
                self.fail(f"line {lineno}: head {head} out of range for {n}-token sentence")
                self.sentence = []
                return
            if head == 0:
                roots += 1
        if roots != 1:
            self.fail(f"sentence ending near line {self.sentence[-1][0]}: {roots} roots, expected 1")
            self.sentence = []
            return
        for position, (_, text, coarse, fine, dep, head, ner) in enumerate(self.sentence):
            absolute_head = start + position if head == 0 else start + head - 1
            self.tokens.append(Token(text, coarse, fine, dep, absolute_head, ner))
        self.spans.append((start, start + n))
        self.sentence = []

    def finish(self) -> AnnotatedDoc | None:
        self.end_sentence()
        if self.failure is not None:
            return None
        return AnnotatedDoc(self.doc_id, self.tokens, self.spans)


def read_annotations(
    stream: TextIO, counters: AnnotationCounters | None = None
) -> Iterator[AnnotatedDoc]:
    """Yield validated AnnotatedDocs; malformed documents are rejected whole.

    A rejection records the first offending line number in the counters and
    never interrupts the stream.
    """
    counters = counters if counters is not None else AnnotationCounters()
    builder: _DocBuilder | None = None

    def close(b: _DocBuilder | None) -> AnnotatedDoc | None:
        if b is None:
            return None
        doc = b.finish()
        if doc is None:
            counters.rejected += 1
            counters.diagnostics.append(f"doc {b.doc_id!r} rejected: {b.failure}")
            return None
        counters.docs += 1
        return doc

    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("doc_id"):
                _, _, value = body.partition("=")
                done = close(builder)
                if done is not None:
                    yield done
                builder = _DocBuilder(value.strip())
            continue
        if not line.strip():
            if builder is not None:
                builder.end_sentence()
            continue
        if builder is None:
            builder = _DocBuilder(f"anonymous@{lineno}")
        builder.add_line(line, lineno)

    done = close(builder)
    if done is not None:
        yield done


def write_annotations(docs, stream: TextIO) -> None:
    """Inverse of read_annotations, used by the built-in tagger path."""
    for doc in docs:
        stream.write(f"# doc_id = {doc.doc_id}\n")
        for start, end in doc.sentence_spans:
            for position in range(start, end):
                token = doc.tokens[position]
                head = 0 if token.head_index == position else token.head_index - start + 1
                stream.write(
                    "\t".join(
                        [
                            str(position - start + 1),
                            token.text,
                            token.coarse_pos,
                            token.fine_tag,
                            str(head),
                            token.dep_label,
                            token.ner_tag,
                        ]
                    )
                    + "\n"
                )
            stream.write("\n")
