"""Built-in rule-based annotator.

A deterministic stand-in used for smoke tests and end-to-end runs when no
external annotation file is supplied. It is intentionally simple: closed
class lexicons plus suffix rules for POS, a shallow head-assignment scheme
for dependencies, and pattern rules for entities. Real corpora should be
annotated externally and fed through read_annotations.
"""

from __future__ import annotations

import re

from .annotations import AnnotatedDoc, Token

_TOKEN_RE = re.compile(r"[A-Za-z0-9À-ɏ]+(?:['’-][A-Za-z0-9À-ɏ]+)*|\S")
_SENT_END = {".", "!", "?"}

_DETERMINERS = {"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no"}
_PRONOUNS = {"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "who", "whom", "it's"}
_POSSESSIVES = {"my", "your", "his", "its", "our", "their"}
_PREPOSITIONS = {
    "of", "in", "on", "at", "by", "for", "with", "from", "into", "over", "under",
    "about", "after", "before", "between", "through", "during", "against", "across",
    "around", "near", "without", "within", "among",
}
_CCONJ = {"and", "or", "but", "nor", "yet"}
_SCONJ = {"because", "although", "while", "whereas", "unless", "since", "if", "when", "that", "as"}
_MODALS = {"will", "would", "can", "could", "may", "might", "must", "shall", "should"}
_AUX_FORMS = {
    "is": "VBZ", "are": "VBP", "was": "VBD", "were": "VBD", "be": "VB",
    "been": "VBN", "being": "VBG", "has": "VBZ", "have": "VBP", "had": "VBD",
    "do": "VBP", "does": "VBZ", "did": "VBD",
}
_ADVERBS = {"not", "very", "also", "now", "then", "here", "there", "again", "often", "never", "always", "soon", "just", "still", "too"}
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish")
_ORG_MARKERS = {"inc", "corp", "ltd", "company", "university", "ministry", "department", "agency", "council", "bank", "group", "times", "post", "news"}
_GPE_NAMES = {
    "america", "england", "france", "germany", "spain", "italy", "canada", "china",
    "india", "japan", "russia", "brazil", "london", "paris", "berlin", "madrid",
    "rome", "tokyo", "moscow", "washington", "york", "boston", "chicago", "texas",
    "california", "europe", "africa", "asia",
}
_MONTHS = {
    "january", "february", "march", "april", "may", "june", "july", "august",
    "september", "october", "november", "december", "monday", "tuesday",
    "wednesday", "thursday", "friday", "saturday", "sunday",
}

_PUNCT_FINE = {".": ".", "!": ".", "?": ".", ",": ",", ";": ":", ":": ":",
               "(": "-LRB-", ")": "-RRB-", "#": "#", "$": "$",
               '"': "''", "'": "''", "“": "``", "”": "''",
               "‘": "``", "’": "''", "-": "HYPH", "–": "HYPH", "—": "HYPH"}


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def _tag_word(token: str, sentence_initial: bool) -> tuple[str, str]:
    lower = token.lower()
    if not any(ch.isalnum() for ch in token):
        return "PUNCT", _PUNCT_FINE.get(token, "NFP")
    if any(ch.isdigit() for ch in token):
        return "NUM", "CD"
    if lower in _DETERMINERS:
        return "DET", "DT"
    if lower in _POSSESSIVES:
        return "PRON", "PRP$"
    if lower in _PRONOUNS:
        return "PRON", "PRP"
    if lower == "to":
        return "PART", "TO"
    if lower in _MODALS:
        return "AUX", "MD"
    if lower in _AUX_FORMS:
        return "AUX", _AUX_FORMS[lower]
    if lower in _CCONJ:
        return "CCONJ", "CC"
    if lower in _SCONJ:
        return "SCONJ", "IN"
    if lower in _PREPOSITIONS:
        return "ADP", "IN"
    if lower in _ADVERBS or (lower.endswith("ly") and len(lower) > 3):
        return "ADV", "RB"
    if token[0].isupper() and not sentence_initial:
        return "PROPN", "NNP"
    if lower.endswith("ing") and len(lower) > 4:
        return "VERB", "VBG"
    if lower.endswith("ed") and len(lower) > 3:
        return "VERB", "VBD"
    if lower.endswith(_ADJ_SUFFIXES) and len(lower) > 4:
        return "ADJ", "JJ"
    if lower.endswith("s") and not lower.endswith("ss") and len(lower) > 3:
        return "NOUN", "NNS"
    return "NOUN", "NN"


def _assign_heads(tags: list[str]) -> tuple[list[int], list[str]]:
    """Shallow head assignment: one verb-rooted spine per sentence."""
    n = len(tags)
    root = next((i for i, t in enumerate(tags) if t in ("VERB", "AUX")), 0)
    heads = [root] * n
    labels = ["dep"] * n
    labels[root] = "root"
    subject_taken = False
    for i, tag in enumerate(tags):
        if i == root:
            continue
        if tag == "PUNCT":
            labels[i] = "punct"
        elif tag == "DET":
            target = next((j for j in range(i + 1, n) if tags[j] in ("NOUN", "PROPN")), root)
            heads[i], labels[i] = target, "det"
        elif tag == "ADJ":
            target = next((j for j in range(i + 1, n) if tags[j] in ("NOUN", "PROPN")), root)
            heads[i], labels[i] = target, "amod"
        elif tag == "ADV":
            labels[i] = "advmod"
        elif tag in ("ADP", "SCONJ"):
            labels[i] = "case" if tag == "ADP" else "mark"
        elif tag == "CCONJ":
            labels[i] = "cc"
        elif tag == "AUX":
            labels[i] = "aux"
        elif tag == "NUM":
            labels[i] = "nummod"
        elif tag in ("NOUN", "PROPN", "PRON"):
            if i < root and not subject_taken:
                labels[i] = "nsubj"
                subject_taken = True
            elif i > 0 and tags[i - 1] == "ADP":
                heads[i], labels[i] = i - 1, "pobj"
            elif i > root:
                labels[i] = "obj"
            else:
                labels[i] = "nmod"
        elif tag == "VERB":
            labels[i] = "conj"
    return heads, labels


def _assign_entities(tokens: list[str], tags: list[str], sentence_starts: set[int]) -> list[str]:
    n = len(tokens)
    ner = ["O"] * n
    i = 0
    while i < n:
        token = tokens[i]
        lower = token.lower()
        if any(ch.isdigit() for ch in token):
            if re.fullmatch(r"(19|20)\d\d", token):
                ner[i] = "DATE"
            elif i + 1 < n and tokens[i + 1] == "%":
                ner[i] = ner[i + 1] = "PERCENT"
                i += 2
                continue
            elif i > 0 and tokens[i - 1] == "$":
                ner[i - 1] = ner[i] = "MONEY"
            else:
                ner[i] = "CARDINAL"
            i += 1
            continue
        if lower in _MONTHS:
            ner[i] = "DATE"
            i += 1
            continue
        if token[0].isupper() and (i not in sentence_starts or tags[i] == "PROPN"):
            j = i
            while j < n and tokens[j][0].isupper() and any(c.isalpha() for c in tokens[j]):
                j += 1
            run = [tokens[k].lower() for k in range(i, j)]
            if any(w in _GPE_NAMES for w in run):
                kind = "GPE"
            elif any(w in _ORG_MARKERS for w in run):
                kind = "ORG"
            elif j - i >= 2:
                kind = "PERSON"
            else:
                kind = "ORG" if i in sentence_starts else "PERSON"
            for k in range(i, j):
                ner[k] = kind
            i = j
            continue
        i += 1
    return ner


def annotate(doc_id: str, text: str) -> AnnotatedDoc:
    """Deterministic annotation of raw text into an AnnotatedDoc."""
    tokens = tokenize(text)
    if not tokens:
        return AnnotatedDoc(doc_id, [], [])

    # Sentence boundaries after terminal punctuation.
    boundaries: list[int] = []
    start = 0
    for i, token in enumerate(tokens):
        if token in _SENT_END:
            boundaries.append(i + 1)
            start = i + 1
    if start < len(tokens):
        boundaries.append(len(tokens))

    out_tokens: list[Token] = []
    spans: list[tuple[int, int]] = []
    sentence_starts = set()
    begin = 0
    for end in boundaries:
        if end <= begin:
            begin = end
            continue
        sentence_starts.add(begin)
        begin = end

    begin = 0
    all_tags: list[str] = []
    all_fine: list[str] = []
    for i, token in enumerate(tokens):
        coarse, fine = _tag_word(token, sentence_initial=i in sentence_starts)
        all_tags.append(coarse)
        all_fine.append(fine)
    ner = _assign_entities(tokens, all_tags, sentence_starts)

    for end in boundaries:
        if end <= begin:
            begin = end
            continue
        sentence_tags = all_tags[begin:end]
        heads, labels = _assign_heads(sentence_tags)
        doc_start = len(out_tokens)
        for offset in range(end - begin):
            i = begin + offset
            out_tokens.append(
                Token(
                    text=tokens[i],
                    coarse_pos=all_tags[i],
                    fine_tag=all_fine[i],
                    dep_label=labels[offset],
                    head_index=doc_start + heads[offset],
                    ner_tag=ner[i],
                )
            )
        spans.append((doc_start, doc_start + (end - begin)))
        begin = end
    return AnnotatedDoc(doc_id, out_tokens, spans)
