"""Error-recovering HTML tree construction.

Builds a light-weight DOM from arbitrary (possibly broken) markup using the
stdlib tokenizer. Recovery rules follow the HTML5 spirit: void elements never
open a scope, misplaced end tags are dropped, unclosed elements are closed at
end of input, and `<p>`/`<li>`/table cells imply their own end tags. The
parser must accept any byte salad without raising.
"""

from __future__ import annotations

from html.parser import HTMLParser

TEXT_TAG = "#text"
COMMENT_TAG = "#comment"
DOCUMENT_TAG = "#document"

VOID_ELEMENTS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
})

# Opening one of these closes an open element of the mapped tags first.
_IMPLIED_END = {
    "p": {"p"},
    "li": {"li"},
    "option": {"option"},
    "tr": {"tr", "td", "th"},
    "td": {"td", "th"},
    "th": {"td", "th"},
    "dd": {"dd", "dt"},
    "dt": {"dd", "dt"},
}

# Block-level starts that implicitly terminate an open paragraph.
_P_CLOSERS = frozenset({
    "address", "article", "aside", "blockquote", "div", "dl", "fieldset",
    "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
    "header", "hr", "main", "nav", "ol", "pre", "section", "table", "ul",
})


class DomNode:
    """One element, text, or comment node.

    Attribute names are stored lowercased; `attr()` is therefore
    case-insensitive on the name. Text and comment nodes carry their payload
    in `text` and have the pseudo-tags `#text` / `#comment`.
    """

    __slots__ = ("tag", "attrs", "children", "text", "parent")

    def __init__(self, tag: str, attrs: dict[str, str] | None = None, text: str = ""):
        self.tag = tag
        self.attrs = attrs or {}
        self.children: list[DomNode] = []
        self.text = text
        self.parent: DomNode | None = None

    def append(self, child: "DomNode") -> None:
        child.parent = self
        self.children.append(child)

    def attr(self, name: str, default: str = "") -> str:
        return self.attrs.get(name.lower(), default)

    @property
    def is_text(self) -> bool:
        return self.tag == TEXT_TAG

    @property
    def is_comment(self) -> bool:
        return self.tag == COMMENT_TAG

    @property
    def is_element(self) -> bool:
        return not self.tag.startswith("#")

    def clone(self) -> "DomNode":
        """Deep copy of this subtree (parent link of the copy is None)."""
        dup = DomNode(self.tag, dict(self.attrs), self.text)
        for child in self.children:
            dup.append(child.clone())
        return dup

    def walk(self):
        """Yield the subtree in document (preorder) order, including self."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def iter_elements(self):
        for node in self.walk():
            if node.is_element:
                yield node

    def subtree_text(self) -> str:
        """Concatenated text content of the subtree, in document order."""
        parts = [n.text for n in self.walk() if n.is_text]
        return "".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.is_text:
            return f"DomNode(#text {self.text[:30]!r})"
        return f"DomNode(<{self.tag}> attrs={self.attrs} children={len(self.children)})"


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = DomNode(DOCUMENT_TAG)
        self.stack = [self.root]

    # -- stack helpers -------------------------------------------------

    def _close_implied(self, tag: str) -> None:
        closable = set(_IMPLIED_END.get(tag, ()))
        if tag in _P_CLOSERS:
            closable.add("p")
        if not closable:
            return
        # Close at most the innermost run of closable elements.
        while len(self.stack) > 1 and self.stack[-1].tag in closable:
            self.stack.pop()

    def handle_starttag(self, tag, attrs):
        self._close_implied(tag)
        merged: dict[str, str] = {}
        for name, value in attrs:
            merged.setdefault(name.lower(), value if value is not None else "")
        node = DomNode(tag, merged)
        self.stack[-1].append(node)
        if tag not in VOID_ELEMENTS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self._close_implied(tag)
        merged = {n.lower(): (v if v is not None else "") for n, v in attrs}
        self.stack[-1].append(DomNode(tag, merged))

    def handle_endtag(self, tag):
        if tag in VOID_ELEMENTS:
            return
        # Drop the end tag unless a matching element is open somewhere.
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                del self.stack[depth:]
                return

    def handle_data(self, data):
        if data:
            self.stack[-1].append(DomNode(TEXT_TAG, text=data))

    def handle_comment(self, data):
        self.stack[-1].append(DomNode(COMMENT_TAG, text=data))

    def handle_decl(self, decl):
        pass

    def unknown_decl(self, data):
        pass


def parse_html(html: str) -> DomNode:
    """Parse markup into a DomNode tree rooted at a #document node.

    Never raises on malformed input; whatever was built before a tokenizer
    hiccup is returned as a partial tree.
    """
    builder = _TreeBuilder()
    try:
        builder.feed(html)
        builder.close()
    except Exception:  # tokenizer blow-up on pathological input
        pass
    return builder.root
