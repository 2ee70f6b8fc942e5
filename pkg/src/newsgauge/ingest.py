"""Article ingestion: WARC archives and local HTML directories.

Both front-ends produce the same RawPage stream. Decoding goes through a
charset resolution chain (HTTP header, then meta tag sniff, then UTF-8 with
replacement) because crawl bodies are frequently mislabeled.
"""

from __future__ import annotations

import codecs
import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator
from urllib.parse import urlparse

from .warc import WarcCounters, iter_records

_META_CHARSET_RE = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?([A-Za-z0-9_\-]+)""", re.IGNORECASE
)
_HTML_TYPES = ("text/html", "application/xhtml")


class IngestError(ValueError):
    pass


@dataclass
class IngestCounters:
    records: int = 0
    pages: int = 0
    non_html: int = 0
    skipped: int = 0
    duplicates: int = 0
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class RawPage:
    url: str
    fetch_date: date
    content_type: str
    body: bytes
    charset: str

    def decode(self) -> str:
        return self.body.decode(self.charset, errors="replace")


def _supported(name: str | None) -> str | None:
    if not name:
        return None
    try:
        codecs.lookup(name)
    except LookupError:
        return None
    return name.lower()


def sniff_charset(body: bytes, declared: str | None = None) -> str:
    """Resolve the decoding charset: declared header, meta tag, else utf-8."""
    resolved = _supported(declared)
    if resolved:
        return resolved
    match = _META_CHARSET_RE.search(body[:4096])
    if match:
        resolved = _supported(match.group(1).decode("ascii", "ignore"))
        if resolved:
            return resolved
    return "utf-8"


def _charset_from_content_type(content_type: str) -> str | None:
    for part in content_type.split(";")[1:]:
        key, _, value = part.partition("=")
        if key.strip().lower() == "charset":
            return value.strip().strip("\"'") or None
    return None


def _parse_http_payload(payload: bytes) -> tuple[dict[str, str], bytes] | None:
    """Split an HTTP response payload into (headers, body)."""
    sep = payload.find(b"\r\n\r\n")
    if sep < 0:
        sep = payload.find(b"\n\n")
        if sep < 0:
            return None
        head, body = payload[:sep], payload[sep + 2 :]
    else:
        head, body = payload[:sep], payload[sep + 4 :]
    headers: dict[str, str] = {}
    for line in head.split(b"\n")[1:]:
        if b":" not in line:
            continue
        key, _, value = line.partition(b":")
        headers[key.strip().decode("latin-1").lower()] = value.strip().decode("latin-1")
    return headers, body


def _parse_warc_date(value: str) -> date:
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00")).date()
    except ValueError:
        return date(1970, 1, 1)


def _is_absolute(url: str) -> bool:
    parsed = urlparse(url)
    return bool(parsed.scheme and (parsed.netloc or parsed.path))


def iter_warc(stream: BinaryIO, counters: IngestCounters | None = None) -> Iterator[RawPage]:
    """Yield one RawPage per HTML response record in the archive.

    Malformed records are skipped and counted; truncation ends the stream
    with a diagnostic; non-WARC input raises WarcFormatError.
    """
    counters = counters if counters is not None else IngestCounters()
    warc_counters = WarcCounters()
    for record in iter_records(stream, warc_counters):
        counters.records = warc_counters.records
        if record.record_type != "response":
            counters.non_html += 1
            continue
        parsed = _parse_http_payload(record.payload)
        if parsed is None:
            counters.skipped += 1
            counters.diagnostics.append(f"unparseable HTTP payload at {record.target_uri}")
            continue
        http_headers, body = parsed
        content_type = http_headers.get("content-type", "")
        if not any(t in content_type.lower() for t in _HTML_TYPES):
            counters.non_html += 1
            continue
        url = record.target_uri
        if not url or not _is_absolute(url) or not body:
            counters.skipped += 1
            counters.diagnostics.append(f"rejected record (url={url!r}, body={len(body)}B)")
            continue
        charset = sniff_charset(body, _charset_from_content_type(content_type))
        counters.pages += 1
        yield RawPage(
            url=url,
            fetch_date=_parse_warc_date(record.date),
            content_type=content_type,
            body=body,
            charset=charset,
        )
    counters.records = warc_counters.records
    counters.skipped += warc_counters.skipped
    counters.diagnostics.extend(warc_counters.diagnostics)


def iter_dir(path: str | Path, counters: IngestCounters | None = None) -> Iterator[RawPage]:
    """Yield RawPages for `*.html` files in lexicographic order.

    An optional `meta.json` sidecar maps filename to url and date;
    unreadable files are skipped and counted.
    """
    counters = counters if counters is not None else IngestCounters()
    root = Path(path)
    meta: dict[str, dict] = {}
    sidecar = root / "meta.json"
    if sidecar.is_file():
        try:
            meta = json.loads(sidecar.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            counters.diagnostics.append(f"unreadable meta.json: {exc}")

    for file in sorted(root.glob("*.html"), key=lambda p: p.name):
        counters.records += 1
        try:
            body = file.read_bytes()
        except OSError as exc:
            counters.skipped += 1
            counters.diagnostics.append(f"unreadable file {file.name}: {exc}")
            continue
        info = meta.get(file.name, {})
        url = info.get("url", f"file://localhost/{file.name}")
        when = info.get("date")
        fetch = date.fromisoformat(when) if when else date(1970, 1, 1)
        counters.pages += 1
        yield RawPage(
            url=url,
            fetch_date=fetch,
            content_type="text/html",
            body=body,
            charset=sniff_charset(body),
        )


def dedupe_by_url(pages: Iterable[RawPage], counters: IngestCounters) -> Iterator[RawPage]:
    """Drop repeated URLs, first occurrence wins."""
    seen: set[str] = set()
    for page in pages:
        if page.url in seen:
            counters.duplicates += 1
            continue
        seen.add(page.url)
        yield page
