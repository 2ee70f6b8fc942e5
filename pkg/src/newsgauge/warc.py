"""Streaming WARC/1.0 reader.

Reads response records out of plain or per-record-gzipped archives in a
single pass: one record is materialized at a time. Malformed records and
corrupt gzip members are skipped and counted rather than aborting the
stream; only input that is not WARC at all raises.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator

_GZIP_MAGIC = b"\x1f\x8b\x08"
_CHUNK = 1 << 16


class WarcFormatError(ValueError):
    """Input does not look like a WARC archive."""


@dataclass
class WarcCounters:
    records: int = 0
    skipped: int = 0
    corrupt_members: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def note(self, message: str) -> None:
        self.diagnostics.append(message)


@dataclass
class WarcRecord:
    headers: dict[str, str]
    payload: bytes

    @property
    def record_type(self) -> str:
        return self.headers.get("warc-type", "")

    @property
    def target_uri(self) -> str:
        # Some writers wrap the URI in angle brackets.
        return self.headers.get("warc-target-uri", "").strip("<>")

    @property
    def date(self) -> str:
        return self.headers.get("warc-date", "")


class _Buffered:
    """Minimal buffered readline/read over any object with .read(n)."""

    def __init__(self, raw: BinaryIO):
        self._raw = raw
        self._buf = b""

    def _fill(self) -> bool:
        chunk = self._raw.read(_CHUNK)
        if not chunk:
            return False
        self._buf += chunk
        return True

    def readline(self) -> bytes:
        while b"\n" not in self._buf:
            if not self._fill():
                line, self._buf = self._buf, b""
                return line
        idx = self._buf.index(b"\n") + 1
        line, self._buf = self._buf[:idx], self._buf[idx:]
        return line

    def read(self, n: int) -> bytes:
        while len(self._buf) < n:
            if not self._fill():
                break
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def peek(self, n: int) -> bytes:
        while len(self._buf) < n:
            if not self._fill():
                break
        return self._buf[:n]


def _parse_records(reader: _Buffered, counters: WarcCounters, first: bool) -> Iterator[WarcRecord]:
    """Parse consecutive records; resync on damage by scanning for WARC/."""
    expect_start = first
    while True:
        line = reader.readline()
        while line in (b"\r\n", b"\n"):
            line = reader.readline()
        if not line:
            return
        if not line.startswith(b"WARC/"):
            if expect_start:
                raise WarcFormatError(f"not a WARC archive (starts with {line[:16]!r})")
            # Damaged header block: skip lines until the next record marker.
            counters.skipped += 1
            counters.note("malformed record header, resyncing")
            while line and not line.startswith(b"WARC/"):
                line = reader.readline()
            if not line:
                return
        expect_start = False

        headers: dict[str, str] = {}
        last_key = None
        bad = False
        while True:
            line = reader.readline()
            if line in (b"\r\n", b"\n"):
                break
            if not line:
                counters.note("truncated archive: EOF inside record headers")
                return
            if line[:1] in (b" ", b"\t") and last_key:
                headers[last_key] += " " + line.strip().decode("latin-1")
                continue
            if b":" not in line:
                bad = True
                continue
            key, _, value = line.partition(b":")
            last_key = key.strip().decode("latin-1").lower()
            headers[last_key] = value.strip().decode("latin-1")

        try:
            length = int(headers["content-length"])
        except (KeyError, ValueError):
            counters.skipped += 1
            counters.note("record without a usable Content-Length")
            continue
        payload = reader.read(length)
        if len(payload) < length:
            counters.note(
                f"truncated archive: wanted {length} payload bytes, got {len(payload)}"
            )
            return
        if bad:
            counters.skipped += 1
            counters.note("record with malformed header line")
            continue
        counters.records += 1
        yield WarcRecord(headers, payload)


def _gzip_members(raw: BinaryIO, counters: WarcCounters) -> Iterator[bytes]:
    """Decompress gzip members one at a time, skipping corrupt ones.

    After a corrupt member the stream is resynced at the next gzip magic,
    which matches the per-record-member layout used by crawl archives.
    """
    buf = b""
    eof = False
    while True:
        if not buf and not eof:
            chunk = raw.read(_CHUNK)
            if chunk:
                buf += chunk
            else:
                eof = True
        if not buf and eof:
            return

        decomp = zlib.decompressobj(wbits=31)
        out = bytearray()
        try:
            while True:
                out += decomp.decompress(buf)
                buf = b""
                if decomp.eof:
                    buf = decomp.unused_data
                    break
                chunk = raw.read(_CHUNK)
                if not chunk:
                    eof = True
                    if not decomp.eof:
                        counters.note("truncated archive: EOF inside gzip member")
                        if out:
                            yield bytes(out)
                        return
                    break
                buf = chunk
        except zlib.error:
            counters.corrupt_members += 1
            counters.skipped += 1
            counters.note("corrupt gzip member skipped")
            # Search already-read bytes (and more if needed) for the next member.
            while True:
                idx = buf.find(_GZIP_MAGIC, 1 if buf[:3] == _GZIP_MAGIC else 0)
                if idx >= 0:
                    buf = buf[idx:]
                    break
                keep = buf[-2:]
                chunk = raw.read(_CHUNK)
                if not chunk:
                    return
                buf = keep + chunk
            continue
        yield bytes(out)


class _MemberStream:
    """Expose a member iterator as a continuous read(n) byte stream."""

    def __init__(self, members: Iterator[bytes]):
        self._members = members
        self._current = b""
        self._pos = 0

    def read(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            if self._pos >= len(self._current):
                nxt = next(self._members, None)
                if nxt is None:
                    break
                self._current = nxt
                self._pos = 0
                continue
            take = min(n - len(out), len(self._current) - self._pos)
            out += self._current[self._pos : self._pos + take]
            self._pos += take
        return bytes(out)


def iter_records(stream: BinaryIO, counters: WarcCounters | None = None) -> Iterator[WarcRecord]:
    """Yield WARC records from a plain or gzipped archive stream.

    Raises WarcFormatError for input that is neither WARC nor gzip;
    everything else degrades to skip counts and diagnostics.
    """
    counters = counters if counters is not None else WarcCounters()
    reader = _Buffered(stream)
    head = reader.peek(3)
    if head[:3] == _GZIP_MAGIC:
        # peek() leaves bytes in place, so the member decompressor can read
        # straight through the same buffer.
        member_reader = _Buffered(_MemberStream(_gzip_members(reader, counters)))
        yield from _parse_records(member_reader, counters, first=True)
    else:
        yield from _parse_records(reader, counters, first=True)
