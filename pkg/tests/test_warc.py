"""WARC reader tests over hand-assembled archives."""

import gzip
import io
import random
import tracemalloc

import pytest

from newsgauge.warc import WarcCounters, WarcFormatError, iter_records


def build_record(uri, payload, rtype="response", date="2023-05-01T12:00:00Z",
                 extra_headers=()):
    head = [
        b"WARC/1.0",
        b"WARC-Type: " + rtype.encode(),
        b"WARC-Target-URI: " + uri.encode(),
        b"WARC-Date: " + date.encode(),
        b"Content-Length: " + str(len(payload)).encode(),
    ]
    for line in extra_headers:
        head.append(line.encode())
    return b"\r\n".join(head) + b"\r\n\r\n" + payload + b"\r\n\r\n"


def build_archive(records, gzipped=False):
    if gzipped:
        return b"".join(gzip.compress(r) for r in records)
    return b"".join(records)


def _uris(data, counters=None):
    return [r.target_uri for r in iter_records(io.BytesIO(data), counters)]


THREE = [
    build_record("http://a.example/one", b"<html>first</html>"),
    build_record("meta:info", b"software: test", rtype="warcinfo"),
    build_record("http://b.example/two", b"<html>second</html>"),
]


def test_plain_archive_round_trip():
    counters = WarcCounters()
    records = list(iter_records(io.BytesIO(build_archive(THREE)), counters))
    assert [r.target_uri for r in records] == [
        "http://a.example/one", "meta:info", "http://b.example/two"]
    assert [r.record_type for r in records] == ["response", "warcinfo", "response"]
    assert records[0].payload == b"<html>first</html>"
    assert records[0].date == "2023-05-01T12:00:00Z"
    assert counters.records == 3
    assert counters.skipped == 0


def test_gzipped_archive_matches_plain():
    plain = list(iter_records(io.BytesIO(build_archive(THREE))))
    gz = list(iter_records(io.BytesIO(build_archive(THREE, gzipped=True))))
    assert [(r.headers, r.payload) for r in gz] == [(r.headers, r.payload) for r in plain]


def test_header_keys_lowercased_and_uri_brackets_stripped():
    rec = build_record("<http://c.example/x>", b"p")
    got = next(iter_records(io.BytesIO(rec)))
    assert got.target_uri == "http://c.example/x"
    assert "warc-type" in got.headers
    assert "WARC-Type" not in got.headers


def test_header_continuation_line_folded():
    rec = build_record("http://d.example/", b"p",
                       extra_headers=["X-Long: start", "\tcontinued value"])
    got = next(iter_records(io.BytesIO(rec)))
    assert got.headers["x-long"] == "start continued value"


def test_corrupt_gzip_member_skipped_neighbors_survive():
    members = [gzip.compress(r) for r in THREE]
    bad = bytearray(members[1])
    for i in range(20, 30):
        bad[i] ^= 0xFF
    data = members[0] + bytes(bad) + members[2]
    counters = WarcCounters()
    assert _uris(data, counters) == ["http://a.example/one", "http://b.example/two"]
    assert counters.corrupt_members == 1
    assert counters.skipped == 1
    assert counters.records == 2


def test_truncated_payload_diagnostic():
    data = build_archive(THREE)[:-40]  # cut into the final record's payload
    counters = WarcCounters()
    uris = _uris(data, counters)
    assert uris == ["http://a.example/one", "meta:info"]
    assert any("truncated" in d for d in counters.diagnostics)


def test_not_warc_raises():
    with pytest.raises(WarcFormatError, match="not a WARC archive"):
        list(iter_records(io.BytesIO(b"<html>just a page</html>")))


def test_gzipped_not_warc_raises():
    with pytest.raises(WarcFormatError):
        list(iter_records(io.BytesIO(gzip.compress(b"random text payload"))))


def test_empty_stream_yields_nothing():
    counters = WarcCounters()
    assert _uris(b"", counters) == []
    assert counters.records == 0


def test_record_without_content_length_skipped():
    broken = (b"WARC/1.0\r\nWARC-Type: response\r\n"
              b"WARC-Target-URI: http://x.example/\r\n\r\n")
    data = broken + THREE[0]
    counters = WarcCounters()
    assert _uris(data, counters) == ["http://a.example/one"]
    assert counters.skipped == 1
    assert any("Content-Length" in d for d in counters.diagnostics)


def test_garbage_between_records_resyncs():
    data = THREE[0] + b"#### stray bytes not a header ####\r\n" + THREE[2]
    counters = WarcCounters()
    assert _uris(data, counters) == ["http://a.example/one", "http://b.example/two"]
    assert counters.skipped >= 1


@pytest.mark.parametrize("gzipped", [False, True])
def test_concatenation_property(gzipped):
    rng = random.Random(99)
    recs_a = [build_record(f"http://s.example/a{i}",
                           bytes(rng.randrange(256) for _ in range(rng.randrange(5, 80))))
              for i in range(6)]
    recs_b = [build_record(f"http://s.example/b{i}", b"x" * rng.randrange(1, 50))
              for i in range(4)]
    joined = _uris(build_archive(recs_a + recs_b, gzipped=gzipped))
    parts = (_uris(build_archive(recs_a, gzipped=gzipped))
             + _uris(build_archive(recs_b, gzipped=gzipped)))
    assert joined == parts


def test_large_archive_streams_with_bounded_memory():
    payload = b"<html>" + b"a" * 600 + b"</html>"
    data = build_archive([
        build_record(f"http://m.example/{i}", payload) for i in range(10_000)
    ])
    stream = io.BytesIO(data)
    tracemalloc.start()
    count = 0
    for rec in iter_records(stream):
        count += 1
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert count == 10_000
    # the archive is ~6.5 MB; streaming must stay far below holding it twice
    assert peak < 2_000_000
