import json

import pytest
import requests

from kgforge import IngestError, RemoteFetchError, Triple, fetch_network, read_cx, read_ntriples, read_tsv, write_triples
from kgforge.ingest import SOURCE_FORMATS, read_triples


# --------------------------------------------------------------------------- TSV

def tsv(tmp_path, text):
    path = tmp_path / "data.tsv"
    path.write_text(text, encoding="utf-8")
    return path


def test_read_tsv_single_line(tmp_path):
    assert read_tsv(tsv(tmp_path, "A\tr\tB\n")) == [Triple("A", "r", "B")]


def test_read_tsv_comment_and_blank(tmp_path):
    triples = read_tsv(tsv(tmp_path, "# comment\n\nA\tr\tB\n"))
    assert triples == [Triple("A", "r", "B")]


def test_read_tsv_trims_fields(tmp_path):
    assert read_tsv(tsv(tmp_path, " A \tr\t B \n")) == [Triple("A", "r", "B")]


def test_read_tsv_field_count_error(tmp_path):
    with pytest.raises(IngestError, match="line 1: expected 3 fields, got 2"):
        read_tsv(tsv(tmp_path, "A\tr\n"))


def test_read_tsv_empty_field(tmp_path):
    with pytest.raises(IngestError, match="line 2: empty field"):
        read_tsv(tsv(tmp_path, "A\tr\tB\nA\t\tB\n"))


def test_tsv_round_trip(tmp_path):
    triples = [("A", "r", "B"), ("weird label", "rel:x", "B"), ("ü", "r", "émile")]
    path = tmp_path / "out.tsv"
    write_triples(path, triples)
    assert [tuple(t) for t in read_tsv(path)] == triples


def test_read_triples_dispatch_covers_all_formats(tmp_path):
    for fmt in SOURCE_FORMATS:
        with pytest.raises(Exception):
            read_triples(tmp_path / "missing.file", fmt)
    with pytest.raises(IngestError, match="unknown source format"):
        read_triples(tmp_path / "x", "xml")


# --------------------------------------------------------------------------- N-Triples

def nt(tmp_path, text):
    path = tmp_path / "data.nt"
    path.write_text(text, encoding="utf-8")
    return path


def test_ntriples_iri_statement(tmp_path):
    assert read_ntriples(nt(tmp_path, "<a> <r> <b> .\n")) == [Triple("a", "r", "b")]


def test_ntriples_typed_literal_preserved(tmp_path):
    triples = read_ntriples(nt(tmp_path, '<a> <r> "5"^^<int> .\n'))
    assert triples == [Triple("a", "r", '"5"^^<int>')]


def test_ntriples_language_literal_preserved(tmp_path):
    triples = read_ntriples(nt(tmp_path, '<a> <r> "hello"@en .\n'))
    assert triples == [Triple("a", "r", '"hello"@en')]


def test_ntriples_escaped_quote_inside_literal(tmp_path):
    triples = read_ntriples(nt(tmp_path, '<a> <r> "say \\"hi\\"" .\n'))
    assert triples[0].tail == '"say \\"hi\\""'


def test_ntriples_blank_nodes_kept_as_written(tmp_path):
    triples = read_ntriples(nt(tmp_path, "_:n1 <r> _:n2 .\n"))
    assert triples == [Triple("_:n1", "r", "_:n2")]


def test_ntriples_missing_terminator(tmp_path):
    with pytest.raises(IngestError, match="line 1: missing statement terminator"):
        read_ntriples(nt(tmp_path, "<a> <r> <b>\n"))


def test_ntriples_unbalanced_quotes(tmp_path):
    with pytest.raises(IngestError, match="line 2: unbalanced quotes"):
        read_ntriples(nt(tmp_path, '<a> <r> <b> .\n<a> <r> "oops .\n'))


def test_ntriples_unbalanced_brackets(tmp_path):
    with pytest.raises(IngestError, match="line 1: unbalanced angle brackets"):
        read_ntriples(nt(tmp_path, "<a> <r <b> .\n"))


def test_ntriples_literal_subject_rejected(tmp_path):
    with pytest.raises(IngestError, match="literal not allowed as subject"):
        read_ntriples(nt(tmp_path, '"x" <r> <b> .\n'))


def test_ntriples_comments_and_blanks(tmp_path):
    triples = read_ntriples(nt(tmp_path, "# header\n\n<a> <r> <b> .\n"))
    assert len(triples) == 1


# --------------------------------------------------------------------------- CX

def cx(tmp_path, document):
    path = tmp_path / "net.cx"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_cx_single_edge(tmp_path):
    doc = [{"nodes": [{"@id": 1, "n": "A"}, {"@id": 2, "n": "B"}]},
           {"edges": [{"@id": 9, "s": 1, "t": 2, "i": "partOf"}]}]
    assert read_cx(cx(tmp_path, doc)) == [Triple("A", "partOf", "B")]


def test_cx_default_relation(tmp_path):
    doc = [{"nodes": [{"@id": 1, "n": "A"}, {"@id": 2, "n": "B"}]},
           {"edges": [{"s": 1, "t": 2}]}]
    assert read_cx(cx(tmp_path, doc)) == [Triple("A", "interacts_with", "B")]


def test_cx_unnamed_node_label(tmp_path):
    doc = [{"nodes": [{"@id": 1}, {"@id": 2, "n": "B"}]},
           {"edges": [{"s": 1, "t": 2, "i": "x"}]}]
    assert read_cx(cx(tmp_path, doc)) == [Triple("node:1", "x", "B")]


def test_cx_unknown_node_reference(tmp_path):
    doc = [{"nodes": [{"@id": 1, "n": "A"}]}, {"edges": [{"s": 9, "t": 1}]}]
    with pytest.raises(IngestError, match="edge references unknown node 9"):
        read_cx(cx(tmp_path, doc))


def test_cx_malformed_json(tmp_path):
    path = tmp_path / "bad.cx"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(IngestError, match="malformed JSON"):
        read_cx(path)


def test_cx_fixture_file(tmp_path):
    triples = read_cx("tests/data/pathways.cx")
    assert Triple("Signaling Pathway Alpha", "isPartOf", "Core Metabolism") in triples
    assert len(triples) == 4


# --------------------------------------------------------------------------- remote fetch

class StubResponse:
    def __init__(self, status_code, content=b""):
        self.status_code = status_code
        self.content = content


class StubSession:
    """Replays recorded responses; never touches the network."""

    def __init__(self, response=None, exception=None):
        self.response = response
        self.exception = exception
        self.requests = []

    def get(self, url, timeout=None):
        self.requests.append((url, timeout))
        if self.exception is not None:
            raise self.exception
        return self.response


def test_fetch_network_replays_fixture():
    recorded = open("tests/data/pathways.cx", "rb").read()
    session = StubSession(StubResponse(200, recorded))
    payload = fetch_network("net-123", "https://commons.example/api", session=session)
    assert payload == recorded
    assert session.requests == [("https://commons.example/api/network/net-123", 30.0)]
    # the fetched document feeds straight into the CX reader
    from kgforge.ingest import cx_to_triples
    assert len(cx_to_triples(json.loads(payload))) == 4


def test_fetch_network_404():
    session = StubSession(StubResponse(404))
    with pytest.raises(RemoteFetchError, match="status 404") as excinfo:
        fetch_network("nope", "https://commons.example/api", session=session)
    assert excinfo.value.status == 404


def test_fetch_network_timeout_carries_cause():
    session = StubSession(exception=requests.Timeout("too slow"))
    with pytest.raises(RemoteFetchError, match="timed out after 30.0s"):
        fetch_network("x", "https://commons.example/api", session=session)


def test_fetch_network_custom_timeout_passed_through():
    session = StubSession(StubResponse(200, b"[]"))
    fetch_network("x", "https://commons.example/api/", timeout=5.0, session=session)
    assert session.requests == [("https://commons.example/api/network/x", 5.0)]


def test_fetch_network_connection_error():
    session = StubSession(exception=requests.ConnectionError("unreachable"))
    with pytest.raises(RemoteFetchError, match="failed"):
        fetch_network("x", "https://commons.example/api", session=session)
