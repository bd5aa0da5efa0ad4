"""Knowledge-graph readers: TSV, an N-Triples subset, and CX documents.

All readers are deterministic and return triples in file order;
deduplication happens later, during indexing. RDF literals are kept as
entity labels in their full lexical form (quotes and any ``@lang`` or
``^^<datatype>`` suffix included) rather than dropped, so no statements
silently disappear.
"""

from __future__ import annotations

import json
import re

import requests

from kgforge.errors import IngestError, RemoteFetchError
from kgforge.graph import Triple

TSV = "tsv"
NTRIPLES = "ntriples"
CX = "cx"
SOURCE_FORMATS = (TSV, NTRIPLES, CX)

DEFAULT_RELATION = "interacts_with"  # CX edges may omit the interaction label
FETCH_TIMEOUT = 30.0

_BLANK_NODE = re.compile(r"_:[^\s]+")
_LANG_TAG = re.compile(r"@[A-Za-z][A-Za-z0-9-]*")


def read_triples(path, source_format: str) -> list[Triple]:
    """Dispatch to the reader for ``source_format``."""
    readers = {TSV: read_tsv, NTRIPLES: read_ntriples, CX: read_cx}
    if source_format not in readers:
        raise IngestError(f"unknown source format {source_format!r}, expected one of {SOURCE_FORMATS}")
    return readers[source_format](path)


def read_tsv(path) -> list[Triple]:
    """Three TAB-separated columns per line; '#' lines and blank lines skipped."""
    triples = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("\t")]
            if len(parts) != 3:
                raise IngestError(f"line {lineno}: expected 3 fields, got {len(parts)}")
            if any(not p for p in parts):
                raise IngestError(f"line {lineno}: empty field")
            triples.append(Triple(*parts))
    return triples


def read_ntriples(path) -> list[Triple]:
    """Line-oriented N-Triples subset: IRIs, blank nodes, single-line literals.

    IRIs lose their angle brackets; blank nodes and literals are kept as
    written. Not a full RDF parser: no prefixes, no multi-line literals.
    """
    triples = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                triples.append(_parse_ntriples_statement(line))
            except _StatementSyntaxError as exc:
                raise IngestError(f"line {lineno}: {exc}") from None
    return triples


class _StatementSyntaxError(Exception):
    pass


def _skip_spaces(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in " \t":
        pos += 1
    return pos


def _scan_term(line: str, pos: int) -> tuple[str, str, int]:
    """Scan one term; returns (kind, label, next position)."""
    pos = _skip_spaces(line, pos)
    if pos >= len(line):
        raise _StatementSyntaxError("unterminated statement")
    char = line[pos]
    if char == "<":
        end = line.find(">", pos + 1)
        if end == -1:
            raise _StatementSyntaxError("unbalanced angle brackets")
        return "iri", line[pos + 1:end], end + 1
    if line.startswith("_:", pos):
        match = _BLANK_NODE.match(line, pos)
        return "blank", match.group(0), match.end()
    if char == '"':
        i = pos + 1
        while i < len(line):
            if line[i] == "\\":
                i += 2
                continue
            if line[i] == '"':
                break
            i += 1
        else:
            raise _StatementSyntaxError("unbalanced quotes")
        end = i + 1
        if line.startswith("^^", end):
            if not line.startswith("<", end + 2):
                raise _StatementSyntaxError("datatype suffix must be an IRI")
            close = line.find(">", end + 2)
            if close == -1:
                raise _StatementSyntaxError("unbalanced angle brackets")
            end = close + 1
        elif line.startswith("@", end):
            match = _LANG_TAG.match(line, end)
            if match is None:
                raise _StatementSyntaxError("malformed language tag")
            end = match.end()
        return "literal", line[pos:end], end
    raise _StatementSyntaxError(f"expected IRI, blank node, or literal at column {pos + 1}")


def _parse_ntriples_statement(line: str) -> Triple:
    kind, subject, pos = _scan_term(line, 0)
    if kind == "literal":
        raise _StatementSyntaxError("literal not allowed as subject")
    kind, predicate, pos = _scan_term(line, pos)
    if kind != "iri":
        raise _StatementSyntaxError("predicate must be an IRI")
    _, obj, pos = _scan_term(line, pos)
    pos = _skip_spaces(line, pos)
    if pos >= len(line) or line[pos] != ".":
        raise _StatementSyntaxError("missing statement terminator")
    trailing = line[pos + 1:].strip()
    if trailing:
        raise _StatementSyntaxError(f"unexpected content after terminator: {trailing!r}")
    return Triple(subject, predicate, obj)


def read_cx(path) -> list[Triple]:
    """CX network-exchange document: ``nodes``/``edges`` aspects to triples.

    Every edge becomes (source node name, interaction, target node name).
    Unnamed nodes get the label ``node:<id>``; edges without an interaction
    get the relation label ``interacts_with``.
    """
    with open(path, "rb") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise IngestError(f"malformed JSON: {exc}") from None
    return cx_to_triples(document)


def cx_to_triples(document) -> list[Triple]:
    aspects = document if isinstance(document, list) else [document]
    nodes: dict = {}
    edges: list = []
    for aspect in aspects:
        if not isinstance(aspect, dict):
            continue
        for node in aspect.get("nodes", ()):
            node_id = node.get("@id", node.get("id"))
            if node_id is None:
                raise IngestError(f"node without an id: {node!r}")
            name = node.get("n", node.get("name"))
            nodes[node_id] = name if name else f"node:{node_id}"
        edges.extend(aspect.get("edges", ()))

    triples = []
    for edge in edges:
        source = edge.get("s", edge.get("source"))
        target = edge.get("t", edge.get("target"))
        if source is None or target is None:
            raise IngestError(f"edge without source/target: {edge!r}")
        for node_id in (source, target):
            if node_id not in nodes:
                raise IngestError(f"edge references unknown node {node_id}")
        interaction = edge.get("i", edge.get("interaction")) or DEFAULT_RELATION
        triples.append(Triple(nodes[source], interaction, nodes[target]))
    return triples


def fetch_network(network_id: str, endpoint: str, *, timeout: float = FETCH_TIMEOUT,
                  session=None) -> bytes:
    """HTTP GET of ``<endpoint>/network/<id>``; returns the raw CX bytes.

    Never retries. ``session`` is injectable so tests can replay recorded
    responses without touching the network.
    """
    url = f"{endpoint.rstrip('/')}/network/{network_id}"
    client = session if session is not None else requests
    try:
        response = client.get(url, timeout=timeout)
    except requests.Timeout as exc:
        raise RemoteFetchError(f"fetching {url} timed out after {timeout}s") from exc
    except requests.RequestException as exc:
        raise RemoteFetchError(f"fetching {url} failed: {exc}") from exc
    status = response.status_code
    if not 200 <= status < 300:
        raise RemoteFetchError(f"fetching {url} returned status {status}", status=status)
    return response.content
