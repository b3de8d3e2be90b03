"""Output-side symbolic rule engine.

Splits raw model output on the first ``[SEP]``, then repairs the query
chunk into a canonical SPARQL string and the entity chunk into a clean
URI list. Repair rules for the query chunk, applied in this fixed order:

    R1  reassemble <...> regions whose de-spaced body is a URI
    R2  re-attach ``?`` variable markers to their identifiers
    R3  restore casing of URI fragments found in the schema vocabulary
    R4  normalize brace and triple-separator spacing
    R5  collapse whitespace runs

Text inside double-quoted string literals is never modified. Nothing here
throws on arbitrary input; callers get best-effort output plus validity
flags and the list of rules that fired.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .errors import MissingSeparator
from .grammar import validate_query
from .uris import ENTITY_URI_RE, URI_BODY_RE

SEP = "[SEP]"
CLS = "[CLS]"

_LITERAL_RE = re.compile(r'"[^"]*"')
_URI_TOKEN_RE = re.compile(r"<[^\s<>]+>")
# "? name" with a gap, including forms glued to the previous token
_VAR_GAP_RE = re.compile(r"\?\s+([A-Za-z_][A-Za-z0-9_]*)")
# a ?var glued onto any preceding character except "(" (function/filter call
# sites like desc(?x) are legitimately glued)
_VAR_GLUED_RE = re.compile(r"(?<=[^\s(])(?=\?[A-Za-z_])")
# a separator dot glued onto the preceding term; the ^ alternative catches
# dots left at a segment boundary after a frozen string literal
_GLUED_DOT_RE = re.compile(r"(?:(?<=[\w>)])|^)\.(?=\s|$)")


@dataclass(frozen=True)
class SanitizedPrediction:
    query: str
    entities: tuple[str, ...]
    repairs_applied: tuple[str, ...]
    valid_query: bool
    valid_entities: bool
    degraded: bool = False  # [SEP] was missing in the raw output


class SchemaVocabulary:
    """Case-sensitive schema local names plus a lowercase lookup index.

    The index must be injective: two terms that collide after lowercasing
    would make case restoration ambiguous.
    """

    def __init__(self, terms: Iterable[str]):
        self.terms = frozenset(terms)
        index: dict[str, str] = {}
        for term in sorted(self.terms):
            low = term.lower()
            if low in index:
                raise ValueError(f"vocabulary terms {index[low]!r} and {term!r} collide")
            index[low] = term
        self.lowercase_index = index

    @classmethod
    def from_file(cls, path: str | Path) -> "SchemaVocabulary":
        terms = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                terms.append(line)
        return cls(terms)

    @classmethod
    def default(cls) -> "SchemaVocabulary":
        text = resources.files("kgqa_pipeline.data").joinpath("dblp_vocabulary.txt").read_text(
            encoding="utf-8"
        )
        terms = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                terms.append(line)
        return cls(terms)

    def restore(self, fragment: str) -> Optional[str]:
        return self.lowercase_index.get(fragment.lower())


def split_output(raw_text: str) -> tuple[str, str]:
    """Split on the FIRST [SEP]; trim both chunks; drop a leading [CLS]."""
    if SEP not in raw_text:
        raise MissingSeparator(raw_text[:80])
    query_chunk, entity_chunk = raw_text.split(SEP, 1)
    query_chunk = query_chunk.strip()
    if query_chunk.startswith(CLS):
        query_chunk = query_chunk[len(CLS):].strip()
    return query_chunk, entity_chunk.strip()


def _segment_literals(text: str) -> list[tuple[str, str]]:
    """Break text into ("text"|"lit", chunk) pieces; literals stay frozen."""
    segments = []
    pos = 0
    for m in _LITERAL_RE.finditer(text):
        if m.start() > pos:
            segments.append(("text", text[pos : m.start()]))
        segments.append(("lit", m.group(0)))
        pos = m.end()
    if pos < len(text):
        segments.append(("text", text[pos:]))
    return segments


def _map_text_segments(segments, fn) -> tuple[list[tuple[str, str]], bool]:
    out = []
    changed = False
    for kind, chunk in segments:
        if kind == "text":
            repaired = fn(chunk)
            changed = changed or repaired != chunk
            out.append((kind, repaired))
        else:
            out.append((kind, chunk))
    return out, changed


def _reassemble_uris(chunk: str, notes: list[str]) -> str:
    """R1 body: de-space each <...> region whose content then parses as a URI.

    Regions that do not look like URIs (e.g. numeric comparisons in a
    filter) are left untouched. An unmatched '<' is recorded, never fatal.
    """
    out = []
    pos = 0
    while True:
        lt = chunk.find("<", pos)
        if lt < 0:
            out.append(chunk[pos:])
            break
        gt = chunk.find(">", lt + 1)
        if gt < 0:
            notes.append(f"E-unbalanced:{lt}")
            out.append(chunk[pos:])
            break
        body = re.sub(r"\s+", "", chunk[lt + 1 : gt])
        if URI_BODY_RE.match(body):
            out.append(chunk[pos:lt])
            out.append(f"<{body}>")
            # detokenization glues . ? , straight onto the closing bracket;
            # give the URI back its right-hand boundary
            if gt + 1 < len(chunk) and chunk[gt + 1] in ".?,":
                out.append(" ")
            pos = gt + 1
        else:
            out.append(chunk[pos : lt + 1])
            pos = lt + 1
    return "".join(out)


def _outside_uris(chunk: str, fn) -> str:
    """Apply fn to the pieces of chunk that are not <...> tokens."""
    parts = _URI_TOKEN_RE.split(chunk)
    uris = _URI_TOKEN_RE.findall(chunk)
    repaired = [fn(p) for p in parts]
    merged = [repaired[0]]
    for uri, part in zip(uris, repaired[1:]):
        merged.append(uri)
        merged.append(part)
    return "".join(merged)


def _fix_variables(chunk: str) -> str:
    chunk = _VAR_GAP_RE.sub(r"?\1", chunk)
    return _VAR_GLUED_RE.sub(" ", chunk)


def _fix_spacing(chunk: str) -> str:
    chunk = re.sub(r"\{\s*", "{ ", chunk)
    chunk = re.sub(r"\s*\}", " }", chunk)
    return _GLUED_DOT_RE.sub(" .", chunk)


def sanitize_query(chunk: str, vocab: Optional[SchemaVocabulary] = None) -> tuple[str, list[str]]:
    """Repair a (possibly mangled) query chunk.

    Returns the repaired string and the ordered rule ids that changed it,
    plus ``E-unbalanced:<offset>`` notes for unmatched '<'.
    """
    vocab = vocab or SchemaVocabulary.default()
    repairs: list[str] = []
    notes: list[str] = []
    segments = _segment_literals(chunk)

    segments, changed = _map_text_segments(segments, lambda s: _reassemble_uris(s, notes))
    if changed:
        repairs.append("R1")

    segments, changed = _map_text_segments(
        segments, lambda s: _outside_uris(s, _fix_variables)
    )
    if changed:
        repairs.append("R2")

    def restore_case(s: str) -> str:
        def sub(m: re.Match) -> str:
            body = m.group(0)[1:-1]
            if "#" in body:
                head, frag = body.rsplit("#", 1)
                hit = vocab.restore(frag)
                if hit is not None and hit != frag:
                    return f"<{head}#{hit}>"
            elif "/" in body:
                head, last = body.rsplit("/", 1)
                hit = vocab.restore(last)
                if hit is not None and hit != last:
                    return f"<{head}/{hit}>"
            return m.group(0)

        return _URI_TOKEN_RE.sub(sub, s)

    segments, changed = _map_text_segments(segments, restore_case)
    if changed:
        repairs.append("R3")

    segments, changed = _map_text_segments(
        segments, lambda s: _outside_uris(s, _fix_spacing)
    )
    if changed:
        repairs.append("R4")

    def collapse(s: str) -> str:
        return re.sub(r"\s+", " ", s)

    pre_collapse = "".join(piece for _, piece in segments)
    segments, changed = _map_text_segments(segments, collapse)
    result = "".join(piece for _, piece in segments).strip()
    if changed or result != pre_collapse:
        repairs.append("R5")
    return result, repairs + notes


def _sanitize_entities_impl(chunk: str) -> tuple[list[str], list[str]]:
    repairs: list[str] = []
    text = chunk.replace(SEP, " ")

    # strip list-literal punctuation, but only outside angle brackets
    stripped = []
    in_uri = False
    for ch in text:
        if ch == "<":
            in_uri = True
        elif ch == ">":
            in_uri = False
        if not in_uri and ch in "[]'\",":
            stripped.append(" ")
            continue
        stripped.append(ch)
    text = "".join(stripped)
    if text != chunk.replace(SEP, " "):
        repairs.append("E2")

    uris: list[str] = []
    pos = 0
    reassembled = False
    while pos < len(text):
        lt = text.find("<", pos)
        if lt < 0:
            repairs.extend("E-drop" for _ in text[pos:].split())
            break
        repairs.extend("E-drop" for _ in text[pos:lt].split())
        gt = text.find(">", lt + 1)
        if gt < 0:
            repairs.append("E-drop")  # dangling '<...' fragment
            break
        region = text[lt : gt + 1]
        candidate = "<" + re.sub(r"\s+", "", region[1:-1]) + ">"
        if ENTITY_URI_RE.match(candidate):
            uris.append(candidate)
            if candidate != region:
                reassembled = True
        else:
            repairs.append("E-drop")
        pos = gt + 1
    if reassembled:
        repairs.insert(0, "E1")
    return uris, repairs


def sanitize_entities(chunk: str) -> list[str]:
    """Extract a clean entity-URI list from an arbitrary entity chunk.

    Accepts space-joined URIs, Python-style list literals, and mangled
    variants of both; order and duplicates are preserved.
    """
    uris, _ = _sanitize_entities_impl(chunk)
    return uris


def sanitize_prediction(
    raw_text: str, vocab: Optional[SchemaVocabulary] = None
) -> SanitizedPrediction:
    """Full output-side pass: split, repair both chunks, validate."""
    degraded = False
    try:
        query_chunk, entity_chunk = split_output(raw_text)
    except MissingSeparator:
        degraded = True
        query_chunk, entity_chunk = raw_text.strip(), ""
        if query_chunk.startswith(CLS):
            query_chunk = query_chunk[len(CLS):].strip()

    query, query_repairs = sanitize_query(query_chunk, vocab)
    entities, entity_repairs = _sanitize_entities_impl(entity_chunk)
    return SanitizedPrediction(
        query=query,
        entities=tuple(entities),
        repairs_applied=tuple(query_repairs + entity_repairs),
        valid_query=validate_query(query),
        valid_entities=not degraded and "E-drop" not in entity_repairs,
        degraded=degraded,
    )
