"""Loading and validation of DBLP-QuAD-format question/SPARQL records.

A record file is UTF-8 JSON: either a top-level array of record objects or
an object ``{"questions": [...]}``. Question fields may be plain strings or
``{"string": ...}`` wrappers (the published dataset uses the latter); both
are normalized to plain text.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional

from .errors import DuplicateId, InvalidEntityUri, MalformedRecord, MissingParaphrase
from .uris import is_entity_uri

logger = logging.getLogger(__name__)

# canonical key order for (re-)serialization
RECORD_FIELDS = (
    "id",
    "question",
    "paraphrased_question",
    "query",
    "query_type",
    "template_id",
    "entities",
    "relations",
    "temporal",
    "held_out",
)

CANONICAL_SPLIT_SIZES = {"train": 7000, "valid": 1000, "test": 2000}


@dataclass(frozen=True)
class QuadRecord:
    """One question-SPARQL pair. In questions_only mode every field other
    than id/question/paraphrased_question may be None (explicit absence)."""

    id: str
    question: str
    paraphrased_question: Optional[str]
    query: Optional[str] = None
    query_type: Optional[str] = None
    template_id: Optional[str] = None
    entities: Optional[tuple[str, ...]] = None
    relations: Optional[tuple[str, ...]] = None
    temporal: Optional[bool] = None
    held_out: Optional[bool] = None

    @property
    def is_full(self) -> bool:
        return all(getattr(self, f.name) is not None for f in fields(self))


@dataclass(frozen=True)
class QAInstance:
    """One phrasing of a record's question; two exist per full record."""

    instance_id: str
    question: str
    source: QuadRecord


@dataclass(frozen=True)
class SplitManifest:
    train: int
    valid: int
    test: int

    @property
    def is_canonical(self) -> bool:
        return (self.train, self.valid, self.test) == (7000, 1000, 2000)


def _as_text(value, index: int, key: str) -> str:
    """Accept both plain strings and {"string": ...} wrappers."""
    if isinstance(value, dict) and isinstance(value.get("string"), str):
        return value["string"]
    if isinstance(value, str):
        return value
    raise MalformedRecord(index, key, f"expected string, got {type(value).__name__}")


def _as_bool(value, index: int, key: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "false"):
        return value.lower() == "true"
    raise MalformedRecord(index, key, f"expected boolean, got {value!r}")


def _as_uri_list(value, index: int, key: str, record_id: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise MalformedRecord(index, key, "expected array of strings")
    for v in value:
        if not is_entity_uri(v):
            raise InvalidEntityUri(record_id, v)
    return tuple(value)


def _parse_record(obj, index: int, mode: str) -> QuadRecord:
    if not isinstance(obj, dict):
        raise MalformedRecord(index, "<record>", "not an object")

    def need(key):
        if key not in obj or obj[key] is None:
            raise MalformedRecord(index, key)
        return obj[key]

    rid = need("id")
    if not isinstance(rid, str) or not rid:
        raise MalformedRecord(index, "id", "must be a non-empty string")
    question = _as_text(need("question"), index, "question")

    paraphrase = None
    if obj.get("paraphrased_question") is not None:
        paraphrase = _as_text(obj["paraphrased_question"], index, "paraphrased_question")

    if mode == "questions_only":
        kwargs = {}
        if obj.get("query") is not None:
            q = _as_text(obj["query"], index, "query")
            kwargs["query"] = q
        return QuadRecord(id=rid, question=question, paraphrased_question=paraphrase, **kwargs)

    if mode != "full":
        raise ValueError(f"unknown load mode {mode!r}")
    if paraphrase is None:
        raise MalformedRecord(index, "paraphrased_question")

    query = _as_text(need("query"), index, "query")
    if not query:
        raise MalformedRecord(index, "query", "must be non-empty")
    return QuadRecord(
        id=rid,
        question=question,
        paraphrased_question=paraphrase,
        query=query,
        query_type=_as_text(need("query_type"), index, "query_type"),
        template_id=_as_text(need("template_id"), index, "template_id"),
        entities=_as_uri_list(need("entities"), index, "entities", rid),
        relations=_as_uri_list(need("relations"), index, "relations", rid),
        temporal=_as_bool(need("temporal"), index, "temporal"),
        held_out=_as_bool(need("held_out"), index, "held_out"),
    )


def load_quad_records(path: str | Path, mode: str = "full") -> list[QuadRecord]:
    """Load a record file in file order.

    mode="full" requires all ten fields and enforces the record invariants;
    mode="questions_only" accepts final-phase files that carry only the
    question and its paraphrase (absent fields stay None).
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, dict) and isinstance(raw.get("questions"), list):
        raw = raw["questions"]
    if not isinstance(raw, list):
        raise MalformedRecord(0, "<file>", "expected an array or {'questions': [...]}")

    records = []
    seen: set[str] = set()
    for i, obj in enumerate(raw):
        rec = _parse_record(obj, i, mode)
        if rec.id in seen:
            raise DuplicateId(rec.id)
        seen.add(rec.id)
        records.append(rec)
    return records


def record_to_dict(record: QuadRecord) -> dict:
    """Canonical serialization, keys in the documented order."""
    out = {}
    for key in RECORD_FIELDS:
        value = getattr(record, key)
        if value is None:
            continue
        if isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def dump_quad_records(records: Iterable[QuadRecord], path: str | Path) -> None:
    data = [record_to_dict(r) for r in records]
    Path(path).write_text(json.dumps(data, indent=2, ensure_ascii=False), encoding="utf-8")


def expand_paraphrases(records: list[QuadRecord]) -> list[QAInstance]:
    """Double every record into two instances: {id}#q then {id}#p."""
    instances = []
    for rec in records:
        if rec.paraphrased_question is None:
            raise MissingParaphrase(rec.id)
        instances.append(QAInstance(f"{rec.id}#q", rec.question, rec))
        instances.append(QAInstance(f"{rec.id}#p", rec.paraphrased_question, rec))
    return instances


def check_split_sizes(manifest: SplitManifest) -> None:
    """Warn (never fail) when counts differ from the canonical 7000/1000/2000."""
    if not manifest.is_canonical:
        logger.warning(
            "split sizes %s/%s/%s differ from the canonical 7000/1000/2000",
            manifest.train,
            manifest.valid,
            manifest.test,
        )
