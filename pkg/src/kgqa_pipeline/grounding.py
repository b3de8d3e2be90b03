"""Input-side symbolic rule engine: context and target string assembly.

Contexts start with ``[CLS] `` and join their chunks with `` [SEP] ``.
The dev-phase pattern is query_type / template_id / query / entities;
the final-phase pattern is one chunk per entity-linker candidate.
Targets are ``query [SEP] entities``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .dataset import QuadRecord
from .errors import IncompleteRecord, InvalidEntityUri, NoCandidates, ReservedToken
from .uris import is_entity_uri

CLS = "[CLS]"
SEP = "[SEP]"
SEP_JOIN = f" {SEP} "

# fields that flow into dev-phase chunks, in pattern order
_DEV_FIELDS = ("query_type", "template_id", "query", "entities")


@dataclass(frozen=True)
class ContextString:
    text: str
    phase: str  # "dev" | "final"
    chunk_count: int


@dataclass(frozen=True)
class TargetString:
    text: str


@dataclass(frozen=True)
class EntityCandidate:
    uri: str
    score: Optional[float] = None
    label: Optional[str] = None

    def __post_init__(self):
        if not is_entity_uri(self.uri):
            raise InvalidEntityUri("candidate", self.uri)
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"candidate score {self.score} outside [0, 1]")


def _check_reserved(field: str, value: str) -> None:
    for token in (SEP, CLS):
        if token in value:
            raise ReservedToken(field, token)


def serialize_entities(entities: Sequence[str]) -> str:
    """Space-join entity URIs; [] serializes to the empty string."""
    for e in entities:
        if not is_entity_uri(e):
            raise InvalidEntityUri("entities", e)
    return " ".join(entities)


def build_dev_context(record: QuadRecord) -> ContextString:
    for name in _DEV_FIELDS:
        if getattr(record, name) is None:
            raise IncompleteRecord(name)
    chunks = [
        record.query_type,
        record.template_id,
        record.query,
        serialize_entities(record.entities),
    ]
    for name, chunk in zip(_DEV_FIELDS, chunks):
        _check_reserved(name, chunk)
    return ContextString(text=f"{CLS} " + SEP_JOIN.join(chunks), phase="dev", chunk_count=4)


def build_final_context(candidates: Sequence[EntityCandidate]) -> ContextString:
    if not candidates:
        raise NoCandidates()
    chunks = [c.uri for c in candidates]
    return ContextString(
        text=f"{CLS} " + SEP_JOIN.join(chunks), phase="final", chunk_count=len(chunks)
    )


def build_target(record: QuadRecord) -> TargetString:
    for name in ("query", "entities"):
        if getattr(record, name) is None:
            raise IncompleteRecord(name)
    entity_chunk = serialize_entities(record.entities)
    _check_reserved("query", record.query)
    _check_reserved("entities", entity_chunk)
    return TargetString(text=f"{record.query}{SEP_JOIN}{entity_chunk}")
