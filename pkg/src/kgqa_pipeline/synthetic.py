"""Synthetic DBLP-style fixtures: records, canonical queries, gold answers.

Everything here is generated from the template grammar with schema
predicates from the default vocabulary, so generated queries always pass
validation and survive the mangle/repair roundtrip byte-exactly (query
text is lowercase except vocabulary-restorable URI fragments; string
literals avoid characters the detokenization model would damage).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .dataset import QuadRecord
from .sparql_client import ROW_JOIN, AnswerSet
from .stub_endpoint import bindings_response, boolean_response

SCHEMA_BASE = "https://dblp.org/rdf/schema#"
PID_BASE = "https://dblp.org/pid/"
REC_BASE = "https://dblp.org/rec/"

PREDICATES = [
    "authoredBy",
    "title",
    "yearOfPublication",
    "publishedIn",
    "numberOfCreators",
    "primaryAffiliation",
]

_WORDS = [
    "neural", "graph", "query", "semantic", "parsing", "entity", "linking",
    "symbolic", "retrieval", "scholarly", "knowledge", "answering",
]

QUERY_TYPES = ["SINGLE_FACT", "MULTI_FACT", "BOOLEAN", "RANKING"]


@dataclass(frozen=True)
class SyntheticCase:
    record: QuadRecord
    gold_answers: AnswerSet
    endpoint_payload: dict  # canned response for the stub endpoint


def _pid(rng: random.Random) -> str:
    return f"<{PID_BASE}{rng.randint(10, 99):02d}/{rng.randint(100, 99999)}>"


def _rec(rng: random.Random) -> str:
    venue = rng.choice(["conf", "journals"])
    key = "".join(rng.choices("abcdefghijklmnopqrstuvwxyz", k=4))
    return f"<{REC_BASE}{venue}/{key}/{key}{rng.randint(1990, 2023)}>"


def _pred(rng: random.Random) -> str:
    return f"<{SCHEMA_BASE}{rng.choice(PREDICATES)}>"


def _literal(rng: random.Random) -> str:
    return '"' + " ".join(rng.sample(_WORDS, rng.randint(1, 2))) + '"'


def generate_query(rng: random.Random, entities: list[str]) -> tuple[str, str]:
    """One grammar-canonical query using the given entity URIs.

    Returns (query, query_kind) where query_kind is "select" or "ask".
    """
    subject = entities[0] if entities else _pid(rng)
    shape = rng.randrange(6)
    if shape == 0:
        q = f"select distinct ?answer where {{ ?answer {_pred(rng)} {subject} }}"
    elif shape == 1:
        q = f"select distinct ?answer where {{ {subject} {_pred(rng)} ?answer }}"
    elif shape == 2:
        second = entities[1] if len(entities) > 1 else _pid(rng)
        q = (
            "select distinct ?firstanswer ?secondanswer where "
            f"{{ {subject} {_pred(rng)} ?firstanswer . {second} {_pred(rng)} ?secondanswer }}"
        )
    elif shape == 3:
        year = rng.randint(1990, 2023)
        # >= and <= split into two tokens under detokenization damage and
        # cannot be repaired unambiguously; canonical fixtures avoid them
        op = rng.choice(["<", ">", "="])
        q = (
            "select distinct ?answer where "
            f"{{ ?answer {_pred(rng)} {subject} . "
            f"?answer <{SCHEMA_BASE}yearOfPublication> ?y filter(?y {op} {year}) }}"
        )
    elif shape == 4:
        obj = rng.choice([_literal(rng), str(rng.randint(1990, 2023)), _pid(rng)])
        return f"ask {{ {subject} {_pred(rng)} {obj} }}", "ask"
    else:
        q = (
            f"select distinct ?answer where {{ ?answer {_pred(rng)} {subject} . "
            f"?answer <{SCHEMA_BASE}yearOfPublication> ?y }} order by desc(?y) limit "
            f"{rng.randint(1, 10)}"
        )
    return q, "select"


def generate_entity_list(rng: random.Random, size: Optional[int] = None) -> list[str]:
    if size is None:
        size = rng.randint(0, 4)
    return [_pid(rng) if rng.random() < 0.7 else _rec(rng) for _ in range(size)]


def _gold_for(rng: random.Random, query: str, kind: str) -> tuple[AnswerSet, dict]:
    if kind == "ask":
        truth = rng.random() < 0.5
        return (
            AnswerSet(kind="boolean", values=frozenset(), truth=truth),
            boolean_response(truth),
        )
    two_vars = "?firstanswer" in query
    var_names = ["firstanswer", "secondanswer"] if two_vars else ["answer"]
    rows = []
    for _ in range(rng.randint(1, 3)):
        row = []
        for _ in var_names:
            if rng.random() < 0.6:
                row.append(("uri", _rec(rng)[1:-1]))
            else:
                row.append(("literal", str(rng.randint(1990, 2023))))
        rows.append(row)
    payload = bindings_response(var_names, rows)
    values = set()
    for row in rows:
        cells = [f"<{v}>" if t == "uri" else v for t, v in row]
        values.add(ROW_JOIN.join(cells))
    return AnswerSet(kind="bindings", values=frozenset(values)), payload


def generate_case(rng: random.Random, index: int) -> SyntheticCase:
    entities = generate_entity_list(rng)
    query, kind = generate_query(rng, entities)
    answers, payload = _gold_for(rng, query, kind)
    noun = rng.choice(_WORDS)
    record = QuadRecord(
        id=f"Q{index:04d}",
        question=f"which {noun} {rng.choice(_WORDS)} is linked to item {index}?",
        paraphrased_question=f"item {index}: what {noun} does it relate to?",
        query=query,
        query_type="BOOLEAN" if kind == "ask" else rng.choice(QUERY_TYPES),
        template_id=f"T{rng.randint(1, 12):02d}",
        entities=tuple(entities),
        relations=(f"<{SCHEMA_BASE}{rng.choice(PREDICATES)}>",),
        temporal=rng.random() < 0.3,
        held_out=rng.random() < 0.1,
    )
    return SyntheticCase(record=record, gold_answers=answers, endpoint_payload=payload)


def generate_corpus(count: int, seed: int = 42) -> list[SyntheticCase]:
    rng = random.Random(seed)
    return [generate_case(rng, i) for i in range(count)]


def endpoint_table(cases: list[SyntheticCase]) -> dict[str, dict]:
    """query-string -> canned payload map for the stub endpoint."""
    return {c.record.query: c.endpoint_payload for c in cases}
