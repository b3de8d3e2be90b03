import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgqa_pipeline.backends import simulate_mangle
from kgqa_pipeline.errors import MissingSeparator
from kgqa_pipeline.grammar import diagnose_query, validate_query
from kgqa_pipeline.sanitizer import (
    SchemaVocabulary,
    sanitize_entities,
    sanitize_prediction,
    sanitize_query,
    split_output,
)
from kgqa_pipeline.synthetic import generate_entity_list, generate_query
from kgqa_pipeline.grounding import serialize_entities

from conftest import (
    CANONICAL_ENTITY,
    CANONICAL_QUERY,
    MANGLED_ENTITY_LIST,
    MANGLED_QUERY,
)


# --- split_output ---

def test_split_direct():
    assert split_output("Q [SEP] E") == ("Q", "E")


def test_split_missing_separator():
    with pytest.raises(MissingSeparator):
        split_output("Q")


def test_split_strips_leading_cls():
    assert split_output("[CLS] Q [SEP] E") == ("Q", "E")


def test_split_first_separator_wins():
    query_chunk, entity_chunk = split_output("Q [SEP] <a://b> [SEP] <a://c>")
    assert query_chunk == "Q"
    assert entity_chunk == "<a://b> [SEP] <a://c>"
    assert sanitize_entities(entity_chunk) == ["<a://b>", "<a://c>"]


# --- sanitize_query ---

def test_worked_example_byte_exact(vocab):
    repaired, repairs = sanitize_query(MANGLED_QUERY, vocab)
    assert repaired == CANONICAL_QUERY
    assert repairs == ["R1", "R2", "R3"]


def test_canonical_query_is_fixed_point(vocab):
    repaired, repairs = sanitize_query(CANONICAL_QUERY, vocab)
    assert repaired == CANONICAL_QUERY
    assert repairs == []


def test_ask_repair_derived(vocab):
    canonical = (
        "ask { <https://dblp.org/pid/x> "
        "<https://dblp.org/rdf/schema#yearOfPublication> ?y }"
    )
    mangled = (
        "ask { < https : / / dblp. org / pid / x > "
        "< https : / / dblp. org / rdf / schema # yearofpublication > ? y }"
    )
    assert sanitize_query(mangled, vocab)[0] == canonical
    assert sanitize_query(simulate_mangle(canonical), vocab)[0] == canonical


def test_case_restoration_is_vocabulary_bounded(vocab):
    # fragment not in the vocabulary passes through unchanged
    q = "ask { <https://dblp.org/pid/x> <https://dblp.org/rdf/schema#unknownterm> ?y }"
    assert sanitize_query(simulate_mangle(q), vocab)[0] == q


def test_unbalanced_brackets_recorded_not_fatal(vocab):
    repaired, repairs = sanitize_query("select ?x where { ?x < https : / ", vocab)
    assert any(r.startswith("E-unbalanced:") for r in repairs)
    assert "select ?x where" in repaired


def test_string_literals_never_altered(vocab):
    q = 'select ?x where { ?x <https://dblp.org/rdf/schema#title> "a / b : c  d" }'
    repaired, _ = sanitize_query(q, vocab)
    assert '"a / b : c  d"' in repaired


@given(st.text(max_size=200))
@settings(max_examples=200, deadline=None)
def test_sanitize_query_idempotent(text):
    vocab = SchemaVocabulary.default()
    once, _ = sanitize_query(text, vocab)
    twice, _ = sanitize_query(once, vocab)
    assert twice == once


@given(st.text(max_size=200))
@settings(max_examples=200, deadline=None)
def test_sanitize_query_total(text):
    sanitize_query(text, SchemaVocabulary.default())  # must never raise


# --- sanitize_entities ---

def test_entity_list_literal_worked_example():
    assert sanitize_entities(MANGLED_ENTITY_LIST) == [CANONICAL_ENTITY]


def test_entities_empty_chunk():
    assert sanitize_entities("") == []


def test_entities_space_joined_inverse():
    assert sanitize_entities("<a://b> <a://c>") == ["<a://b>", "<a://c>"]


def test_entities_drop_unparseable_fragments():
    assert sanitize_entities("junk <a://b> <not-a-uri> trailing") == ["<a://b>"]


def test_entities_duplicates_and_order_preserved():
    chunk = "<a://b> <a://c> <a://b>"
    assert sanitize_entities(chunk) == ["<a://b>", "<a://c>", "<a://b>"]


@given(st.text(max_size=200))
@settings(max_examples=200, deadline=None)
def test_sanitize_entities_idempotent_and_total(text):
    once = sanitize_entities(text)
    again = sanitize_entities(" ".join(once))
    assert again == once


# --- validate_query ---

def test_validate_worked_example():
    assert validate_query(CANONICAL_QUERY)


def test_validate_empty_is_false():
    assert not validate_query("")


def test_validate_unclosed_brace():
    assert not validate_query("select ?x where { ?x")


@pytest.mark.parametrize(
    "query,ok",
    [
        ("ask { <a://b> <a://p> ?y }", True),
        ("ASK WHERE { <a://b> <a://p> 5 }", True),
        ("select ?x ?y where { ?x <a://p> ?y }", True),
        ('select ?x where { ?x <a://p> "lit" . ?x <a://q> 7 }', True),
        ("select distinct ?x where { ?x <a://p> ?y filter(?y > 3) } limit 4", True),
        ("select distinct ?x where { ?x <a://p> ?y } group by ?x order by desc(?y)", True),
        ("select where { ?x <a://p> ?y }", False),  # no projection variable
        ("select ?x { ?x <a://p> }", False),  # two-term triple
        ("describe <a://b>", False),  # unsupported form
        ("select ?x where { ?x <a://p> ?y } junk", False),
        ("select ?x where { ?x <bad uri> ?y }", False),
    ],
)
def test_validate_template_shapes(query, ok):
    assert validate_query(query) is ok


def test_diagnostics_reports_position():
    diag = diagnose_query("select ?x where { ?x")
    assert not diag.valid
    assert diag.position == len("select ?x where { ?x")
    diag2 = diagnose_query("frobnicate ?x")
    assert diag2.position == 0


# --- keystone roundtrip (the full property is acceptance criterion 3) ---

def test_grammar_roundtrip_sample(vocab):
    rng = random.Random(1234)
    for i in range(100):
        entities = generate_entity_list(rng)
        query, _ = generate_query(rng, entities)
        repaired, _ = sanitize_query(simulate_mangle(query), vocab)
        assert repaired == query, f"case {i}: {query!r}"
        assert validate_query(repaired)


def test_entity_roundtrip_sample():
    rng = random.Random(99)
    for size in (0, 1, 2, 3, 4):
        entities = generate_entity_list(rng, size)
        mangled = simulate_mangle(serialize_entities(entities))
        assert sanitize_entities(mangled) == entities


# --- sanitize_prediction ---

def test_prediction_full_pass(vocab):
    raw = simulate_mangle(f"{CANONICAL_QUERY} [SEP] {CANONICAL_ENTITY}")
    pred = sanitize_prediction(raw, vocab)
    assert pred.query == CANONICAL_QUERY
    assert list(pred.entities) == [CANONICAL_ENTITY]
    assert pred.valid_query and pred.valid_entities
    assert not pred.degraded


def test_prediction_degraded_missing_separator(vocab):
    pred = sanitize_prediction("select ?x where { ?x <a://p> ?y }", vocab)
    assert pred.degraded
    assert pred.entities == ()
    assert pred.query == "select ?x where { ?x <a://p> ?y }"
    assert pred.valid_query  # the query chunk itself is still usable
    assert not pred.valid_entities


def test_prediction_never_raises_on_garbage(vocab):
    pred = sanitize_prediction("", vocab)
    assert not pred.valid_query
    pred2 = sanitize_prediction("[]{}<>?#:/ [SEP] ,,,", vocab)
    assert pred2.entities == ()
