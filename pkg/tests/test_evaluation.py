import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgqa_pipeline.errors import JoinError, MissingGoldAnswers
from kgqa_pipeline.evaluation import (
    PredictionRow,
    canonical_entity_set,
    evaluate_run,
    load_gold_cache,
    resolve_gold_answers,
    query_hash,
    save_gold_cache,
    score_question,
    truncate_percent,
    write_report_csv,
    write_report_json,
)
from kgqa_pipeline.sparql_client import AnswerSet

from conftest import make_record


def brute_force_score(predicted, gold):
    """Independent oracle: list-walking arithmetic, no set operations."""
    pred_list = list(predicted)
    gold_list = list(gold)
    if not pred_list and not gold_list:
        return (1.0, 1.0, 1.0)
    if not pred_list or not gold_list:
        return (0.0, 0.0, 0.0)
    overlap = 0
    for p in pred_list:
        if any(p == g for g in gold_list):
            overlap += 1
    precision = overlap / len(pred_list)
    recall = overlap / len(gold_list)
    if precision + recall == 0:
        return (precision, recall, 0.0)
    return (precision, recall, 2 * precision * recall / (precision + recall))


def test_perfect_match():
    assert score_question({"a", "b"}, {"a", "b"}) == (1.0, 1.0, 1.0)


def test_both_empty_convention():
    assert score_question(set(), set()) == (1.0, 1.0, 1.0)


def test_one_empty_convention():
    assert score_question(set(), {"a"}) == (0.0, 0.0, 0.0)
    assert score_question({"a"}, set()) == (0.0, 0.0, 0.0)


def test_partial_overlap_derived():
    p, r, f1 = score_question({"a", "b", "c"}, {"a", "d"})
    assert p == pytest.approx(1 / 3)
    assert r == pytest.approx(1 / 2)
    assert f1 == pytest.approx(0.4)
    assert (p, r, f1) == brute_force_score({"a", "b", "c"}, {"a", "d"})


def test_score_matches_brute_force_on_500_random_pairs():
    rng = random.Random(42)
    alphabet = [f"s{i}" for i in range(10)]
    for _ in range(500):
        pred = set(rng.sample(alphabet, rng.randint(0, 6)))
        gold = set(rng.sample(alphabet, rng.randint(0, 6)))
        assert score_question(pred, gold) == brute_force_score(pred, gold)


@given(
    st.sets(st.sampled_from("abcdefghij"), max_size=6),
    st.sets(st.sampled_from("abcdefghij"), max_size=6),
)
@settings(max_examples=300, deadline=None)
def test_score_properties(pred, gold):
    p, r, f1 = score_question(pred, gold)
    assert 0 <= p <= 1 and 0 <= r <= 1 and 0 <= f1 <= 1
    # swapping sides swaps precision and recall
    p2, r2, f2 = score_question(gold, pred)
    assert (p, r) == (r2, p2) and f1 == pytest.approx(f2)
    # perfect f1 iff sets are equal
    assert (f1 == 1.0) == (pred == gold)


def test_truncation_matches_reported_format():
    assert truncate_percent(1.0) == 100.00
    assert truncate_percent(0.0018) == 0.18
    assert truncate_percent(0.505) == 50.50
    assert truncate_percent(0.9999) == 99.99
    # truncation, not rounding
    assert truncate_percent(0.123456) == 12.34


def _gold_setup(n=2):
    records = [make_record(rid=f"Q{i}") for i in range(n)]
    gold_answers = {
        r.id: AnswerSet(kind="bindings", values=frozenset({"<https://x/a>"}))
        for r in records
    }
    return records, gold_answers


def perfect_row(record, instance_suffix="q"):
    return PredictionRow(
        instance_id=f"{record.id}#{instance_suffix}",
        answers=AnswerSet(kind="bindings", values=frozenset({"<https://x/a>"})),
        entities=list(record.entities),
    )


def test_evaluate_perfect_run():
    records, gold = _gold_setup()
    predictions = [perfect_row(r) for r in records]
    report = evaluate_run(predictions, records, gold)
    assert report.f1_qa == 100.00 and report.f1_el == 100.00
    assert report.total == 2 and report.degraded == 0


def test_evaluate_total_miss_is_zero():
    records, gold = _gold_setup()
    predictions = [
        PredictionRow(
            instance_id=f"{r.id}#q",
            answers=AnswerSet(kind="bindings", values=frozenset()),
            entities=[],
        )
        for r in records
    ]
    report = evaluate_run(predictions, records, gold)
    assert report.f1_qa == 0.00


def test_evaluate_macro_mean_half():
    records, gold = _gold_setup(4)
    predictions = [perfect_row(r) for r in records[:2]] + [
        PredictionRow(
            instance_id=f"{r.id}#q",
            answers=AnswerSet(kind="bindings", values=frozenset({"<https://x/wrong>"})),
            entities=[],
        )
        for r in records[2:]
    ]
    report = evaluate_run(predictions, records, gold)
    assert report.f1_qa == 50.00


def test_evaluate_permutation_invariant():
    records, gold = _gold_setup(4)
    predictions = [perfect_row(r) for r in records[:3]] + [
        PredictionRow(f"{records[3].id}#q", None, [], qa_degraded=True)
    ]
    fwd = evaluate_run(predictions, records, gold)
    rev = evaluate_run(list(reversed(predictions)), records, gold)
    assert fwd.f1_qa == rev.f1_qa and fwd.f1_el == rev.f1_el


def test_boolean_answers_compare_as_strings():
    record = make_record()
    gold = {record.id: AnswerSet(kind="boolean", values=frozenset(), truth=True)}
    hit = PredictionRow(
        f"{record.id}#q",
        AnswerSet(kind="boolean", values=frozenset(), truth=True),
        record.entities,
    )
    miss = PredictionRow(
        f"{record.id}#p",
        AnswerSet(kind="boolean", values=frozenset(), truth=False),
        record.entities,
    )
    report = evaluate_run([hit, miss], [record], gold)
    qa_scores = [s for s in report.per_question if s.task == "qa"]
    assert qa_scores[0].f1 == 1.0 and qa_scores[1].f1 == 0.0


def test_degraded_instances_score_zero_on_affected_task():
    record = make_record()
    gold = {record.id: AnswerSet(kind="bindings", values=frozenset({"<https://x/a>"}))}
    row = PredictionRow(
        f"{record.id}#q",
        AnswerSet(kind="bindings", values=frozenset({"<https://x/a>"})),
        record.entities,
        el_degraded=True,
    )
    report = evaluate_run([row], [record], gold)
    el = [s for s in report.per_question if s.task == "el"][0]
    assert el.f1 == 0.0
    assert report.degraded == 1


def test_el_comparison_canonicalizes_through_sanitizer():
    # mangled predicted entity still matches after canonicalization
    record = make_record()
    gold = {record.id: AnswerSet(kind="bindings", values=frozenset())}
    row = PredictionRow(
        f"{record.id}#q",
        AnswerSet(kind="bindings", values=frozenset()),
        ["< https : / / dblp. org / pid / 00 / 2941 >"],
    )
    report = evaluate_run([row], [record], gold)
    el = [s for s in report.per_question if s.task == "el"][0]
    assert el.f1 == 1.0


def test_join_error_for_unknown_instance():
    records, gold = _gold_setup()
    stray = PredictionRow("NOPE#q", None, [])
    with pytest.raises(JoinError):
        evaluate_run([stray], records, gold)


def test_canonical_entity_set():
    assert canonical_entity_set(["<a://b>", "<a://b>"]) == frozenset({"<a://b>"})


def test_gold_cache_roundtrip(tmp_path):
    cache = {
        query_hash("q1"): AnswerSet(kind="bindings", values=frozenset({"<a://b>", "x"})),
        query_hash("q2"): AnswerSet(kind="boolean", values=frozenset(), truth=False),
    }
    path = tmp_path / "gold.jsonl"
    save_gold_cache(cache, path)
    assert load_gold_cache(path) == cache


def test_resolve_gold_answers_prefers_cache():
    record = make_record()
    cached = {query_hash(record.query): AnswerSet(kind="boolean", values=frozenset(), truth=True)}
    resolved = resolve_gold_answers([record], client=None, cache=cached)
    assert resolved[record.id].truth is True


def test_resolve_gold_answers_requires_some_source():
    with pytest.raises(MissingGoldAnswers):
        resolve_gold_answers([make_record()], client=None, cache={})


def test_report_files(tmp_path):
    records, gold = _gold_setup()
    report = evaluate_run([perfect_row(r) for r in records], records, gold)
    write_report_json(report, tmp_path / "report.json")
    write_report_csv(report, tmp_path / "report.csv")
    assert (tmp_path / "report.json").exists()
    csv_lines = (tmp_path / "report.csv").read_text().splitlines()
    assert csv_lines[0] == "instance_id,task,precision,recall,f1"
    assert len(csv_lines) == 1 + 2 * len(records)  # qa + el per instance
