"""Set-F1 scoring for the QA and EL sub-tasks.

Per-question precision/recall/F1 over answer (or entity) sets, macro
averaged, reported as percentages truncated to two decimals. Two empty
sets count as a perfect match; one empty side scores zero.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .dataset import QuadRecord
from .errors import JoinError, MissingGoldAnswers
from .sanitizer import sanitize_entities
from .sparql_client import AnswerSet, SparqlClient

TASK_QA = "qa"
TASK_EL = "el"


@dataclass(frozen=True)
class QuestionScore:
    instance_id: str
    precision: float
    recall: float
    f1: float
    task: str


@dataclass(frozen=True)
class EvalReport:
    per_question: tuple[QuestionScore, ...]
    f1_qa: float  # percentage, truncated to 2 decimals
    f1_el: float
    answered: int
    degraded: int
    total: int

    def to_dict(self) -> dict:
        return {
            "f1_qa": self.f1_qa,
            "f1_el": self.f1_el,
            "counts": {
                "answered": self.answered,
                "degraded": self.degraded,
                "total": self.total,
            },
            "per_question": [
                {
                    "instance_id": s.instance_id,
                    "task": s.task,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
                for s in self.per_question
            ],
        }

    def render_table(self) -> str:
        lines = [
            "phase results (macro F1, %)",
            "  F1-QA  F1-EL  answered/degraded/total",
            f"  {self.f1_qa:06.2f} {self.f1_el:06.2f}  "
            f"{self.answered}/{self.degraded}/{self.total}",
        ]
        return "\n".join(lines)


@dataclass(frozen=True)
class PredictionRow:
    """One scored instance: what the pipeline ended up with."""

    instance_id: str
    answers: Optional[AnswerSet]  # None when the query never executed
    entities: Sequence[str]
    el_degraded: bool = False  # [SEP] missing: entity info unusable
    qa_degraded: bool = False  # invalid/unexecutable query


def score_question(predicted: set, gold: set) -> tuple[float, float, float]:
    """Set precision/recall/F1 with the both-empty -> perfect convention."""
    if not predicted and not gold:
        return 1.0, 1.0, 1.0
    if not predicted or not gold:
        return 0.0, 0.0, 0.0
    overlap = len(predicted & gold)
    precision = overlap / len(predicted)
    recall = overlap / len(gold)
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def truncate_percent(fraction: float) -> float:
    """0.12345 -> 12.34 (truncated, matching the reported-score format)."""
    return math.floor(fraction * 100 * 100 + 1e-9) / 100


def canonical_entity_set(entities: Iterable[str]) -> frozenset[str]:
    """Canonicalize an entity list through the sanitizer before comparing."""
    return frozenset(sanitize_entities(" ".join(entities)))


def query_hash(query: str) -> str:
    return hashlib.sha256(query.encode("utf-8")).hexdigest()


def load_gold_cache(path: str | Path) -> dict[str, AnswerSet]:
    """Read a JSONL gold-answer cache keyed by query hash."""
    cache: dict[str, AnswerSet] = {}
    p = Path(path)
    if not p.exists():
        return cache
    for line in p.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        if row["kind"] == "boolean":
            answers = AnswerSet(kind="boolean", values=frozenset(), truth=row["truth"])
        else:
            answers = AnswerSet(kind="bindings", values=frozenset(row["values"]))
        cache[row["query_hash"]] = answers
    return cache


def save_gold_cache(cache: dict[str, AnswerSet], path: str | Path) -> None:
    lines = []
    for qhash in sorted(cache):
        answers = cache[qhash]
        lines.append(
            json.dumps(
                {
                    "query_hash": qhash,
                    "kind": answers.kind,
                    "values": sorted(answers.values),
                    "truth": answers.truth,
                },
                sort_keys=True,
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def resolve_gold_answers(
    records: Sequence[QuadRecord],
    client: Optional[SparqlClient] = None,
    cache: Optional[dict[str, AnswerSet]] = None,
) -> dict[str, AnswerSet]:
    """Gold answer set per record id, from cache first, endpoint second."""
    cache = cache if cache is not None else {}
    resolved: dict[str, AnswerSet] = {}
    for record in records:
        qhash = query_hash(record.query)
        if qhash in cache:
            resolved[record.id] = cache[qhash]
            continue
        if client is None:
            raise MissingGoldAnswers(
                f"no cached gold answers for record {record.id!r} and no endpoint configured"
            )
        answers = client.execute(record.query)
        cache[qhash] = answers
        resolved[record.id] = answers
    return resolved


def evaluate_run(
    predictions: Sequence[PredictionRow],
    gold_records: Sequence[QuadRecord],
    gold_answers: dict[str, AnswerSet],
) -> EvalReport:
    """Score a run: QA against resolved gold answer sets, EL against gold
    entity lists. Degraded instances score zero on the affected task."""
    by_id = {r.id: r for r in gold_records}
    scores: list[QuestionScore] = []
    qa_f1s: list[float] = []
    el_f1s: list[float] = []
    degraded_count = 0

    for pred in predictions:
        record_id = pred.instance_id.rsplit("#", 1)[0]
        record = by_id.get(record_id)
        if record is None:
            raise JoinError(pred.instance_id)

        if pred.qa_degraded or pred.answers is None:
            qa = (0.0, 0.0, 0.0)
        else:
            if record.id not in gold_answers:
                raise MissingGoldAnswers(f"record {record.id!r} has no gold answer set")
            qa = score_question(
                set(pred.answers.comparable_values()),
                set(gold_answers[record.id].comparable_values()),
            )
        if pred.el_degraded:
            el = (0.0, 0.0, 0.0)
        else:
            el = score_question(
                set(canonical_entity_set(pred.entities)),
                set(canonical_entity_set(record.entities or ())),
            )
        scores.append(QuestionScore(pred.instance_id, *qa, task=TASK_QA))
        scores.append(QuestionScore(pred.instance_id, *el, task=TASK_EL))
        qa_f1s.append(qa[2])
        el_f1s.append(el[2])
        if pred.qa_degraded or pred.el_degraded or pred.answers is None:
            degraded_count += 1

    total = len(predictions)
    f1_qa = truncate_percent(sum(qa_f1s) / total) if total else 0.0
    f1_el = truncate_percent(sum(el_f1s) / total) if total else 0.0
    return EvalReport(
        per_question=tuple(scores),
        f1_qa=f1_qa,
        f1_el=f1_el,
        answered=total - degraded_count,
        degraded=degraded_count,
        total=total,
    )


def write_report_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    lines = ["instance_id,task,precision,recall,f1"]
    for s in report.per_question:
        lines.append(f"{s.instance_id},{s.task},{s.precision:.6f},{s.recall:.6f},{s.f1:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
