"""Turn grounded instances into span-extraction training examples.

The grounding stage guarantees (for dev-phase data) that the target
string appears contiguously inside the context; here we locate it and
emit character offsets. Instances whose target is absent are dropped and
counted; a drop rate above 10% aborts, since that signals a grounding
bug rather than a few odd records.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

MAX_DROP_RATE = 0.10


class DropRateExceeded(Exception):
    def __init__(self, dropped: int, total: int):
        self.dropped = dropped
        self.total = total
        super().__init__(
            f"{dropped}/{total} instances lack a contiguous target "
            f"(limit {MAX_DROP_RATE:.0%})"
        )


@dataclass(frozen=True)
class SpanExample:
    instance_id: str
    question: str
    context: str
    char_start: int
    char_end: int

    @property
    def answer(self) -> str:
        return self.context[self.char_start : self.char_end]


def prepare_spans(grounded_rows: Iterable[dict]) -> list[SpanExample]:
    examples: list[SpanExample] = []
    dropped = 0
    total = 0
    for row in grounded_rows:
        total += 1
        context = row.get("context") or ""
        target = row.get("target")
        if not target or not context:
            dropped += 1
            continue
        start = context.find(target)
        if start < 0:
            dropped += 1
            continue
        examples.append(
            SpanExample(
                instance_id=row["instance_id"],
                question=row.get("question", ""),
                context=context,
                char_start=start,
                char_end=start + len(target),
            )
        )
    if total and dropped / total > MAX_DROP_RATE:
        raise DropRateExceeded(dropped, total)
    if dropped:
        logger.warning("dropped %d/%d instances without a contiguous target", dropped, total)
    return examples


def load_grounded(path: str | Path) -> list[dict]:
    return [
        json.loads(line)
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


def save_spans(examples: Sequence[SpanExample], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {
                        "instance_id": ex.instance_id,
                        "question": ex.question,
                        "context": ex.context,
                        "char_start": ex.char_start,
                        "char_end": ex.char_end,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_spans(path: str | Path) -> list[SpanExample]:
    examples = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        examples.append(
            SpanExample(
                instance_id=row["instance_id"],
                question=row["question"],
                context=row["context"],
                char_start=row["char_start"],
                char_end=row["char_end"],
            )
        )
    return examples
