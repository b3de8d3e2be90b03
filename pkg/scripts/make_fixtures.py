#!/usr/bin/env python3
"""Generate a synthetic DBLP-style fixture bundle for offline runs.

Writes into --out:
  dataset.json      full-mode records
  questions.json    the same records stripped to question/paraphrase
  candidates.jsonl  entity-linker candidates per instance (gold entities)
  endpoint.json     query -> canned SPARQL JSON payloads for the stub
"""

import argparse
import json
from pathlib import Path

from kgqa_pipeline.dataset import dump_quad_records, record_to_dict
from kgqa_pipeline.synthetic import endpoint_table, generate_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=100, help="number of records")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", type=Path, default=Path("fixtures"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    cases = generate_corpus(args.count, seed=args.seed)
    records = [c.record for c in cases]

    dump_quad_records(records, args.out / "dataset.json")

    questions = [
        {k: v for k, v in record_to_dict(r).items() if k in ("id", "question", "paraphrased_question")}
        for r in records
    ]
    (args.out / "questions.json").write_text(json.dumps(questions, indent=2))

    with (args.out / "candidates.jsonl").open("w") as fh:
        for record in records:
            for suffix in ("q", "p"):
                candidates = [{"uri": uri, "score": 0.9} for uri in record.entities]
                if not candidates:
                    candidates = [{"uri": "<https://dblp.org/pid/0/0>", "score": 0.1}]
                fh.write(
                    json.dumps(
                        {"instance_id": f"{record.id}#{suffix}", "candidates": candidates}
                    )
                    + "\n"
                )

    (args.out / "endpoint.json").write_text(json.dumps(endpoint_table(cases), indent=2))
    print(f"wrote {args.count} records and fixtures to {args.out}/")


if __name__ == "__main__":
    main()
