"""Pipeline wiring: ingest -> ground -> predict -> sanitize -> execute ->
evaluate, with one JSONL artifact per stage.

Every stage file carries exactly one line per instance; instances that
fail a stage are carried forward as degraded rows instead of aborting the
run. Stage files contain no timestamps so identical runs produce
byte-identical artifacts.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .backends import BackendConfig, make_backend
from .dataset import QAInstance, QuadRecord, expand_paraphrases, load_quad_records
from .errors import (
    ConfigError,
    InvalidQueryRefused,
    MalformedCandidate,
    NoCandidates,
    PipelineError,
)
from .evaluation import (
    EvalReport,
    PredictionRow,
    evaluate_run,
    load_gold_cache,
    resolve_gold_answers,
    save_gold_cache,
    write_report_csv,
    write_report_json,
)
from .grounding import EntityCandidate, build_dev_context, build_final_context, build_target
from .sanitizer import SchemaVocabulary, sanitize_prediction
from .sparql_client import AnswerSet, EndpointConfig, SparqlClient
from .uris import is_entity_uri

logger = logging.getLogger(__name__)

ENDPOINT_URL_ENV = "KGQA_ENDPOINT_URL"

STAGE_FILES = ("grounded.jsonl", "raw.jsonl", "sanitized.jsonl", "answers.jsonl")


@dataclass(frozen=True)
class RunConfig:
    phase: str  # "dev" | "final"
    dataset_path: str
    output_dir: str
    backend: BackendConfig = field(default_factory=BackendConfig)
    endpoint: Optional[EndpointConfig] = None
    vocab_path: Optional[str] = None
    seed: int = 42
    el_provider: str = "none"  # "file" | "none"
    el_candidates_path: Optional[str] = None
    dataset_mode: str = "full"  # "full" | "questions_only"
    gold_cache_path: Optional[str] = None
    max_workers: int = 8

    def validate(self) -> None:
        if self.phase not in ("dev", "final"):
            raise ConfigError(f"unknown phase {self.phase!r}")
        if self.phase == "final" and (
            self.el_provider != "file" or not self.el_candidates_path
        ):
            raise ConfigError("phase=final requires el_provider=file and a candidates file")
        if self.phase == "dev" and self.dataset_mode != "full":
            raise ConfigError("phase=dev requires full-mode records")
        if not Path(self.dataset_path).exists():
            raise ConfigError(f"dataset not found: {self.dataset_path}")
        if self.el_candidates_path and not Path(self.el_candidates_path).exists():
            raise ConfigError(f"candidates file not found: {self.el_candidates_path}")


@dataclass(frozen=True)
class RunArtifact:
    run_id: str
    run_dir: Path
    grounded_path: Path
    raw_path: Path
    sanitized_path: Path
    answers_path: Path
    report_path: Optional[Path]
    report: Optional[EvalReport]


def config_from_dict(data: dict, base_dir: Optional[Path] = None) -> RunConfig:
    """Build a RunConfig from parsed TOML/JSON, resolving relative paths."""

    def resolve(value):
        if value is None or base_dir is None:
            return value
        p = Path(value)
        return str(p if p.is_absolute() else base_dir / p)

    try:
        backend_data = dict(data.get("backend", {}))
        endpoint_data = data.get("endpoint")
        env_url = os.environ.get(ENDPOINT_URL_ENV)
        if env_url:
            endpoint_data = dict(endpoint_data or {})
            endpoint_data["url"] = env_url
        endpoint = EndpointConfig(**endpoint_data) if endpoint_data else None
        return RunConfig(
            phase=data["phase"],
            dataset_path=resolve(data["dataset_path"]),
            output_dir=resolve(data.get("output_dir", "runs")),
            backend=BackendConfig(**backend_data),
            endpoint=endpoint,
            vocab_path=resolve(data.get("vocab_path")),
            seed=int(data.get("seed", 42)),
            el_provider=data.get("el_provider", "none"),
            el_candidates_path=resolve(data.get("el_candidates_path")),
            dataset_mode=data.get("dataset_mode", "full"),
            gold_cache_path=resolve(data.get("gold_cache_path")),
            max_workers=int(data.get("max_workers", 8)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad run config: {exc}") from exc


def load_el_candidates(path: str | Path) -> dict[str, list[EntityCandidate]]:
    """Parse a JSONL candidates file keyed by instance_id."""
    result: dict[str, list[EntityCandidate]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedCandidate(lineno, f"bad JSON: {exc}") from None
        instance_id = row.get("instance_id")
        raw_candidates = row.get("candidates")
        if not isinstance(instance_id, str) or not isinstance(raw_candidates, list):
            raise MalformedCandidate(lineno, "need instance_id and candidates[]")
        candidates = []
        for c in raw_candidates:
            uri = c.get("uri") if isinstance(c, dict) else None
            if not isinstance(uri, str) or not is_entity_uri(uri):
                raise MalformedCandidate(lineno, f"bad candidate uri {uri!r}")
            candidates.append(
                EntityCandidate(uri=uri, score=c.get("score"), label=c.get("label"))
            )
        result[instance_id] = candidates
    return result


def write_jsonl(path: Path, rows: Sequence[dict]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def read_jsonl(path: Path) -> list[dict]:
    return [
        json.loads(line)
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


# --- stages ---

def ground_instances(
    instances: Sequence[QAInstance],
    phase: str,
    candidates: Optional[dict[str, list[EntityCandidate]]] = None,
) -> list[dict]:
    """Context + target per instance; rows for instances that cannot be
    grounded carry an error and an empty context."""
    rows = []
    for inst in instances:
        row = {"instance_id": inst.instance_id, "question": inst.question}
        try:
            if phase == "dev":
                row["context"] = build_dev_context(inst.source).text
            else:
                cands = (candidates or {}).get(inst.instance_id)
                if not cands:
                    raise NoCandidates(inst.instance_id)
                row["context"] = build_final_context(cands).text
            if inst.source.query is not None and inst.source.entities is not None:
                row["target"] = build_target(inst.source).text
            else:
                row["target"] = None
            row["error"] = None
        except PipelineError as exc:
            row.update(context="", target=None, error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows


def predict_rows(grounded: Sequence[dict], backend, max_workers: int = 1) -> list[dict]:
    """Raw model output per grounded row; degraded rows pass through."""

    def one(row: dict) -> dict:
        out = {"instance_id": row["instance_id"]}
        if row.get("error"):
            out.update(text="", backend_id="", latency_ms=0.0, error=row["error"])
            return out
        try:
            result = backend.predict(row["instance_id"], row["question"], row["context"])
            out.update(
                text=result.text,
                backend_id=result.backend_id,
                latency_ms=round(result.latency_ms, 3),
                error=None,
            )
        except PipelineError as exc:
            out.update(text="", backend_id="", latency_ms=0.0,
                       error=f"{type(exc).__name__}: {exc}")
        return out

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, grounded))
    return [one(row) for row in grounded]


def sanitize_rows(raw_rows: Sequence[dict], vocab: SchemaVocabulary) -> list[dict]:
    rows = []
    for raw in raw_rows:
        row = {"instance_id": raw["instance_id"]}
        if raw.get("error"):
            row.update(
                query="",
                entities=[],
                repairs_applied=[],
                valid_query=False,
                valid_entities=False,
                degraded=True,
                error=raw["error"],
            )
        else:
            pred = sanitize_prediction(raw["text"], vocab)
            row.update(
                query=pred.query,
                entities=list(pred.entities),
                repairs_applied=list(pred.repairs_applied),
                valid_query=pred.valid_query,
                valid_entities=pred.valid_entities,
                degraded=pred.degraded,
                error=None,
            )
        rows.append(row)
    return rows


def execute_rows(
    sanitized: Sequence[dict], client: Optional[SparqlClient], max_workers: int = 1
) -> list[dict]:
    """Run each valid predicted query; invalid or failed ones stay degraded."""

    def one(row: dict) -> dict:
        out = {"instance_id": row["instance_id"]}
        if row.get("error") or not row.get("valid_query"):
            out.update(kind=None, values=[], truth=None,
                       error=row.get("error") or "InvalidQueryRefused")
            return out
        if client is None:
            out.update(kind=None, values=[], truth=None, error="no endpoint configured")
            return out
        try:
            answers = client.execute(row["query"])
            out.update(
                kind=answers.kind,
                values=sorted(answers.values),
                truth=answers.truth,
                error=None,
            )
        except PipelineError as exc:
            out.update(kind=None, values=[], truth=None,
                       error=f"{type(exc).__name__}: {exc}")
        return out

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, sanitized))
    return [one(row) for row in sanitized]


def rows_to_predictions(
    sanitized: Sequence[dict], answer_rows: Sequence[dict]
) -> list[PredictionRow]:
    answers_by_id = {r["instance_id"]: r for r in answer_rows}
    predictions = []
    for row in sanitized:
        arow = answers_by_id.get(row["instance_id"], {})
        if arow.get("kind") == "boolean":
            answers = AnswerSet(kind="boolean", values=frozenset(), truth=arow["truth"])
        elif arow.get("kind") == "bindings":
            answers = AnswerSet(kind="bindings", values=frozenset(arow["values"]))
        else:
            answers = None
        predictions.append(
            PredictionRow(
                instance_id=row["instance_id"],
                answers=answers,
                entities=row.get("entities", []),
                el_degraded=bool(row.get("degraded")),
                qa_degraded=bool(row.get("error")) or not row.get("valid_query"),
            )
        )
    return predictions


def run_pipeline(config: RunConfig) -> RunArtifact:
    """Execute every stage, persisting one JSONL per stage plus the report."""
    config.validate()
    vocab = (
        SchemaVocabulary.from_file(config.vocab_path)
        if config.vocab_path
        else SchemaVocabulary.default()
    )

    run_id = time.strftime("%Y%m%d-%H%M%S") + f"-{config.phase}"
    run_dir = Path(config.output_dir) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(
        json.dumps(_config_snapshot(config), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    records = load_quad_records(config.dataset_path, mode=config.dataset_mode)
    instances = expand_paraphrases(records)
    logger.info("loaded %d records -> %d instances", len(records), len(instances))

    candidates = None
    if config.phase == "final":
        candidates = load_el_candidates(config.el_candidates_path)
        unknown = set(candidates) - {i.instance_id for i in instances}
        if unknown:
            logger.warning("%d candidate ids do not match any instance", len(unknown))

    grounded = ground_instances(instances, config.phase, candidates)
    grounded_path = run_dir / "grounded.jsonl"
    write_jsonl(grounded_path, grounded)

    targets = {
        row["instance_id"]: row["target"] for row in grounded if row.get("target")
    }
    backend = make_backend(config.backend, targets)
    workers = config.max_workers if config.backend.kind == "remote" else 1
    raw_rows = predict_rows(grounded, backend, max_workers=workers)
    raw_path = run_dir / "raw.jsonl"
    write_jsonl(raw_path, raw_rows)

    sanitized = sanitize_rows(raw_rows, vocab)
    sanitized_path = run_dir / "sanitized.jsonl"
    write_jsonl(sanitized_path, sanitized)

    client = SparqlClient(config.endpoint) if config.endpoint else None
    answer_rows = execute_rows(sanitized, client, max_workers=config.max_workers)
    answers_path = run_dir / "answers.jsonl"
    write_jsonl(answers_path, answer_rows)

    report = None
    report_path = None
    gold_available = all(r.query is not None for r in records)
    if gold_available and (client is not None or config.gold_cache_path):
        cache = load_gold_cache(config.gold_cache_path) if config.gold_cache_path else {}
        gold_answers = {}
        for record in records:
            # a record whose gold query cannot execute leaves its (already
            # degraded) instances unscored on QA instead of aborting the run
            try:
                gold_answers.update(resolve_gold_answers([record], client, cache))
            except PipelineError as exc:
                logger.warning("gold answers unavailable for %s: %s", record.id, exc)
        if config.gold_cache_path:
            save_gold_cache(cache, config.gold_cache_path)
        predictions = rows_to_predictions(sanitized, answer_rows)
        report = evaluate_run(predictions, records, gold_answers)
        report_path = run_dir / "report.json"
        write_report_json(report, report_path)
        write_report_csv(report, run_dir / "report.csv")
        logger.info("F1-QA %.2f, F1-EL %.2f", report.f1_qa, report.f1_el)
    else:
        logger.info("gold data unavailable; skipping evaluation")

    manifest = {
        "run_id": run_id,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "stages": {name: str(run_dir / name) for name in STAGE_FILES},
        "report": str(report_path) if report_path else None,
        "instances": len(instances),
    }
    (run_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return RunArtifact(
        run_id=run_id,
        run_dir=run_dir,
        grounded_path=grounded_path,
        raw_path=raw_path,
        sanitized_path=sanitized_path,
        answers_path=answers_path,
        report_path=report_path,
        report=report,
    )


def _config_snapshot(config: RunConfig) -> dict:
    snap = dataclasses.asdict(config)
    return snap
