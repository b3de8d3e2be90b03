"""Command-line interface.

Subcommands mirror the pipeline stages (ingest, ground, predict, sanitize,
execute, evaluate) plus ``run`` for the whole flow. Exit codes: 0 success,
1 configuration error, 2 run-level failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .backends import BackendConfig, make_backend
from .dataset import dump_quad_records, expand_paraphrases, load_quad_records
from .errors import ConfigError, PipelineError
from .evaluation import (
    evaluate_run,
    load_gold_cache,
    resolve_gold_answers,
    save_gold_cache,
    write_report_csv,
    write_report_json,
)
from .pipeline import (
    ENDPOINT_URL_ENV,
    config_from_dict,
    execute_rows,
    ground_instances,
    load_el_candidates,
    predict_rows,
    read_jsonl,
    rows_to_predictions,
    run_pipeline,
    sanitize_rows,
    write_jsonl,
)
from .sanitizer import SchemaVocabulary
from .sparql_client import EndpointConfig, SparqlClient


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _endpoint_from_args(args) -> EndpointConfig | None:
    url = os.environ.get(ENDPOINT_URL_ENV) or getattr(args, "endpoint_url", None)
    return EndpointConfig(url=url) if url else None


def _vocab_from_args(args) -> SchemaVocabulary:
    vocab_path = getattr(args, "vocab", None)
    return SchemaVocabulary.from_file(vocab_path) if vocab_path else SchemaVocabulary.default()


def cmd_ingest(args) -> int:
    records = load_quad_records(args.input, mode=args.mode)
    print(f"loaded {len(records)} records from {args.input}")
    if args.out:
        dump_quad_records(records, args.out)
        print(f"canonical records written to {args.out}")
    return 0


def cmd_ground(args) -> int:
    records = load_quad_records(args.input, mode=args.mode)
    instances = expand_paraphrases(records)
    candidates = load_el_candidates(args.candidates) if args.candidates else None
    if args.phase == "final" and candidates is None:
        raise ConfigError("phase=final requires --candidates")
    rows = ground_instances(instances, args.phase, candidates)
    write_jsonl(Path(args.out), rows)
    print(f"grounded {len(rows)} instances -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    grounded = read_jsonl(Path(args.input))
    config = BackendConfig(kind=args.backend, endpoint=args.backend_url)
    targets = {r["instance_id"]: r["target"] for r in grounded if r.get("target")}
    backend = make_backend(config, targets)
    rows = predict_rows(grounded, backend, max_workers=args.workers)
    write_jsonl(Path(args.out), rows)
    print(f"predicted {len(rows)} instances -> {args.out}")
    return 0


def cmd_sanitize(args) -> int:
    raw_rows = read_jsonl(Path(args.input))
    rows = sanitize_rows(raw_rows, _vocab_from_args(args))
    write_jsonl(Path(args.out), rows)
    valid = sum(1 for r in rows if r["valid_query"])
    print(f"sanitized {len(rows)} predictions ({valid} valid queries) -> {args.out}")
    return 0


def cmd_execute(args) -> int:
    sanitized = read_jsonl(Path(args.input))
    endpoint = _endpoint_from_args(args)
    if endpoint is None:
        raise ConfigError(f"--endpoint-url or ${ENDPOINT_URL_ENV} required")
    rows = execute_rows(sanitized, SparqlClient(endpoint), max_workers=args.workers)
    write_jsonl(Path(args.out), rows)
    answered = sum(1 for r in rows if not r["error"])
    print(f"executed {answered}/{len(rows)} queries -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    sanitized = read_jsonl(Path(args.sanitized))
    answer_rows = read_jsonl(Path(args.answers))
    records = load_quad_records(args.gold, mode="full")
    endpoint = _endpoint_from_args(args)
    client = SparqlClient(endpoint) if endpoint else None
    cache = load_gold_cache(args.gold_cache) if args.gold_cache else {}
    gold_answers = resolve_gold_answers(records, client, cache)
    if args.gold_cache:
        save_gold_cache(cache, args.gold_cache)
    report = evaluate_run(rows_to_predictions(sanitized, answer_rows), records, gold_answers)
    write_report_json(report, args.out)
    if args.csv:
        write_report_csv(report, args.csv)
    print(report.render_table())
    return 0


def cmd_run(args) -> int:
    data = _load_config_file(args.config)
    base_dir = Path(args.config).resolve().parent
    config = config_from_dict(data, base_dir)
    overrides = {}
    if args.output_dir:
        overrides["output_dir"] = args.output_dir
    if args.phase:
        overrides["phase"] = args.phase
    if overrides:
        import dataclasses

        config = dataclasses.replace(config, **overrides)
    artifact = run_pipeline(config)
    print(f"run {artifact.run_id} complete: {artifact.run_dir}")
    if artifact.report:
        print(artifact.report.render_table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgqa", description="Grounding pipeline for KGQA over SPARQL datasets."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate a record file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=["full", "questions_only"], default="full")
    p.add_argument("--out", help="write canonical re-serialization here")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("ground", help="build contexts and targets")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=["full", "questions_only"], default="full")
    p.add_argument("--phase", choices=["dev", "final"], default="dev")
    p.add_argument("--candidates", help="entity-linker candidates JSONL (final phase)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ground)

    p = sub.add_parser("predict", help="run the model backend over grounded inputs")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument(
        "--backend", choices=["oracle", "oracle_mangled", "remote"], default="oracle"
    )
    p.add_argument("--backend-url", help="service endpoint for --backend remote")
    p.add_argument("--workers", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("sanitize", help="repair raw outputs into queries + entities")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab", help="schema vocabulary file (one term per line)")
    p.set_defaults(fn=cmd_sanitize)

    p = sub.add_parser("execute", help="run sanitized queries against an endpoint")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--endpoint-url")
    p.add_argument("--workers", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_execute)

    p = sub.add_parser("evaluate", help="score predictions against gold records")
    p.add_argument("--sanitized", required=True)
    p.add_argument("--answers", required=True)
    p.add_argument("--gold", required=True, help="full-mode gold record file")
    p.add_argument("--endpoint-url")
    p.add_argument("--gold-cache", help="JSONL cache of gold answer sets")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True, help="TOML or JSON run config")
    p.add_argument("--output-dir")
    p.add_argument("--phase", choices=["dev", "final"])
    p.set_defaults(fn=cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except PipelineError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
