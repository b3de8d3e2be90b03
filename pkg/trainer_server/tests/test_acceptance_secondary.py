"""Secondary acceptance criteria: desk-scale training check and wire
interop with the primary pipeline. Run with -s for the PASS lines."""

import json
import time

from kgqa_pipeline.backends import BackendConfig
from kgqa_pipeline.dataset import dump_quad_records
from kgqa_pipeline.pipeline import (
    RunConfig,
    STAGE_FILES,
    read_jsonl,
    run_pipeline,
)
from kgqa_pipeline.sparql_client import EndpointConfig
from kgqa_pipeline.stub_endpoint import StubSparqlEndpoint
from kgqa_pipeline.synthetic import endpoint_table, generate_corpus

from trainer_server.server import ThreadedServer, create_app
from trainer_server.training import TrainingConfig, pretrain_base, train

from conftest import span_examples


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_7_desk_scale_training(tmp_path):
    """500-instance fine-tune at the published settings: loss monotone
    non-increasing over 3 epochs, ending <= 0.01.

    The base checkpoint is pretrained in-session on disjoint synthetic
    instances; no downloadable pretrained encoder is reachable offline.
    """
    start = time.time()
    base_examples = span_examples(400, seed=1)  # disjoint pretraining corpus
    base = pretrain_base(base_examples, tmp_path / "base", seed=7, epochs=24,
                         learning_rate=3e-4)

    tune_examples = span_examples(250, seed=2)  # 250 records -> 500 instances
    assert len(tune_examples) == 500
    config = TrainingConfig(base_model=str(base.checkpoint_dir))
    assert (config.learning_rate, config.train_batch, config.eval_batch) == (2e-5, 16, 16)
    assert (config.seed, config.epochs) == (42, 3)
    assert config.adam_betas == (0.9, 0.999) and config.adam_epsilon == 1e-8

    result = train(config, tune_examples)
    losses = [row["training_loss"] for row in result.loss_log]
    elapsed = time.time() - start

    monotone = all(b <= a for a, b in zip(losses, losses[1:]))
    final_ok = losses[-1] <= 0.01
    print(result.render_loss_table())
    report(
        7,
        monotone and final_ok,
        f"epoch losses {['%.5f' % l for l in losses]}, monotone={monotone}, "
        f"final<=0.01={final_ok}, {elapsed:.0f}s",
    )


def test_criterion_8_wire_interop(tmp_path, small_checkpoint):
    """Primary remote backend completes a final-phase fixture run against
    the served model with zero contract errors; every instance gets a
    sanitized prediction."""
    cases = generate_corpus(10, seed=21)
    dataset = tmp_path / "dataset.json"
    dump_quad_records([c.record for c in cases], dataset)

    candidates_path = tmp_path / "candidates.jsonl"
    with candidates_path.open("w") as fh:
        for case in cases:
            for suffix in ("q", "p"):
                uris = list(case.record.entities) or ["<https://dblp.org/pid/0/0>"]
                fh.write(
                    json.dumps(
                        {
                            "instance_id": f"{case.record.id}#{suffix}",
                            "candidates": [{"uri": u} for u in uris],
                        }
                    )
                    + "\n"
                )

    app = create_app(checkpoint_dir=small_checkpoint)
    with ThreadedServer(app) as server, StubSparqlEndpoint(endpoint_table(cases)) as stub:
        artifact = run_pipeline(
            RunConfig(
                phase="final",
                dataset_path=str(dataset),
                output_dir=str(tmp_path / "runs"),
                backend=BackendConfig(kind="remote", endpoint=server.url),
                endpoint=EndpointConfig(url=stub.url, rate_limit=0),
                el_provider="file",
                el_candidates_path=str(candidates_path),
            )
        )

    raw_rows = read_jsonl(artifact.raw_path)
    sanitized = read_jsonl(artifact.sanitized_path)
    contract_errors = [r for r in raw_rows if r["error"]]
    counts = {len(read_jsonl(artifact.run_dir / name)) for name in STAGE_FILES}
    ok = (
        not contract_errors
        and len(sanitized) == 20
        and counts == {20}
        and all(r["backend_id"] == "remote" for r in raw_rows)
    )
    report(
        8,
        ok,
        f"20 instances served remotely, contract errors={len(contract_errors)}, "
        f"sanitized rows={len(sanitized)}, stage counts={sorted(counts)}",
    )
