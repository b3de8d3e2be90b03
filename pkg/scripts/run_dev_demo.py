#!/usr/bin/env python3
"""End-to-end dev-phase demo, fully offline.

Generates a fixture corpus, starts the bundled stub SPARQL endpoint, runs
the pipeline with the damaged-output oracle, and prints the report. The
mangled backend feeds the sanitizer realistic detokenization damage, so a
perfect score here demonstrates the whole repair path.
"""

import argparse
import logging
import tempfile
from pathlib import Path

from kgqa_pipeline.backends import BackendConfig
from kgqa_pipeline.dataset import dump_quad_records
from kgqa_pipeline.pipeline import RunConfig, run_pipeline
from kgqa_pipeline.sparql_client import EndpointConfig
from kgqa_pipeline.stub_endpoint import StubSparqlEndpoint
from kgqa_pipeline.synthetic import endpoint_table, generate_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument(
        "--backend", choices=["oracle", "oracle_mangled"], default="oracle_mangled"
    )
    parser.add_argument("--output-dir", type=Path, default=None)
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    output_dir = args.output_dir or Path(tempfile.mkdtemp(prefix="kgqa-demo-"))
    cases = generate_corpus(args.count, seed=args.seed)
    dataset = output_dir / "dataset.json"
    output_dir.mkdir(parents=True, exist_ok=True)
    dump_quad_records([c.record for c in cases], dataset)

    with StubSparqlEndpoint(endpoint_table(cases)) as stub:
        artifact = run_pipeline(
            RunConfig(
                phase="dev",
                dataset_path=str(dataset),
                output_dir=str(output_dir / "runs"),
                backend=BackendConfig(kind=args.backend),
                endpoint=EndpointConfig(url=stub.url, rate_limit=0),
            )
        )

    print()
    print(artifact.report.render_table())
    print(f"\nstage artifacts: {artifact.run_dir}")


if __name__ == "__main__":
    main()
