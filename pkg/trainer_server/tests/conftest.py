import warnings

import pytest

warnings.filterwarnings("ignore", message=".*nested tensors.*")

from kgqa_pipeline.dataset import expand_paraphrases
from kgqa_pipeline.pipeline import ground_instances
from kgqa_pipeline.synthetic import generate_corpus

from trainer_server.spans import prepare_spans
from trainer_server.training import pretrain_base


def grounded_rows(count: int, seed: int) -> list[dict]:
    cases = generate_corpus(count, seed=seed)
    records = [c.record for c in cases]
    return ground_instances(expand_paraphrases(records), "dev")


def span_examples(count: int, seed: int):
    return prepare_spans(grounded_rows(count, seed))


@pytest.fixture(scope="session")
def small_checkpoint(tmp_path_factory):
    """A quickly trained checkpoint shared by serving/interop tests."""
    out = tmp_path_factory.mktemp("ckpt") / "base"
    examples = span_examples(100, seed=31)
    result = pretrain_base(
        examples, out, seed=7, epochs=12, learning_rate=3e-4, dim=96, layers=2
    )
    assert result.loss_log[-1]["training_loss"] < 0.2
    return out


@pytest.fixture(scope="session")
def small_training_examples():
    return span_examples(100, seed=31)
