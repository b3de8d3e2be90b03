import torch

from trainer_server.features import build_windows, featurize_example
from trainer_server.model import load_checkpoint
from trainer_server.tokenizer import Vocab, tokenize
from trainer_server.training import TrainingConfig, featurize_all, train

from conftest import span_examples

FAST_DIMS = dict(dim=48, layers=1, heads=4, ff_dim=96)


def test_zero_epochs_checkpoint_equals_initialization(tmp_path):
    examples = span_examples(5, seed=8)
    config = TrainingConfig(epochs=0, **FAST_DIMS)
    result = train(config, examples, out_dir=tmp_path / "ckpt")
    assert result.loss_log == []

    torch.manual_seed(config.seed)
    from trainer_server.model import ModelConfig, SpanModel

    fresh = SpanModel(ModelConfig(vocab_size=len(result.vocab), **{
        k: getattr(result.model.config, k)
        for k in ("dim", "layers", "heads", "ff_dim", "max_len", "window_stride")
    }))
    for a, b in zip(result.model.state_dict().values(), fresh.state_dict().values()):
        assert torch.equal(a, b)


def test_identical_seed_gives_identical_loss_logs():
    examples = span_examples(10, seed=9)
    config = TrainingConfig(epochs=2, learning_rate=1e-3, **FAST_DIMS)
    first = train(config, examples)
    second = train(config, examples)
    assert first.loss_log == second.loss_log


def test_training_decreases_loss():
    examples = span_examples(15, seed=10)
    config = TrainingConfig(epochs=4, learning_rate=3e-4, lr_decay=True, **FAST_DIMS)
    result = train(config, examples)
    losses = [row["training_loss"] for row in result.loss_log]
    assert losses[-1] < losses[0]
    assert result.loss_log[-1]["step"] == 4 * ((len(examples) + 15) // 16)


def test_validation_loss_logged():
    examples = span_examples(10, seed=12)
    val = span_examples(4, seed=13)
    config = TrainingConfig(epochs=1, **FAST_DIMS)
    result = train(config, examples, val_examples=val)
    assert result.loss_log[0]["validation_loss"] is not None


def test_checkpoint_roundtrip(tmp_path):
    examples = span_examples(5, seed=14)
    config = TrainingConfig(epochs=1, **FAST_DIMS)
    result = train(config, examples, out_dir=tmp_path / "ckpt")
    model, vocab, meta = load_checkpoint(result.checkpoint_dir)
    assert vocab.itos == result.vocab.itos
    assert meta["loss_log"] == result.loss_log
    for a, b in zip(model.state_dict().values(), result.model.state_dict().values()):
        assert torch.equal(a, b)


def test_fine_tune_resumes_from_base(tmp_path):
    examples = span_examples(10, seed=15)
    base = train(TrainingConfig(epochs=1, **FAST_DIMS), examples, out_dir=tmp_path / "base")
    tuned = train(
        TrainingConfig(epochs=1, base_model=str(base.checkpoint_dir)), examples
    )
    assert tuned.vocab.itos == base.vocab.itos  # vocabulary comes from the base


def test_long_context_slides_into_windows():
    vocab = Vocab.build(["w"])
    question = "q?"
    context = " ".join(f"w{i}" for i in range(600))
    windows = build_windows(question, context, max_len=128, stride=64)
    assert len(windows) > 1
    # every window respects the budget
    assert all(len(w.input_tokens) <= 128 for w in windows)
    # a span deep in the context still featurizes (a later window holds it)
    char_start = context.index("w400")
    char_end = char_start + len("w400 w401")
    feature = featurize_example(vocab, question, context, char_start, char_end, 128, 64)
    assert feature is not None
    assert feature.context_mask[feature.start_position]
    assert feature.end_position >= feature.start_position


def test_featurize_all_counts_drops():
    examples = span_examples(5, seed=16)
    vocab = Vocab.build([e.context for e in examples] + [e.question for e in examples])
    # absurdly small budget: nothing fits
    features, dropped = featurize_all(examples, vocab, max_len=16, stride=8)
    assert dropped == len(examples)
    assert features == []
