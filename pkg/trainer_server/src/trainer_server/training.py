"""Span-model training with the published fine-tuning settings as defaults.

``train`` fine-tunes either from a base checkpoint or from scratch.
``pretrain_base`` builds a base checkpoint from scratch with a more
aggressive recipe; it stands in for a downloadable pretrained encoder in
offline environments and its output is what ``train`` normally starts
from.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import torch
from torch import nn

from .features import TrainingFeature, featurize_example
from .model import ModelConfig, SpanModel, load_checkpoint, save_checkpoint
from .spans import SpanExample
from .tokenizer import Vocab

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingConfig:
    # published fine-tuning settings; override freely
    learning_rate: float = 2e-5
    train_batch: int = 16
    eval_batch: int = 16
    seed: int = 42
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_epsilon: float = 1e-8
    epochs: int = 3
    base_model: str = "scratch"  # checkpoint directory, or "scratch"
    lr_decay: bool = False  # linear decay to 0 (used by the pretraining recipe)
    # scratch-model shape (ignored when loading a base checkpoint)
    dim: int = 128
    layers: int = 2
    heads: int = 4
    ff_dim: int = 256
    max_len: int = 384
    window_stride: int = 128


@dataclass
class TrainResult:
    model: SpanModel
    vocab: Vocab
    loss_log: list[dict]
    dropped_features: int
    checkpoint_dir: Optional[Path] = None

    def render_loss_table(self) -> str:
        lines = ["Epoch  Training Loss  Step  Validation Loss"]
        for row in self.loss_log:
            val = row["validation_loss"]
            val_text = f"{val:.4f}" if val is not None else "-"
            lines.append(
                f"{row['epoch']:<6.1f} {row['training_loss']:<14.4f} "
                f"{row['step']:<5d} {val_text}"
            )
        return "\n".join(lines)


def _batches(features: Sequence[TrainingFeature], batch_size: int, order: list[int]):
    for i in range(0, len(order), batch_size):
        yield [features[j] for j in order[i : i + batch_size]]


def _collate(batch: Sequence[TrainingFeature], pad_id: int):
    length = max(len(f.input_ids) for f in batch)
    input_ids = torch.full((len(batch), length), pad_id, dtype=torch.long)
    segment_ids = torch.zeros((len(batch), length), dtype=torch.long)
    pad_mask = torch.ones((len(batch), length), dtype=torch.bool)
    context_mask = torch.zeros((len(batch), length), dtype=torch.bool)
    starts = torch.zeros(len(batch), dtype=torch.long)
    ends = torch.zeros(len(batch), dtype=torch.long)
    for i, f in enumerate(batch):
        n = len(f.input_ids)
        input_ids[i, :n] = torch.tensor(f.input_ids, dtype=torch.long)
        segment_ids[i, :n] = torch.tensor(f.segment_ids, dtype=torch.long)
        pad_mask[i, :n] = False
        context_mask[i, :n] = torch.tensor(f.context_mask, dtype=torch.bool)
        starts[i] = f.start_position
        ends[i] = f.end_position
    return input_ids, segment_ids, pad_mask, context_mask, starts, ends


def _batch_loss(model: SpanModel, batch, pad_id: int) -> torch.Tensor:
    input_ids, segment_ids, pad_mask, context_mask, starts, ends = _collate(batch, pad_id)
    start_logits, end_logits = model(input_ids, segment_ids, pad_mask, context_mask)
    ce = nn.functional.cross_entropy
    return (ce(start_logits, starts) + ce(end_logits, ends)) / 2


def featurize_all(
    examples: Sequence[SpanExample], vocab: Vocab, max_len: int, stride: int
) -> tuple[list[TrainingFeature], int]:
    features = []
    dropped = 0
    for ex in examples:
        feature = featurize_example(
            vocab, ex.question, ex.context, ex.char_start, ex.char_end, max_len, stride
        )
        if feature is None:
            dropped += 1
        else:
            features.append(feature)
    return features, dropped


def train(
    config: TrainingConfig,
    examples: Sequence[SpanExample],
    val_examples: Sequence[SpanExample] = (),
    out_dir: Optional[str | Path] = None,
) -> TrainResult:
    torch.manual_seed(config.seed)
    random.seed(config.seed)

    if config.base_model == "scratch":
        texts = [ex.question for ex in examples] + [ex.context for ex in examples]
        vocab = Vocab.build(texts)
        model_config = ModelConfig(
            vocab_size=len(vocab),
            dim=config.dim,
            layers=config.layers,
            heads=config.heads,
            ff_dim=config.ff_dim,
            max_len=config.max_len,
            window_stride=config.window_stride,
        )
        model = SpanModel(model_config)
    else:
        model, vocab, _ = load_checkpoint(config.base_model)
        model_config = model.config
    model.train()

    features, dropped = featurize_all(
        examples, vocab, model_config.max_len, model_config.window_stride
    )
    val_features, _ = featurize_all(
        val_examples, vocab, model_config.max_len, model_config.window_stride
    )
    if dropped:
        logger.warning("featurization dropped %d examples", dropped)
    if not features and config.epochs > 0:
        raise ValueError("no trainable features")

    optimizer = torch.optim.Adam(
        model.parameters(),
        lr=config.learning_rate,
        betas=config.adam_betas,
        eps=config.adam_epsilon,
    )
    steps_per_epoch = (len(features) + config.train_batch - 1) // config.train_batch
    total_steps = max(1, steps_per_epoch * config.epochs)

    shuffler = random.Random(config.seed)
    loss_log: list[dict] = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = list(range(len(features)))
        shuffler.shuffle(order)
        epoch_losses = []
        for batch in _batches(features, config.train_batch, order):
            if config.lr_decay:
                scale = 1.0 - step / total_steps
                for group in optimizer.param_groups:
                    group["lr"] = config.learning_rate * scale
            optimizer.zero_grad()
            loss = _batch_loss(model, batch, vocab.pad_id)
            loss.backward()
            optimizer.step()
            step += 1
            epoch_losses.append(loss.item())

        val_loss = None
        if val_features:
            val_loss = evaluate_loss(model, val_features, vocab.pad_id, config.eval_batch)
        row = {
            "epoch": float(epoch),
            "training_loss": sum(epoch_losses) / len(epoch_losses),
            "step": step,
            "validation_loss": val_loss,
        }
        loss_log.append(row)
        logger.info(
            "epoch %.1f training_loss %.4f step %d validation_loss %s",
            row["epoch"], row["training_loss"], row["step"],
            f"{val_loss:.4f}" if val_loss is not None else "-",
        )

    model.eval()
    result = TrainResult(model=model, vocab=vocab, loss_log=loss_log, dropped_features=dropped)
    if out_dir is not None:
        meta = {"loss_log": loss_log, "base_model": config.base_model}
        result.checkpoint_dir = save_checkpoint(out_dir, model, vocab, meta)
    return result


def evaluate_loss(
    model: SpanModel, features: Sequence[TrainingFeature], pad_id: int, batch_size: int
) -> float:
    model.eval()
    losses = []
    sizes = []
    with torch.no_grad():
        order = list(range(len(features)))
        for batch in _batches(features, batch_size, order):
            losses.append(_batch_loss(model, batch, pad_id).item())
            sizes.append(len(batch))
    model.train()
    return sum(l * n for l, n in zip(losses, sizes)) / sum(sizes)


def pretrain_base(
    examples: Sequence[SpanExample],
    out_dir: str | Path,
    *,
    seed: int = 7,
    epochs: int = 30,
    learning_rate: float = 3e-4,
    **model_dims,
) -> TrainResult:
    """Build a base checkpoint from scratch on span extraction.

    Offline stand-in for a downloadable pretrained encoder: fine-tuning
    afterwards starts from structure-aware weights the way published
    setups start from a pretrained base.
    """
    config = TrainingConfig(
        learning_rate=learning_rate,
        seed=seed,
        epochs=epochs,
        base_model="scratch",
        lr_decay=True,
        **model_dims,
    )
    return train(config, examples, out_dir=out_dir)
