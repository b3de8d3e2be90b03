"""Compact uncased transformer encoder with a span-extraction head."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .tokenizer import Vocab


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    dim: int = 128
    layers: int = 2
    heads: int = 4
    ff_dim: int = 256
    max_len: int = 384
    window_stride: int = 128
    dropout: float = 0.0


class SpanModel(nn.Module):
    """Token, segment and bidirectional position embeddings, encoder stack,
    start/end head.

    Positions are embedded from both ends of the (unpadded) sequence;
    the reverse direction lets span boundaries anchored to the sequence
    tail stay decodable at any length.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.token_emb = nn.Embedding(config.vocab_size, config.dim)
        self.pos_emb = nn.Embedding(config.max_len, config.dim)
        self.rev_pos_emb = nn.Embedding(config.max_len, config.dim)
        self.seg_emb = nn.Embedding(2, config.dim)
        self.norm = nn.LayerNorm(config.dim)
        layer = nn.TransformerEncoderLayer(
            d_model=config.dim,
            nhead=config.heads,
            dim_feedforward=config.ff_dim,
            dropout=config.dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.layers)
        self.qa_head = nn.Linear(config.dim, 2)

    def forward(
        self,
        input_ids: torch.Tensor,  # (B, L)
        segment_ids: torch.Tensor,  # (B, L)
        pad_mask: torch.Tensor,  # (B, L) True where padding
        context_mask: torch.Tensor,  # (B, L) True where answer may live
    ) -> tuple[torch.Tensor, torch.Tensor]:
        length = input_ids.size(1)
        positions = torch.arange(length, device=input_ids.device).unsqueeze(0)
        seq_lens = (~pad_mask).sum(dim=1, keepdim=True)
        rev_positions = (seq_lens - 1 - positions).clamp(min=0)
        h = (
            self.token_emb(input_ids)
            + self.pos_emb(positions)
            + self.rev_pos_emb(rev_positions)
            + self.seg_emb(segment_ids)
        )
        h = self.norm(h)
        h = self.encoder(h, src_key_padding_mask=pad_mask)
        logits = self.qa_head(h)
        start_logits = logits[..., 0].masked_fill(~context_mask, float("-inf"))
        end_logits = logits[..., 1].masked_fill(~context_mask, float("-inf"))
        return start_logits, end_logits


def save_checkpoint(
    directory: str | Path, model: SpanModel, vocab: Vocab, meta: dict | None = None
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), directory / "weights.pt")
    vocab.save(directory / "vocab.json")
    (directory / "config.json").write_text(
        json.dumps(dataclasses.asdict(model.config), indent=2), encoding="utf-8"
    )
    (directory / "meta.json").write_text(
        json.dumps(meta or {}, indent=2, sort_keys=True), encoding="utf-8"
    )
    return directory


def load_checkpoint(directory: str | Path) -> tuple[SpanModel, Vocab, dict]:
    directory = Path(directory)
    config = ModelConfig(**json.loads((directory / "config.json").read_text()))
    vocab = Vocab.load(directory / "vocab.json")
    model = SpanModel(config)
    model.load_state_dict(torch.load(directory / "weights.pt", map_location="cpu"))
    model.eval()
    meta = {}
    meta_path = directory / "meta.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    return model, vocab, meta
