"""Uncased word-level tokenizer with character offsets.

The structural markers ``[SEP]`` and ``[CLS]`` stay single tokens; other
text lowercases and splits on whitespace with every punctuation character
becoming its own token. Offsets always refer to the original string so
predicted token spans map back to exact substrings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

PAD = "<pad>"
UNK = "<unk>"
QUESTION_MARKER = "<q>"
CONTEXT_MARKER = "<ctx>"
SPECIALS = (PAD, UNK, QUESTION_MARKER, CONTEXT_MARKER)

_MARKER_RE = re.compile(r"\[SEP\]|\[CLS\]")
# letter runs stay words; digits split singly so numbers never go
# out-of-vocabulary; punctuation is one token per character
_WORD_RE = re.compile(r"[A-Za-z_]+|[0-9]|[^\sA-Za-z0-9_]")


@dataclass(frozen=True)
class Token:
    text: str
    start: int  # char offset into the original string
    end: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    for marker in _MARKER_RE.finditer(text):
        tokens.extend(_split_words(text, pos, marker.start()))
        tokens.append(Token(marker.group(0), marker.start(), marker.end()))
        pos = marker.end()
    tokens.extend(_split_words(text, pos, len(text)))
    return tokens


def _split_words(text: str, start: int, end: int) -> list[Token]:
    return [
        Token(m.group(0).lower(), start + m.start(), start + m.end())
        for m in _WORD_RE.finditer(text[start:end])
    ]


class Vocab:
    def __init__(self, tokens: list[str]):
        self.itos = list(SPECIALS) + [t for t in tokens if t not in SPECIALS]
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @property
    def pad_id(self) -> int:
        return self.stoi[PAD]

    def encode(self, tokens: list[Token]) -> list[int]:
        return self.encode_texts([t.text for t in tokens])

    def encode_texts(self, texts: list[str]) -> list[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(t, unk) for t in texts]

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        seen: dict[str, None] = {}
        for text in texts:
            for token in tokenize(text):
                seen.setdefault(token.text, None)
        return cls(sorted(seen))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.itos), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        itos = json.loads(Path(path).read_text(encoding="utf-8"))
        vocab = cls.__new__(cls)
        vocab.itos = itos
        vocab.stoi = {t: i for i, t in enumerate(itos)}
        return vocab


def char_span_to_token_span(
    tokens: list[Token], char_start: int, char_end: int
) -> tuple[int, int] | None:
    """Smallest [first, last] token range covering [char_start, char_end)."""
    first = None
    last = None
    for i, tok in enumerate(tokens):
        if tok.end > char_start and tok.start < char_end:
            if first is None:
                first = i
            last = i
    if first is None or last is None:
        return None
    return first, last
