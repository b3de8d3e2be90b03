"""Featurization: pack (question, context) into model windows.

Packing: <q> question-tokens <ctx> context-window-tokens. Contexts longer
than the input budget slide with a fixed stride; during training only
windows containing the whole answer span are kept, at inference every
window competes and the best-scoring span wins.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tokenizer import (
    CONTEXT_MARKER,
    QUESTION_MARKER,
    Token,
    Vocab,
    char_span_to_token_span,
    tokenize,
)


@dataclass(frozen=True)
class Window:
    input_tokens: list[str]
    segment_ids: list[int]
    context_mask: list[bool]
    context_tokens: list[Token]  # original-context tokens inside this window
    context_offset: int  # packed index of the first context token
    window_start: int  # index into the full context token list


def build_windows(question: str, context: str, max_len: int, stride: int) -> list[Window]:
    q_tokens = tokenize(question)
    c_tokens = tokenize(context)

    head = [QUESTION_MARKER] + [t.text for t in q_tokens] + [CONTEXT_MARKER]
    budget = max_len - len(head)
    if budget < 1:
        # degenerate question longer than the input: keep the tail
        head = head[: max_len - 1] + [CONTEXT_MARKER]
        budget = 1

    windows = []
    start = 0
    while True:
        chunk = c_tokens[start : start + budget]
        tokens = head + [t.text for t in chunk]
        segs = [0] * len(head) + [1] * len(chunk)
        mask = [False] * len(head) + [True] * len(chunk)
        windows.append(
            Window(
                input_tokens=tokens,
                segment_ids=segs,
                context_mask=mask,
                context_tokens=chunk,
                context_offset=len(head),
                window_start=start,
            )
        )
        if start + budget >= len(c_tokens):
            break
        start += stride
    return windows


@dataclass(frozen=True)
class TrainingFeature:
    input_ids: list[int]
    segment_ids: list[int]
    context_mask: list[bool]
    start_position: int  # packed index
    end_position: int


def featurize_example(
    vocab: Vocab,
    question: str,
    context: str,
    char_start: int,
    char_end: int,
    max_len: int,
    stride: int,
) -> TrainingFeature | None:
    """First window fully containing the answer span, or None."""
    c_tokens = tokenize(context)
    span = char_span_to_token_span(c_tokens, char_start, char_end)
    if span is None:
        return None
    first, last = span
    for window in build_windows(question, context, max_len, stride):
        lo = window.window_start
        hi = window.window_start + len(window.context_tokens)
        if lo <= first and last < hi:
            return TrainingFeature(
                input_ids=vocab.encode_texts(window.input_tokens),
                segment_ids=window.segment_ids,
                context_mask=window.context_mask,
                start_position=window.context_offset + (first - lo),
                end_position=window.context_offset + (last - lo),
            )
    return None
