"""HTTP serving of a trained span model.

Wire contract: POST /predict with {"question": str, "context": str}
answers 200 {"answer": str, "score": float}; malformed bodies get 400;
GET /health answers 200 once the model is loaded, 503 before that.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from pathlib import Path
from typing import Optional

import torch
import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .features import build_windows
from .model import SpanModel, load_checkpoint
from .tokenizer import Vocab

logger = logging.getLogger(__name__)


class InferenceEngine:
    """Sliding-window span prediction over a loaded checkpoint."""

    def __init__(self, model: SpanModel, vocab: Vocab):
        self.model = model.eval()
        self.vocab = vocab
        self._lock = threading.Lock()  # model forward is not reentrant-safe

    @classmethod
    def from_checkpoint(cls, directory: str | Path) -> "InferenceEngine":
        model, vocab, _ = load_checkpoint(directory)
        return cls(model, vocab)

    def predict(self, question: str, context: str) -> tuple[str, float]:
        config = self.model.config
        windows = build_windows(question, context, config.max_len, config.window_stride)
        best_answer = ""
        best_score = 0.0
        with self._lock, torch.no_grad():
            for window in windows:
                if not window.context_tokens:
                    continue
                input_ids = torch.tensor(
                    [self.vocab.encode_texts(window.input_tokens)], dtype=torch.long
                )
                segment_ids = torch.tensor([window.segment_ids], dtype=torch.long)
                pad_mask = torch.zeros_like(input_ids, dtype=torch.bool)
                context_mask = torch.tensor([window.context_mask], dtype=torch.bool)
                start_logits, end_logits = self.model(
                    input_ids, segment_ids, pad_mask, context_mask
                )
                start_probs = torch.softmax(start_logits[0], dim=-1)
                end_probs = torch.softmax(end_logits[0], dim=-1)
                score, start, end = _best_pair(start_probs, end_probs)
                if score > best_score:
                    lo = window.context_offset
                    tok_start = window.context_tokens[start - lo]
                    tok_end = window.context_tokens[end - lo]
                    best_answer = context[tok_start.start : tok_end.end]
                    best_score = score
        return best_answer, best_score


def _best_pair(start_probs: torch.Tensor, end_probs: torch.Tensor) -> tuple[float, int, int]:
    """Highest p(start)*p(end) with start <= end."""
    # running max of start prob up to each end position
    best = (0.0, 0, 0)
    running_idx = 0
    running_p = 0.0
    for end in range(len(end_probs)):
        p_start = start_probs[end].item()
        if p_start > running_p:
            running_p = p_start
            running_idx = end
        score = running_p * end_probs[end].item()
        if score > best[0]:
            best = (score, running_idx, end)
    return best


def create_app(
    checkpoint_dir: Optional[str | Path] = None,
    engine: Optional[InferenceEngine] = None,
    load_async: bool = False,
) -> FastAPI:
    app = FastAPI(title="span-model server")
    app.state.engine = engine

    def load() -> None:
        app.state.engine = InferenceEngine.from_checkpoint(checkpoint_dir)
        logger.info("checkpoint loaded from %s", checkpoint_dir)

    if engine is None and checkpoint_dir is not None:
        if load_async:
            threading.Thread(target=load, daemon=True).start()
        else:
            load()

    @app.get("/health")
    def health():
        if app.state.engine is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        return {"status": "ok"}

    @app.post("/predict")
    async def predict(request: Request):
        if app.state.engine is None:
            return JSONResponse({"error": "model still loading"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        if not isinstance(body, dict):
            return JSONResponse({"error": "body must be an object"}, status_code=400)
        question = body.get("question")
        context = body.get("context")
        if not isinstance(question, str) or not isinstance(context, str):
            return JSONResponse(
                {"error": "question and context must be strings"}, status_code=400
            )
        answer, score = app.state.engine.predict(question, context)
        return {"answer": answer, "score": score}

    return app


class ThreadedServer:
    """Run the app on a real socket in a daemon thread (tests, demos)."""

    def __init__(self, app: FastAPI, host: str = "127.0.0.1"):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, 0))
        self.host = host
        self.port = self._sock.getsockname()[1]
        config = uvicorn.Config(app, log_level="warning", access_log=False)
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(
            target=self._server.run, kwargs={"sockets": [self._sock]}, daemon=True
        )

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def __enter__(self) -> "ThreadedServer":
        self._thread.start()
        deadline = time.time() + 15
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("server failed to start")
            time.sleep(0.02)
        return self

    def __exit__(self, *exc) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)


def serve(checkpoint_dir: str | Path, host: str = "0.0.0.0", port: int = 8700) -> None:
    app = create_app(checkpoint_dir=checkpoint_dir, load_async=True)
    uvicorn.run(app, host=host, port=port)
