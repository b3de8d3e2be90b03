"""Model backends: deterministic oracles, a detokenization-damage simulator,
and an HTTP client for a remote answering service.

The remote wire contract: POST {endpoint}/predict with JSON
{"question": ..., "context": ...}; the service answers 200 with
{"answer": ..., "score": ...}. Anything else is BackendUnavailable.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional

import requests

from .errors import BackendUnavailable, MissingOracleTarget, RequestTimeout

# the characters wordpiece splitting tears out of URIs and variables
MANGLE_PUNCT = frozenset("<>?{}:/#.,")
# of those, the ones naive cleanup glues back onto the preceding token
_GLUE_LEFT = frozenset(".?,")
_SPECIAL_RE = re.compile(r"(\[SEP\]|\[CLS\])")

RETRY_BASE_DELAY = 0.25
RETRY_FACTOR = 2.0


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "oracle"  # oracle | oracle_mangled | remote
    endpoint: Optional[str] = None
    timeout: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 8

    def __post_init__(self):
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote backend requires an endpoint")


@dataclass(frozen=True)
class RawModelOutput:
    text: str
    backend_id: str
    latency_ms: float


def _mangle_segment(segment: str) -> str:
    segment = segment.lower()
    tokens: list[str] = []
    buf: list[str] = []
    for ch in segment:
        if ch.isspace():
            if buf:
                tokens.append("".join(buf))
                buf = []
        elif ch in MANGLE_PUNCT:
            if buf:
                tokens.append("".join(buf))
                buf = []
            tokens.append(ch)
        else:
            buf.append(ch)
    if buf:
        tokens.append("".join(buf))

    out: list[str] = []
    for tok in tokens:
        if tok in _GLUE_LEFT and out:
            out[-1] += tok
        else:
            out.append(tok)
    return " ".join(out)


def simulate_mangle(canonical: str) -> str:
    """Deterministic model of lowercase-wordpiece detokenization damage.

    Lowercases, splits out every punctuation character in MANGLE_PUNCT as
    its own token, re-joins with single spaces, then glues ``. ? ,`` back
    onto the preceding token (space after), uniformly. ``[SEP]`` and
    ``[CLS]`` pass through intact. Total and idempotent.
    """
    parts = _SPECIAL_RE.split(canonical)
    mangled = []
    for part in parts:
        if part in ("[SEP]", "[CLS]"):
            mangled.append(part)
        else:
            segment = _mangle_segment(part)
            if segment:
                mangled.append(segment)
    return " ".join(mangled)


class OracleBackend:
    """Returns the registered target string for an instance verbatim."""

    backend_id = "oracle"

    def __init__(self, targets: Optional[Mapping[str, str]] = None):
        self._targets = dict(targets or {})

    def register(self, instance_id: str, target: str) -> None:
        self._targets[instance_id] = target

    def register_all(self, targets: Mapping[str, str]) -> None:
        self._targets.update(targets)

    def _lookup(self, instance_id: str) -> str:
        try:
            return self._targets[instance_id]
        except KeyError:
            raise MissingOracleTarget(instance_id) from None

    def predict(self, instance_id: str, question: str, context: str) -> RawModelOutput:
        start = time.perf_counter()
        text = self._lookup(instance_id)
        return RawModelOutput(text, self.backend_id, (time.perf_counter() - start) * 1e3)


class MangledOracleBackend(OracleBackend):
    """Oracle whose output passes through the detokenization-damage model."""

    backend_id = "oracle_mangled"

    def predict(self, instance_id: str, question: str, context: str) -> RawModelOutput:
        start = time.perf_counter()
        text = simulate_mangle(self._lookup(instance_id))
        return RawModelOutput(text, self.backend_id, (time.perf_counter() - start) * 1e3)


class RemoteBackend:
    """Client for a served model speaking the /predict wire contract.

    Retries transport failures, timeouts and 5xx with exponential backoff
    (base 250 ms, factor 2); 4xx fails immediately. In-flight requests are
    bounded by a semaphore so concurrent callers cannot stampede the server.
    """

    backend_id = "remote"

    def __init__(self, config: BackendConfig):
        if not config.endpoint:
            raise ValueError("remote backend requires an endpoint")
        self._config = config
        self._url = config.endpoint.rstrip("/") + "/predict"
        self._session = requests.Session()
        self._gate = threading.Semaphore(config.max_in_flight)

    def predict(self, instance_id: str, question: str, context: str) -> RawModelOutput:
        payload = {"question": question, "context": context}
        start = time.perf_counter()
        last_error: Exception | None = None
        timed_out = False
        for attempt in range(self._config.max_retries + 1):
            if attempt:
                time.sleep(RETRY_BASE_DELAY * RETRY_FACTOR ** (attempt - 1))
            try:
                with self._gate:
                    resp = self._session.post(
                        self._url, json=payload, timeout=self._config.timeout
                    )
            except requests.Timeout as exc:
                last_error, timed_out = exc, True
                continue
            except requests.RequestException as exc:
                last_error, timed_out = exc, False
                continue
            if resp.status_code == 200:
                try:
                    answer = resp.json()["answer"]
                except (ValueError, KeyError) as exc:
                    raise BackendUnavailable(self._url, f"bad response body: {exc}")
                if not isinstance(answer, str):
                    raise BackendUnavailable(self._url, "answer field is not a string")
                latency = (time.perf_counter() - start) * 1e3
                return RawModelOutput(answer, self.backend_id, latency)
            last_error = BackendUnavailable(self._url, f"HTTP {resp.status_code}")
            if 400 <= resp.status_code < 500:
                break
            timed_out = False
        if timed_out:
            raise RequestTimeout(str(last_error))
        raise BackendUnavailable(self._url, str(last_error))


def make_backend(config: BackendConfig, targets: Optional[Mapping[str, str]] = None):
    if config.kind == "oracle":
        return OracleBackend(targets)
    if config.kind == "oracle_mangled":
        return MangledOracleBackend(targets)
    if config.kind == "remote":
        return RemoteBackend(config)
    raise ValueError(f"unknown backend kind {config.kind!r}")
