"""SPARQL 1.1 Protocol client with JSON-results parsing.

Queries go out as GET with a ``query`` parameter when the encoded form is
short, as form-encoded POST otherwise. Results normalize into AnswerSet
values: URI bindings become ``<uri>``, literals keep their lexical form,
multi-variable rows join with the ASCII unit separator. Invalid queries
are refused before any network traffic.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Optional
from urllib.parse import urlencode

import requests

from .errors import EndpointError, InvalidQueryRefused, RequestTimeout, ResultParseError
from .grammar import validate_query

RESULTS_JSON = "application/sparql-results+json"
GET_SIZE_LIMIT = 1500  # encoded bytes; larger queries switch to POST
ROW_JOIN = "\x1f"


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    timeout: float = 30.0
    max_retries: int = 3
    rate_limit: float = 4.0  # requests per second; <=0 disables

    def __post_init__(self):
        if "://" not in self.url:
            raise ValueError(f"endpoint url must be absolute: {self.url!r}")


@dataclass(frozen=True)
class AnswerSet:
    kind: str  # "bindings" | "boolean"
    values: frozenset[str]
    truth: Optional[bool] = None

    def __post_init__(self):
        if (self.kind == "boolean") != (self.truth is not None and not self.values):
            raise ValueError("boolean answers carry truth and no values")

    def comparable_values(self) -> frozenset[str]:
        """Values used for scoring; booleans compare as 'true'/'false'."""
        if self.kind == "boolean":
            return frozenset({"true" if self.truth else "false"})
        return self.values


class _RateLimiter:
    def __init__(self, per_second: float):
        self._interval = 1.0 / per_second if per_second > 0 else 0.0
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        if not self._interval:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if delay > 0:
            time.sleep(delay)


def parse_results(payload: dict) -> AnswerSet:
    """SPARQL JSON results -> AnswerSet."""
    if not isinstance(payload, dict):
        raise ResultParseError("response is not a JSON object")
    if "boolean" in payload:
        truth = payload["boolean"]
        if not isinstance(truth, bool):
            raise ResultParseError("boolean field is not a bool")
        return AnswerSet(kind="boolean", values=frozenset(), truth=truth)
    try:
        head_vars = payload.get("head", {}).get("vars", [])
        bindings = payload["results"]["bindings"]
    except (KeyError, TypeError, AttributeError):
        raise ResultParseError("missing results.bindings") from None
    if not isinstance(bindings, list):
        raise ResultParseError("results.bindings is not an array")

    values = set()
    for row in bindings:
        if not isinstance(row, dict):
            raise ResultParseError("binding row is not an object")
        row_vars = head_vars or sorted(row)
        cell_values = []
        for var in row_vars:
            cell = row.get(var)
            cell_values.append(_normalize_cell(cell) if cell is not None else "")
        values.add(ROW_JOIN.join(cell_values))
    return AnswerSet(kind="bindings", values=frozenset(values))


def _normalize_cell(cell) -> str:
    if not isinstance(cell, dict) or "value" not in cell:
        raise ResultParseError(f"malformed binding cell: {cell!r}")
    value = str(cell["value"])
    if cell.get("type") == "uri":
        return f"<{value}>"
    return value  # literal / bnode: lexical form, no datatype decoration


class SparqlClient:
    """Shareable, rate-limited endpoint client."""

    def __init__(self, config: EndpointConfig):
        self.config = config
        self._session = requests.Session()
        self._limiter = _RateLimiter(config.rate_limit)

    def execute(self, query: str) -> AnswerSet:
        if not validate_query(query):
            raise InvalidQueryRefused(query[:120])

        encoded = urlencode({"query": query})
        last_error: Exception | None = None
        timed_out = False
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(0.25 * 2 ** (attempt - 1))
            self._limiter.wait()
            try:
                if len(encoded) < GET_SIZE_LIMIT:
                    resp = self._session.get(
                        f"{self.config.url}?{encoded}",
                        headers={"Accept": RESULTS_JSON},
                        timeout=self.config.timeout,
                    )
                else:
                    resp = self._session.post(
                        self.config.url,
                        data=encoded,
                        headers={
                            "Accept": RESULTS_JSON,
                            "Content-Type": "application/x-www-form-urlencoded",
                        },
                        timeout=self.config.timeout,
                    )
            except requests.Timeout as exc:
                last_error, timed_out = exc, True
                continue
            except requests.RequestException as exc:
                last_error, timed_out = exc, False
                continue
            if resp.status_code == 200:
                try:
                    payload = resp.json()
                except ValueError as exc:
                    raise ResultParseError(str(exc)) from None
                return parse_results(payload)
            if 400 <= resp.status_code < 500:
                raise EndpointError(resp.status_code, resp.text)
            last_error = EndpointError(resp.status_code, resp.text)
            timed_out = False
        if timed_out:
            raise RequestTimeout(str(last_error))
        if isinstance(last_error, EndpointError):
            raise last_error
        raise EndpointError(0, str(last_error))


def execute(query: str, config: EndpointConfig) -> AnswerSet:
    """One-shot convenience wrapper around SparqlClient.execute."""
    return SparqlClient(config).execute(query)
