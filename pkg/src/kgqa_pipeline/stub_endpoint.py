"""A bundled SPARQL-protocol stub endpoint serving canned JSON results.

Speaks enough of the SPARQL 1.1 Protocol for tests and offline runs:
GET with a ``query`` parameter and form-encoded POST both resolve the
query string against a response table. Unknown queries get an empty
bindings result. Failure injection (``fail_next``) supports retry tests.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse


def bindings_response(var_names: list[str], rows: list[list[tuple[str, str]]]) -> dict:
    """Build a SPARQL JSON bindings payload.

    rows is a list of rows; each row is [(type, value), ...] matching
    var_names positionally, where type is "uri" or "literal".
    """
    bindings = []
    for row in rows:
        binding = {}
        for var, (vtype, value) in zip(var_names, row):
            binding[var] = {"type": vtype, "value": value}
        bindings.append(binding)
    return {"head": {"vars": var_names}, "results": {"bindings": bindings}}


def boolean_response(truth: bool) -> dict:
    return {"head": {}, "boolean": truth}


EMPTY_RESULT = {"head": {"vars": ["answer"]}, "results": {"bindings": []}}


class StubSparqlEndpoint:
    """Context-managed local endpoint backed by a query->payload table."""

    def __init__(self, responses: Optional[dict[str, dict]] = None, host: str = "127.0.0.1"):
        self.responses = dict(responses or {})
        self.requests_seen: list[str] = []
        self._host = host
        self._fail_queue: list[int] = []
        self._lock = threading.Lock()
        self._server: Optional[ThreadingHTTPServer] = None
        self._thread: Optional[threading.Thread] = None

    # --- test hooks ---

    def fail_next(self, count: int, status: int = 500) -> None:
        with self._lock:
            self._fail_queue.extend([status] * count)

    def add_response(self, query: str, payload: dict) -> None:
        self.responses[query] = payload

    @property
    def request_count(self) -> int:
        return len(self.requests_seen)

    # --- lifecycle ---

    def __enter__(self) -> "StubSparqlEndpoint":
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):  # keep test output quiet
                pass

            def _reply(self, status: int, payload: dict) -> None:
                body = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/sparql-results+json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def _serve(self, query: Optional[str]) -> None:
                with stub._lock:
                    injected = stub._fail_queue.pop(0) if stub._fail_queue else None
                    if query is not None:
                        stub.requests_seen.append(query)
                if injected is not None:
                    self._reply(injected, {"error": "injected failure"})
                    return
                if query is None:
                    self._reply(400, {"error": "missing query parameter"})
                    return
                self._reply(200, stub.responses.get(query, EMPTY_RESULT))

            def do_GET(self):
                params = parse_qs(urlparse(self.path).query)
                query = params.get("query", [None])[0]
                self._serve(query)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                params = parse_qs(self.rfile.read(length).decode("utf-8"))
                query = params.get("query", [None])[0]
                self._serve(query)

        self._server = ThreadingHTTPServer((self._host, 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        if self._server:
            self._server.shutdown()
            self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    @property
    def url(self) -> str:
        assert self._server is not None, "endpoint not started"
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/sparql"
