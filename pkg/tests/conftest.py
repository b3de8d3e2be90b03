import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from kgqa_pipeline.dataset import QuadRecord
from kgqa_pipeline.sanitizer import SchemaVocabulary

# the worked repair example: canonical query/entity and their damaged forms
CANONICAL_QUERY = (
    "select distinct ?answer where { ?answer "
    "<https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/00/2941> }"
)
MANGLED_QUERY = (
    "select distinct? answer where {? answer "
    "< https : / / dblp. org / rdf / schema # authoredby > "
    "< https : / / dblp. org / pid / 00 / 2941 > }"
)
CANONICAL_ENTITY = "<https://dblp.org/pid/00/2941>"
MANGLED_ENTITY = "< https : / / dblp. org / pid / 00 / 2941 >"
MANGLED_ENTITY_LIST = "['< https : / / dblp. org / pid / 00 / 2941 >']"


@pytest.fixture(scope="session")
def vocab() -> SchemaVocabulary:
    return SchemaVocabulary.default()


def make_record(
    rid="Q0001",
    question="who wrote the paper?",
    paraphrase="the paper was written by whom?",
    query=CANONICAL_QUERY,
    query_type="SINGLE_FACT",
    template_id="T01",
    entities=(CANONICAL_ENTITY,),
    relations=("<https://dblp.org/rdf/schema#authoredBy>",),
    temporal=False,
    held_out=False,
) -> QuadRecord:
    return QuadRecord(
        id=rid,
        question=question,
        paraphrased_question=paraphrase,
        query=query,
        query_type=query_type,
        template_id=template_id,
        entities=tuple(entities),
        relations=tuple(relations),
        temporal=temporal,
        held_out=held_out,
    )


@pytest.fixture
def record() -> QuadRecord:
    return make_record()


def record_json(record: QuadRecord) -> dict:
    return {
        "id": record.id,
        "question": record.question,
        "paraphrased_question": record.paraphrased_question,
        "query": record.query,
        "query_type": record.query_type,
        "template_id": record.template_id,
        "entities": list(record.entities),
        "relations": list(record.relations),
        "temporal": record.temporal,
        "held_out": record.held_out,
    }


class PredictStub:
    """Minimal model service speaking the /predict wire contract."""

    def __init__(self, answer="X", score=0.9):
        self.answer = answer
        self.score = score
        self.fail_statuses: list[int] = []
        self.request_count = 0
        self.delay = 0.0
        self._lock = threading.Lock()
        self._server = None
        self._thread = None

    def fail_next(self, count, status=500):
        self.fail_statuses.extend([status] * count)

    def __enter__(self):
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):
                pass

            def do_POST(self):
                import time

                with stub._lock:
                    stub.request_count += 1
                    status = stub.fail_statuses.pop(0) if stub.fail_statuses else 200
                if stub.delay:
                    time.sleep(stub.delay)
                length = int(self.headers.get("Content-Length", 0))
                self.rfile.read(length)
                if self.path != "/predict":
                    status = 404
                body = json.dumps(
                    {"answer": stub.answer, "score": stub.score}
                    if status == 200
                    else {"error": "injected"}
                ).encode()
                try:
                    self.send_response(status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                except (BrokenPipeError, ConnectionResetError):
                    pass  # client gave up (timeout tests)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    @property
    def url(self):
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"
