"""Exception types shared across the pipeline stages."""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PipelineError):
    """Invalid or incomplete run configuration (CLI exit code 1)."""


# --- dataset loading ---

class MalformedRecord(PipelineError):
    def __init__(self, index: int, field: str, detail: str = ""):
        self.index = index
        self.field = field
        msg = f"record #{index}: bad or missing field {field!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DuplicateId(PipelineError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"duplicate record id {record_id!r}")


class InvalidEntityUri(PipelineError):
    def __init__(self, owner: str, value: str):
        self.owner = owner
        self.value = value
        super().__init__(f"{owner}: {value!r} is not an angle-bracketed absolute URI")


class MissingParaphrase(PipelineError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"record {record_id!r} has no paraphrased_question")


# --- grounding ---

class IncompleteRecord(PipelineError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"record field {field!r} required for grounding is absent")


class ReservedToken(PipelineError):
    def __init__(self, field: str, token: str):
        self.field = field
        self.token = token
        super().__init__(f"field {field!r} contains reserved token {token}")


class NoCandidates(PipelineError):
    def __init__(self, instance_id: str = ""):
        self.instance_id = instance_id
        super().__init__(f"no entity-linker candidates for {instance_id!r}")


# --- model backends ---

class BackendUnavailable(PipelineError):
    def __init__(self, endpoint: str, detail: str = ""):
        self.endpoint = endpoint
        super().__init__(f"backend {endpoint} unavailable" + (f": {detail}" if detail else ""))


class MissingOracleTarget(PipelineError):
    def __init__(self, instance_id: str):
        self.instance_id = instance_id
        super().__init__(f"no oracle target registered for instance {instance_id!r}")


class RequestTimeout(PipelineError):
    """An HTTP request (backend or endpoint) timed out after all retries."""


# --- sanitizer ---

class MissingSeparator(PipelineError):
    """Raw model output contains no [SEP]; the prediction is unusable as-is."""


class UnbalancedAngleBrackets(PipelineError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"unmatched '<' at offset {position}")


# --- SPARQL client ---

class InvalidQueryRefused(PipelineError):
    """Query failed grammar validation; no network call was made."""


class EndpointError(PipelineError):
    def __init__(self, status: int, body: str = ""):
        self.status = status
        self.body = body[:200]
        super().__init__(f"endpoint returned HTTP {status}: {self.body}")


class ResultParseError(PipelineError):
    """Endpoint response was not valid SPARQL JSON results."""


# --- evaluation / orchestration ---

class JoinError(PipelineError):
    def __init__(self, instance_id: str):
        self.instance_id = instance_id
        super().__init__(f"prediction {instance_id!r} has no matching gold record")


class MissingGoldAnswers(PipelineError):
    """Neither the endpoint nor the cache could supply gold answer sets."""


class MalformedCandidate(PipelineError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        super().__init__(f"candidates line {line}: {detail or 'malformed'}")
