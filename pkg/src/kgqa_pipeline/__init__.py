"""Neuro-symbolic grounding pipeline for KGQA over DBLP-style datasets."""

from .backends import BackendConfig, RawModelOutput, simulate_mangle
from .dataset import QAInstance, QuadRecord, expand_paraphrases, load_quad_records
from .evaluation import EvalReport, QuestionScore, evaluate_run, score_question
from .grammar import diagnose_query, validate_query
from .grounding import (
    ContextString,
    EntityCandidate,
    TargetString,
    build_dev_context,
    build_final_context,
    build_target,
    serialize_entities,
)
from .pipeline import RunArtifact, RunConfig, load_el_candidates, run_pipeline
from .sanitizer import (
    SanitizedPrediction,
    SchemaVocabulary,
    sanitize_entities,
    sanitize_prediction,
    sanitize_query,
    split_output,
)
from .sparql_client import AnswerSet, EndpointConfig, SparqlClient, execute

__all__ = [
    "AnswerSet",
    "BackendConfig",
    "ContextString",
    "EndpointConfig",
    "EntityCandidate",
    "EvalReport",
    "QAInstance",
    "QuadRecord",
    "QuestionScore",
    "RawModelOutput",
    "RunArtifact",
    "RunConfig",
    "SanitizedPrediction",
    "SchemaVocabulary",
    "SparqlClient",
    "TargetString",
    "build_dev_context",
    "build_final_context",
    "build_target",
    "diagnose_query",
    "evaluate_run",
    "execute",
    "expand_paraphrases",
    "load_el_candidates",
    "load_quad_records",
    "run_pipeline",
    "sanitize_entities",
    "sanitize_prediction",
    "sanitize_query",
    "score_question",
    "serialize_entities",
    "simulate_mangle",
    "split_output",
    "validate_query",
]
