"""HTTP chat backend: per-session orchestration of the question pipeline.

Each ask runs translate -> parse -> evaluate (embedded engine or a remote
SPARQL endpoint) and returns the full trace: the generated query is always
part of the answer so any result can be re-checked independently. Domain
failures are answers with a status, not transport errors.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .gateway import (
    Provider,
    ProviderConfig,
    ProviderError,
    TranslationResult,
    make_provider,
    translate,
)
from .partition import CommentPolicy, PartitionedOntology, apply_comment_policy, partition, render_prompt_tbox
from .rdf import Graph, Iri, OWL_CLASS, RDFS_COMMENT, RDF_TYPE, term_text
from .sparql import (
    EndpointHttpError,
    EndpointUnreachable,
    MalformedResults,
    QuerySyntaxError,
    ResultSet,
    UnsupportedSparqlFeature,
    evaluate,
    execute_remote,
    parse_query,
)
from .turtle import parse_turtle

STATUS_ANSWERED = "Answered"
STATUS_EMPTY = "EmptyResult"
STATUS_TRANSLATION_FAILED = "TranslationFailed"
STATUS_EXECUTION_FAILED = "ExecutionFailed"


@dataclass
class ServiceConfig:
    ontology_dir: Path
    provider: ProviderConfig
    endpoint_mode: str = "embedded"  # embedded | remote
    endpoint_url: str | None = None
    port: int = 8080
    history_file: Path | None = None
    max_attempts: int = 3
    concurrency: int = 4
    ui_dir: Path | None = None

    @staticmethod
    def from_file(path: str | Path) -> "ServiceConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        base = Path(path).resolve().parent

        def resolve(p):
            return None if p is None else (base / p if not Path(p).is_absolute() else Path(p))

        endpoint = data.get("endpoint", {"mode": "embedded"})
        return ServiceConfig(
            ontology_dir=resolve(data["ontology_dir"]),
            provider=ProviderConfig.from_dict(_resolve_provider_paths(data["provider"], base)),
            endpoint_mode=endpoint.get("mode", "embedded"),
            endpoint_url=endpoint.get("url"),
            port=int(data.get("port", 8080)),
            history_file=resolve(data.get("history_file")),
            max_attempts=int(data.get("max_attempts", 3)),
            concurrency=int(data.get("concurrency", 4)),
            ui_dir=resolve(data.get("ui_dir")),
        )


def _resolve_provider_paths(provider: dict, base: Path) -> dict:
    out = dict(provider)
    for key in ("mapping", "corpus", "cassette"):
        if out.get(key) and not Path(out[key]).is_absolute():
            out[key] = str(base / out[key])
    return out


@dataclass
class OntologyEntry:
    id: str
    graph: Graph
    part: PartitionedOntology
    tbox_text: dict[bool, str]
    individuals: set[str]

    @property
    def class_count(self) -> int:
        return len(self.graph.match(None, Iri(RDF_TYPE), Iri(OWL_CLASS)))

    @property
    def has_comments(self) -> bool:
        return len(self.graph.match(None, Iri(RDFS_COMMENT), None)) > 0


def load_registry(ontology_dir: Path) -> dict[str, OntologyEntry]:
    registry: dict[str, OntologyEntry] = {}
    for path in sorted(Path(ontology_dir).glob("*.ttl")):
        graph, _ = parse_turtle(path.read_text(encoding="utf-8"))
        part = partition(graph)
        tbox_text = {
            comments: render_prompt_tbox(apply_comment_policy(
                part.tbox, CommentPolicy.RETAIN if comments else CommentPolicy.STRIP))
            for comments in (False, True)
        }
        registry[path.stem] = OntologyEntry(path.stem, graph, part, tbox_text,
                                            part.individual_iris())
    return registry


@dataclass
class AnswerRecord:
    question: str
    translation: TranslationResult
    status: str
    results: ResultSet | None = None
    error: str | None = None
    answer_rows: dict | None = None

    @property
    def generated_query(self) -> str | None:
        return self.translation.final_query

    def to_json(self) -> dict:
        return {
            "question": self.question,
            "status": self.status,
            "generated_query": self.generated_query,
            "generated_queries": list(self.translation.final_queries),
            "translation": self.translation.to_json(),
            "results": self.results.to_json() if self.results is not None else None,
            "error": self.error,
            "answer_rows": self.answer_rows,
        }


def _render_answer_rows(results: ResultSet, prefixes: dict[str, str]) -> dict:
    if results.is_boolean:
        return {"type": "boolean", "value": results.boolean}
    rows = [[term_text(row[v], prefixes) if v in row else "" for v in results.variables]
            for row in results.rows]
    return {"type": "table", "columns": list(results.variables), "rows": rows}


def answer_question(entry: OntologyEntry, comments: bool, question: str,
                    provider: Provider, *, max_attempts: int = 3,
                    endpoint_url: str | None = None) -> AnswerRecord:
    """Full pipeline for one question against one ontology condition."""
    translation = translate(question, entry.tbox_text[comments], provider,
                            max_attempts=max_attempts, forbidden_iris=entry.individuals,
                            meta={"ontology_id": entry.id, "comments": comments})
    if not translation.succeeded:
        return AnswerRecord(question, translation, STATUS_TRANSLATION_FAILED)
    query = translation.final_query
    try:
        if endpoint_url:
            results = execute_remote(endpoint_url, query)
        else:
            results = evaluate(parse_query(query), entry.part.abox)
    except (EndpointUnreachable, EndpointHttpError, MalformedResults,
            QuerySyntaxError, UnsupportedSparqlFeature) as exc:
        return AnswerRecord(question, translation, STATUS_EXECUTION_FAILED, error=str(exc))
    status = STATUS_ANSWERED if results.is_boolean or results.rows else STATUS_EMPTY
    return AnswerRecord(question, translation, status, results=results,
                        answer_rows=_render_answer_rows(results, entry.graph.prefixes))


@dataclass
class Session:
    id: str
    ontology_id: str
    comments: bool
    created_at: float = field(default_factory=time.time)
    history: list[AnswerRecord] = field(default_factory=list)


class SessionStore:
    """In-memory sessions with optional append-only JSON-lines history."""

    def __init__(self, history_file: Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._history_file = history_file

    def create(self, ontology_id: str, comments: bool) -> Session:
        session = Session(uuid.uuid4().hex, ontology_id, comments)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)

    def append(self, session: Session, record: AnswerRecord) -> None:
        with self._lock:
            session.history.append(record)
            if self._history_file:
                line = json.dumps({"session_id": session.id, "record": record.to_json()},
                                  sort_keys=True)
                with open(self._history_file, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")


class CreateSessionBody(BaseModel):
    ontology_id: str
    comments: bool = True


class AskBody(BaseModel):
    question: str


def create_app(config: ServiceConfig) -> FastAPI:
    registry = load_registry(config.ontology_dir)
    provider = make_provider(config.provider)
    store = SessionStore(config.history_file)
    provider_slots = threading.Semaphore(max(1, config.concurrency))

    app = FastAPI(title="ontochat")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/ontologies")
    def ontologies():
        return [
            {
                "id": entry.id,
                "class_count": entry.class_count,
                "individual_count": len(entry.individuals),
                "has_comments": entry.has_comments,
            }
            for entry in registry.values()
        ]

    @app.post("/api/sessions")
    def create_session(body: CreateSessionBody):
        if body.ontology_id not in registry:
            raise HTTPException(404, f"unknown ontology {body.ontology_id!r}")
        session = store.create(body.ontology_id, body.comments)
        return {"session_id": session.id}

    @app.post("/api/sessions/{session_id}/ask")
    def ask(session_id: str, body: AskBody):
        session = store.get(session_id)
        if session is None:
            raise HTTPException(404, "unknown session")
        if not body.question.strip():
            raise HTTPException(422, "question must not be empty")
        entry = registry[session.ontology_id]
        try:
            with provider_slots:
                record = answer_question(
                    entry, session.comments, body.question, provider,
                    max_attempts=config.max_attempts,
                    endpoint_url=config.endpoint_url if config.endpoint_mode == "remote" else None,
                )
        except ProviderError as exc:
            raise HTTPException(502, f"provider error: {exc}")
        store.append(session, record)
        return record.to_json()

    @app.get("/api/sessions/{session_id}/history")
    def history(session_id: str):
        session = store.get(session_id)
        if session is None:
            raise HTTPException(404, "unknown session")
        return [record.to_json() for record in session.history]

    if config.ui_dir and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(config.ui_dir), html=True), name="ui")

    return app
