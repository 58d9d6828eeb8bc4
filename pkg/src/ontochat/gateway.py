"""Question-to-SPARQL translation: prompt assembly, pluggable providers
(HTTP chat, mock table, replay cassette), query extraction from raw model
output, and a bounded repair loop fed by parser error messages.

Prompts carry only schema text. Assembly re-checks that no data-side
individual IRI leaks into the rendered prompt.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Protocol

import requests

from .sparql import QuerySyntaxError, UnsupportedSparqlFeature, parse_query

PROMPT_TEMPLATE_VERSION = "v1"


class EmptyQuestion(Exception):
    pass


class NoQueryFound(Exception):
    pass


class PrivacyViolation(Exception):
    pass


class ProviderError(Exception):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(detail)


def _load_template() -> str:
    ref = resources.files("ontochat") / "assets" / f"prompt_template_{PROMPT_TEMPLATE_VERSION}.txt"
    return ref.read_text(encoding="utf-8")


@dataclass(frozen=True)
class PromptBundle:
    system_instructions: str
    tbox_text: str
    question: str

    def user_content(self) -> str:
        return (
            "=== ONTOLOGY SCHEMA (Turtle) ===\n"
            f"{self.tbox_text}\n"
            "=== QUESTION ===\n"
            f"{self.question}\n"
        )

    def render(self) -> str:
        return f"{self.system_instructions}\n\n{self.user_content()}"

    def sha256(self) -> str:
        return hashlib.sha256(self.render().encode("utf-8")).hexdigest()


_PREFIX_LINE = re.compile(r"^@prefix\s+(\S*):\s+<([^>]*)>\s+\.\s*$", re.MULTILINE)


def _prefix_table(tbox_text: str) -> str:
    rows = [f"  {m.group(1)}: <{m.group(2)}>" for m in _PREFIX_LINE.finditer(tbox_text)]
    return "\n".join(rows) if rows else "  (none declared)"


def assemble_prompt(tbox_text: str, question: str, *, expected_queries: int = 1,
                    feedback: tuple[str, str] | None = None,
                    forbidden_iris: Iterable[str] = ()) -> PromptBundle:
    """Build the deterministic prompt bundle. `feedback` is the
    (prior query, parse error) pair appended on repair attempts."""
    if not question.strip():
        raise EmptyQuestion("question must not be empty")
    if expected_queries == 1:
        contract = "Output exactly one SPARQL query in a fenced code block."
        plural = ""
    else:
        contract = (f"The question contains {expected_queries} sub-questions. Output exactly "
                    f"{expected_queries} SPARQL queries, each in its own fenced code block, "
                    "in the order the sub-questions are asked.")
        plural = "s"
    instructions = _load_template().format(
        output_contract=contract, plural=plural, prefix_table=_prefix_table(tbox_text))
    final_question = question
    if feedback is not None:
        prior, error = feedback
        shown = prior if prior else "(no query could be extracted from the response)"
        final_question = (
            f"{question}\n\n"
            "A previous attempt produced this output:\n"
            f"{shown}\n"
            f"It was rejected: {error}\n"
            "Correct the mistake and answer again following the rules above."
        )
    bundle = PromptBundle(instructions, tbox_text, final_question)
    rendered = bundle.render()
    leaked = sorted(iri for iri in forbidden_iris if iri in rendered)
    if leaked:
        raise PrivacyViolation(f"prompt would contain data-side IRIs: {', '.join(leaked[:5])}")
    return bundle


# --- extracting queries from raw responses ---------------------------------

_FENCE = re.compile(r"```[ \t]*[A-Za-z0-9_-]*[ \t]*\r?\n(.*?)```", re.DOTALL)
_QUERY_START = re.compile(r"\b(PREFIX|SELECT|ASK)\b", re.IGNORECASE)
_TRAILING_MODIFIERS = re.compile(
    r"^(?:\s*(?:ORDER\s+BY(?:\s+(?:ASC|DESC)\s*\(\s*[^()]*\s*\)|\s+\?[A-Za-z_]\w*)+|"
    r"LIMIT\s+\d+|OFFSET\s+\d+))*",
    re.IGNORECASE,
)


def extract_query_blocks(raw_response: str) -> list[str]:
    """All fenced code blocks, stripped; empty list when none."""
    return [m.group(1).strip() for m in _FENCE.finditer(raw_response) if m.group(1).strip()]


def _trim_after_pattern(text: str) -> str:
    last_brace = text.rfind("}")
    if last_brace == -1:
        return text.strip()
    tail = text[last_brace + 1:]
    kept = _TRAILING_MODIFIERS.match(tail)
    return (text[:last_brace + 1] + (kept.group(0) if kept else "")).strip()


def extract_query(raw_response: str) -> str:
    """First fenced block; otherwise from the first query keyword onward,
    trimming prose after the pattern and its modifiers."""
    blocks = extract_query_blocks(raw_response)
    if blocks:
        return blocks[0]
    m = _QUERY_START.search(raw_response)
    if not m:
        raise NoQueryFound("response contains no fenced code block and no query keyword")
    return _trim_after_pattern(raw_response[m.start():])


# --- providers --------------------------------------------------------------

class Provider(Protocol):
    def complete(self, bundle: PromptBundle, meta: dict) -> str: ...


@dataclass
class ProviderConfig:
    kind: str  # http_chat | mock | replay
    url: str | None = None
    model: str | None = None
    auth_header: str | None = None
    auth_env: str | None = None
    temperature: float = 0.0
    mapping_path: str | None = None
    corpus_path: str | None = None
    cassette_path: str | None = None

    @staticmethod
    def from_dict(data: dict) -> "ProviderConfig":
        kind = data.get("kind")
        if kind not in ("http_chat", "mock", "replay"):
            raise ValueError(f"unknown provider kind {kind!r}")
        return ProviderConfig(
            kind=kind,
            url=data.get("url"),
            model=data.get("model"),
            auth_header=data.get("auth_header"),
            auth_env=data.get("auth_env"),
            temperature=float(data.get("temperature", 0.0)),
            mapping_path=data.get("mapping"),
            corpus_path=data.get("corpus"),
            cassette_path=data.get("cassette"),
        )

    @staticmethod
    def from_file(path: str | Path) -> "ProviderConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if "provider" in data:
            data = data["provider"]
        return ProviderConfig.from_dict(data)


class MockProvider:
    """Answers from a {question_id: query or [queries]} table, wrapping each
    query in a fenced block. The id comes from call metadata or, failing
    that, from an exact question-text lookup against a corpus index."""

    def __init__(self, mapping: dict[str, str | list[str]],
                 text_index: dict[str, str] | None = None):
        self.mapping = mapping
        self.text_index = text_index or {}

    @staticmethod
    def from_files(mapping_path: str | Path, corpus_path: str | Path | None = None) -> "MockProvider":
        mapping = json.loads(Path(mapping_path).read_text(encoding="utf-8"))
        text_index = {}
        if corpus_path is not None:
            for record in json.loads(Path(corpus_path).read_text(encoding="utf-8")):
                text_index[record["text"]] = record["id"]
        return MockProvider(mapping, text_index)

    def complete(self, bundle: PromptBundle, meta: dict) -> str:
        question_id = meta.get("question_id")
        if question_id is None:
            question = _original_question(bundle.question)
            question_id = self.text_index.get(question)
        if question_id is None or question_id not in self.mapping:
            raise ProviderError(f"mock provider has no entry for question {question_id!r}")
        value = self.mapping[question_id]
        queries = value if isinstance(value, list) else [value]
        return "\n\n".join(f"```sparql\n{q}\n```" for q in queries)


def _original_question(question: str) -> str:
    # Repair attempts append feedback below the question; the first block of
    # lines up to a blank line is the verbatim user text.
    return question.split("\n\n", 1)[0]


class ReplayProvider:
    """Replays recorded responses keyed by the prompt hash. Entries with the
    same hash are consumed in file order; a miss is an error, never a live
    call."""

    def __init__(self, entries: list[dict]):
        self.entries = [dict(e) for e in entries]
        self._used = [False] * len(self.entries)
        self._lock = threading.Lock()

    @staticmethod
    def from_file(path: str | Path) -> "ReplayProvider":
        return ReplayProvider(json.loads(Path(path).read_text(encoding="utf-8")))

    def complete(self, bundle: PromptBundle, meta: dict) -> str:
        digest = bundle.sha256()
        with self._lock:
            for i, entry in enumerate(self.entries):
                if not self._used[i] and entry["prompt_hash"] == digest:
                    self._used[i] = True
                    return entry["response_text"]
        raise ProviderError(f"cassette has no response for prompt {digest[:12]}…")


class HttpChatProvider:
    """Minimal chat-completion client: one system plus one user message,
    first choice text back."""

    def __init__(self, config: ProviderConfig, timeout: float = 60.0):
        if not config.url or not config.model:
            raise ValueError("http_chat provider needs url and model")
        self.config = config
        self.timeout = timeout

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_header:
            if not self.config.auth_env or self.config.auth_env not in os.environ:
                raise ProviderError(
                    f"auth env var {self.config.auth_env!r} is not set")
            headers[self.config.auth_header] = os.environ[self.config.auth_env]
        return headers

    def complete(self, bundle: PromptBundle, meta: dict) -> str:
        body = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": bundle.system_instructions},
                {"role": "user", "content": bundle.user_content()},
            ],
            "temperature": self.config.temperature,
        }
        try:
            response = requests.post(self.config.url, json=body, headers=self._headers(),
                                     timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderError(f"provider unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(f"provider returned HTTP {response.status_code}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc


class RecordingProvider:
    """Wraps a provider and keeps (prompt_hash, response, prompt text) for
    every call; `cassette()` turns the log into replayable entries."""

    def __init__(self, inner: Provider):
        self.inner = inner
        self.calls: list[dict] = []
        self._lock = threading.Lock()

    def complete(self, bundle: PromptBundle, meta: dict) -> str:
        response = self.inner.complete(bundle, meta)
        with self._lock:
            self.calls.append({
                "prompt_hash": bundle.sha256(),
                "prompt_text": bundle.render(),
                "response_text": response,
                "meta": dict(meta),
            })
        return response

    def cassette(self) -> list[dict]:
        return [{"prompt_hash": c["prompt_hash"], "response_text": c["response_text"]}
                for c in self.calls]

    def prompts(self) -> list[str]:
        return [c["prompt_text"] for c in self.calls]


class ScriptedProvider:
    """Calls a plain function (bundle, meta) -> response; handy for building
    cassettes and tests."""

    def __init__(self, responder: Callable[[PromptBundle, dict], str]):
        self.responder = responder

    def complete(self, bundle: PromptBundle, meta: dict) -> str:
        return self.responder(bundle, meta)


def make_provider(config: ProviderConfig) -> Provider:
    if config.kind == "mock":
        if not config.mapping_path:
            raise ValueError("mock provider needs a mapping path")
        return MockProvider.from_files(config.mapping_path, config.corpus_path)
    if config.kind == "replay":
        if not config.cassette_path:
            raise ValueError("replay provider needs a cassette path")
        return ReplayProvider.from_file(config.cassette_path)
    return HttpChatProvider(config)


# --- translation loop --------------------------------------------------------

@dataclass
class Attempt:
    prompt_bytes_hash: str
    raw_response: str
    extracted_query: str | None = None
    parse_error: str | None = None

    def to_json(self) -> dict:
        return {
            "prompt_bytes_hash": self.prompt_bytes_hash,
            "raw_response": self.raw_response,
            "extracted_query": self.extracted_query,
            "parse_error": self.parse_error,
        }


@dataclass
class TranslationResult:
    attempts: list[Attempt] = field(default_factory=list)
    final_queries: list[str] = field(default_factory=list)
    succeeded: bool = False

    @property
    def final_query(self) -> str | None:
        return self.final_queries[0] if self.final_queries else None

    def to_json(self) -> dict:
        return {
            "attempts": [a.to_json() for a in self.attempts],
            "final_queries": list(self.final_queries),
            "final_query": self.final_query,
            "succeeded": self.succeeded,
        }


def _parse_error_text(exc: Exception) -> str:
    kind = "QuerySyntaxError" if isinstance(exc, QuerySyntaxError) else \
        "UnsupportedSparqlFeature" if isinstance(exc, UnsupportedSparqlFeature) else \
        type(exc).__name__
    return f"{kind}: {exc}"


def translate(question: str, tbox_text: str, provider: Provider, *,
              max_attempts: int = 3, expected_queries: int = 1,
              forbidden_iris: Iterable[str] = (), meta: dict | None = None) -> TranslationResult:
    """Prompt, extract, parse; on failure feed the error back and retry, at
    most `max_attempts` provider calls. Every attempt is kept for the trace."""
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    result = TranslationResult()
    feedback: tuple[str, str] | None = None
    base_meta = dict(meta or {})
    forbidden = tuple(forbidden_iris)
    for attempt_no in range(1, max_attempts + 1):
        bundle = assemble_prompt(tbox_text, question, expected_queries=expected_queries,
                                 feedback=feedback, forbidden_iris=forbidden)
        raw = provider.complete(bundle, {**base_meta, "attempt": attempt_no})
        attempt = Attempt(bundle.sha256(), raw)
        result.attempts.append(attempt)
        try:
            blocks = extract_query_blocks(raw)
            if not blocks:
                blocks = [extract_query(raw)]
            candidates = blocks[:expected_queries]
            attempt.extracted_query = "\n\n".join(candidates)
            if len(candidates) < expected_queries:
                raise NoQueryFound(
                    f"expected {expected_queries} queries, found {len(candidates)}")
            for q in candidates:
                parse_query(q)
        except (NoQueryFound, QuerySyntaxError, UnsupportedSparqlFeature) as exc:
            attempt.parse_error = _parse_error_text(exc)
            feedback = (attempt.extracted_query or "", attempt.parse_error)
            continue
        result.final_queries = candidates
        result.succeeded = True
        break
    return result
