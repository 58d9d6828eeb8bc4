"""Experiment harness: run the whole question corpus through the translation
pipeline under the comment x phrasing conditions, score each generated query
by answer equivalence against gold on the fixture data, and aggregate the
three category clusters into a 3x4 accuracy grid.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path

from . import fixtures as fixture_lib
from .gateway import Provider, ProviderError, RecordingProvider, ScriptedProvider, TranslationResult, translate
from .partition import CommentPolicy, apply_comment_policy, render_prompt_tbox
from .rdf import Graph
from .sparql import QueryAst, QuerySyntaxError, UnsupportedSparqlFeature, evaluate, parse_query, results_equal

ODPS = ["VDI3682", "DINEN61360", "VDI2206"]
CATEGORIES = ["Boolean", "Count", "Rank", "Simple", "String", "TwoHop", "TwoIntent"]
PHRASINGS = ["SCQ", "NSCQ"]
CONDITIONS = [False, True]  # comments stripped first, annotated second

CLUSTERS = [
    ("Boolean, Count, Rank", ("Boolean", "Count", "Rank")),
    ("Simple, String, Two Hop", ("Simple", "String", "TwoHop")),
    ("Two Intent", ("TwoIntent",)),
]

FAILURE_TRANSLATION = "TranslationFailed"
FAILURE_WRONG = "WrongAnswer"
FAILURE_EXECUTION = "ExecutionError"


class CorpusInvalid(Exception):
    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        lines = "; ".join(f"{rid}: {reason}" for rid, reason in violations)
        super().__init__(f"corpus invalid: {lines}")


@dataclass
class QuestionRecord:
    id: str
    odp: str
    category: str
    phrasing: str
    text: str
    gold_queries: list[str]
    gold_asts: list[QueryAst] = field(default_factory=list, repr=False)


@dataclass
class ExperimentMatrix:
    corpus: list[QuestionRecord]
    conditions: list[bool] = field(default_factory=lambda: list(CONDITIONS))

    def runs(self) -> list[tuple[QuestionRecord, bool]]:
        """Deterministic run order: odp, category, phrasing, condition."""
        by_key = {(r.odp, r.category, r.phrasing): r for r in self.corpus}
        out = []
        for odp in ODPS:
            for category in CATEGORIES:
                for phrasing in PHRASINGS:
                    for comments in self.conditions:
                        out.append((by_key[(odp, category, phrasing)], comments))
        return out


def _cluster_of(category: str) -> str:
    for label, members in CLUSTERS:
        if category in members:
            return label
    raise ValueError(f"unknown category {category!r}")


def percent(correct: int, total: int) -> int:
    """Integer percent, rounded half up."""
    if total == 0:
        return 0
    return (200 * correct + total) // (2 * total)


# --- corpus loading ----------------------------------------------------------

def load_corpus(path: str | Path, fixtures_dir: Path | None = None) -> ExperimentMatrix:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    violations: list[tuple[str, str]] = []
    records: list[QuestionRecord] = []
    seen_ids: set[str] = set()

    vocab: dict[str, set[str]] = {}
    for odp in ODPS:
        try:
            graph, _ = fixture_lib.load_fixture(odp, fixtures_dir)
            vocab[odp] = fixture_lib.schema_term_local_names(graph)
        except FileNotFoundError:
            vocab[odp] = set()

    if not isinstance(raw, list):
        raise CorpusInvalid([("<corpus>", "top level must be a JSON array")])

    for i, data in enumerate(raw):
        rid = data.get("id") if isinstance(data, dict) else None
        rid = rid or f"<record {i}>"
        if not isinstance(data, dict):
            violations.append((rid, "record must be an object"))
            continue
        missing = [k for k in ("id", "odp", "category", "phrasing", "text", "gold_queries") if k not in data]
        if missing:
            violations.append((rid, f"missing fields: {', '.join(missing)}"))
            continue
        record = QuestionRecord(data["id"], data["odp"], data["category"],
                                data["phrasing"], data["text"], list(data["gold_queries"]))
        if record.id in seen_ids:
            violations.append((record.id, "duplicate id"))
        seen_ids.add(record.id)
        if record.odp not in ODPS:
            violations.append((record.id, f"unknown odp {record.odp!r}"))
            continue
        if record.category not in CATEGORIES:
            violations.append((record.id, f"unknown category {record.category!r}"))
            continue
        if record.phrasing not in PHRASINGS:
            violations.append((record.id, f"unknown phrasing {record.phrasing!r}"))
            continue
        expected = 2 if record.category == "TwoIntent" else 1
        if len(record.gold_queries) != expected:
            violations.append((record.id, f"expected {expected} gold queries, got {len(record.gold_queries)}"))
        for j, text in enumerate(record.gold_queries):
            try:
                record.gold_asts.append(parse_query(text))
            except (QuerySyntaxError, UnsupportedSparqlFeature) as exc:
                violations.append((record.id, f"gold query {j} rejected: {exc}"))
        names = vocab.get(record.odp, set())
        if record.phrasing == "NSCQ":
            hits = sorted(n for n in names
                          if re.search(rf"\b{re.escape(n)}\b", record.text, re.IGNORECASE))
            if hits:
                violations.append((record.id, f"NSCQ text contains vocabulary terms: {', '.join(hits)}"))
        elif names and not _mentions_vocabulary(record.text, names):
            violations.append((record.id, "SCQ text mentions no vocabulary term"))
        records.append(record)

    for odp in ODPS:
        for category in CATEGORIES:
            for phrasing in PHRASINGS:
                matches = [r for r in records
                           if (r.odp, r.category, r.phrasing) == (odp, category, phrasing)]
                if len(matches) != 1:
                    violations.append(
                        (f"{odp}/{category}/{phrasing}", f"expected exactly 1 record, found {len(matches)}"))

    if violations:
        raise CorpusInvalid(violations)
    return ExperimentMatrix(records)


def _mentions_vocabulary(text: str, names: set[str]) -> bool:
    lowered = text.lower()
    for name in names:
        spaced = re.sub(r"(?<=[a-z0-9])(?=[A-Z])", " ", name).lower()
        if name.lower() in lowered or spaced in lowered:
            return True
    return False


# --- scoring ------------------------------------------------------------------

def score_run(generated: list[str], record: QuestionRecord, abox: Graph) -> tuple[bool, str | None]:
    """Correct iff every generated query's answer equals the gold answer on
    the fixture data; ordered comparison for Rank; the two TwoIntent queries
    may come in either order."""
    if not generated:
        return False, FAILURE_TRANSLATION
    parsed = []
    for text in generated:
        try:
            parsed.append(parse_query(text))
        except (QuerySyntaxError, UnsupportedSparqlFeature):
            return False, FAILURE_TRANSLATION
    golds = record.gold_asts or [parse_query(q) for q in record.gold_queries]
    if len(parsed) != len(golds):
        return False, FAILURE_WRONG
    try:
        gen_results = [evaluate(ast, abox) for ast in parsed]
        gold_results = [evaluate(ast, abox) for ast in golds]
    except Exception:
        return False, FAILURE_EXECUTION
    ordered = record.category == "Rank"
    if len(golds) == 1:
        ok = results_equal(gen_results[0], gold_results[0], ordered)
    else:
        ok = any(
            all(results_equal(gen_results[i], gold_results[perm[i]], ordered)
                for i in range(len(golds)))
            for perm in permutations(range(len(golds)))
        )
    return (True, None) if ok else (False, FAILURE_WRONG)


# --- experiment ----------------------------------------------------------------

@dataclass
class RunOutcome:
    question_id: str
    odp: str
    category: str
    phrasing: str
    comments: bool
    correct: bool
    failure_kind: str | None
    generated_queries: list[str]
    translation: TranslationResult

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "odp": self.odp,
            "category": self.category,
            "phrasing": self.phrasing,
            "comments": self.comments,
            "correct": self.correct,
            "failure_kind": self.failure_kind,
            "generated_queries": list(self.generated_queries),
            "translation": self.translation.to_json(),
        }


@dataclass
class RunReport:
    runs: list[RunOutcome]
    prompt_template_version: str

    def aggregate(self) -> dict[tuple[str, bool, str], dict]:
        cells: dict[tuple[str, bool, str], dict] = {}
        for label, _ in CLUSTERS:
            for comments in CONDITIONS:
                for phrasing in PHRASINGS:
                    cells[(label, comments, phrasing)] = {"correct": 0, "total": 0, "percent": 0}
        for run in self.runs:
            cell = cells[(_cluster_of(run.category), run.comments, run.phrasing)]
            cell["total"] += 1
            cell["correct"] += 1 if run.correct else 0
        for cell in cells.values():
            cell["percent"] = percent(cell["correct"], cell["total"])
        return cells

    def to_json(self) -> dict:
        aggregate: dict[str, dict] = {}
        for (label, comments, phrasing), cell in self.aggregate().items():
            condition = "with_comments" if comments else "without_comments"
            aggregate.setdefault(label, {}).setdefault(condition, {})[phrasing] = dict(cell)
        return {
            "prompt_template_version": self.prompt_template_version,
            "aggregate": aggregate,
            "runs": [run.to_json() for run in self.runs],
        }


@dataclass
class _PreparedOdp:
    abox: Graph
    tbox_text: dict[bool, str]  # comments kept? -> prompt text
    individuals: set[str]


def _prepare(fixtures_dir: Path | None) -> dict[str, _PreparedOdp]:
    prepared = {}
    for odp in ODPS:
        _, part = fixture_lib.load_fixture(odp, fixtures_dir)
        texts = {}
        for comments in CONDITIONS:
            policy = CommentPolicy.RETAIN if comments else CommentPolicy.STRIP
            texts[comments] = render_prompt_tbox(apply_comment_policy(part.tbox, policy))
        prepared[odp] = _PreparedOdp(part.abox, texts, part.individual_iris())
    return prepared


def run_experiment(matrix: ExperimentMatrix, provider: Provider,
                   fixtures_dir: Path | None = None, max_attempts: int = 3,
                   jobs: int = 1) -> RunReport:
    """Translate and score every (question, condition) run. Provider errors
    count as failed translations; fixture problems abort."""
    from .gateway import PROMPT_TEMPLATE_VERSION

    prepared = _prepare(fixtures_dir)
    runs = matrix.runs()

    def one(run: tuple[QuestionRecord, bool]) -> RunOutcome:
        record, comments = run
        odp = prepared[record.odp]
        expected = 2 if record.category == "TwoIntent" else 1
        try:
            translation = translate(
                record.text, odp.tbox_text[comments], provider,
                max_attempts=max_attempts, expected_queries=expected,
                forbidden_iris=odp.individuals,
                meta={"question_id": record.id, "comments": comments},
            )
        except ProviderError:
            return RunOutcome(record.id, record.odp, record.category, record.phrasing,
                              comments, False, FAILURE_TRANSLATION, [], TranslationResult())
        generated = translation.final_queries if translation.succeeded else []
        correct, failure = score_run(generated, record, odp.abox)
        return RunOutcome(record.id, record.odp, record.category, record.phrasing,
                          comments, correct, failure, generated, translation)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, runs))
    else:
        outcomes = [one(run) for run in runs]
    return RunReport(outcomes, PROMPT_TEMPLATE_VERSION)


# --- report rendering -----------------------------------------------------------

_COLUMNS = [(False, "SCQ", "w/o comments SCQs"), (False, "NSCQ", "w/o comments NSCQs"),
            (True, "SCQ", "commented SCQs"), (True, "NSCQ", "commented NSCQs")]


def render_report(report: RunReport, format: str = "markdown") -> str:
    cells = report.aggregate()
    if format == "json":
        return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    if format == "csv":
        lines = ["cluster,comments,phrasing,correct,total,percent"]
        for label, _ in CLUSTERS:
            for comments, phrasing, _name in _COLUMNS:
                cell = cells[(label, comments, phrasing)]
                condition = "commented" if comments else "without"
                lines.append(f'"{label}",{condition},{phrasing},'
                             f'{cell["correct"]},{cell["total"]},{cell["percent"]}')
        return "\n".join(lines) + "\n"
    if format == "markdown":
        lines = [
            "# Query generation accuracy",
            "",
            "| Categories | " + " | ".join(name for _, _, name in _COLUMNS) + " |",
            "| --- | --- | --- | --- | --- |",
        ]
        for label, _ in CLUSTERS:
            row = [f"{cells[(label, comments, phrasing)]['percent']}%"
                   for comments, phrasing, _name in _COLUMNS]
            lines.append(f"| {label} | " + " | ".join(row) + " |")
        lines += ["", "## Per-question outcomes", "",
                  "| question | comments | correct | failure |", "| --- | --- | --- | --- |"]
        for run in report.runs:
            lines.append(f"| {run.question_id} | {'yes' if run.comments else 'no'} "
                         f"| {'yes' if run.correct else 'no'} | {run.failure_kind or ''} |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


# --- cassette building ------------------------------------------------------------

WRONG_SELECT = "SELECT ?x WHERE { ?x a <http://example.org/nowhere#Missing> }"
WRONG_ASK = "ASK { ?x a <http://example.org/nowhere#Missing> }"
UNPARSEABLE_RESPONSE = "I am sorry, I could not derive a structured request for this question."

TABLE2_WRONG_RUNS = {
    ("VDI3682", "TwoHop", "SCQ", False),
    ("VDI3682", "Simple", "NSCQ", False),
    ("VDI3682", "TwoHop", "NSCQ", False),
    ("DINEN61360", "String", "NSCQ", False),
    ("DINEN61360", "TwoHop", "NSCQ", False),
    ("VDI2206", "Simple", "NSCQ", False),
    ("VDI3682", "TwoHop", "NSCQ", True),
    ("VDI2206", "String", "NSCQ", True),
    ("DINEN61360", "TwoIntent", "SCQ", False),
    ("VDI2206", "TwoIntent", "NSCQ", True),
}
TABLE2_UNPARSEABLE_RUNS = {(odp, "TwoIntent", "NSCQ", False) for odp in ODPS}


def _wrong_variant(gold_text: str) -> str:
    return WRONG_ASK if parse_query(gold_text).form == "ask" else WRONG_SELECT


def table2_responder(matrix: ExperimentMatrix):
    """Scripted provider reproducing the published accuracy pattern: most
    runs echo gold, selected runs answer a wrong-but-valid query, and the
    hardest phrasing condition yields no usable query at all."""
    by_id = {r.id: r for r in matrix.corpus}

    def respond(bundle, meta: dict) -> str:
        record = by_id[meta["question_id"]]
        key = (record.odp, record.category, record.phrasing, meta["comments"])
        if key in TABLE2_UNPARSEABLE_RUNS:
            return UNPARSEABLE_RESPONSE
        if key in TABLE2_WRONG_RUNS:
            queries = list(record.gold_queries)
            queries[-1] = _wrong_variant(queries[-1])
        else:
            queries = record.gold_queries
        return "\n\n".join(f"```sparql\n{q}\n```" for q in queries)

    return respond


def build_cassette(matrix: ExperimentMatrix, responder,
                   fixtures_dir: Path | None = None, max_attempts: int = 3) -> list[dict]:
    """Run the real pipeline against a scripted responder and capture every
    (prompt hash, response) pair, repair attempts included."""
    recorder = RecordingProvider(ScriptedProvider(responder))
    run_experiment(matrix, recorder, fixtures_dir=fixtures_dir, max_attempts=max_attempts)
    return recorder.cassette()


def build_table2_cassette(fixtures_dir: Path | None = None) -> list[dict]:
    fixtures_dir = fixtures_dir or fixture_lib.FIXTURES_DIR
    matrix = load_corpus(fixtures_dir / fixture_lib.CORPUS_FILE, fixtures_dir=fixtures_dir)
    return build_cassette(matrix, table2_responder(matrix), fixtures_dir=fixtures_dir)
