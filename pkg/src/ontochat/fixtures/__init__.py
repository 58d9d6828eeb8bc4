"""Shipped miniature ontologies, the question corpus with gold queries, and
the validator that keeps them consistent with each other.

Each ontology is an original miniature modeled on a public industrial
vocabulary (process descriptions, device property descriptions, machine
structures), with every schema element carrying exactly one rdfs:comment and
a small instance population sized so all gold answers are non-empty and
discriminative.
"""

from __future__ import annotations

from pathlib import Path

from ..rdf import (
    Graph,
    Iri,
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_OBJECT_PROPERTY,
    RDFS_COMMENT,
    RDFS_SUBCLASSOF,
    RDF_TYPE,
    local_name,
    nt,
)
from ..partition import CommentPolicy, PartitionedOntology, apply_comment_policy, partition
from ..turtle import parse_turtle

FIXTURES_DIR = Path(__file__).resolve().parent
CORPUS_FILE = "questions.json"
MOCK_GOLD_FILE = "mock_gold.json"
TABLE2_CASSETTE_FILE = "table2_cassette.json"

ODP_FILES = {
    "VDI3682": "vdi3682.ttl",
    "DINEN61360": "dinen61360.ttl",
    "VDI2206": "vdi2206.ttl",
}

_REQUIRED_CLASSES = {
    "VDI3682": {"Process", "ProcessOperator", "TechnicalResource"},
    "DINEN61360": {"DataElement"},
    "VDI2206": {"System", "Module", "Component", "Sensor"},
}
_REQUIRED_PROPERTIES = {
    "VDI3682": {"composedOf", "assignedTo"},
    "DINEN61360": {"name", "value"},
    "VDI2206": {"consistsOf", "partOf"},
}


def fixture_path(odp: str, fixtures_dir: Path | None = None) -> Path:
    return (fixtures_dir or FIXTURES_DIR) / ODP_FILES[odp]


def load_fixture(odp: str, fixtures_dir: Path | None = None) -> tuple[Graph, PartitionedOntology]:
    graph, _ = parse_turtle(fixture_path(odp, fixtures_dir).read_text(encoding="utf-8"))
    return graph, partition(graph)


def schema_term_local_names(graph: Graph) -> set[str]:
    """Local names of declared classes and properties; the vocabulary that
    SCQ texts should use and NSCQ texts must avoid."""
    names: set[str] = set()
    rdf_type = Iri(RDF_TYPE)
    for class_iri in (OWL_CLASS, OWL_OBJECT_PROPERTY, OWL_DATATYPE_PROPERTY):
        for triple in graph.match(None, rdf_type, Iri(class_iri)):
            if isinstance(triple.subject, Iri):
                names.add(local_name(triple.subject.value))
    return names


def validate_fixtures(fixtures_dir: Path | None = None,
                      corpus_path: Path | None = None) -> list[str]:
    """Every returned string is one violated invariant; an empty list means
    the fixture set is shippable."""
    from ..harness import CorpusInvalid, load_corpus
    from ..sparql import QuerySyntaxError, UnsupportedSparqlFeature, evaluate, parse_query

    fixtures_dir = fixtures_dir or FIXTURES_DIR
    corpus_path = corpus_path or fixtures_dir / CORPUS_FILE
    diagnostics: list[str] = []
    partitions: dict[str, PartitionedOntology] = {}

    for odp, filename in ODP_FILES.items():
        path = fixtures_dir / filename
        if not path.exists():
            diagnostics.append(f"{odp}: fixture file {filename} is missing")
            continue
        try:
            graph, _ = parse_turtle(path.read_text(encoding="utf-8"))
        except Exception as exc:
            diagnostics.append(f"{odp}: fixture does not parse: {exc}")
            continue
        part = partition(graph)
        partitions[odp] = part
        if len(part.tbox) == 0:
            diagnostics.append(f"{odp}: empty TBox")
        if len(part.abox) == 0:
            diagnostics.append(f"{odp}: empty ABox")
        if not 15 <= len(part.abox) <= 40:
            diagnostics.append(f"{odp}: ABox has {len(part.abox)} triples, expected 15-40")

        declared = schema_term_local_names(graph)
        for name in sorted(_REQUIRED_CLASSES[odp] - declared):
            diagnostics.append(f"{odp}: required class {name} is not declared")
        for name in sorted(_REQUIRED_PROPERTIES[odp] - declared):
            diagnostics.append(f"{odp}: required property {name} is not declared")
        if odp == "VDI2206":
            sensors = [t for t in graph.match(None, Iri(RDFS_SUBCLASSOF), None)
                       if isinstance(t.subject, Iri) and local_name(t.subject.value) == "Sensor"]
            if not any(isinstance(t.object, Iri) and local_name(t.object.value) == "Component"
                       for t in sensors):
                diagnostics.append("VDI2206: Sensor is not a subclass of Component")

        comment = Iri(RDFS_COMMENT)
        for entity in sorted(part.schema_entities):
            count = len(part.tbox.match(Iri(entity), comment, None))
            if count != 1:
                diagnostics.append(
                    f"{odp}: schema entity {entity} has {count} rdfs:comment annotations, expected 1")
        stripped = apply_comment_policy(part.tbox, CommentPolicy.STRIP)
        removed = len(part.tbox) - len(stripped)
        if removed != len(part.schema_entities):
            diagnostics.append(
                f"{odp}: stripping removed {removed} comments for {len(part.schema_entities)} schema entities")

    try:
        matrix = load_corpus(corpus_path, fixtures_dir=fixtures_dir)
    except CorpusInvalid as exc:
        diagnostics.extend(f"corpus: {record_id}: {reason}" for record_id, reason in exc.violations)
        return diagnostics
    except FileNotFoundError:
        diagnostics.append(f"corpus: file {corpus_path} is missing")
        return diagnostics

    for record in matrix.corpus:
        part = partitions.get(record.odp)
        if part is None:
            continue
        for i, text in enumerate(record.gold_queries):
            try:
                result = evaluate(parse_query(text), part.abox)
            except (QuerySyntaxError, UnsupportedSparqlFeature) as exc:
                diagnostics.append(f"{record.id}: gold query {i} rejected: {exc}")
                continue
            if result.is_boolean:
                if result.boolean is not True:
                    diagnostics.append(f"{record.id}: gold query {i} is false on the fixture")
            elif not result.rows:
                diagnostics.append(f"{record.id}: gold query {i} returns no rows")
            elif record.category == "Rank":
                distinct = {nt(v) for row in result.rows for v in row.values()}
                if len(distinct) < 3:
                    diagnostics.append(f"{record.id}: non-discriminative Rank fixture "
                                       f"({len(distinct)} distinct values, need 3)")
    return diagnostics
