"""Split an ontology into its schema (TBox) and data (ABox) halves.

The split is purely syntactic: a subject is schema if it is typed as a class,
property, or ontology header, or declares subclass/domain/range axioms.
Everything else is data and never reaches a prompt. Comment stripping toggles
the one annotation the prompt experiment varies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .rdf import (
    Graph,
    Iri,
    RDF_NS,
    RDFS_COMMENT,
    RDFS_DOMAIN,
    RDFS_NS,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    RDF_TYPE,
    OWL_ANNOTATION_PROPERTY,
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_NS,
    OWL_OBJECT_PROPERTY,
    OWL_ONTOLOGY,
    Term,
    XSD_NS,
    serialize_turtle,
)

_SCHEMA_TYPES = {
    Iri(OWL_CLASS),
    Iri(OWL_OBJECT_PROPERTY),
    Iri(OWL_DATATYPE_PROPERTY),
    Iri(OWL_ANNOTATION_PROPERTY),
    Iri(OWL_ONTOLOGY),
}
_SCHEMA_AXIOM_PREDICATES = (Iri(RDFS_SUBCLASSOF), Iri(RDFS_DOMAIN), Iri(RDFS_RANGE))
_WELL_KNOWN_NAMESPACES = (RDF_NS, RDFS_NS, OWL_NS, XSD_NS)


class CommentPolicy(Enum):
    RETAIN = "retain"
    STRIP = "strip"


@dataclass
class PartitionedOntology:
    tbox: Graph
    abox: Graph
    schema_entities: set[str]
    diagnostics: list[str] = field(default_factory=list)

    def individual_iris(self) -> set[str]:
        """IRIs of data-side individuals: every IRI occurring in the ABox
        that is neither a schema entity nor core vocabulary."""
        out: set[str] = set()
        for triple in self.abox.triples:
            for term in (triple.subject, triple.predicate, triple.object):
                if isinstance(term, Iri) and term.value not in self.schema_entities \
                        and not term.value.startswith(_WELL_KNOWN_NAMESPACES):
                    out.add(term.value)
        return out


def partition(graph: Graph) -> PartitionedOntology:
    """TBox gets every triple whose subject is a schema entity; the ABox gets
    the rest. Emits an EmptyTBox diagnostic for data-only files."""
    rdf_type = Iri(RDF_TYPE)
    schema_subjects: set[Term] = set()
    for triple in graph.triples:
        if triple.predicate == rdf_type and triple.object in _SCHEMA_TYPES:
            schema_subjects.add(triple.subject)
        elif triple.predicate in _SCHEMA_AXIOM_PREDICATES:
            schema_subjects.add(triple.subject)

    tbox = Graph(prefixes=graph.prefixes)
    abox = Graph(prefixes=graph.prefixes)
    for triple in graph.triples:
        (tbox if triple.subject in schema_subjects else abox).add(triple)

    diagnostics = []
    if not schema_subjects and len(graph) > 0:
        diagnostics.append("EmptyTBox: no schema entity found; file looks data-only")
    entities = {t.value for t in schema_subjects if isinstance(t, Iri)}
    return PartitionedOntology(tbox, abox, entities, diagnostics)


def apply_comment_policy(tbox: Graph, policy: CommentPolicy) -> Graph:
    if policy is CommentPolicy.RETAIN:
        return tbox
    comment = Iri(RDFS_COMMENT)
    return tbox.copy(t for t in tbox.triples if t.predicate != comment)


def render_prompt_tbox(tbox: Graph) -> str:
    """Deterministic prompt text for the schema: canonical Turtle."""
    return serialize_turtle(tbox)
