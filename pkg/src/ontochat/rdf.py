"""RDF term model, in-memory graph, and canonical Turtle output.

The graph holds both halves of an ontology: the schema that gets rendered
into prompts and the instance data the query engine answers from. Canonical
serialization (sorted prefixes, subjects, predicates, objects) is what makes
prompt rendering byte-stable across runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

RDF_TYPE = RDF_NS + "type"
RDF_LANG_STRING = RDF_NS + "langString"
RDFS_LABEL = RDFS_NS + "label"
RDFS_COMMENT = RDFS_NS + "comment"
RDFS_SUBCLASSOF = RDFS_NS + "subClassOf"
RDFS_DOMAIN = RDFS_NS + "domain"
RDFS_RANGE = RDFS_NS + "range"
OWL_CLASS = OWL_NS + "Class"
OWL_OBJECT_PROPERTY = OWL_NS + "ObjectProperty"
OWL_DATATYPE_PROPERTY = OWL_NS + "DatatypeProperty"
OWL_ANNOTATION_PROPERTY = OWL_NS + "AnnotationProperty"
OWL_ONTOLOGY = OWL_NS + "Ontology"
XSD_STRING = XSD_NS + "string"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_DOUBLE = XSD_NS + "double"
XSD_FLOAT = XSD_NS + "float"
XSD_BOOLEAN = XSD_NS + "boolean"


@dataclass(frozen=True)
class Iri:
    value: str

    def __repr__(self) -> str:
        return f"Iri({self.value!r})"


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __repr__(self) -> str:
        return f"BlankNode({self.label!r})"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __post_init__(self) -> None:
        if self.language is not None and self.datatype != RDF_LANG_STRING:
            raise ValueError("language tag requires the language-string datatype")
        if self.datatype == RDF_LANG_STRING and self.language is None:
            raise ValueError("language-string literal is missing its language tag")

    def __repr__(self) -> str:
        return f"Literal({nt(self)})"


Term = Iri | BlankNode | Literal


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.predicate, Iri):
            raise ValueError(f"triple predicate must be an IRI, got {self.predicate!r}")
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject must not be a literal")


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}


def escape_string(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def nt(term: Term) -> str:
    """N-Triples-style rendering; its UTF-8 bytes are the canonical sort key."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    quoted = f'"{escape_string(term.lexical)}"'
    if term.language is not None:
        return f"{quoted}@{term.language}"
    if term.datatype == XSD_STRING:
        return quoted
    return f"{quoted}^^<{term.datatype}>"


@lru_cache(maxsize=None)
def _triple_key(triple: Triple) -> tuple[bytes, bytes, bytes]:
    return (
        nt(triple.subject).encode("utf-8"),
        nt(triple.predicate).encode("utf-8"),
        nt(triple.object).encode("utf-8"),
    )


def local_name(iri: str) -> str:
    """Fragment after the last '#' or '/'; used for vocabulary checks."""
    for sep in ("#", "/"):
        if sep in iri:
            return iri.rsplit(sep, 1)[1]
    return iri


class Graph:
    """Triple set with per-position indexes. Mutate only while loading;
    treat as immutable afterwards (readers may share it across threads)."""

    def __init__(self, triples: Iterable[Triple] = (), prefixes: dict[str, str] | None = None):
        self.triples: set[Triple] = set()
        self.prefixes: dict[str, str] = dict(prefixes or {})
        self._by_s: dict[Term, set[Triple]] = {}
        self._by_p: dict[Term, set[Triple]] = {}
        self._by_o: dict[Term, set[Triple]] = {}
        for t in triples:
            self.add(t)

    def add(self, triple: Triple) -> None:
        if triple in self.triples:
            return
        self.triples.add(triple)
        self._by_s.setdefault(triple.subject, set()).add(triple)
        self._by_p.setdefault(triple.predicate, set()).add(triple)
        self._by_o.setdefault(triple.object, set()).add(triple)

    def bind(self, prefix: str, namespace: str) -> None:
        self.prefixes[prefix] = namespace

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self.triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self.triples, key=_triple_key))

    def match(self, subject: Term | None = None, predicate: Term | None = None,
              object: Term | None = None) -> list[Triple]:
        """Triples matching every concrete position; None is a wildcard.
        Result is in canonical triple order."""
        candidate_sets = []
        if subject is not None:
            candidate_sets.append(self._by_s.get(subject, set()))
        if predicate is not None:
            candidate_sets.append(self._by_p.get(predicate, set()))
        if object is not None:
            candidate_sets.append(self._by_o.get(object, set()))
        if not candidate_sets:
            pool: set[Triple] | frozenset[Triple] = self.triples
        else:
            pool = min(candidate_sets, key=len)
        out = [
            t for t in pool
            if (subject is None or t.subject == subject)
            and (predicate is None or t.predicate == predicate)
            and (object is None or t.object == object)
        ]
        out.sort(key=_triple_key)
        return out

    def subjects(self, predicate: Term | None = None, object: Term | None = None) -> list[Term]:
        seen: dict[Term, None] = {}
        for t in self.match(None, predicate, object):
            seen.setdefault(t.subject)
        return list(seen)

    def copy(self, triples: Iterable[Triple] | None = None) -> "Graph":
        return Graph(self.triples if triples is None else triples, self.prefixes)

    def terms(self) -> set[Term]:
        out: set[Term] = set()
        for t in self.triples:
            out.update((t.subject, t.predicate, t.object))
        return out


_LOCAL_OK = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?$")
_BARE_INTEGER = re.compile(r"^[+-]?[0-9]+$")
_BARE_DECIMAL = re.compile(r"^[+-]?[0-9]*\.[0-9]+$")
_BARE_DOUBLE = re.compile(r"^[+-]?(?:[0-9]+\.[0-9]*|\.?[0-9]+)[eE][+-]?[0-9]+$")


def _prefix_candidates(prefixes: dict[str, str]) -> list[tuple[str, str]]:
    # Longest namespace wins; prefix name breaks ties so the choice is stable.
    return sorted(prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))


def _display_iri(iri: str, candidates: list[tuple[str, str]]) -> str:
    for prefix, ns in candidates:
        if iri.startswith(ns):
            local = iri[len(ns):]
            if local == "" or _LOCAL_OK.match(local):
                return f"{prefix}:{local}"
    return f"<{iri}>"


def _display_term(term: Term, candidates: list[tuple[str, str]], *, as_predicate: bool = False) -> str:
    if isinstance(term, Iri):
        if as_predicate and term.value == RDF_TYPE:
            return "a"
        return _display_iri(term.value, candidates)
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if term.language is not None:
        return f'"{escape_string(term.lexical)}"@{term.language}'
    if term.datatype == XSD_STRING:
        return f'"{escape_string(term.lexical)}"'
    if term.datatype == XSD_INTEGER and _BARE_INTEGER.match(term.lexical):
        return term.lexical
    if term.datatype == XSD_DECIMAL and _BARE_DECIMAL.match(term.lexical):
        return term.lexical
    if term.datatype == XSD_DOUBLE and _BARE_DOUBLE.match(term.lexical):
        return term.lexical
    if term.datatype == XSD_BOOLEAN and term.lexical in ("true", "false"):
        return term.lexical
    return f'"{escape_string(term.lexical)}"^^{_display_iri(term.datatype, candidates)}'


def compact_iri(iri: str, prefixes: dict[str, str]) -> str:
    """Prefixed form when a namespace matches, else the <...> form."""
    return _display_iri(iri, _prefix_candidates(prefixes))


def term_text(term: Term, prefixes: dict[str, str] | None = None) -> str:
    """Human-facing rendering: literals by lexical form, IRIs compacted."""
    if isinstance(term, Literal):
        return term.lexical
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    return compact_iri(term.value, prefixes or {})


def serialize_turtle(graph: Graph) -> str:
    """Canonical Turtle: prefixes, subjects, predicates, and objects all
    sorted by the byte order of their N-Triples rendering. Equal graphs
    produce byte-identical output regardless of insertion order."""
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(graph.prefixes.items())]
    candidates = _prefix_candidates(graph.prefixes)

    by_subject: dict[Term, list[Triple]] = {}
    for t in graph.triples:
        by_subject.setdefault(t.subject, []).append(t)

    blocks = []
    for subject in sorted(by_subject, key=lambda s: nt(s).encode("utf-8")):
        by_pred: dict[Term, list[Term]] = {}
        for t in by_subject[subject]:
            by_pred.setdefault(t.predicate, []).append(t.object)
        pred_parts = []
        for pred in sorted(by_pred, key=lambda p: nt(p).encode("utf-8")):
            objs = sorted(set(by_pred[pred]), key=lambda o: nt(o).encode("utf-8"))
            rendered = ", ".join(_display_term(o, candidates) for o in objs)
            pred_parts.append(f"{_display_term(pred, candidates, as_predicate=True)} {rendered}")
        body = " ;\n    ".join(pred_parts)
        blocks.append(f"{_display_term(subject, candidates)} {body} .")

    sections = []
    if lines:
        sections.append("\n".join(lines))
    if blocks:
        sections.append("\n\n".join(blocks))
    return "\n\n".join(sections) + ("\n" if sections else "")
