"""Query results: the boolean/bindings ResultSet, its W3C JSON codec, and
answer-level equivalence between result sets."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations

from ..rdf import BlankNode, Iri, Literal, RDF_LANG_STRING, Term, XSD_STRING, nt


class MalformedResults(Exception):
    """Response body does not follow the sparql-results+json layout."""


@dataclass
class ResultSet:
    variables: list[str] = field(default_factory=list)
    rows: list[dict[str, Term]] = field(default_factory=list)
    boolean: bool | None = None

    @property
    def is_boolean(self) -> bool:
        return self.boolean is not None

    @staticmethod
    def ask(value: bool) -> "ResultSet":
        return ResultSet(boolean=value)

    @staticmethod
    def bindings(variables: list[str], rows: list[dict[str, Term]]) -> "ResultSet":
        return ResultSet(variables=variables, rows=rows)

    def to_json(self) -> dict:
        if self.is_boolean:
            return {"head": {}, "boolean": self.boolean}
        bindings = []
        for row in self.rows:
            bindings.append({v: _term_to_json(row[v]) for v in self.variables if v in row})
        return {"head": {"vars": list(self.variables)}, "results": {"bindings": bindings}}

    @staticmethod
    def from_json(data: object) -> "ResultSet":
        if not isinstance(data, dict):
            raise MalformedResults("result document must be a JSON object")
        if "boolean" in data:
            value = data["boolean"]
            if not isinstance(value, bool):
                raise MalformedResults("'boolean' must be true or false")
            return ResultSet.ask(value)
        head = data.get("head")
        results = data.get("results")
        if not isinstance(head, dict) or not isinstance(results, dict):
            raise MalformedResults("missing 'head' or 'results'")
        variables = head.get("vars", [])
        if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
            raise MalformedResults("'head.vars' must be a list of names")
        bindings = results.get("bindings")
        if not isinstance(bindings, list):
            raise MalformedResults("'results.bindings' must be a list")
        rows = []
        for binding in bindings:
            if not isinstance(binding, dict):
                raise MalformedResults("each binding must be an object")
            rows.append({name: _term_from_json(value) for name, value in binding.items()})
        return ResultSet.bindings(list(variables), rows)


def _term_to_json(term: Term) -> dict:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, BlankNode):
        return {"type": "bnode", "value": term.label}
    out: dict = {"type": "literal", "value": term.lexical}
    if term.language is not None:
        out["xml:lang"] = term.language
    elif term.datatype != XSD_STRING:
        out["datatype"] = term.datatype
    return out


def _term_from_json(data: object) -> Term:
    if not isinstance(data, dict) or "type" not in data or "value" not in data:
        raise MalformedResults(f"bad term encoding: {data!r}")
    kind, value = data["type"], data["value"]
    if not isinstance(value, str):
        raise MalformedResults("term 'value' must be a string")
    if kind == "uri":
        return Iri(value)
    if kind == "bnode":
        return BlankNode(value)
    if kind in ("literal", "typed-literal"):
        lang = data.get("xml:lang")
        if lang is not None:
            return Literal(value, RDF_LANG_STRING, lang)
        return Literal(value, data.get("datatype", XSD_STRING))
    raise MalformedResults(f"unknown term type {kind!r}")


# --- answer equivalence -----------------------------------------------------

def results_equal(a: ResultSet, b: ResultSet, ordered: bool = False) -> bool:
    """Answer-level equality. Booleans compare by value. Bindings compare as
    row multisets of *values*: variable names are ignored and columns are
    aligned by any value-preserving bijection. With `ordered`, rows compare
    as sequences. Blank nodes match under one consistent bijection per
    comparison."""
    if a.is_boolean or b.is_boolean:
        return a.is_boolean and b.is_boolean and a.boolean == b.boolean
    if len(a.variables) != len(b.variables) or len(a.rows) != len(b.rows):
        return False
    width = len(a.variables)
    if width == 0:
        return True
    a_tuples = [tuple(row.get(v) for v in a.variables) for row in a.rows]
    has_bnodes = any(isinstance(t, BlankNode) for row in a_tuples + [
        tuple(row.get(v) for v in b.variables) for row in b.rows] for t in row)
    for perm in permutations(range(width)):
        b_tuples = [tuple(row.get(b.variables[perm[i]]) for i in range(width)) for row in b.rows]
        if not has_bnodes:
            a_keys = [_tuple_key(t) for t in a_tuples]
            b_keys = [_tuple_key(t) for t in b_tuples]
            if (a_keys == b_keys) if ordered else (Counter(a_keys) == Counter(b_keys)):
                return True
        else:
            if _match_with_bnodes(a_tuples, b_tuples, ordered):
                return True
    return False


def _tuple_key(values: tuple) -> tuple:
    return tuple(nt(v) if v is not None else None for v in values)


def _unify(a: tuple, b: tuple, fwd: dict, rev: dict) -> tuple[dict, dict] | None:
    fwd, rev = dict(fwd), dict(rev)
    for x, y in zip(a, b):
        if isinstance(x, BlankNode) and isinstance(y, BlankNode):
            if fwd.get(x.label, y.label) != y.label or rev.get(y.label, x.label) != x.label:
                return None
            fwd[x.label] = y.label
            rev[y.label] = x.label
        elif x != y:
            return None
    return fwd, rev


def _match_with_bnodes(a_tuples: list, b_tuples: list, ordered: bool) -> bool:
    if ordered:
        fwd: dict = {}
        rev: dict = {}
        for x, y in zip(a_tuples, b_tuples):
            unified = _unify(x, y, fwd, rev)
            if unified is None:
                return False
            fwd, rev = unified
        return True

    def backtrack(i: int, used: set, fwd: dict, rev: dict) -> bool:
        if i == len(a_tuples):
            return True
        for j, candidate in enumerate(b_tuples):
            if j in used:
                continue
            unified = _unify(a_tuples[i], candidate, fwd, rev)
            if unified is None:
                continue
            if backtrack(i + 1, used | {j}, *unified):
                return True
        return False

    return backtrack(0, set(), {}, {})
