"""Bag-semantics evaluation of a QueryAst over an in-memory Graph.

BGPs join by pattern matching, OPTIONAL is a left-outer join, UNION is bag
union, and filters apply per row with errors treated as false. Evaluation is
pure: the same AST and graph always produce the same ResultSet, row order
included.
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation

from ..rdf import BlankNode, Iri, Literal, Term, nt
from ..rdf import XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_FLOAT, XSD_INTEGER, XSD_STRING, RDF_LANG_STRING
from .ast import (
    And,
    Bgp,
    Call,
    Comparison,
    Count,
    Expression,
    Filter,
    Join,
    Not,
    Optional,
    Or,
    OrderKey,
    PatternNode,
    QueryAst,
    TriplePattern,
    Union,
    Var,
    pattern_variables,
)
from .results import ResultSet

Row = dict[str, Term]

_NUMERIC_DATATYPES = {XSD_INTEGER, XSD_DECIMAL, XSD_DOUBLE, XSD_FLOAT}


class _FilterError(Exception):
    """Type error inside a filter; rejects the row instead of aborting."""


def _numeric_value(lit: Literal) -> Decimal:
    try:
        return Decimal(lit.lexical)
    except InvalidOperation as exc:
        raise _FilterError(f"non-numeric lexical {lit.lexical!r}") from exc


def _is_stringish(lit: Literal) -> bool:
    return lit.datatype == XSD_STRING or lit.datatype == RDF_LANG_STRING


def _as_term(value: Term | bool) -> Term:
    if isinstance(value, bool):
        return Literal("true" if value else "false", XSD_BOOLEAN)
    return value


def _ebv(value: Term | bool) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, Literal):
        if value.datatype == XSD_BOOLEAN:
            return value.lexical == "true"
        if value.datatype in _NUMERIC_DATATYPES:
            return _numeric_value(value) != 0
        if _is_stringish(value):
            return len(value.lexical) > 0
    raise _FilterError("no effective boolean value")


def _compare(op: str, left: Term | bool, right: Term | bool) -> bool:
    lt, rt = _as_term(left), _as_term(right)
    if isinstance(lt, Literal) and isinstance(rt, Literal):
        if lt.datatype in _NUMERIC_DATATYPES and rt.datatype in _NUMERIC_DATATYPES:
            return _apply_order_op(op, _numeric_value(lt), _numeric_value(rt))
        if lt.datatype == XSD_STRING and rt.datatype == XSD_STRING:
            return _apply_order_op(op, lt.lexical, rt.lexical)
        if lt.datatype == XSD_BOOLEAN and rt.datatype == XSD_BOOLEAN and op in ("=", "!="):
            return (lt.lexical == rt.lexical) == (op == "=")
        if lt.datatype == RDF_LANG_STRING and rt.datatype == RDF_LANG_STRING and op in ("=", "!="):
            same = (lt.lexical, lt.language) == (rt.lexical, rt.language)
            return same == (op == "=")
        if op in ("=", "!=") and lt == rt:
            return op == "="
        raise _FilterError(f"cannot compare {nt(lt)} {op} {nt(rt)}")
    if op in ("=", "!=") and type(lt) is type(rt):
        return (lt == rt) == (op == "=")
    raise _FilterError(f"cannot compare {op} across term kinds")


def _apply_order_op(op: str, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


_REGEX_FLAGS = {"i": re.IGNORECASE, "s": re.DOTALL, "m": re.MULTILINE, "x": re.VERBOSE}


def _string_arg(value: Term | bool) -> str:
    term = _as_term(value)
    if isinstance(term, Literal) and _is_stringish(term):
        return term.lexical
    raise _FilterError("expected a string argument")


def _eval_expression(expr: Expression, row: Row) -> Term | bool:
    if isinstance(expr, Var):
        if expr.name not in row:
            raise _FilterError(f"unbound variable ?{expr.name}")
        return row[expr.name]
    if isinstance(expr, (Iri, Literal)):
        return expr
    if isinstance(expr, Comparison):
        return _compare(expr.op, _eval_expression(expr.left, row), _eval_expression(expr.right, row))
    if isinstance(expr, And):
        if not _ebv(_eval_expression(expr.left, row)):
            return False
        return _ebv(_eval_expression(expr.right, row))
    if isinstance(expr, Or):
        if _ebv(_eval_expression(expr.left, row)):
            return True
        return _ebv(_eval_expression(expr.right, row))
    if isinstance(expr, Not):
        return not _ebv(_eval_expression(expr.operand, row))
    if isinstance(expr, Call):
        return _eval_call(expr, row)
    raise _FilterError(f"unknown expression node {expr!r}")


def _eval_call(call: Call, row: Row) -> Term | bool:
    if call.func == "bound":
        var = call.args[0]
        return isinstance(var, Var) and var.name in row
    if call.func == "str":
        term = _as_term(_eval_expression(call.args[0], row))
        if isinstance(term, Iri):
            return Literal(term.value, XSD_STRING)
        if isinstance(term, Literal):
            return Literal(term.lexical, XSD_STRING)
        raise _FilterError("str() is undefined for blank nodes")
    if call.func == "contains":
        return _string_arg(_eval_expression(call.args[0], row)) .__contains__(
            _string_arg(_eval_expression(call.args[1], row)))
    if call.func == "regex":
        text = _string_arg(_eval_expression(call.args[0], row))
        pattern = _string_arg(_eval_expression(call.args[1], row))
        flags = 0
        if len(call.args) == 3:
            for ch in _string_arg(_eval_expression(call.args[2], row)):
                if ch not in _REGEX_FLAGS:
                    raise _FilterError(f"unknown regex flag {ch!r}")
                flags |= _REGEX_FLAGS[ch]
        try:
            return re.search(pattern, text, flags) is not None
        except re.error as exc:
            raise _FilterError(f"bad regex: {exc}") from exc
    raise _FilterError(f"unknown function {call.func}")


def _filter_pass(expr: Expression, row: Row) -> bool:
    try:
        return _ebv(_eval_expression(expr, row))
    except _FilterError:
        return False


# --- pattern evaluation ---------------------------------------------------

def _extend(row: Row, pattern: TriplePattern, triple) -> Row | None:
    out = row
    for pterm, tterm in (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    ):
        if isinstance(pterm, Var):
            bound = out.get(pterm.name)
            if bound is None:
                if out is row:
                    out = dict(row)
                out[pterm.name] = tterm
            elif bound != tterm:
                return None
        elif pterm != tterm:
            return None
    return dict(out) if out is row else out


def _eval_bgp(rows: list[Row], patterns: list[TriplePattern], graph) -> list[Row]:
    for pattern in patterns:
        next_rows: list[Row] = []
        for row in rows:
            def concrete(term):
                if isinstance(term, Var):
                    return row.get(term.name)
                return term
            for triple in graph.match(concrete(pattern.subject), concrete(pattern.predicate),
                                      concrete(pattern.object)):
                extended = _extend(row, pattern, triple)
                if extended is not None:
                    next_rows.append(extended)
        rows = next_rows
    return rows


def _compatible(a: Row, b: Row) -> bool:
    for name, value in a.items():
        other = b.get(name)
        if other is not None and other != value:
            return False
    return True


def _inner_join(left: list[Row], right: list[Row]) -> list[Row]:
    out = []
    for l in left:
        for r in right:
            if _compatible(l, r):
                out.append({**l, **r})
    return out


def _left_outer_join(left: list[Row], right: list[Row]) -> list[Row]:
    out = []
    for l in left:
        matched = [{**l, **r} for r in right if _compatible(l, r)]
        out.extend(matched if matched else [l])
    return out


def _eval_node(node: PatternNode, graph) -> list[Row]:
    if isinstance(node, Bgp):
        return _eval_bgp([{}], node.patterns, graph)
    if isinstance(node, Union):
        return _eval_node(node.left, graph) + _eval_node(node.right, graph)
    if isinstance(node, Join):
        return _eval_join(node, graph)
    if isinstance(node, Optional):
        return _left_outer_join([{}], _eval_node(node.child, graph))
    if isinstance(node, Filter):
        raise ValueError("filter node outside a group")
    raise ValueError(f"unknown pattern node {node!r}")


def _eval_join(join: Join, graph) -> list[Row]:
    rows: list[Row] = [{}]
    filters = []
    for child in join.children:
        if isinstance(child, Filter):
            filters.append(child.expression)
        elif isinstance(child, Bgp):
            rows = _eval_bgp(rows, child.patterns, graph)
        elif isinstance(child, Optional):
            rows = _left_outer_join(rows, _eval_node(child.child, graph))
        else:
            rows = _inner_join(rows, _eval_node(child, graph))
    for expr in filters:
        rows = [r for r in rows if _filter_pass(expr, r)]
    return rows


# --- solution modifiers -----------------------------------------------------

def _order_value(expr: Expression, row: Row):
    """Total order honoring numeric values: unbound/error, then numeric
    literals, then other literals by codepoint, then IRIs, then blank nodes."""
    try:
        value = _as_term(_eval_expression(expr, row))
    except _FilterError:
        return (0, "")
    if isinstance(value, Literal):
        if value.datatype in _NUMERIC_DATATYPES:
            try:
                return (1, _numeric_value(value))
            except _FilterError:
                pass
        return (2, (value.lexical, value.language or "", value.datatype))
    if isinstance(value, Iri):
        return (3, value.value)
    return (4, value.label)


def _row_key(row: Row, variables: list[str]) -> tuple:
    return tuple(nt(row[v]) if v in row else None for v in variables)


def evaluate(ast: QueryAst, graph) -> ResultSet:
    rows = _eval_join(ast.pattern, graph)

    if ast.form == "ask":
        return ResultSet.ask(len(rows) > 0)

    for key in reversed(ast.order_by):
        rows.sort(key=lambda row: _order_value(key.expression, row), reverse=key.descending)

    if isinstance(ast.projection, Count):
        agg = ast.projection
        if agg.var is None:
            if agg.distinct:
                all_vars = pattern_variables(ast.pattern)
                count = len({_row_key(r, all_vars) for r in rows})
            else:
                count = len(rows)
        else:
            values = [r[agg.var.name] for r in rows if agg.var.name in r]
            count = len({nt(v) for v in values}) if agg.distinct else len(values)
        out_rows: list[Row] = [{agg.alias.name: Literal(str(count), XSD_INTEGER)}]
        variables = [agg.alias.name]
    else:
        variables = [v.name for v in ast.projection] if ast.projection is not None \
            else pattern_variables(ast.pattern)
        out_rows = [{v: row[v] for v in variables if v in row} for row in rows]
        if ast.distinct:
            seen = set()
            deduped = []
            for row in out_rows:
                key = _row_key(row, variables)
                if key not in seen:
                    seen.add(key)
                    deduped.append(row)
            out_rows = deduped

    start = ast.offset or 0
    if start:
        out_rows = out_rows[start:]
    if ast.limit is not None:
        out_rows = out_rows[:ast.limit]
    return ResultSet.bindings(variables, out_rows)
