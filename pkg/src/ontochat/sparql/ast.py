"""AST for the supported SPARQL subset.

A query is SELECT or ASK over a tree of pattern nodes: BGPs of triple
patterns, filters, optionals, unions, and joins (brace groups). Triple
patterns hold only variables, IRIs, and literals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..rdf import Iri, Literal


@dataclass(frozen=True)
class Var:
    name: str  # without the leading '?'


PatternTerm = Var | Iri | Literal


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> set[str]:
        return {t.name for t in (self.subject, self.predicate, self.object) if isinstance(t, Var)}


# --- filter expressions -------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    op: str  # = != < <= > >=
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class And:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Or:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Not:
    operand: "Expression"


@dataclass(frozen=True)
class Call:
    func: str  # regex | str | contains | bound (lowercased)
    args: tuple["Expression", ...]


Expression = Comparison | And | Or | Not | Call | Var | Iri | Literal


def expression_variables(expr: Expression) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Comparison):
        return expression_variables(expr.left) | expression_variables(expr.right)
    if isinstance(expr, (And, Or)):
        return expression_variables(expr.left) | expression_variables(expr.right)
    if isinstance(expr, Not):
        return expression_variables(expr.operand)
    if isinstance(expr, Call):
        out: set[str] = set()
        for a in expr.args:
            out |= expression_variables(a)
        return out
    return set()


# --- pattern nodes ------------------------------------------------------

@dataclass
class Bgp:
    patterns: list[TriplePattern] = field(default_factory=list)


@dataclass
class Filter:
    expression: Expression


@dataclass
class Optional:
    child: "PatternNode"


@dataclass
class Union:
    left: "PatternNode"
    right: "PatternNode"


@dataclass
class Join:
    children: list["PatternNode"] = field(default_factory=list)


PatternNode = Bgp | Filter | Optional | Union | Join


def pattern_variables(node: PatternNode) -> list[str]:
    """Variables bound by the pattern, in first-appearance order.
    Filter-only variables do not bind and are excluded."""
    out: list[str] = []

    def visit(n: PatternNode) -> None:
        if isinstance(n, Bgp):
            for tp in n.patterns:
                for t in (tp.subject, tp.predicate, tp.object):
                    if isinstance(t, Var) and t.name not in out:
                        out.append(t.name)
        elif isinstance(n, Filter):
            return
        elif isinstance(n, Optional):
            visit(n.child)
        elif isinstance(n, Union):
            visit(n.left)
            visit(n.right)
        else:
            for c in n.children:
                visit(c)

    visit(node)
    return out


# --- query --------------------------------------------------------------

@dataclass(frozen=True)
class Count:
    var: Var | None  # None counts rows (COUNT(*))
    distinct: bool
    alias: Var


@dataclass(frozen=True)
class OrderKey:
    expression: Expression
    descending: bool = False


@dataclass
class QueryAst:
    form: str  # "select" | "ask"
    pattern: Join
    projection: list[Var] | Count | None = None  # None = SELECT * (all pattern vars)
    distinct: bool = False
    order_by: list[OrderKey] = field(default_factory=list)
    limit: int | None = None
    offset: int | None = None
