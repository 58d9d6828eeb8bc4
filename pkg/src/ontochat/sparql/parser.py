"""Recursive-descent parser for the SPARQL subset.

Covers PREFIX, SELECT [DISTINCT] with variable or COUNT projections, ASK,
brace groups with '.'-separated triple patterns plus ';'/',' abbreviations,
FILTER, OPTIONAL, UNION, ORDER BY, LIMIT, and OFFSET. Anything outside the
subset (property paths, subqueries, GROUP BY, ...) raises
UnsupportedSparqlFeature by name so callers can distinguish "out of subset"
from "malformed".
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..rdf import Iri, Literal, RDF_LANG_STRING, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, XSD_STRING
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
    PatternTerm,
    QueryAst,
    TriplePattern,
    Union,
    Var,
    expression_variables,
    pattern_variables,
)


class QuerySyntaxError(Exception):
    """Malformed query text. The message is what the repair loop feeds back."""

    def __init__(self, position: int, expected: str, found: str = ""):
        self.position = position
        self.expected = expected
        self.found = found
        detail = f"expected {expected}" + (f", found {found!r}" if found else "")
        super().__init__(f"at offset {position}: {detail}")


class UnsupportedSparqlFeature(Exception):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unsupported SPARQL feature: {name}")


_KEYWORDS = {
    "PREFIX", "SELECT", "ASK", "DISTINCT", "COUNT", "AS", "WHERE", "FILTER",
    "OPTIONAL", "UNION", "ORDER", "BY", "ASC", "DESC", "LIMIT", "OFFSET",
}
_UNSUPPORTED_KEYWORDS = {
    "CONSTRUCT", "DESCRIBE", "INSERT", "DELETE", "GROUP", "HAVING", "BIND",
    "VALUES", "MINUS", "GRAPH", "SERVICE", "REDUCED", "FROM", "NAMED",
    "EXISTS", "SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT", "BASE",
}
_FUNCTIONS = {"regex", "str", "contains", "bound"}

_IRIREF = re.compile(r'<[^<>"{}|^`\\\x00-\x20]*>')
_VAR = re.compile(r"[?$]([A-Za-z_][A-Za-z0-9_]*)")
_PNAME = re.compile(r"([A-Za-z_][A-Za-z0-9_\-]*)?:([A-Za-z0-9_%](?:[A-Za-z0-9_.\-%]*[A-Za-z0-9_\-%])?)?")
_NUMBER = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_LANGTAG = re.compile(r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*")
_STRING = re.compile(r'"((?:[^"\\\n\r]|\\.)*)"' + r"|'((?:[^'\\\n\r]|\\.)*)'")
_UNESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass(frozen=True)
class _Tok:
    kind: str  # word, var, iriref, pname, blank, string, number, langtag, punct, eof
    value: str
    pos: int


def _unescape(body: str, pos: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        esc = body[i + 1]
        if esc in _UNESCAPES:
            out.append(_UNESCAPES[esc])
            i += 2
        elif esc in "uU":
            width = 4 if esc == "u" else 8
            hexpart = body[i + 2:i + 2 + width]
            if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                raise QuerySyntaxError(pos + i, "valid unicode escape")
            out.append(chr(int(hexpart, 16)))
            i += 2 + width
        else:
            raise QuerySyntaxError(pos + i, "valid string escape", f"\\{esc}")
    return "".join(out)


def _tokenize(text: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "#":
            end = text.find("\n", i)
            i = n if end == -1 else end + 1
            continue
        if ch == "<":
            m = _IRIREF.match(text, i)
            if m:
                tokens.append(_Tok("iriref", m.group(0)[1:-1], i))
                i = m.end()
                continue
            if text.startswith("<=", i):
                tokens.append(_Tok("punct", "<=", i))
                i += 2
                continue
            tokens.append(_Tok("punct", "<", i))
            i += 1
            continue
        if text.startswith("_:", i):
            tokens.append(_Tok("blank", "_:", i))
            i += 2
            continue
        two = text[i:i + 2]
        if two in (">=", "!=", "&&", "||", "^^"):
            tokens.append(_Tok("punct", two, i))
            i += 2
            continue
        if ch in '"\'':
            m = _STRING.match(text, i)
            if not m:
                raise QuerySyntaxError(i, "terminated string literal")
            body = m.group(1) if m.group(1) is not None else m.group(2)
            tokens.append(_Tok("string", _unescape(body, i), i))
            i = m.end()
            continue
        if ch == "@":
            m = _LANGTAG.match(text, i)
            if not m:
                raise QuerySyntaxError(i, "language tag")
            tokens.append(_Tok("langtag", m.group(0)[1:], i))
            i = m.end()
            continue
        m = _VAR.match(text, i)
        if m:
            tokens.append(_Tok("var", m.group(1), i))
            i = m.end()
            continue
        if ch in "+-0123456789." and _NUMBER.match(text, i) and not (ch == "." and not text[i + 1:i + 2].isdigit()):
            m = _NUMBER.match(text, i)
            tokens.append(_Tok("number", m.group(0), i))
            i = m.end()
            continue
        m = _PNAME.match(text, i)
        if m and m.group(0) != "":
            tokens.append(_Tok("pname", m.group(0), i))
            i = m.end()
            continue
        m = _WORD.match(text, i)
        if m:
            tokens.append(_Tok("word", m.group(0), i))
            i = m.end()
            continue
        if ch in "{}().;,*=<>!/|^+?":
            tokens.append(_Tok("punct", ch, i))
            i += 1
            continue
        raise QuerySyntaxError(i, "a SPARQL token", ch)
    tokens.append(_Tok("eof", "", n))
    return tokens


_PATH_PUNCT = {"/", "|", "^", "+", "*", "?"}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.idx = 0
        self.prefixes: dict[str, str] = {}

    @property
    def tok(self) -> _Tok:
        return self.tokens[self.idx]

    def _advance(self) -> _Tok:
        tok = self.tok
        self.idx += 1
        return tok

    def _kw(self, word: str) -> bool:
        return self.tok.kind == "word" and self.tok.value.upper() == word

    def _expect_kw(self, word: str) -> None:
        if not self._kw(word):
            raise QuerySyntaxError(self.tok.pos, f"keyword {word}", self.tok.value)
        self._advance()

    def _expect_punct(self, value: str) -> None:
        if not (self.tok.kind == "punct" and self.tok.value == value):
            raise QuerySyntaxError(self.tok.pos, f"{value!r}", self.tok.value)
        self._advance()

    def _check_unsupported_word(self) -> None:
        if self.tok.kind == "word" and self.tok.value.upper() in _UNSUPPORTED_KEYWORDS:
            name = self.tok.value.upper()
            raise UnsupportedSparqlFeature("GROUP BY" if name == "GROUP" else name)

    # --- terms ---

    def _iri(self, tok: _Tok) -> Iri:
        if tok.kind == "iriref":
            return Iri(tok.value)
        prefix, _, local = tok.value.partition(":")
        if prefix not in self.prefixes:
            raise QuerySyntaxError(tok.pos, f"declared prefix (got undeclared {prefix!r}:)")
        return Iri(self.prefixes[prefix] + local)

    def _literal(self) -> Literal:
        tok = self._advance()
        if tok.kind == "string":
            if self.tok.kind == "langtag":
                lang = self._advance().value
                return Literal(tok.value, RDF_LANG_STRING, lang)
            if self.tok.kind == "punct" and self.tok.value == "^^":
                self._advance()
                dt_tok = self.tok
                if dt_tok.kind not in ("iriref", "pname"):
                    raise QuerySyntaxError(dt_tok.pos, "datatype IRI after '^^'", dt_tok.value)
                self._advance()
                return Literal(tok.value, self._iri(dt_tok).value)
            return Literal(tok.value, XSD_STRING)
        if tok.kind == "number":
            if "e" in tok.value or "E" in tok.value:
                return Literal(tok.value, XSD_DOUBLE)
            if "." in tok.value:
                return Literal(tok.value, XSD_DECIMAL)
            return Literal(tok.value, XSD_INTEGER)
        if tok.kind == "word" and tok.value in ("true", "false"):
            return Literal(tok.value, XSD_BOOLEAN)
        raise QuerySyntaxError(tok.pos, "a literal", tok.value)

    def _pattern_term(self, *, role: str) -> PatternTerm:
        tok = self.tok
        if tok.kind == "blank":
            raise UnsupportedSparqlFeature("blank node in pattern")
        if tok.kind == "var":
            self._advance()
            return Var(tok.value)
        if tok.kind in ("iriref", "pname"):
            self._advance()
            return self._iri(tok)
        if role == "object" and tok.kind in ("string", "number") or (
            role == "object" and tok.kind == "word" and tok.value in ("true", "false")
        ):
            return self._literal()
        raise QuerySyntaxError(tok.pos, f"a {role} term", tok.value)

    def _verb(self) -> PatternTerm:
        tok = self.tok
        if tok.kind == "word" and tok.value == "a":
            self._advance()
            verb: PatternTerm = Iri(RDF_TYPE)
        elif tok.kind == "var":
            self._advance()
            verb = Var(tok.value)
        elif tok.kind in ("iriref", "pname"):
            self._advance()
            verb = self._iri(tok)
        elif tok.kind == "punct" and tok.value in _PATH_PUNCT:
            raise UnsupportedSparqlFeature("property path")
        else:
            raise QuerySyntaxError(tok.pos, "a predicate", tok.value)
        if self.tok.kind == "punct" and self.tok.value in _PATH_PUNCT:
            raise UnsupportedSparqlFeature("property path")
        return verb

    # --- pattern groups ---

    def _group(self) -> Join:
        self._expect_punct("{")
        join = Join([])
        bgp: Bgp | None = None
        while True:
            tok = self.tok
            if tok.kind == "eof":
                raise QuerySyntaxError(tok.pos, "'}' to close group")
            if tok.kind == "punct" and tok.value == "}":
                self._advance()
                return join
            if tok.kind == "punct" and tok.value == ".":
                self._advance()
                continue
            if self._kw("FILTER"):
                self._advance()
                join.children.append(Filter(self._constraint()))
                bgp = None
                continue
            if self._kw("OPTIONAL"):
                self._advance()
                join.children.append(Optional(self._group_or_union()))
                bgp = None
                continue
            if tok.kind == "punct" and tok.value == "{":
                join.children.append(self._group_or_union())
                bgp = None
                continue
            if self._kw("SELECT"):
                raise UnsupportedSparqlFeature("subquery")
            self._check_unsupported_word()
            if bgp is None:
                bgp = Bgp([])
                join.children.append(bgp)
            self._triples_block(bgp)

    def _group_or_union(self) -> PatternNode:
        if self.tok.kind == "punct" and self.tok.value == "{":
            save = self.idx
            self._advance()
            if self._kw("SELECT"):
                raise UnsupportedSparqlFeature("subquery")
            self.idx = save
        node: PatternNode = self._group()
        while self._kw("UNION"):
            self._advance()
            node = Union(node, self._group())
        return node

    def _triples_block(self, bgp: Bgp) -> None:
        subject = self._pattern_term(role="subject")
        while True:
            predicate = self._verb()
            while True:
                obj = self._pattern_term(role="object")
                bgp.patterns.append(TriplePattern(subject, predicate, obj))
                if self.tok.kind == "punct" and self.tok.value == ",":
                    self._advance()
                    continue
                break
            if self.tok.kind == "punct" and self.tok.value == ";":
                self._advance()
                while self.tok.kind == "punct" and self.tok.value == ";":
                    self._advance()
                if self.tok.kind == "punct" and self.tok.value in (".", "}"):
                    break
                if self._kw("FILTER") or self._kw("OPTIONAL"):
                    break
                continue
            break
        if self.tok.kind == "punct" and self.tok.value == ".":
            self._advance()

    # --- expressions ---

    def _constraint(self) -> Expression:
        tok = self.tok
        if tok.kind == "punct" and tok.value == "(":
            self._advance()
            expr = self._expression()
            self._expect_punct(")")
            return expr
        if tok.kind == "word":
            return self._call_or_error()
        raise QuerySyntaxError(tok.pos, "'(' or a builtin call after FILTER", tok.value)

    def _call_or_error(self) -> Expression:
        tok = self._advance()
        name = tok.value.lower()
        if tok.value.upper() in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedSparqlFeature(tok.value.upper())
        if name not in _FUNCTIONS:
            raise UnsupportedSparqlFeature(f"function {tok.value}")
        self._expect_punct("(")
        args: list[Expression] = []
        if not (self.tok.kind == "punct" and self.tok.value == ")"):
            args.append(self._expression())
            while self.tok.kind == "punct" and self.tok.value == ",":
                self._advance()
                args.append(self._expression())
        self._expect_punct(")")
        arity = {"regex": (2, 3), "str": (1, 1), "contains": (2, 2), "bound": (1, 1)}[name]
        if not (arity[0] <= len(args) <= arity[1]):
            raise QuerySyntaxError(tok.pos, f"{name} with {arity[0]} argument(s)")
        if name == "bound" and not isinstance(args[0], Var):
            raise QuerySyntaxError(tok.pos, "a variable argument to bound()")
        return Call(name, tuple(args))

    def _expression(self) -> Expression:
        left = self._and_expression()
        while self.tok.kind == "punct" and self.tok.value == "||":
            self._advance()
            left = Or(left, self._and_expression())
        return left

    def _and_expression(self) -> Expression:
        left = self._relational()
        while self.tok.kind == "punct" and self.tok.value == "&&":
            self._advance()
            left = And(left, self._relational())
        return left

    def _relational(self) -> Expression:
        left = self._primary()
        if self.tok.kind == "punct" and self.tok.value in ("=", "!=", "<", "<=", ">", ">="):
            op = self._advance().value
            return Comparison(op, left, self._primary())
        return left

    def _primary(self) -> Expression:
        tok = self.tok
        if tok.kind == "punct" and tok.value == "!":
            self._advance()
            return Not(self._primary())
        if tok.kind == "punct" and tok.value == "(":
            self._advance()
            expr = self._expression()
            self._expect_punct(")")
            return expr
        if tok.kind == "var":
            self._advance()
            return Var(tok.value)
        if tok.kind in ("string", "number"):
            return self._literal()
        if tok.kind == "word":
            if tok.value in ("true", "false"):
                return self._literal()
            return self._call_or_error()
        if tok.kind in ("iriref", "pname"):
            self._advance()
            return self._iri(tok)
        raise QuerySyntaxError(tok.pos, "an expression", tok.value)

    # --- queries ---

    def _prologue(self) -> None:
        while self._kw("PREFIX"):
            self._advance()
            tok = self.tok
            if tok.kind != "pname":
                raise QuerySyntaxError(tok.pos, "prefix name ending in ':'", tok.value)
            prefix, _, local = tok.value.partition(":")
            if local:
                raise QuerySyntaxError(tok.pos, "prefix declaration ending in ':'", tok.value)
            self._advance()
            ns = self.tok
            if ns.kind != "iriref":
                raise QuerySyntaxError(ns.pos, "namespace IRI", ns.value)
            self._advance()
            self.prefixes[prefix] = ns.value

    def _projection(self) -> tuple[list[Var] | Count | None, bool]:
        distinct = False
        if self._kw("DISTINCT"):
            self._advance()
            distinct = True
        elif self._kw("REDUCED"):
            raise UnsupportedSparqlFeature("REDUCED")
        if self.tok.kind == "punct" and self.tok.value == "*":
            self._advance()
            return None, distinct
        if self.tok.kind == "punct" and self.tok.value == "(":
            self._advance()
            self._check_unsupported_word()
            if not self._kw("COUNT"):
                raise QuerySyntaxError(self.tok.pos, "COUNT aggregate", self.tok.value)
            self._advance()
            self._expect_punct("(")
            count_distinct = False
            if self._kw("DISTINCT"):
                self._advance()
                count_distinct = True
            if self.tok.kind == "punct" and self.tok.value == "*":
                self._advance()
                counted: Var | None = None
            elif self.tok.kind == "var":
                counted = Var(self._advance().value)
            else:
                raise QuerySyntaxError(self.tok.pos, "variable or '*' inside COUNT", self.tok.value)
            self._expect_punct(")")
            self._expect_kw("AS")
            if self.tok.kind != "var":
                raise QuerySyntaxError(self.tok.pos, "alias variable after AS", self.tok.value)
            alias = Var(self._advance().value)
            self._expect_punct(")")
            return Count(counted, count_distinct, alias), distinct
        if self.tok.kind == "var":
            out = []
            while self.tok.kind == "var":
                out.append(Var(self._advance().value))
            return out, distinct
        raise QuerySyntaxError(self.tok.pos, "projection: variables, '*' or (COUNT ... AS ?var)", self.tok.value)

    def _modifiers(self, ast: QueryAst) -> None:
        while True:
            if self._kw("ORDER"):
                self._advance()
                self._expect_kw("BY")
                keys: list[OrderKey] = []
                while True:
                    if self._kw("ASC") or self._kw("DESC"):
                        descending = self.tok.value.upper() == "DESC"
                        self._advance()
                        self._expect_punct("(")
                        expr = self._expression()
                        self._expect_punct(")")
                        keys.append(OrderKey(expr, descending))
                    elif self.tok.kind == "var":
                        keys.append(OrderKey(Var(self._advance().value), False))
                    elif self.tok.kind == "word" and self.tok.value.lower() in _FUNCTIONS:
                        keys.append(OrderKey(self._call_or_error(), False))
                    else:
                        break
                if not keys:
                    raise QuerySyntaxError(self.tok.pos, "sort key after ORDER BY", self.tok.value)
                ast.order_by = keys
                continue
            if self._kw("LIMIT"):
                self._advance()
                if self.tok.kind != "number" or not self.tok.value.isdigit():
                    raise QuerySyntaxError(self.tok.pos, "non-negative integer after LIMIT", self.tok.value)
                ast.limit = int(self._advance().value)
                continue
            if self._kw("OFFSET"):
                self._advance()
                if self.tok.kind != "number" or not self.tok.value.isdigit():
                    raise QuerySyntaxError(self.tok.pos, "non-negative integer after OFFSET", self.tok.value)
                ast.offset = int(self._advance().value)
                continue
            return

    def _validate(self, ast: QueryAst) -> None:
        in_pattern = set(pattern_variables(ast.pattern))
        declared = set(in_pattern)
        if isinstance(ast.projection, Count):
            if ast.projection.var is not None and ast.projection.var.name not in in_pattern:
                raise QuerySyntaxError(0, f"counted variable ?{ast.projection.var.name} to appear in the pattern")
            declared.add(ast.projection.alias.name)
        elif ast.projection is not None:
            for v in ast.projection:
                if v.name not in in_pattern:
                    raise QuerySyntaxError(0, f"projected variable ?{v.name} to appear in the pattern")
        for key in ast.order_by:
            for name in expression_variables(key.expression):
                if name not in declared:
                    raise QuerySyntaxError(0, f"ORDER BY variable ?{name} to appear in the pattern")

    def parse(self) -> QueryAst:
        self._prologue()
        self._check_unsupported_word()
        if self._kw("SELECT"):
            self._advance()
            projection, distinct = self._projection()
            if self._kw("WHERE"):
                self._advance()
            pattern = self._group()
            ast = QueryAst("select", pattern, projection, distinct)
            self._modifiers(ast)
        elif self._kw("ASK"):
            self._advance()
            if self._kw("WHERE"):
                self._advance()
            pattern = self._group()
            ast = QueryAst("ask", pattern, [])
            self._modifiers(ast)
        else:
            raise QuerySyntaxError(self.tok.pos, "SELECT or ASK query", self.tok.value)
        if self.tok.kind != "eof":
            self._check_unsupported_word()
            raise QuerySyntaxError(self.tok.pos, "end of query", self.tok.value)
        self._validate(ast)
        return ast


def parse_query(text: str) -> QueryAst:
    """Parse SPARQL text into a QueryAst, expanding all prefixed names."""
    return _Parser(text).parse()
