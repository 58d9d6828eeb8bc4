"""Turtle subset parser.

Supported: @prefix / PREFIX directives, the `a` keyword, IRI refs, prefixed
names, string / integer / decimal / double / boolean literals, language tags,
^^ datatypes, predicate lists (;), object lists (,), and labelled blank nodes.
Collections and anonymous blank-node property lists are refused by name, never
dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .rdf import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    RDF_LANG_STRING,
    RDF_TYPE,
    Term,
    Triple,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
)


class TurtleSyntaxError(Exception):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class UnsupportedTurtleFeature(Exception):
    def __init__(self, name: str, line: int, column: int):
        self.name = name
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: unsupported Turtle feature: {name}")


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int
    # literal extras
    language: str | None = None


_ABSOLUTE_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_PNAME = re.compile(r"^(?P<prefix>[A-Za-z_][A-Za-z0-9_\-]*)?:(?P<local>[A-Za-z0-9_%](?:[A-Za-z0-9_.\-%]*[A-Za-z0-9_\-%])?)?")
_BLANK = re.compile(r"^_:(?P<label>[A-Za-z0-9_][A-Za-z0-9_.\-]*)")
_NUMBER = re.compile(r"^[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+|\d*\.\d+|\d+)")
_LANGTAG = re.compile(r"^@(?P<tag>[A-Za-z]+(?:-[A-Za-z0-9]+)*)")
_UNESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> TurtleSyntaxError:
        return TurtleSyntaxError(self.line, self.col, message)

    def _advance(self, count: int) -> str:
        chunk = self.text[self.pos:self.pos + count]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += count
        return chunk

    def _skip_trivia(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
            elif ch == "#":
                end = self.text.find("\n", self.pos)
                self._advance((len(self.text) if end == -1 else end) - self.pos)
            else:
                return

    def _string(self) -> _Token:
        line, col = self.line, self.col
        quote = self.text[self.pos]
        long_form = self.text.startswith(quote * 3, self.pos)
        delim = quote * 3 if long_form else quote
        self._advance(len(delim))
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise TurtleSyntaxError(line, col, "unterminated string literal")
            ch = self.text[self.pos]
            if not long_form and ch in "\n\r":
                raise TurtleSyntaxError(line, col, "newline in single-line string literal")
            if self.text.startswith(delim, self.pos):
                self._advance(len(delim))
                return _Token("string", "".join(out), line, col)
            if ch == "\\":
                self._advance(1)
                if self.pos >= len(self.text):
                    raise TurtleSyntaxError(line, col, "dangling escape in string literal")
                esc = self._advance(1)
                if esc in _UNESCAPES:
                    out.append(_UNESCAPES[esc])
                elif esc in "uU":
                    width = 4 if esc == "u" else 8
                    hexpart = self._advance(width)
                    if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                        raise TurtleSyntaxError(line, col, f"bad \\{esc} escape in string literal")
                    out.append(chr(int(hexpart, 16)))
                else:
                    raise TurtleSyntaxError(line, col, f"unknown escape \\{esc}")
            else:
                out.append(self._advance(1))

    def _iriref(self) -> _Token:
        line, col = self.line, self.col
        self._advance(1)
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise TurtleSyntaxError(line, col, "unterminated IRI reference")
            ch = self.text[self.pos]
            if ch == ">":
                self._advance(1)
                return _Token("iriref", "".join(out), line, col)
            if ch in " \t\n\r<\"{}|^`":
                raise TurtleSyntaxError(self.line, self.col, f"invalid character {ch!r} in IRI reference")
            if ch == "\\":
                self._advance(1)
                esc = self._advance(1)
                if esc not in "uU":
                    raise TurtleSyntaxError(line, col, f"unknown IRI escape \\{esc}")
                width = 4 if esc == "u" else 8
                hexpart = self._advance(width)
                if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                    raise TurtleSyntaxError(line, col, f"bad \\{esc} escape in IRI reference")
                out.append(chr(int(hexpart, 16)))
            else:
                out.append(self._advance(1))

    def next_token(self) -> _Token:
        self._skip_trivia()
        line, col = self.line, self.col
        if self.pos >= len(self.text):
            return _Token("eof", "", line, col)
        rest = self.text[self.pos:]
        ch = rest[0]
        if ch == "<":
            return self._iriref()
        if ch in "\"'":
            return self._string()
        if ch == "(":
            raise UnsupportedTurtleFeature("collection", line, col)
        if ch == "[":
            raise UnsupportedTurtleFeature("anonymous blank node property list", line, col)
        if rest.startswith("^^"):
            self._advance(2)
            return _Token("^^", "^^", line, col)
        if ch in ".;,":
            # Distinguish statement dot from a leading-dot decimal.
            if ch != "." or not re.match(r"^\.\d", rest):
                self._advance(1)
                return _Token(ch, ch, line, col)
        if ch == "@":
            m = _LANGTAG.match(rest)
            if m and m.group("tag") in ("prefix", "base"):
                self._advance(len(m.group(0)))
                return _Token("directive", "@" + m.group("tag"), line, col)
            if m:
                self._advance(len(m.group(0)))
                return _Token("langtag", m.group("tag"), line, col)
            raise TurtleSyntaxError(line, col, "stray '@'")
        m = _BLANK.match(rest)
        if m:
            label = m.group("label").rstrip(".")
            self._advance(2 + len(label))
            return _Token("blank", label, line, col)
        m = _NUMBER.match(rest)
        if m:
            self._advance(len(m.group(0)))
            return _Token("number", m.group(0), line, col)
        m = _PNAME.match(rest)
        if m:
            matched = m.group(0)
            self._advance(len(matched))
            return _Token("pname", matched, line, col)
        m = re.match(r"^[A-Za-z]+", rest)
        if m:
            word = m.group(0)
            nxt = rest[len(word):len(word) + 1]
            if word in ("a", "true", "false") or (word.upper() in ("PREFIX", "BASE") and nxt != ":"):
                self._advance(len(word))
                if word.upper() in ("PREFIX", "BASE") and word not in ("a", "true", "false"):
                    return _Token("directive", word.upper(), line, col)
                return _Token("word", word, line, col)
        raise TurtleSyntaxError(line, col, f"unexpected character {ch!r}")


class _Parser:
    def __init__(self, text: str):
        self.lexer = _Lexer(text)
        self.graph = Graph()
        self.diagnostics: list[str] = []
        self.token = self.lexer.next_token()

    def _next(self) -> None:
        self.token = self.lexer.next_token()

    def _expect(self, kind: str, what: str) -> _Token:
        tok = self.token
        if tok.kind != kind:
            raise TurtleSyntaxError(tok.line, tok.column, f"expected {what}, got {tok.value!r}")
        self._next()
        return tok

    def _expand_pname(self, tok: _Token) -> Iri:
        prefix, _, local = tok.value.partition(":")
        if prefix not in self.graph.prefixes:
            raise TurtleSyntaxError(tok.line, tok.column, f"undeclared prefix {prefix!r}")
        return Iri(self.graph.prefixes[prefix] + local)

    def _iri_term(self, tok: _Token) -> Iri:
        if tok.kind == "iriref":
            if not _ABSOLUTE_IRI.match(tok.value):
                raise TurtleSyntaxError(tok.line, tok.column,
                                        f"relative IRI {tok.value!r} (no base support)")
            return Iri(tok.value)
        return self._expand_pname(tok)

    def _directive(self) -> None:
        tok = self.token
        if tok.value in ("@base", "BASE"):
            raise UnsupportedTurtleFeature("base directive", tok.line, tok.column)
        sparql_form = tok.value == "PREFIX"
        self._next()
        name_tok = self._expect("pname", "prefix name")
        prefix, _, local = name_tok.value.partition(":")
        if local:
            raise TurtleSyntaxError(name_tok.line, name_tok.column, "prefix declaration must end with ':'")
        ns_tok = self._expect("iriref", "namespace IRI")
        if prefix in self.graph.prefixes and self.graph.prefixes[prefix] != ns_tok.value:
            self.diagnostics.append(f"prefix {prefix!r} redefined at line {name_tok.line}")
        self.graph.bind(prefix, ns_tok.value)
        if not sparql_form:
            self._expect(".", "'.' after @prefix directive")

    def _object(self) -> Term:
        tok = self.token
        if tok.kind in ("iriref", "pname"):
            term: Term = self._iri_term(tok)
            self._next()
            return term
        if tok.kind == "blank":
            self._next()
            return BlankNode(tok.value)
        if tok.kind == "string":
            self._next()
            if self.token.kind == "langtag":
                lang = self.token.value
                self._next()
                return Literal(tok.value, RDF_LANG_STRING, lang)
            if self.token.kind == "^^":
                self._next()
                dt_tok = self.token
                if dt_tok.kind not in ("iriref", "pname"):
                    raise TurtleSyntaxError(dt_tok.line, dt_tok.column, "expected datatype IRI after '^^'")
                dt = self._iri_term(dt_tok)
                self._next()
                return Literal(tok.value, dt.value)
            return Literal(tok.value, XSD_STRING)
        if tok.kind == "number":
            self._next()
            if "e" in tok.value or "E" in tok.value:
                return Literal(tok.value, XSD_DOUBLE)
            if "." in tok.value:
                return Literal(tok.value, XSD_DECIMAL)
            return Literal(tok.value, XSD_INTEGER)
        if tok.kind == "word" and tok.value in ("true", "false"):
            self._next()
            return Literal(tok.value, XSD_BOOLEAN)
        raise TurtleSyntaxError(tok.line, tok.column, f"expected an RDF term, got {tok.value!r}")

    def _subject(self) -> Term:
        tok = self.token
        if tok.kind in ("iriref", "pname"):
            term: Term = self._iri_term(tok)
            self._next()
            return term
        if tok.kind == "blank":
            self._next()
            return BlankNode(tok.value)
        raise TurtleSyntaxError(tok.line, tok.column, f"expected subject, got {tok.value!r}")

    def _verb(self) -> Iri:
        tok = self.token
        if tok.kind == "word" and tok.value == "a":
            self._next()
            return Iri(RDF_TYPE)
        if tok.kind in ("iriref", "pname"):
            term = self._iri_term(tok)
            self._next()
            return term
        raise TurtleSyntaxError(tok.line, tok.column, f"expected predicate, got {tok.value!r}")

    def _triples(self) -> None:
        subject = self._subject()
        while True:
            predicate = self._verb()
            while True:
                obj = self._object()
                self.graph.add(Triple(subject, predicate, obj))
                if self.token.kind == ",":
                    self._next()
                    continue
                break
            if self.token.kind == ";":
                self._next()
                # Turtle allows a dangling ';' before the statement dot.
                if self.token.kind in (".", ";"):
                    while self.token.kind == ";":
                        self._next()
                    break
                continue
            break
        self._expect(".", "'.' at end of statement")

    def parse(self) -> tuple[Graph, list[str]]:
        while self.token.kind != "eof":
            if self.token.kind == "directive":
                self._directive()
            else:
                self._triples()
        return self.graph, self.diagnostics


def parse_turtle(text: str) -> tuple[Graph, list[str]]:
    """Parse a Turtle document into a Graph plus non-fatal diagnostics."""
    return _Parser(text).parse()
