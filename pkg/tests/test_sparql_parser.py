import pytest

from ontochat.rdf import Iri, Literal, RDF_TYPE, XSD_DECIMAL, XSD_INTEGER, XSD_STRING
from ontochat.sparql import (
    Bgp,
    Count,
    Filter,
    Join,
    Optional,
    QuerySyntaxError,
    TriplePattern,
    Union,
    UnsupportedSparqlFeature,
    Var,
    parse_query,
)
from ontochat.sparql.ast import Call, Comparison


def _bgps(ast):
    return [c for c in ast.pattern.children if isinstance(c, Bgp)]


def test_ask_single_pattern():
    ast = parse_query("ASK { ?s ?p ?o }")
    assert ast.form == "ask"
    (bgp,) = _bgps(ast)
    assert bgp.patterns == [TriplePattern(Var("s"), Var("p"), Var("o"))]


def test_count_aggregate_projection():
    ast = parse_query(
        "PREFIX fpd: <http://example.org/vdi3682#>\n"
        "SELECT (COUNT(?r) AS ?n) WHERE { ?r a fpd:TechnicalResource }")
    assert isinstance(ast.projection, Count)
    assert ast.projection.var == Var("r")
    assert ast.projection.alias == Var("n")
    assert not ast.projection.distinct
    (bgp,) = _bgps(ast)
    assert bgp.patterns[0].predicate == Iri(RDF_TYPE)


def test_order_by_ascending_variable():
    ast = parse_query(
        "PREFIX de: <http://example.org/dinen61360#>\n"
        "SELECT ?v WHERE { ?e de:value ?v } ORDER BY ASC(?v)")
    assert len(ast.order_by) == 1
    assert ast.order_by[0].expression == Var("v")
    assert not ast.order_by[0].descending


def test_order_by_descending_and_bare_variable():
    ast = parse_query("SELECT ?a ?b WHERE { ?a ?p ?b } ORDER BY DESC(?a) ?b")
    assert [k.descending for k in ast.order_by] == [True, False]


def test_semicolon_and_comma_abbreviations():
    ast = parse_query(
        "PREFIX e: <http://e/> SELECT ?x WHERE { ?x a e:C ; e:p e:a , e:b . }")
    (bgp,) = _bgps(ast)
    assert len(bgp.patterns) == 3
    assert all(p.subject == Var("x") for p in bgp.patterns)


def test_select_star_and_distinct_limit_offset():
    ast = parse_query("SELECT DISTINCT * WHERE { ?s ?p ?o } LIMIT 4 OFFSET 1")
    assert ast.projection is None
    assert ast.distinct
    assert ast.limit == 4
    assert ast.offset == 1


def test_optional_and_union_structure():
    ast = parse_query(
        "PREFIX e: <http://e/> SELECT ?s WHERE { "
        "{ ?s a e:A } UNION { ?s a e:B } OPTIONAL { ?s e:p ?v } }")
    kinds = [type(c).__name__ for c in ast.pattern.children]
    assert "Union" in kinds
    assert "Optional" in kinds


def test_filter_functions_parse():
    ast = parse_query(
        'SELECT ?s WHERE { ?s ?p ?v . FILTER(contains(str(?v), "x") && regex(str(?s), "a", "i")) }')
    (filt,) = [c for c in ast.pattern.children if isinstance(c, Filter)]
    assert filt.expression is not None


def test_filter_without_outer_parens():
    ast = parse_query('SELECT ?s WHERE { ?s ?p ?v . FILTER contains(str(?v), "x") }')
    (filt,) = [c for c in ast.pattern.children if isinstance(c, Filter)]
    assert isinstance(filt.expression, Call)


def test_typed_and_language_literals_in_patterns():
    ast = parse_query(
        'PREFIX xsd: <http://www.w3.org/2001/XMLSchema#> '
        'SELECT ?s WHERE { ?s ?p "1.5"^^xsd:decimal . ?s ?q "hi"@en . ?s ?r 7 }')
    (bgp,) = _bgps(ast)
    assert bgp.patterns[0].object == Literal("1.5", XSD_DECIMAL)
    assert bgp.patterns[1].object.language == "en"
    assert bgp.patterns[2].object == Literal("7", XSD_INTEGER)


def test_comparison_with_negative_number():
    ast = parse_query("SELECT ?v WHERE { ?s ?p ?v . FILTER(?v > -5) }")
    (filt,) = [c for c in ast.pattern.children if isinstance(c, Filter)]
    assert isinstance(filt.expression, Comparison)
    assert filt.expression.right == Literal("-5", XSD_INTEGER)


# --- errors ---

def test_syntax_error_has_position_and_expectation():
    with pytest.raises(QuerySyntaxError) as excinfo:
        parse_query("SELECT ?x WHERE { ?x ?p }")
    assert excinfo.value.position > 0
    assert excinfo.value.expected


def test_undeclared_prefix_rejected():
    with pytest.raises(QuerySyntaxError, match="undeclared"):
        parse_query("SELECT ?x WHERE { ?x a ex:C }")


def test_projected_variable_must_occur_in_pattern():
    with pytest.raises(QuerySyntaxError, match="ghost"):
        parse_query("SELECT ?ghost WHERE { ?s ?p ?o }")


def test_order_by_variable_must_occur_in_pattern():
    with pytest.raises(QuerySyntaxError, match="ghost"):
        parse_query("SELECT ?s WHERE { ?s ?p ?o } ORDER BY ASC(?ghost)")


def test_count_alias_usable_in_order_by():
    ast = parse_query("SELECT (COUNT(*) AS ?n) WHERE { ?s ?p ?o } ORDER BY DESC(?n)")
    assert isinstance(ast.projection, Count)
    assert ast.projection.var is None


def test_trailing_garbage_rejected():
    with pytest.raises(QuerySyntaxError, match="end of query"):
        parse_query("ASK { ?s ?p ?o } nonsense")


@pytest.mark.parametrize("query,name", [
    ("SELECT ?x WHERE { ?x <http://e/a>/<http://e/b> ?y }", "property path"),
    ("PREFIX e: <http://e/> SELECT ?x WHERE { ?x e:p+ ?y }", "property path"),
    ("SELECT ?x WHERE { { SELECT ?x WHERE { ?x ?p ?o } } }", "subquery"),
    ("SELECT ?x WHERE { ?x ?p ?o } GROUP BY ?x", "GROUP BY"),
    ("SELECT ?x WHERE { ?x ?p ?o . BIND(1 AS ?y) }", "BIND"),
    ("SELECT ?x WHERE { ?x ?p ?o . MINUS { ?x a ?c } }", "MINUS"),
    ("CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }", "CONSTRUCT"),
    ("ASK { _:b ?p ?o }", "blank node in pattern"),
    ('SELECT ?x WHERE { ?x ?p ?v . FILTER(lcase(?v) = "a") }', "function lcase"),
])
def test_unsupported_features_named(query, name):
    with pytest.raises(UnsupportedSparqlFeature) as excinfo:
        parse_query(query)
    assert excinfo.value.name == name


def test_keywords_are_case_insensitive():
    ast = parse_query("select ?x where { ?x ?p ?o } order by asc(?x) limit 1")
    assert ast.form == "select"
    assert ast.limit == 1
