import pytest
from hypothesis import given, settings, strategies as st

from ontochat.rdf import BlankNode, Iri, Literal, XSD_INTEGER
from ontochat.sparql import ResultSet, results_equal
from ontochat.sparql.results import MalformedResults


def _rs(variables, rows):
    return ResultSet.bindings(variables, rows)


I = lambda s: Iri(f"http://e/{s}")
L = lambda s: Literal(str(s), XSD_INTEGER)


def test_identical_results_are_equal():
    a = _rs(["x"], [{"x": I("a")}, {"x": I("b")}])
    b = _rs(["x"], [{"x": I("a")}, {"x": I("b")}])
    assert results_equal(a, b)
    assert results_equal(a, b, ordered=True)


def test_variable_names_are_ignored():
    a = _rs(["x"], [{"x": I("a")}])
    b = _rs(["y"], [{"y": I("a")}])
    assert results_equal(a, b)


def test_row_order_matters_only_when_ordered():
    a = _rs(["x"], [{"x": L(1)}, {"x": L(2)}])
    b = _rs(["x"], [{"x": L(2)}, {"x": L(1)}])
    assert results_equal(a, b)
    assert not results_equal(a, b, ordered=True)


def test_column_bijection_alignment():
    a = _rs(["x", "y"], [{"x": I("a"), "y": L(1)}, {"x": I("b"), "y": L(2)}])
    b = _rs(["v", "w"], [{"w": I("a"), "v": L(1)}, {"w": I("b"), "v": L(2)}])
    assert results_equal(a, b)


def test_no_value_preserving_bijection_means_unequal():
    a = _rs(["x", "y"], [{"x": I("a"), "y": L(1)}])
    b = _rs(["x", "y"], [{"x": I("a"), "y": L(2)}])
    assert not results_equal(a, b)


def test_different_arity_unequal():
    assert not results_equal(_rs(["x"], []), _rs(["x", "y"], []))


def test_ask_vs_select_unequal():
    assert not results_equal(ResultSet.ask(True), _rs(["x"], []))


def test_ask_equality_by_value():
    assert results_equal(ResultSet.ask(True), ResultSet.ask(True))
    assert not results_equal(ResultSet.ask(True), ResultSet.ask(False))


def test_unbound_cells_compare():
    a = _rs(["x", "y"], [{"x": I("a")}])
    b = _rs(["x", "y"], [{"x": I("a")}])
    c = _rs(["x", "y"], [{"x": I("a"), "y": I("b")}])
    assert results_equal(a, b)
    assert not results_equal(a, c)


def test_blank_nodes_compare_by_bijection():
    a = _rs(["x"], [{"x": BlankNode("m")}, {"x": BlankNode("m")}, {"x": BlankNode("n")}])
    b = _rs(["x"], [{"x": BlankNode("p")}, {"x": BlankNode("p")}, {"x": BlankNode("q")}])
    c = _rs(["x"], [{"x": BlankNode("p")}, {"x": BlankNode("q")}, {"x": BlankNode("r")}])
    assert results_equal(a, b)
    assert not results_equal(a, c)


def test_blank_node_bijection_is_consistent_across_rows():
    a = _rs(["x", "y"], [{"x": BlankNode("m"), "y": BlankNode("m")}])
    b = _rs(["x", "y"], [{"x": BlankNode("p"), "y": BlankNode("q")}])
    assert not results_equal(a, b)


def test_reflexive_and_symmetric():
    a = _rs(["x"], [{"x": I("a")}, {"x": L(3)}])
    b = _rs(["k"], [{"k": L(3)}, {"k": I("a")}])
    assert results_equal(a, a)
    assert results_equal(a, b) == results_equal(b, a) == True


@given(st.permutations(list(range(6))))
@settings(max_examples=40, deadline=None)
def test_unordered_equality_invariant_under_row_permutation(order):
    rows = [{"x": I(c), "y": L(i)} for i, c in enumerate("abcdef")]
    a = _rs(["x", "y"], rows)
    b = _rs(["x", "y"], [rows[i] for i in order])
    assert results_equal(a, b)


# --- JSON codec ---

def test_json_roundtrip_bindings():
    rows = [
        {"x": I("a"), "v": Literal("1.5", "http://www.w3.org/2001/XMLSchema#decimal")},
        {"x": BlankNode("b0"), "v": Literal("hi")},
        {"x": I("c"), "v": Literal("hallo", "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString", "de")},
        {"x": I("d")},
    ]
    rs = _rs(["x", "v"], rows)
    data = rs.to_json()
    assert data["head"]["vars"] == ["x", "v"]
    back = ResultSet.from_json(data)
    assert back.variables == rs.variables
    assert back.rows == rs.rows


def test_json_plain_literal_has_no_datatype_field():
    data = _rs(["v"], [{"v": Literal("plain")}]).to_json()
    assert data["results"]["bindings"][0]["v"] == {"type": "literal", "value": "plain"}


def test_json_boolean_form():
    data = ResultSet.ask(True).to_json()
    assert data == {"head": {}, "boolean": True}
    assert ResultSet.from_json(data).boolean is True


@pytest.mark.parametrize("payload", [
    None,
    {"boolean": "yes"},
    {"head": {}},
    {"head": {"vars": ["x"]}, "results": {}},
    {"head": {"vars": ["x"]}, "results": {"bindings": [{"x": {"type": "alien", "value": "?"}}]}},
    {"head": {"vars": ["x"]}, "results": {"bindings": [{"x": {"value": "missing type"}}]}},
])
def test_from_json_rejects_malformed(payload):
    with pytest.raises(MalformedResults):
        ResultSet.from_json(payload)


def test_typed_literal_legacy_spelling_accepted():
    rs = ResultSet.from_json({
        "head": {"vars": ["v"]},
        "results": {"bindings": [{"v": {
            "type": "typed-literal", "value": "4",
            "datatype": "http://www.w3.org/2001/XMLSchema#integer"}}]},
    })
    assert rs.rows[0]["v"] == L(4)
