from .ast import Bgp, Count, Filter, Join, Optional, OrderKey, QueryAst, TriplePattern, Union, Var
from .parser import QuerySyntaxError, UnsupportedSparqlFeature, parse_query
from .evaluator import evaluate
from .results import ResultSet, results_equal
from .remote import EndpointHttpError, EndpointUnreachable, MalformedResults, execute_remote

__all__ = [
    "Bgp", "Count", "Filter", "Join", "Optional", "OrderKey", "QueryAst",
    "TriplePattern", "Union", "Var",
    "QuerySyntaxError", "UnsupportedSparqlFeature", "parse_query",
    "evaluate",
    "ResultSet", "results_equal",
    "EndpointHttpError", "EndpointUnreachable", "MalformedResults", "execute_remote",
]
