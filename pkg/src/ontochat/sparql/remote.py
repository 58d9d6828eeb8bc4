"""SPARQL 1.1 protocol client: run a query against an HTTP endpoint and
decode the sparql-results+json body (bindings or boolean form)."""

from __future__ import annotations

import requests

from .results import MalformedResults, ResultSet

ACCEPT = "application/sparql-results+json"


class EndpointUnreachable(Exception):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(detail)


class EndpointHttpError(Exception):
    def __init__(self, status: int, body: str = ""):
        self.status = status
        self.body = body
        super().__init__(f"endpoint returned HTTP {status}")


def execute_remote(endpoint: str, query: str, timeout: float = 30.0,
                   method: str = "get") -> ResultSet:
    """GET with ?query= or POST with a url-encoded form, per the protocol."""
    headers = {"Accept": ACCEPT}
    try:
        if method.lower() == "post":
            response = requests.post(endpoint, data={"query": query}, headers=headers, timeout=timeout)
        else:
            response = requests.get(endpoint, params={"query": query}, headers=headers, timeout=timeout)
    except requests.RequestException as exc:
        raise EndpointUnreachable(str(exc)) from exc
    if response.status_code != 200:
        raise EndpointHttpError(response.status_code, response.text[:500])
    try:
        payload = response.json()
    except ValueError as exc:
        raise MalformedResults(f"response is not JSON: {exc}") from exc
    return ResultSet.from_json(payload)
