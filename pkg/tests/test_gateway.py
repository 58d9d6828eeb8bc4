import json

import pytest

from ontochat.gateway import (
    EmptyQuestion,
    MockProvider,
    NoQueryFound,
    PrivacyViolation,
    PromptBundle,
    ProviderConfig,
    ProviderError,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
    assemble_prompt,
    extract_query,
    extract_query_blocks,
    make_provider,
    translate,
)
from ontochat.partition import CommentPolicy, apply_comment_policy, render_prompt_tbox

GOLD_ASK = "ASK { ?s ?p ?o }"
TBOX = "@prefix ex: <http://schema.example/> .\n\nex:Thing a <http://www.w3.org/2002/07/owl#Class> .\n"


# --- prompt assembly ---

def test_assembly_is_deterministic():
    a = assemble_prompt(TBOX, "What things exist?")
    b = assemble_prompt(TBOX, "What things exist?")
    assert a == b
    assert a.render() == b.render()
    assert a.sha256() == b.sha256()


def test_question_is_verbatim_and_schema_included():
    question = 'Is the sensor part of a module in the system?'
    bundle = assemble_prompt(TBOX, question)
    assert question in bundle.render()
    assert bundle.question == question
    assert TBOX.strip() in bundle.render()


def test_prefix_table_extracted_from_schema_text():
    bundle = assemble_prompt(TBOX, "anything?")
    assert "ex: <http://schema.example/>" in bundle.system_instructions


def test_empty_question_rejected():
    with pytest.raises(EmptyQuestion):
        assemble_prompt(TBOX, "   ")


def test_privacy_check_rejects_leaky_schema_text():
    with pytest.raises(PrivacyViolation):
        assemble_prompt(TBOX + "\n<http://data.example/item1> a ex:Thing .",
                        "q?", forbidden_iris=["http://data.example/item1"])


def test_stripped_condition_has_no_comment_text(fixture_partitions):
    tbox = apply_comment_policy(fixture_partitions["VDI3682"].tbox, CommentPolicy.STRIP)
    bundle = assemble_prompt(render_prompt_tbox(tbox), "how many?")
    assert "rdfs:comment" not in bundle.render()


def test_two_intent_contract_mentions_two_blocks():
    bundle = assemble_prompt(TBOX, "a? b?", expected_queries=2)
    assert "2 SPARQL queries" in bundle.system_instructions


# --- extraction ---

def test_bare_query_is_returned_as_is():
    assert extract_query("ASK { ?s ?p ?o }") == "ASK { ?s ?p ?o }"


def test_fenced_block_is_preferred():
    raw = "Here is the query:\n```sparql\nSELECT ?x WHERE { ?x a <http://e/C> }\n```\nHope it helps!"
    assert extract_query(raw) == "SELECT ?x WHERE { ?x a <http://e/C> }"


def test_two_fenced_blocks_first_wins():
    raw = "```sparql\nASK { ?a ?b ?c }\n```\ntext\n```\nSELECT ?x WHERE { ?x ?p ?o }\n```"
    assert extract_query(raw) == "ASK { ?a ?b ?c }"
    assert len(extract_query_blocks(raw)) == 2


def test_trailing_prose_after_pattern_is_trimmed():
    raw = "SELECT ?v WHERE { ?s ?p ?v } ORDER BY ASC(?v) LIMIT 3\nThis query sorts the values."
    extracted = extract_query(raw)
    assert extracted.startswith("SELECT")
    assert "sorts the values" not in extracted
    assert "ORDER BY ASC(?v)" in extracted and "LIMIT 3" in extracted


def test_no_query_found():
    with pytest.raises(NoQueryFound):
        extract_query("I cannot answer that, sorry.")


# --- providers ---

def test_mock_provider_answers_by_question_id():
    provider = MockProvider({"q1": GOLD_ASK})
    bundle = assemble_prompt(TBOX, "whatever")
    response = provider.complete(bundle, {"question_id": "q1"})
    assert GOLD_ASK in response
    with pytest.raises(ProviderError):
        provider.complete(bundle, {"question_id": "missing"})


def test_mock_provider_falls_back_to_text_lookup():
    provider = MockProvider({"q1": GOLD_ASK}, text_index={"What is there?": "q1"})
    bundle = assemble_prompt(TBOX, "What is there?")
    assert GOLD_ASK in provider.complete(bundle, {})


def test_mock_provider_wraps_lists_as_multiple_blocks():
    provider = MockProvider({"q1": ["ASK { ?a ?b ?c }", "ASK { ?x ?y ?z }"]})
    response = provider.complete(assemble_prompt(TBOX, "?"), {"question_id": "q1"})
    assert len(extract_query_blocks(response)) == 2


def test_replay_provider_keyed_on_prompt_hash():
    bundle = assemble_prompt(TBOX, "q?")
    cassette = [{"prompt_hash": bundle.sha256(), "response_text": "```\n" + GOLD_ASK + "\n```"}]
    provider = ReplayProvider(cassette)
    assert GOLD_ASK in provider.complete(bundle, {})
    # consumed: a second identical call is a miss, not a live call
    with pytest.raises(ProviderError):
        provider.complete(bundle, {})


def test_replay_miss_is_an_error():
    provider = ReplayProvider([])
    with pytest.raises(ProviderError):
        provider.complete(assemble_prompt(TBOX, "q?"), {})


def test_provider_config_validation():
    with pytest.raises(ValueError):
        ProviderConfig.from_dict({"kind": "nonsense"})
    with pytest.raises(ValueError):
        make_provider(ProviderConfig(kind="mock"))
    with pytest.raises(ValueError):
        make_provider(ProviderConfig(kind="replay"))


def test_http_chat_provider_speaks_chat_completions(monkeypatch):
    import threading
    from http.server import BaseHTTPRequestHandler, HTTPServer

    received = {}

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            received["body"] = json.loads(self.rfile.read(length))
            received["auth"] = self.headers.get("Authorization")
            body = json.dumps({"choices": [{"message": {
                "content": "```sparql\nASK { ?s ?p ?o }\n```"}}]}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        monkeypatch.setenv("TEST_LLM_KEY", "Bearer sekrit")
        config = ProviderConfig(kind="http_chat",
                                url=f"http://127.0.0.1:{server.server_port}/v1/chat",
                                model="test-model", auth_header="Authorization",
                                auth_env="TEST_LLM_KEY", temperature=0.0)
        result = translate("anything?", TBOX, make_provider(config))
        assert result.succeeded
        assert result.final_query == GOLD_ASK
        assert received["auth"] == "Bearer sekrit"
        assert received["body"]["model"] == "test-model"
        assert received["body"]["temperature"] == 0.0
        roles = [m["role"] for m in received["body"]["messages"]]
        assert roles == ["system", "user"]
    finally:
        server.shutdown()


def test_http_chat_provider_requires_auth_env(monkeypatch):
    monkeypatch.delenv("MISSING_KEY_VAR", raising=False)
    config = ProviderConfig(kind="http_chat", url="http://127.0.0.1:1/x",
                            model="m", auth_header="Authorization",
                            auth_env="MISSING_KEY_VAR")
    provider = make_provider(config)
    with pytest.raises(ProviderError, match="MISSING_KEY_VAR"):
        provider.complete(assemble_prompt(TBOX, "q?"), {})


# --- translation loop ---

def test_translate_succeeds_first_attempt_with_mock():
    provider = MockProvider({"q1": GOLD_ASK})
    result = translate("q?", TBOX, provider, meta={"question_id": "q1"})
    assert result.succeeded
    assert result.final_query == GOLD_ASK
    assert len(result.attempts) == 1
    assert result.attempts[0].parse_error is None


def _record_scripted(responses, question="fix me?", expected_queries=1):
    """Run translate against a script, returning (result, recorder)."""
    calls = []

    def responder(bundle, meta):
        calls.append(meta["attempt"])
        return responses[min(meta["attempt"], len(responses)) - 1]

    recorder = RecordingProvider(ScriptedProvider(responder))
    result = translate(question, TBOX, recorder, expected_queries=expected_queries)
    return result, recorder


def test_repair_loop_recovers_on_second_attempt():
    result, recorder = _record_scripted([
        "```\nSELECT ?x WHERE { ?x ?p }\n```",  # malformed: short triple
        "```\nSELECT ?x WHERE { ?x ?p ?o }\n```",
    ])
    assert result.succeeded
    assert len(result.attempts) == 2
    assert result.attempts[0].parse_error is not None
    assert result.attempts[1].parse_error is None
    # the second prompt carries the error feedback, so its hash differs
    hashes = [c["prompt_hash"] for c in recorder.calls]
    assert len(set(hashes)) == 2
    assert "rejected" in recorder.calls[1]["prompt_text"]


def test_repair_prompt_quotes_prior_query_and_error():
    result, recorder = _record_scripted([
        "```\nSELECT ?x WHERE { ?x ?p }\n```",
        "```\nSELECT ?x WHERE { ?x ?p ?o }\n```",
    ])
    second_prompt = recorder.calls[1]["prompt_text"]
    assert "SELECT ?x WHERE { ?x ?p }" in second_prompt
    assert "QuerySyntaxError" in second_prompt


def test_exhausted_attempts_reported_not_raised():
    result, recorder = _record_scripted(["no fence, no keywords at all"] * 3)
    assert not result.succeeded
    assert result.final_query is None
    assert len(result.attempts) == 3
    assert all(a.parse_error for a in result.attempts)
    assert len(recorder.calls) == 3


def test_repair_loop_never_exceeds_max_attempts():
    for max_attempts in (1, 2, 4):
        calls = []

        def responder(bundle, meta):
            calls.append(1)
            return "still not a query"

        result = translate("q?", TBOX, ScriptedProvider(responder), max_attempts=max_attempts)
        assert not result.succeeded
        assert len(calls) == max_attempts


def test_two_intent_requires_two_parseable_blocks():
    ok, _ = _record_scripted(
        ["```\nASK { ?a ?b ?c }\n```\n```\nASK { ?x ?y ?z }\n```"], expected_queries=2)
    assert ok.succeeded
    assert len(ok.final_queries) == 2

    short, _ = _record_scripted(["```\nASK { ?a ?b ?c }\n```"] * 3, expected_queries=2)
    assert not short.succeeded
    assert "expected 2 queries" in short.attempts[0].parse_error


def test_replay_cassette_via_recorder_round_trip():
    """Record a scripted session, then replay the cassette byte-for-byte."""
    _, recorder = _record_scripted([
        "```\nSELECT ?x WHERE { ?x ?p }\n```",
        "```\nSELECT ?x WHERE { ?x ?p ?o }\n```",
    ])
    replay = ReplayProvider(recorder.cassette())
    result = translate("fix me?", TBOX, replay)
    assert result.succeeded
    assert len(result.attempts) == 2
    assert result.final_query == "SELECT ?x WHERE { ?x ?p ?o }"


def test_translation_result_json_shape():
    provider = MockProvider({"q1": GOLD_ASK})
    result = translate("q?", TBOX, provider, meta={"question_id": "q1"})
    data = result.to_json()
    assert data["succeeded"] is True
    assert data["final_query"] == GOLD_ASK
    assert json.dumps(data)  # serializable
