import json
import shutil

import pytest

from ontochat import fixtures as fixture_lib
from ontochat.cli import EXIT_DATA, EXIT_NOFILE, EXIT_TRANSLATION_FAILED, EXIT_USAGE, main


@pytest.fixture()
def mock_provider_file(tmp_path):
    path = tmp_path / "provider.json"
    path.write_text(json.dumps({
        "kind": "mock",
        "mapping": str(fixture_lib.FIXTURES_DIR / fixture_lib.MOCK_GOLD_FILE),
        "corpus": str(fixture_lib.FIXTURES_DIR / fixture_lib.CORPUS_FILE),
    }), encoding="utf-8")
    return str(path)


def test_partition_writes_split_files(tmp_path, capsys):
    ttl = tmp_path / "vdi2206.ttl"
    shutil.copy(fixture_lib.FIXTURES_DIR / "vdi2206.ttl", ttl)
    assert main(["partition", str(ttl)]) == 0
    out = capsys.readouterr().out
    assert "tbox: 35 triples" in out
    assert "abox: 24 triples" in out
    assert (tmp_path / "vdi2206.tbox.ttl").exists()
    assert (tmp_path / "vdi2206.abox.ttl").exists()


def test_partition_strip_comments_removes_them(tmp_path):
    ttl = tmp_path / "vdi2206.ttl"
    shutil.copy(fixture_lib.FIXTURES_DIR / "vdi2206.ttl", ttl)
    assert main(["partition", str(ttl), "--strip-comments"]) == 0
    tbox_text = (tmp_path / "vdi2206.tbox.ttl").read_text(encoding="utf-8")
    assert "rdfs:comment" not in tbox_text


def test_partition_empty_file(tmp_path, capsys):
    ttl = tmp_path / "empty.ttl"
    ttl.write_text("", encoding="utf-8")
    assert main(["partition", str(ttl)]) == 0
    out = capsys.readouterr().out
    assert "tbox: 0 triples" in out
    assert "abox: 0 triples" in out
    assert (tmp_path / "empty.tbox.ttl").read_text(encoding="utf-8") == ""


def test_query_prints_results_json(tmp_path, capsys):
    rq = tmp_path / "rank.rq"
    rq.write_text(
        "PREFIX de: <http://example.org/dinen61360#>\n"
        "SELECT ?v WHERE { ?e de:value ?v } ORDER BY ASC(?v)", encoding="utf-8")
    rc = main(["query", str(fixture_lib.FIXTURES_DIR / "dinen61360.ttl"), str(rq)])
    assert rc == 0
    data = json.loads(capsys.readouterr().out)
    values = [b["v"]["value"] for b in data["results"]["bindings"]]
    assert values == ["0.75", "2.5", "24.0", "120.0"]


def test_query_reads_stdin(tmp_path, capsys, monkeypatch):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO("ASK { ?s ?p ?o }"))
    rc = main(["query", str(fixture_lib.FIXTURES_DIR / "vdi3682.ttl"), "-"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["boolean"] is True


def test_ask_answered_exits_zero(mock_provider_file, capsys):
    rc = main(["ask", str(fixture_lib.FIXTURES_DIR / "vdi2206.ttl"),
               "Is the sensor part of a module in the system?",
               "--provider", mock_provider_file])
    assert rc == 0
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "Answered"
    assert record["generated_query"]
    assert record["translation"]["attempts"]


def test_ask_translation_failure_exits_two(tmp_path, capsys):
    mapping = tmp_path / "mapping.json"
    mapping.write_text(json.dumps({"vdi2206-boolean-scq": "garbage, unparseable"}), encoding="utf-8")
    provider = tmp_path / "provider.json"
    provider.write_text(json.dumps({
        "kind": "mock",
        "mapping": str(mapping),
        "corpus": str(fixture_lib.FIXTURES_DIR / fixture_lib.CORPUS_FILE),
    }), encoding="utf-8")
    rc = main(["ask", str(fixture_lib.FIXTURES_DIR / "vdi2206.ttl"),
               "Is the sensor part of a module in the system?",
               "--provider", str(provider)])
    assert rc == EXIT_TRANSLATION_FAILED


def test_eval_writes_reports_and_is_idempotent(tmp_path, mock_provider_file):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["eval", "--provider", mock_provider_file, "--out", str(out_a)]) == 0
    assert main(["eval", "--provider", mock_provider_file, "--out", str(out_b)]) == 0
    for name in ("report.md", "report.csv", "report.json"):
        assert (out_a / name).exists()
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    assert json.loads((out_a / "report.json").read_text())["prompt_template_version"] == "v1"


def test_eval_rejects_invalid_corpus(tmp_path, mock_provider_file):
    bad_corpus = tmp_path / "questions.json"
    records = json.loads(
        (fixture_lib.FIXTURES_DIR / fixture_lib.CORPUS_FILE).read_text(encoding="utf-8"))
    bad_corpus.write_text(json.dumps(records[:-1]), encoding="utf-8")
    rc = main(["eval", "--corpus", str(bad_corpus),
               "--provider", mock_provider_file, "--out", str(tmp_path / "out")])
    assert rc == EXIT_DATA


def test_usage_error_exits_64(capsys):
    assert main(["eval"]) == EXIT_USAGE  # missing required options
    assert main(["no-such-command"]) == EXIT_USAGE
    assert main(["serve"]) == EXIT_USAGE  # --config is required


def test_missing_file_exits_66():
    assert main(["query", "/nonexistent/file.ttl", "-"]) == EXIT_NOFILE
    assert main(["partition", "/nonexistent/file.ttl"]) == EXIT_NOFILE
