"""Operator entry points: partition an ontology, run a query locally, ask a
one-shot question through the pipeline, serve the chat API, or run the whole
experiment.

Exit codes: 0 success (including empty results), 2 translation failed,
3 execution failed, 64 usage errors, 66 missing/unreadable files, 65 invalid
fixtures or corpus.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .gateway import ProviderConfig, ProviderError, make_provider
from .partition import CommentPolicy, apply_comment_policy, partition
from .rdf import serialize_turtle
from .sparql import QuerySyntaxError, UnsupportedSparqlFeature, evaluate, parse_query
from .turtle import TurtleSyntaxError, UnsupportedTurtleFeature, parse_turtle

EXIT_OK = 0
EXIT_TRANSLATION_FAILED = 2
EXIT_EXECUTION_FAILED = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOFILE = 66


@click.group()
def cli():
    """Chat with an ontology through LLM-generated SPARQL."""


def _read_file(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_graph(path: str):
    try:
        graph, diagnostics = parse_turtle(_read_file(path))
    except (TurtleSyntaxError, UnsupportedTurtleFeature) as exc:
        raise click.ClickException(f"{path}: {exc}")
    for note in diagnostics:
        click.echo(f"note: {note}", err=True)
    return graph


@cli.command("partition")
@click.argument("ttl_file")
@click.option("--strip-comments", is_flag=True, help="Drop rdfs:comment triples from the schema output.")
def partition_cmd(ttl_file: str, strip_comments: bool):
    """Split TTL_FILE into schema and data files next to it."""
    graph = _load_graph(ttl_file)
    part = partition(graph)
    for note in part.diagnostics:
        click.echo(f"warning: {note}", err=True)
    tbox = apply_comment_policy(part.tbox, CommentPolicy.STRIP if strip_comments else CommentPolicy.RETAIN)
    base = Path(ttl_file)
    tbox_path = base.with_suffix(".tbox.ttl")
    abox_path = base.with_suffix(".abox.ttl")
    tbox_path.write_text(serialize_turtle(tbox), encoding="utf-8")
    abox_path.write_text(serialize_turtle(part.abox), encoding="utf-8")
    click.echo(f"tbox: {len(tbox)} triples -> {tbox_path}")
    click.echo(f"abox: {len(part.abox)} triples -> {abox_path}")


@cli.command("query")
@click.argument("ttl_file")
@click.argument("query_file")
def query_cmd(ttl_file: str, query_file: str):
    """Run a SPARQL file (or '-' for stdin) against TTL_FILE locally."""
    graph = _load_graph(ttl_file)
    query_text = sys.stdin.read() if query_file == "-" else _read_file(query_file)
    try:
        results = evaluate(parse_query(query_text), graph)
    except (QuerySyntaxError, UnsupportedSparqlFeature) as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(results.to_json(), indent=2, sort_keys=True))


@cli.command("ask")
@click.argument("ontology")
@click.argument("question")
@click.option("--no-comments", is_flag=True, help="Strip rdfs:comment from the prompt schema.")
@click.option("--provider", "provider_path", required=True,
              help="Provider config JSON (or a service config with a 'provider' key).")
@click.option("--max-attempts", default=3, show_default=True)
@click.pass_context
def ask_cmd(ctx, ontology: str, question: str, no_comments: bool, provider_path: str,
            max_attempts: int):
    """Run the full pipeline once for QUESTION against the ONTOLOGY file."""
    from .service import (
        STATUS_EXECUTION_FAILED,
        STATUS_TRANSLATION_FAILED,
        OntologyEntry,
        answer_question,
    )
    from .partition import render_prompt_tbox

    graph = _load_graph(ontology)
    part = partition(graph)
    tbox_text = {
        comments: render_prompt_tbox(apply_comment_policy(
            part.tbox, CommentPolicy.RETAIN if comments else CommentPolicy.STRIP))
        for comments in (False, True)
    }
    entry = OntologyEntry(Path(ontology).stem, graph, part, tbox_text, part.individual_iris())
    provider = make_provider(ProviderConfig.from_file(provider_path))
    try:
        record = answer_question(entry, not no_comments, question, provider,
                                 max_attempts=max_attempts)
    except ProviderError as exc:
        raise click.ClickException(f"provider error: {exc}")
    click.echo(json.dumps(record.to_json(), indent=2, sort_keys=True))
    if record.status == STATUS_TRANSLATION_FAILED:
        ctx.exit(EXIT_TRANSLATION_FAILED)
    if record.status == STATUS_EXECUTION_FAILED:
        ctx.exit(EXIT_EXECUTION_FAILED)


@cli.command("serve")
@click.option("--config", "config_path", required=True, help="Service config JSON.")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve_cmd(config_path: str, host: str):
    """Start the chat API server."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_file(config_path)
    app = create_app(config)
    uvicorn.run(app, host=host, port=config.port, log_level="warning")


@cli.command("eval")
@click.option("--corpus", "corpus_path", default=None, help="Corpus JSON (default: shipped corpus).")
@click.option("--fixtures", "fixtures_path", default=None, help="Fixture directory (default: shipped).")
@click.option("--provider", "provider_path", required=True, help="Provider config JSON.")
@click.option("--out", "out_dir", required=True, help="Directory for report.{md,csv,json}.")
@click.option("--jobs", default=1, show_default=True, help="Parallel translation calls.")
@click.option("--max-attempts", default=3, show_default=True)
@click.pass_context
def eval_cmd(ctx, corpus_path, fixtures_path, provider_path, out_dir, jobs, max_attempts):
    """Run the accuracy experiment and write the three report files."""
    from . import fixtures as fixture_lib
    from .harness import CorpusInvalid, load_corpus, render_report, run_experiment

    fixtures_dir = Path(fixtures_path) if fixtures_path else fixture_lib.FIXTURES_DIR
    corpus = Path(corpus_path) if corpus_path else fixtures_dir / fixture_lib.CORPUS_FILE

    diagnostics = fixture_lib.validate_fixtures(fixtures_dir, corpus)
    if diagnostics:
        for line in diagnostics:
            click.echo(f"invalid: {line}", err=True)
        ctx.exit(EXIT_DATA)
    try:
        matrix = load_corpus(corpus, fixtures_dir=fixtures_dir)
    except CorpusInvalid as exc:
        for record_id, reason in exc.violations:
            click.echo(f"invalid: {record_id}: {reason}", err=True)
        ctx.exit(EXIT_DATA)

    provider = make_provider(ProviderConfig.from_file(provider_path))
    report = run_experiment(matrix, provider, fixtures_dir=fixtures_dir,
                            max_attempts=max_attempts, jobs=jobs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fmt, name in (("markdown", "report.md"), ("csv", "report.csv"), ("json", "report.json")):
        (out / name).write_text(render_report(report, fmt), encoding="utf-8")
    click.echo(render_report(report, "markdown").split("\n## ")[0])
    click.echo(f"reports written to {out}")


def main(argv: list[str] | None = None) -> int:
    """Run the CLI, mapping errors to the documented exit codes."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
        return rv if isinstance(rv, int) else EXIT_OK
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except FileNotFoundError as exc:
        click.echo(f"error: file not found: {exc.filename or exc}", err=True)
        return EXIT_NOFILE
    except click.ClickException as exc:
        exc.show()
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
