import random

import pytest
from hypothesis import given, settings, strategies as st

from ontochat.partition import CommentPolicy, apply_comment_policy, partition, render_prompt_tbox
from ontochat.rdf import Iri, RDFS_COMMENT, nt
from ontochat.turtle import parse_turtle

from generators import random_schema_data_graph
from oracle import two_pass_tbox_abox


def test_single_class_triple_is_all_tbox():
    graph, _ = parse_turtle(
        "@prefix ex: <http://e/> . @prefix owl: <http://www.w3.org/2002/07/owl#> . ex:C a owl:Class .")
    part = partition(graph)
    assert len(part.tbox) == 1
    assert len(part.abox) == 0
    assert part.schema_entities == {"http://e/C"}


def test_untyped_individual_is_all_abox():
    graph, _ = parse_turtle("@prefix ex: <http://e/> . ex:i a ex:C .")
    part = partition(graph)
    assert len(part.tbox) == 0
    assert len(part.abox) == 1
    assert any("EmptyTBox" in d for d in part.diagnostics)


def test_fixture_partitions_match_two_pass_oracle(fixture_graphs):
    for graph in fixture_graphs.values():
        part = partition(graph)
        oracle_tbox, oracle_abox = two_pass_tbox_abox(graph.triples)
        assert part.tbox.triples == oracle_tbox
        assert part.abox.triples == oracle_abox


def test_fixture_partitions_are_nonempty(fixture_partitions):
    for part in fixture_partitions.values():
        assert len(part.tbox) > 0
        assert len(part.abox) > 0


def _assert_complete_and_disjoint(graph, part):
    assert part.tbox.triples | part.abox.triples == graph.triples
    assert part.tbox.triples & part.abox.triples == set()


def test_partition_completeness_on_fixtures(fixture_graphs, fixture_partitions):
    for odp, graph in fixture_graphs.items():
        _assert_complete_and_disjoint(graph, fixture_partitions[odp])


def test_partition_completeness_on_random_graphs():
    rng = random.Random(20240601)
    for _ in range(200):
        graph = random_schema_data_graph(rng)
        _assert_complete_and_disjoint(graph, partition(graph))


# --- comment policy ---

def test_retain_is_identity(fixture_partitions):
    for part in fixture_partitions.values():
        retained = apply_comment_policy(part.tbox, CommentPolicy.RETAIN)
        assert retained.triples == part.tbox.triples


def test_strip_removes_exactly_the_comment_triples(fixture_partitions):
    comment = Iri(RDFS_COMMENT)
    for part in fixture_partitions.values():
        n_comments = len(part.tbox.match(None, comment, None))
        stripped = apply_comment_policy(part.tbox, CommentPolicy.STRIP)
        assert len(stripped) == len(part.tbox) - n_comments
        assert stripped.match(None, comment, None) == []


def test_strip_is_idempotent(fixture_partitions):
    for part in fixture_partitions.values():
        once = apply_comment_policy(part.tbox, CommentPolicy.STRIP)
        twice = apply_comment_policy(once, CommentPolicy.STRIP)
        assert once.triples == twice.triples


# --- prompt rendering ---

def test_render_is_deterministic(fixture_partitions):
    for part in fixture_partitions.values():
        assert render_prompt_tbox(part.tbox) == render_prompt_tbox(part.tbox)


def test_stripped_rendering_has_no_comment_markers(fixture_partitions):
    for part in fixture_partitions.values():
        stripped = apply_comment_policy(part.tbox, CommentPolicy.STRIP)
        text = render_prompt_tbox(stripped)
        assert "rdfs:comment" not in text
        assert RDFS_COMMENT not in text


def test_vdi3682_rendering_mentions_every_class(fixture_partitions):
    text = render_prompt_tbox(fixture_partitions["VDI3682"].tbox)
    for name in ("Process", "ProcessOperator", "TechnicalResource"):
        assert name in text


def test_prompt_rendering_never_contains_individuals(fixture_partitions):
    rng = random.Random(99)
    parts = list(fixture_partitions.values())
    parts += [partition(random_schema_data_graph(rng)) for _ in range(50)]
    for part in parts:
        text = render_prompt_tbox(part.tbox)
        for iri in part.individual_iris():
            assert iri not in text


def test_individuals_exclude_schema_entities(fixture_partitions):
    for part in fixture_partitions.values():
        assert part.individual_iris() & part.schema_entities == set()
