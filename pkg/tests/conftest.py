import json

import pytest

from ontochat import fixtures as fixture_lib
from ontochat.turtle import parse_turtle
from ontochat.partition import partition


@pytest.fixture(scope="session")
def fixture_texts():
    return {
        odp: (fixture_lib.FIXTURES_DIR / name).read_text(encoding="utf-8")
        for odp, name in fixture_lib.ODP_FILES.items()
    }


@pytest.fixture(scope="session")
def fixture_graphs(fixture_texts):
    return {odp: parse_turtle(text)[0] for odp, text in fixture_texts.items()}


@pytest.fixture(scope="session")
def fixture_partitions(fixture_graphs):
    return {odp: partition(graph) for odp, graph in fixture_graphs.items()}


@pytest.fixture(scope="session")
def corpus_records():
    path = fixture_lib.FIXTURES_DIR / fixture_lib.CORPUS_FILE
    return json.loads(path.read_text(encoding="utf-8"))
