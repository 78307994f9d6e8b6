import pytest

from ontopost import fixture_path
from ontopost.classifier import FixtureClassifier
from ontopost.enrich import load_link_table
from ontopost.evaluation import read_gold
from ontopost.ontology import load_ontology
from ontopost.pipeline import (
    annotate_stage,
    classify_stage,
    clean_stage,
    enrich_stage,
    read_jsonl,
)
from ontopost.repository import TripleStore


@pytest.fixture(scope="session")
def politics():
    return load_ontology(str(fixture_path("politics.nt")))


@pytest.fixture(scope="session")
def links():
    return load_link_table(str(fixture_path("links.nt")))


@pytest.fixture(scope="session")
def dataset():
    return read_jsonl(str(fixture_path("dataset.jsonl")))


@pytest.fixture(scope="session")
def classifier():
    return FixtureClassifier(str(fixture_path("classifier.jsonl")))


@pytest.fixture(scope="session")
def gold():
    return read_gold(str(fixture_path("gold.jsonl")))


@pytest.fixture(scope="session")
def dump(dataset, classifier, politics):
    """Annotation dump for the bundled dataset."""
    return annotate_stage(classify_stage(clean_stage(dataset), classifier), [politics])


@pytest.fixture(scope="session")
def repository(dump, politics, links):
    store = TripleStore()
    store.insert(enrich_stage(dump, [politics], links))
    return store
