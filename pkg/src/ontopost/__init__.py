"""Ontology-based entity annotation and credibility-domain classification
for short social posts."""

from importlib import resources

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path to one of the bundled fixture files (politics ontology, link
    table, classifier replay data, sample dataset, gold labels)."""
    return resources.files(__name__) / "fixtures" / name
