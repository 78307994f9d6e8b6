import json
import threading

import pytest
import requests

from ontopost import fixture_path
from ontopost.cli import main, make_server
from ontopost.repository import TripleStore

POL = "http://www.semanticweb.org/ontologies/Politics.owl#"

PARTY_QUERY = (
    "PREFIX Politics: <http://www.semanticweb.org/ontologies/Politics.owl#> "
    "SELECT * WHERE { Politics: labour ?b ?c}"
)


def _flags(tmp_path):
    return [
        "--dataset", str(fixture_path("dataset.jsonl")),
        "--ontology", str(fixture_path("politics.nt")),
        "--fixtures", str(fixture_path("classifier.jsonl")),
        "--links", str(fixture_path("links.nt")),
        "--gold", str(fixture_path("gold.jsonl")),
        "--out", str(tmp_path),
    ]


def test_pipeline_produces_all_stage_files(tmp_path):
    assert main(["pipeline", *_flags(tmp_path)]) == 0
    for name in (
        "cleaned.jsonl",
        "classified.jsonl",
        "history.json",
        "annotations.jsonl",
        "enrichment.nt",
        "repository.nt",
        "metrics.json",
    ):
        assert (tmp_path / name).exists(), name


def test_pipeline_is_deterministic(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["pipeline", *_flags(out_a)])
    main(["pipeline", *_flags(out_b)])
    for name in ("cleaned.jsonl", "classified.jsonl", "annotations.jsonl",
                 "enrichment.nt", "repository.nt", "metrics.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


def test_stage_chaining_matches_pipeline(tmp_path):
    """Running the stages one command at a time gives the pipeline output."""
    whole = tmp_path / "whole"
    main(["pipeline", *_flags(whole)])
    staged = tmp_path / "staged"
    for command in ("clean", "classify", "infer-domains", "annotate",
                    "enrich", "load", "evaluate"):
        assert main([command, *_flags(staged)]) == 0
    for name in ("annotations.jsonl", "repository.nt", "metrics.json"):
        assert (staged / name).read_bytes() == (whole / name).read_bytes(), name


def test_query_command(tmp_path, capsys):
    main(["pipeline", *_flags(tmp_path)])
    assert main(["query", *_flags(tmp_path), PARTY_QUERY]) == 0
    rows = [json.loads(line) for line in capsys.readouterr().out.splitlines() if line]
    assert len(rows) == 8
    assert all(row["s"] == POL + "labour" for row in rows)


def test_report_command(tmp_path):
    main(["pipeline", *_flags(tmp_path)])
    assert main(["report", *_flags(tmp_path)]) == 0
    report = (tmp_path / "report.md").read_text()
    assert "Retrieval metrics" in report
    assert (tmp_path / "report_correct_entities.csv").exists()
    assert (tmp_path / "report_categories.csv").exists()


def test_missing_required_flag_is_usage_error(tmp_path):
    assert main(["clean", "--out", str(tmp_path)]) == 1


def test_missing_input_file_is_data_error(tmp_path):
    assert main([
        "clean", "--dataset", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path),
    ]) == 2


def test_bad_query_is_data_error(tmp_path):
    main(["pipeline", *_flags(tmp_path)])
    assert main(["query", *_flags(tmp_path), "SELECT bogus"]) == 2


def test_bad_ontology_is_data_error(tmp_path):
    bad = tmp_path / "bad.nt"
    bad.write_text("<http://a/x> <http://a/y> <http://a/z> .\n")
    assert main([
        "annotate", "--ontology", str(bad), "--out", str(tmp_path),
        "--dataset", str(fixture_path("dataset.jsonl")),
    ]) == 2


def test_config_file_supplies_defaults(tmp_path, capsys):
    config = tmp_path / "ontopost.conf"
    config.write_text(
        "# defaults\n"
        f"dataset = {fixture_path('dataset.jsonl')}\n"
        f"ontology = {fixture_path('politics.nt')}\n"
        f"fixtures = {fixture_path('classifier.jsonl')}\n"
        f"links = {fixture_path('links.nt')}\n"
        f"out = {tmp_path}\n"
    )
    assert main(["--config", str(config), "pipeline"]) == 0
    assert (tmp_path / "repository.nt").exists()


def test_serve_endpoint(tmp_path):
    main(["pipeline", *_flags(tmp_path)])
    store = TripleStore()
    store.load(tmp_path / "repository.nt")
    server = make_server(store, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        url = f"http://127.0.0.1:{server.server_port}/query"
        reply = requests.post(url, data=PARTY_QUERY.encode(), timeout=5)
        assert reply.status_code == 200
        assert len(reply.json()) == 8
        bad = requests.post(url, data=b"SELECT bogus", timeout=5)
        assert bad.status_code == 400
        assert "error" in bad.json()
    finally:
        server.shutdown()
        server.server_close()
