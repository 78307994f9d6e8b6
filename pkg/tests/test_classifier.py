import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, strategies as st

from ontopost import fixture_path
from ontopost.classifier import (
    CONFIDENCE_THRESHOLD,
    FixtureClassifier,
    HttpClassifier,
    MalformedPath,
    MissingFixture,
    TaxonomyLabel,
    TransportError,
    filter_confident,
    top_level_domain,
)


def test_threshold_constant():
    assert CONFIDENCE_THRESHOLD == 0.4


@pytest.mark.parametrize("score", [0.0, 0.4, 0.41, 1.0])
@pytest.mark.parametrize("flag", ["yes", "no", "unknown"])
def test_confidence_gate_sweep(score, flag):
    """Keep iff score strictly above 0.4 and the flag is not 'no'."""
    label = TaxonomyLabel(path="/politics", score=score, confident=flag)
    kept = filter_confident([label])
    assert bool(kept) == (score > 0.4 and flag != "no")


def test_taxonomy_label_validation():
    with pytest.raises(MalformedPath):
        TaxonomyLabel(path="politics", score=0.5)
    with pytest.raises(MalformedPath):
        TaxonomyLabel(path="/a//b", score=0.5)
    with pytest.raises(ValueError):
        TaxonomyLabel(path="/a", score=1.2)
    with pytest.raises(ValueError):
        TaxonomyLabel(path="/a", score=0.5, confident="maybe")


def test_top_level_domain():
    assert top_level_domain("/Society/work/unions") == "society"
    assert top_level_domain("/law, govt and politics") == "law, govt and politics"
    with pytest.raises(MalformedPath):
        top_level_domain("/")


def test_fixture_classifier_replays_and_misses(classifier):
    r1 = classifier.classify("f6", "anything")
    r2 = classifier.classify("f6", "other text entirely")
    assert r1 == r2
    assert len(r1.taxonomies) == 2
    with pytest.raises(MissingFixture):
        classifier.classify("no-such-post", "x")


def test_fixture_classifier_truncates_to_three(tmp_path):
    rec = {
        "id": "p",
        "taxonomies": [
            {"path": f"/d{i}", "score": s, "confident": "yes"}
            for i, s in enumerate((0.2, 0.9, 0.5, 0.7))
        ],
    }
    path = tmp_path / "fx.jsonl"
    path.write_text(json.dumps(rec) + "\n")
    got = FixtureClassifier(path).classify("p", "x")
    assert [t.score for t in got.taxonomies] == [0.9, 0.7, 0.5]


label_strategy = st.builds(
    TaxonomyLabel,
    path=st.from_regex(r"/[a-z]{1,6}(/[a-z]{1,6}){0,2}", fullmatch=True),
    score=st.floats(0.0, 1.0),
    confident=st.sampled_from(["yes", "no", "unknown"]),
)


@given(st.lists(label_strategy, max_size=8))
def test_filter_is_order_preserving_subset_and_idempotent(labels):
    kept = filter_confident(labels)
    assert all(lb in labels for lb in kept)
    # order-preserving subsequence (duplicates included as they occur)
    assert kept == [lb for lb in labels if lb in kept]
    assert filter_confident(kept) == kept


@given(label_strategy)
def test_top_level_is_path_prefix_segment(label):
    domain = top_level_domain(label.path)
    assert label.path.lower().startswith("/" + domain)


# -- HTTP backend against a throwaway local server ----------------------

class _StubHandler(BaseHTTPRequestHandler):
    fail_times = 0

    def do_POST(self):
        cls = type(self)
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length))
        if cls.fail_times > 0:
            cls.fail_times -= 1
            self.send_error(500)
            return
        payload = json.dumps(
            {
                "taxonomies": [
                    {"path": "/politics", "score": 0.8, "confident": "yes"}
                ],
                "entities": [{"surface": body["text"][:4], "type": "Thing"}],
            }
        ).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *_):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    server.server_close()


def test_http_classifier_maps_reply(stub_server):
    _StubHandler.fail_times = 0
    got = HttpClassifier(stub_server).classify("p1", "vote labor")
    assert got.taxonomies[0].path == "/politics"
    assert got.entities[0].surface == "vote"


def test_http_classifier_retries_then_succeeds(stub_server):
    _StubHandler.fail_times = 2
    got = HttpClassifier(stub_server, retries=2).classify("p1", "text")
    assert got.taxonomies


def test_http_classifier_gives_up(stub_server):
    _StubHandler.fail_times = 5
    with pytest.raises(TransportError):
        HttpClassifier(stub_server, retries=1).classify("p1", "text")


def test_bundled_fixture_is_well_formed():
    clf = FixtureClassifier(str(fixture_path("classifier.jsonl")))
    for post_id in ("f6", "f11", "p3", "p4", "p5", "p6"):
        response = clf.classify(post_id, "")
        assert len(response.taxonomies) <= 3
