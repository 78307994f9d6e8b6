"""Client for the external taxonomy/entity classifier.

The default backend replays recorded responses from a JSON Lines fixture
so runs are hermetic and deterministic.  An HTTP backend speaks the same
contract (POST /classify) for live deployments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import requests

__all__ = [
    "CONFIDENCE_THRESHOLD",
    "MAX_TAXONOMIES",
    "TaxonomyLabel",
    "ExternalEntity",
    "ClassifierResponse",
    "MissingFixture",
    "TransportError",
    "MalformedPath",
    "FixtureClassifier",
    "HttpClassifier",
    "filter_confident",
    "top_level_domain",
]

# Confidence gate: keep labels scoring strictly above this with a
# confidence flag other than "no".
CONFIDENCE_THRESHOLD = 0.4
MAX_TAXONOMIES = 3

_FLAGS = ("yes", "no", "unknown")


class MissingFixture(KeyError):
    def __init__(self, post_id: str):
        super().__init__(post_id)
        self.post_id = post_id


class TransportError(RuntimeError):
    pass


class MalformedPath(ValueError):
    pass


@dataclass(frozen=True)
class TaxonomyLabel:
    """One classifier verdict: slash-path, score in [0, 1], confidence flag."""

    path: str
    score: float
    confident: str = "unknown"

    def __post_init__(self):
        _check_path(self.path)
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score out of range: {self.score}")
        if self.confident not in _FLAGS:
            raise ValueError(f"bad confidence flag: {self.confident!r}")


@dataclass(frozen=True)
class ExternalEntity:
    surface: str
    entity_type: str

    def __post_init__(self):
        if not self.surface:
            raise ValueError("entity surface must be non-empty")


@dataclass(frozen=True)
class ClassifierResponse:
    post_id: str
    taxonomies: tuple[TaxonomyLabel, ...] = ()
    entities: tuple[ExternalEntity, ...] = ()


def _check_path(path: str):
    if not path.startswith("/") or not path[1:]:
        raise MalformedPath(f"taxonomy path must be '/segment...': {path!r}")
    if any(not seg for seg in path[1:].split("/")):
        raise MalformedPath(f"empty segment in taxonomy path: {path!r}")


def filter_confident(labels: list[TaxonomyLabel]) -> list[TaxonomyLabel]:
    """Keep labels scoring strictly above the threshold whose flag is not 'no'."""
    return [
        lb
        for lb in labels
        if lb.score > CONFIDENCE_THRESHOLD and lb.confident != "no"
    ]


def top_level_domain(path: str) -> str:
    """First segment of the slash-path, lowercased."""
    _check_path(path)
    return path[1:].split("/")[0].lower()


def _response_from_dict(post_id: str, obj: dict) -> ClassifierResponse:
    taxonomies = [
        TaxonomyLabel(
            path=t["path"],
            score=float(t["score"]),
            confident=t.get("confident", "unknown"),
        )
        for t in obj.get("taxonomies", [])
    ]
    # The upstream contract promises at most three verdicts; truncate by
    # descending score if a backend misbehaves.
    if len(taxonomies) > MAX_TAXONOMIES:
        taxonomies.sort(key=lambda t: -t.score)
        taxonomies = taxonomies[:MAX_TAXONOMIES]
    entities = [
        ExternalEntity(surface=e["surface"], entity_type=e["type"])
        for e in obj.get("entities", [])
    ]
    return ClassifierResponse(
        post_id=post_id, taxonomies=tuple(taxonomies), entities=tuple(entities)
    )


class FixtureClassifier:
    """Replays recorded responses keyed by post id.  Immutable after load."""

    def __init__(self, path: str | Path):
        self._responses: dict[str, ClassifierResponse] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                post_id = obj["id"]
                self._responses[post_id] = _response_from_dict(post_id, obj)

    def classify(self, post_id: str, text: str) -> ClassifierResponse:
        try:
            return self._responses[post_id]
        except KeyError:
            raise MissingFixture(post_id) from None


@dataclass
class HttpClassifier:
    """POSTs {"text": ...} to <base_url>/classify and maps the JSON reply."""

    base_url: str
    retries: int = 2
    timeout: float = 10.0
    _session: requests.Session = field(default_factory=requests.Session, repr=False)

    def classify(self, post_id: str, text: str) -> ClassifierResponse:
        url = self.base_url.rstrip("/") + "/classify"
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                reply = self._session.post(
                    url, json={"text": text}, timeout=self.timeout
                )
                if reply.status_code != 200:
                    last_error = TransportError(
                        f"classifier returned HTTP {reply.status_code}"
                    )
                    continue
                return _response_from_dict(post_id, reply.json())
            except requests.RequestException as exc:
                last_error = exc
        raise TransportError(f"classify({post_id!r}) failed: {last_error}")
