"""Per-user domain knowledge inference.

The start-up stage records classifier-derived domains per user; once a
user's history is deep enough the learning stage ranks those domains and
selects ontologies for enrichment.  A per-user pinned-domain override
bypasses ranking (the obvious-domain case, e.g. public figures).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import TaxonomyLabel, top_level_domain
from .ontology import Ontology

__all__ = [
    "DEFAULT_MIN_POSTS",
    "UserDomainHistory",
    "HistoryStore",
    "startup_infer",
    "rank_domains",
    "select_ontologies",
    "is_learning_ready",
]

DEFAULT_MIN_POSTS = 10

# Registry of available ontologies keyed by domain name.
OntologyRegistry = dict[str, Ontology]


@dataclass
class UserDomainHistory:
    user_id: str
    counts: dict[str, int] = field(default_factory=dict)
    pinned: tuple[str, ...] = ()

    def total(self) -> int:
        return sum(self.counts.values())


def startup_infer(
    history: UserDomainHistory, labels: list[TaxonomyLabel]
) -> list[str]:
    """Map confidence-filtered labels to domains, record them, return them.

    Each distinct top-level domain counts once per post.
    """
    domains: list[str] = []
    for label in labels:
        domain = top_level_domain(label.path)
        if domain not in domains:
            domains.append(domain)
    for domain in domains:
        history.counts[domain] = history.counts.get(domain, 0) + 1
    return domains


def rank_domains(history: UserDomainHistory) -> list[tuple[str, int]]:
    """Domains by descending post count; ties break alphabetically."""
    return sorted(history.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def select_ontologies(
    history: UserDomainHistory, registry: OntologyRegistry, k: int
) -> list[Ontology]:
    """Top-k ranked domains that have a registered ontology, in rank order.

    A pinned override replaces the ranking entirely.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if history.pinned:
        candidates = list(history.pinned)
    else:
        candidates = [domain for domain, _ in rank_domains(history)]
    selected = []
    for domain in candidates:
        if domain in registry:
            selected.append(registry[domain])
            if len(selected) == k:
                break
    return selected


def is_learning_ready(
    history: UserDomainHistory, min_posts: int = DEFAULT_MIN_POSTS
) -> bool:
    return history.total() >= min_posts


class HistoryStore:
    """JSON-file-backed map of user id to domain history."""

    def __init__(self):
        self._histories: dict[str, UserDomainHistory] = {}

    def get(self, user_id: str) -> UserDomainHistory:
        if user_id not in self._histories:
            self._histories[user_id] = UserDomainHistory(user_id=user_id)
        return self._histories[user_id]

    def users(self) -> list[str]:
        return sorted(self._histories)

    @classmethod
    def load(cls, path: str | Path) -> "HistoryStore":
        store = cls()
        path = Path(path)
        if path.exists():
            data = json.loads(path.read_text(encoding="utf-8"))
            for user_id, entry in data.items():
                store._histories[user_id] = UserDomainHistory(
                    user_id=user_id,
                    counts={k: int(v) for k, v in entry.get("counts", {}).items()},
                    pinned=tuple(entry.get("pinned", [])),
                )
        return store

    def save(self, path: str | Path):
        data = {}
        for user_id in sorted(self._histories):
            hist = self._histories[user_id]
            entry: dict = {"counts": dict(sorted(hist.counts.items()))}
            if hist.pinned:
                entry["pinned"] = list(hist.pinned)
            data[user_id] = entry
        Path(path).write_text(
            json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
