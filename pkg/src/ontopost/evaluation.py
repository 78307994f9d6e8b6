"""Precision / recall / F-measure, entity-count accounting against gold
labels, the per-category report, and extraction-rate percentages."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .annotate import Source

__all__ = [
    "GoldLabel",
    "EntityCounts",
    "Metrics",
    "InvalidCounts",
    "MissingGold",
    "read_gold",
    "precision",
    "recall",
    "f_measure",
    "compute_metrics",
    "entity_counts",
    "category_report",
    "extraction_rate",
]


class InvalidCounts(ValueError):
    pass


class MissingGold(KeyError):
    def __init__(self, post_id: str):
        super().__init__(post_id)
        self.post_id = post_id


@dataclass(frozen=True)
class GoldLabel:
    """Evaluator verdict for one post: majority domain judgement and the
    gold (surface, concept) entity pairs."""

    post_id: str
    is_domain: bool
    gold_entities: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class EntityCounts:
    correct: int
    incorrect: int
    missing: int

    @property
    def retrieved(self) -> int:
        return self.correct + self.incorrect

    @property
    def total_relevant(self) -> int:
        return self.correct + self.missing


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f_measure: float
    # names of ratios whose denominator was zero (rendered "n/a" upstream)
    degenerate: tuple[str, ...] = ()


def read_gold(path: str | Path) -> list[GoldLabel]:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            labels.append(
                GoldLabel(
                    post_id=obj["id"],
                    is_domain=bool(obj["is_domain"]),
                    gold_entities=tuple(
                        (e["surface"], e["concept"])
                        for e in obj.get("entities", [])
                    ),
                )
            )
    return labels


def precision(relevant_retrieved: int, total_retrieved: int) -> float:
    if not 0 <= relevant_retrieved <= total_retrieved:
        raise InvalidCounts(
            f"need 0 <= relevant ({relevant_retrieved}) <= retrieved "
            f"({total_retrieved})"
        )
    if total_retrieved == 0:
        return 0.0
    return relevant_retrieved / total_retrieved


def recall(relevant_retrieved: int, total_relevant: int) -> float:
    if not 0 <= relevant_retrieved <= total_relevant:
        raise InvalidCounts(
            f"need 0 <= relevant retrieved ({relevant_retrieved}) <= relevant "
            f"({total_relevant})"
        )
    if total_relevant == 0:
        return 0.0
    return relevant_retrieved / total_relevant


def f_measure(p: float, r: float) -> float:
    """Harmonic combination of precision and recall; 0 when both are 0."""
    if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
        raise InvalidCounts(f"precision/recall out of range: {p}, {r}")
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def compute_metrics(counts: EntityCounts) -> Metrics:
    flags = []
    if counts.retrieved == 0:
        flags.append("precision")
    if counts.total_relevant == 0:
        flags.append("recall")
    p = precision(counts.correct, counts.retrieved)
    r = recall(counts.correct, counts.total_relevant)
    return Metrics(
        precision=p,
        recall=r,
        f_measure=f_measure(p, r),
        degenerate=tuple(flags),
    )


def _extracted_surfaces(post: dict, source_filter: Source | None):
    """(surface, type) pairs extracted for a post under the source filter,
    deduplicated case-insensitively by surface."""
    wanted = {
        Source.EXTERNAL: {"external", "both"},
        Source.ONTOLOGY: {"ontology", "both"},
        None: {"external", "ontology", "both"},
    }[source_filter]
    pairs: dict[str, str] = {}
    for ent in post.get("merged", []):
        if ent["source"] in wanted and ent["surface"].lower() not in pairs:
            pairs[ent["surface"].lower()] = ent["type"].lower()
    return pairs


def _gold_index(gold: list[GoldLabel]) -> dict[str, GoldLabel]:
    return {g.post_id: g for g in gold}


def entity_counts(
    dump: list[dict],
    gold: list[GoldLabel],
    source_filter: Source | None = None,
) -> EntityCounts:
    """Compare extracted entities against gold (surface, concept) pairs,
    case-insensitively.  source_filter None means the combined union."""
    by_id = _gold_index(gold)
    correct = incorrect = missing = 0
    for post in dump:
        if post["id"] not in by_id:
            raise MissingGold(post["id"])
        gold_pairs = {
            (s.lower(), c.lower()) for s, c in by_id[post["id"]].gold_entities
        }
        extracted = _extracted_surfaces(post, source_filter)
        matched_gold = set()
        for surface, type_label in extracted.items():
            if (surface, type_label) in gold_pairs:
                correct += 1
                matched_gold.add((surface, type_label))
            else:
                incorrect += 1
        missing += len(gold_pairs - matched_gold)
    return EntityCounts(correct=correct, incorrect=incorrect, missing=missing)


def category_report(
    dump: list[dict], gold: list[GoldLabel]
) -> dict[int, tuple[int, int | None]]:
    """Per category: (size, integer percent of posts judged domain-relevant).

    Empty categories report a None percent rather than 0%.
    """
    by_id = _gold_index(gold)
    sizes = {1: 0, 2: 0, 3: 0, 4: 0}
    relevant = {1: 0, 2: 0, 3: 0, 4: 0}
    for post in dump:
        if post["id"] not in by_id:
            raise MissingGold(post["id"])
        cat = int(post["category"])
        sizes[cat] += 1
        if by_id[post["id"]].is_domain:
            relevant[cat] += 1
    out: dict[int, tuple[int, int | None]] = {}
    for cat in (1, 2, 3, 4):
        if sizes[cat] == 0:
            out[cat] = (0, None)
        else:
            out[cat] = (sizes[cat], _round_percent(100 * relevant[cat] / sizes[cat]))
    return out


def _round_percent(x: float) -> int:
    return math.floor(x + 0.5)


def extraction_rate(correct: int, sample_size: int) -> int:
    """Nearest-integer percentage of correct extractions over the sample."""
    if sample_size <= 0:
        raise InvalidCounts(f"sample size must be positive: {sample_size}")
    if correct < 0:
        raise InvalidCounts(f"correct count must be non-negative: {correct}")
    return _round_percent(100 * correct / sample_size)
