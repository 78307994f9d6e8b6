"""End-to-end orchestration over JSON Lines datasets.

Each stage consumes the previous stage's records and produces
deterministic output (posts are processed in id order).  The stage file
schemas are the external contract shared with the CLI.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from . import annotate as ann_mod
from . import enrich as enrich_mod
from .annotate import AnnotationKind, EntityAnnotation, Source, category_of
from .classifier import filter_confident, top_level_domain
from .inference import HistoryStore, startup_infer
from .normalize import CleanText, clean_text
from .ontology import Ontology
from .triples import Iri, Literal, ONTO, ONTO_VALUE, RDF_TYPE, Triple, triple_sort_key

__all__ = [
    "read_jsonl",
    "write_jsonl",
    "clean_stage",
    "classify_stage",
    "infer_stage",
    "annotate_stage",
    "enrich_stage",
    "evaluate_stage",
]


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def write_jsonl(path: str | Path, records: list[dict]):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def _sorted_posts(records: list[dict]) -> list[dict]:
    return sorted(records, key=lambda r: r["id"])


def clean_stage(posts: list[dict]) -> list[dict]:
    """Dataset records -> records with normalized text and tokens."""
    out = []
    for post in _sorted_posts(posts):
        ct = clean_text(post.get("text", ""))
        out.append(
            {
                "id": post["id"],
                "user": post.get("user", ""),
                "created_at": post.get("created_at", ""),
                "clean_text": ct.text,
                "tokens": [[tok, off] for tok, off in ct.tokens],
            }
        )
    return out


def classify_stage(cleaned: list[dict], classifier) -> list[dict]:
    """Attach the classifier verdict to each cleaned record."""
    out = []
    for post in _sorted_posts(cleaned):
        response = classifier.classify(post["id"], post["clean_text"])
        record = dict(post)
        record["taxonomies"] = [
            {"path": t.path, "score": t.score, "confident": t.confident}
            for t in response.taxonomies
        ]
        record["entities"] = [
            {"surface": e.surface, "type": e.entity_type}
            for e in response.entities
        ]
        out.append(record)
    return out


def _labels_of(record: dict):
    from .classifier import TaxonomyLabel

    return [
        TaxonomyLabel(
            path=t["path"], score=t["score"], confident=t.get("confident", "unknown")
        )
        for t in record.get("taxonomies", [])
    ]


def infer_stage(classified: list[dict], store: HistoryStore) -> HistoryStore:
    """Record each post's confidence-filtered domains in its author's history."""
    for record in _sorted_posts(classified):
        history = store.get(record.get("user", ""))
        startup_infer(history, filter_confident(_labels_of(record)))
    return store


def _clean_text_of(record: dict) -> CleanText:
    return CleanText(
        text=record["clean_text"],
        tokens=tuple((tok, off) for tok, off in record["tokens"]),
    )


def annotate_stage(classified: list[dict], ontologies: list[Ontology]) -> list[dict]:
    """Produce the annotation dump: entities, merged view, domains,
    category (relative to the first ontology)."""
    if not ontologies:
        raise ValueError("at least one ontology is required")
    primary = ontologies[0]
    out = []
    for record in _sorted_posts(classified):
        ct = _clean_text_of(record)
        annotations: list[EntityAnnotation] = []
        for onto in ontologies:
            annotations.extend(ann_mod.annotate(ct, onto))
        annotations.sort(key=lambda a: a.start)

        from .classifier import ExternalEntity

        external = [
            ExternalEntity(surface=e["surface"], entity_type=e["type"])
            for e in record.get("entities", [])
        ]
        merged = ann_mod.merge_entities(external, annotations)
        filtered = filter_confident(_labels_of(record))

        domains: list[str] = []
        for label in filtered:
            domain = top_level_domain(label.path)
            if domain not in domains:
                domains.append(domain)
        for onto in ontologies:
            onto_anns = [a for a in annotations if a.element in onto.instances
                         or a.element in onto.relations]
            if onto_anns and onto.domain_name not in domains:
                domains.append(onto.domain_name)

        classifier_says = any(
            top_level_domain(lb.path) == primary.domain_name for lb in filtered
        )
        primary_anns = [
            a
            for a in annotations
            if a.element in primary.instances or a.element in primary.relations
        ]
        out.append(
            {
                "id": record["id"],
                "user": record.get("user", ""),
                "domains": domains,
                "category": category_of(classifier_says, bool(primary_anns)),
                "annotations": [
                    {
                        "surface": a.surface,
                        "kind": a.kind.value,
                        "element": a.element.value,
                        "concept": a.concept.value if a.concept else None,
                    }
                    for a in annotations
                ],
                "merged": [
                    {
                        "surface": m.surface,
                        "type": m.type_label,
                        "source": m.source.value,
                    }
                    for m in merged
                ],
            }
        )
    return out


def _mint_local(surface: str) -> str:
    words = re.findall(r"[A-Za-z0-9]+", surface)
    return "".join(w[:1].upper() + w[1:] for w in words) or "Entity"


def _annotations_of(post: dict) -> list[EntityAnnotation]:
    anns = []
    for raw in post.get("annotations", []):
        anns.append(
            EntityAnnotation(
                start=0,
                end=max(len(raw["surface"]), 1),
                surface=raw["surface"],
                kind=AnnotationKind(raw["kind"]),
                element=Iri(raw["element"]),
                concept=Iri(raw["concept"]) if raw.get("concept") else None,
            )
        )
    return anns


def enrich_stage(
    dump: list[dict],
    ontologies: list[Ontology],
    links: enrich_mod.LinkTable,
) -> list[Triple]:
    """Enrichment triples for the whole dump.

    Besides the per-annotation enrichment and interlinking this emits
    ontology link statements between instances co-annotated in one post,
    and minted description triples for classifier-only entities, so the
    repository can answer the case-study queries about them.
    """
    by_element: dict[Iri, Ontology] = {}
    for onto in ontologies:
        for iri in onto.instances:
            by_element.setdefault(iri, onto)

    triples: list[Triple] = []
    seen: set[Triple] = set()

    def emit(ts: list[Triple]):
        for t in ts:
            if t not in seen:
                seen.add(t)
                triples.append(t)

    for post in _sorted_posts(dump):
        anns = _annotations_of(post)
        for onto in ontologies:
            onto_anns = [
                a
                for a in anns
                if a.element in onto.instances or a.element in onto.relations
            ]
            emit(enrich_mod.enrich_post(post["id"], onto_anns, onto, links))
            annotated = {
                a.element for a in onto_anns if a.kind is AnnotationKind.INSTANCE
            }
            for subject, relation, obj in sorted(onto.instance_links):
                if subject in annotated and obj in annotated:
                    emit([Triple(subject, relation, obj)])
        # classifier-only entities get a minted type + surface description
        for ent in post.get("merged", []):
            if ent["source"] != Source.EXTERNAL.value:
                continue
            subject = Iri(ONTO + _mint_local(ent["surface"]))
            type_iri = Iri(ONTO + _mint_local(ent["type"]))
            emit(
                [
                    Triple(subject, RDF_TYPE, type_iri),
                    Triple(subject, ONTO_VALUE, Literal(ent["surface"])),
                ]
            )
    return sorted(triples, key=triple_sort_key)


def evaluate_stage(dump: list[dict], gold) -> dict:
    """Metrics per source filter plus the category report."""
    from .evaluation import category_report, compute_metrics, entity_counts

    result: dict = {"sources": {}, "categories": {}}
    for name, source in (
        ("external", Source.EXTERNAL),
        ("ontology", Source.ONTOLOGY),
        ("combined", None),
    ):
        counts = entity_counts(dump, gold, source)
        metrics = compute_metrics(counts)
        result["sources"][name] = {
            "correct": counts.correct,
            "incorrect": counts.incorrect,
            "missing": counts.missing,
            "retrieved": counts.retrieved,
            "relevant": counts.total_relevant,
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f_measure": metrics.f_measure,
            "degenerate": list(metrics.degenerate),
        }
    for cat, (size, percent) in category_report(dump, gold).items():
        result["categories"][str(cat)] = {"size": size, "percent": percent}
    return result
