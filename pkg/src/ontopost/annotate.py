"""Ontology-lexicon entity extraction, entity merging, per-post domain
classification and the four-way category partition.

Matching is gazetteer-style: case-insensitive, leftmost-longest greedy
over token n-grams, non-overlapping.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .classifier import ExternalEntity, TaxonomyLabel, top_level_domain
from .normalize import CleanText
from .ontology import ElementKind, Ontology, lexicon
from .triples import Iri

__all__ = [
    "AnnotationKind",
    "EntityAnnotation",
    "Source",
    "MergedEntity",
    "annotate",
    "merge_entities",
    "classify_post_domains",
    "category_of",
]


class AnnotationKind(enum.Enum):
    INSTANCE = "instance"
    CONCEPT = "concept"
    RELATION_TRIGGER = "relation_trigger"


_KIND_FROM_ELEMENT = {
    ElementKind.INSTANCE: AnnotationKind.INSTANCE,
    ElementKind.CONCEPT: AnnotationKind.CONCEPT,
    ElementKind.RELATION: AnnotationKind.RELATION_TRIGGER,
}

# When one surface binds several ontology elements, prefer instances over
# relation triggers over concepts, then lowest IRI.
_BINDING_RANK = {
    ElementKind.INSTANCE: 0,
    ElementKind.RELATION: 1,
    ElementKind.CONCEPT: 2,
}


class Source(enum.Enum):
    EXTERNAL = "external"
    ONTOLOGY = "ontology"
    BOTH = "both"


@dataclass(frozen=True)
class EntityAnnotation:
    """A matched text span bound to an ontology element."""

    start: int
    end: int
    surface: str
    kind: AnnotationKind
    element: Iri
    concept: Iri | None = None


@dataclass(frozen=True)
class MergedEntity:
    surface: str
    type_label: str
    source: Source


def annotate(text: CleanText, o: Ontology) -> list[EntityAnnotation]:
    """Scan the token stream against the ontology lexicon."""
    lex = lexicon(o)
    if not lex:
        return []
    max_n = max(len(form.split()) for form in lex)
    tokens = text.tokens
    annotations: list[EntityAnnotation] = []
    i = 0
    while i < len(tokens):
        match = None
        for n in range(min(max_n, len(tokens) - i), 0, -1):
            candidate = " ".join(tok for tok, _ in tokens[i : i + n]).lower()
            if candidate in lex:
                match = (n, lex[candidate])
                break
        if match is None:
            i += 1
            continue
        n, bindings = match
        kind, element = min(
            bindings, key=lambda b: (_BINDING_RANK[b[0]], b[1].value)
        )
        start = tokens[i][1]
        last_tok, last_off = tokens[i + n - 1]
        end = last_off + len(last_tok)
        concept = None
        if kind is ElementKind.INSTANCE:
            concept = o.instances[element].concept
        elif kind is ElementKind.RELATION:
            concept = element
        annotations.append(
            EntityAnnotation(
                start=start,
                end=end,
                surface=text.text[start:end],
                kind=_KIND_FROM_ELEMENT[kind],
                element=element,
                concept=concept,
            )
        )
        i += n
    return annotations


def _concept_label(iri: Iri) -> str:
    value = iri.value
    for sep in ("#", "/"):
        if sep in value:
            value = value.rsplit(sep, 1)[1]
    return value


def merge_entities(
    external: list[ExternalEntity], anns: list[EntityAnnotation]
) -> list[MergedEntity]:
    """Union both sources by case-insensitive surface; the ontology concept
    name wins as the type label when both name a surface."""
    merged: dict[str, MergedEntity] = {}
    for ent in external:
        key = ent.surface.lower()
        if key not in merged:
            merged[key] = MergedEntity(
                surface=ent.surface,
                type_label=ent.entity_type,
                source=Source.EXTERNAL,
            )
    for ann in anns:
        key = ann.surface.lower()
        label = _concept_label(ann.concept if ann.concept else ann.element)
        if key in merged and merged[key].source in (Source.EXTERNAL, Source.BOTH):
            merged[key] = MergedEntity(
                surface=merged[key].surface,
                type_label=label,
                source=Source.BOTH,
            )
        elif key not in merged:
            merged[key] = MergedEntity(
                surface=ann.surface, type_label=label, source=Source.ONTOLOGY
            )
    return list(merged.values())


def classify_post_domains(
    taxonomies: list[TaxonomyLabel],
    anns: list[EntityAnnotation],
    o: Ontology,
) -> list[str]:
    """Classifier domains, plus the ontology's domain when it annotates."""
    domains: list[str] = []
    for label in taxonomies:
        domain = top_level_domain(label.path)
        if domain not in domains:
            domains.append(domain)
    if anns and o.domain_name not in domains:
        domains.append(o.domain_name)
    return domains


def category_of(classifier_says_domain: bool, ontology_annotates: bool) -> int:
    """Four-way partition of posts by the two boolean verdicts."""
    if classifier_says_domain and ontology_annotates:
        return 1
    if not classifier_says_domain and ontology_annotates:
        return 2
    if classifier_says_domain:
        return 3
    return 4
