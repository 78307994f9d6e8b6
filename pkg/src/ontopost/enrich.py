"""Enrichment of annotated instances into descriptive triples and
owl:sameAs interlinking against external vocabularies."""

from __future__ import annotations

from pathlib import Path

from .annotate import AnnotationKind, EntityAnnotation
from .ontology import Ontology
from .triples import (
    Iri,
    Literal,
    ONTO,
    ONTO_RESOLVED_NAME,
    ONTO_TRIGGER,
    ONTO_VALUE,
    OWL_SAME_AS,
    RDF_TYPE,
    RDFS_SUBCLASS_OF,
    Triple,
    parse_ntriples,
)

__all__ = [
    "LinkTable",
    "NotAnInstance",
    "load_link_table",
    "post_iri",
    "enrich",
    "interlink",
    "enrich_post",
]

# instance IRI -> equivalent IRIs in external vocabularies
LinkTable = dict[Iri, frozenset[Iri]]


class NotAnInstance(ValueError):
    pass


def load_link_table(path: str | Path) -> LinkTable:
    """Read a sameAs-only triple file into a link table."""
    with open(path, encoding="utf-8") as fh:
        triples = parse_ntriples(fh.read())
    table: dict[Iri, set[Iri]] = {}
    for t in triples:
        if t.predicate != OWL_SAME_AS or not isinstance(t.object, Iri):
            raise ValueError(
                f"link table may only contain sameAs statements, got "
                f"<{t.predicate.value}>"
            )
        if t.object == t.subject:
            raise ValueError(f"self-link on {t.subject.value}")
        table.setdefault(t.subject, set()).add(t.object)
    return {k: frozenset(v) for k, v in table.items()}


def post_iri(post_id: str) -> Iri:
    return Iri(ONTO + "post/" + post_id)


def enrich(ann: EntityAnnotation, o: Ontology) -> list[Triple]:
    """Descriptive triples for one instance annotation: type, recorded
    subclass context, resolved name, data properties, primary form."""
    if ann.kind is not AnnotationKind.INSTANCE or ann.element not in o.instances:
        raise NotAnInstance(ann.element.value)
    inst = o.instances[ann.element]
    triples = [Triple(inst.iri, RDF_TYPE, inst.concept)]
    for parent in inst.subclass_context:
        triples.append(Triple(inst.iri, RDFS_SUBCLASS_OF, parent))
    triples.append(Triple(inst.iri, ONTO_RESOLVED_NAME, Literal(inst.resolved_name)))
    for predicate, value in inst.data_properties:
        triples.append(Triple(inst.iri, predicate, Literal(value)))
    triples.append(Triple(inst.iri, ONTO_VALUE, Literal(inst.primary_form)))
    return triples


def interlink(instance: Iri, links: LinkTable) -> list[Triple]:
    """One sameAs triple per linked IRI, in sorted order."""
    return [
        Triple(instance, OWL_SAME_AS, target)
        for target in sorted(links.get(instance, frozenset()))
    ]


def enrich_post(
    post_id: str,
    anns: list[EntityAnnotation],
    o: Ontology,
    links: LinkTable,
) -> list[Triple]:
    """Enrichment plus interlinking for every instance annotation, plus a
    trigger provenance triple per relation annotation.  Deduplicated,
    first-occurrence order."""
    out: list[Triple] = []
    seen: set[Triple] = set()

    def emit(ts: list[Triple]):
        for t in ts:
            if t not in seen:
                seen.add(t)
                out.append(t)

    for ann in anns:
        if ann.kind is AnnotationKind.INSTANCE:
            emit(enrich(ann, o))
            emit(interlink(ann.element, links))
        elif ann.kind is AnnotationKind.RELATION_TRIGGER:
            emit([Triple(post_iri(post_id), ONTO_TRIGGER, ann.element)])
    return out
