"""Domain ontology model: concepts, subclass hierarchy, relations with
converses, instances with surface forms, and instance link statements.

Ontologies are assembled from triple files using the reserved vocabulary
in :mod:`ontopost.triples`:

* ``X rdf:type rdfs:Class``             declares a concept
* ``R rdf:type owl:ObjectProperty``     declares a relation
* ``A rdfs:subClassOf B``               hierarchy edge (concept subject) or
                                        verbatim subclass context (instance
                                        subject, reproduced by enrichment)
* ``I rdf:type C``                      declares an instance of concept C
* ``onto:value / onto:alias``           primary surface form and aliases
* ``onto:ResolvedName``                 display name
* ``owl:inverseOf``                     converse relation (must be declared
                                        symmetrically)
* ``I R J``                             instance link via relation R

Any other predicate with a literal object becomes an instance data
property (e.g. ``onto:Website``).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

from .triples import (
    Iri,
    Literal,
    ONTO_ALIAS,
    ONTO_DOMAIN_TAG,
    ONTO_RESOLVED_NAME,
    ONTO_TRIGGER,
    ONTO_VALUE,
    OWL_INVERSE_OF,
    OWL_OBJECT_PROPERTY,
    OWL_SAME_AS,
    RDF_TYPE,
    RDFS_CLASS,
    RDFS_SUBCLASS_OF,
    Triple,
    parse_ntriples,
)

__all__ = [
    "ElementKind",
    "Relation",
    "Instance",
    "Ontology",
    "ValidationError",
    "UnknownConcept",
    "build_ontology",
    "load_ontology",
    "superclasses",
    "lexicon",
]


class ValidationError(ValueError):
    pass


class UnknownConcept(KeyError):
    pass


class ElementKind(enum.Enum):
    INSTANCE = "instance"
    CONCEPT = "concept"
    RELATION = "relation"


@dataclass(frozen=True)
class Relation:
    iri: Iri
    trigger_forms: frozenset[str] = frozenset()
    converse: Iri | None = None


@dataclass(frozen=True)
class Instance:
    iri: Iri
    concept: Iri
    resolved_name: str
    primary_form: str
    surface_forms: frozenset[str] = frozenset()
    data_properties: tuple[tuple[Iri, str], ...] = ()
    same_as: frozenset[Iri] = frozenset()
    # Verbatim per-instance subclass rows, emitted as-is by enrichment.
    subclass_context: tuple[Iri, ...] = ()


@dataclass(frozen=True)
class Ontology:
    domain_name: str
    concepts: frozenset[Iri]
    subclass_edges: frozenset[tuple[Iri, Iri]]
    relations: dict[Iri, Relation] = field(default_factory=dict)
    instances: dict[Iri, Instance] = field(default_factory=dict)
    instance_links: frozenset[tuple[Iri, Iri, Iri]] = frozenset()


def _local_name(iri: Iri) -> str:
    value = iri.value
    for sep in ("#", "/"):
        if sep in value:
            value = value.rsplit(sep, 1)[1]
    return value


def _check_acyclic(edges: frozenset[tuple[Iri, Iri]]):
    parents: dict[Iri, list[Iri]] = {}
    for child, parent in edges:
        parents.setdefault(child, []).append(parent)
    WHITE, GREY, BLACK = 0, 1, 2
    state: dict[Iri, int] = {}

    def visit(node: Iri):
        state[node] = GREY
        for nxt in parents.get(node, ()):
            mark = state.get(nxt, WHITE)
            if mark == GREY:
                raise ValidationError(f"subclass cycle through {nxt.value}")
            if mark == WHITE:
                visit(nxt)
        state[node] = BLACK

    for node in parents:
        if state.get(node, WHITE) == WHITE:
            visit(node)


def build_ontology(triples: list[Triple], domain_name: str) -> Ontology:
    """Assemble and validate an ontology from its triple statements."""
    concepts: set[Iri] = set()
    relation_iris: set[Iri] = set()
    for t in triples:
        if t.predicate == RDF_TYPE and t.object == RDFS_CLASS:
            concepts.add(t.subject)
        elif t.predicate == RDF_TYPE and t.object == OWL_OBJECT_PROPERTY:
            relation_iris.add(t.subject)

    instance_concepts: dict[Iri, Iri] = {}
    for t in triples:
        if t.predicate != RDF_TYPE:
            continue
        if t.object in (RDFS_CLASS, OWL_OBJECT_PROPERTY):
            continue
        if not isinstance(t.object, Iri) or t.object not in concepts:
            raise ValidationError(
                f"instance {t.subject.value} typed by unknown concept "
                f"{t.object.value if isinstance(t.object, Iri) else t.object.value!r}"
            )
        instance_concepts[t.subject] = t.object

    subclass_edges: set[tuple[Iri, Iri]] = set()
    subclass_context: dict[Iri, list[Iri]] = {}
    triggers: dict[Iri, set[str]] = {r: set() for r in relation_iris}
    converses: dict[Iri, Iri] = {}
    values: dict[Iri, str] = {}
    aliases: dict[Iri, set[str]] = {}
    resolved: dict[Iri, str] = {}
    same_as: dict[Iri, set[Iri]] = {}
    data_props: dict[Iri, list[tuple[Iri, str]]] = {}
    links: set[tuple[Iri, Iri, Iri]] = set()

    for t in triples:
        s, p, o = t.subject, t.predicate, t.object
        if p == RDF_TYPE:
            continue
        if p == RDFS_SUBCLASS_OF:
            if not isinstance(o, Iri):
                raise ValidationError("subClassOf object must be an IRI")
            if s in concepts:
                if o not in concepts:
                    raise ValidationError(
                        f"subclass of undeclared concept {o.value}"
                    )
                subclass_edges.add((s, o))
            elif s in instance_concepts:
                subclass_context.setdefault(s, []).append(o)
            else:
                raise ValidationError(
                    f"subClassOf on undeclared subject {s.value}"
                )
        elif p == ONTO_TRIGGER and s in relation_iris:
            if not isinstance(o, Literal):
                raise ValidationError("relation trigger must be a literal")
            triggers[s].add(o.value.strip().lower())
        elif p == OWL_INVERSE_OF:
            if s not in relation_iris or not isinstance(o, Iri):
                raise ValidationError(f"inverseOf on non-relation {s.value}")
            converses[s] = o
        elif p == ONTO_VALUE and s in instance_concepts:
            values[s] = o.value
        elif p == ONTO_ALIAS and s in instance_concepts:
            aliases.setdefault(s, set()).add(o.value)
        elif p == ONTO_RESOLVED_NAME and s in instance_concepts:
            resolved[s] = o.value
        elif p == OWL_SAME_AS and s in instance_concepts:
            if not isinstance(o, Iri):
                raise ValidationError("sameAs object must be an IRI")
            same_as.setdefault(s, set()).add(o)
        elif p == ONTO_DOMAIN_TAG:
            continue
        elif s in instance_concepts and isinstance(o, Literal):
            data_props.setdefault(s, []).append((p, o.value))
        elif (
            s in instance_concepts
            and p in relation_iris
            and isinstance(o, Iri)
            and o in instance_concepts
        ):
            links.add((s, p, o))
        else:
            raise ValidationError(
                f"unrecognized statement <{s.value}> <{p.value}>"
            )

    _check_acyclic(frozenset(subclass_edges))

    relations: dict[Iri, Relation] = {}
    for r in relation_iris:
        relations[r] = Relation(
            iri=r,
            trigger_forms=frozenset(triggers[r]),
            converse=converses.get(r),
        )
    for r, rel in relations.items():
        if rel.converse is None:
            continue
        other = relations.get(rel.converse)
        if other is None or other.converse != r:
            raise ValidationError(
                f"asymmetric converse declaration on {r.value}"
            )

    instances: dict[Iri, Instance] = {}
    for i, concept in instance_concepts.items():
        name = resolved.get(i, _local_name(i))
        primary = values.get(i, name.lower())
        forms = {primary.lower()} | {a.lower() for a in aliases.get(i, set())}
        for form in forms:
            if not form.strip():
                raise ValidationError(f"empty surface form on {i.value}")
        instances[i] = Instance(
            iri=i,
            concept=concept,
            resolved_name=name,
            primary_form=primary,
            surface_forms=frozenset(f.strip() for f in forms),
            data_properties=tuple(data_props.get(i, [])),
            same_as=frozenset(same_as.get(i, set())),
            subclass_context=tuple(subclass_context.get(i, [])),
        )

    return Ontology(
        domain_name=domain_name.lower(),
        concepts=frozenset(concepts),
        subclass_edges=frozenset(subclass_edges),
        relations=relations,
        instances=instances,
        instance_links=frozenset(links),
    )


def load_ontology(path, domain_name: str | None = None) -> Ontology:
    """Build an ontology from a triple file; the domain name defaults to
    the file's onto:domainTag statement."""
    with open(path, encoding="utf-8") as fh:
        triples = parse_ntriples(fh.read())
    if domain_name is None:
        tags = [
            t.object.value
            for t in triples
            if t.predicate == ONTO_DOMAIN_TAG and isinstance(t.object, Literal)
        ]
        if not tags:
            raise ValidationError(f"{path}: no domainTag and no domain name given")
        domain_name = tags[0]
    return build_ontology(triples, domain_name)


def superclasses(o: Ontology, c: Iri) -> list[Iri]:
    """Transitive superclasses of c in breadth-first order, excluding c."""
    if c not in o.concepts:
        raise UnknownConcept(c.value)
    parents: dict[Iri, list[Iri]] = {}
    for child, parent in o.subclass_edges:
        parents.setdefault(child, []).append(parent)
    for child in parents:
        parents[child].sort()
    seen: list[Iri] = []
    queue = deque(parents.get(c, []))
    while queue:
        node = queue.popleft()
        if node in seen or node == c:
            continue
        seen.append(node)
        queue.extend(parents.get(node, []))
    return seen


def lexicon(o: Ontology) -> dict[str, list[tuple[ElementKind, Iri]]]:
    """Map every lowercase surface form to its ontology bindings."""
    out: dict[str, list[tuple[ElementKind, Iri]]] = {}
    for inst in o.instances.values():
        for form in inst.surface_forms:
            out.setdefault(form, []).append((ElementKind.INSTANCE, inst.iri))
    for rel in o.relations.values():
        for form in rel.trigger_forms:
            out.setdefault(form, []).append((ElementKind.RELATION, rel.iri))
    for bindings in out.values():
        bindings.sort(key=lambda b: (b[0].value, b[1].value))
    return out
