"""Embedded triple store with pattern queries, a mini query grammar, and
triple-file persistence.

Two inference rules are applied at query time over the base triples:
sameAs symmetry and type lifting along stored subClassOf chains.  Nothing
else is entailed.  Persistence writes base triples only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .triples import (
    Iri,
    Literal,
    OWL_SAME_AS,
    RDF_TYPE,
    RDFS_SUBCLASS_OF,
    Term,
    Triple,
    parse_ntriples,
    serialize_ntriples,
    triple_sort_key,
)

__all__ = [
    "QueryPattern",
    "QueryParseError",
    "UnknownPrefix",
    "TripleStore",
    "parse_query",
]


@dataclass(frozen=True)
class QueryPattern:
    """Single triple pattern; None marks a wildcard position."""

    subject: Iri | None = None
    predicate: Iri | None = None
    object: Term | None = None


class QueryParseError(ValueError):
    def __init__(self, position: int, reason: str):
        super().__init__(f"position {position}: {reason}")
        self.position = position
        self.reason = reason


class UnknownPrefix(QueryParseError):
    pass


class TripleStore:
    def __init__(self):
        self._base: set[Triple] = set()
        self._virtual: set[Triple] | None = None

    def insert(self, triples: list[Triple]) -> int:
        """Insert with set semantics; returns the number actually added."""
        added = 0
        for t in triples:
            if t not in self._base:
                self._base.add(t)
                added += 1
        if added:
            self._virtual = None
        return added

    def triples(self) -> list[Triple]:
        return sorted(self._base, key=triple_sort_key)

    def __len__(self) -> int:
        return len(self._base)

    def _materialize(self) -> set[Triple]:
        if self._virtual is not None:
            return self._virtual
        virtual = set(self._base)
        # sameAs symmetry
        for t in self._base:
            if t.predicate == OWL_SAME_AS and isinstance(t.object, Iri):
                virtual.add(Triple(t.object, OWL_SAME_AS, t.subject))
        # type lift along transitive subClassOf
        parents: dict[Iri, set[Iri]] = {}
        for t in self._base:
            if t.predicate == RDFS_SUBCLASS_OF and isinstance(t.object, Iri):
                parents.setdefault(t.subject, set()).add(t.object)
        closure: dict[Iri, set[Iri]] = {}

        def ancestors(c: Iri) -> set[Iri]:
            # BFS reachability; handles cyclic data without special-casing
            if c not in closure:
                seen: set[Iri] = set()
                frontier = [c]
                while frontier:
                    node = frontier.pop()
                    for p in parents.get(node, ()):
                        if p not in seen:
                            seen.add(p)
                            frontier.append(p)
                closure[c] = seen
            return closure[c]

        for t in self._base:
            if t.predicate == RDF_TYPE and isinstance(t.object, Iri):
                for lifted in ancestors(t.object):
                    virtual.add(Triple(t.subject, RDF_TYPE, lifted))
        self._virtual = virtual
        return virtual

    def query(self, pattern: QueryPattern) -> list[Triple]:
        """All triples (base plus inferred) matching the pattern, sorted."""
        matched = [
            t
            for t in self._materialize()
            if (pattern.subject is None or t.subject == pattern.subject)
            and (pattern.predicate is None or t.predicate == pattern.predicate)
            and (pattern.object is None or t.object == pattern.object)
        ]
        return sorted(matched, key=triple_sort_key)

    def describe(self, subject: Iri) -> list[Triple]:
        return self.query(QueryPattern(subject=subject))

    def persist(self, path: str | Path):
        Path(path).write_text(serialize_ntriples(self.triples()), encoding="utf-8")

    def load(self, path: str | Path):
        """Replace the store content; on parse failure the store is kept."""
        with open(path, encoding="utf-8") as fh:
            triples = parse_ntriples(fh.read())
        self._base = set(triples)
        self._virtual = None


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<iriref><[^<>"\s]*>)
  | (?P<literal>"(?:[^"\\]|\\.)*")
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}:*])
  | (?P<name>[A-Za-z_][A-Za-z0-9_\-.]*)
    """,
    re.VERBOSE,
)

_LIT_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise QueryParseError(pos, f"unexpected character {text[pos]!r}")
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(0), pos))
        pos = m.end()
    return tokens


def parse_query(text: str) -> QueryPattern:
    """Parse ``PREFIX name: <iri>`` declarations followed by
    ``SELECT * WHERE { term term term }``; variables become wildcards."""
    tokens = _tokenize(text)
    idx = 0

    def peek():
        return tokens[idx] if idx < len(tokens) else ("eof", "", len(text))

    def take(kind: str, value: str | None = None):
        nonlocal idx
        tok_kind, tok_value, tok_pos = peek()
        matches = tok_kind == kind and (
            value is None or tok_value.lower() == value.lower()
        )
        if not matches:
            raise QueryParseError(
                tok_pos, f"expected {value or kind}, got {tok_value!r}"
            )
        idx += 1
        return tok_value, tok_pos

    prefixes: dict[str, str] = {}
    while idx < len(tokens) and tokens[idx][1].lower() == "prefix":
        take("name", "prefix")
        name, _ = take("name")
        take("punct", ":")
        iriref, pos = take("iriref")
        try:
            prefixes[name] = Iri(iriref[1:-1]).value
        except ValueError as exc:
            raise QueryParseError(pos, str(exc)) from None

    take("name", "select")
    take("punct", "*")
    take("name", "where")
    take("punct", "{")

    def read_term() -> Term | None:
        nonlocal idx
        kind, value, pos = peek()
        if kind == "var":
            idx += 1
            return None
        if kind == "iriref":
            idx += 1
            try:
                return Iri(value[1:-1])
            except ValueError as exc:
                raise QueryParseError(pos, str(exc)) from None
        if kind == "literal":
            idx += 1
            body = value[1:-1]
            out = []
            i = 0
            while i < len(body):
                if body[i] == "\\":
                    esc = body[i + 1]
                    if esc not in _LIT_ESCAPES:
                        raise QueryParseError(pos, f"unknown escape '\\{esc}'")
                    out.append(_LIT_ESCAPES[esc])
                    i += 2
                else:
                    out.append(body[i])
                    i += 1
            return Literal("".join(out))
        if kind == "name":
            # prefixed name; whitespace after the colon is tolerated
            prefix, _ = take("name")
            take("punct", ":")
            local, _ = take("name")
            if prefix not in prefixes:
                raise UnknownPrefix(pos, f"undeclared prefix {prefix!r}")
            return Iri(prefixes[prefix] + local)
        raise QueryParseError(pos, f"expected term, got {value!r}")

    s = read_term()
    p = read_term()
    o = read_term()
    take("punct", "}")
    if idx != len(tokens):
        kind, value, pos = peek()
        raise QueryParseError(pos, f"trailing content {value!r}")
    if s is not None and not isinstance(s, Iri):
        raise QueryParseError(0, "subject must be an IRI or variable")
    if p is not None and not isinstance(p, Iri):
        raise QueryParseError(0, "predicate must be an IRI or variable")
    return QueryPattern(subject=s, predicate=p, object=o)
