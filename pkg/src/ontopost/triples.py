"""Line-oriented triple interchange format (an N-Triples subset).

One statement per line: two IRI references and an IRI or quoted literal,
terminated by '.'.  Lines starting with '#' are comments.  The same
format carries ontology fixtures, enrichment output, link tables and
repository persistence files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Iri",
    "Literal",
    "Term",
    "Triple",
    "ParseError",
    "parse_ntriples",
    "serialize_ntriples",
    "triple_sort_key",
    "RDF_TYPE",
    "RDFS_SUBCLASS_OF",
    "RDFS_CLASS",
    "OWL_SAME_AS",
    "OWL_INVERSE_OF",
    "OWL_OBJECT_PROPERTY",
    "ONTO",
    "ONTO_RESOLVED_NAME",
    "ONTO_WEBSITE",
    "ONTO_VALUE",
    "ONTO_ALIAS",
    "ONTO_TRIGGER",
    "ONTO_DOMAIN_TAG",
]

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:\S")


@dataclass(frozen=True, order=True)
class Iri:
    """An absolute IRI."""

    value: str

    def __post_init__(self):
        if not _SCHEME_RE.match(self.value) or any(
            c in self.value for c in '<>" '
        ):
            raise ValueError(f"not an absolute IRI: {self.value!r}")


@dataclass(frozen=True, order=True)
class Literal:
    value: str


Term = Union[Iri, Literal]


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


def triple_sort_key(t: Triple):
    """Lexicographic (s, p, o) order; IRIs sort before literals."""
    return (
        t.subject.value,
        t.predicate.value,
        isinstance(t.object, Literal),
        t.object.value,
    )


_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}
_UNESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


class _LineScanner:
    def __init__(self, line: str, lineno: int):
        self.s = line
        self.i = 0
        self.lineno = lineno

    def error(self, reason: str):
        raise ParseError(self.lineno, reason)

    def skip_ws(self):
        while self.i < len(self.s) and self.s[self.i] in " \t":
            self.i += 1

    def at_end(self) -> bool:
        return self.i >= len(self.s)

    def peek(self) -> str:
        return self.s[self.i] if self.i < len(self.s) else ""

    def read_iri(self) -> Iri:
        if self.peek() != "<":
            self.error("expected '<'")
        end = self.s.find(">", self.i + 1)
        if end < 0:
            self.error("unterminated IRI reference")
        raw = self.s[self.i + 1 : end]
        self.i = end + 1
        try:
            return Iri(raw)
        except ValueError as exc:
            self.error(str(exc))

    def read_literal(self) -> Literal:
        assert self.peek() == '"'
        self.i += 1
        out = []
        while True:
            if self.at_end():
                self.error("unterminated literal")
            ch = self.s[self.i]
            if ch == '"':
                self.i += 1
                return Literal("".join(out))
            if ch == "\\":
                if self.i + 1 >= len(self.s):
                    self.error("unterminated escape")
                esc = self.s[self.i + 1]
                if esc not in _ESCAPES:
                    self.error(f"unknown escape '\\{esc}'")
                out.append(_ESCAPES[esc])
                self.i += 2
            else:
                out.append(ch)
                self.i += 1


def parse_ntriples(text: str) -> list[Triple]:
    """Parse the subset grammar; blank lines and '#' comments are skipped."""
    triples = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        sc = _LineScanner(line, lineno)
        sc.skip_ws()
        subject = sc.read_iri()
        sc.skip_ws()
        predicate = sc.read_iri()
        sc.skip_ws()
        if sc.at_end():
            sc.error("missing object term")
        obj: Term
        if sc.peek() == "<":
            obj = sc.read_iri()
        elif sc.peek() == '"':
            obj = sc.read_literal()
        else:
            sc.error("expected IRI reference or literal object")
        sc.skip_ws()
        if sc.peek() != ".":
            sc.error("missing terminal '.'")
        sc.i += 1
        sc.skip_ws()
        if not sc.at_end():
            sc.error("trailing content after '.'")
        triples.append(Triple(subject, predicate, obj))
    return triples


def _format_term(term: Term) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    escaped = "".join(_UNESCAPES.get(ch, ch) for ch in term.value)
    return f'"{escaped}"'


def serialize_ntriples(triples: list[Triple]) -> str:
    return "".join(
        f"<{t.subject.value}> <{t.predicate.value}> {_format_term(t.object)} .\n"
        for t in triples
    )


# Reserved vocabulary.  The onto: namespace matches the turtle export
# namespace used by the bundled politics fixture.
RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
RDFS_SUBCLASS_OF = Iri("http://www.w3.org/2000/01/rdf-schema#subClassOf")
RDFS_CLASS = Iri("http://www.w3.org/2000/01/rdf-schema#Class")
OWL_SAME_AS = Iri("http://www.w3.org/2002/07/owl#sameAs")
OWL_INVERSE_OF = Iri("http://www.w3.org/2002/07/owl#inverseOf")
OWL_OBJECT_PROPERTY = Iri("http://www.w3.org/2002/07/owl#ObjectProperty")

ONTO = "http://www.semanticweb.org/owl/owlapi/turtle#"
ONTO_RESOLVED_NAME = Iri(ONTO + "ResolvedName")
ONTO_WEBSITE = Iri(ONTO + "Website")
ONTO_VALUE = Iri(ONTO + "value")
ONTO_ALIAS = Iri(ONTO + "alias")
ONTO_TRIGGER = Iri(ONTO + "trigger")
ONTO_DOMAIN_TAG = Iri(ONTO + "domainTag")
