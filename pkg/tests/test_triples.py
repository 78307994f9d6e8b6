import pytest
from hypothesis import given, strategies as st

from ontopost.triples import (
    Iri,
    Literal,
    ParseError,
    Triple,
    parse_ntriples,
    serialize_ntriples,
    triple_sort_key,
)


def test_parse_basic_statement():
    got = parse_ntriples('<http://a/s> <http://a/p> <http://a/o> .\n')
    assert got == [Triple(Iri("http://a/s"), Iri("http://a/p"), Iri("http://a/o"))]


def test_parse_literal_object_with_escapes():
    (t,) = parse_ntriples('<http://a/s> <http://a/p> "line\\none \\"q\\" \\\\" .')
    assert t.object == Literal('line\none "q" \\')


def test_comments_and_blank_lines_skipped():
    text = "# header\n\n  \n<http://a/s> <http://a/p> \"x\" .\n# trailer\n"
    assert len(parse_ntriples(text)) == 1


@pytest.mark.parametrize(
    "bad, line, fragment",
    [
        ("<http://a/s> <http://a/p> .", 1, "object"),
        ("<http://a/s> <http://a/p> <http://a/o>", 1, "'.'"),
        ('\n<http://a/s> <http://a/p> "open .', 2, "unterminated"),
        ("<http://a/s> <http://a/p> <http://a/o> . junk", 1, "trailing"),
        ("<nonabsolute> <http://a/p> <http://a/o> .", 1, "IRI"),
        ('<http://a/s> <http://a/p> "bad \\z" .', 1, "escape"),
        ("<http://a/s> <http://a/p> 42 .", 1, "expected IRI"),
    ],
)
def test_parse_errors_carry_line_and_reason(bad, line, fragment):
    with pytest.raises(ParseError) as err:
        parse_ntriples(bad)
    assert err.value.line == line
    assert fragment in err.value.reason


def test_iri_validation():
    Iri("urn:uuid:1234")
    for bad in ("", "no-scheme", "http://a b", 'http://a"b', "http://<a>"):
        with pytest.raises(ValueError):
            Iri(bad)


def test_sort_key_iris_before_literals():
    s, p = Iri("http://a/s"), Iri("http://a/p")
    rows = [Triple(s, p, Literal("aaa")), Triple(s, p, Iri("http://z/z"))]
    ordered = sorted(rows, key=triple_sort_key)
    assert isinstance(ordered[0].object, Iri)


# -- round-trip property ------------------------------------------------

iri_strategy = st.from_regex(r"http://[a-z]{1,8}\.example/[A-Za-z0-9_#/]{0,12}", fullmatch=True).map(Iri)
literal_strategy = st.text(
    alphabet=st.characters(codec="utf-8", exclude_categories=("Cs",)), max_size=20
).map(Literal)
triple_strategy = st.builds(
    Triple,
    subject=iri_strategy,
    predicate=iri_strategy,
    object=st.one_of(iri_strategy, literal_strategy),
)


@given(st.lists(triple_strategy, max_size=12))
def test_serialize_parse_round_trip(triples):
    assert parse_ntriples(serialize_ntriples(triples)) == triples
