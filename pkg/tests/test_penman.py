import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amrdiv.penman import (
    AmrGraph,
    DuplicateEdge,
    DuplicateVariable,
    EmptyGraph,
    InvariantViolation,
    Metadata,
    PenmanError,
    PenmanSyntaxError,
    Triple,
    TripleKind,
    UnbalancedParens,
    UndefinedVariable,
    extract_triples,
    format_record,
    iter_records,
    load_amr_file,
    parse_penman,
    serialize,
)

from graphgen import random_graph, rename

I, A, R, T = TripleKind.INSTANCE, TripleKind.ATTRIBUTE, TripleKind.RELATION, TripleKind.TOP


def test_single_node():
    g = parse_penman("(d / dog)")
    assert g.variables == ("d",)
    assert g.root == "d"
    assert g.instances == {"d": "dog"}
    assert g.edges == ()
    assert extract_triples(g) == {Triple(I, "d", "instance", "dog"),
                                  Triple(T, "d", "TOP", "dog")}
    assert extract_triples(g, "a") == {Triple(I, "a0", "instance", "dog"),
                                       Triple(T, "a0", "TOP", "dog")}


def test_single_node_serializes_identically():
    assert serialize(parse_penman("(d / dog)")) == "(d / dog)"


def test_reentrancy_is_a_relation():
    g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))")
    assert set(g.relations) == {("w", "ARG0", "b"), ("w", "ARG1", "g"), ("g", "ARG0", "b")}
    assert g.attributes == ()


def test_inverse_role_is_canonicalized():
    a = parse_penman("(p / person :ARG0-of (t / teach-01))")
    b = parse_penman("(t / teach-01 :ARG0 (p / person))")
    assert a.relations == (("t", "ARG0", "p"),)
    assert a.relations == b.relations


def test_intrinsic_of_roles_are_not_inverted():
    g = parse_penman("(h / house :consist-of (s / stone) :prep-out-of (i / it))")
    assert set(g.relations) == {("h", "consist-of", "s"), ("h", "prep-out-of", "i")}


def test_constants_keep_their_text():
    g = parse_penman('(s / sleep-01 :polarity - :quant -3 :name "Le \\"Chat\\"" :time 1957)')
    assert set(g.attributes) == {("s", "polarity", "-"), ("s", "quant", "-3"),
                                 ("s", "name", '"Le \\"Chat\\""'), ("s", "time", "1957")}


def test_fig3_english_triples():
    g = parse_penman("(p / planet :poss (y / you) :domain (a / amr-unknown))")
    assert extract_triples(g, variable_prefix="a") == {
        Triple(I, "a0", "instance", "planet"),
        Triple(I, "a1", "instance", "you"),
        Triple(I, "a2", "instance", "amr-unknown"),
        Triple(T, "a0", "TOP", "planet"),
        Triple(R, "a0", "poss", "a1"),
        Triple(R, "a0", "domain", "a2"),
    }


def _count(g):
    return len(g.variables) + 1 + len(g.relations) + len(g.attributes)


def test_triple_count_fig2(data_dir):
    g = load_amr_file(data_dir / "fig2.en.amr")[0]
    # 5 variables, the top triple, 4 relations and 3 attributes
    assert (len(g.variables), len(g.relations), len(g.attributes)) == (5, 4, 3)
    assert len(extract_triples(g)) == _count(g) == 13


def test_triple_count_on_fixtures(data_dir):
    for name in ("fixtures.amr", "generated.amr"):
        for g in load_amr_file(data_dir / name):
            assert len(extract_triples(g)) == _count(g)


def test_metadata_and_tokens(data_dir):
    g = load_amr_file(data_dir / "fig2.fr.amr")[0]
    assert g.metadata.id == "scout"
    assert g.metadata.lang == "fr"
    assert g.metadata.snt.endswith("en Europe.")
    assert g.metadata.tokens()[-2:] == ["Europe", "."]
    assert Metadata(snt="a b").tokens() == ["a", "b"]
    assert Metadata().tokens() is None


def test_records_split_on_blank_lines():
    text = "# ::id 1\n(a / b)\n\n\n# ::id 2\n# ::snt x y\n(c / d\n  :ARG0 (e / f))\n"
    recs = list(iter_records(text))
    assert [r.metadata.id for r in recs] == ["1", "2"]
    assert recs[1].line == 7
    assert recs[1].metadata.snt == "x y"


def test_error_positions_are_file_lines():
    text = "(a / b)\n\n# ::id bad\n(c / d\n   :ARG0 (c / e))\n"
    recs = list(iter_records(text))
    recs[0].parse()
    with pytest.raises(DuplicateVariable) as err:
        recs[1].parse()
    assert (err.value.line, err.value.column) == (5, 11)


@pytest.mark.parametrize("text, exc", [
    ("", EmptyGraph),
    ("   \n ", EmptyGraph),
    ("(a / b", UnbalancedParens),
    ("(a / b))", UnbalancedParens),
    ("(a / b :ARG0 (a / c))", DuplicateVariable),
    ("(a / b :ARG0 x)", UndefinedVariable),
    ("(a / b :ARG0 (c / d) :ARG0 c)", DuplicateEdge),
    ("(a b)", PenmanSyntaxError),
    ("(a / )", PenmanSyntaxError),
    ("(a / b :ARG0)", PenmanSyntaxError),
    ("(a / b) (c / d)", PenmanSyntaxError),
    ('(a / b :name "x)', PenmanSyntaxError),
    ("a / b", PenmanSyntaxError),
    ("()", PenmanSyntaxError),
    ("(a / b c)", PenmanSyntaxError),
    ("(a / b (c / d))", PenmanSyntaxError),
])
def test_malformed_strings(text, exc):
    with pytest.raises(exc):
        parse_penman(text)


def test_all_errors_share_a_base():
    for exc in (EmptyGraph, UnbalancedParens, DuplicateVariable, DuplicateEdge,
                UndefinedVariable, PenmanSyntaxError):
        assert issubclass(exc, PenmanError)
        assert issubclass(exc, ValueError)


def test_deep_nesting_does_not_recurse():
    depth = 5000
    text = "".join(f"(v{k} / c :ARG0 " for k in range(depth)) + "(z / end)" + ")" * depth
    g = parse_penman(text)
    assert len(g.variables) == depth + 1
    again = parse_penman(serialize(g, indent=0))
    assert extract_triples(again) == extract_triples(g)


def test_validate_rejects_disconnected_graph():
    g = AmrGraph.build("a", {"a": "x", "b": "y"})
    with pytest.raises(InvariantViolation):
        g.validate()


def test_validate_rejects_dangling_edge():
    g = AmrGraph.build("a", {"a": "x"}, [("a", "ARG0", "q")])
    with pytest.raises(InvariantViolation):
        g.validate()


def test_serialize_keeps_written_layout():
    text = "(p / person\n    :ARG0-of (t / teach-01\n        :ARG1 (m / math)))"
    assert serialize(parse_penman(text)) == text


def test_format_record_round_trip():
    g = parse_penman("(a / b)", Metadata(id="x1", snt="A b .", lang="en"))
    rec = list(iter_records(format_record(g)))[0]
    assert rec.metadata == g.metadata
    assert extract_triples(rec.parse()) == extract_triples(g)


def test_round_trip_on_fixtures(data_dir):
    for name in ("fixtures.amr", "generated.amr", "fig2.en.amr", "fig2.fr.amr",
                 "fig3.en.amr", "fig3.es.amr"):
        for g in load_amr_file(data_dir / name):
            assert extract_triples(parse_penman(serialize(g))) == extract_triples(g)


def test_round_trip_of_built_graphs_with_cycles():
    g = AmrGraph.build("a", {"a": "x", "b": "y", "c": "z"},
                       [("a", "ARG0", "b"), ("b", "ARG1", "c"), ("c", "ARG2", "a"),
                        ("c", "mod", "b")], [("b", "quant", "2")])
    assert extract_triples(parse_penman(serialize(g))) == extract_triples(g)


def test_round_trip_when_root_only_has_incoming_edges():
    g = AmrGraph.build("a", {"a": "x", "b": "y"}, [("b", "ARG0", "a")])
    text = serialize(g)
    assert ":ARG0-of" in text
    assert extract_triples(parse_penman(text)) == extract_triples(g)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 14))
def test_round_trip_property(seed, n):
    g = random_graph(random.Random(seed), n)
    assert extract_triples(parse_penman(serialize(g))) == extract_triples(g)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 10))
def test_renaming_changes_nothing_but_names(seed, n):
    rng = random.Random(seed)
    g = random_graph(rng, n)
    h = rename(g, rng)
    kinds = lambda gr: sorted((t.kind, t.role) for t in extract_triples(gr))  # noqa: E731
    assert kinds(g) == kinds(h)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["ARG0", "ARG1", "mod", "time", "poss"]),
       st.sampled_from(["dog", "cat", "run-01"]), st.sampled_from(["big", "house"]))
def test_inversion_property(role, c1, c2):
    forward = parse_penman(f"(x / {c1} :{role} (y / {c2}))")
    inverse = parse_penman(f"(y / {c2} :{role}-of (x / {c1}))")
    assert forward.relations == inverse.relations


def test_reentrancy_round_trip_keeps_one_instance():
    g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-01 :ARG0 b))")
    text = serialize(g)
    assert text.count("(b /") == 1
    again = parse_penman(text)
    assert extract_triples(again) == extract_triples(g)
    assert list(again.instances).count("b") == 1


def test_boy_arg0_of_go():
    a = parse_penman("(b / boy :ARG0-of (g / go-01))")
    b = parse_penman("(g / go-01 :ARG0 (b / boy))")
    assert a.relations == (("g", "ARG0", "b"),) == b.relations
