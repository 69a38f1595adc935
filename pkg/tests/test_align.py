import math
import random
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aligngen import accuracy, bijective_corpus
from amrdiv.align import (
    NULL,
    AlignmentSet,
    EmptyCorpus,
    IndexOutOfBounds,
    MalformedLink,
    align,
    parse_pharaoh_line,
    read_alignment_file,
    read_parallel_corpus,
    read_pharaoh,
    train,
    write_pharaoh,
)


def reference_em(corpus, iterations):
    """Plain-dict IBM Model 1 with a NULL source word and no prior."""
    tgt_vocab = {w for _, t in corpus for w in t}
    t = defaultdict(lambda: 1.0 / len(tgt_vocab))
    for _ in range(iterations):
        counts = defaultdict(float)
        totals = defaultdict(float)
        for src, tgt in corpus:
            src = [NULL] + list(src)
            for f in tgt:
                z = sum(t[(f, e)] for e in src)
                for e in src:
                    c = t[(f, e)] / z
                    counts[(f, e)] += c
                    totals[e] += c
        t = defaultdict(float, {(f, e): c / totals[e] for (f, e), c in counts.items()})
    return t


def test_pharaoh_examples():
    assert parse_pharaoh_line("0-0 1-1") == [(0, 0), (1, 1)]
    assert parse_pharaoh_line("") == []
    assert write_pharaoh([]) == ""
    links = parse_pharaoh_line("3-0 0-2 0-1")
    assert links == [(0, 1), (0, 2), (3, 0)]
    assert write_pharaoh(links) == "0-1 0-2 3-0"
    assert read_pharaoh(write_pharaoh(links)) == [links]


@pytest.mark.parametrize("bad", ["0-a", "-1-2", "1_2", "1-", "0-0-0", "x"])
def test_malformed_links(bad):
    with pytest.raises(MalformedLink):
        parse_pharaoh_line(bad)


def test_read_pharaoh_reports_line():
    with pytest.raises(MalformedLink, match="line 2"):
        read_pharaoh("0-0\n0-x\n")


def test_alignment_bounds():
    ok = AlignmentSet(("a", "b"), ("x",), frozenset({(1, 0)}))
    ok.validate()
    with pytest.raises(IndexOutOfBounds):
        AlignmentSet(("a",), ("x",), frozenset({(1, 0)})).validate()
    with pytest.raises(IndexOutOfBounds):
        AlignmentSet(("a",), ("x",), frozenset({(0, 3)})).validate()


def test_alignment_views():
    a = AlignmentSet(("a", "b"), ("x", "y"), frozenset({(0, 1), (0, 0), (1, 1)}))
    assert a.sorted_links() == [(0, 0), (0, 1), (1, 1)]
    assert a.targets_of(0) == [0, 1]
    assert a.sources_of(1) == [0, 1]
    r = a.reversed()
    assert r.source_tokens == ("x", "y")
    assert r.links == {(0, 0), (1, 0), (1, 1)}


@settings(max_examples=200)
@given(st.sets(st.tuples(st.integers(0, 50), st.integers(0, 50)), max_size=20))
def test_pharaoh_round_trip(links):
    assert read_pharaoh(write_pharaoh(links) + "\n") == [sorted(links)]


def test_alignment_file_formats(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text("0-0 1-1\na b ||| x y ||| 1-0\n\n", encoding="utf-8")
    entries = read_alignment_file(p)
    assert entries[0] == (None, [(0, 0), (1, 1)])
    assert entries[1] == ((["a", "b"], ["x", "y"]), [(1, 0)])
    assert entries[2] == (None, [])


def test_parallel_corpus(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("le chien ||| the dog\n\nun ||| a\n", encoding="utf-8")
    assert read_parallel_corpus(p) == [(["le", "chien"], ["the", "dog"]), (["un"], ["a"])]
    with pytest.raises(ValueError):
        read_parallel_corpus(["no separator"])


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        train([])
    with pytest.raises(EmptyCorpus):
        train([(["a"], [])])


def test_matches_reference_em():
    corpus = [("a b".split(), "x y".split()), ("a".split(), "x".split()),
              ("b c".split(), "y z".split())]
    model = train(corpus, iterations=4)
    ref = reference_em(corpus, 4)
    for e in ["a", "b", "c", NULL]:
        for f in ["x", "y", "z"]:
            assert model.prob(f, e) == pytest.approx(ref[(f, e)], abs=1e-12)


def test_two_pair_example():
    model = train([("a b".split(), "x y".split()), ("a".split(), "x".split())], iterations=2)
    assert model.prob("x", "a") > model.prob("y", "a")
    # frozen from the reference implementation
    ref = reference_em([("a b".split(), "x y".split()), ("a".split(), "x".split())], 2)
    assert model.prob("x", "a") == pytest.approx(ref[("x", "a")], abs=1e-12)


def test_rows_are_distributions():
    rng = random.Random(3)
    words = [f"w{k}" for k in range(12)]
    corpus = [(rng.sample(words, 4), rng.sample(words, 3)) for _ in range(30)]
    model = train(corpus, iterations=6, diagonal_weight=1.5)
    assert np.all(model.table >= 0)
    assert np.allclose(model.table.sum(axis=1), 1.0, atol=1e-9)


def test_repeated_pair_with_diagonal_prior():
    # without a positional cue the two words are interchangeable
    corpus = [("le chien".split(), "the dog".split())] * 100
    flat = train(corpus, iterations=5)
    assert flat.prob("the", "le") == pytest.approx(flat.prob("dog", "le"))
    model = train(corpus, iterations=5, diagonal_weight=2.0)
    assert model.best_target("le") == "the"
    assert model.best_target("chien") == "dog"
    assert align(model, ["le", "chien"], ["the", "dog"]).links == {(0, 0), (1, 1)}


def test_identity_corpus():
    rng = random.Random(7)
    words = [f"w{k}" for k in range(20)]
    corpus = [(s, s) for s in (rng.sample(words, rng.randint(2, 6)) for _ in range(200))]
    model = train(corpus, iterations=5)
    for w in words:
        assert model.best_target(w) == w
    assert align(model, ["w1", "w2"], ["w1", "w2"]).links == {(0, 0), (1, 1)}


def test_oov_target_is_unlinked():
    corpus = [("a b".split(), "x y".split()), ("a".split(), "x".split()),
              ("b".split(), "y".split())]
    model = train(corpus * 5)
    links = align(model, ["a", "b"], ["x", "unseen"]).links
    assert all(j != 1 for _, j in links)
    assert (0, 0) in links


def test_likelihood_recorded_per_iteration():
    model = train([("a b".split(), "x y".split()), ("a".split(), "x".split())], iterations=3)
    assert len(model.log_likelihoods) == 4
    assert model.iterations == 3
    assert model.corpus_size == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([0.0, 0.5, 3.0]))
def test_likelihood_never_decreases(seed, weight):
    rng = random.Random(seed)
    words = [f"w{k}" for k in range(8)]
    corpus = [(rng.choices(words, k=rng.randint(1, 5)), rng.choices(words, k=rng.randint(1, 5)))
              for _ in range(rng.randint(1, 15))]
    model = train(corpus, iterations=6, diagonal_weight=weight)
    lls = model.log_likelihoods
    assert all(b >= a - 1e-9 * abs(a) for a, b in zip(lls, lls[1:]))
    assert all(math.isfinite(x) for x in lls)


def test_small_bijective_lexicon():
    corpus, gold, lexicon = bijective_corpus(seed=5, vocab=10, pairs=200)
    model = train(corpus, iterations=5)
    assert all(model.best_target(s) == t for s, t in lexicon.items())
    assert accuracy(model, corpus, gold) >= 0.9
