import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncdlab.compressors import LzBackend
from ncdlab.errors import DecodeError, EmptyInputError, LevelError, ParseError, ValidationError
from ncdlab.textops import (
    ASTERISK,
    LEVELS,
    RANDOM_CHARSET,
    DistortionSpec,
    FrequencyTable,
    Selection,
    Separator,
    Shuffle,
    Substitution,
    Word,
    build_removal_set,
    complexity_estimate,
    distort,
    distort_document,
    emit_removal_map,
    entropy,
    load_frequency_table,
    normalize_and_tokenize,
    normalize_text,
    percentage_substituted,
    read_corpus,
    removal_statistics,
    shuffle_variant,
    write_distorted,
)

SMALL = FrequencyTable.from_counts({"the": 50, "of": 20, "cat": 15, "sat": 10, "mat": 5})

texts = st.text(alphabet="abcdefg hijk\n.,THE", max_size=300)


def test_normalize():
    assert normalize_text("Hello, World!") == "hello  world "
    assert normalize_text(b"caf\xc3\xa9 ok") == "caf  ok"
    # one replacement character per invalid byte sequence
    assert normalize_text(b"a\xffb") == "a b"
    with pytest.raises(DecodeError, match="byte offset 1"):
        normalize_text(b"a\xffb", errors="strict")
    with pytest.raises(ValidationError):
        normalize_text(b"x", errors="ignore")


def test_tokenize():
    doc = normalize_and_tokenize("The  cat sat.")
    assert doc.tokens == (
        Word("the"),
        Separator("  "),
        Word("cat"),
        Separator(" "),
        Word("sat"),
        Separator(" "),
    )
    assert doc.words == ["the", "cat", "sat"]
    assert doc.text == "the  cat sat "


def test_load_frequency_table(tmp_path, table):
    assert table.entries["the"] == 6187267
    assert table.decreasing[:3] == ("the", "of", "and")

    path = tmp_path / "freq.tsv"
    path.write_text("# comment\nThe\t3\n\nthe\t2\ncat\t1\n", encoding="utf-8")
    small = load_frequency_table(path)
    assert small.entries == {"the": 5, "cat": 1}
    assert small.total == 6

    path.write_text("the\t3\ncat three\n", encoding="utf-8")
    with pytest.raises(ParseError, match=r"freq.tsv:2: expected word<TAB>count"):
        load_frequency_table(path)
    path.write_text("the\tmany\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":1: count 'many'"):
        load_frequency_table(path)
    path.write_text("# nothing\n", encoding="utf-8")
    with pytest.raises(EmptyInputError):
        load_frequency_table(path)


def test_orderings():
    assert SMALL.ordering(Selection.MFW) == ("the", "of", "cat", "sat", "mat")
    assert SMALL.ordering("lfw") == ("mat", "sat", "cat", "of", "the")
    assert SMALL.ordering("rw", seed=3) == SMALL.ordering("rw", seed=3)
    assert sorted(SMALL.ordering("rw", seed=3)) == sorted(SMALL.entries)


def test_removal_set_levels():
    assert build_removal_set(SMALL, "mfw", 0.0).words == frozenset()
    # 0.5 of 100 is reached by "the" alone
    assert build_removal_set(SMALL, "mfw", 0.5).words == {"the"}
    assert build_removal_set(SMALL, "mfw", 0.6).words == {"the", "of"}
    assert build_removal_set(SMALL, "lfw", 0.1).words == {"mat", "sat"}
    full = build_removal_set(SMALL, "mfw", 1.0)
    assert full.words == frozenset(SMALL.entries)
    assert full.cumulative_frequency == 1.0
    with pytest.raises(LevelError):
        build_removal_set(SMALL, "mfw", 0.25)
    with pytest.raises(LevelError):
        build_removal_set(SMALL, "mfw", 1.1)
    with pytest.raises(ValidationError, match="unknown selection 'top'"):
        build_removal_set(SMALL, "top", 0.5)


@pytest.mark.parametrize("method", list(Selection))
def test_removal_sets_nest(table, method):
    previous = frozenset()
    for level in LEVELS:
        removal = build_removal_set(table, method, level, seed=5)
        assert previous <= removal.words
        assert removal.cumulative_frequency >= level - 1e-12
        previous = removal.words


def test_full_removal_identical(table):
    mfw = build_removal_set(table, "mfw", 1.0)
    assert mfw.words == build_removal_set(table, "lfw", 1.0).words
    assert mfw.words == build_removal_set(table, "rw", 1.0, seed=9).words


def test_removal_statistics():
    stats = removal_statistics(SMALL, "mfw", (0.0, 0.5, 1.0))
    assert [(s.level, s.words) for s in stats] == [(0.0, 0), (0.5, 1), (1.0, 5)]
    assert stats[1].cumulative_frequency == 0.5


def test_distort_asterisk_and_random():
    doc = normalize_and_tokenize("The cat sat on the dog")
    removal = build_removal_set(SMALL, "mfw", 0.5)
    out = distort(doc, removal, "asterisk")
    assert out.text == "*** cat sat on *** dog"
    assert (out.words_total, out.words_replaced) == (6, 2)
    assert percentage_substituted(out) == pytest.approx(2 / 6)

    random_out = distort(doc, removal, Substitution.RANDOM, seed=1, doc_id="d")
    assert len(random_out.text) == len(doc.text)
    assert random_out.text[3:] == " cat sat on " + random_out.text[15:18] + " dog"
    assert all(c in RANDOM_CHARSET for c in random_out.text[:3])
    assert random_out == distort(doc, removal, Substitution.RANDOM, seed=1, doc_id="d")


def test_out_of_corpus_words_survive():
    doc = normalize_and_tokenize("zyxwv the quokka")
    out = distort(doc, build_removal_set(SMALL, "lfw", 1.0), "asterisk")
    assert out.text == "zyxwv *** quokka"


@given(texts, st.sampled_from(LEVELS), st.sampled_from(list(Selection)), st.integers(0, 5))
@settings(max_examples=100, deadline=None)
def test_distortion_preserves_length(text, level, method, seed):
    doc = normalize_and_tokenize(text)
    removal = build_removal_set(SMALL, method, level, seed)
    for substitution in Substitution:
        out = distort(doc, removal, substitution, seed, "doc")
        assert len(out.text) == len(doc.text)
        assert out == distort(doc, removal, substitution, seed, "doc")


@given(texts, st.sampled_from(list(Shuffle)), st.integers(0, 5))
@settings(max_examples=100, deadline=None)
def test_shuffle_keeps_multiset(text, mode, seed):
    spec = DistortionSpec("mfw", "asterisk", mode, 0.6, seed)
    out = distort_document("doc", text, SMALL, spec)
    plain = distort_document("doc", text, SMALL, DistortionSpec("mfw", "asterisk", level=0.6))
    assert sorted(out.text.split()) == sorted(plain.text.split())
    assert out == distort_document("doc", text, SMALL, spec)


def test_shuffle_modes():
    doc = distort(
        normalize_and_tokenize("the cat of the mat sat of dog"),
        build_removal_set(SMALL, "mfw", 0.6),
        "asterisk",
    )
    tokens = doc.text.split()
    stars = [i for i, t in enumerate(tokens) if set(t) == {ASTERISK}]

    only_stars = shuffle_variant(doc, Shuffle.ASTERISKS, seed=2).text.split()
    assert [t for i, t in enumerate(only_stars) if i not in stars] == [
        t for i, t in enumerate(tokens) if i not in stars
    ]
    only_words = shuffle_variant(doc, Shuffle.WORDS, seed=2).text.split()
    assert [only_words[i] for i in stars] == [tokens[i] for i in stars]
    assert shuffle_variant(doc, Shuffle.NONE) is doc

    random_doc = distort(
        normalize_and_tokenize("the cat"), build_removal_set(SMALL, "mfw", 0.5), "random"
    )
    with pytest.raises(ValidationError, match="asterisk"):
        shuffle_variant(random_doc, Shuffle.ALL)


def test_distortion_spec():
    spec = DistortionSpec("MFW", "asterisk", "words", 0.3)
    assert spec.selection is Selection.MFW
    assert spec.suffix == ".mfw.0.3.asterisk.words.txt"
    assert DistortionSpec("lfw", "random", level=1).suffix == ".lfw.1.0.random.txt"
    with pytest.raises(ValidationError, match="needs asterisk substitution"):
        DistortionSpec("mfw", "random", "all", 0.3)
    with pytest.raises(LevelError):
        DistortionSpec("mfw", "random", level=0.35)


@given(texts, st.sampled_from(list(Selection)), st.integers(0, 5))
@settings(max_examples=100, deadline=None)
def test_percentage_substituted_grows_with_level(text, method, seed):
    shares = []
    for level in LEVELS:
        spec = DistortionSpec(method, "asterisk", level=level, seed=seed)
        out = distort_document("doc", text, SMALL, spec)
        if not out.words_total:
            return
        shares.append(percentage_substituted(out))
    assert shares == sorted(shares)
    assert shares[0] == 0.0


def test_percentage_substituted_empty():
    out = distort(normalize_and_tokenize("..."), build_removal_set(SMALL, "mfw", 1.0))
    with pytest.raises(ValidationError, match="undefined"):
        percentage_substituted(out)


def test_removal_map():
    doc = normalize_and_tokenize("the cat sat of mat")
    removal_map = emit_removal_map(doc, build_removal_set(SMALL, "mfw", 0.6), width=2)
    assert removal_map.pixels == (0, 1, 1, 0, 1)
    assert removal_map.height == 3
    assert removal_map.to_pbm() == "P1\n2 3\n0 1\n1 0\n1 0\n"
    with pytest.raises(ValidationError):
        emit_removal_map(doc, build_removal_set(SMALL, "mfw", 0.6), width=0)


def test_entropy():
    assert entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-9)
    assert entropy([1 / 32] * 32) == pytest.approx(5.0, abs=1e-9)
    assert entropy([1.0, 0.0]) == 0.0
    with pytest.raises(ValidationError, match="sum to"):
        entropy([0.5, 0.6])
    with pytest.raises(ValidationError):
        entropy([])
    with pytest.raises(ValidationError):
        entropy([1.5, -0.5])


@given(st.integers(2, 1024))
@settings(max_examples=60, deadline=None)
def test_entropy_of_uniform(n):
    assert entropy([1 / n] * n) == pytest.approx(math.log2(n), abs=1e-9)


def test_complexity_drops_with_asterisks(table):
    text = " ".join(["the cat of the mat and the hat in the flat"] * 30)
    backend = LzBackend()
    sizes = [
        complexity_estimate(
            backend, distort_document("d", text, table, DistortionSpec("mfw", "asterisk", level=lv))
        )
        for lv in (0.0, 1.0)
    ]
    assert sizes[1] < sizes[0]
    assert complexity_estimate(backend, "abc") == backend.compressed_len(b"abc")


def test_read_corpus_and_write(tmp_path):
    (tmp_path / "in" / "b").mkdir(parents=True)
    (tmp_path / "in" / "a.txt").write_bytes(b"The cat")
    (tmp_path / "in" / "b" / "c.txt").write_bytes(b"the mat")
    (tmp_path / "in" / ".hidden").write_bytes(b"x")
    docs = read_corpus(tmp_path / "in")
    assert [d.doc_id for d in docs] == ["a.txt", "b/c.txt"]

    spec = DistortionSpec("mfw", "asterisk", level=0.5)
    out = distort_document("b/c.txt", docs[1].data, SMALL, spec)
    path = write_distorted(tmp_path / "out", "b/c.txt", out, spec)
    assert path.endswith("c.mfw.0.5.asterisk.txt")
    with open(path, encoding="ascii") as f:
        assert f.read() == "*** mat"

    (tmp_path / "empty").mkdir()
    with pytest.raises(EmptyInputError):
        read_corpus(tmp_path / "empty")
    with pytest.raises(ValidationError, match="not a directory"):
        read_corpus(tmp_path / "missing")
