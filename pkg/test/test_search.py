import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncdlab.errors import EmptyInputError, ParseError, ValidationError
from ncdlab.search import (
    KB,
    CorpusDocument,
    Hit,
    Passage,
    PassageStore,
    PrecisionCurve,
    SearchResult,
    build_topic_corpus,
    index_corpus,
    load_store,
    load_stores,
    mean_precision,
    precision_at_k,
    precision_improvement,
    query,
    resolve_overlap,
    segment,
    select_store,
    topic_relevance,
)

from .utils import FAST_LZ, TOPICS, make_desk_corpus, make_text


def topic_documents(size=5000, seed=0):
    docs = []
    for topic in sorted(TOPICS):
        rng = random.Random(f"search:{seed}:{topic}")
        text = make_text(rng, TOPICS[topic], size, topic_share=0.5)
        docs.append(CorpusDocument(topic, topic, text.encode("ascii")))
    return docs


def fake_result(topics, query_id="q"):
    hits = tuple(
        Hit(Passage(f"{topic}{i}", topic, 0, b"x"), i / 100) for i, topic in enumerate(topics)
    )
    return SearchResult(query_id, hits, 1)


def test_segment():
    doc = bytes(range(256)) * 10
    passages = segment(doc, 1, 512, "d", "t")
    assert [p.offset for p in passages] == [0, 512, 1024, 1536]
    assert all(len(p) == KB for p in passages)
    assert b"".join(p.data for p in passages[::2]) == doc[:2048]

    tail = segment(doc[:3000], 1, 512)
    assert [p.offset for p in tail] == [0, 512, 1024, 1536, 2048]
    assert len(tail[-1]) == 952

    assert segment(b"short", 1, 0)[0].data == b"short"
    assert segment(b"", 1, 0) == []
    with pytest.raises(ValidationError, match="below the 1024 window"):
        segment(doc, 1, 1024)
    with pytest.raises(ValidationError, match="at least 1 KB"):
        segment(doc, 0, 0)


@given(
    size=st.integers(0, 9000),
    window_kb=st.integers(1, 4),
    overlap_share=st.floats(0.0, 0.99),
    seed=st.integers(0, 1000),
)
@settings(max_examples=100, deadline=None)
def test_segment_matches_stride(size, window_kb, overlap_share, seed):
    doc = bytes(random.Random(seed).randrange(256) for _ in range(size))
    window = window_kb * KB
    overlap = int(window * overlap_share)
    stride = window - overlap
    count = 0 if not size else 1 + max(0, -(-(size - window) // stride))
    passages = segment(doc, window_kb, overlap)
    assert [p.offset for p in passages] == [i * stride for i in range(count)]
    for p in passages:
        assert p.data == doc[p.offset : p.offset + window]
    if passages:
        assert passages[-1].offset + len(passages[-1]) == size


def test_resolve_overlap():
    assert resolve_overlap(None, 2048) == 1024
    assert resolve_overlap(0.25, 1024) == 256
    assert resolve_overlap(100, 1024) == 100
    with pytest.raises(ValidationError, match=r"\[0, 1\)"):
        resolve_overlap(1.0, 1024)
    with pytest.raises(ValidationError):
        resolve_overlap(1024, 1024)


def test_index_corpus_and_stores(tmp_path):
    docs = topic_documents(size=3000)
    stores = index_corpus(docs, max_window_kb=3, output_dir=tmp_path, workers=2)
    assert [store.name for store in stores] == ["1kb", "2kb", "3kb"]
    assert stores[0].overlap == 512
    # every passage of a 3000 byte document in the 2 KB store
    assert [p.offset for p in stores[1].passages if p.doc_id == "music"] == [0, 1024]

    loaded = load_stores(tmp_path)
    assert loaded == stores
    assert load_store(tmp_path / "2kb") == stores[1]

    with pytest.raises(EmptyInputError):
        index_corpus([])
    with pytest.raises(ValidationError):
        index_corpus(docs, max_window_kb=0)


def test_broken_stores(tmp_path):
    PassageStore(1, 0, (Passage("d", "t", 0, b"abc"),)).save(tmp_path)
    manifest = tmp_path / "1kb" / "manifest.json"
    entries = json.loads(manifest.read_text())
    entries["passages"][0]["length"] = 10
    manifest.write_text(json.dumps(entries))
    with pytest.raises(ParseError, match="runs past the end"):
        load_store(tmp_path / "1kb")

    manifest.write_text('{"window_kb": 1}')
    with pytest.raises(ParseError, match="malformed manifest"):
        load_store(tmp_path / "1kb")
    manifest.write_text("{oops")
    with pytest.raises(ParseError, match="manifest.json"):
        load_store(tmp_path / "1kb")

    (tmp_path / "empty").mkdir()
    with pytest.raises(EmptyInputError, match="no passage stores"):
        load_stores(tmp_path / "empty")


def test_select_store():
    stores = [PassageStore(k, 0, ()) for k in (3, 1, 2)]
    assert select_store(stores, 100).window_kb == 1
    assert select_store(stores, 1024).window_kb == 1
    assert select_store(stores, 1500).window_kb == 2
    assert select_store(stores, 10 * KB).window_kb == 3
    with pytest.raises(ValidationError):
        select_store([], 10)


@pytest.mark.timeout(300)
def test_query_finds_topic():
    stores = index_corpus(topic_documents(), max_window_kb=2)
    rng = random.Random("search:query")
    text = make_text(rng, TOPICS["sailing"], 900, topic_share=0.5).encode("ascii")
    result = query(stores, FAST_LZ, text, k=5, workers=2, query_id="sail")
    assert result.window_kb == 1
    assert len(result) == 5
    assert result.hits[0].passage.topic == "sailing"
    scores = [hit.score for hit in result.hits]
    assert scores == sorted(scores)

    serial = query(stores, FAST_LZ, text, k=5, query_id="sail")
    assert serial == result

    with pytest.raises(EmptyInputError):
        query(stores, FAST_LZ, b"", k=5)
    with pytest.raises(ValidationError, match="at least 1"):
        query(stores, FAST_LZ, text, k=0)


def test_precision_at_k():
    result = fake_result(["a", "a", "b", "a", "b", "b"])
    curve = precision_at_k(result, topic_relevance("a"), ks=(1, 2, 4, 6))
    assert curve.values == {1: 1.0, 2: 1.0, 4: 0.75, 6: 0.5}
    assert curve[4] == 0.75
    with pytest.raises(ValidationError, match="fewer than K=10"):
        precision_at_k(result, topic_relevance("a"), ks=(5, 10))
    with pytest.raises(ValidationError):
        precision_at_k(result, topic_relevance("a"), ks=(0,))


def test_mean_precision():
    a = PrecisionCurve({5: 1.0, 10: 0.5})
    b = PrecisionCurve({5: 0.0, 10: 0.5}, queries=3)
    mean = mean_precision([a, b])
    assert mean.queries == 4
    assert mean.values == {5: pytest.approx(0.25), 10: pytest.approx(0.5)}
    with pytest.raises(ValidationError):
        mean_precision([])


def test_precision_improvement():
    curves = {
        0.0: PrecisionCurve({5: 0.70, 10: 0.0}),
        0.3: PrecisionCurve({5: 0.80, 10: 0.2}),
        0.6: PrecisionCurve({5: 0.75, 10: 0.1}),
    }
    improvement = precision_improvement(curves)
    assert improvement[5] == pytest.approx(0.142857, abs=1e-6)
    assert improvement[10] is None
    with pytest.raises(ValidationError, match="baseline"):
        precision_improvement({0.3: curves[0.3]})


def test_build_topic_corpus(tmp_path):
    make_desk_corpus(tmp_path, per_topic=3, sizes=(300, 400), topics=["baking", "music"])
    corpus = build_topic_corpus(tmp_path, queries_per_topic=1, seed=2)
    assert [doc.doc_id for doc in corpus.documents] == ["baking", "music"]
    assert [q.topic for q in corpus.queries] == ["baking", "music"]
    assert corpus.queries[0].query_id.startswith("baking/")
    assert corpus == build_topic_corpus(tmp_path, queries_per_topic=1, seed=2)

    sizes = sum(len(doc.data) for doc in corpus.documents) + sum(
        len(q.data) for q in corpus.queries
    )
    assert sizes == sum(p.stat().st_size for p in tmp_path.rglob("*.txt"))

    with pytest.raises(ValidationError, match="needs at least 4"):
        build_topic_corpus(tmp_path, queries_per_topic=3)
    with pytest.raises(ValidationError, match="not a directory"):
        build_topic_corpus(tmp_path / "missing", 1)


DUPLICATE_STORES = index_corpus(topic_documents(size=3000, seed=7), max_window_kb=1)


@pytest.mark.timeout(300)
@given(st.sampled_from(DUPLICATE_STORES[0].passages))
@settings(max_examples=20, deadline=None)
def test_exact_duplicate_ranks_first(passage):
    result = query(DUPLICATE_STORES, FAST_LZ, passage.data, k=3, query_id="dup")
    top = result.hits[0]
    assert top.passage.data == passage.data
    assert top.score <= 0.1
