"""Passage retrieval ranked by NCD

Documents are cut into overlapping fixed-size windows, one store per
window size from 1 KB up to N KB.  A query is compared only with the
passages of the store whose window best matches its own size, since
NCD degrades when the two inputs differ a lot in length.
"""

import concurrent.futures
import json
import logging
import os
import random
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import filelock

from .errors import EmptyInputError, ParseError, ValidationError
from .ncd import LengthCache, ncd

log = logging.getLogger(__name__)

KB = 1024
DEFAULT_MAX_WINDOW_KB = 32
DEFAULT_KS = (5, 10, 15, 20, 30, 40, 50, 100)
MANIFEST = "manifest.json"
PASSAGES = "passages.bin"


@dataclass(frozen=True)
class CorpusDocument:
    doc_id: str
    topic: str
    data: bytes


@dataclass(frozen=True)
class Passage:
    doc_id: str
    topic: str
    offset: int
    data: bytes

    def __len__(self):
        return len(self.data)


def resolve_overlap(policy: Union[None, int, float], window_bytes: int) -> int:
    """None means half the window, a float a fraction of it, an int bytes"""
    if policy is None:
        overlap = window_bytes // 2
    elif isinstance(policy, float):
        if not 0.0 <= policy < 1.0:
            raise ValidationError(f"overlap fraction {policy} must lie in [0, 1)")
        overlap = int(window_bytes * policy)
    else:
        overlap = int(policy)
    if not 0 <= overlap < window_bytes:
        raise ValidationError(f"overlap of {overlap} bytes must be below the {window_bytes} window")
    return overlap


def segment(
    doc: bytes, window_kb: int, overlap: int, doc_id: str = "", topic: str = ""
) -> List[Passage]:
    """Cuts doc into windows starting every window - overlap bytes

    The last window ends at the end of the document and may be shorter.
    """
    if window_kb < 1:
        raise ValidationError(f"window of {window_kb} KB must be at least 1 KB")
    window = window_kb * KB
    if not 0 <= overlap < window:
        raise ValidationError(f"overlap of {overlap} bytes must be below the {window} window")
    stride = window - overlap
    passages = []
    offset = 0
    while offset < len(doc):
        passages.append(Passage(doc_id, topic, offset, bytes(doc[offset : offset + window])))
        if offset + window >= len(doc):
            break
        offset += stride
    return passages


@dataclass(frozen=True)
class PassageStore:
    window_kb: int
    overlap: int
    passages: tuple

    @property
    def window_bytes(self) -> int:
        return self.window_kb * KB

    @property
    def name(self) -> str:
        return f"{self.window_kb}kb"

    def __len__(self):
        return len(self.passages)

    def save(self, directory) -> str:
        """Writes <directory>/<k>kb/{manifest.json,passages.bin} under a file lock"""
        path = os.path.join(directory, self.name)
        os.makedirs(directory, exist_ok=True)
        with filelock.FileLock(path + ".lock"):
            os.makedirs(path, exist_ok=True)
            entries = []
            start = 0
            with open(os.path.join(path, PASSAGES), "wb") as f:
                for passage in self.passages:
                    f.write(passage.data)
                    entries.append(
                        {
                            "doc_id": passage.doc_id,
                            "topic": passage.topic,
                            "offset": passage.offset,
                            "length": len(passage),
                            "start": start,
                        }
                    )
                    start += len(passage)
            manifest = {"window_kb": self.window_kb, "overlap": self.overlap, "passages": entries}
            with open(os.path.join(path, MANIFEST), "w", encoding="utf-8") as f:
                json.dump(manifest, f, indent=1)
        log.debug("saved %d passages to %s", len(self), path)
        return path


def load_store(path) -> PassageStore:
    manifest_path = os.path.join(path, MANIFEST)
    with filelock.FileLock(os.path.normpath(path) + ".lock"):
        try:
            with open(manifest_path, encoding="utf-8") as f:
                manifest = json.load(f)
            with open(os.path.join(path, PASSAGES), "rb") as f:
                blob = f.read()
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, manifest_path, e.lineno) from None
    try:
        passages = []
        for entry in manifest["passages"]:
            start = entry["start"]
            data = blob[start : start + entry["length"]]
            if len(data) != entry["length"]:
                raise ParseError(f"passage at {start} runs past the end of {PASSAGES}", path)
            passages.append(Passage(entry["doc_id"], entry["topic"], entry["offset"], data))
        return PassageStore(manifest["window_kb"], manifest["overlap"], tuple(passages))
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed manifest: {e}", manifest_path) from None


def load_stores(directory) -> List[PassageStore]:
    """Every <k>kb store below directory, smallest window first"""
    names = [
        name
        for name in os.listdir(directory)
        if name.endswith("kb") and os.path.isdir(os.path.join(directory, name))
    ]
    stores = [load_store(os.path.join(directory, name)) for name in names]
    if not stores:
        raise EmptyInputError(f"{directory}: no passage stores")
    return sorted(stores, key=lambda store: store.window_kb)


def _as_documents(docs) -> List[CorpusDocument]:
    out = []
    for doc in docs:
        if not isinstance(doc, CorpusDocument):
            doc = CorpusDocument(*doc)
        out.append(doc)
    return out


def index_corpus(
    docs: Sequence[Union[CorpusDocument, tuple]],
    max_window_kb: int = DEFAULT_MAX_WINDOW_KB,
    overlap=None,
    output_dir=None,
    workers: int = 1,
) -> List[PassageStore]:
    """One store per window size 1..max_window_kb KB, saved when output_dir is given"""
    docs = _as_documents(docs)
    if not docs:
        raise EmptyInputError("cannot index an empty corpus")
    if max_window_kb < 1:
        raise ValidationError(f"largest window {max_window_kb} KB must be at least 1 KB")

    def build(window_kb):
        o = resolve_overlap(overlap, window_kb * KB)
        passages = []
        for doc in docs:
            passages.extend(segment(doc.data, window_kb, o, doc.doc_id, doc.topic))
        return PassageStore(window_kb, o, tuple(passages))

    sizes = range(1, max_window_kb + 1)
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            stores = list(pool.map(build, sizes))
    else:
        stores = [build(k) for k in sizes]
    if output_dir is not None:
        for store in stores:
            store.save(output_dir)
    log.info("indexed %d documents into %d stores", len(docs), len(stores))
    return stores


def select_store(stores: Sequence[PassageStore], query_size: int) -> PassageStore:
    """Smallest window holding the whole query, else the largest window"""
    if not stores:
        raise ValidationError("no passage stores to search")
    ordered = sorted(stores, key=lambda store: store.window_kb)
    for store in ordered:
        if store.window_bytes >= query_size:
            return store
    return ordered[-1]


@dataclass(frozen=True)
class Hit:
    passage: Passage
    score: float


@dataclass(frozen=True)
class SearchResult:
    query_id: str
    hits: tuple
    window_kb: int = 0

    def __len__(self):
        return len(self.hits)


def query(
    stores: Sequence[PassageStore],
    backend,
    query_bytes: bytes,
    k: int,
    workers: int = 1,
    cache: Optional[LengthCache] = None,
    query_id: str = "",
) -> SearchResult:
    if not query_bytes:
        raise EmptyInputError(f"query {query_id!r} is empty")
    if k < 1:
        raise ValidationError(f"K must be at least 1, got {k}")
    store = select_store(stores, len(query_bytes))
    if cache is None:
        cache = LengthCache()

    def score(passage):
        return ncd(backend, query_bytes, passage.data, cache, f"({query_id}, {passage.doc_id})")

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, store.passages))
    else:
        scores = [score(passage) for passage in store.passages]
    ranked = sorted(
        (Hit(passage, value) for passage, value in zip(store.passages, scores)),
        key=lambda hit: (hit.score, hit.passage.doc_id, hit.passage.offset),
    )
    return SearchResult(query_id, tuple(ranked[:k]), store.window_kb)


@dataclass(frozen=True)
class PrecisionCurve:
    values: Mapping[int, float]
    queries: int = 1

    def __getitem__(self, k):
        return self.values[k]


def precision_at_k(
    result: SearchResult, relevance: Callable[[Passage], bool], ks: Iterable[int] = DEFAULT_KS
) -> PrecisionCurve:
    ks = sorted(set(ks))
    if not ks or ks[0] < 1:
        raise ValidationError("K values must be positive")
    if len(result.hits) < ks[-1]:
        raise ValidationError(
            f"query {result.query_id!r} ranked {len(result.hits)} passages, fewer than K={ks[-1]}"
        )
    relevant = [bool(relevance(hit.passage)) for hit in result.hits]
    return PrecisionCurve({k: sum(relevant[:k]) / k for k in ks})


def mean_precision(curves: Sequence[PrecisionCurve]) -> PrecisionCurve:
    """Averages per K over queries, weighting each curve by its query count"""
    if not curves:
        raise ValidationError("no precision curves to average")
    ks = sorted(curves[0].values)
    total = sum(curve.queries for curve in curves)
    values = {}
    for k in ks:
        values[k] = sum(curve.values[k] * curve.queries for curve in curves) / total
    return PrecisionCurve(values, total)


def topic_relevance(topic: str) -> Callable[[Passage], bool]:
    return lambda passage: passage.topic == topic


def precision_improvement(curves: Mapping[float, PrecisionCurve]) -> Dict[int, Optional[float]]:
    """Relative gain of the best distorted level over level 0.0, per K

    0.70 at level 0.0 and a best of 0.80 elsewhere gives 0.142...; None
    when the baseline precision is 0.
    """
    baseline = None
    for level, curve in curves.items():
        if abs(level) < 1e-9:
            baseline = curve
    if baseline is None:
        raise ValidationError("precision improvement needs the level 0.0 baseline")
    out = {}
    for k, base in baseline.values.items():
        best = max(curve.values[k] for level, curve in curves.items() if abs(level) >= 1e-9)
        out[k] = (best - base) / base if base else None
    return out


@dataclass(frozen=True)
class Query:
    query_id: str
    topic: str
    data: bytes


@dataclass(frozen=True)
class TopicCorpus:
    documents: tuple
    queries: tuple


def build_topic_corpus(directory, queries_per_topic: int, seed: int = 0) -> TopicCorpus:
    """Holds out queries_per_topic documents per topic as queries

    The rest of each topic directory is concatenated into one document
    named after the topic.
    """
    if queries_per_topic < 0:
        raise ValidationError("queries per topic cannot be negative")
    if not os.path.isdir(directory):
        raise ValidationError(f"{directory}: not a directory")
    topics = sorted(
        name
        for name in os.listdir(directory)
        if os.path.isdir(os.path.join(directory, name)) and not name.startswith(".")
    )
    if not topics:
        raise EmptyInputError(f"{directory}: no topic directories")
    documents = []
    queries = []
    for topic in topics:
        topic_dir = os.path.join(directory, topic)
        names = sorted(
            name
            for name in os.listdir(topic_dir)
            if os.path.isfile(os.path.join(topic_dir, name)) and not name.startswith(".")
        )
        if len(names) < queries_per_topic + 1:
            raise ValidationError(
                f"topic {topic!r} has {len(names)} documents, "
                f"needs at least {queries_per_topic + 1}"
            )
        held_out = set(random.Random(f"{seed}:{topic}").sample(names, queries_per_topic))
        parts = []
        for name in names:
            with open(os.path.join(topic_dir, name), "rb") as f:
                data = f.read()
            if name in held_out:
                queries.append(Query(f"{topic}/{name}", topic, data))
            else:
                parts.append(data)
        documents.append(CorpusDocument(topic, topic, b"".join(parts)))
    log.info("topic corpus: %d topics, %d queries", len(documents), len(queries))
    return TopicCorpus(tuple(documents), tuple(queries))
