"""Normalized Compression Distance and distance matrices

    NCD(x, y) = max(C(xy) - C(x), C(yx) - C(y)) / max(C(x), C(y))

where C is the compressed length under one backend and xy is the plain
concatenation.  Both concatenation orders are compressed since stream
compressors are not exactly symmetric.
"""

import concurrent.futures
import csv
import hashlib
import io
import logging
import threading
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BackendFaultError, EmptyInputError, ParseError, ValidationError
from .textops import Document

log = logging.getLogger(__name__)

SOFT_LIMIT = 1.1
HARD_LIMIT = 1.5
ASYMMETRY_LIMIT = 0.05

# ncd(x, x) ceiling for documents of 1 KB and more
SELF_DISTANCE_LIMIT = 0.1
SELF_DISTANCE_MIN_SIZE = 1024


class LengthCache:
    """Thread safe C(x) cache keyed by backend configuration and content hash"""

    def __init__(self, enabled=True):
        self.enabled = enabled
        self._lengths = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def compressed_len(self, backend, data: bytes) -> int:
        if not self.enabled:
            return backend.compressed_len(data)
        key = (backend.cache_key, hashlib.sha256(data).digest())
        with self._lock:
            value = self._lengths.get(key)
            if value is not None:
                self.hits += 1
                return value
            self.misses += 1
        # compress outside the lock; a concurrent duplicate computes the same value
        value = backend.compressed_len(data)
        with self._lock:
            self._lengths[key] = value
        return value

    def __len__(self):
        return len(self._lengths)


def _checked(value, what):
    if value < 0:
        log.warning("NCD %s is %.6f, clamping to 0", what, value)
        return 0.0
    if value >= HARD_LIMIT:
        raise BackendFaultError(f"NCD {what} is {value:.6f}, a backend cannot produce that")
    if value > SOFT_LIMIT:
        log.warning("NCD %s is %.6f, above %.1f", what, value, SOFT_LIMIT)
    return value


def ncd(backend, x: bytes, y: bytes, cache: Optional[LengthCache] = None, what=None) -> float:
    what = what or "value"
    if not x or not y:
        raise EmptyInputError(f"NCD {what} needs two non-empty inputs")
    x = bytes(x)
    y = bytes(y)
    if cache is None:
        cache = LengthCache(enabled=False)
    cx = cache.compressed_len(backend, x)
    cy = cache.compressed_len(backend, y)
    cxy = cache.compressed_len(backend, x + y)
    cyx = cache.compressed_len(backend, y + x)
    value = max(cxy - cx, cyx - cy) / max(cx, cy)
    return _checked(value, what)


@dataclass
class NcdMatrix:
    labels: Tuple[str, ...]
    values: np.ndarray
    backend_name: str = ""

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.labels)
        if self.values.shape != (n, n):
            raise ValidationError(f"{n} labels but a {self.values.shape} matrix")
        if len(set(self.labels)) != n:
            raise ValidationError("matrix labels are not unique")

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, pair):
        a, b = pair
        return float(self.values[self.index(a), self.index(b)])

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown document {label!r}") from None

    @property
    def asymmetry(self) -> float:
        """max |m[i][j] - m[j][i]|"""
        if not len(self):
            return 0.0
        return float(np.max(np.abs(self.values - self.values.T)))

    def nearest(self, label) -> str:
        """The closest other document along label's row"""
        i = self.index(label)
        row = self.values[i].copy()
        row[i] = np.inf
        return self.labels[int(np.argmin(row))]

    def check(self):
        """Rejects NaN and values outside [0, 1.5)"""
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("matrix holds NaN or infinite values")
        if np.any(self.values < 0) or np.any(self.values >= HARD_LIMIT):
            raise ValidationError(f"matrix values must lie in [0, {HARD_LIMIT})")
        return self

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("id",) + self.labels)
        for label, row in zip(self.labels, self.values):
            writer.writerow((label,) + tuple(f"{v:.6f}" for v in row))
        return out.getvalue()

    def to_square(self) -> str:
        """The square text format: n, then one 'id v1 ... vn' line per row"""
        for label in self.labels:
            if not label or any(c.isspace() for c in label):
                raise ValidationError(f"label {label!r} cannot be written in square format")
        lines = [str(len(self))]
        for label, row in zip(self.labels, self.values):
            lines.append(" ".join([label] + [f"{v:.6f}" for v in row]))
        return "\n".join(lines) + "\n"

    def write(self, path):
        text = self.to_csv() if str(path).endswith(".csv") else self.to_square()
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def parse_csv_matrix(text: str, path=None) -> NcdMatrix:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row]
    if not rows or rows[0][:1] != ["id"]:
        raise ParseError("expected a header row starting with 'id'", path, 1)
    labels = rows[0][1:]
    if len(rows) - 1 != len(labels):
        raise ParseError(f"{len(labels)} columns but {len(rows) - 1} rows", path)
    values = np.zeros((len(labels), len(labels)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(labels) + 1 or row[0] != labels[i]:
            raise ParseError(f"row for {labels[i]!r} expected", path, i + 2)
        try:
            values[i] = [float(v) for v in row[1:]]
        except ValueError as e:
            raise ParseError(str(e), path, i + 2) from None
    return NcdMatrix(labels, values)


def parse_square_matrix(text: str, path=None) -> NcdMatrix:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ParseError("empty matrix file", path)
    try:
        n = int(lines[0])
    except ValueError:
        raise ParseError(f"expected the matrix size, got {lines[0]!r}", path, 1) from None
    if len(lines) != n + 1:
        raise ParseError(f"expected {n} rows, found {len(lines) - 1}", path)
    labels = []
    values = np.zeros((n, n))
    for i, line in enumerate(lines[1:]):
        fields = line.split()
        if len(fields) != n + 1:
            raise ParseError(f"expected an id and {n} values", path, i + 2)
        labels.append(fields[0])
        try:
            values[i] = [float(v) for v in fields[1:]]
        except ValueError as e:
            raise ParseError(str(e), path, i + 2) from None
    return NcdMatrix(labels, values)


def read_matrix(path) -> NcdMatrix:
    """Reads either format, chosen by the .csv extension"""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    if str(path).endswith(".csv"):
        return parse_csv_matrix(text, path)
    return parse_square_matrix(text, path)


DocumentLike = Union[Document, Tuple[str, bytes]]


def _as_pairs(docs: Sequence[DocumentLike]) -> List[Tuple[str, bytes]]:
    pairs = []
    for doc in docs:
        if isinstance(doc, Document):
            pairs.append((doc.doc_id, doc.data))
        else:
            doc_id, data = doc
            pairs.append((doc_id, bytes(data)))
    return pairs


def _map(fn, items, workers):
    """Maps fn over items, results in input order whatever the completion order"""
    if workers <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def ncd_matrix(
    backend,
    docs: Sequence[DocumentLike],
    workers: int = 1,
    cache: Optional[LengthCache] = None,
) -> NcdMatrix:
    """Distance matrix over docs, diagonal included

    C(x) of every document is computed once up front and shared through
    the cache by all cells of its row and column.
    """
    pairs = _as_pairs(docs)
    if len(pairs) < 2:
        raise ValidationError(f"a matrix needs at least 2 documents, got {len(pairs)}")
    labels = [doc_id for doc_id, _ in pairs]
    if len(set(labels)) != len(labels):
        raise ValidationError("document ids are not unique")
    for doc_id, data in pairs:
        if not data:
            raise EmptyInputError(f"document {doc_id!r} is empty")
    if cache is None:
        cache = LengthCache()

    _map(lambda pair: cache.compressed_len(backend, pair[1]), pairs, workers)

    n = len(pairs)
    cells = [(i, j) for i in range(n) for j in range(n)]

    def cell(ij):
        i, j = ij
        return ncd(backend, pairs[i][1], pairs[j][1], cache, f"({labels[i]}, {labels[j]})")

    values = np.zeros((n, n))
    for (i, j), value in zip(cells, _map(cell, cells, workers)):
        values[i, j] = value

    matrix = NcdMatrix(labels, values, backend.name)
    if matrix.asymmetry > ASYMMETRY_LIMIT:
        log.warning(
            "%s matrix asymmetry %.4f exceeds %.2f", backend.name, matrix.asymmetry, ASYMMETRY_LIMIT
        )
    log.debug("%s matrix over %d documents, cache holds %d lengths", backend.name, n, len(cache))
    return matrix


def self_distance_report(
    backend, docs: Sequence[DocumentLike], cache=None, ceiling: float = SELF_DISTANCE_LIMIT
):
    """Returns [(doc_id, ncd(x, x))] and logs documents of 1 KB and more above ceiling

    Only the windowed lz backend stays under the default ceiling.  The bw
    and ppm backends code the repeated copy at about one bit per byte.
    """
    report = []
    for doc_id, data in _as_pairs(docs):
        value = ncd(backend, data, data, cache, f"({doc_id}, {doc_id})")
        if len(data) >= SELF_DISTANCE_MIN_SIZE and value > ceiling:
            log.warning(
                "%s self-distance of %s is %.4f, above %.2f", backend.name, doc_id, value, ceiling
            )
        report.append((doc_id, value))
    return report
