"""Text normalization and the word-removal distortions

A document is normalized to lowercase ASCII letters and spaces, then
split into alternating Word and Separator tokens.  Distortion replaces
every character of the words in a removal set, either with '*' or with
seeded random printable characters, which keeps the document length.
Removal sets are prefixes of a frequency ordering of the vocabulary
(most frequent, least frequent or random order) whose cumulative
relative frequency first reaches the requested level.
"""

import enum
import logging
import math
import os
import random
import re
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import DecodeError, EmptyInputError, LevelError, ParseError, ValidationError

log = logging.getLogger(__name__)

LEVELS = tuple(i / 10 for i in range(11))
ASTERISK = "*"
RANDOM_CHARSET = "".join(chr(c) for c in range(33, 127) if chr(c) != ASTERISK)

_NON_ALPHA = re.compile(r"[^a-zA-Z]")
_TOKEN = re.compile(r"[a-z]+| +")


class Selection(str, enum.Enum):
    MFW = "mfw"
    LFW = "lfw"
    RW = "rw"


class Substitution(str, enum.Enum):
    ASTERISK = "asterisk"
    RANDOM = "random"


class Shuffle(str, enum.Enum):
    NONE = "none"
    ASTERISKS = "asterisks"
    WORDS = "words"
    ALL = "all"


def parse_choice(cls, value):
    """Converts a name such as "mfw" into the member of the enum cls"""
    if isinstance(value, cls):
        return value
    try:
        return cls(str(value).lower())
    except ValueError:
        choices = ", ".join(member.value for member in cls)
        raise ValidationError(
            f"unknown {cls.__name__.lower()} {value!r}, expected one of {choices}"
        ) from None


def level_tenths(level) -> int:
    """Returns level * 10 as an int, rejecting anything off the 0.1 grid"""
    try:
        scaled = float(level) * 10
    except (TypeError, ValueError):
        raise LevelError(f"level {level!r} is not a number") from None
    tenths = round(scaled)
    if abs(scaled - tenths) > 1e-6 or not 0 <= tenths <= 10:
        raise LevelError(f"level {level} is not one of 0.0, 0.1, ..., 1.0")
    return tenths


def check_level(level) -> float:
    return level_tenths(level) / 10


@dataclass(frozen=True)
class Word:
    text: str


@dataclass(frozen=True)
class Separator:
    text: str


Token = Union[Word, Separator]


@dataclass(frozen=True)
class TokenStream:
    tokens: Tuple[Token, ...] = ()

    @property
    def text(self) -> str:
        return "".join(token.text for token in self.tokens)

    @property
    def words(self) -> List[str]:
        return [token.text for token in self.tokens if isinstance(token, Word)]

    def __len__(self):
        return len(self.tokens)


def normalize_text(raw: Union[bytes, str], errors: str = "replace") -> str:
    """Lowercases raw and turns every character that is not a-z into a space

    Bytes are decoded as UTF-8.  With errors="replace" invalid sequences
    become replacement characters (and therefore spaces); with
    errors="strict" they raise DecodeError naming the byte offset.
    """
    if isinstance(raw, (bytes, bytearray)):
        if errors == "strict":
            try:
                text = bytes(raw).decode("utf-8")
            except UnicodeDecodeError as e:
                raise DecodeError("invalid UTF-8 sequence", e.start) from None
        elif errors == "replace":
            text = bytes(raw).decode("utf-8", "replace")
        else:
            raise ValidationError(f"unknown decoding policy {errors!r}")
    else:
        text = raw
    return _NON_ALPHA.sub(" ", text).lower()


def normalize_and_tokenize(raw: Union[bytes, str], errors: str = "replace") -> TokenStream:
    text = normalize_text(raw, errors)
    tokens = tuple(
        Word(m.group()) if m.group()[0] != " " else Separator(m.group())
        for m in _TOKEN.finditer(text)
    )
    return TokenStream(tokens)


@dataclass(frozen=True)
class FrequencyTable:
    """Corpus word counts with both frequency orderings precomputed"""

    entries: Mapping[str, int]
    total: int
    decreasing: Tuple[str, ...] = field(repr=False)
    increasing: Tuple[str, ...] = field(repr=False)

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "FrequencyTable":
        entries = {}
        for word, count in counts.items():
            if count < 0:
                raise ValidationError(f"negative count {count} for {word!r}")
            entries[word] = entries.get(word, 0) + count
        total = sum(entries.values())
        if total == 0:
            raise EmptyInputError("frequency table has no counts")
        decreasing = tuple(sorted(entries, key=lambda w: (-entries[w], w)))
        increasing = tuple(sorted(entries, key=lambda w: (entries[w], w)))
        return cls(entries, total, decreasing, increasing)

    def __contains__(self, word):
        return word in self.entries

    def __len__(self):
        return len(self.entries)

    def relative(self, word: str) -> float:
        return self.entries.get(word, 0) / self.total

    def ordering(self, method: Selection, seed: int = 0) -> Sequence[str]:
        method = parse_choice(Selection, method)
        if method is Selection.MFW:
            return self.decreasing
        if method is Selection.LFW:
            return self.increasing
        # one permutation per seed, so every level takes a prefix of it
        words = sorted(self.entries)
        random.Random(seed).shuffle(words)
        return words


def load_frequency_table(path) -> FrequencyTable:
    """Reads a word<TAB>count list; '#' lines and blank lines are ignored"""
    counts: Dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0]:
                raise ParseError("expected word<TAB>count", path, number)
            word, count_text = fields
            try:
                count = int(count_text)
            except ValueError:
                raise ParseError(f"count {count_text!r} is not an integer", path, number) from None
            if count < 0:
                raise ParseError(f"negative count {count}", path, number)
            word = word.strip().lower()
            counts[word] = counts.get(word, 0) + count
    if not counts or not sum(counts.values()):
        raise EmptyInputError(f"{path}: frequency table has no counts")
    table = FrequencyTable.from_counts(counts)
    log.debug("loaded %d words, %d tokens from %s", len(table), table.total, path)
    return table


@dataclass(frozen=True)
class RemovalSet:
    method: Selection
    level: float
    words: FrozenSet[str]
    seed: int = 0
    cumulative_frequency: float = 0.0

    def __contains__(self, word):
        return word in self.words

    def __len__(self):
        return len(self.words)


def build_removal_set(
    table: FrequencyTable, method: Selection, level: float, seed: int = 0
) -> RemovalSet:
    """Shortest prefix of the method's ordering reaching the level

    The comparison is done on integers so that level 0.1 with a total of
    100 includes exactly the words needed for 10 occurrences.
    """
    method = parse_choice(Selection, method)
    tenths = level_tenths(level)
    if not table.total:
        raise EmptyInputError("frequency table has no counts")
    ordering = table.ordering(method, seed)
    if tenths == 10:
        return RemovalSet(method, 1.0, frozenset(ordering), seed, 1.0)

    words = []
    cumulative = 0
    if tenths:
        for word in ordering:
            words.append(word)
            cumulative += table.entries[word]
            if 10 * cumulative >= tenths * table.total:
                break
    return RemovalSet(method, tenths / 10, frozenset(words), seed, cumulative / table.total)


@dataclass(frozen=True)
class RemovalStats:
    level: float
    words: int
    cumulative_frequency: float


def removal_statistics(
    table: FrequencyTable, method: Selection, levels: Iterable[float] = LEVELS, seed: int = 0
) -> List[RemovalStats]:
    """Size and achieved cumulative frequency of the removal set per level"""
    stats = []
    for level in levels:
        removal = build_removal_set(table, method, level, seed)
        stats.append(RemovalStats(removal.level, len(removal), removal.cumulative_frequency))
    return stats


@dataclass(frozen=True)
class DistortionSpec:
    selection: Selection
    substitution: Substitution
    shuffle: Shuffle = Shuffle.NONE
    level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "selection", parse_choice(Selection, self.selection))
        object.__setattr__(self, "substitution", parse_choice(Substitution, self.substitution))
        object.__setattr__(self, "shuffle", parse_choice(Shuffle, self.shuffle))
        object.__setattr__(self, "level", check_level(self.level))
        if self.shuffle is not Shuffle.NONE and self.substitution is not Substitution.ASTERISK:
            raise ValidationError(
                f"shuffle {self.shuffle.value} needs asterisk substitution, "
                f"not {self.substitution.value}"
            )

    @property
    def suffix(self) -> str:
        """File name suffix, e.g. ".mfw.0.3.asterisk.words.txt" """
        parts = [self.selection.value, f"{self.level:.1f}", self.substitution.value]
        if self.shuffle is not Shuffle.NONE:
            parts.append(self.shuffle.value)
        return "." + ".".join(parts) + ".txt"


@dataclass(frozen=True)
class DistortedDocument:
    doc_id: str
    text: str
    words_total: int
    words_replaced: int
    substitution: Substitution = Substitution.ASTERISK
    shuffle: Shuffle = Shuffle.NONE

    @property
    def data(self) -> bytes:
        return self.text.encode("ascii")


def distort(
    doc: TokenStream,
    removal: RemovalSet,
    substitution: Substitution = Substitution.ASTERISK,
    seed: int = 0,
    doc_id: str = "",
) -> DistortedDocument:
    substitution = parse_choice(Substitution, substitution)
    rng = random.Random(f"{seed}:{doc_id}") if substitution is Substitution.RANDOM else None
    parts = []
    total = 0
    replaced = 0
    for token in doc.tokens:
        if not isinstance(token, Word):
            parts.append(token.text)
            continue
        total += 1
        if token.text not in removal.words:
            parts.append(token.text)
            continue
        replaced += 1
        if rng is None:
            parts.append(ASTERISK * len(token.text))
        else:
            parts.append("".join(rng.choice(RANDOM_CHARSET) for _ in token.text))
    return DistortedDocument(doc_id, "".join(parts), total, replaced, substitution)


def _is_asterisks(token):
    return not token.strip(ASTERISK)


def shuffle_variant(doc: DistortedDocument, mode: Shuffle, seed: int = 0) -> DistortedDocument:
    """Reorders the space separated tokens of an asterisk-distorted document

    Each run of asterisks is one token.  ASTERISKS permutes those tokens
    among their own positions, WORDS permutes the remaining words among
    theirs, ALL permutes every token over every position.  The result is
    re-joined with single spaces.
    """
    mode = parse_choice(Shuffle, mode)
    if mode is Shuffle.NONE:
        return doc
    if doc.substitution is not Substitution.ASTERISK:
        raise ValidationError(f"{doc.doc_id}: shuffling needs an asterisk-distorted document")

    tokens = doc.text.split()
    rng = random.Random(f"{seed}:{doc.doc_id}:{mode.value}")
    if mode is Shuffle.ALL:
        slots = list(range(len(tokens)))
    elif mode is Shuffle.ASTERISKS:
        slots = [i for i, token in enumerate(tokens) if _is_asterisks(token)]
    else:
        slots = [i for i, token in enumerate(tokens) if not _is_asterisks(token)]
    values = [tokens[i] for i in slots]
    rng.shuffle(values)
    for i, value in zip(slots, values):
        tokens[i] = value
    return replace(doc, text=" ".join(tokens), shuffle=mode)


def percentage_substituted(doc: DistortedDocument) -> float:
    if doc.words_total == 0:
        raise ValidationError(f"{doc.doc_id}: no words, substituted fraction is undefined")
    return doc.words_replaced / doc.words_total


def distort_document(
    doc_id: str,
    raw: Union[bytes, str],
    table: FrequencyTable,
    spec: DistortionSpec,
    removal: Optional[RemovalSet] = None,
    repeat: int = 0,
) -> DistortedDocument:
    """Runs the whole chain: normalize, substitute, then shuffle

    repeat only varies the shuffle seed, so repeated shuffles of one
    distortion share their substituted text.
    """
    if removal is None:
        removal = build_removal_set(table, spec.selection, spec.level, spec.seed)
    distorted = distort(normalize_and_tokenize(raw), removal, spec.substitution, spec.seed, doc_id)
    return shuffle_variant(distorted, spec.shuffle, spec.seed + repeat)


@dataclass(frozen=True)
class RemovalMap:
    """One pixel per word, row-major: 1 for a remaining word, 0 for a substituted one"""

    width: int
    pixels: Tuple[int, ...]

    @property
    def height(self) -> int:
        return -(-len(self.pixels) // self.width)

    @property
    def rows(self) -> List[Tuple[int, ...]]:
        padded = self.pixels + (0,) * (self.height * self.width - len(self.pixels))
        return [padded[i : i + self.width] for i in range(0, len(padded), self.width)]

    def to_pbm(self) -> str:
        """Plain PBM (P1); 1 is black.  The last row is padded with white."""
        lines = ["P1", f"{self.width} {self.height}"]
        lines.extend(" ".join(str(bit) for bit in row) for row in self.rows)
        return "\n".join(lines) + "\n"


def emit_removal_map(doc: TokenStream, removal: RemovalSet, width: int) -> RemovalMap:
    if width < 1:
        raise ValidationError(f"map width {width} must be at least 1")
    pixels = tuple(0 if word in removal.words else 1 for word in doc.words)
    return RemovalMap(width, pixels)


def entropy(probs: Sequence[float]) -> float:
    """Shannon entropy in bits; zero probabilities contribute nothing"""
    if not probs:
        raise ValidationError("entropy of an empty distribution")
    for p in probs:
        if p < 0 or math.isnan(p):
            raise ValidationError(f"probability {p} is negative")
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"probabilities sum to {total}, not 1")
    return max(0.0, -math.fsum(p * math.log2(p) for p in probs if p > 0))


def complexity_estimate(backend, data: Union[bytes, str, DistortedDocument]) -> int:
    """Upper bound on the complexity of data: its compressed length in bytes"""
    if isinstance(data, DistortedDocument):
        data = data.data
    elif isinstance(data, str):
        data = data.encode("utf-8")
    return backend.compressed_len(data)


@dataclass(frozen=True)
class Document:
    doc_id: str
    data: bytes


def read_corpus(directory, suffixes: Optional[Sequence[str]] = None) -> List[Document]:
    """Every regular file below directory, ids being posix relative paths

    Hidden files are skipped.  Documents come back sorted by id.
    """
    if not os.path.isdir(directory):
        raise ValidationError(f"{directory}: not a directory")
    docs = []
    for root, dirs, files in os.walk(directory):
        dirs[:] = sorted(d for d in dirs if not d.startswith("."))
        for name in files:
            if name.startswith("."):
                continue
            if suffixes and not name.endswith(tuple(suffixes)):
                continue
            path = os.path.join(root, name)
            doc_id = os.path.relpath(path, directory).replace(os.sep, "/")
            with open(path, "rb") as f:
                docs.append(Document(doc_id, f.read()))
    docs.sort(key=lambda doc: doc.doc_id)
    if not docs:
        raise EmptyInputError(f"{directory}: no documents")
    return docs


def write_distorted(output_dir, doc_id: str, doc: DistortedDocument, spec: DistortionSpec) -> str:
    """Writes doc below output_dir, mirroring doc_id's path, and returns the path"""
    stem, _ = os.path.splitext(doc_id)
    path = os.path.join(output_dir, *stem.split("/")) + spec.suffix
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="ascii", newline="") as f:
        f.write(doc.text)
    return path
