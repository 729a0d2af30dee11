"""Lossless backends with self-describing streams

Every stream starts with a 4-byte magic (three letters and a format
version) followed by the original length, so a stream handed to the
wrong backend or cut short is rejected before any decoding happens.
"""

import abc
import json
import logging
import struct
from collections import Counter
from dataclasses import asdict, dataclass
from typing import ClassVar, Dict, Type

from ..errors import CorruptStreamError, ValidationError
from . import huffman
from .bitio import BitReader, BitWriter
from .bwt import DEFAULT_BLOCK_SIZE, BwtBlock, bwt_forward, bwt_inverse
from .lz77 import (
    DEFAULT_LOOKAHEAD_SIZE,
    DEFAULT_MAX_CHAIN,
    DEFAULT_SEARCH_SIZE,
    Lz77Token,
    lz77_decode,
    lz77_encode,
)
from .mtf import mtf_decode, mtf_encode
from .ppm import DEFAULT_ORDER, MAX_ORDER, MIN_ORDER, ppm_decode, ppm_encode, ppm_estimate_len
from .rle import rle_decode, rle_encode

log = logging.getLogger(__name__)

LZ_HEADER = struct.Struct(">4sIIHI")
BW_HEADER = struct.Struct(">4sIII")
PPM_HEADER = struct.Struct(">4sIB")
BYTE_ALPHABET = 256


class Backend(abc.ABC):
    name: ClassVar[str]

    @abc.abstractmethod
    def compress(self, data: bytes) -> bytes:
        ...

    @abc.abstractmethod
    def decompress(self, stream: bytes) -> bytes:
        ...

    def compressed_len(self, data: bytes) -> int:
        """Length in bytes of compress(data), header included"""
        return len(self.compress(data))

    @property
    def options(self) -> Dict[str, int]:
        return asdict(self)

    @property
    def cache_key(self) -> str:
        """Identifies the backend together with every option that changes its output"""
        return f"{self.name}:{json.dumps(self.options, sort_keys=True)}"

    def _unpack_header(self, layout: struct.Struct, stream: bytes, magic: bytes):
        if len(stream) < layout.size:
            raise CorruptStreamError(
                f"{self.name} stream of {len(stream)} bytes is shorter than its header"
            )
        fields = layout.unpack_from(stream)
        if fields[0] != magic:
            raise CorruptStreamError(f"not a {self.name} stream (magic {fields[0]!r})")
        return fields[1:]


REPEAT_BUCKET = 0


def _offset_buckets(tokens):
    """Yields the bucket of every match, REPEAT_BUCKET for the previous offset"""
    last = 0
    for token in tokens:
        if not token.length:
            continue
        yield REPEAT_BUCKET if token.offset == last else token.offset.bit_length()
        last = token.offset


def _table_decoder(reader, alphabet_size):
    return huffman.PrefixDecoder(huffman.canonical_codes(huffman.read_table(reader, alphabet_size)))


@dataclass(frozen=True)
class LzBackend(Backend):
    """LZ77 tokens with a Huffman code each for lengths, offsets and literals

    Offsets are coded as their bit length followed by the bits below the
    leading one.  Bucket 0 repeats the offset of the previous match, which
    makes a long repeat cost a few bits per look-ahead buffer.
    """

    name: ClassVar[str] = "lz"
    MAGIC: ClassVar[bytes] = b"LZH\x02"

    search_size: int = DEFAULT_SEARCH_SIZE
    lookahead_size: int = DEFAULT_LOOKAHEAD_SIZE
    max_chain: int = DEFAULT_MAX_CHAIN

    def __post_init__(self):
        if not 1 <= self.search_size < 1 << 32:
            raise ValidationError(f"search_size {self.search_size} out of range")
        if not 1 <= self.lookahead_size < 1 << 16:
            raise ValidationError(f"lookahead_size {self.lookahead_size} out of range")
        if self.max_chain < 1:
            raise ValidationError("max_chain must be positive")

    def compress(self, data: bytes) -> bytes:
        data = bytes(data)
        tokens = lz77_encode(data, self.search_size, self.lookahead_size, self.max_chain)
        lengths = huffman.code_lengths(Counter(t.length for t in tokens))
        match_buckets = list(_offset_buckets(tokens))
        buckets = huffman.code_lengths(Counter(match_buckets))
        literals = huffman.code_lengths(Counter(t.next_symbol for t in tokens))

        writer = BitWriter()
        huffman.write_table(writer, lengths, self.lookahead_size + 1)
        huffman.write_table(writer, buckets, self.search_size.bit_length() + 1)
        huffman.write_table(writer, literals, BYTE_ALPHABET)
        length_codes = huffman.canonical_codes(lengths)
        bucket_codes = huffman.canonical_codes(buckets)
        literal_codes = huffman.canonical_codes(literals)
        match_buckets = iter(match_buckets)
        for token in tokens:
            writer.write_bits(length_codes[token.length])
            if token.length:
                bucket = next(match_buckets)
                writer.write_bits(bucket_codes[bucket])
                if bucket != REPEAT_BUCKET:
                    writer.write(token.offset - (1 << (bucket - 1)), bucket - 1)
            writer.write_bits(literal_codes[token.next_symbol])

        header = LZ_HEADER.pack(
            self.MAGIC, len(data), self.search_size, self.lookahead_size, len(tokens)
        )
        return header + writer.getvalue()

    def decompress(self, stream: bytes) -> bytes:
        original, search_size, lookahead_size, count = self._unpack_header(
            LZ_HEADER, stream, self.MAGIC
        )
        reader = BitReader(stream, LZ_HEADER.size)
        length_codes = _table_decoder(reader, lookahead_size + 1)
        bucket_codes = _table_decoder(reader, search_size.bit_length() + 1)
        literal_codes = _table_decoder(reader, BYTE_ALPHABET)

        tokens = []
        last = 0
        for _ in range(count):
            length = length_codes.read(reader)
            offset = 0
            if length:
                bucket = bucket_codes.read(reader)
                if bucket != REPEAT_BUCKET:
                    offset = (1 << (bucket - 1)) | reader.read(bucket - 1)
                elif last:
                    offset = last
                else:
                    raise CorruptStreamError("repeated offset before the first match")
                last = offset
            symbol = literal_codes.read(reader)
            tokens.append(Lz77Token(offset, length, symbol))
        data = lz77_decode(tokens)
        if len(data) != original:
            raise CorruptStreamError(f"decoded {len(data)} bytes, header says {original}")
        return data


@dataclass(frozen=True)
class BwBackend(Backend):
    """Block-sorting pipeline: BWT, move-to-front, run-length, Huffman"""

    name: ClassVar[str] = "bw"
    MAGIC: ClassVar[bytes] = b"BWH\x01"

    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if not 1 <= self.block_size < 1 << 32:
            raise ValidationError(f"block_size {self.block_size} out of range")

    def compress(self, data: bytes) -> bytes:
        data = bytes(data)
        writer = BitWriter()
        blocks = 0
        for start in range(0, len(data), self.block_size):
            block = bwt_forward(data[start : start + self.block_size], self.block_size)
            packed = rle_encode(bytes(mtf_encode(block.transformed)))
            lengths = huffman.code_lengths(Counter(packed))
            writer.write(block.primary_index, 32)
            writer.write(len(packed), 32)
            huffman.write_table(writer, lengths, BYTE_ALPHABET)
            huffman.encode_symbols(writer, packed, huffman.canonical_codes(lengths))
            blocks += 1
        header = BW_HEADER.pack(self.MAGIC, len(data), self.block_size, blocks)
        return header + writer.getvalue()

    def decompress(self, stream: bytes) -> bytes:
        original, block_size, blocks = self._unpack_header(BW_HEADER, stream, self.MAGIC)
        reader = BitReader(stream, BW_HEADER.size)
        out = bytearray()
        for _ in range(blocks):
            primary = reader.read(32)
            count = reader.read(32)
            codes = huffman.canonical_codes(huffman.read_table(reader, BYTE_ALPHABET))
            packed = bytes(huffman.decode_symbols(reader, count, codes))
            transformed = bytes(mtf_decode(rle_decode(packed)))
            if len(transformed) > block_size:
                raise CorruptStreamError(f"block of {len(transformed)} bytes exceeds {block_size}")
            out += bwt_inverse(BwtBlock(transformed, primary))
        if len(out) != original:
            raise CorruptStreamError(f"decoded {len(out)} bytes, header says {original}")
        return bytes(out)


@dataclass(frozen=True)
class PpmBackend(Backend):
    """Order-k PPM with method C escapes driving an arithmetic coder"""

    name: ClassVar[str] = "ppm"
    MAGIC: ClassVar[bytes] = b"PPC\x01"

    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if not MIN_ORDER <= self.order <= MAX_ORDER:
            raise ValidationError(f"PPM order {self.order} outside [{MIN_ORDER}, {MAX_ORDER}]")

    def compress(self, data: bytes) -> bytes:
        data = bytes(data)
        return PPM_HEADER.pack(self.MAGIC, len(data), self.order) + ppm_encode(data, self.order)

    def decompress(self, stream: bytes) -> bytes:
        original, order = self._unpack_header(PPM_HEADER, stream, self.MAGIC)
        if order > MAX_ORDER:
            raise CorruptStreamError(f"PPM order {order} in header is unsupported")
        return ppm_decode(stream[PPM_HEADER.size :], original, order)

    def estimate_bits(self, data: bytes) -> float:
        """Ideal code length of data in bits, without running the coder"""
        return ppm_estimate_len(data, self.order)


BACKENDS: Dict[str, Type[Backend]] = {
    LzBackend.name: LzBackend,
    BwBackend.name: BwBackend,
    PpmBackend.name: PpmBackend,
}


def get_backend(name: str, **options) -> Backend:
    """Instantiates the backend registered under name with its options"""
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise ValidationError(
            f"unknown backend {name!r}, expected one of {', '.join(sorted(BACKENDS))}"
        ) from None
    try:
        backend = cls(**options)
    except TypeError as e:
        raise ValidationError(f"bad options for backend {name!r}: {e}") from e
    log.debug("using backend %s", backend.cache_key)
    return backend
