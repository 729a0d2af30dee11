"""Static Huffman coding

huffman_build merges the two lightest nodes until one tree remains.
Nodes of equal weight are ordered by their creation sequence number, so
the same frequency map always yields the same tree.  The pipelines only
transmit code lengths and rebuild canonical codewords on both sides.
"""

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Dict, Hashable, Mapping, Optional

from ..errors import CorruptStreamError, EmptyInputError

LENGTH_FIELD_BITS = 6
MAX_CODE_LENGTH = (1 << LENGTH_FIELD_BITS) - 1


@dataclass(frozen=True)
class HuffmanNode:
    weight: int
    symbol: Optional[Hashable] = None
    left: Optional["HuffmanNode"] = None
    right: Optional["HuffmanNode"] = None

    @property
    def is_leaf(self):
        return self.left is None and self.right is None


@dataclass(frozen=True)
class HuffmanCode:
    codes: Dict[Hashable, str]
    tree: HuffmanNode = field(repr=False)

    @property
    def lengths(self):
        return {symbol: len(code) for symbol, code in self.codes.items()}

    def weighted_length(self, freqs):
        return sum(freqs[symbol] * len(code) for symbol, code in self.codes.items())

    def kraft_sum(self):
        return sum(2.0 ** -len(code) for code in self.codes.values())


def huffman_build(freqs: Mapping[Hashable, int]) -> HuffmanCode:
    """huffman_build returns an optimal prefix code for freqs

    Symbols with a zero count get no codeword.  A single symbol gets the
    codeword "0".
    """
    present = [(symbol, count) for symbol, count in freqs.items() if count > 0]
    if not present:
        raise EmptyInputError("cannot build a Huffman code without symbols")

    sequence = itertools.count()
    heap = []
    for symbol, count in present:
        heapq.heappush(heap, (count, next(sequence), HuffmanNode(count, symbol)))

    if len(heap) == 1:
        _, _, leaf = heap[0]
        return HuffmanCode({leaf.symbol: "0"}, HuffmanNode(leaf.weight, left=leaf))

    while len(heap) > 1:
        w1, _, n1 = heapq.heappop(heap)
        w2, _, n2 = heapq.heappop(heap)
        parent = HuffmanNode(w1 + w2, left=n1, right=n2)
        heapq.heappush(heap, (parent.weight, next(sequence), parent))

    root = heap[0][2]
    codes = {}
    stack = [(root, "")]
    while stack:
        node, prefix = stack.pop()
        if node.is_leaf:
            codes[node.symbol] = prefix
            continue
        stack.append((node.right, prefix + "1"))
        stack.append((node.left, prefix + "0"))
    return HuffmanCode(codes, root)


def code_lengths(freqs):
    """Returns {symbol: codeword length}, empty when nothing occurs"""
    if not any(count > 0 for count in freqs.values()):
        return {}
    lengths = huffman_build(freqs).lengths
    if max(lengths.values()) > MAX_CODE_LENGTH:
        raise ValueError("Huffman code too deep for the table format")
    return lengths


def canonical_codes(lengths: Mapping[int, int]) -> Dict[int, str]:
    """Assigns canonical codewords from lengths, ordered by (length, symbol)"""
    codes = {}
    code = 0
    previous = 0
    for symbol, length in sorted(lengths.items(), key=lambda item: (item[1], item[0])):
        code <<= length - previous
        codes[symbol] = format(code, f"0{length}b")
        code += 1
        previous = length
    return codes


def write_table(writer, lengths, alphabet_size):
    """Writes a presence bitmap over the alphabet, then one length per symbol"""
    for symbol in range(alphabet_size):
        writer.write(1 if symbol in lengths else 0, 1)
    for symbol in sorted(lengths):
        writer.write(lengths[symbol], LENGTH_FIELD_BITS)


def read_table(reader, alphabet_size):
    present = [symbol for symbol in range(alphabet_size) if reader.read(1)]
    lengths = {}
    for symbol in present:
        length = reader.read(LENGTH_FIELD_BITS)
        if length == 0:
            raise CorruptStreamError(f"zero code length for symbol {symbol}")
        lengths[symbol] = length
    if lengths and sum(2.0 ** -length for length in lengths.values()) > 1.0:
        raise CorruptStreamError("code lengths violate the Kraft inequality")
    return lengths


def encode_symbols(writer, symbols, codes):
    writer.write_bits("".join([codes[symbol] for symbol in symbols]))


class PrefixDecoder:
    """Reads symbols of a prefix code straight off a BitReader"""

    def __init__(self, codes):
        self.lookup = {code: symbol for symbol, code in codes.items()}
        self.longest = max((len(code) for code in codes.values()), default=0)

    def read(self, reader):
        if not self.lookup:
            raise CorruptStreamError("symbols present but the code table is empty")
        bits = reader.bits
        pos = reader.pos
        end = pos + 1
        while True:
            symbol = self.lookup.get(bits[pos:end])
            if symbol is not None:
                reader.pos = end
                return symbol
            end += 1
            if end - pos > self.longest or end > len(bits):
                raise CorruptStreamError(f"invalid Huffman codeword at bit {pos}")

    def read_many(self, reader, count):
        read = self.read
        return [read(reader) for _ in range(count)]


def decode_symbols(reader, count, codes):
    """Reads count symbols coded with codes (symbol -> bit string)"""
    if count == 0:
        return []
    return PrefixDecoder(codes).read_many(reader, count)
