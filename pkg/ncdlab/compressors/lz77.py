"""LZ77 sliding-window tokenizer

The encoder looks for the longest match of the look-ahead buffer in the
search buffer.  When several candidates reach the same length the one
farthest from the cursor wins, the last one met while scanning the
search buffer backwards.  Every token carries the symbol following the
match, so a match never swallows the final byte of the input.
"""

import bisect
from collections import defaultdict
from typing import List, NamedTuple, Sequence

from ..errors import CorruptStreamError, ValidationError

DEFAULT_SEARCH_SIZE = 32 * 1024
DEFAULT_LOOKAHEAD_SIZE = 64
DEFAULT_MAX_CHAIN = 1024


class Lz77Token(NamedTuple):
    offset: int
    length: int
    next_symbol: int


def _farthest_in_window(positions, low):
    index = bisect.bisect_left(positions, low)
    if index < len(positions):
        return positions[index]
    return None


def lz77_encode(
    data: bytes,
    search_size: int = DEFAULT_SEARCH_SIZE,
    lookahead_size: int = DEFAULT_LOOKAHEAD_SIZE,
    max_chain: int = DEFAULT_MAX_CHAIN,
) -> List[Lz77Token]:
    """lz77_encode turns data into (offset, length, next_symbol) tokens

    Matches of three or more bytes are found through a position list per
    3-byte prefix; at most max_chain of the nearest candidates are
    compared.  One- and two-byte matches are looked up directly, which
    keeps the farthest-wins rule exact for them.
    """
    if search_size < 1 or lookahead_size < 1:
        raise ValidationError("search and look-ahead buffers need at least one byte")
    if max_chain < 1:
        raise ValidationError("max_chain must be positive")

    data = bytes(data)
    n = len(data)
    by_one = defaultdict(list)
    by_two = defaultdict(list)
    by_three = defaultdict(list)
    tokens = []
    indexed = 0
    cursor = 0

    while cursor < n:
        while indexed < cursor:
            by_one[data[indexed]].append(indexed)
            if indexed + 2 <= n:
                by_two[data[indexed : indexed + 2]].append(indexed)
            if indexed + 3 <= n:
                by_three[data[indexed : indexed + 3]].append(indexed)
            indexed += 1

        low = cursor - search_size
        max_len = min(lookahead_size, n - cursor - 1)
        best_len = 0
        best_pos = -1

        if max_len >= 3:
            chain = by_three.get(data[cursor : cursor + 3])
            if chain:
                start = max(bisect.bisect_left(chain, low), len(chain) - max_chain)
                for pos in chain[start:]:
                    if best_len and data[pos + best_len] != data[cursor + best_len]:
                        continue
                    length = 3
                    while length < max_len and data[pos + length] == data[cursor + length]:
                        length += 1
                    if length > best_len:
                        best_len = length
                        best_pos = pos
                        if length == max_len:
                            break

        if best_len < 3 and max_len >= 2:
            positions = by_two.get(data[cursor : cursor + 2])
            if positions:
                pos = _farthest_in_window(positions, low)
                if pos is not None:
                    best_len, best_pos = 2, pos

        if best_len == 0 and max_len >= 1:
            positions = by_one.get(data[cursor])
            if positions:
                pos = _farthest_in_window(positions, low)
                if pos is not None:
                    best_len, best_pos = 1, pos

        if best_len:
            tokens.append(Lz77Token(cursor - best_pos, best_len, data[cursor + best_len]))
        else:
            tokens.append(Lz77Token(0, 0, data[cursor]))
        cursor += best_len + 1

    return tokens


def lz77_decode(tokens: Sequence[Lz77Token]) -> bytes:
    out = bytearray()
    for number, (offset, length, symbol) in enumerate(tokens):
        if (offset == 0) != (length == 0):
            raise CorruptStreamError(f"token {number} mixes a zero and non-zero field")
        if offset > len(out):
            raise CorruptStreamError(
                f"token {number} points {offset} bytes back but only {len(out)} exist"
            )
        if length:
            start = len(out) - offset
            if length <= offset:
                out += out[start : start + length]
            else:
                for i in range(length):
                    out.append(out[start + i])
        out.append(symbol)
    return bytes(out)
