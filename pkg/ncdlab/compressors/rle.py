"""Byte-stuffed run-length encoding

Runs of three or more equal bytes become MARKER, count, byte.  Shorter
runs stay literal.  A literal MARKER byte is written as MARKER, 0.
Counts of 1 and 2 never occur in a valid stream.
"""

import itertools
from typing import List, Tuple

from ..errors import CorruptStreamError

MARKER = 0xFF
MIN_RUN = 3
MAX_RUN = 255


def rle_runs(data: bytes) -> List[Tuple[int, int]]:
    """Returns the maximal runs of data as (count, byte) pairs"""
    return [(len(list(group)), byte) for byte, group in itertools.groupby(data)]


def rle_encode(data: bytes) -> bytes:
    out = bytearray()
    for count, byte in rle_runs(data):
        while count >= MIN_RUN:
            chunk = min(count, MAX_RUN)
            out += bytes((MARKER, chunk, byte))
            count -= chunk
        for _ in range(count):
            if byte == MARKER:
                out += bytes((MARKER, 0))
            else:
                out.append(byte)
    return bytes(out)


def rle_decode(data: bytes) -> bytes:
    out = bytearray()
    i = 0
    n = len(data)
    while i < n:
        byte = data[i]
        if byte != MARKER:
            out.append(byte)
            i += 1
            continue
        if i + 1 >= n:
            raise CorruptStreamError(f"truncated run header at offset {i}")
        count = data[i + 1]
        if count == 0:
            out.append(MARKER)
            i += 2
            continue
        if count < MIN_RUN:
            raise CorruptStreamError(f"invalid run length {count} at offset {i}")
        if i + 2 >= n:
            raise CorruptStreamError(f"truncated run at offset {i}")
        out += bytes((data[i + 2],)) * count
        i += 3
    return bytes(out)
