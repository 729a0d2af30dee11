"""Burrows-Wheeler transform over cyclic rotations"""

from dataclasses import dataclass

from ..errors import CorruptStreamError, EmptyInputError, ValidationError

DEFAULT_BLOCK_SIZE = 256 * 1024


@dataclass(frozen=True)
class BwtBlock:
    transformed: bytes
    primary_index: int


def sort_rotations(block):
    """Returns the start offsets of the rotations of block in sorted order

    Prefix doubling: after round k every rotation is ranked by its first
    2**k bytes, so at most log2(n) stable sorts are needed.  Identical
    rotations keep their offset order.
    """
    n = len(block)
    rank = list(block)
    order = sorted(range(n), key=rank.__getitem__)
    base = max(n, 256) + 1
    width = 1
    while width < n:
        key = [rank[i] * base + rank[(i + width) % n] for i in range(n)]
        order.sort(key=key.__getitem__)
        new_rank = [0] * n
        current = 0
        previous = key[order[0]]
        for i in order:
            if key[i] != previous:
                current += 1
                previous = key[i]
            new_rank[i] = current
        rank = new_rank
        if current == n - 1:
            break
        width *= 2
    return order


def bwt_forward(block: bytes, block_size: int = DEFAULT_BLOCK_SIZE) -> BwtBlock:
    """bwt_forward returns the last column of the sorted rotation matrix

    primary_index is the row holding the untransformed block.
    """
    if not block:
        raise EmptyInputError("cannot transform an empty block")
    if len(block) > block_size:
        raise ValidationError(f"block of {len(block)} bytes exceeds {block_size}")
    order = sort_rotations(block)
    n = len(block)
    transformed = bytes(block[(i - 1) % n] for i in order)
    return BwtBlock(transformed, order.index(0))


def bwt_inverse(bwt: BwtBlock) -> bytes:
    last = bwt.transformed
    n = len(last)
    if not 0 <= bwt.primary_index < n:
        raise CorruptStreamError(f"primary index {bwt.primary_index} out of range")
    # row i of the first column is the byte at last[follow[i]]
    follow = sorted(range(n), key=last.__getitem__)
    out = bytearray()
    row = follow[bwt.primary_index]
    for _ in range(n):
        out.append(last[row])
        row = follow[row]
    return bytes(out)
