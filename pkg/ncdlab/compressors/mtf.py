"""Move-to-front transform"""

from typing import List, Optional, Sequence

from ..errors import ValidationError

BYTE_ALPHABET = bytes(range(256))


def mtf_encode(data: Sequence[int], alphabet: Optional[Sequence[int]] = None) -> List[int]:
    """mtf_encode emits, for every symbol, its position in the evolving list

    The symbol is then moved to the front of the list.  alphabet defaults
    to the 256 byte values in increasing order.
    """
    table = list(BYTE_ALPHABET if alphabet is None else alphabet)
    out = []
    append = out.append
    for offset, symbol in enumerate(data):
        try:
            index = table.index(symbol)
        except ValueError:
            raise ValidationError(
                f"symbol {symbol!r} at offset {offset} is not in the alphabet"
            ) from None
        append(index)
        if index:
            del table[index]
            table.insert(0, symbol)
    return out


def mtf_decode(indices: Sequence[int], alphabet: Optional[Sequence[int]] = None) -> List[int]:
    table = list(BYTE_ALPHABET if alphabet is None else alphabet)
    out = []
    append = out.append
    for offset, index in enumerate(indices):
        if not 0 <= index < len(table):
            raise ValidationError(f"index {index} at offset {offset} is out of range")
        symbol = table[index]
        append(symbol)
        if index:
            del table[index]
            table.insert(0, symbol)
    return out
