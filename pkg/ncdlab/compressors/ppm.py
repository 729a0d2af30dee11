"""Order-k prediction by partial matching, escape method C

Each context keeps a count per symbol seen after it.  Coding a symbol
starts at the longest available context and escapes towards shorter
ones until the symbol is known; symbols already offered by a longer
context are excluded from the shorter ones.  Escape weight is the
number of distinct symbols of the context (method C).  Below order 0 a
uniform model over the 256 byte values guarantees every byte is
codable.  Contexts that were never seen are skipped without cost since
the decoder knows about them as well.
"""

import math
from typing import Dict, Iterator, List, Tuple

from ..errors import CorruptStreamError, ValidationError
from .arith import ArithmeticDecoder, ArithmeticEncoder

MIN_ORDER = 0
MAX_ORDER = 8
DEFAULT_ORDER = 3
ALPHABET_SIZE = 256


class PpmModel:
    def __init__(self, order=DEFAULT_ORDER):
        if not MIN_ORDER <= order <= MAX_ORDER:
            raise ValidationError(f"PPM order {order} outside [{MIN_ORDER}, {MAX_ORDER}]")
        self.order = order
        # contexts[k] maps a k-byte context to {symbol: count}
        self.contexts: List[Dict[bytes, Dict[int, int]]] = [{} for _ in range(order + 1)]

    def count(self, context: bytes, symbol: int) -> int:
        """count returns how often symbol followed context so far"""
        if len(context) > self.order:
            return 0
        table = self.contexts[len(context)].get(bytes(context))
        if not table:
            return 0
        return table.get(symbol, 0)

    def update(self, data: bytes, i: int):
        """Records data[i] under every context of length 0..order before it"""
        symbol = data[i]
        for k in range(min(self.order, i) + 1):
            table = self.contexts[k].setdefault(bytes(data[i - k : i]), {})
            table[symbol] = table.get(symbol, 0) + 1

    def intervals(self, data: bytes, i: int) -> Iterator[Tuple[int, int, int]]:
        """Yields the (low, high, total) intervals that code data[i]

        The last interval codes the symbol itself, all others escapes.
        """
        symbol = data[i]
        excluded = set()
        for k in range(min(self.order, i), -1, -1):
            table = self.contexts[k].get(data[i - k : i])
            if not table:
                continue
            total = 0
            distinct = 0
            found = None
            for candidate, count in table.items():
                if candidate in excluded:
                    continue
                if candidate == symbol:
                    found = total
                total += count
                distinct += 1
            if not distinct:
                continue
            grand = total + distinct
            if found is not None:
                yield found, found + table[symbol], grand
                return
            yield total, grand, grand
            excluded.update(table)
        rank = symbol - sum(1 for s in excluded if s < symbol)
        yield rank, rank + 1, ALPHABET_SIZE - len(excluded)

    def decode_symbol(self, decoder: ArithmeticDecoder, history: bytes) -> int:
        i = len(history)
        excluded = set()
        for k in range(min(self.order, i), -1, -1):
            table = self.contexts[k].get(bytes(history[i - k : i]))
            if not table:
                continue
            active = [(s, c) for s, c in table.items() if s not in excluded]
            if not active:
                continue
            total = sum(c for _, c in active)
            grand = total + len(active)
            target = decoder.target(grand)
            if target < total:
                low = 0
                for candidate, count in active:
                    if target < low + count:
                        decoder.decode(low, low + count, grand)
                        return candidate
                    low += count
            decoder.decode(total, grand, grand)
            excluded.update(table)
        remaining = [s for s in range(ALPHABET_SIZE) if s not in excluded]
        target = decoder.target(len(remaining))
        if target >= len(remaining):
            raise CorruptStreamError("arithmetic decoder left the symbol range")
        decoder.decode(target, target + 1, len(remaining))
        return remaining[target]


def ppm_estimate_len(data: bytes, order: int = DEFAULT_ORDER) -> float:
    """Returns the ideal code length of data in bits under the PPM model"""
    data = bytes(data)
    model = PpmModel(order)
    bits = 0.0
    for i in range(len(data)):
        for low, high, total in model.intervals(data, i):
            bits += math.log2(total / (high - low))
        model.update(data, i)
    return bits


def ppm_encode(data: bytes, order: int = DEFAULT_ORDER) -> bytes:
    data = bytes(data)
    model = PpmModel(order)
    encoder = ArithmeticEncoder()
    for i in range(len(data)):
        for low, high, total in model.intervals(data, i):
            encoder.encode(low, high, total)
        model.update(data, i)
    return encoder.finish().getvalue()


def ppm_decode(payload: bytes, length: int, order: int = DEFAULT_ORDER) -> bytes:
    model = PpmModel(order)
    decoder = ArithmeticDecoder(payload)
    out = bytearray()
    for i in range(length):
        out.append(model.decode_symbol(decoder, out))
        model.update(out, i)
    return bytes(out)
