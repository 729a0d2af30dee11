"""Binary arithmetic coder over integer frequency intervals

The classic low/high/underflow coder.  A 64-bit state keeps the loss
from integer rounding far below one bit even for megabyte inputs, so
the emitted stream stays within a couple of bytes of the ideal code
length.
"""

from .bitio import BitReader, BitWriter

STATE_BITS = 64
FULL = 1 << STATE_BITS
MASK = FULL - 1
TOP = FULL >> 1
SECOND = TOP >> 1
MAX_TOTAL = SECOND


class _Coder:
    def __init__(self):
        self.low = 0
        self.high = MASK

    def _narrow(self, low_count, high_count, total):
        if not 0 <= low_count < high_count <= total <= MAX_TOTAL:
            raise ValueError(f"bad interval [{low_count}, {high_count}) of {total}")
        span = self.high - self.low + 1
        self.high = self.low + high_count * span // total - 1
        self.low = self.low + low_count * span // total
        while True:
            if (self.low ^ self.high) & TOP == 0:
                self._shift()
                self.low = (self.low << 1) & MASK
                self.high = ((self.high << 1) & MASK) | 1
            elif self.low & ~self.high & SECOND:
                self._underflow()
                self.low = (self.low << 1) & (MASK >> 1)
                self.high = ((self.high << 1) & (MASK >> 1)) | TOP | 1
            else:
                break


class ArithmeticEncoder(_Coder):
    def __init__(self, writer=None):
        super().__init__()
        self.writer = writer if writer is not None else BitWriter()
        self.pending = 0

    def encode(self, low_count, high_count, total):
        self._narrow(low_count, high_count, total)

    def finish(self):
        """Flushes enough bits to pin the final interval down"""
        self.writer.write(1, 1)
        return self.writer

    def _shift(self):
        bit = self.low >> (STATE_BITS - 1)
        self.writer.write(bit, 1)
        if self.pending:
            self.writer.write_bits(("0" if bit else "1") * self.pending)
            self.pending = 0

    def _underflow(self):
        self.pending += 1


class ArithmeticDecoder(_Coder):
    def __init__(self, data, offset=0):
        super().__init__()
        self.reader = BitReader(data, offset)
        self.code = 0
        for _ in range(STATE_BITS):
            self.code = (self.code << 1) | self.reader.read_bit()

    def target(self, total):
        """Returns the cumulative count the next symbol's interval contains"""
        span = self.high - self.low + 1
        value = ((self.code - self.low + 1) * total - 1) // span
        return value

    def decode(self, low_count, high_count, total):
        self._narrow(low_count, high_count, total)

    def _shift(self):
        self.code = ((self.code << 1) & MASK) | self.reader.read_bit()

    def _underflow(self):
        self.code = (self.code & TOP) | ((self.code << 1) & (MASK >> 1)) | self.reader.read_bit()
