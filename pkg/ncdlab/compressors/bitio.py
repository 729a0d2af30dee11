"""MSB-first bit packing used by the Huffman and arithmetic stages

Bits are collected as '0'/'1' strings and converted with int(..., 2) in
one go, which is far faster in Python than shifting byte by byte.
"""

from ..errors import CorruptStreamError


class BitWriter:
    def __init__(self):
        self._chunks = []
        self.nbits = 0

    def write(self, value, nbits):
        """write appends value as an nbits wide unsigned field"""
        if nbits == 0:
            return
        if value < 0 or value >> nbits:
            raise ValueError(f"{value} does not fit in {nbits} bits")
        self._chunks.append(format(value, f"0{nbits}b"))
        self.nbits += nbits

    def write_bits(self, bits):
        """write_bits appends a ready-made '0'/'1' string"""
        self._chunks.append(bits)
        self.nbits += len(bits)

    def getvalue(self):
        """Returns the bits written so far, zero padded to a whole byte"""
        bits = "".join(self._chunks)
        pad = -len(bits) % 8
        bits += "0" * pad
        if not bits:
            return b""
        return int(bits, 2).to_bytes(len(bits) // 8, "big")


class BitReader:
    def __init__(self, data, offset=0):
        data = bytes(data[offset:])
        if data:
            self.bits = format(int.from_bytes(data, "big"), f"0{len(data) * 8}b")
        else:
            self.bits = ""
        self.pos = 0

    def read(self, nbits):
        if nbits == 0:
            return 0
        end = self.pos + nbits
        if end > len(self.bits):
            raise CorruptStreamError("bit stream truncated")
        value = int(self.bits[self.pos : end], 2)
        self.pos = end
        return value

    def read_bit(self):
        """read_bit returns the next bit, or 0 once the stream is exhausted

        The arithmetic decoder relies on reading zeros past the end.
        """
        if self.pos >= len(self.bits):
            self.pos += 1
            return 0
        bit = self.bits[self.pos] == "1"
        self.pos += 1
        return int(bit)
