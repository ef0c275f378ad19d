"""Fixed-width bit strings and the operators the protocol algebra runs on.

Every identity, nonce, digest and message field is a :class:`BitString`.
Widths are explicit and equality is bit-exact: ``BitString(32, 5)`` and
``BitString(160, 5)`` are different values. Bit 0 is the most significant
bit (big-endian), both for indexing and for the wire layout.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import WidthMismatch


@dataclass(frozen=True)
class BitString:
    """Immutable bit sequence with a fixed width.

    The value is held as a non-negative integer right-aligned in the
    width, so zero-extension on the left is a no-op on the integer.
    """

    width: int
    value: int

    def __post_init__(self):
        if self.width < 0:
            raise ValueError(f"negative width {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value does not fit in {self.width} bits")

    # -- constructors ----------------------------------------------------

    @classmethod
    def zeros(cls, width: int) -> "BitString":
        return cls(width, 0)

    @classmethod
    def random(cls, width: int, rng: random.Random) -> "BitString":
        return cls(width, rng.getrandbits(width))

    @classmethod
    def from_bytes(cls, data: bytes, width: int | None = None) -> "BitString":
        w = 8 * len(data) if width is None else width
        if w > 8 * len(data):
            raise WidthMismatch(f"width {w} exceeds {8 * len(data)} available bits")
        # keep the leading (most significant) w bits
        value = int.from_bytes(data, "big") >> (8 * len(data) - w)
        return cls(w, value)

    @classmethod
    def from_hex(cls, text: str, width: int | None = None) -> "BitString":
        text = text.strip().lower()
        w = 4 * len(text) if width is None else width
        value = int(text, 16) if text else 0
        if w != 4 * len(text):
            if not 0 <= value < (1 << w):
                raise WidthMismatch(f"hex value does not fit in {w} bits")
        return cls(w, value)

    @classmethod
    def from_text(cls, text: str, width: int = 160) -> "BitString":
        """Canonical encoding of identities and passwords.

        UTF-8 bytes, zero-padded on the right to ``width`` bits. The width
        must be a byte multiple and the text must fit.
        """
        if width % 8:
            raise WidthMismatch("text fields must have byte-aligned widths")
        raw = text.encode("utf-8")
        if 8 * len(raw) > width:
            raise WidthMismatch(f"{text!r} does not fit in {width} bits")
        return cls.from_bytes(raw.ljust(width // 8, b"\x00"))

    # -- views ------------------------------------------------------------

    def to_bytes(self) -> bytes:
        """Bytes view, right-padded with zero bits to a byte boundary.

        This padding rule is part of the wire and hashing contract: all
        parties feed identical byte sequences to the hash.
        """
        nbytes = (self.width + 7) // 8
        return (self.value << (8 * nbytes - self.width)).to_bytes(nbytes, "big")

    def hex(self) -> str:
        """Lowercase hex of :meth:`to_bytes`, no separators."""
        return self.to_bytes().hex()

    def __len__(self) -> int:
        return self.width

    def __repr__(self) -> str:
        return f"BitString({self.width}, 0x{self.value:x})"

    # -- algebra ----------------------------------------------------------

    def __xor__(self, other: "BitString") -> "BitString":
        """Bitwise XOR; the shorter operand is zero-extended on the left."""
        return BitString(max(self.width, other.width), self.value ^ other.value)

    def zext(self, width: int) -> "BitString":
        """Zero-extend on the left to ``width`` bits."""
        if width < self.width:
            raise WidthMismatch(f"cannot zero-extend {self.width} down to {width}")
        return BitString(width, self.value)

    def bit(self, index: int) -> int:
        """Bit at ``index`` counting from the most significant bit."""
        if not 0 <= index < self.width:
            raise IndexError(index)
        return (self.value >> (self.width - 1 - index)) & 1

    def flip(self, index: int) -> "BitString":
        """Copy with the bit at ``index`` inverted (tamper primitive)."""
        if not 0 <= index < self.width:
            raise IndexError(index)
        return BitString(self.width, self.value ^ (1 << (self.width - 1 - index)))

    def slice(self, start: int, stop: int) -> "BitString":
        """Bits ``[start, stop)`` in MSB-first order."""
        if not 0 <= start <= stop <= self.width:
            raise IndexError((start, stop))
        w = stop - start
        return BitString(w, (self.value >> (self.width - stop)) & ((1 << w) - 1) if w else 0)

    def hamming(self, other: "BitString") -> int:
        if self.width != other.width:
            raise WidthMismatch("hamming distance needs equal widths")
        return (self.value ^ other.value).bit_count()

    def contains(self, needle: "BitString") -> bool:
        """True if ``needle`` appears as a contiguous bit pattern."""
        if needle.width > self.width:
            return False
        mask = (1 << needle.width) - 1
        for shift in range(self.width - needle.width + 1):
            if (self.value >> shift) & mask == needle.value:
                return True
        return False


def concat(parts: Sequence[BitString] | Iterable[BitString]) -> BitString:
    """Concatenate bit strings in order; result width is the sum of widths."""
    width = 0
    value = 0
    for part in parts:
        width += part.width
        value = (value << part.width) | part.value
    return BitString(width, value)
