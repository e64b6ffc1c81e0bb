"""Fixed-length bit strings, MSB first.

``BitString`` is the common currency between ciphers and attack engines:
keys, plaintexts and ciphertexts are all fixed-length binary words.  The
value is stored as a non-negative integer together with its bit length;
bit 0 is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ShapeError


@dataclass(frozen=True, slots=True)
class BitString:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ShapeError(f"negative length {self.length}")
        if not 0 <= self.value < (1 << self.length):
            raise ShapeError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        return cls(value, length)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        value = 0
        n = 0
        for b in bits:
            if b not in (0, 1):
                raise ShapeError(f"bit value {b!r} is not 0 or 1")
            value = (value << 1) | b
            n += 1
        return cls(value, n)

    @classmethod
    def from01(cls, text: str) -> "BitString":
        return cls.from_bits(int(c) for c in text)

    @classmethod
    def from_hex(cls, text: str, length: int | None = None) -> "BitString":
        if length is None:
            length = 4 * len(text)
        return cls(int(text, 16) if text else 0, length)

    @classmethod
    def random(cls, length: int, rng) -> "BitString":
        value = 0
        for _ in range(length):
            value = (value << 1) | int(rng.integers(2))
        return cls(value, length)

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(0, length)

    def to_int(self) -> int:
        return self.value

    def to01(self) -> str:
        return format(self.value, f"0{self.length}b") if self.length else ""

    def to_hex(self) -> str:
        n = (self.length + 3) // 4
        return format(self.value, f"0{n}x") if self.length else ""

    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.length - 1 - i)) & 1 for i in range(self.length))

    def __len__(self) -> int:
        return self.length

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits())

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.value >> (self.length - 1 - i)) & 1

    def __xor__(self, other: "BitString") -> "BitString":
        if self.length != other.length:
            raise ShapeError(f"length mismatch: {self.length} vs {other.length}")
        return BitString(self.value ^ other.value, self.length)

    def concat(self, other: "BitString") -> "BitString":
        return BitString((self.value << other.length) | other.value, self.length + other.length)

    def complement(self) -> "BitString":
        mask = (1 << self.length) - 1
        return BitString(self.value ^ mask, self.length)

    def slice(self, start: int, stop: int) -> "BitString":
        if not 0 <= start <= stop <= self.length:
            raise ShapeError(f"bad slice [{start}:{stop}] of {self.length}-bit string")
        n = stop - start
        return BitString((self.value >> (self.length - stop)) & ((1 << n) - 1), n)

    def __repr__(self) -> str:
        return f"BitString({self.to01()!r})"


def check_length(bs: BitString, expected: int, what: str) -> None:
    if len(bs) != expected:
        raise ShapeError(f"{what} must be {expected} bits, got {len(bs)}")
