"""Uniform cipher interface: named ciphers behind one encrypt signature.

A :class:`CipherSpec` bundles key/block sizes with encrypt/decrypt
callables operating on :class:`~tncrack.bits.BitString`.  The
``encrypt_int`` fast path skips per-call validation and is what the attack
engines' inner loops use.  :class:`ReducedKeyspace` wraps a base cipher
with a fixed known key prefix so engines search only the remaining bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Callable

from ..bits import BitString, check_length
from ..errors import ShapeError
from . import blowfish, saes, sdes


@dataclass(frozen=True)
class CipherSpec:
    name: str
    key_bits: int
    block_bits: int
    encrypt: Callable[[BitString, BitString], BitString]
    decrypt: Callable[[BitString, BitString], BitString]
    encrypt_int: Callable[[int, int], int]


def _blowfish32_encrypt_int(key: int, pt: int) -> int:
    return blowfish.encrypt_int(key, pt, key_bits=32)


SDES = CipherSpec("sdes", sdes.KEY_BITS, sdes.BLOCK_BITS, sdes.encrypt, sdes.decrypt, sdes.encrypt_int)
SAES = CipherSpec("saes", saes.KEY_BITS, saes.BLOCK_BITS, saes.encrypt, saes.decrypt, saes.encrypt_int)
BLOWFISH32 = CipherSpec(
    "blowfish", 32, blowfish.BLOCK_BITS, blowfish.encrypt, blowfish.decrypt, _blowfish32_encrypt_int
)


@dataclass(frozen=True)
class ReducedKeyspace:
    """A cipher searched over a key suffix, the leading bits being known."""

    base: CipherSpec
    fixed_prefix: BitString

    @property
    def name(self) -> str:
        return f"{self.base.name}-reduced{self.free_bits}"

    @property
    def free_bits(self) -> int:
        return self.base.key_bits - len(self.fixed_prefix)

    @property
    def key_bits(self) -> int:
        return self.free_bits

    @property
    def block_bits(self) -> int:
        return self.base.block_bits

    def __post_init__(self):
        if len(self.fixed_prefix) > self.base.key_bits:
            raise ShapeError(
                f"prefix of {len(self.fixed_prefix)} bits exceeds "
                f"{self.base.key_bits}-bit key"
            )

    def expand(self, free_key: BitString) -> BitString:
        check_length(free_key, self.free_bits, "free key")
        return self.fixed_prefix.concat(free_key)

    def encrypt(self, free_key: BitString, plaintext: BitString) -> BitString:
        return self.base.encrypt(self.expand(free_key), plaintext)

    def decrypt(self, free_key: BitString, ciphertext: BitString) -> BitString:
        return self.base.decrypt(self.expand(free_key), ciphertext)

    def encrypt_int(self, free_key: int, pt: int) -> int:
        if not 0 <= free_key < (1 << self.free_bits):
            raise ShapeError(f"free key {free_key} does not fit in {self.free_bits} bits")
        full = (self.fixed_prefix.value << self.free_bits) | free_key
        return self.base.encrypt_int(full, pt)


_REGISTRY = {c.name: c for c in (SDES, SAES, BLOWFISH32)}


def get_cipher(name: str) -> CipherSpec | ReducedKeyspace:
    """Look up a cipher by CLI name.

    ``blowfish-reduced`` is the 24-bit-search configuration: the first 8
    key bits are fixed (to zeros here; campaigns re-fix them per secret).
    """
    if name in _REGISTRY:
        return _REGISTRY[name]
    if name == "blowfish-reduced":
        return ReducedKeyspace(BLOWFISH32, BitString.zeros(8))
    raise KeyError(f"unknown cipher {name!r}; known: {sorted(_REGISTRY) + ['blowfish-reduced']}")


def cipher_names() -> list[str]:
    return sorted(_REGISTRY) + ["blowfish-reduced"]


def load_golden_vectors() -> list[tuple[str, BitString, BitString, BitString]]:
    """Parse the frozen known-answer fixture.

    One record per line: ``cipher key_hex plaintext_hex ciphertext_hex``.
    Key bit length is implied by the hex digit count; blocks use the
    cipher's block size.
    """
    text = resources.files("tncrack.data").joinpath("golden_vectors.txt").read_text()
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, key_hex, pt_hex, ct_hex = line.split()
        key = BitString.from_hex(key_hex)
        if name == "sdes":  # 10-bit key written as 3 hex digits
            key = BitString(key.value, 10)
        spec = _REGISTRY[name]
        out.append(
            (
                name,
                key,
                BitString.from_hex(pt_hex, spec.block_bits),
                BitString.from_hex(ct_hex, spec.block_bits),
            )
        )
    return out


def check_golden_vectors() -> list[str]:
    """Run the known-answer check; returns a list of failure messages."""
    failures = []
    for name, key, pt, ct in load_golden_vectors():
        if name == "blowfish":
            got = blowfish.encrypt(key, pt)
        else:
            got = _REGISTRY[name].encrypt(key, pt)
        if got != ct:
            failures.append(f"{name} key={key.to_hex()} pt={pt.to_hex()}: got {got.to_hex()}, want {ct.to_hex()}")
    return failures
