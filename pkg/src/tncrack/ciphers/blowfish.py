"""Blowfish: 64-bit blocks, 16 Feistel rounds, key lengths 32..448 bits.

The key schedule is recomputed for every key (it depends on the key); the
pi-digit initialization tables are precomputed constants in
``_blowfish_init``.
"""

from ..bits import BitString, check_length
from ._blowfish_init import P_INIT, S_INIT
from ..errors import ShapeError

MASK32 = 0xFFFFFFFF

MIN_KEY_BITS = 32
MAX_KEY_BITS = 448
BLOCK_BITS = 64


class KeySchedule:
    """Expanded P-array and S-boxes for one key."""

    __slots__ = ("p", "s0", "s1", "s2", "s3")

    def __init__(self, key_bytes: bytes):
        if not MIN_KEY_BITS <= 8 * len(key_bytes) <= MAX_KEY_BITS:
            raise ShapeError(
                f"Blowfish key must be 32..448 bits, got {8 * len(key_bytes)}"
            )
        p = list(P_INIT)
        s0, s1, s2, s3 = (list(box) for box in S_INIT)
        n = len(key_bytes)
        j = 0
        for i in range(18):
            data = 0
            for _ in range(4):
                data = ((data << 8) | key_bytes[j]) & MASK32
                j = (j + 1) % n
            p[i] ^= data
        self.p, self.s0, self.s1, self.s2, self.s3 = p, s0, s1, s2, s3

        left = right = 0
        for i in range(0, 18, 2):
            left, right = self._crypt_words(left, right)
            p[i], p[i + 1] = left, right
        for box in (s0, s1, s2, s3):
            for i in range(0, 256, 2):
                left, right = self._crypt_words(left, right)
                box[i], box[i + 1] = left, right

    def _feistel(self, x: int) -> int:
        h = (self.s0[x >> 24] + self.s1[(x >> 16) & 0xFF]) & MASK32
        return ((h ^ self.s2[(x >> 8) & 0xFF]) + self.s3[x & 0xFF]) & MASK32

    def _crypt_words(self, left: int, right: int) -> tuple[int, int]:
        p = self.p
        for i in range(16):
            left ^= p[i]
            right ^= self._feistel(left)
            left, right = right, left
        left, right = right, left
        return (left ^ p[17]), (right ^ p[16])

    def _decrypt_words(self, left: int, right: int) -> tuple[int, int]:
        p = self.p
        for i in range(17, 1, -1):
            left ^= p[i]
            right ^= self._feistel(left)
            left, right = right, left
        left, right = right, left
        return (left ^ p[0]), (right ^ p[1])

    def encrypt_block(self, block: int) -> int:
        left, right = self._crypt_words(block >> 32, block & MASK32)
        return (left << 32) | right

    def decrypt_block(self, block: int) -> int:
        left, right = self._decrypt_words(block >> 32, block & MASK32)
        return (left << 32) | right

    def state_digest(self) -> int:
        """Cheap determinism check over the expanded P-array."""
        h = 0
        for w in self.p:
            h = (h * 0x100000001B3 ^ w) & (1 << 64) - 1
        return h


def _key_bytes(key: BitString) -> bytes:
    if len(key) % 8 != 0:
        raise ShapeError(f"Blowfish key length must be a multiple of 8, got {len(key)}")
    return key.value.to_bytes(len(key) // 8, "big")


def encrypt(key: BitString, plaintext: BitString) -> BitString:
    check_length(plaintext, BLOCK_BITS, "Blowfish plaintext")
    return BitString(KeySchedule(_key_bytes(key)).encrypt_block(plaintext.value), BLOCK_BITS)


def decrypt(key: BitString, ciphertext: BitString) -> BitString:
    check_length(ciphertext, BLOCK_BITS, "Blowfish ciphertext")
    return BitString(KeySchedule(_key_bytes(key)).decrypt_block(ciphertext.value), BLOCK_BITS)


def encrypt_int(key: int, pt: int, key_bits: int = 32) -> int:
    return KeySchedule(key.to_bytes(key_bits // 8, "big")).encrypt_block(pt)
