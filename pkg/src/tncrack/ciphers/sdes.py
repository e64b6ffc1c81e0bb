"""Simplified DES: 8-bit blocks, 10-bit keys, two Feistel rounds.

Standard textbook tables.  All permutation tables use 1-based source
positions counted from the most significant bit.
"""

from ..bits import BitString, check_length

P10 = (3, 5, 2, 7, 4, 10, 1, 9, 8, 6)
P8 = (6, 3, 7, 4, 8, 5, 10, 9)
IP = (2, 6, 3, 1, 4, 8, 5, 7)
IP_INV = (4, 1, 3, 5, 7, 2, 8, 6)
EP = (4, 1, 2, 3, 2, 3, 4, 1)
P4 = (2, 4, 3, 1)

S0 = ((1, 0, 3, 2), (3, 2, 1, 0), (0, 2, 1, 3), (3, 1, 3, 2))
S1 = ((0, 1, 2, 3), (2, 0, 1, 3), (3, 0, 1, 0), (2, 1, 0, 3))

KEY_BITS = 10
BLOCK_BITS = 8


def _permute(x: int, width: int, table) -> int:
    out = 0
    for pos in table:
        out = (out << 1) | ((x >> (width - pos)) & 1)
    return out


def _rol5(x: int, n: int) -> int:
    return ((x << n) | (x >> (5 - n))) & 0x1F


def _subkeys(key: int) -> tuple[int, int]:
    p = _permute(key, 10, P10)
    left, right = p >> 5, p & 0x1F
    left, right = _rol5(left, 1), _rol5(right, 1)
    k1 = _permute((left << 5) | right, 10, P8)
    left, right = _rol5(left, 2), _rol5(right, 2)
    k2 = _permute((left << 5) | right, 10, P8)
    return k1, k2


def _sbox(x: int, box) -> int:
    # row from outer bits, column from inner bits of the 4-bit input
    row = ((x >> 2) & 2) | (x & 1)
    col = (x >> 1) & 3
    return box[row][col]


def _round(left: int, right: int, subkey: int) -> int:
    x = _permute(right, 4, EP) ^ subkey
    s = (_sbox(x >> 4, S0) << 2) | _sbox(x & 0xF, S1)
    return left ^ _permute(s, 4, P4)


def encrypt_int(key: int, pt: int) -> int:
    k1, k2 = _subkeys(key)
    x = _permute(pt, 8, IP)
    left, right = x >> 4, x & 0xF
    left = _round(left, right, k1)
    left, right = right, left
    left = _round(left, right, k2)
    return _permute((left << 4) | right, 8, IP_INV)


def decrypt_int(key: int, ct: int) -> int:
    k1, k2 = _subkeys(key)
    x = _permute(ct, 8, IP)
    left, right = x >> 4, x & 0xF
    left = _round(left, right, k2)
    left, right = right, left
    left = _round(left, right, k1)
    return _permute((left << 4) | right, 8, IP_INV)


def encrypt(key: BitString, plaintext: BitString) -> BitString:
    check_length(key, KEY_BITS, "S-DES key")
    check_length(plaintext, BLOCK_BITS, "S-DES plaintext")
    return BitString(encrypt_int(key.value, plaintext.value), BLOCK_BITS)


def decrypt(key: BitString, ciphertext: BitString) -> BitString:
    check_length(key, KEY_BITS, "S-DES key")
    check_length(ciphertext, BLOCK_BITS, "S-DES ciphertext")
    return BitString(decrypt_int(key.value, ciphertext.value), BLOCK_BITS)
