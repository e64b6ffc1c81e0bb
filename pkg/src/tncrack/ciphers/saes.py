"""Simplified AES: 16-bit blocks and keys, two substitution-permutation rounds.

Standard educational definition (nibble S-box, 2x2 column-major state,
MixColumns matrix [[1,4],[4,1]] over GF(2^4) mod x^4+x+1, round constants
0x80 and 0x30).  Byte-level lookup tables are precomputed at import so a
single encryption costs a handful of table hits; the nibble S-box below is
the single source of truth for all of them.
"""

from ..bits import BitString, check_length

SBOX = (0x9, 0x4, 0xA, 0xB, 0xD, 0x1, 0x8, 0x5, 0x6, 0x2, 0x0, 0x3, 0xC, 0xE, 0xF, 0x7)
INV_SBOX = tuple(SBOX.index(i) for i in range(16))

RCON1 = 0x80
RCON2 = 0x30

KEY_BITS = 16
BLOCK_BITS = 16


def _gmul(a: int, b: int) -> int:
    # GF(2^4) multiply mod x^4 + x + 1
    p = 0
    for _ in range(4):
        if b & 1:
            p ^= a
        carry = a & 0x8
        a = (a << 1) & 0xF
        if carry:
            a ^= 0x3
        b >>= 1
    return p


def _byte_table(nib_fn):
    return tuple((nib_fn(b >> 4) << 4) | nib_fn(b & 0xF) for b in range(256))


_SUB_BYTE = _byte_table(lambda n: SBOX[n])
_INV_SUB_BYTE = _byte_table(lambda n: INV_SBOX[n])

# column byte (top nibble = row 0, bottom nibble = row 1) -> mixed column byte
_MIX_COL = tuple((( _gmul(1, b >> 4) ^ _gmul(4, b & 0xF)) << 4) | (_gmul(4, b >> 4) ^ _gmul(1, b & 0xF)) for b in range(256))
_INV_MIX_COL = tuple((( _gmul(9, b >> 4) ^ _gmul(2, b & 0xF)) << 4) | (_gmul(2, b >> 4) ^ _gmul(9, b & 0xF)) for b in range(256))


def _sub16(s: int, table) -> int:
    # works for SubNibbles and for MixColumns alike: the state bytes are
    # exactly the column bytes (row 0 nibble high, row 1 nibble low)
    return (table[s >> 8] << 8) | table[s & 0xFF]


def _shift_row(s: int) -> int:
    # swap the second-row nibbles (positions 1 and 3 of the MSB-first nibbles)
    return (s & 0xF0F0) | ((s & 0x0F00) >> 8) | ((s & 0x000F) << 8)


def _rot_byte(w: int) -> int:
    return ((w << 4) | (w >> 4)) & 0xFF


def expand_key(key: int) -> tuple[int, int, int]:
    w0 = (key >> 8) & 0xFF
    w1 = key & 0xFF
    w2 = w0 ^ RCON1 ^ _SUB_BYTE[_rot_byte(w1)]
    w3 = w2 ^ w1
    w4 = w2 ^ RCON2 ^ _SUB_BYTE[_rot_byte(w3)]
    w5 = w4 ^ w3
    return (w0 << 8) | w1, (w2 << 8) | w3, (w4 << 8) | w5


def encrypt_int(key: int, pt: int) -> int:
    k0, k1, k2 = expand_key(key)
    s = pt ^ k0
    s = _sub16(_shift_row(_sub16(s, _SUB_BYTE)), _MIX_COL) ^ k1
    return _shift_row(_sub16(s, _SUB_BYTE)) ^ k2


def decrypt_int(key: int, ct: int) -> int:
    k0, k1, k2 = expand_key(key)
    s = _sub16(_shift_row(ct ^ k2), _INV_SUB_BYTE)
    s = _sub16(s ^ k1, _INV_MIX_COL)
    return _sub16(_shift_row(s), _INV_SUB_BYTE) ^ k0


def encrypt(key: BitString, plaintext: BitString) -> BitString:
    check_length(key, KEY_BITS, "S-AES key")
    check_length(plaintext, BLOCK_BITS, "S-AES plaintext")
    return BitString(encrypt_int(key.value, plaintext.value), BLOCK_BITS)


def decrypt(key: BitString, ciphertext: BitString) -> BitString:
    check_length(key, KEY_BITS, "S-AES key")
    check_length(ciphertext, BLOCK_BITS, "S-AES ciphertext")
    return BitString(decrypt_int(key.value, ciphertext.value), BLOCK_BITS)
