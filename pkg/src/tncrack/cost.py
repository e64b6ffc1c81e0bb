"""Attack cost function and the instance object engines work against.

The cost of a candidate key is the Hamming distance between the ciphertext
it produces and the known target ciphertext; zero cost is a hit.  An
:class:`AttackInstance` owns the secret key but never exposes it to the
engines: they only call :meth:`AttackInstance.evaluate`, which counts every
cipher evaluation.  That counter is the benchmark's iteration unit.
"""

from __future__ import annotations

from .bits import BitString
from .errors import ShapeError


def hamming_distance(a: BitString, b: BitString) -> int:
    """Number of positions where two equal-length bit strings differ."""
    if len(a) != len(b):
        raise ShapeError(f"length mismatch: {len(a)} vs {len(b)}")
    return (a.value ^ b.value).bit_count()


class AttackInstance:
    """One known-plaintext attack problem.

    Engines see the searched key width, the block width, and
    :meth:`evaluate`; the secret key stays private to the harness side.
    SPSA/gradient probes should pass ``probe=True`` so both iteration
    readings (with and without probes) stay recoverable; probes still
    count as iterations.
    """

    def __init__(self, cipher, secret_key: BitString, plaintext: BitString):
        if len(secret_key) != cipher.key_bits:
            raise ShapeError(
                f"secret key must be {cipher.key_bits} bits, got {len(secret_key)}"
            )
        if len(plaintext) != cipher.block_bits:
            raise ShapeError(
                f"plaintext must be {cipher.block_bits} bits, got {len(plaintext)}"
            )
        self.cipher = cipher
        self.plaintext = plaintext
        self.target_ciphertext = cipher.encrypt(secret_key, plaintext)
        self.__secret_key = secret_key
        self.iterations = 0
        self.probe_evaluations = 0
        self.solved = False
        self.solution: BitString | None = None
        self._pt_int = plaintext.value
        self._target_int = self.target_ciphertext.value

    @classmethod
    def random(cls, cipher, rng) -> "AttackInstance":
        """Fresh instance with random secret key and plaintext."""
        return cls(
            cipher,
            BitString.random(cipher.key_bits, rng),
            BitString.random(cipher.block_bits, rng),
        )

    @property
    def key_bits(self) -> int:
        return self.cipher.key_bits

    @property
    def block_bits(self) -> int:
        return self.cipher.block_bits

    def evaluate(self, candidate: BitString, probe: bool = False) -> tuple[int, bool]:
        """Encrypt with the candidate and score it; counts one iteration."""
        if len(candidate) != self.cipher.key_bits:
            raise ShapeError(
                f"candidate must be {self.cipher.key_bits} bits, got {len(candidate)}"
            )
        self.iterations += 1
        if probe:
            self.probe_evaluations += 1
        ct = self.cipher.encrypt_int(candidate.value, self._pt_int)
        cost = (ct ^ self._target_int).bit_count()
        hit = cost == 0
        if hit and not self.solved:
            self.solved = True
            self.solution = candidate
        return cost, hit

    def reveal_secret_for_tests(self) -> BitString:
        """Harness-side access for planting and verifying keys in tests."""
        return self.__secret_key
