"""Standard gate matrices and the three-angle single-qubit rotation.

Convention for the parameterized rotation (identity at zero angles):

    u3(theta, phi, lam) = [[cos(t/2),            -e^{i lam} sin(t/2)],
                           [e^{i phi} sin(t/2),   e^{i(phi+lam)} cos(t/2)]]
"""

from __future__ import annotations

import math

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)  # |1><1|

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(
        np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol
    )


def random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


GATES_1Q = {"x": X, "y": Y, "z": Z, "h": H, "i": I2}
GATES_2Q = {"cnot": CNOT, "cx": CNOT, "cz": CZ}


def resolve_gate(name: str, params=()) -> tuple[np.ndarray, int]:
    """Map a (gate-name, parameters) record to (matrix, arity)."""
    name = name.lower()
    if name == "u3":
        return u3(*params), 1
    if name in GATES_1Q:
        return GATES_1Q[name], 1
    if name in GATES_2Q:
        return GATES_2Q[name], 2
    raise KeyError(f"unknown gate {name!r}")
