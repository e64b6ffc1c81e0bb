"""Maximally spread non-orthogonal state frames.

A frame packs ``log2(k)`` classical bits into one register of N qubits by
assigning each bit pattern a unit vector; the k vectors minimize
``||A^dag A - I||_F`` subject to unit columns, with column 0 pinned to the
all-zero computational basis state.  Decoding picks the frame state with
the highest fidelity against a reduced density matrix.

Frame index <-> bit group mapping is the binary reading of the index,
MSB first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bits import BitString
from .errors import FrameOptimizationError, InvalidStateError, ShapeError

MAX_STATES = 64

# decode tolerances
_HERM_TOL = 1e-8
_PSD_TOL = -1e-10


@dataclass(frozen=True)
class StateFrame:
    columns: np.ndarray  # (dim, k) complex, unit columns
    objective: float  # ||A^dag A - I||_F at the returned minimizer
    history: tuple = ()  # per-iteration objective values of the winning restart

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.dim))

    @property
    def bits_per_group(self) -> int:
        return int(np.log2(self.k))


def frame_objective(a: np.ndarray) -> float:
    k = a.shape[1]
    g = a.conj().T @ a - np.eye(k)
    return float(np.linalg.norm(g))


def welch_bound(dim: int, k: int) -> float:
    """Tight-frame lower bound on the Frobenius objective, 0 if k <= dim."""
    if k <= dim:
        return 0.0
    return float(np.sqrt(k * k / dim - k))


def _project(a: np.ndarray) -> np.ndarray:
    a = a / np.maximum(np.linalg.norm(a, axis=0, keepdims=True), 1e-300)
    a[:, 0] = 0.0
    a[0, 0] = 1.0
    return a


def _tangent_grad_norm(a: np.ndarray, grad: np.ndarray) -> float:
    # project out the radial component per column and the pinned column
    radial = np.real(np.sum(a.conj() * grad, axis=0))
    pg = grad - a * radial
    pg[:, 0] = 0.0
    return float(np.linalg.norm(pg))


def _optimize_restart(rng, dim: int, k: int, max_iter: int, grad_tol: float):
    a = _project(rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k)))
    obj = frame_objective(a)
    history = [obj]
    lr = 0.05
    stationary = False
    for _ in range(max_iter):
        g = a.conj().T @ a - np.eye(k)
        grad = 2.0 * (a @ g)  # d/dA* of ||A^dag A - I||_F^2
        if _tangent_grad_norm(a, grad) <= grad_tol:
            stationary = True
            break
        # backtracking keeps the recorded objective non-increasing
        while lr > 1e-12:
            cand = _project(a - lr * grad)
            cand_obj = frame_objective(cand)
            if cand_obj <= obj:
                break
            lr *= 0.5
        else:
            stationary = True
            break
        a, obj = cand, cand_obj
        history.append(obj)
        lr = min(lr * 1.2, 0.5)
    return a, obj, history, stationary


def build_frame(
    n_qubits: int,
    k: int,
    seed: int = 0,
    n_restarts: int = 8,
    max_iter: int = 20000,
    grad_tol: float = 1e-10,
) -> StateFrame:
    """Minimize the frame objective by projected gradient descent.

    Multi-start over ``n_restarts`` seeds; columns renormalized (and column
    0 re-pinned) after every step; step length found by backtracking, so
    the objective never increases along the iteration history.  Raises
    :class:`FrameOptimizationError` carrying the best frame when no restart
    reaches a stationary point.
    """
    if n_qubits < 1:
        raise ShapeError("need at least one qubit")
    if not 2 <= k <= MAX_STATES or k & (k - 1):
        raise ShapeError(f"k must be a power of two in [2, {MAX_STATES}], got {k}")
    dim = 2**n_qubits

    root = np.random.default_rng(seed)
    best: StateFrame | None = None
    converged = False
    for _ in range(n_restarts):
        rng = np.random.default_rng(root.integers(2**63))
        a, obj, history, stationary = _optimize_restart(rng, dim, k, max_iter, grad_tol)
        converged = converged or stationary
        if best is None or obj < best.objective:
            best = StateFrame(columns=a, objective=obj, history=tuple(history))
        if obj < 1e-9:  # orthogonal frame reached, cannot improve
            break
    if not converged:
        raise FrameOptimizationError(
            f"frame optimization did not converge in {n_restarts} restarts", best_frame=best
        )
    return best


def validate_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise InvalidStateError(f"expected a 2x2 density matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > _HERM_TOL:
        raise InvalidStateError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > _HERM_TOL:
        raise InvalidStateError("density matrix trace is not 1 within tolerance")
    w, v = np.linalg.eigh(rho)
    if np.min(w) < _PSD_TOL:
        raise InvalidStateError("density matrix has a significantly negative eigenvalue")
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def decode_group(rho: np.ndarray, frame: StateFrame) -> int:
    """Index of the frame state with the highest fidelity against ``rho``.

    Ties (within 1e-12) break to the lowest index.  Fidelity is invariant
    under global phases of the frame columns.
    """
    if frame.dim != 2:
        raise ShapeError("decode_group expects a single-qubit frame")
    rho = validate_density_matrix(rho)
    fid = np.einsum("ij,jk,ik->i", frame.columns.conj().T, rho, frame.columns.T).real
    return int(np.flatnonzero(fid >= fid.max() - 1e-12)[0])


def encode_key_groups(key: BitString, bits_per_group: int) -> list[int]:
    """Split a key MSB-first into frame indices."""
    if bits_per_group < 1 or len(key) % bits_per_group:
        raise ShapeError(
            f"key length {len(key)} not divisible by group size {bits_per_group}"
        )
    return [
        key.slice(i, i + bits_per_group).value
        for i in range(0, len(key), bits_per_group)
    ]


def decode_key_groups(indices, bits_per_group: int) -> BitString:
    """Inverse of :func:`encode_key_groups`."""
    out = BitString.zeros(0)
    for idx in indices:
        out = out.concat(BitString(int(idx), bits_per_group))
    return out


def save_frame(frame: StateFrame, path) -> None:
    """Text serialization: header line then one line per column entry."""
    with open(path, "w") as fh:
        fh.write(f"{frame.dim} {frame.k} {frame.objective!r}\n")
        for j in range(frame.k):
            for i in range(frame.dim):
                z = frame.columns[i, j]
                fh.write(f"{z.real!r} {z.imag!r}\n")


def load_frame(path) -> StateFrame:
    with open(path) as fh:
        dim, k, obj = fh.readline().split()
        dim, k = int(dim), int(k)
        cols = np.empty((dim, k), dtype=complex)
        for j in range(k):
            for i in range(dim):
                re, im = fh.readline().split()
                cols[i, j] = float(re) + 1j * float(im)
    return StateFrame(columns=cols, objective=float(obj))
