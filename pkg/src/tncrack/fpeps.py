"""Flexible-geometry tensor-network circuit simulator.

Each qubit carries a vertex tensor (physical axis first, one virtual axis
per incident edge); each edge carries a vector of descending nonnegative
singular values normalized to unit square sum.  Two-body gates use the
simple-update scheme: absorb neighboring edge weights, contract the gate,
split by SVD, truncate to the ``chi`` largest values, restore the
environment.  Whenever a vertex exceeds the degree cap ``kappa``, its
incident edge with the lowest bond entanglement entropy is removed by
rank-1 truncation.

Plain reduced density matrices use the local mean-field environment
(neighbors enter via their weight-adjusted identities).  Sampling and
norms contract exactly over spanning trees (messages), so tree and
product networks sample the Born distribution exactly; edges closing a
loop fall back to the mean-field closure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .bits import BitString
from .errors import EdgeNotFoundError, InvalidGateError, InvalidStateError, ShapeError
from .gates import is_unitary, resolve_gate

_LAMBDA_FLOOR = 1e-300


@dataclass
class SimConfig:
    chi: int = 16
    kappa: int = 4
    svd_cutoff: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.chi < 1 or self.kappa < 1:
            raise ShapeError("chi and kappa must be >= 1")


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _scale_axis(t: np.ndarray, axis: int, w: np.ndarray) -> np.ndarray:
    shape = [1] * t.ndim
    shape[axis] = w.size
    return t * w.reshape(shape)


class FlexNetState:
    """Mutable network state; one instance per simulation."""

    def __init__(self, n_qubits: int):
        if n_qubits < 1:
            raise ShapeError("need at least one qubit")
        self.n_qubits = n_qubits
        self.tensors = {q: np.array([1.0, 0.0], dtype=complex) for q in range(n_qubits)}
        self.axes = {q: [] for q in range(n_qubits)}  # neighbor id per virtual axis
        self.lambdas: dict[tuple[int, int], np.ndarray] = {}

    # -- structure helpers -------------------------------------------------

    def degree(self, q: int) -> int:
        return len(self.axes[q])

    def neighbors(self, q: int) -> list[int]:
        return list(self.axes[q])

    def has_edge(self, i: int, j: int) -> bool:
        return _edge(i, j) in self.lambdas

    def edge_weights(self, i: int, j: int) -> np.ndarray:
        try:
            return self.lambdas[_edge(i, j)]
        except KeyError:
            raise EdgeNotFoundError(f"no edge between {i} and {j}") from None

    def _axis_of(self, q: int, other: int) -> int:
        return self.axes[q].index(other) + 1  # +1 for the physical axis

    def _check_qubit(self, q: int):
        if q not in self.tensors:
            raise ShapeError(f"qubit {q} not in network")

    def _env_absorbed(self, q: int, skip: int | None = None) -> np.ndarray:
        """Vertex tensor with each incident edge weight multiplied in."""
        t = self.tensors[q]
        for ax, other in enumerate(self.axes[q]):
            if other == skip:
                continue
            t = _scale_axis(t, ax + 1, self.lambdas[_edge(q, other)])
        return t

    def _local_norm(self, q: int) -> float:
        t = self._env_absorbed(q)
        return float(np.linalg.norm(t))

    def copy(self) -> "FlexNetState":
        out = FlexNetState(self.n_qubits)
        out.tensors = {q: t.copy() for q, t in self.tensors.items()}
        out.axes = {q: list(a) for q, a in self.axes.items()}
        out.lambdas = {e: w.copy() for e, w in self.lambdas.items()}
        return out


def init_product(n_qubits: int) -> FlexNetState:
    """All qubits in the zero state, no virtual bonds."""
    return FlexNetState(n_qubits)


def apply_one_body(state: FlexNetState, q: int, gate: np.ndarray, *, allow_nonunitary: bool = False) -> FlexNetState:
    """Exact local update of one vertex tensor."""
    state._check_qubit(q)
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise InvalidGateError(f"one-body gate must be 2x2, got {gate.shape}")
    if not allow_nonunitary and not is_unitary(gate):
        raise InvalidGateError("one-body gate is not unitary")
    state.tensors[q] = np.tensordot(gate, state.tensors[q], axes=(1, 0))
    if allow_nonunitary:
        n = state._local_norm(q)
        if n < 1e-300:
            raise InvalidStateError("operator annihilated the local state")
        state.tensors[q] = state.tensors[q] / n
    return state


def _ensure_edge(state: FlexNetState, i: int, j: int):
    if state.has_edge(i, j):
        return
    state.tensors[i] = state.tensors[i][..., None]
    state.axes[i].append(j)
    state.tensors[j] = state.tensors[j][..., None]
    state.axes[j].append(i)
    state.lambdas[_edge(i, j)] = np.array([1.0])


def apply_two_body(
    state: FlexNetState,
    i: int,
    j: int,
    gate: np.ndarray,
    cfg: SimConfig,
    *,
    allow_nonunitary: bool = False,
) -> FlexNetState:
    """Simple update with chi-truncation, then the degree-cap check."""
    state._check_qubit(i)
    state._check_qubit(j)
    if i == j:
        raise ShapeError("two-body gate needs two distinct qubits")
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4):
        raise InvalidGateError(f"two-body gate must be 4x4, got {gate.shape}")
    if not allow_nonunitary and not is_unitary(gate):
        raise InvalidGateError("two-body gate is not unitary")

    _ensure_edge(state, i, j)
    rest_i = [n for n in state.axes[i] if n != j]
    rest_j = [n for n in state.axes[j] if n != i]

    a = state._env_absorbed(i)  # includes lambda_ij on the j axis
    b = state._env_absorbed(j, skip=i)
    a = np.moveaxis(a, state._axis_of(i, j), -1)
    b = np.moveaxis(b, state._axis_of(j, i), 1)
    theta = np.tensordot(a, b, axes=(-1, 1))  # [pi, rest_i..., pj, rest_j...]

    g = gate.reshape(2, 2, 2, 2)  # [pi', pj', pi, pj]
    theta = np.tensordot(g, theta, axes=([2, 3], [0, 1 + len(rest_i)]))
    theta = np.moveaxis(theta, 1, 1 + len(rest_i))  # [pi', rest_i..., pj', rest_j...]

    dims_i = theta.shape[: 1 + len(rest_i)]
    dims_j = theta.shape[1 + len(rest_i) :]
    mat = theta.reshape(int(np.prod(dims_i)), int(np.prod(dims_j)))
    try:
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * max(1.0, float(np.linalg.norm(mat)))
        u, s, vh = np.linalg.svd(
            mat + jitter * np.random.default_rng(cfg.seed).standard_normal(mat.shape),
            full_matrices=False,
        )
    if s[0] <= 0.0:
        raise InvalidStateError("gate annihilated the two-site block")
    keep = max(1, min(cfg.chi, int(np.sum(s >= cfg.svd_cutoff * s[0]))))
    kept_norm = float(np.linalg.norm(s[:keep]))
    lam = s[:keep] / kept_norm

    new_i = u[:, :keep].reshape(*dims_i, keep)
    new_j = np.moveaxis(vh[:keep].reshape(keep, *dims_j), 0, 1)
    if allow_nonunitary:
        # imaginary-time path renormalizes instead of preserving the norm
        scale = 1.0
    else:
        scale = math.sqrt(kept_norm)
    new_i = new_i * scale
    new_j = new_j * scale

    # restore the absorbed environment weights
    for ax, other in enumerate(rest_i):
        w = state.lambdas[_edge(i, other)]
        new_i = _scale_axis(new_i, ax + 1, 1.0 / np.maximum(w, _LAMBDA_FLOOR))
    for ax, other in enumerate(rest_j):
        w = state.lambdas[_edge(j, other)]
        new_j = _scale_axis(new_j, ax + 2, 1.0 / np.maximum(w, _LAMBDA_FLOOR))

    state.tensors[i] = new_i
    state.axes[i] = rest_i + [j]
    state.tensors[j] = new_j
    state.axes[j] = [i] + rest_j
    state.lambdas[_edge(i, j)] = lam
    if allow_nonunitary:
        for q in (i, j):
            n = state._local_norm(q)
            if n < 1e-300:
                raise InvalidStateError("operator annihilated the local state")
            state.tensors[q] = state.tensors[q] / n

    for q in sorted((i, j)):
        if state.degree(q) > cfg.kappa:
            enforce_degree_cap(state, q, cfg)
    return state


def bond_entropy(state: FlexNetState, i: int, j: int) -> float:
    """Von Neumann entropy of the edge's normalized squared weights."""
    lam = state.edge_weights(i, j)
    p = lam**2
    p = p[p > 0]
    p = p / p.sum()
    return float(-np.sum(p * np.log(p)))


def delete_edge(state: FlexNetState, i: int, j: int):
    """Rank-1 truncate the edge and remove it from the network.

    Keeps only the leading weight, absorbing its square root into both
    endpoint tensors; exact when the edge already has rank 1.
    """
    lam = state.edge_weights(i, j)
    w0 = float(lam[0])
    for q, other in ((i, j), (j, i)):
        ax = state._axis_of(q, other)
        t = np.take(state.tensors[q], 0, axis=ax)
        state.tensors[q] = t * math.sqrt(w0)
        state.axes[q].remove(other)
    del state.lambdas[_edge(i, j)]


def enforce_degree_cap(state: FlexNetState, vertex: int, cfg: SimConfig) -> FlexNetState:
    """Delete lowest-entropy incident edges until the degree cap holds.

    Ties break to the lexicographically smallest (min id, max id) pair.
    """
    while state.degree(vertex) > cfg.kappa:
        best = None
        for other in state.neighbors(vertex):
            key = (bond_entropy(state, vertex, other), _edge(vertex, other))
            if best is None or key < best:
                best = key
        delete_edge(state, *best[1])
    return state


# -- contraction ----------------------------------------------------------


def reduced_density_matrix(state: FlexNetState, q: int) -> np.ndarray:
    """Single-qubit density matrix from the local mean-field environment.

    Exact on trees and products in the gauge simple update maintains.
    """
    state._check_qubit(q)
    t = state._env_absorbed(q)
    flat = t.reshape(2, -1)
    rho = flat @ flat.conj().T
    tr = float(np.trace(rho).real)
    if tr < 1e-300:
        raise InvalidStateError("zero-norm local state")
    return rho / tr


def _message(state: FlexNetState, src: int, dst: int, msgs: dict, active: frozenset) -> np.ndarray:
    """Doubled-layer environment message src -> dst; exact over trees.

    The weight vector of edge (src, dst) is absorbed on the src side, once
    for the ket and once for the bra layer, so receivers never reapply it.
    An edge that closes a loop back onto the current path is folded in
    with the mean-field closure (its ket and bra legs traced through
    ``diag(weights)``).
    """
    key = (src, dst)
    if key in msgs:
        return msgs[key]
    active = active | {key, (dst, src)}
    t = _scale_axis(
        state.tensors[src], state._axis_of(src, dst), state.lambdas[_edge(src, dst)]
    )
    ket_labels = list(range(t.ndim))
    bra_labels = [0] * t.ndim
    next_label = t.ndim
    extra_ops: list = []
    out = None
    for ax, other in enumerate(state.axes[src]):
        if other == dst:
            bra_labels[ax + 1] = next_label
            out = [ax + 1, next_label]
            next_label += 1
        elif (src, other) in active:
            w = state.lambdas[_edge(src, other)]
            bra_labels[ax + 1] = next_label
            extra_ops.extend([np.diag(w).astype(complex), [ax + 1, next_label]])
            next_label += 1
        else:
            m = _message(state, other, src, msgs, active)
            bra_labels[ax + 1] = next_label
            extra_ops.extend([m, [ax + 1, next_label]])
            next_label += 1
    ops = [t, ket_labels, t.conj(), bra_labels, *extra_ops]
    result = np.einsum(*ops, out)
    msgs[key] = result
    return result


def _local_rho_exact(state: FlexNetState, q: int, msgs: dict | None = None) -> tuple[np.ndarray, float]:
    """Unnormalized 2x2 local density matrix with tree-exact environments."""
    t = state.tensors[q]
    if msgs is None:
        msgs = {}
    ket_labels = list(range(t.ndim))
    bra_labels = [t.ndim] + [0] * (t.ndim - 1)
    next_label = t.ndim + 1
    extra_ops: list = []
    for ax, other in enumerate(state.axes[q]):
        m = _message(state, other, q, msgs, frozenset())
        bra_labels[ax + 1] = next_label
        extra_ops.extend([m, [ax + 1, next_label]])
        next_label += 1
    ops = [t, ket_labels, t.conj(), bra_labels, *extra_ops]
    rho = np.einsum(*ops, [0, t.ndim])
    tr = float(np.trace(rho).real)
    return rho, tr


def sample_bitstring(state: FlexNetState, rng, flags: list | None = None) -> BitString:
    """Sequential conditional sampling in qubit-id order.

    Projects each drawn qubit before moving on; exact Born sampling on
    forests.  A zero-norm conditional falls back to a uniform bit and is
    recorded in ``flags`` when a list is supplied.
    """
    work = state.copy()
    bits = []
    for q in range(work.n_qubits):
        rho, tr = _local_rho_exact(work, q)
        if tr <= 1e-280:
            bit = int(rng.random() < 0.5)
            if flags is not None:
                flags.append(q)
        else:
            p1 = float(rho[1, 1].real) / tr
            bit = int(rng.random() < min(1.0, max(0.0, p1)))
        bits.append(bit)
        proj = work.tensors[q].copy()
        proj[1 - bit] = 0.0
        nrm = np.linalg.norm(proj)
        if nrm > 1e-300:
            proj = proj / nrm
        work.tensors[q] = proj
    return BitString.from_bits(bits)


def _check_hermitian(m: np.ndarray):
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise InvalidGateError("Hamiltonian term is not Hermitian")


def imaginary_time_evolve(
    state: FlexNetState,
    hamiltonian: list,
    tau: float,
    n_steps: int,
    cfg: SimConfig,
) -> FlexNetState:
    """Apply ``exp(-tau * term)`` for every term, ``n_steps`` times.

    ``hamiltonian`` is a list of ``(qubit_ids, hermitian_matrix)`` pairs
    with one or two qubit ids each.  The state is renormalized after
    every application.
    """
    if tau <= 0:
        raise ShapeError("tau must be positive")
    ops = []
    for qubits, mat in hamiltonian:
        qubits = tuple(qubits)
        mat = np.asarray(mat, dtype=complex)
        if len(qubits) not in (1, 2):
            raise ShapeError(f"terms must touch 1 or 2 qubits, got {qubits}")
        expected = 2 ** len(qubits)
        if mat.shape != (expected, expected):
            raise ShapeError(f"term on {qubits} must be {expected}x{expected}")
        _check_hermitian(mat)
        w, v = np.linalg.eigh(mat)
        ops.append((qubits, (v * np.exp(-tau * w)) @ v.conj().T))
    for _ in range(n_steps):
        for qubits, op in ops:
            if len(qubits) == 1:
                apply_one_body(state, qubits[0], op, allow_nonunitary=True)
            else:
                apply_two_body(state, qubits[0], qubits[1], op, cfg, allow_nonunitary=True)
    return state


def reduced_density_matrix_pair(state: FlexNetState, i: int, j: int) -> np.ndarray:
    """Two-qubit joint density matrix, normalized.

    Exact on trees when the pair shares an edge; non-adjacent pairs fall
    back to the product of single-qubit matrices (mean-field).
    """
    msgs: dict = {}

    def half(q: int, partner: int) -> np.ndarray:
        t = state.tensors[q]
        ket_labels = list(range(t.ndim))
        bra_labels = [t.ndim] + [0] * (t.ndim - 1)
        label = t.ndim + 1
        extra_ops: list = []
        partner_pair = None
        for ax, other in enumerate(state.axes[q]):
            bra_labels[ax + 1] = label
            if other == partner:
                partner_pair = (ax + 1, label)
            else:
                m = _message(state, other, q, msgs, frozenset({(partner, q), (q, partner)}))
                extra_ops.extend([m, [ax + 1, label]])
            label += 1
        ops = [t, ket_labels, t.conj(), bra_labels, *extra_ops]
        return np.einsum(*ops, [0, t.ndim, partner_pair[0], partner_pair[1]])

    if state.has_edge(i, j):
        lam = state.lambdas[_edge(i, j)]
        bi = half(i, j)  # [p, p', bond_ket, bond_bra]
        bi = (bi * lam[None, None, :, None]) * lam[None, None, None, :]
        bj = half(j, i)
        rho = np.einsum("abkl,cdkl->acbd", bi, bj).reshape(4, 4)
    else:
        rho = np.kron(reduced_density_matrix(state, i), reduced_density_matrix(state, j))
    tr = float(np.trace(rho).real)
    if tr < 1e-300:
        raise InvalidStateError("zero-norm pair state")
    return rho / tr


def energy_expectation(state: FlexNetState, hamiltonian: list) -> float:
    """Sum of term expectations under the network's environments."""
    total = 0.0
    for qubits, mat in hamiltonian:
        qubits = tuple(qubits)
        mat = np.asarray(mat, dtype=complex)
        if len(qubits) == 1:
            rho = reduced_density_matrix(state, qubits[0])
        else:
            rho = reduced_density_matrix_pair(state, qubits[0], qubits[1])
        total += float(np.trace(rho @ mat).real)
    return total


def to_statevector(state: FlexNetState, max_qubits: int = 12) -> np.ndarray:
    """Exact contraction to a dense vector, for debugging and small tests."""
    n = state.n_qubits
    if n > max_qubits:
        raise ShapeError(f"refusing dense contraction beyond {max_qubits} qubits")
    # absorb each edge weight into its lower-id endpoint, then contract
    edge_labels = {e: n + idx for idx, e in enumerate(state.lambdas)}
    ops = []
    for q in range(n):
        t = state.tensors[q]
        labels = [q]
        for ax, other in enumerate(state.axes[q]):
            e = _edge(q, other)
            if q == e[0]:
                t = _scale_axis(t, ax + 1, state.lambdas[e])
            labels.append(edge_labels[e])
        ops.extend([t, labels])
    vec = np.einsum(*ops, list(range(n)), optimize=True)
    return vec.reshape(-1)


def apply_circuit(state: FlexNetState, circuit: list, cfg: SimConfig) -> FlexNetState:
    """Run a list of (gate-name, qubit ids, parameters) records."""
    for name, qubits, *rest in circuit:
        params = rest[0] if rest else ()
        mat, arity = resolve_gate(name, params)
        if arity == 1:
            apply_one_body(state, qubits[0], mat)
        else:
            apply_two_body(state, qubits[0], qubits[1], mat, cfg)
    return state


def network_dump(state: FlexNetState) -> str:
    """JSON snapshot: adjacency, tensor shapes, edge spectra."""
    doc = {
        "n_qubits": state.n_qubits,
        "edges": [
            {"i": e[0], "j": e[1], "weights": [float(x) for x in w]}
            for e, w in sorted(state.lambdas.items())
        ],
        "tensors": {str(q): list(state.tensors[q].shape) for q in range(state.n_qubits)},
        "adjacency": {str(q): state.neighbors(q) for q in range(state.n_qubits)},
    }
    return json.dumps(doc, indent=2)
