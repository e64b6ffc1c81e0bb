"""Variational key attacks on the flexible-network simulator backend.

Two flavors share one optimizer loop: the circuit form samples candidate
keys from a parameterized circuit (three-angle rotations, optional CNOT
ladder); the Hamiltonian form draws them from the approximate ground state
of a parameterized Hamiltonian built from the same gate family, reached by
imaginary time evolution.  Parameters are optimized with Adam on the
hyperspherical lift of (parameters, cost), with gradients from two-sided
random-direction probes; every probe costs one circuit simulation plus one
cipher evaluation.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .bits import BitString
from .cost import AttackInstance
from .errors import ShapeError
from .fpeps import (
    FlexNetState,
    SimConfig,
    apply_circuit,
    apply_one_body,
    imaginary_time_evolve,
    init_product,
    reduced_density_matrix,
    sample_bitstring,
)
from .frames import StateFrame, build_frame, decode_group, decode_key_groups
from .gates import H, P1, X, Y, Z
from .optim import AdamState, from_hyperspherical, rademacher, to_hyperspherical

RADIUS_FLOOR = 1e-6


@dataclass
class CircuitAnsatz:
    n_qubits: int
    n_layers: int = 1
    entangling: bool = False
    params: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 1:
            raise ShapeError("need at least one qubit and one layer")
        if self.params is None:
            self.params = np.zeros(self.param_count)
        self.params = np.asarray(self.params, dtype=float)
        if self.params.shape != (self.param_count,):
            raise ShapeError(
                f"expected {self.param_count} parameters, got {self.params.shape}"
            )

    @property
    def param_count(self) -> int:
        return 3 * self.n_qubits * self.n_layers


def build_circuit(ansatz: CircuitAnsatz, params: np.ndarray | None = None) -> list:
    """Gate records: per layer one rotation per qubit, then a CNOT ladder."""
    x = ansatz.params if params is None else np.asarray(params, dtype=float)
    circuit = []
    idx = 0
    for _ in range(ansatz.n_layers):
        for q in range(ansatz.n_qubits):
            circuit.append(("u3", (q,), tuple(x[idx : idx + 3])))
            idx += 3
        if ansatz.entangling:
            for q in range(ansatz.n_qubits - 1):
                circuit.append(("cnot", (q, q + 1)))
    return circuit


def simulate_circuit(ansatz: CircuitAnsatz, params: np.ndarray, cfg: SimConfig) -> FlexNetState:
    state = init_product(ansatz.n_qubits)
    return apply_circuit(state, build_circuit(ansatz, params), cfg)


def extract_key(state: FlexNetState, frame: StateFrame, n_groups: int) -> BitString:
    """Per-qubit fidelity decode, concatenated MSB-first."""
    if n_groups != state.n_qubits:
        raise ShapeError(f"expected {state.n_qubits} groups, got {n_groups}")
    if frame.dim != 2:
        raise ShapeError("key extraction uses single-qubit frames")
    indices = [
        decode_group(reduced_density_matrix(state, q), frame) for q in range(n_groups)
    ]
    return decode_key_groups(indices, frame.bits_per_group)


@dataclass
class VariationalConfig:
    learning_rate: float = 4.0
    n_layers: int = 1
    entangling: bool = False
    bits_per_qubit: int = 2
    max_iterations: int | None = None  # default 4 * 2^key_bits
    chi: int = 16
    kappa: int = 4
    tau: float = 0.3  # imaginary-time step (Hamiltonian form)
    n_time_steps: int = 12  # imaginary-time steps per evaluation
    init_scale: float = np.pi  # uniform(0, init_scale) initial parameters
    stall_restart: int = 50  # re-draw params after this many steps without progress
    seed: int = 0

    @property
    def spsa_c(self) -> float:
        return 0.1 * self.learning_rate

    def sim_config(self) -> SimConfig:
        return SimConfig(chi=self.chi, kappa=self.kappa, seed=self.seed)


def _budget(inst: AttackInstance, cfg: VariationalConfig) -> int:
    return cfg.max_iterations or 4 * 2**inst.key_bits


def _trace(sink, **fields):
    if sink is not None:
        sink.write(json.dumps(fields) + "\n")


class _HypersphericalOptimizer:
    """Adam over the lifted (angles, radius) coordinates.

    The probe step starts at 0.1 * learning rate and grows while probe
    pairs land on equal costs (no decode boundary inside the probe ball),
    snapping back once a difference is seen; integer-valued costs make
    flat probe pairs common, and a fixed step would sit inside one
    plateau indefinitely.
    """

    GROWTH = 1.5
    MAX_STEP = 4.0

    def __init__(self, cfg: VariationalConfig):
        self.adam = AdamState(lr=cfg.learning_rate)
        self.c0 = cfg.spsa_c
        self.c = cfg.spsa_c

    def step(self, params: np.ndarray, cost: float, probe_cost, rng) -> np.ndarray:
        """One SPSA + Adam update; returns the new Cartesian parameters.

        ``probe_cost(params) -> cost`` is charged to the caller's budget.
        """
        angles, r = to_hyperspherical(params, cost)
        lifted = np.append(angles, r)
        delta = rademacher(lifted.shape, rng)
        hi = lifted + self.c * delta
        lo = lifted - self.c * delta
        f_plus = probe_cost(from_hyperspherical(hi[:-1], max(hi[-1], RADIUS_FLOOR))[0])
        if f_plus is None:
            return params
        f_minus = probe_cost(from_hyperspherical(lo[:-1], max(lo[-1], RADIUS_FLOOR))[0])
        if f_minus is None:
            return params
        grad = (f_plus - f_minus) / (2.0 * self.c) * delta
        if f_plus == f_minus:
            self.c = min(self.c * self.GROWTH, self.MAX_STEP)
        else:
            self.c = self.c0
        lifted = self.adam.step(lifted, grad)
        lifted[-1] = max(lifted[-1], RADIUS_FLOOR)
        new_params, _ = from_hyperspherical(lifted[:-1], lifted[-1])
        return new_params

    @property
    def last_grad_norm(self) -> float:
        return self.adam.last_grad_norm


def vqaa_step(
    ansatz: CircuitAnsatz,
    inst: AttackInstance,
    frame: StateFrame,
    opt: _HypersphericalOptimizer,
    cfg: VariationalConfig,
    rng,
) -> tuple[np.ndarray, int, bool]:
    """Evaluate the current parameters, then one optimizer update.

    Returns (updated params, cost, hit); skips the update once the key is
    found or the budget is exhausted.
    """
    sim_cfg = cfg.sim_config()

    def candidate_cost(params) -> int | None:
        if inst.solved or inst.iterations >= _budget(inst, cfg):
            return None
        state = simulate_circuit(ansatz, params, sim_cfg)
        key = extract_key(state, frame, ansatz.n_qubits)
        cost, _ = inst.evaluate(key, probe=True)
        return cost

    state = simulate_circuit(ansatz, ansatz.params, sim_cfg)
    key = extract_key(state, frame, ansatz.n_qubits)
    cost, hit = inst.evaluate(key)
    if hit or inst.iterations >= _budget(inst, cfg):
        return ansatz.params, cost, hit
    new_params = opt.step(ansatz.params, cost, candidate_cost, rng)
    return new_params, cost, False


def _record(engine: str, inst: AttackInstance, t0: float, cfg: VariationalConfig, extra: dict) -> dict:
    return {
        "engine": engine,
        "iterations": inst.iterations,
        "probe_evaluations": inst.probe_evaluations,
        "wall_time": time.perf_counter() - t0,
        "hit": inst.solved,
        "key": inst.solution,
        "resets": 0,
        "hyperparameters": {
            "learning_rate": cfg.learning_rate,
            "n_layers": cfg.n_layers,
            "entangling": cfg.entangling,
            "bits_per_qubit": cfg.bits_per_qubit,
            "chi": cfg.chi,
            "kappa": cfg.kappa,
            **extra,
        },
    }


def _check_grouping(inst: AttackInstance, cfg: VariationalConfig) -> int:
    if inst.key_bits % cfg.bits_per_qubit:
        raise ShapeError(
            f"{inst.key_bits}-bit key not divisible into {cfg.bits_per_qubit}-bit groups"
        )
    return inst.key_bits // cfg.bits_per_qubit


def run_vqaa(
    inst: AttackInstance,
    cfg: VariationalConfig,
    frame: StateFrame | None = None,
    ansatz: CircuitAnsatz | None = None,
    trace=None,
) -> dict:
    """Circuit-form attack: simulate, extract, evaluate, update, repeat."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    n_qubits = _check_grouping(inst, cfg)
    if frame is None:
        frame = build_frame(1, 2**cfg.bits_per_qubit, seed=cfg.seed)
    if ansatz is None:
        ansatz = CircuitAnsatz(
            n_qubits,
            cfg.n_layers,
            cfg.entangling,
            rng.uniform(0.0, cfg.init_scale, 3 * n_qubits * cfg.n_layers),
        )
    opt = _HypersphericalOptimizer(cfg)
    resets = 0
    best_cost = None
    stalled_steps = 0
    while not inst.solved and inst.iterations < _budget(inst, cfg):
        new_params, cost, hit = vqaa_step(ansatz, inst, frame, opt, cfg, rng)
        ansatz.params = new_params
        # local-minimum monitor: re-draw when the best seen cost has not
        # improved for a while, like the sweep engine's parameter reset
        if best_cost is None or cost < best_cost:
            best_cost = cost
            stalled_steps = 0
        else:
            stalled_steps += 1
        restarting = cfg.stall_restart and stalled_steps >= cfg.stall_restart
        _trace(trace, iteration=inst.iterations, site=None, cost=cost,
               accepted=None, grad_norm=opt.last_grad_norm, reset=bool(restarting))
        if restarting and not inst.solved:
            ansatz.params = rng.uniform(0.0, cfg.init_scale, ansatz.param_count)
            opt = _HypersphericalOptimizer(cfg)
            best_cost = None
            stalled_steps = 0
            resets += 1
    record = _record("vqaa", inst, t0, cfg, {"frame_k": frame.k})
    record["resets"] = resets
    return record


@dataclass
class HamiltonianAnsatz:
    """One- and two-body Hermitian generators mirroring the circuit family.

    One-body terms span {X, Y, Z} with three coefficients per qubit; the
    two-body terms are the projector-controlled-Z generators of the CNOT
    ladder, one shared coefficient per adjacent pair.
    """

    n_qubits: int
    entangling: bool = False

    @property
    def param_count(self) -> int:
        return 3 * self.n_qubits + (self.n_qubits - 1 if self.entangling else 0)

    def terms(self, params: np.ndarray) -> list:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.param_count,):
            raise ShapeError(f"expected {self.param_count} parameters")
        out = []
        for q in range(self.n_qubits):
            a, b, c = params[3 * q : 3 * q + 3]
            out.append(((q,), a * X + b * Y + c * Z))
        if self.entangling:
            offset = 3 * self.n_qubits
            for q in range(self.n_qubits - 1):
                out.append(((q, q + 1), params[offset + q] * np.kron(P1, Z)))
        return out


def _ground_state(h: HamiltonianAnsatz, params: np.ndarray, cfg: VariationalConfig) -> FlexNetState:
    state = init_product(h.n_qubits)
    for q in range(h.n_qubits):  # uniform start overlaps every basis state
        apply_one_body(state, q, H)
    return imaginary_time_evolve(state, h.terms(params), cfg.tau, cfg.n_time_steps, cfg.sim_config())


def run_vqaah(
    inst: AttackInstance,
    cfg: VariationalConfig,
    frame: StateFrame | None = None,
    hamiltonian: HamiltonianAnsatz | None = None,
    trace=None,
) -> dict:
    """Hamiltonian-form attack: ground-state sampling plus the same loop.

    With one bit per qubit (frame k=2) keys are drawn by sampling the
    evolved state; larger groups decode through per-qubit fidelities.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    n_qubits = _check_grouping(inst, cfg)
    if frame is None:
        frame = build_frame(1, 2**cfg.bits_per_qubit, seed=cfg.seed)
    if hamiltonian is None:
        hamiltonian = HamiltonianAnsatz(n_qubits, cfg.entangling)
    params = rng.uniform(-1.0, 1.0, hamiltonian.param_count)
    opt = _HypersphericalOptimizer(cfg)

    def key_from(state: FlexNetState) -> BitString:
        if frame.k == 2:
            return sample_bitstring(state, rng)
        return extract_key(state, frame, n_qubits)

    def candidate_cost(p) -> int | None:
        if inst.solved or inst.iterations >= _budget(inst, cfg):
            return None
        cost, _ = inst.evaluate(key_from(_ground_state(hamiltonian, p, cfg)), probe=True)
        return cost

    while not inst.solved and inst.iterations < _budget(inst, cfg):
        cost, hit = inst.evaluate(key_from(_ground_state(hamiltonian, params, cfg)))
        _trace(trace, iteration=inst.iterations, site=None, cost=cost,
               accepted=None, grad_norm=opt.last_grad_norm, reset=False)
        if hit or inst.iterations >= _budget(inst, cfg):
            break
        params = opt.step(params, cost, candidate_cost, rng)
    return _record("vqaah", inst, t0, cfg, {"frame_k": frame.k, "tau": cfg.tau, "n_time_steps": cfg.n_time_steps})