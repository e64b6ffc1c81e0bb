"""Matrix-product-state key search.

An MPS over one site per key bit is sampled for candidate keys; sweeps
merge neighboring site tensors, perturb the merged tensor, re-split by SVD,
keep or revert the move by the Metropolis rule on the Hamming cost, then
take one Adam step on the merged tensor driven by a two-sided
random-direction gradient estimate.  A gradient-norm threshold triggers a
full re-draw of the tensors to escape local minima.

Site tensors are real, shaped (left bond, physical=2, right bond), open
boundaries of dimension 1.  Bit k of a sampled key comes from site k,
MSB first.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from .bits import BitString
from .cost import AttackInstance
from .errors import InvalidStateError, ShapeError
from .optim import AdamState, metropolis_accept, rademacher

ISO_TOL = 1e-10


@dataclass
class SweepConfig:
    bond_dim: int = 1
    step_length: float = 1e-2
    steps: int = 1
    cutoff: float = 1e-8
    reset_value: float = 25.0
    temperature: float = 1.0
    max_iterations: int | None = None  # default 4 * 2^key_bits
    samples_per_update: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.bond_dim < 1:
            raise ShapeError("bond_dim must be >= 1")
        for name in ("step_length", "steps", "cutoff", "reset_value", "temperature"):
            if getattr(self, name) <= 0:
                raise ShapeError(f"{name} must be positive")


@dataclass
class MPSState:
    tensors: list  # rank-3 ndarrays (Dl, 2, Dr)
    canonical_form: Optional[str] = None  # None | "left" | "right"

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MPSState":
        return MPSState([t.copy() for t in self.tensors], self.canonical_form)

    def with_pair(self, site: int, left: np.ndarray, right: np.ndarray) -> "MPSState":
        """New state with one neighboring pair replaced (gauge flag wiped)."""
        tensors = list(self.tensors)
        tensors[site] = left
        tensors[site + 1] = right
        return MPSState(tensors, canonical_form=None)


def max_bond_profile(n_sites: int, bond_dim: int) -> list[int]:
    """Cap for each interior link: min(bond_dim, 2^i, 2^(n-i))."""
    return [
        min(bond_dim, 2 ** min(i, 40), 2 ** min(n_sites - i, 40))
        for i in range(1, n_sites)
    ]


def init_random(n_sites: int, bond_dim: int, rng) -> MPSState:
    """I.i.d. standard-normal tensors at the position-capped bond dims."""
    if n_sites < 1:
        raise ShapeError("need at least one site")
    dims = [1] + max_bond_profile(n_sites, bond_dim) + [1]
    tensors = [
        rng.standard_normal((dims[i], 2, dims[i + 1])) for i in range(n_sites)
    ]
    return MPSState(tensors)


def _split_left(mat: np.ndarray):
    """QR with non-negative R diagonal; SVD fallback if QR misbehaves."""
    q, r = np.linalg.qr(mat)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(r))):
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        return u, s[:, None] * vh
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs, r * signs[:, None]


def canonicalize(state: MPSState, direction: str) -> MPSState:
    """Gauge the chain into left or right canonical form, unit norm."""
    if direction not in ("left", "right"):
        raise ShapeError(f"direction must be 'left' or 'right', got {direction!r}")
    tensors = list(state.tensors)
    n = len(tensors)
    if direction == "left":
        carry = np.ones((1, 1))
        for k in range(n):
            t = np.tensordot(carry, tensors[k], axes=(1, 0))
            dl, dr = t.shape[0], t.shape[2]
            q, r = _split_left(t.reshape(dl * 2, dr))
            tensors[k] = q.reshape(dl, 2, q.shape[1])
            carry = r
    else:
        carry = np.ones((1, 1))
        for k in range(n - 1, -1, -1):
            t = np.tensordot(tensors[k], carry, axes=(2, 0))
            dl, dr = t.shape[0], t.shape[2]
            q, r = _split_left(t.reshape(dl, 2 * dr).T)
            tensors[k] = q.T.reshape(q.shape[1], 2, dr)
            carry = r.T
    norm = float(np.linalg.norm(carry))
    if norm < 1e-300:
        raise InvalidStateError("state has zero norm")
    return MPSState(tensors, canonical_form=direction)


def is_canonical(state: MPSState, direction: str, tol: float = ISO_TOL) -> bool:
    for t in state.tensors:
        if direction == "left":
            g = np.einsum("abc,abd->cd", t, t)
        else:
            g = np.einsum("abc,dbc->ad", t, t)
        if np.max(np.abs(g - np.eye(g.shape[0]))) > tol:
            return False
    return True


def sample_key(state: MPSState, rng) -> BitString:
    """Draw one bit string from the Born distribution of the state.

    Requires left-canonical form: the left environment of every suffix is
    then the identity, so bits are drawn site by site from the right.
    """
    if state.canonical_form != "left":
        raise InvalidStateError("sample_key needs a left-canonical state")
    n = state.n_sites
    bits = [0] * n
    tail = np.ones(1)
    for k in range(n - 1, -1, -1):
        v0 = state.tensors[k][:, 0, :] @ tail
        v1 = state.tensors[k][:, 1, :] @ tail
        w0 = float(v0 @ v0)
        w1 = float(v1 @ v1)
        total = w0 + w1
        if total <= 0.0:
            raise InvalidStateError("zero-norm conditional while sampling")
        bit = int(rng.random() < w1 / total)
        bits[k] = bit
        chosen = v1 if bit else v0
        tail = chosen / np.linalg.norm(chosen)
    return BitString.from_bits(bits)


def merge_pair(state: MPSState, site: int) -> np.ndarray:
    return np.tensordot(state.tensors[site], state.tensors[site + 1], axes=(2, 0))


def split_merged(merged: np.ndarray, bond_dim: int, cutoff: float):
    """SVD the (Dl,2,2,Dr) tensor back into two sites.

    Keeps at most ``bond_dim`` singular values and only those at least
    ``cutoff`` relative to the largest; the kept spectrum is renormalized
    so the split pair keeps unit Frobenius norm.  Returns
    (left tensor, right tensor, discarded weight).
    """
    dl, _, _, dr = merged.shape
    mat = merged.reshape(dl * 2, 2 * dr)
    try:
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * max(1.0, float(np.linalg.norm(mat)))
        u, s, vh = np.linalg.svd(
            mat + jitter * np.random.default_rng(0).standard_normal(mat.shape),
            full_matrices=False,
        )
    if s[0] <= 0.0:
        raise InvalidStateError("merged tensor is identically zero")
    keep = max(1, min(bond_dim, int(np.sum(s >= cutoff * s[0]))))
    discarded = float(np.sum(s[keep:] ** 2))
    s = s[:keep]
    s = s / np.linalg.norm(s)
    left = u[:, :keep].reshape(dl, 2, keep)
    right = (s[:, None] * vh[:keep]).reshape(keep, 2, dr)
    return left, right, discarded


def _sample_cost(state: MPSState, inst: AttackInstance, cfg: SweepConfig, rng, probe: bool = False):
    """Sample candidate key(s) from the state and return the best cost."""
    gauged = state if state.canonical_form == "left" else canonicalize(state, "left")
    best = None
    for _ in range(cfg.samples_per_update):
        key = sample_key(gauged, rng)
        cost, hit = inst.evaluate(key, probe=probe)
        if best is None or cost < best:
            best = cost
        if hit:
            break
    return best


def _budget_spent(inst: AttackInstance, cfg: SweepConfig) -> bool:
    budget = cfg.max_iterations or 4 * 2**inst.key_bits
    return inst.iterations >= budget


def merged_update(
    state: MPSState,
    site: int,
    inst: AttackInstance,
    cfg: SweepConfig,
    rng,
    adam: AdamState,
    ref_cost: int,
):
    """One perturb/accept/Adam cycle on the pair (site, site+1).

    All tensor replacements happen in the gauge of the incoming state, so
    the chain stays consistent; sampling internally gauges a copy.
    Returns (new state, accepted, cost) where cost is the candidate cost
    the Metropolis decision saw; the gradient norm of the Adam step is
    left in ``adam.last_grad_norm`` for the reset monitor.
    """
    if not 0 <= site < state.n_sites - 1:
        raise ShapeError(f"site {site} has no right neighbor")

    merged = merge_pair(state, site)

    # random move, normalized, then Metropolis on the sampled cost
    perturbed = merged + cfg.step_length * rng.standard_normal(merged.shape)
    perturbed /= np.linalg.norm(perturbed)
    cand = state.with_pair(site, *split_merged(perturbed, cfg.bond_dim, cfg.cutoff)[:2])
    cost = _sample_cost(cand, inst, cfg, rng)
    accepted = metropolis_accept(cost - ref_cost, cfg.temperature, rng)
    if accepted:
        state, merged = cand, perturbed
    if inst.solved or _budget_spent(inst, cfg):
        return state, accepted, cost

    # SPSA probe pair, one Adam step on the merged tensor
    c = cfg.step_length
    delta = rademacher(merged.shape, rng)
    probe_hi = state.with_pair(site, *split_merged(merged + c * delta, cfg.bond_dim, cfg.cutoff)[:2])
    f_plus = _sample_cost(probe_hi, inst, cfg, rng, probe=True)
    if inst.solved or _budget_spent(inst, cfg):
        return state, accepted, cost
    probe_lo = state.with_pair(site, *split_merged(merged - c * delta, cfg.bond_dim, cfg.cutoff)[:2])
    f_minus = _sample_cost(probe_lo, inst, cfg, rng, probe=True)
    grad = (f_plus - f_minus) / (2.0 * c) * delta
    updated = adam.step(merged, grad)
    updated /= np.linalg.norm(updated)
    state = state.with_pair(site, *split_merged(updated, cfg.bond_dim, cfg.cutoff)[:2])
    return state, accepted, cost


def _trace(sink: Optional[TextIO], **fields):
    if sink is not None:
        sink.write(json.dumps(fields) + "\n")


def run_mps_attack(
    inst: AttackInstance, cfg: SweepConfig, trace: Optional[TextIO] = None
) -> dict:
    """Alternate right-to-left and left-to-right sweeps until hit or budget.

    Returns a plain record dict (the bench harness wraps it); ``resets``
    counts tensor re-draws triggered by the gradient-norm monitor.
    """
    if inst.key_bits < 2:
        raise ShapeError("MPS attack needs a key of at least 2 bits")
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    n = inst.key_bits
    adams: dict[int, AdamState] = {}
    resets = 0

    state = canonicalize(init_random(n, cfg.bond_dim, rng), "left")
    right_to_left = True
    while not inst.solved and not _budget_spent(inst, cfg):
        ref_cost = _sample_cost(state, inst, cfg, rng)
        if inst.solved or _budget_spent(inst, cfg):
            break
        sites = range(n - 2, -1, -1) if right_to_left else range(n - 1)
        needs_reset = False
        for site in sites:
            adam = adams.setdefault(site, AdamState(lr=cfg.step_length))
            for _ in range(cfg.steps):
                state, accepted, cost = merged_update(state, site, inst, cfg, rng, adam, ref_cost)
                _trace(
                    trace,
                    iteration=inst.iterations,
                    site=site,
                    cost=cost,
                    accepted=accepted,
                    grad_norm=adam.last_grad_norm,
                    reset=False,
                )
                if accepted and cost < ref_cost:
                    ref_cost = cost
                if inst.solved or _budget_spent(inst, cfg):
                    break
                if adam.last_grad_norm > cfg.reset_value:
                    needs_reset = True
                    break
            if needs_reset or inst.solved or _budget_spent(inst, cfg):
                break
        if inst.solved or _budget_spent(inst, cfg):
            break
        if needs_reset:
            resets += 1
            adams.clear()
            state = canonicalize(init_random(n, cfg.bond_dim, rng), "left")
            _trace(trace, iteration=inst.iterations, site=None, cost=None,
                   accepted=None, grad_norm=None, reset=True)
            right_to_left = True
            continue
        right_to_left = not right_to_left
        state = canonicalize(state, "right" if not right_to_left else "left")

    return {
        "engine": "mps",
        "iterations": inst.iterations,
        "probe_evaluations": inst.probe_evaluations,
        "wall_time": time.perf_counter() - t0,
        "hit": inst.solved,
        "key": inst.solution,
        "resets": resets,
        "hyperparameters": {
            "bond_dim": cfg.bond_dim,
            "step_length": cfg.step_length,
            "steps": cfg.steps,
            "cutoff": cfg.cutoff,
            "reset_value": cfg.reset_value,
            "temperature": cfg.temperature,
            "samples_per_update": cfg.samples_per_update,
        },
    }
