"""Optimizer building blocks shared by the attack engines.

Adam with standard constants, a two-sided random-direction (SPSA) gradient
estimator for black-box integer costs, the Metropolis acceptance rule, and
the hyperspherical lift used by the variational attacks: the point
``[x_1..x_n, f(x)]`` is rewritten in spherical coordinates ``(theta_1..
theta_n, r)`` and the optimizer steps in angle/radius space to soften flat
gradient regions.
"""

from __future__ import annotations

import math

import numpy as np


class AdamState:
    """First/second moment accumulators for one parameter tensor."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.reset()

    def reset(self):
        self.t = 0
        self.m = None
        self.v = None
        self.last_grad_norm = 0.0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """One Adam update; reinitializes moments if the shape changed."""
        if self.m is None or self.m.shape != theta.shape:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
            self.t = 0
        self.t += 1
        self.last_grad_norm = float(np.linalg.norm(grad))
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def rademacher(shape, rng) -> np.ndarray:
    return rng.integers(0, 2, size=shape) * 2.0 - 1.0


def spsa_gradient(cost_fn, theta: np.ndarray, c: float, rng) -> np.ndarray:
    """Two-evaluation random-direction gradient estimate.

    ``g = [f(theta + c*delta) - f(theta - c*delta)] / (2c) * delta`` with
    ``delta`` a +-1 vector.  ``cost_fn`` is called exactly twice.
    """
    delta = rademacher(theta.shape, rng)
    f_plus = cost_fn(theta + c * delta)
    f_minus = cost_fn(theta - c * delta)
    return (f_plus - f_minus) / (2.0 * c) * delta


def metropolis_accept(delta_e: float, temperature: float, rng) -> bool:
    """Accept improving moves always, worsening ones with exp(-dE/T)."""
    if delta_e <= 0:
        return True
    if temperature <= 0:
        return False
    return rng.random() < math.exp(-delta_e / temperature)


def to_hyperspherical(x: np.ndarray, f: float) -> tuple[np.ndarray, float]:
    """Lift ``[x, f]`` to spherical coordinates ``(angles, r)``.

    Convention: ``r`` is the Euclidean norm of the lifted vector; angle k
    is ``arccos(v_k / ||v_{k:}||)`` for all but the last angle, which is
    ``atan2(v_last, v_secondlast)``.  At the origin all angles are 0.
    """
    v = np.append(np.asarray(x, dtype=float), float(f))
    m = v.size
    r = float(np.linalg.norm(v))
    angles = np.zeros(m - 1)
    if r == 0.0:
        return angles, 0.0
    for k in range(m - 2):
        tail = float(np.linalg.norm(v[k:]))
        if tail == 0.0:
            break  # remaining angles stay 0 by convention
        angles[k] = math.acos(min(1.0, max(-1.0, v[k] / tail)))
    angles[m - 2] = math.atan2(v[m - 1], v[m - 2])
    return angles, r


def from_hyperspherical(angles: np.ndarray, r: float) -> tuple[np.ndarray, float]:
    """Inverse of :func:`to_hyperspherical`; returns ``(x, f_coordinate)``."""
    angles = np.asarray(angles, dtype=float)
    m = angles.size + 1
    v = np.empty(m)
    prefix = r
    for k in range(m - 1):
        v[k] = prefix * math.cos(angles[k])
        prefix *= math.sin(angles[k])
    v[m - 1] = prefix
    return v[:-1], float(v[-1])
