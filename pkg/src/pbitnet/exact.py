"""Brute-force enumeration of small networks.

Energies use ``E = -1/2 m^T W m - h^T m`` (each symmetric pair counted once),
the normalisation under which ``P(m_i = +1 | rest) = (1 + tanh I_i)/2`` with
``I_i = h_i + sum_j W_ij m_j``. Probabilities follow ``P = exp(-E) / Z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .network import NetworkSpec, SpecError, _as_array, all_states

MAX_ENUMERATION_BITS = 24
# above this, tables are streamed in blocks unless probabilities are requested
_MATERIALIZE_BITS = 20
_BLOCK_BITS = 16


@dataclass
class EnergyTable:
    """Energy and Boltzmann probability of every configuration index.

    Configurations violating a clamp carry ``energy = inf`` and probability 0.
    """

    n: int
    energies: np.ndarray
    probabilities: np.ndarray
    logZ: float

    def marginal(self, order: Sequence[int]) -> np.ndarray:
        """Distribution over the sub-configuration indexed by ``order``."""
        order = list(order)
        idx = np.arange(1 << self.n, dtype=np.int64)
        sub = np.zeros_like(idx)
        for k in order:
            sub = (sub << 1) | ((idx >> (self.n - 1 - k)) & 1)
        return np.bincount(sub, weights=self.probabilities, minlength=1 << len(order))

    def expectation(self, fn) -> float:
        """Average of ``fn(states)`` (vectorised over rows) under the table."""
        states = all_states(self.n).astype(float)
        return float(np.dot(self.probabilities, fn(states)))


def energy(spec: NetworkSpec, state) -> float:
    """Energy of one configuration of a symmetric network."""
    _require_symmetric(spec)
    m = _as_array(state).astype(float)
    return float(-0.5 * m @ spec.W @ m - spec.h @ m)


def augmented_energy(spec: NetworkSpec, state) -> float:
    """Same energy with biases carried by an extra always-+1 p-bit.

    The augmented matrix has the bias vector as its last row and column; the
    result equals :func:`energy` exactly (the state-independent offset is zero).
    """
    _require_symmetric(spec)
    n = spec.n
    Wa = np.zeros((n + 1, n + 1))
    Wa[:n, :n] = spec.W
    Wa[:n, n] = Wa[n, :n] = spec.h
    m = np.append(_as_array(state).astype(float), 1.0)
    return float(-0.5 * m @ Wa @ m)


def _energies(W, h, states):
    s = states.astype(float)
    return -0.5 * np.einsum("ki,ij,kj->k", s, W, s) - s @ h


def _clamp_mask(spec, states):
    ok = np.ones(len(states), dtype=bool)
    for i, v in spec.clamps:
        ok &= states[:, i] == v
    return ok


def enumerate_states(spec: NetworkSpec) -> EnergyTable:
    """Exact Boltzmann table, conditioned on any clamps."""
    _require_symmetric(spec)
    if spec.n > MAX_ENUMERATION_BITS:
        raise SpecError(f"enumeration limited to {MAX_ENUMERATION_BITS} p-bits, got {spec.n}")
    W, h = np.asarray(spec.W), np.asarray(spec.h)
    n = spec.n
    if n <= _MATERIALIZE_BITS:
        states = all_states(n)
        E = _energies(W, h, states)
        E[~_clamp_mask(spec, states)] = np.inf
    else:
        E = np.empty(1 << n)
        for start, states in _blocks(n):
            e = _energies(W, h, states)
            e[~_clamp_mask(spec, states)] = np.inf
            E[start:start + len(states)] = e
    logZ = float(logsumexp(-E))
    P = np.exp(-E - logZ)
    return EnergyTable(n=n, energies=E, probabilities=P, logZ=logZ)


def log_partition(spec: NetworkSpec) -> float:
    """``log Z`` without materialising the full table."""
    _require_symmetric(spec)
    if spec.n > MAX_ENUMERATION_BITS:
        raise SpecError(f"enumeration limited to {MAX_ENUMERATION_BITS} p-bits, got {spec.n}")
    W, h = np.asarray(spec.W), np.asarray(spec.h)
    parts = []
    for _, states in _blocks(spec.n):
        e = _energies(W, h, states)
        e[~_clamp_mask(spec, states)] = np.inf
        parts.append(logsumexp(-e))
    return float(logsumexp(parts))


def _blocks(n):
    size = 1 << min(n, _BLOCK_BITS)
    total = 1 << n
    for start in range(0, total, size):
        idx = np.arange(start, start + size, dtype=np.int64)
        bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
        yield start, (2 * bits - 1).astype(np.int8)


def enumerate_directed(spec: NetworkSpec, order: Sequence[int]) -> np.ndarray:
    """Exact joint of a directed network, ``prod_i P(m_i | parents)``.

    ``W[i, j] != 0`` means ``j`` is a parent of ``i``; every parent must come
    before its child in ``order``. Indices of the result follow the p-bit
    numbering (p-bit 0 most significant). Clamps are treated as observed
    evidence and the result is the posterior given them.
    """
    order = list(order)
    if sorted(order) != list(range(spec.n)):
        raise SpecError("order must be a permutation of all p-bits")
    if spec.n > MAX_ENUMERATION_BITS:
        raise SpecError(f"enumeration limited to {MAX_ENUMERATION_BITS} p-bits")
    rank = {node: k for k, node in enumerate(order)}
    for i, j, w in spec.weights:
        if w != 0.0 and rank[j] >= rank[i]:
            raise SpecError(f"order is not topological: edge {j} -> {i}")
    states = all_states(spec.n).astype(float)
    fields = spec.h + states @ spec.W.T
    # P(m_i | I_i) = (1 + m_i tanh I_i) / 2
    cond = 0.5 * (1.0 + states * np.tanh(fields))
    P = np.prod(cond, axis=1)
    if spec.clamps:
        # clamps act as observed evidence
        P = np.where(_clamp_mask(spec, states), P, 0.0)
        P /= P.sum()
    return P


def kl_divergence(p_empirical, table) -> float:
    """``sum p log(p/q)`` over the support of ``p`` (``0 log 0 = 0``)."""
    p = np.asarray(p_empirical, dtype=float)
    q = table.probabilities if isinstance(table, EnergyTable) else np.asarray(table, float)
    if p.shape != q.shape:
        raise SpecError(f"length mismatch: {p.shape} vs {q.shape}")
    if np.any(p < 0):
        raise SpecError("empirical probabilities must be nonnegative")
    support = p > 0
    if np.any(q[support] <= 0):
        bad = np.flatnonzero(support & (q <= 0))
        raise SpecError(f"reference distribution is zero where p > 0 at indices {bad[:10].tolist()}")
    return float(np.sum(p[support] * np.log(p[support] / q[support])))


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = q.probabilities if isinstance(q, EnergyTable) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise SpecError(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def _require_symmetric(spec: NetworkSpec):
    if not spec.symmetric:
        raise SpecError("energy is only defined for symmetric networks")
    if spec.convention != "bipolar":
        raise SpecError("enumeration expects a bipolar-convention network")
