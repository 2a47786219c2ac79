"""Directed (genetic) networks with time-averaged correlations, and a small
bipolar restricted Boltzmann machine trained by contrastive divergence."""

from __future__ import annotations

from dataclasses import dataclass, replace
from graphlib import CycleError, TopologicalSorter
from typing import Sequence

import numpy as np

from .exact import enumerate_directed, enumerate_states, kl_divergence
from .network import (NetworkSpec, SampleTrace, SpecError, UpdateSchedule, all_states,
                      make_rng, run_chain)

# Family tree: C1, C2 are children of F1, M1; C3, C4 of F2, M2; M1 and F2 are
# siblings with parents GF1, GM1.
FAMILY_TREE = (
    ("GF1", "M1"), ("GM1", "M1"), ("GF1", "F2"), ("GM1", "F2"),
    ("F1", "C1"), ("M1", "C1"), ("F1", "C2"), ("M1", "C2"),
    ("F2", "C3"), ("M2", "C3"), ("F2", "C4"), ("M2", "C4"),
)


@dataclass(frozen=True)
class CorrelationRequest:
    pairs: tuple
    window: int

    def __post_init__(self):
        if self.window < 1:
            raise SpecError("window must be >= 1")
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))


def correlate(trace: SampleTrace, req: CorrelationRequest) -> np.ndarray:
    """Time average of ``m_i(t) m_j(t)`` over the last ``req.window`` records."""
    if req.window > len(trace):
        raise SpecError(f"window {req.window} exceeds trace length {len(trace)}")
    n = trace.states.shape[1]
    for i, j in req.pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise SpecError(f"pair ({i}, {j}) out of range")
    tail = trace.states[-req.window:].astype(np.int64)
    return np.array([np.mean(tail[:, i] * tail[:, j]) for i, j in req.pairs])


def build_genetic_network(tree: Sequence, w: float = 2.0,
                          nodes: Sequence[str] | None = None) -> NetworkSpec:
    """Directed network with weight ``w`` on every parent -> child edge.

    p-bits are numbered in a topological order, so a sequential scan over
    indices is an ancestral (parent-to-child) pass.
    """
    ts = TopologicalSorter()
    for name in nodes or ():
        ts.add(name)
    parents = {}
    for parent, child in tree:
        parents.setdefault(child, []).append(parent)
        ts.add(child, parent)
    for child, ps in parents.items():
        if len(ps) > 2:
            raise SpecError(f"{child} has {len(ps)} parents; at most 2 allowed")
        if len(set(ps)) != len(ps):
            raise SpecError(f"duplicate edge into {child}")
    try:
        order = list(ts.static_order())
    except CycleError as exc:
        raise SpecError(f"cycle detected: {exc.args[1]}") from None
    if not order:
        raise SpecError("empty network: supply edges or nodes")
    index = {name: k for k, name in enumerate(order)}
    weights = [(index[c], index[p], w) for c, ps in parents.items() for p in ps]
    return NetworkSpec(n=len(order), weights=tuple(weights), symmetric=False,
                       labels=tuple(order))


def directed_correlations(spec: NetworkSpec, pairs) -> np.ndarray:
    """Exact ``<m_i m_j>`` of a directed network from its joint distribution."""
    P = enumerate_directed(spec, range(spec.n))
    states = all_states(spec.n).astype(float)
    return np.array([P @ (states[:, i] * states[:, j]) for i, j in pairs])


def sample_genetic(spec: NetworkSpec, sweeps: int, seed: int = 0,
                   mode: str = "sequential-scan") -> SampleTrace:
    """Sequential scan over the topological numbering draws exact ancestral
    samples; other modes are available for comparison."""
    return run_chain(spec, UpdateSchedule(mode, sweeps, seed=seed))


def named_pairs(spec: NetworkSpec, pairs) -> list[tuple[int, int]]:
    return [(spec.index_of(a), spec.index_of(b)) for a, b in pairs]


@dataclass(frozen=True)
class RbmSpec:
    """Bipolar RBM; couplings exist only between the two layers."""

    n_visible: int
    n_hidden: int
    W: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray
    cd_steps: int = 1
    learning_rate: float = 0.05

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.shape != (self.n_visible, self.n_hidden):
            raise SpecError(f"W must be {self.n_visible}x{self.n_hidden}, got {W.shape}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "visible_bias", np.asarray(self.visible_bias, float))
        object.__setattr__(self, "hidden_bias", np.asarray(self.hidden_bias, float))
        if self.visible_bias.shape != (self.n_visible,) or self.hidden_bias.shape != (self.n_hidden,):
            raise SpecError("bias lengths must match layer sizes")
        if self.cd_steps < 1:
            raise SpecError("cd_steps must be >= 1")

    @classmethod
    def random(cls, n_visible, n_hidden, seed=0, scale=0.01, **kw) -> "RbmSpec":
        rng = make_rng(seed)
        return cls(n_visible, n_hidden, scale * rng.standard_normal((n_visible, n_hidden)),
                   np.zeros(n_visible), np.zeros(n_hidden), **kw)

    def network(self) -> NetworkSpec:
        """Equivalent symmetric p-bit network, visible units first."""
        nv, nh = self.n_visible, self.n_hidden
        W = np.zeros((nv + nh, nv + nh))
        W[:nv, nv:] = self.W
        W[nv:, :nv] = self.W.T
        h = np.concatenate([self.visible_bias, self.hidden_bias])
        return NetworkSpec.from_dense(W, h, symmetric=True)


def visible_marginal(rbm: RbmSpec) -> np.ndarray:
    """Exact model distribution over visible configurations."""
    return enumerate_states(rbm.network()).marginal(range(rbm.n_visible))


def _sample(field, rng):
    r = rng.random(field.shape) * 2.0 - 1.0
    return np.where(np.tanh(field) - r >= 0.0, 1.0, -1.0)


def cd_step(rbm: RbmSpec, batch, rng=None, weights=None, exact: bool = False) -> RbmSpec:
    """One contrastive-divergence update.

    ``<v h>_0`` uses the data with hidden means ``tanh(c + v W)``; the
    negative phase runs ``rbm.cd_steps`` block-Gibbs steps from the data, or
    is computed exactly by enumeration when ``exact`` is set. ``weights``
    optionally weights the batch rows.
    """
    v0 = np.asarray(batch, dtype=float)
    if v0.ndim == 1:
        v0 = v0[None, :]
    if v0.size == 0:
        raise SpecError("batch is empty")
    if v0.shape[1] != rbm.n_visible:
        raise SpecError(f"batch rows have length {v0.shape[1]}, expected {rbm.n_visible}")
    if not np.all(np.abs(v0) == 1):
        raise SpecError("batch entries must be bipolar")
    wts = np.full(len(v0), 1.0 / len(v0)) if weights is None else np.asarray(weights, float)
    wts = wts / wts.sum()

    W, b, c = rbm.W, rbm.visible_bias, rbm.hidden_bias
    ph0 = np.tanh(c + v0 @ W)
    pos_vh = v0.T @ (wts[:, None] * ph0)
    pos_v = wts @ v0
    pos_h = wts @ ph0

    if exact:
        neg_vh, neg_v, neg_h = model_moments(rbm)
    else:
        rng = make_rng(0 if rng is None else rng)
        h = _sample(c + v0 @ W, rng)
        for _ in range(rbm.cd_steps):
            v = _sample(b + h @ W.T, rng)
            phk = np.tanh(c + v @ W)
            h = _sample(c + v @ W, rng)
        neg_vh = v.T @ (wts[:, None] * phk)
        neg_v = wts @ v
        neg_h = wts @ phk

    eta = rbm.learning_rate
    return replace(rbm, W=W + eta * (pos_vh - neg_vh),
                   visible_bias=b + eta * (pos_v - neg_v),
                   hidden_bias=c + eta * (pos_h - neg_h))


def model_moments(rbm: RbmSpec):
    """Exact ``<v h^T>``, ``<v>`` and ``<h>`` under the model."""
    table = enumerate_states(rbm.network())
    s = all_states(rbm.n_visible + rbm.n_hidden).astype(float)
    p = table.probabilities
    v, h = s[:, :rbm.n_visible], s[:, rbm.n_visible:]
    return v.T @ (p[:, None] * h), p @ v, p @ h


def data_moments(rbm: RbmSpec, batch, weights=None):
    v = np.asarray(batch, dtype=float)
    wts = np.full(len(v), 1.0 / len(v)) if weights is None else np.asarray(weights, float)
    wts = wts / wts.sum()
    ph = np.tanh(rbm.hidden_bias + v @ rbm.W)
    return v.T @ (wts[:, None] * ph), wts @ v, wts @ ph


def data_distribution(batch, n_visible: int) -> np.ndarray:
    """Empirical distribution of bipolar rows over visible indices."""
    v = np.asarray(batch)
    idx = ((v > 0).astype(np.int64) @ (1 << np.arange(n_visible - 1, -1, -1)))
    counts = np.bincount(idx, minlength=1 << n_visible)
    return counts / counts.sum()


def rbm_kl(rbm: RbmSpec, batch) -> float:
    """KL(data || model visible marginal), by enumeration."""
    return kl_divergence(data_distribution(batch, rbm.n_visible), visible_marginal(rbm))


def train_rbm(rbm: RbmSpec, batch, steps: int, seed: int = 0, record_every: int = 0,
              exact: bool = False):
    """Full-batch CD training; returns the trained RBM and ``(step, KL)`` rows."""
    rng = make_rng(seed)
    curve = []
    if record_every:
        curve.append((0, rbm_kl(rbm, batch)))
    for step in range(1, steps + 1):
        rbm = cd_step(rbm, batch, rng, exact=exact)
        if record_every and step % record_every == 0:
            curve.append((step, rbm_kl(rbm, batch)))
    return rbm, curve


def bars_and_stripes_2x2() -> np.ndarray:
    """The six 2x2 bars-and-stripes images, row-major, bipolar."""
    patterns = [
        (0, 0, 0, 0), (1, 1, 1, 1),
        (1, 1, 0, 0), (0, 0, 1, 1),
        (1, 0, 1, 0), (0, 1, 0, 1),
    ]
    return np.array(patterns) * 2 - 1
