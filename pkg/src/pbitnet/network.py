"""p-bit network data model, the binary stochastic neuron, and samplers.

A network holds weights ``W`` (sparse ``(i, j, w)`` triplets, ``W[i, j]`` is
the influence of p-bit ``j`` on p-bit ``i``) and biases ``h``. Each p-bit sees
the synaptic input ``I_i = h_i + sum_j W_ij m_j`` and updates as
``m_i = sgn(tanh(I_i) - r)`` with ``r`` uniform on ``[-1, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

MODES = ("sequential-scan", "random-scan", "poisson-async")
RECORD_POLICIES = ("per-sweep", "per-event", "thinned")
CONVENTIONS = ("bipolar", "binary")

# sweeps simulated per block of pre-drawn random numbers
_CHUNK_UPDATES = 1 << 19


class SpecError(ValueError):
    """Raised for structurally invalid networks, states or schedules."""


@dataclass(frozen=True)
class NetworkSpec:
    """Immutable p-bit network.

    ``clamps`` holds ``(index, value)`` pairs with bipolar values even for
    binary-convention networks. ``labels`` optionally names each p-bit.
    """

    n: int
    weights: tuple = ()
    biases: tuple = ()
    clamps: tuple = ()
    symmetric: bool = True
    convention: str = "bipolar"
    labels: tuple | None = None

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise SpecError("network needs at least one p-bit")
        object.__setattr__(self, "n", n)

        weights = tuple((int(i), int(j), float(w)) for i, j, w in self.weights)
        seen = {}
        for i, j, w in weights:
            if not (0 <= i < n and 0 <= j < n):
                raise SpecError(f"weight index ({i}, {j}) out of range for n={n}")
            if (i, j) in seen:
                raise SpecError(f"duplicate weight entry ({i}, {j})")
            seen[(i, j)] = w
        if self.symmetric:
            for (i, j), w in seen.items():
                if i == j and w != 0.0:
                    raise SpecError(f"symmetric network has diagonal weight w[{i},{i}]={w}")
                back = seen.get((j, i), 0.0)
                if back != w:
                    raise SpecError(
                        f"asymmetric weights: w[{i},{j}]={w} but w[{j},{i}]={back}")
        object.__setattr__(self, "weights", tuple(sorted(weights)))

        biases = tuple(float(b) for b in self.biases) if len(self.biases) else (0.0,) * n
        if len(biases) != n:
            raise SpecError(f"expected {n} biases, got {len(biases)}")
        object.__setattr__(self, "biases", biases)

        clamps = tuple((int(i), int(v)) for i, v in self.clamps)
        idx = [i for i, _ in clamps]
        if len(set(idx)) != len(idx):
            raise SpecError("clamp indices must be unique")
        for i, v in clamps:
            if not 0 <= i < n:
                raise SpecError(f"clamp index {i} out of range for n={n}")
            if v not in (-1, 1):
                raise SpecError(f"clamp value for p-bit {i} must be -1 or +1, got {v}")
        object.__setattr__(self, "clamps", tuple(sorted(clamps)))

        if self.convention not in CONVENTIONS:
            raise SpecError(f"unknown convention {self.convention!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != n or len(set(labels)) != n:
                raise SpecError("labels must be n distinct names")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_dense(cls, W, h=None, clamps=(), symmetric=None, labels=None,
                   convention="bipolar") -> "NetworkSpec":
        W = np.asarray(W, dtype=float)
        n = W.shape[0]
        if W.shape != (n, n):
            raise SpecError(f"weight matrix must be square, got shape {W.shape}")
        h = np.zeros(n) if h is None else np.asarray(h, dtype=float)
        if symmetric is None:
            symmetric = bool(np.array_equal(W, W.T) and not np.any(np.diag(W)))
        rows, cols = np.nonzero(W)
        weights = tuple((int(i), int(j), float(W[i, j])) for i, j in zip(rows, cols))
        return cls(n=n, weights=weights, biases=tuple(h.tolist()), clamps=tuple(clamps),
                   symmetric=symmetric, labels=labels, convention=convention)

    @cached_property
    def W(self) -> np.ndarray:
        """Dense weight matrix (read-only)."""
        W = np.zeros((self.n, self.n))
        for i, j, w in self.weights:
            W[i, j] = w
        W.flags.writeable = False
        return W

    @cached_property
    def h(self) -> np.ndarray:
        h = np.array(self.biases, dtype=float)
        h.flags.writeable = False
        return h

    @property
    def clamp_dict(self) -> dict:
        return dict(self.clamps)

    @property
    def free(self) -> np.ndarray:
        clamped = self.clamp_dict
        return np.array([i for i in range(self.n) if i not in clamped], dtype=np.int64)

    def index_of(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            if not 0 <= name < self.n:
                raise SpecError(f"p-bit index {name} out of range")
            return int(name)
        if self.labels is None or name not in self.labels:
            raise SpecError(f"unknown bit name {name!r}")
        return self.labels.index(name)

    def with_clamps(self, clamps) -> "NetworkSpec":
        """Copy with ``clamps`` (index or label -> bipolar value) merged in."""
        merged = self.clamp_dict
        for k, v in dict(clamps).items():
            merged[self.index_of(k)] = int(v)
        return self._replace(clamps=tuple(merged.items()))

    def scaled(self, factor: float) -> "NetworkSpec":
        """Copy with every weight and bias multiplied by ``factor``."""
        return self._replace(
            weights=tuple((i, j, w * factor) for i, j, w in self.weights),
            biases=tuple(b * factor for b in self.biases))

    def _replace(self, **changes) -> "NetworkSpec":
        fields = dict(n=self.n, weights=self.weights, biases=self.biases, clamps=self.clamps,
                      symmetric=self.symmetric, convention=self.convention, labels=self.labels)
        fields.update(changes)
        return NetworkSpec(**fields)


@dataclass
class StateVector:
    """Bipolar configuration plus an update counter."""

    m: np.ndarray
    epoch: int = 0

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.int8).copy()
        if self.m.ndim != 1 or not np.all(np.abs(self.m) == 1):
            raise SpecError("state entries must be exactly -1 or +1")

    @classmethod
    def from_index(cls, index: int, n: int) -> "StateVector":
        bits = [(index >> (n - 1 - k)) & 1 for k in range(n)]
        return cls(np.array(bits, dtype=np.int8) * 2 - 1)

    def __len__(self):
        return len(self.m)


@dataclass(frozen=True)
class UpdateSchedule:
    """How ``run_chain`` visits p-bits.

    ``synapse_delay`` is measured in mean flip-attempt intervals of a single
    p-bit and only applies to ``poisson-async``. ``record`` is one of
    ``per-sweep``, ``per-event`` or ``thinned`` (every ``thin`` sweeps).
    """

    mode: str = "random-scan"
    sweeps: int = 1000
    synapse_delay: float = 0.0
    seed: int = 0
    record: str = "per-sweep"
    thin: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise SpecError(f"unknown update mode {self.mode!r}; expected one of {MODES}")
        if self.sweeps < 1:
            raise SpecError("sweeps must be >= 1")
        if not (self.synapse_delay >= 0 and math.isfinite(self.synapse_delay)):
            raise SpecError("synapse_delay must be finite and >= 0")
        if self.record not in RECORD_POLICIES:
            raise SpecError(f"unknown record policy {self.record!r}")
        if self.thin < 1:
            raise SpecError("thin must be >= 1")


@dataclass
class SampleTrace:
    """Time-ordered bipolar snapshots, one row per record."""

    states: np.ndarray
    record_policy: str
    seed: int
    final: StateVector | None = None
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    def indices(self, order: Sequence[int] | None = None) -> np.ndarray:
        return config_indices(self.states, order)

    def histogram(self, order: Sequence[int] | None = None) -> np.ndarray:
        """Counts over the ``2**len(order)`` configuration indices."""
        order = range(self.states.shape[1]) if order is None else order
        return np.bincount(self.indices(order), minlength=1 << len(order))

    def probabilities(self, order: Sequence[int] | None = None) -> np.ndarray:
        counts = self.histogram(order)
        return counts / counts.sum()


def synapse_input(spec: NetworkSpec, state, i: int) -> float:
    """``I_i = h_i + sum_j W_ij m_j`` for the current state."""
    if not 0 <= i < spec.n:
        raise SpecError(f"p-bit index {i} out of range for n={spec.n}")
    m = _as_array(state).astype(float)
    total = spec.biases[i]
    for a, j, w in spec.weights:
        if a == i:
            total += w * m[j]
    return float(total)


def bsn_update_bipolar(I: float, r: float) -> int:
    """Binary stochastic neuron: ``sgn(tanh(I) - r)`` with ``sgn(0) = +1``."""
    return 1 if math.tanh(I) - r >= 0 else -1


def bsn_update_binary(I: float, r0: float) -> int:
    """0/1 form of the neuron: ``step(sigmoid(2I) - r0)``, ``r0`` in ``[0, 1)``."""
    return 1 if _sigmoid(2.0 * I) - r0 >= 0 else 0


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def state_index(state, order: Sequence[int] | None = None) -> int:
    """Decimal label of a configuration; ``order[0]`` is the most significant bit."""
    m = _as_array(state)
    order = list(range(len(m))) if order is None else list(order)
    if len(set(order)) != len(order):
        raise SpecError("order contains duplicate indices")
    if any(not 0 <= k < len(m) for k in order):
        raise SpecError("order contains out-of-range indices")
    value = 0
    for k in order:
        value = (value << 1) | int(m[k] > 0)
    return value


def config_indices(states: np.ndarray, order: Sequence[int] | None = None) -> np.ndarray:
    """Vectorised :func:`state_index` over the rows of ``states``."""
    states = np.asarray(states)
    order = np.arange(states.shape[1]) if order is None else np.asarray(list(order))
    L = len(order)
    weights = (1 << np.arange(L - 1, -1, -1)).astype(np.int64)
    return ((states[:, order] > 0).astype(np.int64) @ weights)


def all_states(n: int) -> np.ndarray:
    """All ``2**n`` bipolar configurations, row ``k`` has index ``k``."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int8)


def soft_clamp(spec: NetworkSpec, clamps) -> NetworkSpec:
    """Realise clamps as large biases instead of skipped updates.

    The added bias is twice the largest absolute row sum of ``W`` (plus the
    existing bias magnitude), so the clamped p-bit follows its target with
    probability at least ``(1 + tanh(max_row_sum))/2``.
    """
    W = spec.W
    strength = 2.0 * max(float(np.abs(W).sum(axis=1).max()), 1.0)
    h = np.array(spec.biases)
    for k, v in dict(clamps).items():
        i = spec.index_of(k)
        h[i] = v * (strength + abs(h[i]))
    return spec._replace(biases=tuple(h.tolist()))


def to_binary_form(spec: NetworkSpec) -> NetworkSpec:
    """Equivalent network for 0/1 variables.

    With ``m = 2x - 1`` the bipolar input becomes
    ``I_i = (h_i - sum_j W_ij) + sum_j 2 W_ij x_j``.
    """
    if spec.convention != "bipolar":
        raise SpecError("network is already in binary form")
    rowsum = spec.W.sum(axis=1)
    return spec._replace(
        weights=tuple((i, j, 2.0 * w) for i, j, w in spec.weights),
        biases=tuple((spec.h - rowsum).tolist()),
        symmetric=spec.symmetric, convention="binary")


def chain_rngs(seed: int, n_chains: int) -> list[np.random.Generator]:
    """Independent Philox streams; stream ``k`` does not depend on ``n_chains``."""
    children = np.random.SeedSequence(seed).spawn(n_chains)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def run_chain(spec: NetworkSpec, schedule: UpdateSchedule, init=None,
              rng: np.random.Generator | None = None) -> SampleTrace:
    """Iterate the neuron/synapse equations under ``schedule``.

    One sweep is one update attempt per free (unclamped) p-bit: in order for
    ``sequential-scan``, uniformly chosen for ``random-scan``, and on
    independent unit-rate exponential clocks for ``poisson-async``. Clamped
    p-bits are never updated.
    """
    if rng is None:
        rng = chain_rngs(schedule.seed, 1)[0]
    n = spec.n
    binary = spec.convention == "binary"
    free = spec.free
    clamps = spec.clamp_dict

    if init is None:
        m0 = np.where(rng.random(n) < 0.5, -1, 1)
    else:
        m0 = _as_array(init).astype(int)
        if len(m0) != n:
            raise SpecError(f"initial state has length {len(m0)}, network has {n}")
    for i, v in clamps.items():
        m0[i] = v
    m = (m0 + 1) / 2.0 if binary else m0.astype(float)

    W = np.ascontiguousarray(spec.W, dtype=float)
    h = np.ascontiguousarray(spec.h, dtype=float)
    nf = len(free)
    sweeps = schedule.sweeps

    if nf == 0:
        states = np.tile(m0.astype(np.int8), (sweeps if schedule.record != "thinned"
                                              else sweeps // schedule.thin, 1))
        return SampleTrace(states, schedule.record, schedule.seed, StateVector(m0, 0))

    if schedule.record == "per-event":
        record_every = 1
        n_records = sweeps * nf
    else:
        thin = schedule.thin if schedule.record == "thinned" else 1
        record_every = nf * thin
        n_records = sweeps // thin
    out = np.empty((n_records, n), dtype=np.int8)

    # whole sweeps per block, and a multiple of the thinning interval
    unit = max(1, record_every // nf) if record_every >= nf else 1
    block = max(unit, (_CHUNK_UPDATES // nf) // unit * unit)

    pos = 0
    done = 0
    async_state = None
    if schedule.mode == "poisson-async":
        d = schedule.synapse_delay
        cap = int(nf * d * 2 + 20 * math.sqrt(nf * d + 1) + 256)
        async_state = dict(t=0.0, head=0, size=0, buf_t=np.zeros(cap),
                           buf_i=np.zeros(cap, dtype=np.int64), buf_old=np.zeros(cap))

    while done < sweeps:
        s = min(block, sweeps - done)
        u = s * nf
        r = rng.random(u) * 2.0 - 1.0
        if schedule.mode == "sequential-scan":
            sites = np.tile(free, s)
        else:
            sites = free[rng.integers(0, nf, size=u)]
        if schedule.mode == "poisson-async":
            # superposed unit-rate clocks of nf p-bits: total rate nf
            dt = rng.exponential(1.0 / nf, size=u)
            a = async_state
            t, head, size, k, overflow = _kernels.run_async(
                W, h, m, sites, dt, r, float(schedule.synapse_delay), a["t"], a["buf_t"],
                a["buf_i"], a["buf_old"], a["head"], a["size"], record_every,
                out[pos:], binary)
            if overflow:
                raise RuntimeError("synapse-delay history buffer overflowed")
            a.update(t=t, head=head, size=size)
        else:
            k = _kernels.run_sites(W, h, m, sites, r, record_every, out[pos:], binary)
        pos += k
        done += s

    final = (2 * m - 1) if binary else m
    return SampleTrace(out[:pos], schedule.record, schedule.seed,
                       StateVector(final.astype(np.int8), epoch=sweeps * nf),
                       extra={"mode": schedule.mode, "synapse_delay": schedule.synapse_delay})


def run_chains(spec: NetworkSpec, schedule: UpdateSchedule, n_chains: int,
               init=None) -> list[SampleTrace]:
    """Independent chains with streams derived from ``schedule.seed``."""
    return [run_chain(spec, schedule, init=init, rng=rng)
            for rng in chain_rngs(schedule.seed, n_chains)]


def merge_histograms(traces: Iterable[SampleTrace], order=None) -> np.ndarray:
    total = None
    for tr in traces:
        counts = tr.histogram(order)
        total = counts if total is None else total + counts
    return total


def _as_array(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.m
    return np.asarray(state)
