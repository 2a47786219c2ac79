"""Simulated annealing, the travelling-salesman encoding, and the replica
(path-integral) mapping of transverse-field Ising models onto p-bits."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .network import (NetworkSpec, SampleTrace, SpecError, StateVector, UpdateSchedule,
                      make_rng, run_chain)


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric ramp of the interaction scale ``I0``.

    ``I0`` multiplies every weight and bias; after each ``t_eq`` sweeps it
    grows by ``growth``.
    """

    I0_initial: float = 0.1
    growth: float = 1 / 0.99
    t_eq: int = 50
    stages: int = 600

    def __post_init__(self):
        if not self.I0_initial > 0:
            raise SpecError("I0_initial must be positive")
        if not self.growth > 1:
            raise SpecError("growth must exceed 1")
        if self.t_eq < 1 or self.stages < 1:
            raise SpecError("t_eq and stages must be >= 1")

    def scales(self) -> np.ndarray:
        return self.I0_initial * self.growth ** np.arange(self.stages)


@dataclass
class AnnealResult:
    best: StateVector
    best_energy: float
    last: StateVector
    stage_best: np.ndarray   # best energy seen up to the end of each stage
    scales: np.ndarray


def anneal(spec: NetworkSpec, schedule: AnnealSchedule, seed=0, init=None) -> AnnealResult:
    """Random-scan sampling at a growing interaction scale.

    Energies are reported at unit scale. The returned ``best`` state is the
    lowest-energy configuration seen at any point of the run.
    """
    if not spec.symmetric or spec.convention != "bipolar":
        raise SpecError("annealing needs a symmetric bipolar network")
    rng = make_rng(seed)
    W = np.ascontiguousarray(spec.W, dtype=float)
    h = np.ascontiguousarray(spec.h, dtype=float)
    free = spec.free
    m = np.where(rng.random(spec.n) < 0.5, -1.0, 1.0) if init is None \
        else np.asarray(init.m if isinstance(init, StateVector) else init, dtype=float).copy()
    for i, v in spec.clamps:
        m[i] = v
    best_m = m.copy()
    best_e = np.array([_kernels.energy(W, h, m)])
    scales = schedule.scales()
    stage_best = np.empty(schedule.stages)
    nf = len(free)
    for k, scale in enumerate(scales):
        if nf:
            u = schedule.t_eq * nf
            sites = free[rng.integers(0, nf, size=u)]
            r = rng.random(u) * 2.0 - 1.0
            _kernels.anneal_stage(W, h, m, sites, r, float(scale), best_m, best_e)
        stage_best[k] = best_e[0]
    best = best_m.astype(np.int8)
    return AnnealResult(StateVector(best), float(_kernels.energy(W, h, best_m)),
                        StateVector(m.astype(np.int8), schedule.stages * schedule.t_eq),
                        stage_best, scales)


def qubo_to_network(linear, quadratic, offset=0.0, labels=None):
    """Bipolar network equivalent to a 0/1 quadratic objective.

    ``H(x) = offset + sum_i linear[i] x_i + sum_{i<j} quadratic[i, j] x_i x_j``
    (only the upper triangle of ``quadratic`` is read). Returns the network and
    a constant ``c`` with ``energy(m) + c == H(x)`` for ``m = 2x - 1``.
    """
    a = np.asarray(linear, dtype=float)
    Q = np.triu(np.asarray(quadratic, dtype=float), 1)
    n = len(a)
    S = Q + Q.T
    W = -S / 4.0
    h = -(a / 2.0 + S.sum(axis=1) / 4.0)
    const = offset + a.sum() / 2.0 + Q.sum() / 4.0
    return NetworkSpec.from_dense(W, h, symmetric=True, labels=labels), float(const)


@dataclass(frozen=True)
class TspInstance:
    distances: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise SpecError("distance matrix must be square")
        if not np.allclose(d, d.T) or np.any(np.diag(d) != 0) or np.any(d < 0):
            raise SpecError("distances must be symmetric, nonnegative, zero on the diagonal")
        object.__setattr__(self, "distances", d)

    @property
    def n_cities(self) -> int:
        return self.distances.shape[0]

    @classmethod
    def from_coordinates(cls, xy) -> "TspInstance":
        xy = np.asarray(xy, dtype=float)
        return cls(np.linalg.norm(xy[:, None, :] - xy[None, :, :], axis=-1))

    def tour_length(self, tour) -> float:
        """Length of the closed tour ``0 -> tour... -> 0``."""
        path = [0, *tour, 0]
        return float(sum(self.distances[a, b] for a, b in zip(path, path[1:])))


@dataclass(frozen=True)
class TspDecoder:
    n_cities: int
    A: float
    B: float
    constant: float

    @property
    def side(self) -> int:
        return self.n_cities - 1

    def index(self, position: int, city: int) -> int:
        """p-bit of (visit position, city), both counted from 1."""
        return (position - 1) * self.side + (city - 1)


@dataclass(frozen=True)
class Tour:
    order: tuple | None
    valid: bool
    row_violations: int = 0
    column_violations: int = 0


def tsp_encode(instance: TspInstance, A: float | None = None, B: float | None = None):
    """One-hot encoding on ``(N-1)**2`` p-bits with city 0 fixed first.

    p-bit ``(p, c)`` is +1 when city ``c`` is visited at position ``p``.
    Row and column one-hot penalties carry weight ``A``; the tour length
    carries weight ``B``. Defaults: ``B = 1/max distance``,
    ``A = 2 B max_distance N``.
    """
    N = instance.n_cities
    if N < 3:
        raise SpecError("need at least 3 cities")
    if N > 12:
        raise SpecError("encoding is limited to 12 cities")
    d = instance.distances
    dmax = float(d.max()) or 1.0
    B = 1.0 / dmax if B is None else float(B)
    A = 2.0 * B * dmax * N if A is None else float(A)
    dec = TspDecoder(N, A, B, 0.0)
    K = N - 1
    n = K * K
    lin = np.zeros(n)
    quad = np.zeros((n, n))
    offset = 0.0

    def add(i, j, v):
        if i == j:
            lin[i] += v
        else:
            quad[min(i, j), max(i, j)] += v

    groups = [[dec.index(p, c) for c in range(1, N)] for p in range(1, N)]
    groups += [[dec.index(p, c) for p in range(1, N)] for c in range(1, N)]
    for g in groups:
        # A (1 - sum x)^2 = A (1 - sum x + 2 sum_{a<b} x_a x_b) on 0/1 variables
        offset += A
        for a in g:
            lin[a] -= A
        for a, b in itertools.combinations(g, 2):
            add(a, b, 2 * A)
    for p in range(1, N - 1):
        for c in range(1, N):
            for c2 in range(1, N):
                if c != c2:
                    add(dec.index(p, c), dec.index(p + 1, c2), B * d[c, c2])
    for c in range(1, N):
        add(dec.index(1, c), dec.index(1, c), B * d[0, c])
        add(dec.index(N - 1, c), dec.index(N - 1, c), B * d[c, 0])

    labels = [f"x{p},{c}" for p in range(1, N) for c in range(1, N)]
    spec, const = qubo_to_network(lin, quad, offset, labels=labels)
    return spec, replace(dec, constant=const)


def decode_tour(state, decoder: TspDecoder) -> Tour:
    """Visiting order if every position and every city is one-hot."""
    m = np.asarray(state.m if isinstance(state, StateVector) else state)
    K = decoder.side
    x = (m.reshape(K, K) > 0)
    rows = int(np.sum(x.sum(axis=1) != 1))
    cols = int(np.sum(x.sum(axis=0) != 1))
    if rows or cols:
        return Tour(None, False, rows, cols)
    return Tour(tuple(int(np.argmax(r)) + 1 for r in x), True)


def encode_tour(tour, decoder: TspDecoder) -> StateVector:
    """One-hot state for a visiting order (inverse of :func:`decode_tour`)."""
    m = -np.ones(decoder.side ** 2, dtype=np.int8)
    for p, c in enumerate(tour, start=1):
        m[decoder.index(p, c)] = 1
    return StateVector(m)


def brute_force_tsp(instance: TspInstance) -> list[tuple[float, tuple]]:
    """Every distinct tour (one direction each) sorted by length."""
    out = []
    for perm in itertools.permutations(range(1, instance.n_cities)):
        if perm[0] < perm[-1]:
            out.append((instance.tour_length(perm), perm))
    return sorted(out)


def canonical_tour(tour) -> tuple:
    tour = tuple(tour)
    return tour if tour[0] < tour[-1] else tour[::-1]


def solve_tsp(instance: TspInstance, schedule: AnnealSchedule = AnnealSchedule(),
              runs: int = 1, seed: int = 0, A=None, B=None) -> list[tuple[Tour, float]]:
    """Independent annealing restarts; returns ``(tour, length)`` per run."""
    spec, dec = tsp_encode(instance, A, B)
    out = []
    for child in np.random.SeedSequence(seed).spawn(runs):
        res = anneal(spec, schedule, seed=np.random.Generator(np.random.Philox(child)))
        tour = decode_tour(res.best, dec)
        length = instance.tour_length(tour.order) if tour.valid else math.nan
        out.append((tour, length))
    return out


@dataclass(frozen=True)
class QuantumIsingSpec:
    """``H = -sum_{i<j} J_ij Z_i Z_j - sum_i h_i Z_i - gamma sum_i X_i`` at
    inverse temperature ``beta``, to be split into ``n_replicas`` slices."""

    n_spins: int
    J: np.ndarray
    h_z: np.ndarray
    gamma: float
    beta: float
    n_replicas: int = 10

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        h = np.zeros(self.n_spins) if self.h_z is None else np.asarray(self.h_z, dtype=float)
        if J.shape != (self.n_spins, self.n_spins):
            raise SpecError(f"J must be {self.n_spins}x{self.n_spins}")
        if not np.allclose(J, J.T) or np.any(np.diag(J) != 0):
            raise SpecError("J must be symmetric with zero diagonal")
        if h.shape != (self.n_spins,):
            raise SpecError("h_z length must equal n_spins")
        if self.gamma < 0 or self.beta <= 0:
            raise SpecError("need gamma >= 0 and beta > 0")
        if self.n_replicas < 1 or (self.gamma > 0 and self.n_replicas < 2):
            raise SpecError("a transverse field needs at least 2 replicas")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "h_z", h)

    @classmethod
    def from_triplets(cls, n, triplets, h_z=None, **kw) -> "QuantumIsingSpec":
        J = np.zeros((n, n))
        for i, j, v in triplets:
            J[i, j] = J[j, i] = v
        return cls(n, J, np.zeros(n) if h_z is None else h_z, **kw)

    def classical(self) -> NetworkSpec:
        """The longitudinal part alone as a p-bit network at unit scale."""
        return NetworkSpec.from_dense(self.J, self.h_z, symmetric=True)


def replica_coupling(beta: float, gamma: float, n_replicas: int) -> float:
    """Coupling between neighbouring slices, ``1/2 ln coth(beta gamma / n)``."""
    x = beta * gamma / n_replicas
    if x <= 0:
        raise SpecError("replica coupling diverges at zero transverse field")
    return 0.5 * math.log(1.0 / math.tanh(x))


@dataclass(frozen=True)
class ReplicaLayout:
    """p-bit ``k * n_spins + i`` is spin ``i`` in slice ``k``."""

    n_spins: int
    n_replicas: int

    def index(self, spin: int, replica: int) -> int:
        return replica * self.n_spins + spin

    def slices(self, states: np.ndarray) -> np.ndarray:
        """Reshape records to ``(T, n_replicas, n_spins)``."""
        return np.asarray(states).reshape(len(states), self.n_replicas, self.n_spins)

    def observables(self, trace: SampleTrace | np.ndarray) -> dict:
        """Replica-averaged ``<Z_i>`` and ``<Z_i Z_j>``."""
        s = self.slices(trace.states if isinstance(trace, SampleTrace) else trace).astype(float)
        mz = s.mean(axis=(0, 1))
        zz = np.einsum("tki,tkj->ij", s, s) / (s.shape[0] * s.shape[1])
        return {"mz": mz, "zz": zz}

    def replica_magnetisations(self, trace: SampleTrace) -> np.ndarray:
        """``<m>`` of each spin in each slice, shape ``(n_replicas, n_spins)``."""
        return self.slices(trace.states).astype(float).mean(axis=0)


def pimc_map(q: QuantumIsingSpec):
    """Classical replica network for a stoquastic transverse-field model.

    Slices carry couplings ``(beta/n) J`` and fields ``(beta/n) h_z``; copies
    of the same spin in neighbouring slices are coupled by
    :func:`replica_coupling` around a ring.
    """
    n, S = q.n_replicas, q.n_spins
    if q.gamma == 0 and n > 1:
        raise SpecError("gamma = 0 with several replicas: use the classical network")
    layout = ReplicaLayout(S, n)
    N = S * n
    W = np.zeros((N, N))
    h = np.zeros(N)
    for k in range(n):
        sl = slice(k * S, (k + 1) * S)
        W[sl, sl] = q.beta / n * q.J
        h[sl] = q.beta / n * q.h_z
    if n > 1:
        Jp = replica_coupling(q.beta, q.gamma, n)
        for k in range(n):
            k2 = (k + 1) % n
            for i in range(S):
                a, b = layout.index(i, k), layout.index(i, k2)
                W[a, b] += Jp
                W[b, a] += Jp
    return NetworkSpec.from_dense(W, h, symmetric=True), layout


def quantum_hamiltonian(q: QuantumIsingSpec) -> np.ndarray:
    """Dense ``2**n`` Hamiltonian in the Z basis (spin 0 most significant)."""
    S = q.n_spins
    dim = 1 << S
    idx = np.arange(dim)
    z = 1 - 2 * ((idx[:, None] >> np.arange(S - 1, -1, -1)) & 1)  # bit 0 -> +1
    diag = -np.einsum("ki,ij,kj->k", z, np.triu(q.J, 1), z) - z @ q.h_z
    H = np.diag(diag.astype(float))
    for i in range(S):
        flip = idx ^ (1 << (S - 1 - i))
        H[idx, flip] -= q.gamma
    return H


def quantum_thermal_averages(q: QuantumIsingSpec) -> dict:
    """Exact ``<Z_i>`` and ``<Z_i Z_j>`` from the thermal density matrix."""
    H = quantum_hamiltonian(q)
    evals, vecs = np.linalg.eigh(H)
    w = np.exp(-q.beta * (evals - evals.min()))
    diag_rho = (vecs ** 2) @ w
    diag_rho /= diag_rho.sum()
    S = q.n_spins
    idx = np.arange(1 << S)
    z = (1 - 2 * ((idx[:, None] >> np.arange(S - 1, -1, -1)) & 1)).astype(float)
    return {"mz": diag_rho @ z, "zz": z.T @ (diag_rho[:, None] * z)}


def replica_exact_averages(q: QuantumIsingSpec) -> dict:
    """Exact averages of the replica network by transfer matrices along the ring."""
    S, n = q.n_spins, q.n_replicas
    idx = np.arange(1 << S)
    z = (1 - 2 * ((idx[:, None] >> np.arange(S - 1, -1, -1)) & 1)).astype(float)
    local = q.beta / n * (np.einsum("ki,ij,kj->k", z, np.triu(q.J, 1), z) + z @ q.h_z)
    if n == 1:
        w = np.exp(local - local.max())
        p = w / w.sum()
    else:
        Jp = replica_coupling(q.beta, q.gamma, n)
        half = np.exp(0.5 * (local - local.max()))
        T = half[:, None] * np.exp(Jp * (z @ z.T) - Jp * S) * half[None, :]
        evals, vecs = np.linalg.eigh(T)
        # diag(T^n) in the slice basis
        p = (vecs ** 2) @ (evals / np.abs(evals).max()) ** n
        p /= p.sum()
    return {"mz": p @ z, "zz": z.T @ (p[:, None] * z)}


def sample_pimc(q: QuantumIsingSpec, sweeps: int, seed: int = 0, burn_in: int = 1000):
    """Sampled replica-averaged observables of the mapped network."""
    spec, layout = pimc_map(q)
    rng = make_rng(seed)
    warm = run_chain(spec, UpdateSchedule("random-scan", burn_in, seed=0, record="thinned",
                                          thin=burn_in), rng=rng)
    trace = run_chain(spec, UpdateSchedule("random-scan", sweeps, seed=0), init=warm.final, rng=rng)
    return layout.observables(trace), trace


@dataclass
class QuantumAnnealResult:
    state: StateVector
    replicas: np.ndarray   # final (n_replicas, n_spins) configuration


def quantum_anneal(q: QuantumIsingSpec, gamma_schedule, sweeps_per_stage: int = 20,
                   seed=0) -> QuantumAnnealResult:
    """Lower the transverse field stage by stage on the replica network, then
    take a per-spin majority vote over slices (ties go to +1)."""
    gammas = np.asarray(gamma_schedule, dtype=float)
    if len(gammas) == 0:
        raise SpecError("empty gamma schedule")
    if np.any(gammas <= 0):
        raise SpecError("gamma schedule must stay strictly positive")
    if np.any(np.diff(gammas) >= 0):
        raise SpecError("gamma schedule must be strictly decreasing")
    rng = make_rng(seed)
    state = None
    layout = None
    for g in gammas:
        spec, layout = pimc_map(replace(q, gamma=float(g)))
        tr = run_chain(spec, UpdateSchedule("random-scan", sweeps_per_stage, record="thinned",
                                            thin=sweeps_per_stage), init=state, rng=rng)
        state = tr.final
    reps = layout.slices(state.m[None, :])[0]
    vote = np.where(reps.sum(axis=0) >= 0, 1, -1).astype(np.int8)
    return QuantumAnnealResult(StateVector(vote), reps)


def ground_states(spec: NetworkSpec, tol: float = 1e-9) -> tuple[float, list[int]]:
    """Minimum energy and every configuration index attaining it."""
    from .exact import enumerate_states
    E = enumerate_states(spec).energies
    e0 = float(E.min())
    return e0, [int(k) for k in np.flatnonzero(E <= e0 + tol)]
