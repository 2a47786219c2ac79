"""Invertible Boolean gates as symmetric p-bit networks.

Weights are learned by exact maximum-likelihood Boltzmann learning: the
model correlations come from enumeration, so training is deterministic. A
handle p-bit clamped to +1 carries the biases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .exact import enumerate_states
from .network import NetworkSpec, SpecError, UpdateSchedule, all_states, run_chain

HANDLE = "h"


class SynthesisError(RuntimeError):
    """Training did not reach the requested truth-table masses."""

    def __init__(self, message, row_masses=None):
        super().__init__(message)
        self.row_masses = row_masses


@dataclass(frozen=True)
class TruthTable:
    """Functional truth table over bipolar bits, inputs first."""

    input_bits: int
    output_bits: int
    rows: tuple
    labels: tuple

    def __post_init__(self):
        width = self.input_bits + self.output_bits
        rows = tuple(tuple(int(_bipolar(v)) for v in row) for row in self.rows)
        if any(len(r) != width for r in rows):
            raise SpecError(f"every row needs {width} entries")
        if len(set(rows)) != len(rows):
            raise SpecError("truth-table rows must be distinct")
        ins = sorted(r[:self.input_bits] for r in rows)
        if ins != sorted(product((-1, 1), repeat=self.input_bits)):
            raise SpecError("rows must cover every input combination exactly once")
        if len(self.labels) != width or len(set(self.labels)) != width:
            raise SpecError("labels must name every bit once")
        if HANDLE in self.labels:
            raise SpecError(f"label {HANDLE!r} is reserved for the handle bit")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_function(cls, inputs: Sequence[str], outputs: Sequence[str], fn) -> "TruthTable":
        """Build from ``fn(*input_bits) -> output_bits`` using 0/1 values."""
        rows = []
        for bits in product((0, 1), repeat=len(inputs)):
            out = fn(*bits)
            out = (out,) if np.isscalar(out) else tuple(out)
            rows.append(bits + out)
        return cls(len(inputs), len(outputs), tuple(rows), tuple(inputs) + tuple(outputs))

    @property
    def width(self):
        return self.input_bits + self.output_bits

    def indices(self) -> list[int]:
        """Decimal labels of the rows, first label most significant."""
        return [int("".join("1" if v > 0 else "0" for v in r), 2) for r in self.rows]


def and_or_xnor_table() -> TruthTable:
    """Two inputs with XNOR, AND and OR outputs; rows land on 4, 9, 17, 31."""
    return TruthTable.from_function(
        ["A", "B"], ["XNOR", "AND", "OR"],
        lambda a, b: (int(a == b), a & b, a | b))


@dataclass(frozen=True)
class GateMatrix:
    """A gate network whose last p-bit is the handle, clamped to +1."""

    spec: NetworkSpec
    bit_order: tuple
    strength: float = 1.0
    table: TruthTable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.spec.labels is None or self.spec.labels[-1] != HANDLE:
            raise SpecError("gate network must end with the handle bit")
        if self.spec.clamp_dict.get(self.spec.n - 1) != 1:
            raise SpecError("handle bit must be clamped to +1")

    @property
    def order(self) -> list[int]:
        return [self.spec.index_of(b) for b in self.bit_order]

    def with_strength(self, strength: float) -> "GateMatrix":
        """Same gate with every weight rescaled to overall ``strength``."""
        spec = self.spec.scaled(strength / self.strength)
        return GateMatrix(spec, self.bit_order, strength, self.table)

    def distribution(self, clamps: Mapping | None = None) -> np.ndarray:
        """Exact distribution over ``bit_order`` indices, given clamps."""
        spec = self.spec if not clamps else self.spec.with_clamps(_named_bipolar(clamps))
        return enumerate_states(spec).marginal(self.order)

    def energies(self) -> np.ndarray:
        """Energy of each ``bit_order`` configuration with the handle at +1.

        Only meaningful when ``bit_order`` covers every non-handle bit.
        """
        L = len(self.bit_order)
        states = np.ones((1 << L, self.spec.n))
        states[:, self.order] = all_states(L)
        W, h = np.asarray(self.spec.W), np.asarray(self.spec.h)
        return -0.5 * np.einsum("ki,ij,kj->k", states, W, states) - states @ h


def synthesize(table: TruthTable, min_row_mass: float | None = None,
               joint_mass: float = 0.8, learning_rate: float = 0.1,
               max_iter: int = 5000) -> GateMatrix:
    """Learn a gate whose Boltzmann distribution peaks on the table rows.

    Gradient ascent on the log-likelihood of the rows, with
    ``dW_ij = <m_i m_j>_rows - <m_i m_j>_model`` and the model term computed
    exactly. Stops once every row holds at least ``min_row_mass`` (default
    ``0.6 / len(rows)``), the rows jointly hold ``joint_mass``, and every row
    is strictly lower in energy than every other configuration.
    """
    L = table.width
    if L > 10:
        raise SpecError("synthesis is limited to 10 gate bits")
    if min_row_mass is None:
        min_row_mass = 0.6 / len(table.rows)
    n = L + 1
    states = np.ones((1 << L, n))
    states[:, :L] = all_states(L)
    rows = np.array([list(r) + [1] for r in table.rows], dtype=float)
    row_idx = np.array(table.indices())
    is_row = np.zeros(1 << L, dtype=bool)
    is_row[row_idx] = True
    target = rows.T @ rows / len(rows)

    W = np.zeros((n, n))
    masses = None
    for _ in range(max_iter):
        E = -0.5 * np.einsum("ki,ij,kj->k", states, W, states)
        logp = -E - np.logaddexp.reduce(-E)
        p = np.exp(logp)
        masses = p[row_idx]
        if (masses.min() >= min_row_mass and masses.sum() >= joint_mass
                and E[is_row].max() < E[~is_row].min()):
            break
        model = states.T @ (p[:, None] * states)
        grad = target - model
        np.fill_diagonal(grad, 0.0)
        W += learning_rate * grad
    else:
        raise SynthesisError(
            f"synthesis stopped after {max_iter} iterations with row masses "
            f"{np.round(masses, 4).tolist()} (total {masses.sum():.4f})", masses)

    labels = table.labels + (HANDLE,)
    spec = NetworkSpec.from_dense(W, np.zeros(n), clamps=[(L, 1)], symmetric=True,
                                  labels=labels)
    return GateMatrix(spec, table.labels, 1.0, table)


def row_masses(gate: GateMatrix) -> np.ndarray:
    """Exact probability of each truth-table row, unclamped."""
    P = gate.distribution()
    return P[gate.table.indices()]


def run_unclamped(gate: GateMatrix, sweeps: int, seed: int = 0,
                  mode: str = "random-scan") -> np.ndarray:
    trace = run_chain(gate.spec, UpdateSchedule(mode, sweeps, seed=seed))
    return trace.histogram(gate.order)


def run_direct(gate: GateMatrix, inputs: Mapping, sweeps: int, seed: int = 0,
               mode: str = "random-scan") -> np.ndarray:
    """Clamp every input bit and sample; histogram over ``bit_order``."""
    _check_names(gate, inputs)
    if gate.table is not None:
        missing = set(gate.table.labels[:gate.table.input_bits]) - set(inputs)
        if missing:
            raise SpecError(f"unassigned input bits: {sorted(missing)}")
    return _run_clamped(gate, inputs, sweeps, seed, mode)


def run_inverse(gate: GateMatrix, outputs: Mapping, sweeps: int, seed: int = 0,
                mode: str = "random-scan") -> np.ndarray:
    """Clamp some output bits and sample; inputs wander over consistent rows."""
    _check_names(gate, outputs)
    return _run_clamped(gate, outputs, sweeps, seed, mode)


def _run_clamped(gate, assignment, sweeps, seed, mode):
    spec = gate.spec.with_clamps(_named_bipolar(assignment))
    trace = run_chain(spec, UpdateSchedule(mode, sweeps, seed=seed))
    return trace.histogram(gate.order)


def _check_names(gate, assignment):
    for name in assignment:
        if name not in gate.bit_order:
            raise SpecError(f"unknown bit name {name!r}")


def compose(gates: Sequence[GateMatrix], shared: Sequence = ()) -> GateMatrix:
    """Merge gates into one network.

    Each entry of ``shared`` is either a bit name (merge every bit carrying
    that name) or a sequence of ``(gate_index, name)`` pairs to identify.
    Couplings of merged bits add up; all handles become one handle. The
    merged bit keeps the first name in its group.
    """
    groups = []
    for item in shared:
        if isinstance(item, str):
            members = [(g, item) for g, gate in enumerate(gates) if item in gate.bit_order]
        else:
            members = [(int(g), str(name)) for g, name in item]
        for g, name in members:
            if name not in gates[g].bit_order:
                raise SpecError(f"gate {g} has no bit {name!r}")
        groups.append(members)

    alias = {}
    for members in groups:
        for key in members:
            if key in alias:
                raise SpecError(f"bit {key} appears in two equivalences")
            alias[key] = members[0]

    names = []
    where = {}
    for g, gate in enumerate(gates):
        for name in gate.bit_order:
            rep = alias.get((g, name), (g, name))
            if rep in where:
                continue
            label = gates[rep[0]].bit_order[gates[rep[0]].bit_order.index(rep[1])]
            if label in names:
                raise SpecError(f"bit name {label!r} used by several gates without an equivalence")
            where[rep] = len(names)
            names.append(label)
    n = len(names) + 1
    W = np.zeros((n, n))
    for g, gate in enumerate(gates):
        local = [where[alias.get((g, name), (g, name))] for name in gate.bit_order]
        local.append(n - 1)
        src = [gate.spec.index_of(name) for name in gate.bit_order] + [gate.spec.n - 1]
        W[np.ix_(local, local)] += np.asarray(gate.spec.W)[np.ix_(src, src)]
        # biases of the source network couple to the shared handle
        hb = np.asarray(gate.spec.h)[src]
        W[local, n - 1] += hb
        W[n - 1, local] += hb
    np.fill_diagonal(W, 0.0)
    labels = tuple(names) + (HANDLE,)
    spec = NetworkSpec.from_dense(W, np.zeros(n), clamps=[(n - 1, 1)], symmetric=True,
                                  labels=labels)
    return GateMatrix(spec, tuple(names), 1.0, None)


def _bipolar(v) -> int:
    v = int(v)
    if v in (1, -1):
        return v
    if v == 0:
        return -1
    raise SpecError(f"bit value must be 0/1 or -1/+1, got {v}")


def _named_bipolar(assignment: Mapping) -> dict:
    return {k: _bipolar(v) for k, v in assignment.items()}
