"""Equation-level models of the 1T/MTJ p-bit and its synapse.

Units are SI throughout. Anisotropy and demagnetising fields are given as
flux densities (tesla, i.e. mu0*H) so that ``field * M_s * volume`` is an
energy in joules with ``M_s`` in A/m and volume in m^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, curve_fit

from .network import SpecError, bsn_update_bipolar

Q_E = 1.602176634e-19      # C
HBAR = 1.054571817e-34     # J s
K_B = 1.380649e-23         # J / K


@dataclass(frozen=True)
class MagnetParams:
    H_K: float              # T
    M_s: float              # A/m
    volume: float           # m^3
    tau0: float = 1e-9      # s
    alpha: float = 0.01
    H_D: float = 1.0        # T
    temperature: float = 300.0  # K
    polarization: float = 0.5

    def __post_init__(self):
        for name in ("H_K", "M_s", "volume", "tau0", "alpha", "H_D", "temperature"):
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be positive")
        if not 0 <= self.polarization <= 1:
            raise SpecError("polarization must lie in [0, 1]")

    @property
    def kT(self) -> float:
        return K_B * self.temperature


@dataclass(frozen=True)
class CircuitParams:
    V_DD: float = 0.8        # V
    V_0: float = 0.05        # V
    R_P: float = 5e3         # ohm
    R_AP: float = 10e3       # ohm
    C_0: float = 1e-15       # F
    C: np.ndarray | None = None   # F, synapse capacitances C[i, j]
    G_0: float = 0.0         # S
    G: np.ndarray | None = None   # S

    def __post_init__(self):
        if not self.R_AP > self.R_P > 0:
            raise SpecError("need R_AP > R_P > 0")
        if self.V_DD <= 0 or self.V_0 <= 0:
            raise SpecError("V_DD and V_0 must be positive")
        for name in ("C", "G"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                if np.any(arr < 0):
                    raise SpecError(f"{name} entries must be nonnegative")
                object.__setattr__(self, name, arr)
        if self.C_0 < 0 or self.G_0 < 0:
            raise SpecError("C_0 and G_0 must be nonnegative")


def lifetime(eb_over_kT: float, tau0: float) -> float:
    """Retention time ``tau0 exp(E_b / kT)``."""
    return tau0 * math.exp(eb_over_kT)


def barrier_and_lifetime(p: MagnetParams) -> tuple[float, float, float]:
    """``(E_b, E_b/kT, tau)`` with ``E_b = H_K M_s volume / 2``."""
    Eb = p.H_K * p.M_s * p.volume / 2.0
    ratio = Eb / p.kT
    return Eb, ratio, lifetime(ratio, p.tau0)


def volume_for_barrier(eb_over_kT: float, H_K: float, M_s: float,
                       temperature: float = 300.0) -> float:
    """Magnet volume giving the requested barrier height."""
    return 2.0 * eb_over_kT * K_B * temperature / (H_K * M_s)


def mtj_divider(R_T, R_MTJ, V_DD):
    """Mid-point voltage of transistor and MTJ in series,
    ``(V_DD/2)(R_T - R_MTJ)/(R_T + R_MTJ)``."""
    R_T = np.asarray(R_T, dtype=float)
    R_MTJ = np.asarray(R_MTJ, dtype=float)
    if np.any(R_T <= 0) or np.any(R_MTJ <= 0):
        raise SpecError("resistances must be positive")
    out = 0.5 * V_DD * (R_T - R_MTJ) / (R_T + R_MTJ)
    return float(out) if out.ndim == 0 else out


def scaled_bsn(V_in: float, r: float, c: CircuitParams) -> float:
    """Neuron in circuit units: ``(V_DD/2) sgn(tanh(V_in/V_0) - r)``."""
    return 0.5 * c.V_DD * bsn_update_bipolar(V_in / c.V_0, r)


@dataclass
class SynapseWeights:
    exact: np.ndarray
    approx: np.ndarray
    max_rel_error: float
    approx_ok: bool


def capacitive_weights(c: CircuitParams, tolerance: float = 0.01) -> SynapseWeights:
    """``W_ij = (V_DD/2V_0) C_ij / (C_0 + sum_j C_ij)``.

    ``approx`` drops the row sum from the denominator; ``approx_ok`` reports
    whether it stays within ``tolerance`` relative error.
    """
    if c.C is None:
        raise SpecError("capacitance matrix C is not set")
    return _divider_weights(c.C, c.C_0, c.V_DD, c.V_0, tolerance)


def resistive_weights(c: CircuitParams, tolerance: float = 0.01) -> SynapseWeights:
    """Same expression with conductances ``G`` and ``G_0``."""
    if c.G is None:
        raise SpecError("conductance matrix G is not set")
    return _divider_weights(c.G, c.G_0, c.V_DD, c.V_0, tolerance)


def _divider_weights(X, X0, V_DD, V_0, tolerance):
    X = np.asarray(X, dtype=float)
    gain = V_DD / (2.0 * V_0)
    denom = X0 + X.sum(axis=1, keepdims=True)
    exact = np.divide(gain * X, denom, out=np.zeros_like(X), where=denom > 0)
    if X0 > 0:
        approx = gain * X / X0
    else:
        approx = np.full_like(X, np.inf)
        approx[X == 0] = 0.0
    nz = exact != 0
    err = float(np.max(np.abs(approx[nz] - exact[nz]) / np.abs(exact[nz]))) if nz.any() else 0.0
    return SynapseWeights(exact, approx, err, err < tolerance)


@dataclass
class PinningCurrents:
    I_PMA: float
    I_IMA: float
    I_s: float


def pinning_currents(p: MagnetParams, I_D: float = 0.0) -> PinningCurrents:
    """Order-of-magnitude pinning currents and the spin current ``P I_D``.

    ``I_PMA = 2 (q/hbar) alpha kT`` for perpendicular magnets and
    ``I_IMA = 2 (q/hbar) alpha H_D M_s volume`` for circular in-plane ones.
    """
    pref = 2.0 * Q_E / HBAR * p.alpha
    return PinningCurrents(pref * p.kT, pref * p.H_D * p.M_s * p.volume, p.polarization * I_D)


def mean_midpoint(R_T, c: CircuitParams):
    """Average divider voltage with equal dwell in the P and AP states."""
    return 0.5 * (mtj_divider(R_T, c.R_P, c.V_DD) + mtj_divider(R_T, c.R_AP, c.V_DD))


def mean_output(R_T, c: CircuitParams):
    """Time-averaged inverter output, modelled as a unit-gain inversion of
    the averaged mid-point about mid-rail."""
    return -mean_midpoint(R_T, c)


def transistor_curve_for(target, c: CircuitParams, V_in) -> np.ndarray:
    """Tabulate ``R_T(V_in)`` whose averaged output is ``target(V_in)``
    (normalised to ``V_DD/2``); used to build synthetic round-trip tables."""
    rs = []
    lo, hi = math.log(c.R_P * 1e-15), math.log(c.R_AP * 1e15)
    for v in np.atleast_1d(V_in):
        y = float(target(v)) * 0.5 * c.V_DD
        f = lambda logR: mean_output(math.exp(logR), c) - y
        if f(lo) * f(hi) >= 0:
            raise SpecError(f"target {y / (0.5 * c.V_DD):.12g} at V_in={v:g} is out of reach")
        rs.append(math.exp(brentq(f, lo, hi, xtol=1e-14)))
    return np.array(rs)


@dataclass
class TransferFit:
    V_0: float
    V_mid: float
    residual: float
    degenerate: bool
    V_in: np.ndarray
    V_out: np.ndarray


def hardware_transfer_sweep(c: CircuitParams, V_in, R_T) -> TransferFit:
    """Fit ``<V_out>/(V_DD/2) = tanh((V_in - V_mid)/V_0)`` to a tabulated
    transistor curve ``R_T(V_in)``.

    The table must be strictly monotone in ``R_T``. A flat response (for
    instance ``R_T = sqrt(R_P R_AP)`` throughout) is reported as degenerate
    with ``V_0 = inf``.
    """
    V_in = np.asarray(V_in, dtype=float)
    R_T = np.asarray(R_T, dtype=float)
    if V_in.shape != R_T.shape or V_in.ndim != 1 or len(V_in) < 3:
        raise SpecError("need matching 1-D tables with at least 3 points")
    if np.any(np.diff(V_in) <= 0):
        raise SpecError("V_in must be strictly increasing")
    dR = np.diff(R_T)
    if not (np.all(dR < 0) or np.all(dR > 0) or np.all(dR == 0)):
        raise SpecError("R_T(V_in) table is not monotone")
    y = mean_output(R_T, c) / (0.5 * c.V_DD)
    span = float(np.ptp(y))
    if span < 1e-9:
        return TransferFit(math.inf, math.nan, float(np.abs(y).max()), True, V_in, y)
    # initial guess from the crossing and slope
    mid = float(V_in[np.argmin(np.abs(y))])
    slope = np.gradient(y, V_in)
    k = int(np.argmax(np.abs(slope)))
    v0_guess = 1.0 / max(abs(slope[k]), 1e-12)
    model = lambda v, v0, vm: np.tanh((v - vm) / v0)
    sign = 1.0 if y[-1] >= y[0] else -1.0
    (v0, vm), _ = curve_fit(model, V_in, y, p0=(sign * v0_guess, mid), maxfev=20000)
    residual = float(np.sqrt(np.mean((model(V_in, v0, vm) - y) ** 2)))
    return TransferFit(float(v0), float(vm), residual, False, V_in, y)
