#!/usr/bin/env python3
"""Magnet lifetimes, the 1T/MTJ divider and its averaged transfer curve."""

import math

import numpy as np

from pbitnet.hardware import (CircuitParams, MagnetParams, barrier_and_lifetime,
                              capacitive_weights, hardware_transfer_sweep, mtj_divider,
                              pinning_currents, transistor_curve_for, volume_for_barrier)

for ratio in (40, 14, 1):
    p = MagnetParams(0.1, 1e6, volume_for_barrier(ratio, 0.1, 1e6))
    _, _, tau = barrier_and_lifetime(p)
    pins = pinning_currents(p)
    print(f"E_b = {ratio:>2} kT: tau = {tau:.3e} s, volume = {p.volume:.2e} m^3, "
          f"I_PMA = {pins.I_PMA:.2e} A, I_IMA = {pins.I_IMA:.2e} A")

c = CircuitParams()
for R_T in (1e2, math.sqrt(c.R_P * c.R_AP), 1e6):
    print(f"R_T = {R_T:>9.0f}: V_m(P) = {mtj_divider(R_T, c.R_P, c.V_DD):+.3f} V, "
          f"V_m(AP) = {mtj_divider(R_T, c.R_AP, c.V_DD):+.3f} V")

V = np.linspace(-0.25, 0.25, 51)
R = transistor_curve_for(lambda v: math.tanh(v / 0.05), c, V)
fit = hardware_transfer_sweep(c, V, R)
print(f"transfer fit: V_0 = {fit.V_0:.4f} V, V_mid = {fit.V_mid:+.4f} V, rms {fit.residual:.1e}")

C = np.array([[0, 2, 1], [2, 0, 3], [1, 3, 0]]) * 1e-17
for scale in (10, 100, 1000):
    sw = capacitive_weights(CircuitParams(C=C, C_0=scale * C.sum()))
    print(f"C_0 = {scale:>4} sum C: approximation error {sw.max_rel_error:.2%}")
