#!/usr/bin/env python3
"""Transverse-field Ising spins mapped onto rings of classical replicas."""

import numpy as np

from pbitnet.annealing import (AnnealSchedule, QuantumIsingSpec, anneal, ground_states,
                               quantum_anneal, quantum_thermal_averages,
                               replica_exact_averages, sample_pimc)
from pbitnet.network import state_index

q = QuantumIsingSpec.from_triplets(2, [(0, 1, 1.0)], gamma=0.5, beta=1.0)
exact = quantum_thermal_averages(q)["zz"][0, 1]
print(f"exact <z1 z2> = {exact:.6f}")
for n in (2, 4, 10, 20, 40):
    zz = replica_exact_averages(QuantumIsingSpec(2, q.J, q.h_z, 0.5, 1.0, n))["zz"][0, 1]
    print(f"  n = {n:>2}: {zz:.6f}  ({abs(zz - exact) / exact:.3%})")

# replica world lines decorrelate slowly, so short runs scatter by several percent
for sweeps in (100_000, 1_000_000):
    obs, _ = sample_pimc(q, sweeps, seed=1)
    print(f"sampled at n = 10, {sweeps} sweeps: {obs['zz'][0, 1]:.4f}")

# frustrated ring: quantum vs classical annealing
ring = QuantumIsingSpec.from_triplets(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, -1)],
                                      gamma=3.0, beta=4.0, n_replicas=8)
_, gs = ground_states(ring.classical())
qa = sum(state_index(quantum_anneal(ring, np.geomspace(3, 0.01, 40), seed=s).state) in gs
         for s in range(20))
sa = sum(state_index(anneal(ring.classical(), AnnealSchedule(stages=100, t_eq=10), seed=s).best)
         in gs for s in range(20))
print(f"frustrated ring ground state: quantum {qa}/20, classical {sa}/20")
