#!/usr/bin/env python3
"""Sampling a small symmetric p-bit network and comparing with enumeration."""

import time

import numpy as np

from pbitnet import NetworkSpec, UpdateSchedule, enumerate_states, kl_divergence, run_chain

rng = np.random.default_rng(7)
n = 8
W = np.triu(rng.uniform(-1, 1, (n, n)), 1)
spec = NetworkSpec.from_dense(W + W.T, rng.uniform(-1, 1, n), symmetric=True)
table = enumerate_states(spec)
print(f"{n} p-bits, logZ = {table.logZ:.4f}")

# KL to the exact distribution shrinks as the chain gets longer
for sweeps in (10**3, 10**4, 10**5, 10**6):
    t0 = time.perf_counter()
    trace = run_chain(spec, UpdateSchedule("random-scan", sweeps, seed=1))
    kl = kl_divergence(trace.probabilities(), table)
    print(f"  random-scan {sweeps:>8} sweeps: KL = {kl:.2e}  ({time.perf_counter() - t0:.2f}s)")

# asynchronous updates with a stale synapse
for delay in (0.0, 0.1, 0.5, 2.0):
    trace = run_chain(spec, UpdateSchedule("poisson-async", 200_000, synapse_delay=delay, seed=2))
    print(f"  poisson-async delay {delay:>4}: KL = {kl_divergence(trace.probabilities(), table):.2e}")

top = np.argsort(table.probabilities)[::-1][:5]
print("most likely configurations:", ", ".join(f"{k} ({table.probabilities[k]:.3f})" for k in top))
