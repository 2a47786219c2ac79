"""Simulation of probabilistic-bit (p-bit) networks."""

__version__ = "0.1.0"

from .network import (NetworkSpec, SampleTrace, SpecError, StateVector, UpdateSchedule,
                      bsn_update_binary, bsn_update_bipolar, run_chain, run_chains,
                      state_index, synapse_input)
from .exact import EnergyTable, energy, enumerate_directed, enumerate_states, kl_divergence

__all__ = [
    "NetworkSpec", "SampleTrace", "SpecError", "StateVector", "UpdateSchedule",
    "bsn_update_binary", "bsn_update_bipolar", "run_chain", "run_chains", "state_index",
    "synapse_input", "EnergyTable", "energy", "enumerate_directed", "enumerate_states",
    "kl_divergence",
]
