#!/usr/bin/env python3
"""An AND/OR/XNOR gate learned from its truth table, run forwards and backwards."""

import numpy as np

from pbitnet.logic import (and_or_xnor_table, row_masses, run_direct, run_inverse,
                           run_unclamped, synthesize)

table = and_or_xnor_table()
gate = synthesize(table)
print("bit order:", gate.bit_order, "-> rows", table.indices())
print("row masses at strength 1:", np.round(row_masses(gate), 4))


def show(title, counts, k=4):
    p = counts / counts.sum()
    top = np.argsort(p)[::-1][:k]
    print(f"{title:<22}", "  ".join(f"{i:>2}:{p[i]:.3f}" for i in top))


strong = gate.with_strength(2.0)
show("unclamped", run_unclamped(gate, 200_000, seed=0))
show("direct A=1 B=0", run_direct(strong, {"A": 1, "B": 0}, 200_000, seed=1))
show("direct A=0 B=0", run_direct(strong, {"A": 0, "B": 0}, 200_000, seed=2))
show("inverse XNOR=0", run_inverse(strong, {"XNOR": 0}, 200_000, seed=3))
show("inverse AND=1", run_inverse(strong, {"AND": 1}, 200_000, seed=4))

# doubling the weights squares the probability ratios
P1, P2 = gate.distribution(), strong.distribution()
print(f"P(17)/P(0): {P1[17] / P1[0]:.2f} at strength 1, {P2[17] / P2[0]:.2f} at strength 2")
