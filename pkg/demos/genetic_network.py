#!/usr/bin/env python3
"""Relatedness in a family tree estimated from time-averaged p-bit products."""

from pbitnet.apps import (FAMILY_TREE, CorrelationRequest, build_genetic_network, correlate,
                          directed_correlations, named_pairs, sample_genetic)

pairs = [("C1", "C2"), ("M1", "C3"), ("GF1", "C1"), ("C1", "C3"), ("F1", "M1")]

for w in (1.0, 2.0, 5.0):
    spec = build_genetic_network(FAMILY_TREE, w=w)
    idx = named_pairs(spec, pairs)
    exact = directed_correlations(spec, idx)
    T = 200_000
    seq = correlate(sample_genetic(spec, T, seed=1), CorrelationRequest(idx, T))
    asy = correlate(sample_genetic(spec, T, seed=1, mode="poisson-async"),
                    CorrelationRequest(idx, T))
    print(f"w = {w}")
    for (a, b), e, s, q in zip(pairs, exact, seq, asy):
        print(f"  {a:>3}-{b:<3} exact {e:+.4f}  ancestral {s:+.4f}  async {q:+.4f}")
