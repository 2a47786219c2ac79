#!/usr/bin/env python3
"""A bipolar RBM learning the 2x2 bars-and-stripes images by CD-1."""

import numpy as np

from pbitnet.apps import RbmSpec, bars_and_stripes_2x2, train_rbm, visible_marginal

data = bars_and_stripes_2x2()
rbm = RbmSpec.random(4, 6, seed=0)
trained, curve = train_rbm(rbm, data, 2000, seed=1, record_every=250)
for step, kl in curve:
    print(f"step {step:>4}: KL(data || model) = {kl:.4f}")

p = visible_marginal(trained)
images = {int("".join("1" if v > 0 else "0" for v in row), 2) for row in data}
print("model mass on the six images:", round(float(p[sorted(images)].sum()), 4))
for k in np.argsort(p)[::-1][:6]:
    print(f"  {k:04b}  {p[k]:.3f}{'' if k in images else '  (not in data)'}")
