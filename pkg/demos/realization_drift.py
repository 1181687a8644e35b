"""Why the realization ratio drifts with n on a fixed polynomial.

Once n exceeds the band of f, omega(f, pi/n) is governed by small steps,
where each difference factor behaves like k h, so the modulus tends to
prod (pi/n_j)^alpha_j ||f^(alpha)||.  The realization functional keeps only
its derivative term, prod n_j^-alpha_j ||f^(alpha)||.  Their ratio therefore
climbs to pi^(alpha_1 + alpha_2) rather than staying flat.

Run with ``python3 demos/realization_drift.py``.
"""
import math

import numpy as np

from mixmod import LorentzIndex
from mixmod.approximation import realization_sides
from mixmod.harness.families import random_band

f = random_band(2, 8, 1.0, np.random.default_rng([20240521, 0]))
idx = LorentzIndex(2, 2)
for alpha in [(1.0, 1.0), (0.5, 0.5)]:
    print(f"alpha={alpha}, limit pi^{sum(alpha):g} = {math.pi ** sum(alpha):.3f}")
    for n in (2, 4, 8, 16, 32, 64):
        r = realization_sides(f, (n, n), alpha, idx)
        print(f"  n={n:<3} ratio={r.ratio:.3f}")
