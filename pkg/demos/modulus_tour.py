"""Fractional differences and the mixed modulus on a few closed forms.

Run with ``python3 demos/modulus_tour.py``.
"""
import math

import numpy as np

from mixmod import LorentzIndex, modulus, norm
from mixmod.smoothness import frac_difference_direct, frac_difference_multiplier
from mixmod.spectrum import SpectralFunction

L2 = LorentzIndex(2, 2)

# The binomial series and the Fourier symbol are two independent routes to
# the same operator; on a random polynomial they agree to the tail bound.
rng = np.random.default_rng(0)
keys = rng.integers(1, 7, size=(12, 2)) * rng.choice([-1, 1], size=(12, 2))
f = SpectralFunction(np.concatenate([keys, -keys]), np.tile(rng.normal(size=12), 2), real=True, dim=2)
for alpha, h in [(0.3, 0.9), (1.7, -2.1), (2.5, 0.05)]:
    direct, info = frac_difference_direct(f, alpha, 0, h, full_output=True)
    gap = (direct - frac_difference_multiplier(f, alpha, 0, h)).l2_norm() / f.l2_norm()
    print(f"alpha={alpha:<4} h={h:<5} terms={info.terms:<6} tail bound={info.tail_bound:.1e}  rel gap={gap:.1e}")

# cos x: omega_1(t) = sqrt(2) |sin(t/2)| in L2
cos = SpectralFunction.cosine_product([1])
for t in (math.pi / 8, math.pi / 2, math.pi):
    print(f"omega(cos, {t:.3f}) = {modulus(cos, (1,), (t,), L2).value:.12f}"
          f"   closed form {math.sqrt(2) * abs(math.sin(t / 2)):.12f}")

# Lorentz indices change the size but not the shape of the answer
for idx in (LorentzIndex(2.5, 1.5), LorentzIndex(4, 3), LorentzIndex(1.5, 3)):
    r = modulus(cos, (1,), (math.pi / 2,), idx)
    print(f"{idx}: omega / ||cos|| = {r.value / norm(cos, idx):.6f} at h = {r.argmax[0]:+.4f}")
