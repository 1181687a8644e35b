"""Lacunary cosine series: norms and moduli read off the coefficients.

Run with ``python3 demos/lacunary_blocks.py``.
"""
import numpy as np

from mixmod import LorentzIndex, modulus, norm
from mixmod.lacunary import (block_bound, build, coeff_l2_functional, equivalence_functional,
                             geometric)
from mixmod.lorentz import Sampling

spec = geometric(2, (1.0, 0.5), 4)
f = build(spec)
sampling = Sampling(2)
print(f"{len(spec.lam)} blocks, {len(f)} Fourier coefficients, l2 of lambda = {coeff_l2_functional(spec):.6f}")

# the Lorentz norm stays within constants of the l2 norm of the coefficients
for idx in (LorentzIndex(2, 2), LorentzIndex(4, 3), LorentzIndex(1.5, 1.5)):
    print(f"{idx}: ||f|| / ||lambda||_2 = {norm(f, idx, sampling) / coeff_l2_functional(spec):.4f}")

# modulus at pi / 2^k against the block bound, and at 1/n against the angle sum
idx, alpha = LorentzIndex(4, 3), (1.0, 1.0)
for k in range(4):
    n = 2 ** k
    w = modulus(f, alpha, np.full(2, np.pi / n), idx, sampling=sampling).value
    w_n = modulus(f, alpha, np.full(2, 1.0 / n), idx, sampling=sampling).value
    i_n = equivalence_functional(f, (n, n), alpha, idx, sampling=sampling)
    print(f"n={n:<3} omega/block bound = {w / block_bound(spec, (k, k), alpha):.4f}"
          f"   omega(1/n)/I_n = {w_n / i_n:.4f}")
