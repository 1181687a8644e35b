"""Lacunary cosine series and their coefficient-side functionals.

A lacunary function is ``sum_nu lambda_nu prod_j cos(2^nu_j x_j)``; each
dyadic block holds exactly one product of cosines, so norms and moduli of
such functions are comparable to explicit sums over ``lambda``.  The
functionals here evaluate those sums; the harness compares them with the
numerically computed norms and moduli.

Block indices ``nu`` start at 0 (frequency ``2^0 = 1``).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .approximation import AngleCache, best_angle_l2
from .lorentz import DEFAULT_SAMPLING, LorentzIndex, Sampling
from .smoothness import FractionalOrder
from .spectrum import SpectralFunction, complement, nonempty_subsets

__all__ = [
    "LacunarySpec",
    "build",
    "geometric",
    "coeff_l2_functional",
    "coeff_ltau_functional",
    "block_bound_terms",
    "block_bound",
    "block_bound_bruteforce",
    "in_equivalence_domain",
    "equivalence_functional",
]


@dataclass(frozen=True)
class LacunarySpec:
    """Coefficients ``lambda_nu`` on block indices ``nu`` in ``[0, V]^m``.

    Entries outside the truncation box ``V`` and zero entries are dropped.
    """

    dim: int
    lam: Mapping[tuple[int, ...], float]
    V: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        V = (6,) * self.dim if self.V is None else tuple(int(v) for v in np.broadcast_to(self.V, (self.dim,)))
        clean = {}
        for nu, val in self.lam.items():
            nu = tuple(int(v) for v in nu)
            if len(nu) != self.dim or min(nu) < 0:
                raise ValueError(f"bad block index {nu} for dim {self.dim}")
            if nu in clean:
                raise ValueError(f"duplicate block index {nu}")
            if all(v <= b for v, b in zip(nu, V)) and val != 0:
                clean[nu] = float(val)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "lam", dict(sorted(clean.items())))

    def indices(self) -> np.ndarray:
        return np.array(list(self.lam), dtype=np.int64).reshape(-1, self.dim)

    def values(self) -> np.ndarray:
        return np.array(list(self.lam.values()), dtype=float)

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "lambda": [[*nu, v] for nu, v in self.lam.items()]})

    @classmethod
    def from_json(cls, text: str, V=None) -> "LacunarySpec":
        obj = json.loads(text)
        m = int(obj["dim"])
        lam = {}
        for row in obj["lambda"]:
            nu = tuple(int(v) for v in row[:m])
            if nu in lam:
                raise ValueError(f"duplicate block index {nu}")
            lam[nu] = float(row[m])
        if V is None:
            V = tuple(max([nu[j] for nu in lam] or [0]) for j in range(m))
        return cls(m, lam, V)


def geometric(dim: int, rho, V) -> LacunarySpec:
    """``lambda_nu = prod_j 2^(-nu_j rho_j)`` on the full box ``[0, V]^m``."""
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (dim,))
    V = tuple(int(v) for v in np.broadcast_to(V, (dim,)))
    lam = {nu: float(np.prod(2.0 ** (-np.asarray(nu) * rho)))
           for nu in itertools.product(*[range(v + 1) for v in V])}
    return LacunarySpec(dim, lam, V)


def build(spec: LacunarySpec) -> SpectralFunction:
    """Expand ``prod cos(2^nu_j x_j)`` into ``2^m`` exponentials per block."""
    m = spec.dim
    signs = np.array(list(itertools.product((1, -1), repeat=m)), dtype=np.int64)
    keys, coeffs = [], []
    for nu, val in spec.lam.items():
        base = np.left_shift(1, np.asarray(nu, dtype=np.int64))
        keys.append(signs * base)
        coeffs.append(np.full(len(signs), val / 2 ** m, dtype=complex))
    if not keys:
        return SpectralFunction.zero(m)
    keys = np.concatenate(keys)
    if len(np.unique(keys, axis=0)) != len(keys):
        raise ValueError("lacunary blocks collide")
    return SpectralFunction(keys, np.concatenate(coeffs), real=True, dim=m)


def coeff_l2_functional(spec: LacunarySpec) -> float:
    """``(sum lambda^2)^(1/2)``."""
    return float(np.sqrt(np.sum(spec.values() ** 2)))


def coeff_ltau_functional(spec: LacunarySpec, tau: float) -> float:
    """``(sum |lambda|^tau)^(1/tau)``."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    return float(np.sum(np.abs(spec.values()) ** tau) ** (1.0 / tau))


def _region_masks(nu: np.ndarray, n: np.ndarray):
    inside = nu <= n
    box = inside.all(axis=1)
    far = (~inside).all(axis=1)
    return inside, box, far


def block_bound_terms(spec: LacunarySpec, n, alpha) -> dict:
    """The three parts of the coefficient bound for the modulus at ``pi / 2^n``.

    ``box``: ``prod 2^(-n alpha) (sum_{nu <= n} prod 4^(nu alpha) lambda^2)^(1/2)``;
    ``mixed[e]`` for proper nonempty ``e``: the same with the weights and
    the box condition only on ``e`` and ``nu_j > n_j`` off ``e``;
    ``tail``: ``(sum_{nu > n} lambda^2)^(1/2)``.
    """
    m = spec.dim
    alpha = np.asarray(FractionalOrder(alpha), dtype=float)
    n = np.broadcast_to(np.asarray(n, dtype=np.int64), (m,))
    if np.any(n < 0):
        raise ValueError("n must be non-negative")
    nu, lam2 = spec.indices(), spec.values() ** 2
    inside, box, far = _region_masks(nu, n)
    growth = 4.0 ** (nu * alpha)  # 2^(2 nu_j alpha_j)
    decay = 2.0 ** (-n * alpha)
    terms = {
        "box": float(np.prod(decay)) * math.sqrt(float(np.sum(lam2[box] * np.prod(growth[box], axis=1)))),
        "tail": math.sqrt(float(np.sum(lam2[far]))),
        "mixed": {},
    }
    for e in nonempty_subsets(m):
        if len(e) == m:
            continue
        on, off = sorted(e), sorted(complement(e, m))
        sel = inside[:, on].all(axis=1) & (~inside[:, off]).all(axis=1)
        s = float(np.sum(lam2[sel] * np.prod(growth[sel][:, on], axis=1)))
        terms["mixed"][e] = float(np.prod(decay[on])) * math.sqrt(s)
    return terms


def block_bound(spec: LacunarySpec, n, alpha) -> float:
    t = block_bound_terms(spec, n, alpha)
    return t["box"] + sum(t["mixed"].values()) + t["tail"]


def block_bound_bruteforce(spec: LacunarySpec, n, alpha) -> float:
    """Same value as :func:`block_bound`, classifying each index in one loop."""
    m = spec.dim
    n = [int(v) for v in np.broadcast_to(n, (m,))]
    alpha = [float(a) for a in FractionalOrder(alpha)]
    sums: dict = {}
    for nu, val in spec.lam.items():
        e = frozenset(j for j in range(m) if nu[j] <= n[j])
        w = 1.0
        for j in e:
            w *= 2.0 ** (2 * nu[j] * alpha[j])
        sums[e] = sums.get(e, 0.0) + val * val * w
    total = 0.0
    for e, s in sums.items():
        pre = 1.0
        for j in e:
            pre *= 2.0 ** (-n[j] * alpha[j])
        total += pre * math.sqrt(s)
    return total


def in_equivalence_domain(idx: LorentzIndex) -> bool:
    """``1 < p <= 2`` with ``1 < tau <= 2``, or ``p > 2`` with ``tau > 1``."""
    p, tau = idx.p, idx.tau
    return (1 < p <= 2 and 1 < tau <= 2) or (p > 2 and tau > 1)


def equivalence_functional(f, n, alpha, idx: LorentzIndex, y: str = "surrogate",
                     sampling: Sampling = DEFAULT_SAMPLING, check_domain: bool = True) -> float:
    """``prod n_j^-alpha_j (sum_{1 <= nu <= n+1} prod nu^(2 alpha - 1) Y_{nu-1}^2)^(1/2)``.

    ``f`` is a :class:`LacunarySpec` or a SpectralFunction.  ``y`` selects
    the angle approximation: ``"surrogate"`` (the norm of ``f - U_l f``) or
    ``"l2"`` (the exact far-region l2 mass, the true value at p = tau = 2).
    """
    if check_domain and not in_equivalence_domain(idx):
        raise ValueError(f"{idx} is outside the equivalence domain")
    if isinstance(f, LacunarySpec):
        f = build(f)
    alpha = np.asarray(FractionalOrder(alpha), dtype=float)
    n = np.broadcast_to(np.asarray(n, dtype=np.int64), (f.dim,))
    if np.any(n < 1):
        raise ValueError("n must be >= 1")
    if y == "surrogate":
        Y = AngleCache(f, idx, sampling)
    elif y == "l2":
        def Y(l):
            return best_angle_l2(f, l)
    else:
        raise ValueError(f"unknown approximation {y!r}")
    total = 0.0
    for nu in itertools.product(*[range(1, int(k) + 2) for k in n]):
        v = Y(np.asarray(nu) - 1)
        if v:
            total += float(np.prod(np.asarray(nu, dtype=float) ** (2 * alpha - 1))) * v * v
    return float(np.prod(n.astype(float) ** -alpha)) * math.sqrt(total)
