"""Lorentz quasi-norms of sampled periodic functions.

The norm

    ||f||_{p,tau} = ( int_0^1 f*(t)^tau t^(tau/p - 1) dt )^(1/tau)

is evaluated for the step function defined by equal-mass grid samples.
Sorting the absolute sample values gives the non-increasing rearrangement
of that step function exactly, and the weight integral over each cell is
available in closed form, so the only error is the sampling itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectrum import GridSample, SpectralFunction, evaluate

__all__ = [
    "LorentzIndex",
    "Rearrangement",
    "Sampling",
    "NormReport",
    "DEFAULT_SAMPLING",
    "rearrange",
    "lorentz_norm",
    "grid_dims",
    "norm",
    "norm_report",
    "norm_of_values",
]

UNDERFLOW = 1e-300


@dataclass(frozen=True)
class LorentzIndex:
    """Exponent pair ``(p, tau)`` with ``1 < p < inf`` and ``1 <= tau < inf``."""

    p: float
    tau: float

    def __post_init__(self):
        p, tau = float(self.p), float(self.tau)
        if not (1.0 < p < math.inf):
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        if not (1.0 <= tau < math.inf):
            raise ValueError(f"tau must lie in [1, inf), got {self.tau}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "tau", tau)

    @property
    def is_lebesgue(self) -> bool:
        return self.p == self.tau

    def __str__(self) -> str:
        return f"L({self.p:g},{self.tau:g})"


L2 = LorentzIndex(2.0, 2.0)


@dataclass(frozen=True)
class Rearrangement:
    """Non-increasing values ``v_0 >= ... >= v_{M-1} >= 0``, each of mass ``1/M``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("rearrangement must be non-negative and non-increasing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Sampling:
    """Grid policy for norms: ``N_j = max(ceil(oversample (2 band_j + 1)), n_min)``."""

    oversample: float = 4.0
    n_min: int = 64

    def __post_init__(self):
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")
        if self.n_min < 1:
            raise ValueError("n_min must be positive")


DEFAULT_SAMPLING = Sampling()


def rearrange(g) -> Rearrangement:
    """Sort ``|values|`` in decreasing order (accepts a GridSample or an array)."""
    values = g.values if isinstance(g, GridSample) else np.asarray(g)
    return Rearrangement(np.sort(np.abs(values).reshape(-1))[::-1])


@lru_cache(maxsize=64)
def _cell_weights(M: int, p: float, tau: float) -> np.ndarray:
    """``int_{i/M}^{(i+1)/M} t^(tau/p - 1) dt`` for ``i = 0..M-1``."""
    s = tau / p
    i = np.arange(M, dtype=float)
    # (i+1)^s - i^s without cancellation
    diff = np.empty(M)
    diff[0] = 1.0
    diff[1:] = i[1:] ** s * np.expm1(s * np.log1p(1.0 / i[1:]))
    w = diff * (M ** -s / s)
    w.flags.writeable = False
    return w


def lorentz_norm(r: Rearrangement, idx: LorentzIndex) -> float:
    """Exact Lorentz functional of the step function described by ``r``."""
    v = r.values
    if not len(v):
        return 0.0
    v = np.where(v < UNDERFLOW, 0.0, v)
    top = v[0]
    if top == 0.0:
        return 0.0
    w = _cell_weights(len(v), idx.p, idx.tau)
    # powers of values scaled to [0, 1] neither overflow nor underflow
    return float(top * np.dot((v / top) ** idx.tau, w) ** (1.0 / idx.tau))


def norm_of_values(values: np.ndarray, idx: LorentzIndex) -> float:
    """Lorentz norm of raw grid values; skips the sort when ``tau == p``."""
    a = np.abs(values).reshape(-1)
    a = np.where(a < UNDERFLOW, 0.0, a)
    top = a.max(initial=0.0)
    if top == 0.0:
        return 0.0
    a /= top
    if idx.is_lebesgue:
        # every cell weight is 1/M
        return float(top * np.mean(a ** idx.p) ** (1.0 / idx.p))
    a.sort()
    w = _cell_weights(len(a), idx.p, idx.tau)
    return float(top * np.dot(a[::-1] ** idx.tau, w) ** (1.0 / idx.tau))


def grid_dims(f: SpectralFunction, sampling: Sampling = DEFAULT_SAMPLING) -> tuple[int, ...]:
    return tuple(max(math.ceil(sampling.oversample * (2 * b + 1)), sampling.n_min) for b in f.band)


def norm(f: SpectralFunction, idx: LorentzIndex, sampling: Sampling = DEFAULT_SAMPLING) -> float:
    """``||f||_{p,tau}`` from samples on the grid chosen by ``sampling``."""
    if not len(f):
        return 0.0
    return norm_of_values(evaluate(f, grid_dims(f, sampling)).values, idx)


@dataclass(frozen=True)
class NormReport:
    value: float
    refined: float
    dims: tuple[int, ...]

    @property
    def convergence(self) -> float:
        """Change of the norm when every grid dimension is doubled."""
        return abs(self.refined - self.value)


def norm_report(f: SpectralFunction, idx: LorentzIndex,
                sampling: Sampling = DEFAULT_SAMPLING) -> NormReport:
    """Norm together with a grid-doubling convergence estimate."""
    dims = grid_dims(f, sampling)
    if not len(f):
        return NormReport(0.0, 0.0, dims)
    coarse = norm_of_values(evaluate(f, dims).values, idx)
    fine = norm_of_values(evaluate(f, tuple(2 * n for n in dims)).values, idx)
    return NormReport(coarse, fine, dims)
