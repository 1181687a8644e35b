"""Test-function families used by the experiment suites."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..lacunary import build, geometric
from ..lorentz import Sampling
from ..spectrum import SpectralFunction

__all__ = ["FamilySpec", "Member", "make_family", "random_band", "tensor_power"]

KINDS = ("lacunary", "random", "product")

# default one-dimensional factor of the product family
DEFAULT_FACTOR = ((1, 1.0, 0.0), (2, 0.0, -0.4), (5, 0.25, 0.0))


@dataclass(frozen=True)
class FamilySpec:
    """Description of one function family.

    ``kind`` is ``lacunary`` (geometric coefficients ``prod 2^(-nu_j rho_j)``
    up to block ``V``), ``random`` (``count`` random polynomials of the given
    ``band`` with ``|a_k| ~ prod |k_j|^-decay``) or ``product`` (the tensor
    power of the one-dimensional polynomial ``factor``, given as
    ``(k, re, im)`` rows with ``k > 0``).  ``oversample`` overrides the
    suite's norm sampling for this family.
    """

    kind: str
    name: str | None = None
    rho: float | tuple[float, ...] = 1.0
    V: int = 5
    band: int = 8
    decay: float = 1.0
    count: int = 1
    factor: tuple = DEFAULT_FACTOR
    oversample: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"family kind must be one of {KINDS}, got {self.kind!r}")
        if self.name is None:
            object.__setattr__(self, "name", self.kind)
        if "/" in self.name:
            raise ValueError("family names may not contain '/'")
        if self.V < 0 or self.band < 1 or self.count < 1:
            raise ValueError("V must be >= 0, band and count >= 1")
        object.__setattr__(self, "factor", tuple(tuple(r) for r in self.factor))
        if not np.isscalar(self.rho):
            object.__setattr__(self, "rho", tuple(float(r) for r in self.rho))
        if any(int(r[0]) <= 0 for r in self.factor):
            raise ValueError("product factor frequencies must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "FamilySpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown family fields {sorted(unknown)}")
        return cls(**d)

    def sampling(self, default: Sampling) -> Sampling:
        if self.oversample is None:
            return default
        return Sampling(self.oversample, default.n_min)


@dataclass(frozen=True)
class Member:
    family: FamilySpec
    index: int
    f: SpectralFunction
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def label(self) -> str:
        return f"{self.family.name}/{self.index}"


def _halfplane(keys: np.ndarray) -> np.ndarray:
    first = keys[np.arange(len(keys)), np.argmax(keys != 0, axis=1)]
    return first > 0


def random_band(dim: int, band: int, decay: float, rng: np.random.Generator) -> SpectralFunction:
    """Real random polynomial, unit l2 norm, no zero coordinates."""
    axis = np.r_[-band:0, 1:band + 1]
    keys = np.array(list(itertools.product(axis, repeat=dim)), dtype=np.int64)
    half = keys[_halfplane(keys)]
    phase = np.exp(2j * np.pi * rng.random(len(half)))
    amp = np.prod(np.abs(half).astype(float) ** -decay, axis=1)
    c = amp * phase
    f = SpectralFunction(np.concatenate([half, -half]), np.concatenate([c, c.conj()]), real=True, dim=dim)
    return f / f.l2_norm()


def tensor_power(factor, dim: int) -> SpectralFunction:
    """``P(x_1) ... P(x_m)`` for the real 1D polynomial with the given rows."""
    one = {}
    for k, re, im in factor:
        c = complex(re, im)
        one[int(k)] = one.get(int(k), 0) + c
        one[-int(k)] = one.get(-int(k), 0) + c.conjugate()
    items = list(one.items())
    keys, coeffs = [], []
    for combo in itertools.product(items, repeat=dim):
        keys.append([k for k, _ in combo])
        coeffs.append(np.prod([c for _, c in combo]))
    return SpectralFunction(np.array(keys, dtype=np.int64), coeffs, real=True, dim=dim)


def make_family(spec: FamilySpec, dim: int, seed: int) -> list[Member]:
    """Deterministic members of a family; ``seed`` only affects ``random``."""
    if spec.kind == "lacunary":
        lac = geometric(dim, spec.rho, spec.V)
        return [Member(spec, 0, build(lac), {"lacunary": lac})]
    if spec.kind == "random":
        out = []
        for i in range(spec.count):
            rng = np.random.default_rng([int(seed), i])
            out.append(Member(spec, i, random_band(dim, spec.band, spec.decay, rng)))
        return out
    return [Member(spec, 0, tensor_power(spec.factor, dim))]
