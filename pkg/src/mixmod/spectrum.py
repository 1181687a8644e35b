"""Sparse Fourier representation of periodic functions on the torus.

A function is stored as a finite map ``k -> a_k`` from integer frequency
vectors to complex coefficients and is understood as

    f(2*pi*x) = sum_k a_k exp(i <k, 2*pi*x>),   x in [0, 1)^m.

Every stored function has zero mean in each variable separately: no
coefficient may sit on a frequency with a zero coordinate.  All linear
operators (partial sums, dyadic blocks, angular sums, fractional
derivatives, translations) act diagonally on the coefficients.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "SpectralFunction",
    "FrequencyBlock",
    "GridSample",
    "complement",
    "nonempty_subsets",
    "restrict",
    "partial_sum",
    "dyadic_block",
    "angle_region",
    "angular_sum",
    "angle_residual",
    "angle_decomposition",
    "frac_derivative",
    "shift",
    "evaluate",
    "analyze",
    "to_json",
    "from_json",
]

#: imaginary residue allowed when a real-flagged function is sampled
REAL_RESIDUE_TOL = 1e-10


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class SpectralFunction:
    """Trigonometric polynomial with zero axis means, stored sparsely.

    Parameters
    ----------
    keys : (n, m) array_like of int
        Frequency vectors.  Duplicates are summed.
    coeffs : (n,) array_like of complex
        Fourier coefficients ``a_k``.
    real : bool
        Declare the function real valued.  The coefficients must then be
        conjugate symmetric, ``a_{-k} = conj(a_k)``.
    dim : int, optional
        Number of variables; required when ``keys`` is empty.
    drop_axis_means : bool
        Silently discard coefficients on frequencies with a zero
        coordinate instead of rejecting them.

    Instances are immutable; every operator returns a new object.
    """

    __slots__ = ("keys", "coeffs", "real", "_fp")

    def __init__(self, keys, coeffs, real: bool = False, dim: int | None = None,
                 drop_axis_means: bool = False):
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        keys = np.asarray(keys, dtype=np.int64)
        if keys.size == 0:
            if dim is None:
                raise ValueError("dim is required for an empty coefficient set")
            keys = keys.reshape(0, dim)
        elif keys.ndim == 1:
            keys = keys.reshape(-1, 1) if dim in (None, 1) else keys.reshape(-1, dim)
        if dim is not None and keys.shape[1] != dim:
            raise ValueError(f"keys have {keys.shape[1]} columns, expected dim={dim}")
        if keys.shape[0] != coeffs.shape[0]:
            raise ValueError("keys and coeffs have different lengths")
        if keys.shape[1] < 1:
            raise ValueError("dim must be positive")

        if keys.shape[0]:
            keys, inverse = np.unique(keys, axis=0, return_inverse=True)
            inverse = inverse.reshape(-1)
            summed = np.zeros(keys.shape[0], dtype=complex)
            np.add.at(summed, inverse, coeffs)
            coeffs = summed

        on_axis = np.any(keys == 0, axis=1)
        if np.any(on_axis & (coeffs != 0)):
            if not drop_axis_means:
                raise ValueError("coefficient on a frequency with a zero coordinate; "
                                 "functions must have zero mean in every variable")
        keep = (coeffs != 0) & ~on_axis
        self._set(keys[keep], coeffs[keep], bool(real))
        if self.real:
            self._check_conjugate_symmetry()

    @classmethod
    def _new(cls, keys: np.ndarray, coeffs: np.ndarray, real: bool) -> "SpectralFunction":
        # keys are already canonical (sorted, unique, off-axis)
        obj = cls.__new__(cls)
        keep = coeffs != 0
        obj._set(keys[keep], coeffs[keep], real)
        return obj

    def _set(self, keys, coeffs, real):
        object.__setattr__(self, "keys", _freeze(np.ascontiguousarray(keys, dtype=np.int64)))
        object.__setattr__(self, "coeffs", _freeze(np.ascontiguousarray(coeffs, dtype=complex)))
        object.__setattr__(self, "real", real)
        object.__setattr__(self, "_fp", None)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralFunction is immutable")

    def _check_conjugate_symmetry(self, rtol: float = 1e-12) -> None:
        mirrored = self.reflect(range(self.dim)).coeffs.conj()
        same_support = np.array_equal(self.reflect(range(self.dim)).keys, self.keys)
        scale = max(1.0, float(np.abs(self.coeffs).max(initial=0.0)))
        if not same_support or np.abs(mirrored - self.coeffs).max(initial=0.0) > rtol * scale:
            raise ValueError("real=True requires conjugate-symmetric coefficients")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, dim: int, real: bool = True) -> "SpectralFunction":
        return cls(np.zeros((0, dim), dtype=np.int64), [], real=real, dim=dim)

    @classmethod
    def from_dict(cls, coeffs: Mapping[Sequence[int], complex], dim: int | None = None,
                  real: bool = False, drop_axis_means: bool = False) -> "SpectralFunction":
        items = list(coeffs.items())
        if dim is None:
            if not items:
                raise ValueError("dim is required for an empty mapping")
            dim = len(tuple(np.atleast_1d(items[0][0])))
        keys = np.array([tuple(np.atleast_1d(k)) for k, _ in items], dtype=np.int64).reshape(-1, dim)
        return cls(keys, [v for _, v in items], real=real, dim=dim, drop_axis_means=drop_axis_means)

    @classmethod
    def cosine_product(cls, freqs: Sequence[int], amplitude: float = 1.0) -> "SpectralFunction":
        """``amplitude * prod_j cos(freqs[j] * x_j)``."""
        freqs = [int(k) for k in freqs]
        if any(k == 0 for k in freqs):
            raise ValueError("cos(0 x) is not mean free")
        m = len(freqs)
        keys = np.array([[s * k for s, k in zip(signs, freqs)]
                         for signs in itertools.product((1, -1), repeat=m)])
        return cls(keys, np.full(len(keys), amplitude / 2 ** m), real=True, dim=m)

    # -- basic properties ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.keys.shape[1]

    @property
    def band(self) -> tuple[int, ...]:
        """Largest ``|k_j|`` present along each axis (0 for the zero function)."""
        if not len(self.keys):
            return (0,) * self.dim
        return tuple(int(b) for b in np.abs(self.keys).max(axis=0))

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        return f"SpectralFunction(dim={self.dim}, terms={len(self)}, band={self.band}, real={self.real})"

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(v) for v in k): complex(c) for k, c in zip(self.keys, self.coeffs)}

    def coefficient(self, k: Sequence[int]) -> complex:
        k = np.asarray(k, dtype=np.int64)
        hit = np.flatnonzero(np.all(self.keys == k, axis=1))
        return complex(self.coeffs[hit[0]]) if hit.size else 0j

    def l2_norm(self) -> float:
        """``(sum |a_k|^2)^(1/2)``, the normalized L2 norm by Parseval."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def fingerprint(self) -> str:
        if self._fp is None:
            h = hashlib.sha1()
            h.update(np.int64(self.dim).tobytes())
            h.update(self.keys.tobytes())
            h.update(self.coeffs.tobytes())
            h.update(b"r" if self.real else b"c")
            object.__setattr__(self, "_fp", h.hexdigest())
        return self._fp

    def is_even_in(self, axis: int, tol: float = 1e-14) -> bool:
        """True when the function is unchanged by ``x_axis -> -x_axis``."""
        r = self.reflect([axis])
        if not np.array_equal(r.keys, self.keys):
            return False
        scale = max(1.0, float(np.abs(self.coeffs).max(initial=0.0)))
        return bool(np.abs(r.coeffs - self.coeffs).max(initial=0.0) <= tol * scale)

    def reflect(self, axes: Iterable[int]) -> "SpectralFunction":
        """Function ``x -> f(x)`` with the sign of the listed coordinates flipped."""
        keys = self.keys.copy()
        for j in axes:
            keys[:, j] = -keys[:, j]
        order = np.lexsort(keys.T[::-1])
        return SpectralFunction._new(keys[order], self.coeffs[order], self.real)

    # -- arithmetic -----------------------------------------------------------

    def _combine(self, other: "SpectralFunction", sign: float) -> "SpectralFunction":
        if not isinstance(other, SpectralFunction):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        keys = np.concatenate([self.keys, other.keys])
        coeffs = np.concatenate([self.coeffs, sign * other.coeffs])
        out = SpectralFunction(keys, coeffs, dim=self.dim)
        return SpectralFunction._new(out.keys, out.coeffs, self.real and other.real)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return SpectralFunction._new(self.keys, -self.coeffs, self.real)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        real = self.real and np.isreal(c)
        return SpectralFunction._new(self.keys, self.coeffs * c, bool(real))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def multiply(self, factors: np.ndarray, real: bool | None = None) -> "SpectralFunction":
        """Coefficientwise product with a multiplier evaluated on ``self.keys``."""
        real = self.real if real is None else real
        return SpectralFunction._new(self.keys, self.coeffs * factors, real)

    def allclose(self, other: "SpectralFunction", atol: float = 1e-12) -> bool:
        return self.dim == other.dim and (len(self - other) == 0 or
                                          float(np.abs((self - other).coeffs).max()) <= atol)


# -- frequency regions --------------------------------------------------------


def complement(axes: Iterable[int], dim: int) -> frozenset[int]:
    """Axes of ``{0, ..., dim-1}`` not in ``axes``."""
    axes = frozenset(axes)
    if any(j < 0 or j >= dim for j in axes):
        raise ValueError(f"axis subset {sorted(axes)} is not inside range({dim})")
    return frozenset(range(dim)) - axes


def nonempty_subsets(dim: int) -> list[frozenset[int]]:
    """All nonempty axis subsets, ordered by size then lexicographically."""
    return [frozenset(c) for r in range(1, dim + 1) for c in itertools.combinations(range(dim), r)]


def _cutoffs(l, dim: int) -> np.ndarray:
    l = np.broadcast_to(np.asarray(l, dtype=float), (dim,)) if np.ndim(l) == 0 else np.asarray(l, dtype=float)
    if l.shape != (dim,):
        raise ValueError(f"expected {dim} cutoffs, got {l.shape[0]}")
    if np.any(l < 0):
        raise ValueError("cutoffs must be non-negative")
    return l


@dataclass(frozen=True)
class FrequencyBlock:
    """A set of frequencies selected by per-axis conditions on ``|k_j|``.

    ``kind`` is one of

    ``"box"``
        ``|k_j| <= bounds_j`` for ``j in axes`` (all axes when ``axes`` is None).
    ``"dyadic"``
        ``floor(2^(s_j-1)) <= |k_j| < 2^s_j`` with ``bounds = s``.
    ``"angle"``
        ``|k_j| <= l_j`` on ``axes`` and ``|k_j| > l_j`` off ``axes``.
    ``"far"``
        ``|k_j| > l_j`` for every axis.
    """

    kind: str
    bounds: tuple
    axes: frozenset[int] | None = None

    def __post_init__(self):
        if self.kind not in ("box", "dyadic", "angle", "far"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.kind == "angle" and not self.axes:
            raise ValueError("angle regions need a nonempty axis subset")

    def mask(self, keys: np.ndarray) -> np.ndarray:
        dim = keys.shape[1]
        a = np.abs(keys)
        if self.kind == "dyadic":
            s = np.asarray(self.bounds, dtype=np.int64)
            if s.shape != (dim,) or np.any(s < 0):
                raise ValueError("dyadic index must be a non-negative vector of length dim")
            lo = np.where(s > 0, 2 ** np.maximum(s - 1, 0), 0)
            return np.all((a >= lo) & (a < 2 ** s), axis=1)
        l = _cutoffs(self.bounds, dim)
        inside = a <= l
        if self.kind == "far":
            return np.all(~inside, axis=1)
        axes = frozenset(range(dim)) if self.axes is None else frozenset(self.axes)
        complement(axes, dim)
        on = np.zeros(dim, dtype=bool)
        on[sorted(axes)] = True
        if self.kind == "box":
            return np.all(inside[:, on], axis=1)
        return np.all(inside[:, on], axis=1) & np.all(~inside[:, ~on], axis=1)


def restrict(f: SpectralFunction, block: FrequencyBlock) -> SpectralFunction:
    """Keep the coefficients of ``f`` whose frequency lies in ``block``."""
    m = block.mask(f.keys)
    return SpectralFunction._new(f.keys[m], f.coeffs[m], f.real)


def partial_sum(f: SpectralFunction, l, axes: Iterable[int] | None = None) -> SpectralFunction:
    """Rectangular partial sum over the axes in ``axes``.

    Frequencies with ``|k_j| <= l_j`` for every ``j`` in ``axes`` survive;
    the remaining axes are unrestricted.  ``axes=None`` means all axes and
    an empty ``axes`` returns ``f`` unchanged.
    """
    axes = frozenset(range(f.dim)) if axes is None else frozenset(axes)
    complement(axes, f.dim)
    return restrict(f, FrequencyBlock("box", tuple(_cutoffs(l, f.dim)), axes))


def dyadic_block(f: SpectralFunction, s: Sequence[int]) -> SpectralFunction:
    """Restriction of ``f`` to ``floor(2^(s_j-1)) <= |k_j| < 2^s_j``."""
    return restrict(f, FrequencyBlock("dyadic", tuple(int(v) for v in s)))


def angle_region(f: SpectralFunction, l, axes: Iterable[int]) -> SpectralFunction:
    """Restriction to ``|k_j| <= l_j`` on ``axes``, ``|k_j| > l_j`` elsewhere."""
    axes = frozenset(axes)
    complement(axes, f.dim)
    return restrict(f, FrequencyBlock("angle", tuple(_cutoffs(l, f.dim)), axes))


def angle_residual(f: SpectralFunction, l) -> SpectralFunction:
    """``f - U_l(f)``: frequencies exceeding ``l_j`` in every coordinate."""
    return restrict(f, FrequencyBlock("far", tuple(_cutoffs(l, f.dim))))


def angle_decomposition(f: SpectralFunction, l) -> dict[frozenset[int], SpectralFunction]:
    """Split ``U_l(f)`` into its angle-region pieces, one per nonempty axis subset."""
    return {e: angle_region(f, l, e) for e in nonempty_subsets(f.dim)}


def angular_sum(f: SpectralFunction, l) -> SpectralFunction:
    """``U_l(f)``, the sum of all angle-region restrictions."""
    l = _cutoffs(l, f.dim)
    covered = np.any(np.abs(f.keys) <= l, axis=1)
    return SpectralFunction._new(f.keys[covered], f.coeffs[covered], f.real)


# -- diagonal operators -------------------------------------------------------


def frac_derivative(f: SpectralFunction, alpha: Sequence[float]) -> SpectralFunction:
    """Fractional derivative with multiplier ``prod_j (i k_j)^alpha_j``.

    ``(i k)^a = |k|^a exp(i pi a sign(k) / 2)``.  Axes with ``alpha_j = 0``
    are left alone, which gives the partial derivatives used with axis
    subsets.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.shape != (f.dim,):
        raise ValueError(f"expected {f.dim} orders, got {alpha.shape[0]}")
    if np.any(alpha < 0):
        raise ValueError("derivative orders must be non-negative")
    k = f.keys.astype(float)
    log_mag = np.sum(alpha * np.log(np.abs(k)), axis=1) if len(k) else np.zeros(0)
    phase = np.sum(alpha * np.sign(k), axis=1) * (np.pi / 2)
    # the multiplier is conjugate symmetric, so real functions stay real
    return f.multiply(np.exp(log_mag + 1j * phase))


def shift(f: SpectralFunction, s: Sequence[float]) -> SpectralFunction:
    """Translate: returns ``x -> f(x + s)`` (``s`` in angular units)."""
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape != (f.dim,):
        raise ValueError(f"expected a shift of length {f.dim}")
    return f.multiply(np.exp(1j * (f.keys @ s)))


# -- sampling -----------------------------------------------------------------


@dataclass(frozen=True)
class GridSample:
    """Values on the uniform grid ``x_j = i_j / N_j`` of the unit cube."""

    dims: tuple[int, ...]
    values: np.ndarray

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))


def min_grid(f: SpectralFunction) -> tuple[int, ...]:
    """Smallest alias-free grid, ``N_j = 2 band_j + 1``."""
    return tuple(2 * b + 1 for b in f.band)


def _dense(f: SpectralFunction, dims: Sequence[int]) -> np.ndarray:
    A = np.zeros(tuple(dims), dtype=complex)
    if len(f):
        idx = tuple((f.keys % np.asarray(dims)).T)
        A[idx] = f.coeffs
    return A


def evaluate(f: SpectralFunction, dims: Sequence[int] | int) -> GridSample:
    """Sample ``f(2 pi x)`` on a uniform grid by inverse FFT.

    Raises
    ------
    ValueError
        If some ``N_j < 2 band_j + 1`` (the grid would alias).
    """
    dims = tuple(int(n) for n in np.broadcast_to(np.asarray(dims), (f.dim,)))
    need = min_grid(f)
    if any(n < q for n, q in zip(dims, need)):
        raise ValueError(f"grid {dims} undersamples band {f.band}; need at least {need}")
    values = np.fft.ifftn(_dense(f, dims)) * np.prod(dims)
    if f.real:
        resid = float(np.abs(values.imag).max(initial=0.0))
        scale = max(1.0, float(np.abs(values.real).max(initial=0.0)))
        if resid > REAL_RESIDUE_TOL * scale:
            raise ArithmeticError(f"real-flagged function has imaginary residue {resid:.3e}")
        values = values.real
    return GridSample(dims, values)


def analyze(g: GridSample, real: bool = False, atol: float = 1e-13) -> SpectralFunction:
    """Recover coefficients from alias-free samples (inverse of :func:`evaluate`).

    Coefficients smaller than ``atol`` times the largest one are treated as
    rounding noise; the same noise on zero-coordinate frequencies is dropped.
    """
    dims = g.dims
    A = np.fft.fftn(g.values) / np.prod(dims)
    scale = float(np.abs(A).max(initial=0.0))
    idx = np.argwhere(np.abs(A) > atol * scale) if scale > 0 else np.zeros((0, len(dims)), dtype=np.int64)
    dims_arr = np.asarray(dims)
    keys = np.where(idx > dims_arr // 2, idx - dims_arr, idx)
    coeffs = A[tuple(idx.T)]
    on_axis = np.any(keys == 0, axis=1)
    if np.any(on_axis):
        raise ValueError("samples carry a nonzero axis mean")
    f = SpectralFunction(keys, coeffs, dim=len(dims))
    if real:
        # symmetrize away rounding noise before flagging
        mirror = f.reflect(range(f.dim))
        f = SpectralFunction(np.concatenate([f.keys, mirror.keys]),
                             np.concatenate([f.coeffs, mirror.coeffs.conj()]) / 2,
                             real=True, dim=f.dim)
    return f


# -- serialization ------------------------------------------------------------


def to_json(f: SpectralFunction) -> str:
    rows = [[int(v) for v in k] + [float(c.real), float(c.imag)] for k, c in zip(f.keys, f.coeffs)]
    return json.dumps({"dim": f.dim, "real": f.real, "coeffs": rows})


def from_json(text: str) -> SpectralFunction:
    data = json.loads(text)
    m = int(data["dim"])
    rows = data["coeffs"]
    keys = np.array([r[:m] for r in rows], dtype=np.int64).reshape(-1, m)
    coeffs = np.array([complex(r[m], r[m + 1]) for r in rows], dtype=complex)
    return SpectralFunction(keys, coeffs, real=bool(data.get("real", False)), dim=m)
