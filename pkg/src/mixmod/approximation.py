"""Best approximation by "angle" and two-sided estimates for the modulus.

``Y_l(f)`` is the distance from ``f`` to sums ``T_1 + ... + T_m`` where
``T_j`` is a trigonometric polynomial of degree ``l_j`` in ``x_j`` alone.
The angular sum ``U_l(f)`` is an admissible such sum, and its residual
``f - U_l(f)`` (the frequencies exceeding ``l_j`` in every coordinate) is
within a constant of the best one, so ``||f - U_l(f)||`` is used wherever an
estimate refers to ``Y``.  In L2 the residual is the exact minimizer.

Each estimate is exposed as a function returning both sides in a
:class:`RatioReport`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lorentz import DEFAULT_SAMPLING, LorentzIndex, Sampling, grid_dims, norm, norm_of_values
from .smoothness import FractionalOrder, ModulusSearchConfig, modulus
from .spectrum import (SpectralFunction, angle_residual, complement, frac_derivative,
                       nonempty_subsets, partial_sum)

__all__ = [
    "RatioReport",
    "AngleApproxResult",
    "AngleCache",
    "angle_surrogate",
    "best_angle_l2",
    "best_angle_optimize",
    "bernstein_check",
    "realization_rhs",
    "realization_sides",
    "direct_estimate_sides",
    "sharp_exponent",
    "in_sharp_domain",
    "inverse_rhs",
    "inverse_estimate_sides",
]


@dataclass(frozen=True)
class RatioReport:
    """Two sides of an estimate ``lhs << rhs`` (or ``lhs ~ rhs``)."""

    params: dict
    lhs: float
    rhs: float

    def __post_init__(self):
        if self.lhs < 0 or self.rhs < 0:
            raise ValueError("both sides must be non-negative")

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 1.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    @property
    def unbounded(self) -> bool:
        """True for ``x / 0`` with ``x > 0``."""
        return self.rhs == 0 and self.lhs > 0


@dataclass
class AngleApproxResult:
    surrogate: float
    exact_l2: float | None = None
    optimized: float | None = None
    history: list[float] = field(default_factory=list)
    components: dict[int, SpectralFunction] = field(default_factory=dict)


class AngleCache:
    """Memo of ``||f - U_l(f)||`` keyed by the surviving frequency set.

    ``f - U_l(f)`` changes only when ``l`` crosses a frequency present in
    ``f``, so sums over many ``l`` collapse to few distinct norms.
    """

    def __init__(self, f: SpectralFunction, idx: LorentzIndex, sampling: Sampling = DEFAULT_SAMPLING):
        self.f, self.idx, self.sampling = f, idx, sampling
        self.abs_keys = np.abs(f.keys)
        self.memo: dict[bytes, float] = {}

    def __call__(self, l) -> float:
        mask = np.all(self.abs_keys > np.asarray(l, dtype=float), axis=1)
        if not mask.any():
            return 0.0
        key = np.packbits(mask).tobytes()
        if key not in self.memo:
            r = SpectralFunction._new(self.f.keys[mask], self.f.coeffs[mask], self.f.real)
            self.memo[key] = norm(r, self.idx, self.sampling)
        return self.memo[key]


def angle_surrogate(f: SpectralFunction, l, idx: LorentzIndex,
                    sampling: Sampling = DEFAULT_SAMPLING) -> float:
    """``||f - U_l(f)||_{p,tau}``, equivalent to ``Y_l(f)`` up to constants."""
    return norm(angle_residual(f, l), idx, sampling)


def best_angle_l2(f: SpectralFunction, l) -> float:
    """Exact ``Y_l(f)`` in L2: the l2 mass of the far region."""
    return angle_residual(f, l).l2_norm()


def _halfplane(keys: np.ndarray) -> np.ndarray:
    # first nonzero coordinate positive; picks one key from each pair {k, -k}
    first = keys[np.arange(len(keys)), np.argmax(keys != 0, axis=1)]
    return first > 0


def best_angle_optimize(f: SpectralFunction, l, idx: LorentzIndex, iters: int = 500,
                        step: float | Callable[[int], float] | None = None,
                        sampling: Sampling = DEFAULT_SAMPLING, init: str = "angular",
                        fd_step: float = 1e-6, min_step: float = 1e-12) -> AngleApproxResult:
    """Minimize ``||f - sum_j T_j||_{p,tau}`` over the angle components.

    Component ``T_j`` carries the frequencies (inside the band box of ``f``)
    whose first coordinate within degree ``l_j`` is ``j``; together they
    span every admissible angle sum.  The (sub)gradient is estimated by
    central differences; the step adapts (grow on success, halve on
    failure) unless ``step`` gives a fixed schedule ``k -> step_k``.
    ``init="angular"`` starts from ``U_l(f)``, ``"zero"`` from nothing.
    The best objective seen is returned, so the reported value never
    increases along the iteration log.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    m = f.dim
    lv = np.broadcast_to(np.asarray(l, dtype=float), (m,))
    band = np.asarray(f.band)
    surrogate = angle_surrogate(f, lv, idx, sampling)
    result = AngleApproxResult(surrogate=surrogate)
    if idx.p == idx.tau == 2:
        result.exact_l2 = best_angle_l2(f, lv)
    box = [np.r_[-b:0, 1:b + 1] for b in band]
    if not len(f) or surrogate == 0.0 or any(len(r) == 0 for r in box):
        result.optimized = surrogate
        result.history = [surrogate]
        return result

    grid = np.array(list(itertools.product(*box)), dtype=np.int64).reshape(-1, m)
    near = np.abs(grid) <= lv
    grid = grid[near.any(axis=1)]
    owner = np.argmax(np.abs(grid) <= lv, axis=1)
    rep = _halfplane(grid) if f.real else np.ones(len(grid), dtype=bool)
    free = grid[rep]
    n_free = len(free)

    dims = grid_dims(f, sampling)
    index_f = tuple((f.keys % np.asarray(dims)).T)
    index_p = tuple((free % np.asarray(dims)).T)
    index_m = tuple((-free % np.asarray(dims)).T)
    A0 = np.zeros(dims, dtype=complex)
    A0[index_f] = f.coeffs

    def coeffs_of(x):
        return x[:n_free] + 1j * x[n_free:]

    def objective(x):
        A = A0.copy()
        c = coeffs_of(x)
        A[index_p] -= c
        if f.real:
            A[index_m] -= c.conj()
        v = np.fft.ifftn(A) * A.size
        return norm_of_values(v.real if f.real else v, idx)

    x = np.zeros(2 * n_free)
    if init == "angular":
        lookup = f.as_dict()
        x0 = np.array([lookup.get(tuple(int(v) for v in k), 0j) for k in free])
        x = np.concatenate([x0.real, x0.imag])
    elif init != "zero":
        raise ValueError("init must be 'angular' or 'zero'")

    val = objective(x)
    best_x, best = x.copy(), val
    history = [best]
    s = 0.25 * val if step is None else None
    for k in range(iters):
        g = np.empty_like(x)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = fd_step
            g[i] = (objective(x + e) - objective(x - e)) / (2 * fd_step)
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            break
        if step is None:
            trial = x - s * g / gn
            tv = objective(trial)
            if tv < val:
                x, val, s = trial, tv, s * 1.5
            else:
                s *= 0.5
                if s < min_step:
                    history.append(best)
                    break
        else:
            sk = step(k) if callable(step) else step / math.sqrt(k + 1)
            x = x - sk * g / gn
            val = objective(x)
        if val < best:
            best_x, best = x.copy(), val
        history.append(best)

    result.optimized = best
    result.history = history
    c = coeffs_of(best_x)
    for j in range(m):
        mine = owner[rep] == j
        keys, vals = free[mine], c[mine]
        if f.real:
            keys = np.concatenate([keys, -keys])
            vals = np.concatenate([vals, vals.conj()])
        result.components[j] = SpectralFunction(keys, vals, real=f.real, dim=m)
    return result


def bernstein_check(T: SpectralFunction, alpha, idx: LorentzIndex, n=None,
                    sampling: Sampling = DEFAULT_SAMPLING) -> RatioReport:
    """``||T^(alpha)|| << prod (n_j + 1)^alpha_j ||T||`` for integer orders."""
    alpha = FractionalOrder(alpha)
    if any(a != int(a) for a in alpha):
        raise ValueError("Bernstein's inequality is checked for integer orders")
    n = np.asarray(T.band if n is None else n, dtype=float)
    if np.any(n < np.asarray(T.band)):
        raise ValueError(f"T has band {T.band}, larger than n = {tuple(n)}")
    lhs = norm(frac_derivative(T, alpha), idx, sampling)
    rhs = float(np.prod((n + 1) ** np.asarray(alpha))) * norm(T, idx, sampling)
    return RatioReport({"estimate": "bernstein", "n": tuple(n), "alpha": tuple(alpha),
                        "p": idx.p, "tau": idx.tau}, lhs, rhs)


def _steps(n, dim: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(n, dtype=float), (dim,))


def realization_rhs(f: SpectralFunction, n, alpha, idx: LorentzIndex,
                    sampling: Sampling = DEFAULT_SAMPLING, terms: bool = False):
    """Right side of the realization equivalence at cutoffs ``n``.

    ``||f - U_n f|| + sum_{e != {}} prod_{j in e} n_j^-alpha_j
    ||S_{n^e,inf}^{(alpha^e)} (f - S_{inf,n^(complement e)} f)||`` with the
    inner partial sum taken as 0 when the complement is empty.
    With ``terms`` the individual summands are returned keyed by axis
    subset (``None`` for the residual term).
    """
    alpha = FractionalOrder(alpha)
    n = _steps(n, f.dim)
    parts: dict = {None: angle_surrogate(f, n, idx, sampling)}
    for e in nonempty_subsets(f.dim):
        rest = complement(e, f.dim)
        g = f - partial_sum(f, n, rest) if rest else f
        g = frac_derivative(partial_sum(g, n, e), alpha.on(e))
        weight = float(np.prod([n[j] ** -alpha[j] for j in e]))
        parts[e] = weight * norm(g, idx, sampling)
    total = float(sum(parts.values()))
    return (total, parts) if terms else total


def realization_sides(f: SpectralFunction, n, alpha, idx: LorentzIndex,
                      cfg: ModulusSearchConfig | None = None,
                      sampling: Sampling = DEFAULT_SAMPLING) -> RatioReport:
    """``omega_alpha(f, pi/n)`` against the realization functional."""
    alpha = FractionalOrder(alpha).require_active()
    n = _steps(n, f.dim)
    if np.any(n < 1):
        raise ValueError("cutoffs must be >= 1")
    lhs = modulus(f, alpha, np.pi / n, idx, cfg, sampling).value
    rhs = realization_rhs(f, n, alpha, idx, sampling)
    return RatioReport({"estimate": "realization", "n": tuple(n), "alpha": tuple(alpha),
                        "p": idx.p, "tau": idx.tau}, lhs, rhs)


def direct_estimate_sides(f: SpectralFunction, n, alpha, idx: LorentzIndex,
                         cfg: ModulusSearchConfig | None = None,
                         sampling: Sampling = DEFAULT_SAMPLING) -> RatioReport:
    """``Y_n(f)`` (via the surrogate) against ``omega_alpha(f, 1/(n+1))``."""
    alpha = FractionalOrder(alpha).require_active()
    n = _steps(n, f.dim)
    if np.any(n < 0):
        raise ValueError("cutoffs must be >= 0")
    lhs = angle_surrogate(f, n, idx, sampling)
    rhs = modulus(f, alpha, 1.0 / (n + 1), idx, cfg, sampling).value
    return RatioReport({"estimate": "direct", "n": tuple(n), "alpha": tuple(alpha),
                        "p": idx.p, "tau": idx.tau}, lhs, rhs)


def sharp_exponent(idx: LorentzIndex) -> float:
    """``beta = min(2, tau)``."""
    return min(2.0, idx.tau)


def in_sharp_domain(idx: LorentzIndex) -> bool:
    """``1 < tau <= 2`` (any ``p``), or ``p > 2`` together with ``tau > 2``."""
    return (1 < idx.tau <= 2) or (idx.p > 2 and idx.tau > 2)


def inverse_rhs(f: SpectralFunction, n, alpha, idx: LorentzIndex, variant: str = "sharp",
                sampling: Sampling = DEFAULT_SAMPLING, y: Callable | None = None) -> float:
    """Weighted sum of angle approximations over ``1 <= nu_j <= n_j + 1``.

    ``natural``: ``prod n^-alpha sum prod nu^(alpha-1) Y_nu``;
    ``sharp``: ``prod n^-alpha (sum prod nu^(beta alpha - 1) Y_nu^beta)^(1/beta)``.
    ``y`` overrides the approximation functional (default: cached surrogate).
    """
    alpha = FractionalOrder(alpha)
    n = _steps(n, f.dim).astype(int)
    if np.any(n < 1):
        raise ValueError("cutoffs must be >= 1")
    if variant == "sharp":
        if not in_sharp_domain(idx):
            raise ValueError(f"{idx} is outside the sharp inverse estimate's parameter domain")
        beta = sharp_exponent(idx)
    elif variant == "natural":
        beta = 1.0
    else:
        raise ValueError(f"unknown variant {variant!r}")
    y = y or AngleCache(f, idx, sampling)
    a = np.asarray(alpha)
    total = 0.0
    for nu in itertools.product(*[range(1, k + 2) for k in n]):
        val = y(nu)
        if val:
            total += float(np.prod(np.asarray(nu, dtype=float) ** (beta * a - 1))) * val ** beta
    return float(np.prod(n.astype(float) ** -a)) * total ** (1.0 / beta)


def inverse_estimate_sides(f: SpectralFunction, n, alpha, idx: LorentzIndex, variant: str = "sharp",
                          cfg: ModulusSearchConfig | None = None,
                          sampling: Sampling = DEFAULT_SAMPLING) -> RatioReport:
    """Modulus against the inverse-estimate sum.

    The sharp form compares ``omega_alpha(f, pi/n)``; the natural form
    ``omega_alpha(f, 1/(n+1))``.
    """
    alpha = FractionalOrder(alpha).require_active()
    rhs = inverse_rhs(f, n, alpha, idx, variant, sampling)
    nv = _steps(n, f.dim)
    t = np.pi / nv if variant == "sharp" else 1.0 / (nv + 1)
    lhs = modulus(f, alpha, t, idx, cfg, sampling).value
    return RatioReport({"estimate": f"inverse.{variant}", "n": tuple(nv), "alpha": tuple(alpha),
                        "p": idx.p, "tau": idx.tau}, lhs, rhs)
