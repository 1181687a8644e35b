"""Fractional differences and the mixed modulus of smoothness.

The difference of order ``alpha > 0`` with step ``h`` along axis ``j``,

    Delta_h^alpha f(x) = sum_{nu >= 0} (-1)^nu C(alpha, nu) f(x + (alpha - nu) h e_j),

is available in two independent forms:

* :func:`frac_difference_direct` sums the binomial series term by term
  (each term is a translate of ``f``) and controls the tail with an exact
  bound;
* :func:`frac_difference_multiplier` applies the closed-form symbol
  ``exp(i k alpha h) (1 - exp(-i k h))^alpha`` to every coefficient.

The modulus of smoothness is the supremum of the Lorentz norm of the mixed
difference over ``|h_j| <= t_j``; :func:`modulus` returns a deterministic
lower bound found by grid search plus golden-section refinement.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .lorentz import DEFAULT_SAMPLING, LorentzIndex, Sampling, grid_dims, norm_of_values
from .spectrum import SpectralFunction, shift

__all__ = [
    "FractionalOrder",
    "ModulusSearchConfig",
    "ModulusResult",
    "DirectSeriesInfo",
    "binom_frac",
    "series_weights",
    "frac_difference_direct",
    "difference_symbol",
    "frac_difference_multiplier",
    "mixed_difference",
    "modulus",
    "PropertyResult",
    "modulus_properties_check",
]

TWO_PI = 2.0 * np.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class FractionalOrder(tuple):
    """Per-axis orders ``(alpha_1, ..., alpha_m)``; zero entries are inactive."""

    def __new__(cls, alphas):
        alphas = tuple(float(a) for a in np.atleast_1d(alphas))
        if any(not math.isfinite(a) or a < 0 for a in alphas):
            raise ValueError(f"orders must be finite and non-negative, got {alphas}")
        return super().__new__(cls, alphas)

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(j for j, a in enumerate(self) if a > 0)

    def require_active(self) -> "FractionalOrder":
        if not self.active:
            raise ValueError("at least one order must be positive")
        return self

    def on(self, axes) -> "FractionalOrder":
        """Orders kept on ``axes`` and zeroed elsewhere."""
        axes = set(axes)
        return FractionalOrder([a if j in axes else 0.0 for j, a in enumerate(self)])


def binom_frac(alpha: float, nu: int) -> float:
    """Generalized binomial coefficient ``alpha (alpha-1) ... (alpha-nu+1) / nu!``."""
    if nu < 0:
        raise ValueError("nu must be non-negative")
    out = 1.0
    for i in range(nu):
        out *= (alpha - i) / (i + 1)
    return out


def series_weights(beta: float, n: int) -> np.ndarray:
    """``(-1)^nu C(beta, nu)`` for ``nu = 0..n``: the coefficients of ``(1-z)^beta``."""
    nu = np.arange(1, n + 1, dtype=float)
    return np.concatenate([[1.0], np.cumprod((nu - 1.0 - beta) / nu)])


def _log_weight(beta: float, n: int) -> tuple[float, float]:
    """``log|w|`` and ``sign(w)`` for ``w = (-1)^n C(beta, n)``, one large ``n > beta``."""
    sign = float(special.gammasgn(-beta)) if not (beta >= 0 and beta == int(beta)) else 0.0
    if sign == 0.0:
        return -math.inf, 0.0
    return float(special.gammaln(n - beta) - special.gammaln(n + 1.0) - special.gammaln(-beta)), sign


def _log_tail_bound(beta: float, n: int) -> float:
    # sum_{nu > n} |w_nu(beta)| = |w_n(beta - 1)|: for nu > beta + 1 the weights
    # share one sign, and their partial sums telescope.
    return _log_weight(beta - 1.0, n)[0]


class DirectSeriesInfo(NamedTuple):
    terms: int
    """Number of translates summed (``N + 1``)."""
    tail_order: int
    """Largest number of Abel summation steps used on the tail."""
    tail_bound: float
    """Largest bound on the remaining truncation error over all frequencies."""


def _series_sum(alpha: float, theta: float, tol: float, n_start: int, n_max: int,
                j_max: int) -> tuple[complex, int, int, float]:
    """``sum_nu w_nu z^nu`` with ``z = exp(-i theta)`` by truncation plus tail steps.

    With ``T_beta(N) = sum_{nu > N} w_nu(beta) z^nu`` one has the exact identity
    ``(1 - z) T_beta(N) = w_N(beta) z^(N+1) + T_{beta+1}(N)``, so the tail is a
    short explicit sum plus a remainder bounded by
    ``|w_N(beta + J - 1)| / |1 - z|^J``.
    """
    theta = float(theta - TWO_PI * round(theta / TWO_PI))
    gap = 2.0 * abs(math.sin(theta / 2.0))
    n = n_start
    while True:
        if theta == 0.0:
            best_j, best = 0, -math.inf
        else:
            best_j, best = 0, _log_tail_bound(alpha, n)
            top = min(j_max, int(n - alpha - 2))
            for j in range(1, max(top, 0) + 1):
                b = _log_tail_bound(alpha + j, n) - j * math.log(gap)
                if b < best:
                    best_j, best = j, b
        best = math.exp(best)
        if best <= tol or n >= n_max:
            break
        n *= 2
    if best > tol:
        warnings.warn(f"direct series for alpha={alpha}, theta={theta} stopped at N={n} "
                      f"with tail bound {best:.2e} > tol", RuntimeWarning, stacklevel=3)
    w = series_weights(alpha, n)
    total = 0j
    for lo in range(0, n + 1, 1 << 15):
        nu = np.arange(lo, min(lo + (1 << 15), n + 1))
        total += np.dot(w[nu], np.exp(-1j * theta * nu))
    if theta == 0.0:
        # z = 1: the tail telescopes to -w_N(alpha - 1)
        total -= series_weights(alpha - 1.0, n)[-1]
    else:
        # 1 - z = gap * exp(i (sign(theta) pi - theta) / 2)
        lg, phase = math.log(gap), (math.copysign(np.pi, theta) - theta) / 2.0
        for j in range(best_j):
            lw, sw = _log_weight(alpha + j, n)
            if sw:
                total += sw * math.exp(lw - (j + 1) * lg) * np.exp(-1j * (theta * (n + 1) + (j + 1) * phase))
    return total, n, best_j, best


def _axis_values(f: SpectralFunction, axis: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 <= axis < f.dim:
        raise ValueError(f"axis {axis} out of range for dim {f.dim}")
    return np.unique(f.keys[:, axis], return_inverse=True)


def frac_difference_direct(f: SpectralFunction, alpha: float, axis: int, h: float,
                           tol: float = 1e-10, full_output: bool = False,
                           n_start: int = 64, n_max: int = 1 << 20, j_max: int = 60):
    """Fractional difference from the truncated binomial series of translates.

    Sums ``sum_{nu=0}^{N} (-1)^nu C(alpha, nu) f(x + (alpha - nu) h e_axis)``
    with ``N`` doubled until the tail is certified below ``tol`` per
    coefficient.  The tail is first reduced by exact Abel summation steps,
    which keeps ``N`` moderate when ``alpha`` is small.

    Returns
    -------
    g : SpectralFunction
    info : DirectSeriesInfo
        Only when ``full_output`` is set.
    """
    if not alpha > 0:
        raise ValueError("the series converges only for alpha > 0")
    if not tol > 0:
        raise ValueError("tol must be positive")
    ks, inv = _axis_values(f, axis)
    factors = np.empty(len(ks), dtype=complex)
    terms, order, bound = 0, 0, 0.0
    for i, k in enumerate(ks):
        s, n, j, b = _series_sum(alpha, float(k) * h, tol, n_start, n_max, j_max)
        # each translate carries the common phase exp(i k alpha h)
        factors[i] = np.exp(1j * float(k) * alpha * h) * s
        terms, order, bound = max(terms, n + 1), max(order, j), max(bound, b)
    g = f.multiply(factors[inv] if len(ks) else factors)
    if full_output:
        return g, DirectSeriesInfo(terms, order, bound)
    return g


def difference_symbol(theta, alpha: float) -> np.ndarray:
    """``exp(i alpha theta) (1 - exp(-i theta))^alpha`` on the principal branch.

    With ``r`` the representative of ``theta`` in ``[-pi, pi]`` one has
    ``1 - exp(-i theta) = 2 |sin(r/2)| exp(i (sign(r) pi - r)/2)``; the
    factor vanishes exactly when ``r = 0``.  The symmetric reduction keeps
    tiny negative angles from rounding to ``2 pi``.
    """
    theta = np.asarray(theta, dtype=float)
    r = theta - TWO_PI * np.round(theta / TWO_PI)
    mag = np.abs(2.0 * np.sin(r / 2.0)) ** alpha
    out = mag * np.exp(1j * alpha * (theta + (np.sign(r) * np.pi - r) / 2.0))
    return np.where(r == 0.0, 0.0, out)


def frac_difference_multiplier(f: SpectralFunction, alpha: float, axis: int, h: float) -> SpectralFunction:
    """Exact fractional difference through its Fourier symbol."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    ks, inv = _axis_values(f, axis)
    sym = difference_symbol(ks.astype(float) * h, alpha)
    return f.multiply(sym[inv] if len(ks) else sym)


def _check_steps(f: SpectralFunction, alpha: FractionalOrder, h) -> np.ndarray:
    h = np.asarray(h, dtype=float).reshape(-1)
    if len(alpha) != f.dim or h.shape != (f.dim,):
        raise ValueError(f"orders and steps must both have length {f.dim}")
    if any(not math.isfinite(h[j]) for j in alpha.active):
        raise ValueError("active axes need finite steps")
    return h


def mixed_difference(f: SpectralFunction, alpha, h, order: Sequence[int] | None = None) -> SpectralFunction:
    """Mixed difference: one-axis differences composed over the active axes.

    ``order`` permutes the composition; the symbols commute, so the result
    does not depend on it beyond rounding.
    """
    alpha = FractionalOrder(alpha).require_active()
    h = _check_steps(f, alpha, h)
    g = f
    for j in (alpha.active if order is None else [j for j in order if alpha[j] > 0]):
        g = frac_difference_multiplier(g, alpha[j], j, h[j])
    return g


# -- modulus of smoothness ----------------------------------------------------


@dataclass(frozen=True)
class ModulusSearchConfig:
    """Search over steps: ``grid_points`` subdivisions of each ``[-t_j, t_j]``
    (or ``[0, t_j]``), then ``refine_levels`` rounds of coordinate-wise
    golden-section search around the incumbent."""

    grid_points: int = 16
    refine_levels: int = 3
    include_negative: bool = True
    golden_iters: int = 8

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.refine_levels < 0 or self.golden_iters < 1:
            raise ValueError("refine_levels must be >= 0 and golden_iters >= 1")


@dataclass(frozen=True)
class ModulusResult:
    value: float
    argmax: tuple[float, ...]
    grid_value: float
    evaluations: int

    def __float__(self) -> float:
        return self.value


class _DifferenceNorms:
    """Memoized ``h -> ||Delta_h^alpha f||_{p,tau}`` on a fixed sampling grid."""

    def __init__(self, f: SpectralFunction, alpha: FractionalOrder, idx: LorentzIndex,
                 sampling: Sampling):
        self.f, self.alpha, self.idx = f, alpha, idx
        self.dims = grid_dims(f, sampling)
        self.index = tuple((f.keys % np.asarray(self.dims)).T)
        self.axis_values = [np.unique(f.keys[:, j], return_inverse=True) for j in range(f.dim)]
        # reflections that provably leave the norm unchanged
        self.even = [f.is_even_in(j) for j in range(f.dim)]
        self.cache: dict[tuple[float, ...], float] = {}
        self.evaluations = 0
        self.buffer = np.zeros(self.dims, dtype=complex)

    def _canonical(self, h: tuple[float, ...]) -> tuple[float, ...]:
        # an axis along which f is even: flipping h_j reflects Delta_h f in x_j.
        # No global sign rule: for fractional orders ||Delta_{-h} f|| != ||Delta_h f||
        # even for real f.
        h = tuple(abs(v) if e else v for v, e in zip(h, self.even))
        return tuple(v + 0.0 for v in h)

    def coefficients(self, h) -> np.ndarray:
        c = self.f.coeffs
        for j in self.alpha.active:
            ks, inv = self.axis_values[j]
            c = c * difference_symbol(ks.astype(float) * h[j], self.alpha[j])[inv]
        return c

    def __call__(self, h) -> float:
        key = self._canonical(tuple(float(v) for v in h))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        self.evaluations += 1
        A = self.buffer
        A[self.index] = self.coefficients(key)
        values = np.fft.ifftn(A) * A.size
        val = norm_of_values(values.real if self.f.real else values, self.idx)
        self.cache[key] = val
        return val


def _axis_grid(t: float, cfg: ModulusSearchConfig) -> list[float]:
    pts = [t * i / cfg.grid_points for i in range(cfg.grid_points + 1)]
    if cfg.include_negative:
        pts = [-v for v in pts[:0:-1]] + pts
    return pts


def modulus(f: SpectralFunction, alpha, t, idx: LorentzIndex,
            cfg: ModulusSearchConfig | None = None, sampling: Sampling | None = None,
            seeds: Sequence[Sequence[float]] = ()) -> ModulusResult:
    """Mixed modulus of smoothness ``sup_{|h_j| <= t_j} ||Delta_h^alpha f||_{p,tau}``.

    The returned value is the largest norm over all probed steps, hence a
    lower bound of the supremum.  Probes are the tensor grid of
    ``t_j i / G`` (both signs when ``cfg.include_negative``), any admissible
    ``seeds``, and the golden-section refinement around the best point.
    If some active ``t_j`` is zero the result is exactly zero.
    """
    cfg = cfg or ModulusSearchConfig()
    sampling = sampling or DEFAULT_SAMPLING
    alpha = FractionalOrder(alpha).require_active()
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape != (f.dim,) or len(alpha) != f.dim:
        raise ValueError(f"orders and bounds must have length {f.dim}")
    if np.any(t < 0):
        raise ValueError("step bounds must be non-negative")
    zero = tuple(0.0 for _ in range(f.dim))
    if not len(f) or any(t[j] == 0 for j in alpha.active):
        return ModulusResult(0.0, zero, 0.0, 0)

    ev = _DifferenceNorms(f, alpha, idx, sampling)
    active = alpha.active
    axes = [_axis_grid(t[j], cfg) if j in active else [0.0] for j in range(f.dim)]
    lo = [(-t[j] if cfg.include_negative else 0.0) if j in active else 0.0 for j in range(f.dim)]
    hi = [t[j] if j in active else 0.0 for j in range(f.dim)]

    best_h, best = zero, -1.0
    for h in _tensor(axes):
        v = ev(h)
        if v > best:
            best_h, best = h, v
    for s in seeds:
        s = tuple(float(v) for v in s)
        if all(lo[j] <= s[j] <= hi[j] for j in range(f.dim)):
            v = ev(s)
            if v > best:
                best_h, best = s, v
    grid_best = best

    for level in range(cfg.refine_levels):
        for j in active:
            width = t[j] / (cfg.grid_points * 2 ** level)
            a, b = max(lo[j], best_h[j] - width), min(hi[j], best_h[j] + width)

            def along(x, j=j):
                h = list(best_h)
                h[j] = x
                return tuple(h), ev(h)

            x1, x2 = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
            (h1, v1), (h2, v2) = along(x1), along(x2)
            for _ in range(cfg.golden_iters):
                for hv, vv in ((h1, v1), (h2, v2)):
                    if vv > best:
                        best_h, best = hv, vv
                if v1 >= v2:
                    b, x2, h2, v2 = x2, x1, h1, v1
                    x1 = b - GOLDEN * (b - a)
                    h1, v1 = along(x1)
                else:
                    a, x1, h1, v1 = x1, x2, h2, v2
                    x2 = a + GOLDEN * (b - a)
                    h2, v2 = along(x2)
            for hv, vv in ((h1, v1), (h2, v2)):
                if vv > best:
                    best_h, best = hv, vv
    return ModulusResult(float(best), tuple(float(v) for v in best_h), float(grid_best), ev.evaluations)


def _tensor(axes):
    if len(axes) == 1:
        return [(v,) for v in axes[0]]
    return [tuple(c) for c in np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(axes), -1).T]


# -- basic properties of the modulus ---------------------------------------


@dataclass(frozen=True)
class PropertyResult:
    name: str
    lhs: float
    rhs: float
    passed: bool
    note: str = ""

    @property
    def constant(self) -> float:
        """Measured ``lhs / rhs`` (1 for ``0/0``, ``inf`` for ``x/0``)."""
        if self.rhs == 0:
            return 1.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs


@dataclass
class PropertyReport:
    results: dict[str, PropertyResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def __getitem__(self, name: str) -> PropertyResult:
        return self.results[name]


def modulus_properties_check(f: SpectralFunction, alpha, beta, t, delta, lam,
                             idx: LorentzIndex, cfg: ModulusSearchConfig | None = None,
                             sampling: Sampling | None = None, g: SpectralFunction | None = None,
                             quasi_constant: float | None = None, eps: float = 1e-9) -> PropertyReport:
    """Evaluate the basic properties of the mixed modulus on ``f``.

    Results are keyed by name:

    ``vanishing``
        a zero step bound on an active axis gives zero (exact);
    ``subadditive``
        ``omega(f + g) / (omega(f) + omega(g))``, passing when at most
        ``quasi_constant`` (default ``1 + eps`` when ``tau <= p``);
        ``g`` defaults to a translate of ``f``;
    ``monotone``
        ``omega(f, min(delta, t)) <= omega(f, max(delta, t))`` (exact);
    ``normalized``
        ``omega(f, b) b^-alpha`` against ``omega(f, a) a^-alpha`` for ``a <= b``;
    ``dilation``
        ``omega(f, lam delta)`` against ``lam^alpha omega(f, delta)``;
    ``order``
        ``omega_beta(f, delta)`` against ``omega_alpha(f, delta)`` for
        ``beta > alpha``; ``passed`` records the constant-1 comparison, which
        can fail at large steps.

    ``normalized`` and ``dilation`` always pass; the caller judges their
    constants against regression bands.  Searches share their maximizers
    as seeds so that the compared suprema range over nested probe sets.
    """
    cfg = cfg or ModulusSearchConfig()
    sampling = sampling or DEFAULT_SAMPLING
    alpha = FractionalOrder(alpha).require_active()
    beta = FractionalOrder(beta).require_active()
    t, delta, lam = (np.asarray(v, dtype=float).reshape(-1) for v in (t, delta, lam))
    m = f.dim
    rep = PropertyReport()

    def om(fn, order, bound, seeds=()):
        return modulus(fn, order, bound, idx, cfg, sampling, seeds)

    # a vanishing step bound on any active axis kills the modulus
    worst = 0.0
    for r in range(m):
        for kept in _subsets(m, r):
            d = np.where(np.isin(np.arange(m), kept), delta, 0.0)
            worst = max(worst, om(f, alpha, d).value)
    rep.results["vanishing"] = PropertyResult("vanishing", worst, 0.0, worst == 0.0, "omega(f, delta^e) for proper e")

    # quasi-subadditivity
    if g is None:
        g = shift(f, np.full(m, 1.0))
    if quasi_constant is None:
        quasi_constant = 1.0 + eps if idx.tau <= idx.p else math.inf
    w_fg = om(f + g, alpha, delta)
    w_f = om(f, alpha, delta, [w_fg.argmax])
    w_g = om(g, alpha, delta, [w_fg.argmax])
    c2 = PropertyResult("subadditive", w_fg.value, w_f.value + w_g.value, True)
    rep.results["subadditive"] = PropertyResult("subadditive", c2.lhs, c2.rhs, c2.constant <= quasi_constant,
                                       f"quasi-triangle constant bound {quasi_constant}")

    # monotone in the step bound
    small = om(f, alpha, np.minimum(delta, t))
    big = om(f, alpha, np.maximum(delta, t), [small.argmax])
    rep.results["monotone"] = PropertyResult("monotone", small.value, big.value, small.value <= big.value)

    # omega(f, d) / d^alpha is almost decreasing for small <= large <= 1
    lo_b, hi_b = np.minimum(delta, t), np.maximum(delta, t)
    w_lo = om(f, alpha, lo_b)
    w_hi = om(f, alpha, hi_b, [w_lo.argmax])
    a = np.asarray(alpha)
    lhs4 = float(np.prod(hi_b ** -a)) * w_hi.value
    rhs4 = float(np.prod(lo_b ** -a)) * w_lo.value
    rep.results["normalized"] = PropertyResult("normalized", lhs4, rhs4, True, "measured constant")

    # dilation
    w_d = om(f, alpha, delta)
    w_ld = om(f, alpha, lam * delta, [w_d.argmax])
    rep.results["dilation"] = PropertyResult("dilation", w_ld.value, float(np.prod(lam ** a)) * w_d.value, True,
                                       "measured constant")

    # higher order gives a smaller modulus
    w_b = om(f, beta, delta)
    w_a = om(f, alpha, delta, [w_b.argmax])
    rep.results["order"] = PropertyResult("order", w_b.value, w_a.value, w_b.value <= w_a.value * (1 + eps))
    return rep


def _subsets(m: int, r: int):
    return [list(c) for c in itertools.combinations(range(m), r)]
