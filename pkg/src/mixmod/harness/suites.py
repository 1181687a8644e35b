"""Experiment suites: rows of two-sided estimates, checked or frozen."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .. import approximation as ap
from .. import lacunary as lac
from ..lorentz import L2, LorentzIndex, grid_dims, norm, norm_of_values, norm_report
from ..smoothness import (FractionalOrder, frac_difference_direct, frac_difference_multiplier,
                          modulus, modulus_properties_check)
from ..spectrum import SpectralFunction, analyze, evaluate, shift
from .baseline import Baseline, Row, group_key
from .config import ExperimentConfig
from .families import Member, make_family, random_band

__all__ = ["CSV_COLUMNS", "SuiteResult", "SelfCheckError", "selfcheck", "build_rows", "run_suite",
           "drift_slopes"]

CSV_COLUMNS = ("suite", "family", "m", "p", "tau", "alpha", "n", "lhs", "rhs", "ratio", "status")

EXACT = 1e-9
ORACLE = 1e-6


class SelfCheckError(RuntimeError):
    pass


def selfcheck() -> None:
    """Cross-check the numerical kernels against independent oracles."""
    rng = np.random.default_rng(12345)
    f = random_band(2, 4, 1.0, rng)
    for alpha, h in ((0.7, 0.3), (2.3, -1.1)):
        a = frac_difference_direct(f, alpha, 0, h)
        b = frac_difference_multiplier(f, alpha, 0, h)
        if (a - b).l2_norm() > 1e-8 * f.l2_norm():
            raise SelfCheckError(f"direct series and multiplier disagree at alpha={alpha}, h={h}")
    if abs(norm(f, L2) - f.l2_norm()) > EXACT:
        raise SelfCheckError("L2 norm does not match Parseval")
    g = analyze(evaluate(f, (16, 16)), real=True)
    if not g.allclose(f, atol=1e-12):
        raise SelfCheckError("synthesis/analysis round trip failed")
    c = SpectralFunction.cosine_product([1])
    w = modulus(c, (1.0,), (np.pi / 2,), L2).value
    if abs(w - math.sqrt(2) * math.sin(np.pi / 4)) > ORACLE:
        raise SelfCheckError("modulus of cos x misses its closed form")


def _row(cfg, suite, member: Member, idx: LorentzIndex, alpha, n, lhs, rhs, limits=None) -> Row:
    return Row(suite, member.label, cfg.dim, idx.p, idx.tau, tuple(float(a) for a in alpha),
               tuple(int(k) for k in n), float(lhs), float(rhs), limits)


def _vec(x, m):
    return np.full(m, float(x))


def _small_step(f: SpectralFunction) -> np.ndarray:
    # every |k_j h_j| <= pi/3, so each difference factor has modulus <= 1
    return np.pi / (3.0 * np.asarray(f.band, dtype=float))


def _properties(cfg, mem, idx, alpha, sampling):
    m, pp = cfg.dim, cfg.properties
    f = mem.f
    beta = FractionalOrder(np.asarray(alpha) + pp.beta_gain)
    rep = modulus_properties_check(f, alpha, beta, _vec(pp.t, m), _vec(pp.delta, m), _vec(pp.lam, m),
                                   idx, cfg.search, sampling)
    rows = []
    lim = {"vanishing": (1.0, 1.0), "monotone": (0.0, 1.0)}
    if idx.tau <= idx.p:
        lim["subadditive"] = (0.0, 1.0 + EXACT)
    for name in ("vanishing", "subadditive", "monotone", "normalized", "dilation", "order"):
        r = rep[name]
        rows.append(_row(cfg, f"properties.{name}", mem, idx, alpha, (), r.lhs, r.rhs, lim.get(name)))
    # the order comparison with constant 1 in the regime where it is provable
    d = _small_step(f)
    w_b = modulus(f, beta, d, idx, cfg.search, sampling)
    w_a = modulus(f, alpha, d, idx, cfg.search, sampling, [w_b.argmax])
    exact = idx.p == idx.tau == 2
    rows.append(_row(cfg, "properties.order.small", mem, idx, alpha, (), w_b.value, w_a.value,
                     (0.0, 1.0 + EXACT) if exact else None))
    return rows


def _realization(cfg, mem, idx, alpha, sampling):
    m = cfg.dim
    return [_row(cfg, "realization", mem, idx, alpha, (k,) * m,
                 *_sides(ap.realization_sides(mem.f, (k,) * m, alpha, idx, cfg.search, sampling)))
            for k in cfg.n]


def _sides(r: ap.RatioReport):
    return r.lhs, r.rhs


def _direct(cfg, mem, idx, alpha, sampling):
    m, rows = cfg.dim, []
    for k in cfg.n:
        rep = ap.direct_estimate_sides(mem.f, (k,) * m, alpha, idx, cfg.search, sampling)
        rows.append(_row(cfg, "direct", mem, idx, alpha, (k,) * m, rep.lhs, rep.rhs))
    return rows


def _angle_oracle(cfg, mem, sampling):
    m = cfg.dim
    return [_row(cfg, "angle.l2", mem, L2, (0.0,) * m, (k,) * m, ap.best_angle_l2(mem.f, (k,) * m),
                 ap.angle_surrogate(mem.f, (k,) * m, L2, sampling), (1 - ORACLE, 1 + ORACLE))
            for k in cfg.n]


def _inverse(cfg, mem, idx, alpha, sampling):
    m, rows = cfg.dim, []
    cache = ap.AngleCache(mem.f, idx, sampling)
    for k in cfg.n:
        nv = (k,) * m
        rep = ap.inverse_estimate_sides(mem.f, nv, alpha, idx, cfg.variant, cfg.search, sampling)
        rows.append(_row(cfg, f"inverse.{cfg.variant}", mem, idx, alpha, nv, rep.lhs, rep.rhs))
        if cfg.variant == "sharp" and idx.tau <= 2:
            natural = ap.inverse_rhs(mem.f, nv, alpha, idx, "natural", sampling, y=cache)
            rows.append(_row(cfg, "inverse.improvement", mem, idx, alpha, nv, rep.rhs, natural))
    return rows


def _lacunary(cfg, mem, idx, alpha, sampling):
    spec = mem.extra["lacunary"]
    f, m, rows = mem.f, cfg.dim, []
    for k in cfg.n:
        if k & (k - 1):
            continue  # block bounds need dyadic cutoffs
        e = k.bit_length() - 1
        lhs = modulus(f, alpha, np.full(m, np.pi / k), idx, cfg.search, sampling).value
        rhs = lac.block_bound(spec, (e,) * m, alpha)
        rows.append(_row(cfg, "lacunary.block.upper", mem, idx, alpha, (k,) * m, lhs, rhs))
        if lac.in_equivalence_domain(idx):
            rows.append(_row(cfg, "lacunary.block.lower", mem, idx, alpha, (k,) * m, rhs, lhs))
        brute = lac.block_bound_bruteforce(spec, (e,) * m, alpha)
        rows.append(_row(cfg, "lacunary.block.oracle", mem, idx, alpha, (k,) * m, rhs, brute,
                         (1 - 1e-12, 1 + 1e-12)))
    if lac.in_equivalence_domain(idx):
        for k in cfg.n:
            w = modulus(f, alpha, np.full(m, 1.0 / k), idx, cfg.search, sampling).value
            i_s = lac.equivalence_functional(f, (k,) * m, alpha, idx, "surrogate", sampling)
            rows.append(_row(cfg, "lacunary.equiv", mem, idx, alpha, (k,) * m, w, i_s))
            if idx.p == idx.tau == 2:
                i_l2 = lac.equivalence_functional(f, (k,) * m, alpha, idx, "l2", sampling)
                rows.append(_row(cfg, "lacunary.equiv.l2", mem, idx, alpha, (k,) * m, i_l2, i_s,
                                 (1 - ORACLE, 1 + ORACLE)))
    return rows


def _lacunary_norms(cfg, mem, idx, sampling):
    spec = mem.extra["lacunary"]
    m, zero = cfg.dim, (0.0,) * cfg.dim
    nv = norm(mem.f, idx, sampling)
    l2 = lac.coeff_l2_functional(spec)
    rows = [_row(cfg, "lacunary.norm.upper", mem, idx, zero, (), nv, l2)]
    p, tau = idx.p, idx.tau
    if (1 < p <= 2 and 1 < tau <= 2) or p > 2:
        rows.append(_row(cfg, "lacunary.norm.lower", mem, idx, zero, (), l2, nv))
    if 1 < p <= 2 and tau > 2:
        rows.append(_row(cfg, "lacunary.norm.ltau", mem, idx, zero, (),
                         lac.coeff_ltau_functional(spec, tau), nv))
    if p == tau == 2:
        rows.append(_row(cfg, "lacunary.parseval", mem, idx, zero, (), 2 ** (m / 2) * nv, l2,
                         (1 - ORACLE, 1 + ORACLE)))
    return rows


def _norms(cfg, mem, partner, idx, sampling):
    m, zero = cfg.dim, (0.0,) * cfg.dim
    f = mem.f
    rep = norm_report(f, idx, sampling)
    rows = [_row(cfg, "norms.refine", mem, idx, zero, (), rep.value, rep.refined)]
    moved = shift(f, np.full(m, 0.7))
    rows.append(_row(cfg, "norms.shift", mem, idx, zero, (), norm(moved, idx, sampling), rep.value))
    if idx.p == idx.tau == 2:
        rows.append(_row(cfg, "norms.parseval", mem, idx, zero, (), rep.value, f.l2_norm(),
                         (1 - ORACLE, 1 + ORACLE)))
    # all three norms on one grid, where the triangle inequality is exact for tau <= p
    g = partner.f
    dims = grid_dims(f + g, sampling) if len(f + g) else grid_dims(f, sampling)
    on_grid = [norm_of_values(evaluate(h, dims).values, idx) if len(h) else 0.0 for h in (f + g, f, g)]
    rows.append(_row(cfg, "norms.triangle", mem, idx, zero, (), on_grid[0], on_grid[1] + on_grid[2],
                     (0.0, 1.0 + EXACT) if idx.tau <= idx.p else None))
    return rows


def build_tasks(cfg: ExperimentConfig) -> list[Callable[[], list[Row]]]:
    members: list[Member] = []
    for fam in cfg.families:
        members.extend(make_family(fam, cfg.dim, cfg.seed))
    tasks = []
    for i, mem in enumerate(members):
        sampling = mem.family.sampling(cfg.sampling)
        if cfg.suite == "norms":
            partner = members[(i + 1) % len(members)]
            tasks += [lambda mem=mem, idx=idx, s=sampling, g=partner: _norms(cfg, mem, g, idx, s)
                      for idx in cfg.indices]
            continue
        if cfg.suite == "lacunary":
            if "lacunary" not in mem.extra:
                continue
            tasks += [lambda mem=mem, idx=idx, s=sampling: _lacunary_norms(cfg, mem, idx, s)
                      for idx in cfg.indices]
        if cfg.suite == "direct":
            tasks.append(lambda mem=mem, s=sampling: _angle_oracle(cfg, mem, s))
        run = {"verify-properties": _properties, "realization": _realization, "direct": _direct,
               "inverse": _inverse, "lacunary": _lacunary}[cfg.suite]
        for idx in cfg.indices:
            for alpha in cfg.alphas:
                tasks.append(lambda mem=mem, idx=idx, a=alpha, s=sampling, run=run: run(cfg, mem, idx, a, s))
    return tasks


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.suite == "inverse" and cfg.variant == "sharp":
        bad = [str(i) for i in cfg.indices if not ap.in_sharp_domain(i)]
        if bad:
            raise ValueError(f"sharp inverse estimate is undefined for {bad}")
    if cfg.suite in ("verify-properties", "realization", "direct", "inverse", "lacunary") and cfg.families \
            and not cfg.alphas:
        raise ValueError(f"suite {cfg.suite} needs at least one order in 'alphas'")


def build_rows(cfg: ExperimentConfig) -> list[Row]:
    """Compute every row of the suite (unjudged), sorted by key."""
    _validate(cfg)
    tasks = build_tasks(cfg)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            chunks = list(pool.map(lambda t: t(), tasks))
    else:
        chunks = [t() for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=Row.sort_key)
    return rows


def drift_slopes(rows: list[Row]) -> dict[str, float]:
    """Least-squares slope of ``log ratio`` against ``log n`` per function and group."""
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if r.limits is not None or not r.n or not (0 < r.ratio < math.inf):
            continue
        key = f"{group_key(r)}|{r.family}"
        series.setdefault(key, []).append((math.log(r.n[0]), math.log(r.ratio)))
    out = {}
    for key, pts in sorted(series.items()):
        if len(pts) >= 3:
            x, y = np.array(pts).T
            out[key] = float(np.polyfit(x, y, 1)[0])
    return out


@dataclass
class SuiteResult:
    rows: list[Row]
    exit_code: int
    summary: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.cells())
        return buf.getvalue()


def judge(rows: list[Row], baseline: Baseline | None, slack: float) -> None:
    """Fill in ``status``; ``baseline=None`` means freeze mode."""
    for r in rows:
        if r.limits is not None:
            lo, hi = r.limits
            r.status = "ok" if lo <= r.ratio <= hi else "fail:limit"
        elif baseline is None:
            r.status = "ok" if math.isfinite(r.ratio) else "fail:unbounded"
        else:
            r.status = baseline.check(r, slack)


def run_suite(cfg: ExperimentConfig, freeze: bool = False, write: bool = True) -> SuiteResult:
    """Run, judge and (optionally) write CSV, JSON summary and baseline.

    Check mode compares banded rows with ``cfg.baseline``; freeze mode
    writes the observed bands there instead.  Exact checks are judged on
    their own limits in both modes.  Exit code 0 means every row passed.
    """
    if cfg.selfcheck:
        selfcheck()
    rows = build_rows(cfg)
    banded = [r for r in rows if r.limits is None]
    if freeze:
        judge(rows, None, cfg.slack)
        if write and cfg.baseline:
            Baseline.freeze(rows, {"suite": cfg.suite, "seed": cfg.seed, "slack": cfg.slack}).save(cfg.baseline)
    else:
        if banded and not (cfg.baseline and Path(cfg.baseline).exists()):
            raise FileNotFoundError(f"check mode needs a baseline file, got {cfg.baseline!r}")
        judge(rows, Baseline.load(cfg.baseline) if banded else Baseline(), cfg.slack)
    failed = [r for r in rows if r.status != "ok"]
    summary = {
        "suite": cfg.suite,
        "mode": "freeze" if freeze else "check",
        "rows": len(rows),
        "failed": len(failed),
        "failures": [dict(zip(CSV_COLUMNS, r.cells())) for r in failed],
        "drift": drift_slopes(rows),
    }
    res = SuiteResult(rows, 1 if failed else 0, summary)
    if write and cfg.out:
        out = Path(cfg.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(res.csv_text(), encoding="utf-8", newline="\n")
        out.with_suffix(".json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return res
