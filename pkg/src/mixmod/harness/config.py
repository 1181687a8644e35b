"""Experiment configuration (JSON)."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

from ..lorentz import LorentzIndex, Sampling
from ..smoothness import FractionalOrder, ModulusSearchConfig
from .families import FamilySpec

__all__ = ["SUITES", "PropertyParams", "ExperimentConfig", "load_config"]

SUITES = ("verify-properties", "realization", "inverse", "direct", "lacunary", "norms")


@dataclass(frozen=True)
class PropertyParams:
    """Step bounds for the modulus property checks (scalars apply to every axis).

    ``t`` and ``delta`` are the two bounds (both at most 1), ``lam`` the
    dilation factor and ``beta_gain`` is added to each order to get the
    higher order.
    """

    t: float = 0.5
    delta: float = 0.25
    lam: float = 2.0
    beta_gain: float = 1.0

    def __post_init__(self):
        if not (0 < self.delta < self.t <= 1):
            raise ValueError("need 0 < delta < t <= 1")
        if self.lam < 1 or self.beta_gain <= 0:
            raise ValueError("need lam >= 1 and beta_gain > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    dim: int = 2
    indices: tuple[LorentzIndex, ...] = (LorentzIndex(2, 2),)
    alphas: tuple[FractionalOrder, ...] = ()
    n: tuple[int, ...] = (2, 4, 8, 16, 32)
    families: tuple[FamilySpec, ...] = ()
    seed: int = 0
    search: ModulusSearchConfig = ModulusSearchConfig()
    sampling: Sampling = Sampling()
    variant: str = "sharp"
    slack: float = 0.25
    properties: PropertyParams = PropertyParams()
    baseline: str | None = None
    out: str | None = None
    selfcheck: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"suite must be one of {SUITES}, got {self.suite!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        for a in self.alphas:
            if len(a) != self.dim:
                raise ValueError(f"order {tuple(a)} does not match dim {self.dim}")
            a.require_active()
        if any(int(k) < 1 for k in self.n):
            raise ValueError("n schedule entries must be >= 1")
        if self.variant not in ("natural", "sharp"):
            raise ValueError("variant must be 'natural' or 'sharp'")
        if not (0 <= self.slack < 1):
            raise ValueError("slack must lie in [0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        names = [f.name for f in self.families]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate family names {names}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        kw = {}
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        for key in ("suite", "dim", "seed", "variant", "slack", "baseline", "out", "selfcheck", "threads"):
            if key in d:
                kw[key] = d[key]
        if "indices" in d:
            kw["indices"] = tuple(LorentzIndex(*pt) for pt in d["indices"])
        if "alphas" in d:
            kw["alphas"] = tuple(FractionalOrder(a) for a in d["alphas"])
        if "n" in d:
            kw["n"] = tuple(int(v) for v in d["n"])
        if "families" in d:
            kw["families"] = tuple(FamilySpec.from_dict(f) for f in d["families"])
        if "search" in d:
            kw["search"] = ModulusSearchConfig(**d["search"])
        if "sampling" in d:
            kw["sampling"] = Sampling(**d["sampling"])
        if "properties" in d:
            kw["properties"] = PropertyParams(**d["properties"])
        return cls(**kw)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def load_config(path: str | Path, base: Path | None = None) -> ExperimentConfig:
    """Read a JSON config; relative baseline/out paths resolve against ``base``
    (default: the current directory)."""
    cfg = ExperimentConfig.from_dict(json.loads(Path(path).read_text()))
    if base is not None:
        fix = {}
        for key in ("baseline", "out"):
            v = getattr(cfg, key)
            if v is not None and not Path(v).is_absolute():
                fix[key] = os.path.normpath(base / v)
        cfg = replace(cfg, **fix)
    return cfg
