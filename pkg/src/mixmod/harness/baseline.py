"""Frozen ratio bands and the regression check against them.

A first run in freeze mode records, for every group of rows sharing
``(suite, family, p, tau, alpha)``, the smallest and largest observed
ratio.  Later runs pass when each ratio lies in
``[min (1 - slack), max (1 + slack)]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["Row", "Baseline", "group_key"]


@dataclass
class Row:
    """One CSV line.  ``limits`` marks an exact check that is judged on its
    own interval rather than against the baseline."""

    suite: str
    family: str
    m: int
    p: float
    tau: float
    alpha: tuple
    n: tuple
    lhs: float
    rhs: float
    limits: tuple[float, float] | None = None
    status: str = ""

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 1.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    def sort_key(self):
        return (self.suite, self.family, self.p, self.tau, tuple(self.alpha), tuple(self.n))

    def cells(self) -> list[str]:
        return [self.suite, self.family, str(self.m), repr(self.p), repr(self.tau),
                ";".join(repr(float(a)) for a in self.alpha), ";".join(str(int(k)) for k in self.n),
                repr(float(self.lhs)), repr(float(self.rhs)), repr(float(self.ratio)), self.status]


def group_key(row: Row) -> str:
    family = row.family.split("/")[0]
    alpha = ";".join(repr(float(a)) for a in row.alpha)
    return f"{row.suite}|{family}|{row.p!r}|{row.tau!r}|{alpha}"


@dataclass
class Baseline:
    bands: dict[str, list[float]] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @classmethod
    def freeze(cls, rows: list[Row], meta: dict | None = None) -> "Baseline":
        bands: dict[str, list[float]] = {}
        for r in rows:
            if r.limits is not None or not math.isfinite(r.ratio):
                continue
            lo, hi = bands.setdefault(group_key(r), [r.ratio, r.ratio])
            bands[group_key(r)] = [min(lo, r.ratio), max(hi, r.ratio)]
        return cls(dict(sorted(bands.items())), dict(meta or {}))

    def merge(self, other: "Baseline") -> "Baseline":
        """Bands of ``other`` replace those of ``self`` key by key."""
        return Baseline({**self.bands, **other.bands}, {**self.meta, **other.meta})

    def check(self, row: Row, slack: float) -> str:
        if not math.isfinite(row.ratio):
            return "fail:unbounded"
        band = self.bands.get(group_key(row))
        if band is None:
            return "fail:unbanded"
        lo, hi = band
        if lo * (1 - slack) <= row.ratio <= hi * (1 + slack):
            return "ok"
        return "fail:band"

    def save(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps({"meta": self.meta, "bands": self.bands}, indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Baseline":
        obj = json.loads(Path(path).read_text())
        bands = {k: [float(v[0]), float(v[1])] for k, v in obj["bands"].items()}
        for k, (lo, hi) in bands.items():
            if lo > hi:
                raise ValueError(f"corrupt band {k}: {lo} > {hi}")
        return cls(bands, obj.get("meta", {}))
