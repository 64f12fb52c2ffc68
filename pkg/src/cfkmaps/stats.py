"""Estimates, tolerance bookkeeping and small statistical tests.

Every Monte Carlo estimate travels with its sample count and standard
error; pass/fail is always judged against a tolerance declared by the
caller (the command layer), never hard-coded here.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats as _scipy_stats


@dataclass
class Estimate:
    """A named scalar with uncertainty and an optional target."""

    name: str
    value: float
    se: float
    count: int
    target: Optional[float] = None
    sigma_tolerance: float = 3.0

    @property
    def interval(self) -> tuple[float, float]:
        return (
            self.value - self.sigma_tolerance * self.se,
            self.value + self.sigma_tolerance * self.se,
        )

    @property
    def passed(self) -> Optional[bool]:
        if self.target is None:
            return None
        lo, hi = self.interval
        return lo <= self.target <= hi

    def row(self) -> list:
        return [
            self.name,
            f"{self.value:.10g}",
            f"{self.se:.6g}",
            self.count,
            "" if self.target is None else f"{self.target:.10g}",
            self.sigma_tolerance,
            "" if self.passed is None else ("pass" if self.passed else "FAIL"),
        ]


@dataclass
class StatReport:
    """Estimates plus histogram tables and a global verdict."""

    title: str
    estimates: list[Estimate] = field(default_factory=list)
    tables: dict[str, list[list]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    hard_failures: list[str] = field(default_factory=list)

    def add(self, est: Estimate) -> Estimate:
        self.estimates.append(est)
        return est

    def fail(self, message: str) -> None:
        self.hard_failures.append(message)

    @property
    def all_pass(self) -> bool:
        if self.hard_failures:
            return False
        return all(e.passed is not False for e in self.estimates)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "value", "se", "count", "target", "sigmas", "verdict"])
        for e in self.estimates:
            writer.writerow(e.row())
        for name, rows in self.tables.items():
            writer.writerow([])
            writer.writerow([f"table:{name}"])
            for row in rows:
                writer.writerow(row)
        return buf.getvalue()

    def format_text(self) -> str:
        lines = [self.title]
        for e in self.estimates:
            verdict = "" if e.passed is None else ("  [pass]" if e.passed else "  [FAIL]")
            target = "" if e.target is None else f"  target={e.target:.6g}"
            lines.append(
                f"  {e.name}: {e.value:.6g} +- {e.se:.2g} (n={e.count}){target}{verdict}"
            )
        for note in self.notes:
            lines.append(f"  note: {note}")
        for msg in self.hard_failures:
            lines.append(f"  HARD FAIL: {msg}")
        lines.append(f"  => {'all pass' if self.all_pass else 'FAILURES PRESENT'}")
        return "\n".join(lines)


def binomial_estimate(name: str, hits: int, count: int, target=None) -> Estimate:
    p = hits / count if count else 0.0
    se = math.sqrt(max(p * (1.0 - p), 1e-12) / count) if count else 0.0
    return Estimate(name, p, se, count, None if target is None else float(target))


def mean_estimate(name: str, values: Sequence[float], target=None) -> Estimate:
    arr = np.asarray(values, dtype=float)
    se = arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else 0.0
    return Estimate(
        name, float(arr.mean()), float(se), len(arr), None if target is None else float(target)
    )


def chi2_uniform(counts: Sequence[int]) -> tuple[float, int, float]:
    """Chi-square statistic, dof and p-value against the uniform law."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    k = len(counts)
    if k < 2 or total == 0:
        return 0.0, 0, 1.0
    expected = total / k
    stat = float(((counts - expected) ** 2 / expected).sum())
    dof = k - 1
    return stat, dof, float(_scipy_stats.chi2.sf(stat, dof))


def chi2_against(counts: Sequence[int], probs: Sequence[float]) -> tuple[float, int, float]:
    """Chi-square test of observed counts against given cell weights."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    total = counts.sum()
    expected = probs * total
    mask = expected > 0
    stat = float(((counts[mask] - expected[mask]) ** 2 / expected[mask]).sum())
    dof = int(mask.sum()) - 1
    return stat, dof, float(_scipy_stats.chi2.sf(stat, dof))


def tv_distance(counts: dict, probs: dict) -> float:
    """Total variation between an empirical law (counts) and a reference
    law (probabilities); outcomes with reference mass zero contribute
    their empirical mass."""
    total = sum(counts.values())
    if total == 0:
        return 0.0
    keys = set(counts) | set(probs)
    return 0.5 * sum(
        abs(counts.get(k, 0) / total - probs.get(k, 0.0)) for k in keys
    )


def tv_bootstrap_se(
    counts: dict, probs: dict, seed: int, replicates: int = 200
) -> float:
    """Bootstrap standard error of the plug-in total variation."""
    keys = sorted(set(counts) | set(probs))
    obs = np.array([counts.get(k, 0) for k in keys], dtype=np.int64)
    total = int(obs.sum())
    if total == 0:
        return 0.0
    ref = np.array([probs.get(k, 0.0) for k in keys])
    rng = np.random.default_rng(seed)
    emp = obs / total
    tvs = np.empty(replicates)
    for r in range(replicates):
        resampled = rng.multinomial(total, emp)
        tvs[r] = 0.5 * np.abs(resampled / total - ref).sum()
    return float(tvs.std(ddof=1))
