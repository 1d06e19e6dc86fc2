"""Experiment statistics: performance profiles and the paired Wilcoxon signed-rank test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _sps

EXACT_MAX_N = 25


@dataclass
class ProfileCurve:
    """Step function rho(tau): fraction of instances with ratio <= tau."""

    solver: str
    taus: np.ndarray
    rho: np.ndarray
    ratios: np.ndarray

    def __call__(self, tau: float) -> float:
        k = np.searchsorted(self.taus, tau, side="right")
        return 0.0 if k == 0 else float(self.rho[k - 1])

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.taus.tolist(), self.rho.tolist()))


def performance_profiles(results: Mapping[str, Mapping[str, float]], solvers: Sequence[str] | None = None,
                         ratio_to_worst: bool = False) -> dict[str, ProfileCurve]:
    """Performance profiles from a table ``results[instance][solver] = f_best``.

    For maximisation the ratio is ``max_s f[p, s] / f[p, s]`` so the best solver
    on an instance scores 1. ``ratio_to_worst=True`` uses ``f[p, s] / min_s f[p, s]``
    instead.
    """
    instances = list(results)
    if not instances:
        raise ValueError("empty result table")
    if solvers is None:
        solvers = list(results[instances[0]])
    f = np.empty((len(instances), len(solvers)), dtype=np.float64)
    for a, inst in enumerate(instances):
        row = results[inst]
        for b, s in enumerate(solvers):
            if s not in row:
                raise ValueError(f"missing result for solver {s!r} on instance {inst!r}")
            f[a, b] = row[s]
    if (f <= 0).any():
        raise ValueError("performance ratios need positive objective values")
    if ratio_to_worst:
        r = f / f.min(axis=1, keepdims=True)
    else:
        r = f.max(axis=1, keepdims=True) / f
    curves = {}
    for b, s in enumerate(solvers):
        ratios = np.sort(r[:, b])
        taus, counts = np.unique(ratios, return_counts=True)
        curves[s] = ProfileCurve(s, taus, np.cumsum(counts) / len(instances), r[:, b])
    return curves


@dataclass
class WilcoxonResult:
    statistic: float | None
    p_value: float | None
    n: int
    method: str
    # which sample tends to be larger: "a", "b" or "none"
    favors: str

    @property
    def status(self) -> str:
        return "NA" if self.p_value is None else "ok"

    def __str__(self):
        if self.p_value is None:
            return "NA"
        return f"W={self.statistic:g} p={self.p_value:.3g} n={self.n} ({self.method}, favors {self.favors})"


def wilcoxon_signed_rank(pairs: Sequence[tuple[float, float]] | None = None, a=None, b=None) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped and tied magnitudes get average ranks. With at
    most 25 non-zero differences and no ties the exact null distribution is used,
    otherwise the normal approximation with continuity correction. If every
    difference is zero the result has status ``"NA"``.
    """
    if pairs is not None:
        arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
        a, b = arr[:, 0], arr[:, 1]
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    d = a - b
    d = d[d != 0]
    if d.size == 0:
        return WilcoxonResult(None, None, 0, "none", "none")
    ties = np.unique(np.abs(d)).size < d.size
    method = "exact" if d.size <= EXACT_MAX_N and not ties else "approx"
    res = _sps.wilcoxon(d, zero_method="wilcox", correction=True, method=method)
    ranks = _sps.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    favors = "a" if w_plus > w_minus else "b" if w_minus > w_plus else "none"
    return WilcoxonResult(float(res.statistic), float(res.pvalue), int(d.size), method, favors)
