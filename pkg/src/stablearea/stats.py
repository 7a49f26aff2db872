"""Kolmogorov-Smirnov tests, bootstrap moment checks and a unimodality scan."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .dist import RngLike, SampleBatch, _gen

__all__ = [
    "KsReport",
    "MomentTestReport",
    "EmptyBatchError",
    "DegenerateBatchError",
    "NonMonotoneCdfError",
    "ks_two_sample",
    "ks_one_sample",
    "moment_test",
    "unimodality_scan",
    "count_local_maxima",
]

DEFAULT_SIGNIFICANCE = 0.01


class EmptyBatchError(ValueError):
    pass


class DegenerateBatchError(ValueError):
    pass


class NonMonotoneCdfError(ValueError):
    pass


@dataclass(frozen=True)
class KsReport:
    statistic: float
    p_value: float
    n1: int
    n2: int | str
    significance: float = DEFAULT_SIGNIFICANCE

    @property
    def passed(self) -> bool:
        return self.p_value > self.significance

    def as_dict(self):
        return {"statistic": self.statistic, "p_value": self.p_value, "n1": self.n1,
                "n2": self.n2, "passed": self.passed}


@dataclass(frozen=True)
class MomentTestReport:
    s: float
    empirical: float
    theoretical: float
    bootstrap_se: float

    @property
    def z_score(self) -> float:
        diff = self.empirical - self.theoretical
        if self.bootstrap_se == 0.0 and diff == 0.0:
            return 0.0
        return diff / self.bootstrap_se

    def as_dict(self):
        return {"s": self.s, "empirical": self.empirical, "theoretical": self.theoretical,
                "bootstrap_se": self.bootstrap_se, "z_score": self.z_score}


def _values(batch) -> np.ndarray:
    v = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    if v.size == 0:
        raise EmptyBatchError("KS test needs non-empty samples")
    return v.ravel()


def kolmogorov_sf(t):
    """Survival function of the limiting Kolmogorov distribution."""
    return float(special.kolmogorov(t))


def ks_two_sample(a, b, significance=DEFAULT_SIGNIFICANCE) -> KsReport:
    """Two-sample KS with the asymptotic p-value at ``n1 n2 / (n1 + n2)``."""
    x = np.sort(_values(a))
    y = np.sort(_values(b))
    n1, n2 = x.size, y.size
    pts = np.concatenate([x, y])
    cdf1 = np.searchsorted(x, pts, side="right") / n1
    cdf2 = np.searchsorted(y, pts, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    ne = n1 * n2 / (n1 + n2)
    p = kolmogorov_sf(math.sqrt(ne) * d)
    return KsReport(d, min(max(p, 0.0), 1.0), n1, n2, significance)


def ks_one_sample(a, cdf_fn: Callable, significance=DEFAULT_SIGNIFICANCE) -> KsReport:
    """One-sample KS of a batch against a (vectorised) CDF callable."""
    x = np.sort(_values(a))
    n = x.size
    try:
        F = np.asarray(cdf_fn(x), dtype=float).ravel()
    except (TypeError, ValueError):
        F = None
    if F is None or F.shape != x.shape:
        # scalar-only callable
        F = np.array([float(cdf_fn(float(v))) for v in x])
    if not np.all(np.isfinite(F)) or np.any((F < 0) | (F > 1)) or np.any(np.diff(F) < -1e-12):
        raise NonMonotoneCdfError("cdf_fn is not a monotone map into [0, 1]")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    p = kolmogorov_sf(math.sqrt(n) * d)
    return KsReport(d, min(max(p, 0.0), 1.0), n, "cdf", significance)


def moment_test(a, s, theoretical, n_boot, rng: RngLike) -> MomentTestReport:
    """Empirical ``E[X**s]`` against a target with a bootstrap standard error.

    The batch is sorted first so the report does not depend on its order.
    A constant batch equal to the target gives SE 0 and z-score 0; any other
    constant batch raises :class:`DegenerateBatchError`.
    """
    x = np.sort(_values(a)) ** float(s)
    if np.all(x == x[0]):
        # zero spread: acceptable only when it sits exactly on the target
        if x[0] == theoretical:
            return MomentTestReport(float(s), float(x[0]), float(theoretical), 0.0)
        raise DegenerateBatchError("all powered values are equal; bootstrap SE is zero")
    gen = _gen(rng)
    n = x.size
    means = np.empty(int(n_boot))
    for k in range(int(n_boot)):
        means[k] = x[gen.integers(0, n, n)].mean()
    se = float(np.std(means, ddof=1))
    if not se > 0:
        raise DegenerateBatchError("bootstrap SE is zero")
    return MomentTestReport(float(s), math.fsum(x) / n, float(theoretical), se)


def count_local_maxima(values) -> int:
    """Number of strict local maxima in a sequence (plateaus collapse)."""
    d = np.sign(np.diff(np.asarray(values, dtype=float)))
    d = d[d != 0]
    return int(np.sum((d[:-1] > 0) & (d[1:] < 0)))


def unimodality_scan(ctx, grid, eps=1e-10) -> int:
    """Count strict local maxima of the area density along ``grid``."""
    from .arealaw import density_many

    g = np.asarray(grid, dtype=float)
    if g.size < 100 or np.any(np.diff(g) <= 0) or np.any(g <= 0):
        raise ValueError("grid must be strictly increasing, positive, with >= 100 points")
    vals, _, _ = density_many(ctx, g, eps)
    return count_local_maxima(vals)
