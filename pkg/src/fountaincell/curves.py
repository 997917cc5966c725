"""Empirical survival curves with Wilson confidence bands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["CcdfCurve", "wilson_interval", "empirical_ccdf"]

_Z95 = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True, eq=False)
class CcdfCurve:
    """Empirical CCDF on an integer slot grid, with 95% Wilson bounds."""

    t_grid: np.ndarray
    values: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    n_samples: int
    label: str = ""

    def __post_init__(self) -> None:
        for name in ("t_grid", "values", "lo", "hi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.t_grid.shape == self.values.shape == self.lo.shape == self.hi.shape):
            raise DomainError("curve arrays must share one shape")
        if np.any(np.diff(self.values) > 1e-12):
            raise DomainError("a CCDF must be nonincreasing")
        if self.values.min() < -1e-12 or self.values.max() > 1 + 1e-12:
            raise DomainError("CCDF values must lie in [0, 1]")


def wilson_interval(successes, n: int, z: float = _Z95):
    """Wilson 95% score interval for a binomial proportion; vectorized."""
    if n < 1:
        raise DomainError("need at least one sample")
    k = np.asarray(successes, dtype=float)
    if np.any(k < 0) or np.any(k > n):
        raise DomainError("success count outside [0, n]")
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    # the score interval is exact at the endpoints; kill rounding residue
    lo = np.where(k == 0, 0.0, np.clip(center - half, 0.0, 1.0))
    hi = np.where(k == n, 1.0, np.clip(center + half, 0.0, 1.0))
    return lo, hi


def empirical_ccdf(t_samples, n_max: int, label: str = "") -> CcdfCurve:
    """Pooled empirical P(T > t) on the slot grid t = 0..N.

    The t = 0 row anchors CCDF(0) = 1 (packet times are >= 1 slot);
    truncation at N forces CCDF(N) = 0.
    """
    t = np.asarray(t_samples)
    if t.size == 0:
        raise DomainError("no samples")
    if t.min() < 1 or t.max() > n_max:
        raise DomainError("samples must lie in 1..n_max")
    grid = np.arange(0, int(n_max) + 1)
    # counts of T > t via a cumulative histogram
    hist = np.bincount(t.astype(int), minlength=int(n_max) + 1)[: int(n_max) + 1]
    exceed = t.size - np.cumsum(hist)
    lo, hi = wilson_interval(exceed, t.size)
    return CcdfCurve(t_grid=grid.astype(float), values=exceed / t.size,
                     lo=lo, hi=hi, n_samples=int(t.size), label=label)
