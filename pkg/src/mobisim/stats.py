"""
Replication statistics.
Means with Student-t 95% confidence intervals, empirical CDFs and the
two-sample Kolmogorov-Smirnov distance.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from mobisim.errors import EmptySampleError

CONFIDENCE = 0.95
MAX_T_DF = 120
NORMAL_975 = 1.96


@lru_cache(maxsize=None)
def t_critical(df: int) -> float:
    """Two-sided 95% Student-t critical value; the normal 1.96 beyond 120 df."""
    if df < 1:
        raise ValueError("degrees of freedom must be at least 1")
    if df > MAX_T_DF:
        return NORMAL_975
    return float(sps.t.ppf(0.5 + CONFIDENCE / 2, df))


@dataclass(frozen=True)
class SummaryStat:
    n: int
    mean: float
    sample_std: float
    ci95_low: float
    ci95_high: float

    @property
    def half_width(self) -> float:
        return (self.ci95_high - self.ci95_low) / 2.0

    @property
    def degenerate(self) -> bool:
        """A single sample carries no spread information."""
        return self.n < 2

    def contains(self, value: float) -> bool:
        return self.ci95_low <= value <= self.ci95_high


def summarize(samples: Sequence[float]) -> SummaryStat:
    """
    Mean, sample standard deviation and t-based 95% confidence interval.

    Raises:
        EmptySampleError: If ``samples`` is empty
    """
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise EmptySampleError("Cannot summarize an empty sample")
    # sorting makes the floating-point sum independent of sample order
    data = np.sort(data)
    mean = float(data.mean())
    if data.size == 1:
        return SummaryStat(n=1, mean=mean, sample_std=0.0, ci95_low=mean, ci95_high=mean)
    std = float(data.std(ddof=1))
    half = t_critical(data.size - 1) * std / np.sqrt(data.size)
    return SummaryStat(
        n=int(data.size),
        mean=mean,
        sample_std=std,
        ci95_low=mean - half,
        ci95_high=mean + half,
    )


@dataclass(frozen=True)
class Ecdf:
    """Right-continuous empirical CDF over sorted samples."""

    values: np.ndarray

    def __call__(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side='right') / self.values.size)

    def __len__(self) -> int:
        return int(self.values.size)

    def points(self) -> List[Tuple[float, float]]:
        """(value, fraction) at every distinct sample value."""
        distinct = np.unique(self.values)
        fractions = np.searchsorted(self.values, distinct, side='right') / self.values.size
        return [(float(v), float(f)) for v, f in zip(distinct, fractions)]


def ecdf(samples: Sequence[float]) -> Ecdf:
    data = np.sort(np.asarray(samples, dtype=float))
    if data.size == 0:
        raise EmptySampleError("Cannot build an eCDF from an empty sample")
    data.setflags(write=False)
    return Ecdf(values=data)


def ks_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Largest vertical gap between the two eCDFs."""
    if len(a) == 0 or len(b) == 0:
        raise EmptySampleError("KS distance needs two non-empty samples")
    return float(sps.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float)).statistic)
