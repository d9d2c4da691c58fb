"""Ensemble accumulation and statistical comparison against predictions.

EnsembleStats is a mergeable accumulator: accumulate folds one walk outcome
in, merge combines two accumulators. Time moments are kept as exact
rationals (binary floats are rationals, so Fraction(float) is lossless),
which makes merge associative and commutative to the bit: any sharding of
the same outcomes produces the identical final state. The float views are
derived on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import chi2

from .walk import WalkOutcome

__all__ = [
    "DimensionMismatchError",
    "NoCompletedTrialsError",
    "EnsembleStats",
    "BornComparison",
    "MfptComparison",
    "accumulate",
    "merge",
    "compare_born",
    "compare_mfpt",
    "passage_moments",
]

# two-sided z gate on each outcome probability
Z_LIMIT = 3.0
# chi-square gate percentile; threshold depends on dof = n - 1
CHI2_PERCENTILE = 0.999


class DimensionMismatchError(ValueError):
    """Accumulators or vectors of incompatible shape."""


class NoCompletedTrialsError(ValueError):
    """Comparison requested but no (or too few) completed trials."""


@dataclass
class EnsembleStats:
    """Mergeable tally of walk outcomes.

    vertex_counts[i] counts completed walks absorbed at vertex i.
    time_histogram has bins+1 slots: bins of width bin_width starting at 0,
    plus a final overflow slot. Durations also accumulate exactly as
    Fraction first and second moments.
    """

    vertex_counts: np.ndarray
    time_histogram: np.ndarray
    bin_width: float
    incomplete_count: int = 0
    trials: int = 0
    exact_time_sum: Fraction = field(default_factory=Fraction)
    exact_time_sq_sum: Fraction = field(default_factory=Fraction)

    @classmethod
    def empty(cls, dimension: int, bin_width: float, bins: int = 200) -> "EnsembleStats":
        if dimension < 2:
            raise ValueError("dimension must be at least 2")
        if not bin_width > 0.0:
            raise ValueError("bin_width must be positive")
        if bins < 1:
            raise ValueError("bins must be at least 1")
        return cls(
            vertex_counts=np.zeros(dimension, dtype=np.int64),
            time_histogram=np.zeros(bins + 1, dtype=np.int64),
            bin_width=float(bin_width),
        )

    @property
    def dimension(self) -> int:
        return int(self.vertex_counts.size)

    @property
    def bins(self) -> int:
        return int(self.time_histogram.size) - 1

    @property
    def completed(self) -> int:
        return self.trials - self.incomplete_count

    @property
    def time_sum(self) -> float:
        return float(self.exact_time_sum)

    @property
    def time_sq_sum(self) -> float:
        return float(self.exact_time_sq_sum)

    def copy(self) -> "EnsembleStats":
        return EnsembleStats(
            vertex_counts=self.vertex_counts.copy(),
            time_histogram=self.time_histogram.copy(),
            bin_width=self.bin_width,
            incomplete_count=self.incomplete_count,
            trials=self.trials,
            exact_time_sum=self.exact_time_sum,
            exact_time_sq_sum=self.exact_time_sq_sum,
        )


def accumulate(stats: EnsembleStats, outcome: WalkOutcome) -> EnsembleStats:
    """Fold one outcome into stats, in place. Returns stats.

    Incomplete outcomes count toward trials and incomplete_count only; their
    truncated durations would bias the moments and histogram.
    """
    if outcome.dimension != stats.dimension:
        raise DimensionMismatchError(
            f"outcome dimension {outcome.dimension} != stats dimension {stats.dimension}"
        )
    stats.trials += 1
    if not outcome.complete:
        stats.incomplete_count += 1
        return stats
    stats.vertex_counts[outcome.winner] += 1
    t = outcome.elapsed
    idx = min(int(t / stats.bin_width), stats.bins)
    stats.time_histogram[idx] += 1
    exact = Fraction(t)
    stats.exact_time_sum += exact
    stats.exact_time_sq_sum += exact * exact
    return stats


def merge(a: EnsembleStats, b: EnsembleStats) -> EnsembleStats:
    """Combine two accumulators into a new one.

    Requires identical dimension and binning. Exact moments make this
    associative and commutative bit-for-bit.
    """
    if a.dimension != b.dimension:
        raise DimensionMismatchError("accumulators have different dimensions")
    if a.bins != b.bins or a.bin_width != b.bin_width:
        raise DimensionMismatchError("accumulators have different binnings")
    return EnsembleStats(
        vertex_counts=a.vertex_counts + b.vertex_counts,
        time_histogram=a.time_histogram + b.time_histogram,
        bin_width=a.bin_width,
        incomplete_count=a.incomplete_count + b.incomplete_count,
        trials=a.trials + b.trials,
        exact_time_sum=a.exact_time_sum + b.exact_time_sum,
        exact_time_sq_sum=a.exact_time_sq_sum + b.exact_time_sq_sum,
    )


@dataclass(frozen=True)
class BornComparison:
    expected: np.ndarray
    observed: np.ndarray
    z_scores: np.ndarray
    chi_square: float
    dof: int
    chi_square_threshold: float
    passed: bool


def compare_born(stats: EnsembleStats, expected) -> BornComparison:
    """Gate observed absorption frequencies against expected probabilities.

    Per-vertex z uses the binomial standard error
    sqrt(e_i (1 - e_i) / completed); the chi-square sums over cells with
    e_i > 0 (a hit in a zero-probability cell is an automatic infinity).
    Passes when every |z| < 3 and chi-square is below the 99.9th percentile
    at n-1 degrees of freedom.
    """
    e = np.asarray(expected, dtype=float)
    if e.ndim != 1 or e.size != stats.dimension:
        raise DimensionMismatchError(
            f"expected has shape {e.shape}, stats dimension is {stats.dimension}"
        )
    if np.any(e < 0.0) or abs(float(e.sum()) - 1.0) > 1e-9:
        raise ValueError("expected must be a probability vector")
    n = stats.completed
    if n == 0:
        raise NoCompletedTrialsError("no completed trials to compare")
    obs = stats.vertex_counts / n
    z = np.empty(e.size)
    for i in range(e.size):
        denom = math.sqrt(e[i] * (1.0 - e[i]) / n)
        if denom == 0.0:
            diff = obs[i] - e[i]
            z[i] = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        else:
            z[i] = (obs[i] - e[i]) / denom
    chi_sq = 0.0
    for i in range(e.size):
        exp_count = n * e[i]
        if exp_count == 0.0:
            if stats.vertex_counts[i] > 0:
                chi_sq = math.inf
            continue
        chi_sq += (stats.vertex_counts[i] - exp_count) ** 2 / exp_count
    dof = stats.dimension - 1
    threshold = float(chi2.ppf(CHI2_PERCENTILE, dof))
    passed = bool(np.all(np.abs(z) < Z_LIMIT)) and chi_sq < threshold
    e_ro = e.copy()
    e_ro.setflags(write=False)
    obs.setflags(write=False)
    z.setflags(write=False)
    return BornComparison(
        expected=e_ro,
        observed=obs,
        z_scores=z,
        chi_square=float(chi_sq),
        dof=dof,
        chi_square_threshold=threshold,
        passed=passed,
    )


@dataclass(frozen=True)
class MfptComparison:
    analytic: float
    observed: float
    stderr: float
    allowance: float
    passed: bool


def passage_moments(stats: EnsembleStats) -> tuple[float, float]:
    """Mean completed-trial duration and its standard error.

    Raises NoCompletedTrialsError below two completed trials (the sample
    variance needs a second point).
    """
    n = stats.completed
    if n < 2:
        raise NoCompletedTrialsError("need at least two completed trials")
    mean = stats.time_sum / n
    var = (stats.time_sq_sum - n * mean * mean) / (n - 1)
    return mean, math.sqrt(max(var, 0.0) / n)


def compare_mfpt(
    stats: EnsembleStats, analytic_value: float, dt: float = 0.0
) -> MfptComparison:
    """Gate the observed mean passage time against an analytic value.

    The allowance is 3 standard errors plus 2*dt: within-step crossing is
    resolved only to step resolution, so a discretization slack of order dt
    rides on top of the sampling error. Pass dt=0 for exact-time processes.
    """
    mean, stderr = passage_moments(stats)
    allowance = 3.0 * stderr + 2.0 * dt
    passed = abs(mean - analytic_value) <= allowance
    return MfptComparison(
        analytic=float(analytic_value),
        observed=mean,
        stderr=stderr,
        allowance=allowance,
        passed=passed,
    )
