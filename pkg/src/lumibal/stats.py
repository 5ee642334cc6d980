"""Score-distribution statistics and the report bookkeeping built on them.

Similarity scores of mated pairs are summarized per cohort by mean and
population standard deviation; the separation between the two cohorts'
distributions is the sensitivity index d' = |m1 - m2| / sqrt((s1^2 +
s2^2) / 2).  Balanced subsets are reported as percent shifts against the
full unbalanced baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .balancing import BalancedSubset, Strategy
from .datamodel import Cohort, CohortDataset
from .errors import DegenerateVarianceError, IntegrityError

__all__ = [
    "CohortScoreStats",
    "BaselineStats",
    "FactorSummary",
    "ReportRow",
    "score_stats",
    "dprime",
    "shift_pct",
    "implied_baseline",
    "compute_baseline",
    "evaluate_subset",
]


@dataclass(frozen=True)
class CohortScoreStats:
    n: int
    mean: float
    std: float  # population standard deviation (divisor n)


@dataclass(frozen=True)
class BaselineStats:
    """Full unbalanced per-cohort statistics and their separation."""

    cohort_a: CohortScoreStats
    cohort_b: CohortScoreStats
    dprime_u: float


@dataclass(frozen=True)
class FactorSummary:
    """Summary of the balancing factor over a subset's selections."""

    mean: float
    std: float
    min: float
    max: float

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "FactorSummary":
        v = np.asarray(values, dtype=np.float64)
        return cls(
            mean=float(v.mean()),
            std=float(v.std()),
            min=float(v.min()),
            max=float(v.max()),
        )


@dataclass(frozen=True)
class ReportRow:
    """One strategy/size result: balanced per-cohort means, d', and their
    percent shifts versus baseline, plus the factor summary where the
    strategy has a per-selection factor.  Multi-trial subsets report the
    arithmetic mean of per-trial statistics."""

    strategy: Strategy
    n_pairs: int
    mean_a: float
    shift_a_pct: float
    mean_b: float
    shift_b_pct: float
    dprime_b: float
    dprime_shift_pct: float
    factor: FactorSummary | None = None
    trials: int = 1
    label: str = ""


def score_stats(scores: Sequence[float]) -> CohortScoreStats:
    """Mean and population standard deviation of a score list."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty score list")
    return CohortScoreStats(n=int(s.size), mean=float(s.mean()), std=float(s.std()))


def dprime(a: CohortScoreStats, b: CohortScoreStats) -> float:
    """Sensitivity index between two score distributions."""
    if a.n < 2 or b.n < 2:
        raise ValueError(f"need n >= 2 per cohort, got {a.n} and {b.n}")
    pooled = (a.std**2 + b.std**2) / 2.0
    if pooled == 0.0:
        if a.mean == b.mean:
            return 0.0
        raise DegenerateVarianceError(
            f"both cohorts constant with unequal means ({a.mean} vs {b.mean})"
        )
    return abs(a.mean - b.mean) / math.sqrt(pooled)


def shift_pct(balanced: float, baseline: float) -> float:
    """Percent change of a balanced statistic against its baseline."""
    if baseline == 0.0:
        raise ValueError("zero baseline")
    return 100.0 * (balanced - baseline) / baseline


def implied_baseline(balanced: float, shift: float) -> float:
    """Invert :func:`shift_pct`: the baseline a (value, shift%) pair implies."""
    return balanced / (1.0 + shift / 100.0)


def compute_baseline(cf: CohortDataset, af: CohortDataset) -> BaselineStats:
    """Baseline statistics from the full, unfiltered cohorts."""
    a = score_stats(cf.pair_scores())
    b = score_stats(af.pair_scores())
    return BaselineStats(cohort_a=a, cohort_b=b, dprime_u=dprime(a, b))


def _subset_scores(ds: CohortDataset, ids) -> np.ndarray:
    out = np.empty(len(ids), dtype=np.float64)
    for k, pid in enumerate(ids):
        pair = ds.pairs.get(pid)
        if pair is None:
            raise IntegrityError(
                f"subset references unknown {ds.cohort.value}-cohort pair {pid!r}"
            )
        out[k] = pair.score
    return out


def evaluate_subset(
    subset: BalancedSubset | Sequence[BalancedSubset],
    datasets: Mapping[Cohort, CohortDataset],
    baseline: BaselineStats,
    label: str = "",
) -> ReportRow:
    """Report one balanced subset (or one multi-trial list of subsets).

    For a list, per-trial means and d' are computed independently and
    averaged arithmetically; shifts are then taken on the averages.
    """
    trials = [subset] if isinstance(subset, BalancedSubset) else list(subset)
    if not trials:
        raise ValueError("no subsets to evaluate")
    n = trials[0].n
    strategy = trials[0].strategy
    means_a, means_b, dprimes = [], [], []
    factor_parts = []
    for sub in trials:
        if sub.n != n or sub.strategy != strategy:
            raise ValueError("mixed subset shapes in one evaluation")
        sa = score_stats(_subset_scores(datasets[Cohort.A], sub.cf_pair_ids))
        sb = score_stats(_subset_scores(datasets[Cohort.B], sub.af_pair_ids))
        means_a.append(sa.mean)
        means_b.append(sb.mean)
        dprimes.append(dprime(sa, sb))
        if sub.factor_values is not None:
            factor_parts.extend(sub.factor_values)
    mean_a = float(np.mean(means_a))
    mean_b = float(np.mean(means_b))
    dp = float(np.mean(dprimes))
    return ReportRow(
        strategy=strategy,
        n_pairs=n,
        mean_a=mean_a,
        shift_a_pct=shift_pct(mean_a, baseline.cohort_a.mean),
        mean_b=mean_b,
        shift_b_pct=shift_pct(mean_b, baseline.cohort_b.mean),
        dprime_b=dp,
        dprime_shift_pct=shift_pct(dp, baseline.dprime_u),
        factor=FactorSummary.from_values(factor_parts) if factor_parts else None,
        trials=len(trials),
        label=label,
    )
