"""Peak-count modality labels for brightness distributions.

A distribution is labeled Uni, Bi, or Multi by counting peaks on a smoothed
copy of its histogram.  Smoothing is a centered moving average over
``2*sw + 1`` bins; the peak rule is relative to the curve maximum, so labels
are invariant under uniform scaling of the histogram.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import BrightnessDistribution, Modality, PairType
from .errors import DegenerateDistributionError

__all__ = [
    "ModalityConfig",
    "PeakSet",
    "smooth",
    "detect_peaks",
    "classify",
    "pair_type",
]

_N = 256


@dataclass(frozen=True)
class ModalityConfig:
    """Smoothing window half-width and relative peak threshold."""

    sw: int = 4
    rt: float = 0.5

    def __post_init__(self):
        if self.sw < 1:
            raise ValueError(f"sw must be >= 1, got {self.sw}")
        if not (0.0 < self.rt <= 1.0):
            raise ValueError(f"rt must be in (0, 1], got {self.rt}")


@dataclass(frozen=True)
class PeakSet:
    """Smoothed curve, detected peak bins (sorted), and the threshold used."""

    smoothed: np.ndarray
    peaks: tuple[int, ...]
    threshold_used: float


def smooth(dist: BrightnessDistribution, sw: int) -> np.ndarray:
    """Centered moving average of the histogram counts.

    out[i] averages counts[i-sw .. i+sw] clipped to the valid bin range; the
    divisor is the number of in-range bins, so edges are not zero-padded.
    """
    if sw < 1:
        raise ValueError(f"sw must be >= 1, got {sw}")
    c = dist.counts.astype(np.float64)
    csum = np.concatenate([[0.0], np.cumsum(c)])
    i = np.arange(_N)
    lo = np.maximum(i - sw, 0)
    hi = np.minimum(i + sw, _N - 1)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


def detect_peaks(smoothed: np.ndarray, rt: float) -> PeakSet:
    """Find peak bins on a smoothed curve.

    The curve is cut at ``rt * max(smoothed)``; each contiguous region above
    the cut contributes exactly one peak, placed at the region's highest bin
    (center of the plateau when the maximum is flat, left-center if the
    plateau length is even).  Counting regions rather than raw local maxima
    keeps bin-level noise riding on top of a single mode from splitting it,
    and merges flat tops; endpoint bins can carry peaks like any others.
    """
    s = np.asarray(smoothed, dtype=np.float64)
    if s.shape != (_N,):
        raise ValueError(f"expected 256 bins, got shape {s.shape}")
    mx = float(s.max())
    if mx <= 0.0:
        raise DegenerateDistributionError("all-zero smoothed curve")
    thr = rt * mx
    above = s >= thr
    peaks: list[int] = []
    i = 0
    while i < _N:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < _N and above[j + 1]:
            j += 1
        seg = s[i : j + 1]
        seg_max = seg.max()
        plateau = np.flatnonzero(seg == seg_max)
        # first contiguous run of the region maximum
        end = 0
        while end + 1 < plateau.size and plateau[end + 1] == plateau[end] + 1:
            end += 1
        peaks.append(i + int(plateau[0] + plateau[end]) // 2)
        i = j + 1
    return PeakSet(smoothed=s, peaks=tuple(peaks), threshold_used=thr)


def classify(dist: BrightnessDistribution, cfg: ModalityConfig = ModalityConfig()) -> Modality:
    """Label a distribution by its peak count: 1 Uni, 2 Bi, 3+ Multi."""
    ps = detect_peaks(smooth(dist, cfg.sw), cfg.rt)
    n = len(ps.peaks)
    if n == 1:
        return Modality.UNI
    if n == 2:
        return Modality.BI
    return Modality.MULTI


_PAIR_TYPE = {
    frozenset([Modality.UNI]): PairType.UU,
    frozenset([Modality.BI]): PairType.BB,
    frozenset([Modality.MULTI]): PairType.MM,
    frozenset([Modality.UNI, Modality.BI]): PairType.UB,
    frozenset([Modality.UNI, Modality.MULTI]): PairType.UM,
    frozenset([Modality.BI, Modality.MULTI]): PairType.BM,
}


def pair_type(m1: Modality, m2: Modality) -> PairType:
    """Unordered modality combination of a pair's two images."""
    return _PAIR_TYPE[frozenset([m1, m2])]
