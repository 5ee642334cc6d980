"""Histogram similarity: two-image IoU and four-image set scores.

``iou`` compares two brightness distributions on their relative
frequencies.  ``bdiou_set`` scores a set of four images -- one mated pair
from each cohort -- as the better of the two ways to pair the cohort-A
images with the cohort-B images.  ``all_set_scores`` streams set scores
for every (cohort-A pair, cohort-B pair) combination without ever
materializing the full cross product.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import _kernels
from .datamodel import BrightnessDistribution, ImageRecord, MatedPair

__all__ = [
    "Assignment",
    "SetScore",
    "ScoreBlock",
    "SetScoreStream",
    "iou",
    "bdiou_set",
    "all_set_scores",
]


class Assignment(enum.Enum):
    """Which cross-cohort image pairing attained the set score."""

    STRAIGHT = "Straight"  # first with first, second with second
    CROSSED = "Crossed"


@dataclass(frozen=True)
class SetScore:
    cf_pair_id: str
    af_pair_id: str
    bdiou: float
    chosen_assignment: Assignment


def iou(bd1: BrightnessDistribution, bd2: BrightnessDistribution) -> float:
    """Intersection-over-union of two distributions' relative frequencies.

    Σ min(rf1, rf2) / Σ max(rf1, rf2): 1.0 for identical shapes, 0.0 for
    disjoint supports, symmetric, and invariant under scaling the counts.
    """
    return float(_kernels.iou_1d(bd1.relfreq, bd2.relfreq))


def bdiou_set(
    c1: BrightnessDistribution,
    c2: BrightnessDistribution,
    a1: BrightnessDistribution,
    a2: BrightnessDistribution,
) -> tuple[float, Assignment]:
    """Score a four-image set by its best cross-cohort pairing.

    Straight pairs (c1,a1)/(c2,a2); crossed pairs (c1,a2)/(c2,a1).  Each
    pairing is scored by the mean of its two IoUs; the larger wins, with
    exact ties going to straight.
    """
    straight = (iou(c1, a1) + iou(c2, a2)) / 2.0
    crossed = (iou(c1, a2) + iou(c2, a1)) / 2.0
    if crossed > straight:
        return crossed, Assignment.CROSSED
    return straight, Assignment.STRAIGHT


@dataclass(frozen=True)
class ScoreBlock:
    """Set scores for a contiguous run of cohort-A pairs against all
    cohort-B pairs, as dense arrays.

    ``bdiou[i, j]`` scores cf pair ``cf_pair_ids[i]`` against af pair
    ``af_pair_ids[j]``; ``crossed[i, j]`` is True where the crossed
    pairing strictly won; ``keep[i, j]`` marks scores at or above the
    stream's emission threshold.
    """

    cf_pair_ids: tuple[str, ...]
    af_pair_ids: tuple[str, ...]
    cf_offset: int
    bdiou: np.ndarray
    crossed: np.ndarray
    keep: np.ndarray


class SetScoreStream:
    """Lazily computed stream of :class:`SetScore` over a pair cross product.

    Iterating yields SetScore objects in deterministic order (cf-pair
    major, af-pair minor), skipping scores below ``min_bdiou``.  Bulk
    consumers (the greedy assigner, the scan writer) should use
    :meth:`blocks` instead, which exposes the same numbers as arrays
    without building millions of objects.  The stream is re-iterable;
    each pass recomputes.
    """

    def __init__(
        self,
        cf_pairs: Sequence[MatedPair],
        af_pairs: Sequence[MatedPair],
        images: Mapping[str, ImageRecord],
        min_bdiou: float = 0.0,
        block_size: int = 256,
    ):
        if block_size < 1:
            raise ValueError("block_size must be >= 1")
        self.cf_pairs = list(cf_pairs)
        self.af_pairs = list(af_pairs)
        self.min_bdiou = min(max(float(min_bdiou), 0.0), 1.0)
        self.block_size = block_size
        self._af_rf, self._af_x, self._af_y = _pair_arrays(self.af_pairs, images)
        self._images = images

    def blocks(self) -> Iterator[ScoreBlock]:
        af_ids = tuple(p.pair_id for p in self.af_pairs)
        if not self.af_pairs:
            return
        for start in range(0, len(self.cf_pairs), self.block_size):
            chunk = self.cf_pairs[start : start + self.block_size]
            cf_rf, cf_x, cf_y = _pair_arrays(chunk, self._images)
            m = _kernels.iou_matrix(cf_rf, self._af_rf)
            straight = (m[cf_x][:, self._af_x] + m[cf_y][:, self._af_y]) / 2.0
            crossed = (m[cf_x][:, self._af_y] + m[cf_y][:, self._af_x]) / 2.0
            win_crossed = crossed > straight
            bdiou = np.where(win_crossed, crossed, straight)
            yield ScoreBlock(
                cf_pair_ids=tuple(p.pair_id for p in chunk),
                af_pair_ids=af_ids,
                cf_offset=start,
                bdiou=bdiou,
                crossed=win_crossed,
                keep=bdiou >= self.min_bdiou,
            )

    def __iter__(self) -> Iterator[SetScore]:
        for blk in self.blocks():
            for i, cf_id in enumerate(blk.cf_pair_ids):
                keep_row = blk.keep[i]
                bd_row = blk.bdiou[i]
                cr_row = blk.crossed[i]
                for j in np.flatnonzero(keep_row):
                    yield SetScore(
                        cf_pair_id=cf_id,
                        af_pair_id=blk.af_pair_ids[j],
                        bdiou=float(bd_row[j]),
                        chosen_assignment=(
                            Assignment.CROSSED if cr_row[j] else Assignment.STRAIGHT
                        ),
                    )


def _pair_arrays(pairs: Sequence[MatedPair], images: Mapping[str, ImageRecord]):
    """Dedup the images referenced by ``pairs`` into a relfreq matrix plus
    per-pair row indices."""
    index: dict[str, int] = {}
    rows = []
    for p in pairs:
        for img_id in (p.img_x, p.img_y):
            if img_id not in index:
                index[img_id] = len(rows)
                rows.append(images[img_id].dist.relfreq)
    rf = np.vstack(rows) if rows else np.empty((0, 256), dtype=np.float64)
    x = np.array([index[p.img_x] for p in pairs], dtype=np.int64)
    y = np.array([index[p.img_y] for p in pairs], dtype=np.int64)
    return rf, x, y


def all_set_scores(
    cf_pairs: Sequence[MatedPair],
    af_pairs: Sequence[MatedPair],
    images: Mapping[str, ImageRecord],
    min_bdiou: float = 0.0,
    block_size: int = 256,
) -> SetScoreStream:
    """Stream set scores for every cf-pair x af-pair combination.

    ``min_bdiou`` (clamped to [0,1]) prunes emission; order is cf-major,
    af-minor regardless of internal parallelism.
    """
    return SetScoreStream(cf_pairs, af_pairs, images, min_bdiou, block_size)
