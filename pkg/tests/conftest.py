import numpy as np
import pytest

from lumibal import _kernels
from lumibal.datamodel import (
    BrightnessDistribution,
    Cohort,
    CohortDataset,
    ImageRecord,
    MatedPair,
)


def dist(counts) -> BrightnessDistribution:
    c = np.zeros(256, dtype=np.int64)
    a = np.asarray(counts, dtype=np.int64)
    c[: a.size] = a
    return BrightnessDistribution(c)


def impulse(bin_index: int, height: int = 1) -> BrightnessDistribution:
    c = np.zeros(256, dtype=np.int64)
    c[bin_index] = height
    return BrightnessDistribution(c)


def random_dist(rng, max_count: int = 50) -> BrightnessDistribution:
    # mix of dense and sparse supports so IoU sees varied overlap
    c = rng.integers(0, max_count, size=256)
    if rng.random() < 0.5:
        keep = rng.random(256) < rng.uniform(0.02, 0.3)
        c = np.where(keep, c, 0)
    if c.sum() == 0:
        c[int(rng.integers(0, 256))] = 1
    return BrightnessDistribution(c.astype(np.int64))


def make_image(image_id, subject_id, cohort, d, bv=None, modality=None):
    return ImageRecord(
        image_id=image_id,
        subject_id=subject_id,
        cohort=cohort,
        dist=d,
        bv=bv,
        modality=modality,
    )


def make_cohort(cohort: Cohort, images, pairs) -> CohortDataset:
    return CohortDataset(
        cohort=cohort,
        images={r.image_id: r for r in images},
        pairs={p.pair_id: p for p in pairs},
    )


def bvd_pair(pair_id: str, v: float) -> MatedPair:
    """Pair carrying only the annotation the matcher consumes."""
    return MatedPair(
        pair_id=pair_id, img_x="x", img_y="y", score=0.5, bvd=v
    )


@pytest.fixture(scope="session")
def warm_kernels():
    """Force jit compilation so timed sections measure steady state."""
    a = np.random.default_rng(0).random((4, 256))
    _kernels.iou_1d(a[0], a[1])
    _kernels.iou_matrix(a[:2], a[2:])
    _kernels.greedy_unique(
        np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64), 1, 1
    )
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
