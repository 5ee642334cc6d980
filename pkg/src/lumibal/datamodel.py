"""Core domain types and dataset ingestion.

A cohort dataset is a set of images -- each represented only by the 256-bin
grayscale histogram of its face-skin region -- plus the mated (same-subject)
image pairs and their ingested similarity scores.  Histograms, not pixel
arrays, are the canonical image representation: every metric downstream is
histogram-computable, and the files stay small.

File formats (both start with a schema tag line, see the repo README for the
full grammar):

* histogram records -- JSON object per line with fields ``image_id``,
  ``subject_id``, ``cohort``, ``counts`` (256 ints) and optional derived
  fields ``bv`` and ``modality``.
* pair scores -- CSV with header ``pair_id,image_x,image_y,score``.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

import numpy as np

from .errors import IngestError, IntegrityError

__all__ = [
    "HIST_SCHEMA_TAG",
    "PAIRS_SCHEMA_TAG",
    "Cohort",
    "Modality",
    "PairType",
    "BrightnessDistribution",
    "ImageRecord",
    "MatedPair",
    "CohortDataset",
    "DatasetSummary",
    "load_images",
    "load_pairs",
    "load_cohort",
    "save_images",
    "save_pairs",
    "dataset_summary",
]

HIST_SCHEMA_TAG = "#lumibal hist-records v1"
PAIRS_SCHEMA_TAG = "#lumibal pair-scores v1"

N_BINS = 256


class Cohort(enum.Enum):
    A = "A"
    B = "B"


class Modality(enum.Enum):
    UNI = "Uni"
    BI = "Bi"
    MULTI = "Multi"


class PairType(enum.Enum):
    UU = "UU"
    BB = "BB"
    MM = "MM"
    UB = "UB"
    UM = "UM"
    BM = "BM"


@dataclass(frozen=True, eq=False)
class BrightnessDistribution:
    """256-bin histogram of face-skin grayscale values.

    ``counts[v]`` is the number of skin pixels with grayscale value ``v``.
    The distribution must hold at least one pixel.
    """

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (N_BINS,):
            raise ValueError(f"expected 256 bins, got shape {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(c == np.floor(c)):
                raise ValueError("counts must be integers")
            c = c.astype(np.int64)
        else:
            c = c.astype(np.int64, copy=True)
        if np.any(c < 0):
            raise ValueError("negative count")
        if int(c.sum()) <= 0:
            raise ValueError("empty distribution")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        """Number of pixels tallied."""
        return int(self.counts.sum())

    @property
    def relfreq(self) -> np.ndarray:
        """Relative frequency per bin; sums to 1."""
        cached = getattr(self, "_relfreq", None)
        if cached is None:
            cached = self.counts / self.counts.sum()
            cached.setflags(write=False)
            object.__setattr__(self, "_relfreq", cached)
        return cached

    @classmethod
    def from_values(cls, values) -> "BrightnessDistribution":
        """Histogram a flat collection of integer pixel values in 0..255."""
        v = np.asarray(values).ravel()
        if v.size == 0:
            raise ValueError("empty distribution")
        if np.any((v < 0) | (v > 255)):
            raise ValueError("pixel value outside 0..255")
        return cls(np.bincount(v.astype(np.int64), minlength=N_BINS))

    def __eq__(self, other):
        if not isinstance(other, BrightnessDistribution):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    def __repr__(self):
        return f"BrightnessDistribution(total={self.total})"


@dataclass(frozen=True)
class ImageRecord:
    """One image: identity plus its brightness distribution.

    ``bv`` (median brightness) and ``modality`` are derived fields, unset
    until the corresponding annotation pass runs.
    """

    image_id: str
    subject_id: str
    cohort: Cohort
    dist: BrightnessDistribution
    bv: float | None = None
    modality: Modality | None = None


@dataclass(frozen=True)
class MatedPair:
    """Two same-subject images and their ingested similarity score.

    ``bvd`` (absolute brightness difference) and ``pair_type`` (unordered
    modality combination) are derived fields, unset until annotated.
    """

    pair_id: str
    img_x: str
    img_y: str
    score: float
    bvd: float | None = None
    pair_type: PairType | None = None


@dataclass(frozen=True)
class CohortDataset:
    """Immutable per-cohort image set plus mated pairs.

    ``images`` and ``pairs`` are id-keyed mappings preserving file order.
    """

    cohort: Cohort
    images: Mapping[str, ImageRecord]
    pairs: Mapping[str, MatedPair]

    def pair_scores(self) -> np.ndarray:
        return np.array([p.score for p in self.pairs.values()], dtype=np.float64)

    def with_images(self, images: Mapping[str, ImageRecord]) -> "CohortDataset":
        return replace(self, images=dict(images))

    def with_pairs(self, pairs: Mapping[str, MatedPair]) -> "CohortDataset":
        return replace(self, pairs=dict(pairs))


@dataclass(frozen=True)
class DatasetSummary:
    n_images: int
    n_subjects: int
    n_pairs: int


def _parse_schema_line(line: str, expected: str, path) -> None:
    if line.rstrip("\n") != expected:
        raise IngestError(
            f"missing or wrong schema tag (expected {expected!r})", path=path, line=1
        )


def _validate_counts(raw, path, line) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.int64)
    except (TypeError, ValueError, OverflowError):
        raise IngestError("counts must be a list of integers", path=path, line=line)
    if arr.ndim != 1 or arr.shape[0] != N_BINS:
        raise IngestError(
            f"expected 256 bins, got {arr.shape[0] if arr.ndim == 1 else 'nested'}",
            path=path,
            line=line,
        )
    if np.any(arr < 0):
        raise IngestError("negative count", path=path, line=line)
    if int(arr.sum()) <= 0:
        raise IngestError("empty distribution", path=path, line=line)
    return arr


def load_images(path, cohort: Cohort) -> dict[str, ImageRecord]:
    """Read a histogram-records file into validated :class:`ImageRecord` s.

    Derived fields present in the file (``bv``, ``modality``) are kept and
    cross-checked against the distribution where possible.  Duplicate image
    ids and malformed records are rejected with the offending line number.
    """
    from .brightness import brightness_value

    cohort = Cohort(cohort)
    records: dict[str, ImageRecord] = {}
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first:
            raise IngestError("empty file", path=path)
        _parse_schema_line(first, HIST_SCHEMA_TAG, path)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"invalid JSON ({exc.msg})", path=path, line=lineno)
            if not isinstance(obj, dict):
                raise IngestError("record must be a JSON object", path=path, line=lineno)
            try:
                image_id = str(obj["image_id"])
                subject_id = str(obj["subject_id"])
                rec_cohort = str(obj["cohort"])
                raw_counts = obj["counts"]
            except KeyError as exc:
                raise IngestError(f"missing field {exc.args[0]!r}", path=path, line=lineno)
            if rec_cohort != cohort.value:
                raise IngestError(
                    f"record cohort {rec_cohort!r} does not match requested "
                    f"cohort {cohort.value!r}",
                    path=path,
                    line=lineno,
                )
            if image_id in records:
                raise IngestError(
                    f"duplicate image id {image_id!r}", path=path, line=lineno
                )
            counts = _validate_counts(raw_counts, path, lineno)
            dist = BrightnessDistribution(counts)
            bv = obj.get("bv")
            if bv is not None:
                bv = float(bv)
                if bv != brightness_value(dist):
                    raise IngestError(
                        f"stored bv {bv} does not match distribution median",
                        path=path,
                        line=lineno,
                    )
            modality = obj.get("modality")
            if modality is not None:
                try:
                    modality = Modality(modality)
                except ValueError:
                    raise IngestError(
                        f"unknown modality {modality!r}", path=path, line=lineno
                    )
            records[image_id] = ImageRecord(
                image_id=image_id,
                subject_id=subject_id,
                cohort=cohort,
                dist=dist,
                bv=bv,
                modality=modality,
            )
    return records


def load_pairs(path, images: Mapping[str, ImageRecord]) -> dict[str, MatedPair]:
    """Read a pair-scores file, resolving image references against ``images``.

    Every pair must reference two distinct known images of the same subject,
    with a score in [-1, 1].
    """
    pairs: dict[str, MatedPair] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first:
            raise IngestError("empty file", path=path)
        _parse_schema_line(first, PAIRS_SCHEMA_TAG, path)
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("missing header", path=path, line=2)
        if header != ["pair_id", "image_x", "image_y", "score"]:
            raise IngestError(
                "header must be pair_id,image_x,image_y,score", path=path, line=2
            )
        for row in reader:
            lineno = reader.line_num + 1  # +1 for the schema tag line
            if not row:
                continue
            if len(row) != 4:
                raise IngestError(f"expected 4 fields, got {len(row)}", path=path, line=lineno)
            pair_id, ix, iy, raw_score = row
            if pair_id in pairs:
                raise IngestError(f"duplicate pair id {pair_id!r}", path=path, line=lineno)
            for ref in (ix, iy):
                if ref not in images:
                    raise IntegrityError(
                        f"{path}:{lineno}: pair {pair_id!r} references unknown "
                        f"image id {ref!r}"
                    )
            if ix == iy:
                raise IntegrityError(
                    f"{path}:{lineno}: pair {pair_id!r} references the same image twice"
                )
            if images[ix].subject_id != images[iy].subject_id:
                raise IntegrityError(
                    f"{path}:{lineno}: pair {pair_id!r} spans different subjects "
                    f"({images[ix].subject_id!r} vs {images[iy].subject_id!r})"
                )
            try:
                score = float(raw_score)
            except ValueError:
                raise IngestError(f"invalid score {raw_score!r}", path=path, line=lineno)
            if not (-1.0 <= score <= 1.0):
                raise IngestError(
                    f"score {score} out of range [-1, 1]", path=path, line=lineno
                )
            pairs[pair_id] = MatedPair(pair_id=pair_id, img_x=ix, img_y=iy, score=score)
    return pairs


def load_cohort(records_path, scores_path, cohort: Cohort) -> CohortDataset:
    """Load one cohort's histogram records and pair scores together."""
    images = load_images(records_path, cohort)
    pairs = load_pairs(scores_path, images)
    return CohortDataset(cohort=Cohort(cohort), images=images, pairs=pairs)


def save_images(path, images: Iterable[ImageRecord]) -> None:
    """Write histogram records; inverse of :func:`load_images`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(HIST_SCHEMA_TAG + "\n")
        for rec in images:
            obj = {
                "image_id": rec.image_id,
                "subject_id": rec.subject_id,
                "cohort": rec.cohort.value,
                "counts": rec.dist.counts.tolist(),
            }
            if rec.bv is not None:
                obj["bv"] = rec.bv
            if rec.modality is not None:
                obj["modality"] = rec.modality.value
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def save_pairs(path, pairs: Iterable[MatedPair]) -> None:
    """Write pair scores; inverse of :func:`load_pairs`."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(PAIRS_SCHEMA_TAG + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pair_id", "image_x", "image_y", "score"])
        for p in pairs:
            writer.writerow([p.pair_id, p.img_x, p.img_y, repr(p.score)])


def dataset_summary(ds: CohortDataset) -> DatasetSummary:
    """Counts of images, distinct subjects, and pairs."""
    subjects = {rec.subject_id for rec in ds.images.values()}
    return DatasetSummary(
        n_images=len(ds.images), n_subjects=len(subjects), n_pairs=len(ds.pairs)
    )
