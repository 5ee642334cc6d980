"""Seeded synthetic two-cohort dataset generator.

Images are Gaussian-mixture brightness histograms; subjects own a mixture
shape, and each of a subject's images re-renders that shape with a
per-image exposure offset.  A configurable slice of images is instead
rendered overexposed: a single bright component pushed against the top of
the range, which is what couples the one-peak modality label with a heavy
overexposure fraction.  Mated-pair scores follow a linear model

    score = base - bvd_penalty * BVD
                 - overexposure_penalty * (oef_x + oef_y) + noise

clamped to [-1, 1], so brightness disparity and overexposure both depress
genuine scores and the balancing strategies have a real signal to recover.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass

import numpy as np
import yaml

from .brightness import brightness_value, overexposure_fraction
from .datamodel import (
    BrightnessDistribution,
    Cohort,
    CohortDataset,
    ImageRecord,
    MatedPair,
)

__all__ = [
    "MixtureRecipe",
    "CohortRecipe",
    "ScoreModel",
    "SynthSpec",
    "gen_distribution",
    "gen_dataset",
    "load_synth_spec",
    "save_synth_spec",
]


@dataclass(frozen=True)
class MixtureRecipe:
    """A concrete Gaussian mixture: component means, sigmas, equal weights."""

    mus: tuple[float, ...]
    sigmas: tuple[float, ...]

    def __post_init__(self):
        if len(self.mus) != len(self.sigmas) or not self.mus:
            raise ValueError("mus and sigmas must be equal-length and non-empty")
        if any(s < 0 for s in self.sigmas):
            raise ValueError("negative sigma")


@dataclass(frozen=True)
class CohortRecipe:
    """How one cohort's subjects and images are drawn.

    ``p_components[k]`` is the probability a subject's mixture has k+1
    components; component means are sampled uniformly over ``mu_range``
    with at least ``min_separation`` between them.  ``drift_sigma`` is the
    std of the per-image exposure offset added to every component mean;
    ``p_overexposed`` is the chance an image renders overexposed instead.
    """

    n_subjects: int
    images_per_subject: int
    n_pixels: int
    p_components: tuple[float, ...]
    mu_range: tuple[float, float]
    sigma_range: tuple[float, float]
    drift_sigma: float
    p_overexposed: float = 0.0
    min_separation: float = 0.0
    overexposed_mu_range: tuple[float, float] = (246.0, 253.0)
    overexposed_sigma: float = 4.0

    def __post_init__(self):
        if self.n_subjects < 1 or self.images_per_subject < 1:
            raise ValueError("need at least one subject and one image per subject")
        if self.images_per_subject > 10:
            raise ValueError("images_per_subject > 10 not supported by pair ids")
        if self.n_pixels < 100:
            raise ValueError("n_pixels must be >= 100")
        p = np.asarray(self.p_components, dtype=np.float64)
        if p.size < 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("p_components must be non-negative and sum to 1")
        lo, hi = self.mu_range
        if not (0 <= lo <= hi <= 255):
            raise ValueError("mu_range must be ordered within 0..255")
        slo, shi = self.sigma_range
        if not (0 < slo <= shi):
            raise ValueError("sigma_range must be ordered and positive")
        if not (0 <= self.p_overexposed <= 1):
            raise ValueError("p_overexposed must be in [0, 1]")
        width = hi - lo
        kmax = p.size
        if self.min_separation * (kmax - 1) > width:
            raise ValueError("min_separation too large for mu_range")


@dataclass(frozen=True)
class ScoreModel:
    base: float = 0.85
    bvd_penalty: float = 0.0015
    overexposure_penalty: float = 0.25
    noise_sigma: float = 0.03

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("negative noise_sigma")


@dataclass(frozen=True)
class SynthSpec:
    cohort_a: CohortRecipe
    cohort_b: CohortRecipe
    score_model: ScoreModel
    seed: int


def gen_distribution(recipe: MixtureRecipe, n_pixels: int, seed) -> BrightnessDistribution:
    """Render a mixture into a histogram of ``n_pixels`` rounded samples.

    ``seed`` may be anything accepted by ``np.random.default_rng``
    (including a Generator, which is consumed in place).
    """
    rng = np.random.default_rng(seed)
    k = len(recipe.mus)
    mus = np.asarray(recipe.mus, dtype=np.float64)
    sigmas = np.asarray(recipe.sigmas, dtype=np.float64)
    comp = rng.integers(0, k, size=n_pixels)
    values = rng.normal(mus[comp], sigmas[comp])
    values = np.clip(np.rint(values), 0, 255).astype(np.int64)
    return BrightnessDistribution(np.bincount(values, minlength=256))


def _separated_means(rng, k: int, lo: float, hi: float, sep: float) -> np.ndarray:
    """k means uniform over [lo, hi], pairwise at least ``sep`` apart."""
    slack = (hi - lo) - sep * (k - 1)
    base = np.sort(rng.uniform(0.0, slack, size=k))
    return lo + base + sep * np.arange(k)


def _gen_cohort(cohort: Cohort, recipe: CohortRecipe, model: ScoreModel, seed: int):
    cohort_idx = 0 if cohort is Cohort.A else 1
    images: dict[str, ImageRecord] = {}
    pairs: dict[str, MatedPair] = {}
    truth: dict[str, dict] = {}
    n_comp_choices = np.arange(1, len(recipe.p_components) + 1)
    for s in range(recipe.n_subjects):
        rng = np.random.default_rng(np.random.SeedSequence([seed, cohort_idx, s]))
        subject_id = f"{cohort.value}{s:05d}"
        k = int(rng.choice(n_comp_choices, p=recipe.p_components))
        mus = _separated_means(rng, k, *recipe.mu_range, recipe.min_separation)
        sigmas = rng.uniform(*recipe.sigma_range, size=k)
        bvs = []
        oefs = []
        for i in range(recipe.images_per_subject):
            image_id = f"{subject_id}_{i}"
            overexposed = bool(rng.random() < recipe.p_overexposed)
            offset = float(rng.normal(0.0, recipe.drift_sigma))
            if overexposed:
                mix = MixtureRecipe(
                    mus=(float(rng.uniform(*recipe.overexposed_mu_range)),),
                    sigmas=(recipe.overexposed_sigma,),
                )
            else:
                mix = MixtureRecipe(
                    mus=tuple(np.clip(mus + offset, 0.0, 255.0)),
                    sigmas=tuple(sigmas),
                )
            dist = gen_distribution(mix, recipe.n_pixels, rng)
            images[image_id] = ImageRecord(
                image_id=image_id, subject_id=subject_id, cohort=cohort, dist=dist
            )
            truth[image_id] = {
                "components": [[float(m), float(sg)] for m, sg in zip(mix.mus, mix.sigmas)],
                "overexposed": overexposed,
                "offset": offset,
            }
            bvs.append(brightness_value(dist))
            oefs.append(overexposure_fraction(dist))
        for i, j in itertools.combinations(range(recipe.images_per_subject), 2):
            pair_id = f"{subject_id}-{i}{j}"
            bvd = abs(bvs[i] - bvs[j])
            raw = (
                model.base
                - model.bvd_penalty * bvd
                - model.overexposure_penalty * (oefs[i] + oefs[j])
                + rng.normal(0.0, model.noise_sigma)
            )
            pairs[pair_id] = MatedPair(
                pair_id=pair_id,
                img_x=f"{subject_id}_{i}",
                img_y=f"{subject_id}_{j}",
                score=float(np.clip(raw, -1.0, 1.0)),
            )
    return CohortDataset(cohort=cohort, images=images, pairs=pairs), truth


def gen_dataset(spec: SynthSpec) -> tuple[CohortDataset, CohortDataset, dict]:
    """Generate both cohorts plus a ground-truth sidecar.

    Every subject draws from its own PRNG substream derived from
    (seed, cohort index, subject index), so output is reproducible and
    insensitive to generation order.
    """
    ds_a, truth_a = _gen_cohort(Cohort.A, spec.cohort_a, spec.score_model, spec.seed)
    ds_b, truth_b = _gen_cohort(Cohort.B, spec.cohort_b, spec.score_model, spec.seed)
    sidecar = {
        "seed": spec.seed,
        "score_model": asdict(spec.score_model),
        "images": {**truth_a, **truth_b},
    }
    return ds_a, ds_b, sidecar


def _recipe_from_dict(d: dict) -> CohortRecipe:
    kw = dict(d)
    for key in ("p_components", "mu_range", "sigma_range", "overexposed_mu_range"):
        if key in kw:
            kw[key] = tuple(kw[key])
    return CohortRecipe(**kw)


def load_synth_spec(path) -> SynthSpec:
    """Read a generator spec from YAML."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    try:
        cohorts = doc["cohorts"]
        return SynthSpec(
            cohort_a=_recipe_from_dict(cohorts["A"]),
            cohort_b=_recipe_from_dict(cohorts["B"]),
            score_model=ScoreModel(**doc.get("score_model", {})),
            seed=int(doc["seed"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: invalid synth spec: {exc}") from exc


def save_synth_spec(path, spec: SynthSpec) -> None:
    doc = {
        "seed": spec.seed,
        "score_model": asdict(spec.score_model),
        "cohorts": {
            "A": _jsonish(asdict(spec.cohort_a)),
            "B": _jsonish(asdict(spec.cohort_b)),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def _jsonish(d: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def write_sidecar(path, sidecar: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
