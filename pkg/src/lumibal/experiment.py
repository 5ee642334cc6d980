"""End-to-end experiment orchestration.

Ties the pipeline together: load both cohorts, annotate brightness and
modality, compute the unbalanced baseline, run whichever balancing
strategies the config enables, and write the report files.  Reports are
written atomically (temp file + rename) and are byte-identical across
reruns and across worker counts.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import numba
import yaml

from .balancing import (
    BdmGrouping,
    NON_UNI,
    bdiou_assign,
    bdiou_top,
    bdm_filter,
    bdm_sample,
    bvd_match,
    take_top,
)
from .datamodel import Cohort, CohortDataset, load_cohort
from .distsim import all_set_scores
from .modality import ModalityConfig, classify, pair_type
from .brightness import brightness_value
from .stats import BaselineStats, ReportRow, compute_baseline, evaluate_subset

__all__ = [
    "BvdPlan",
    "BdmPlan",
    "BdiouPlan",
    "ExperimentConfig",
    "load_experiment_config",
    "set_thread_count",
    "annotate_images",
    "annotate_pairs",
    "non_uni_pairs",
    "run_experiment",
    "render_report_csv",
    "render_report_json",
    "write_atomic",
]


@dataclass(frozen=True)
class BvdPlan:
    top_n: tuple[int, ...]


@dataclass(frozen=True)
class BdmPlan:
    groupings: tuple[BdmGrouping, ...]
    n: int
    trials: int = 10
    seed: int = 0


@dataclass(frozen=True)
class BdiouPlan:
    top_n: tuple[int, ...]
    min_bdiou: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    images_a: Path
    pairs_a: Path
    images_b: Path
    pairs_b: Path
    output_dir: Path
    modality: ModalityConfig = ModalityConfig()
    bvd: BvdPlan | None = None
    bdm: BdmPlan | None = None
    bdiou: BdiouPlan | None = None


def _positive_list(values, what: str) -> tuple[int, ...]:
    out = tuple(int(v) for v in values)
    if not out or any(v < 1 for v in out):
        raise ValueError(f"{what} must be a non-empty list of positive sizes")
    return out


def load_experiment_config(path) -> ExperimentConfig:
    """Read an experiment config from YAML; paths resolve relative to it."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    try:
        ds = doc["dataset"]
        a, b = ds["cohort_a"], ds["cohort_b"]
        kw: dict = dict(
            images_a=resolve(a["images"]),
            pairs_a=resolve(a["pairs"]),
            images_b=resolve(b["images"]),
            pairs_b=resolve(b["pairs"]),
            output_dir=resolve(doc["output_dir"]),
        )
        if "modality" in doc:
            kw["modality"] = ModalityConfig(**doc["modality"])
        strategies = doc.get("strategies", {}) or {}
        if "bvd" in strategies:
            kw["bvd"] = BvdPlan(top_n=_positive_list(strategies["bvd"]["top_n"], "bvd top_n"))
        if "bdm" in strategies:
            s = strategies["bdm"]
            kw["bdm"] = BdmPlan(
                groupings=tuple(BdmGrouping.from_string(g) for g in s["groupings"]),
                n=int(s["n"]),
                trials=int(s.get("trials", 10)),
                seed=int(s.get("seed", 0)),
            )
        if "bdiou" in strategies:
            s = strategies["bdiou"]
            kw["bdiou"] = BdiouPlan(
                top_n=_positive_list(s["top_n"], "bdiou top_n"),
                min_bdiou=float(s.get("min_bdiou", 0.0)),
            )
        return ExperimentConfig(**kw)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: invalid experiment config: {exc}") from exc


def set_thread_count(threads: int | None) -> None:
    """Cap the compiled-kernel worker count; None keeps the default.

    Results never depend on this -- it only changes wall time.
    """
    if threads is None:
        return
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def annotate_images(ds: CohortDataset, cfg: ModalityConfig) -> CohortDataset:
    """Fill bv and modality on every image record."""
    new = {}
    for rec in ds.images.values():
        new[rec.image_id] = replace(
            rec, bv=brightness_value(rec.dist), modality=classify(rec.dist, cfg)
        )
    return ds.with_images(new)


def annotate_pairs(ds: CohortDataset) -> CohortDataset:
    """Fill bvd and pair_type on every pair; images must be annotated."""
    new = {}
    for p in ds.pairs.values():
        x = ds.images[p.img_x]
        y = ds.images[p.img_y]
        new[p.pair_id] = replace(
            p, bvd=abs(x.bv - y.bv), pair_type=pair_type(x.modality, y.modality)
        )
    return ds.with_pairs(new)


def non_uni_pairs(ds: CohortDataset) -> list:
    return [p for p in ds.pairs.values() if p.pair_type in NON_UNI.allowed_types]


def run_experiment(
    cfg: ExperimentConfig, threads: int | None = None
) -> tuple[BaselineStats, list[ReportRow], dict[str, Path]]:
    """Execute the configured experiments and write report files.

    Returns the baseline, the report rows in emission order, and the paths
    of the written outputs.
    """
    set_thread_count(threads)
    ds_a = load_cohort(cfg.images_a, cfg.pairs_a, Cohort.A)
    ds_b = load_cohort(cfg.images_b, cfg.pairs_b, Cohort.B)
    ds_a = annotate_pairs(annotate_images(ds_a, cfg.modality))
    ds_b = annotate_pairs(annotate_images(ds_b, cfg.modality))
    datasets = {Cohort.A: ds_a, Cohort.B: ds_b}
    baseline = compute_baseline(ds_a, ds_b)
    rows: list[ReportRow] = []

    if cfg.bvd is not None:
        matched = bvd_match(list(ds_a.pairs.values()), list(ds_b.pairs.values()))
        for n in cfg.bvd.top_n:
            rows.append(evaluate_subset(take_top(matched, n), datasets, baseline))

    if cfg.bdm is not None:
        for grouping in cfg.bdm.groupings:
            trials = bdm_sample(
                bdm_filter(list(ds_a.pairs.values()), grouping),
                bdm_filter(list(ds_b.pairs.values()), grouping),
                cfg.bdm.n,
                trials=cfg.bdm.trials,
                seed=cfg.bdm.seed,
                grouping=grouping,
            )
            rows.append(evaluate_subset(trials, datasets, baseline, label=str(grouping)))

    if cfg.bdiou is not None:
        images = {**ds_a.images, **ds_b.images}
        stream = all_set_scores(
            non_uni_pairs(ds_a), non_uni_pairs(ds_b), images, min_bdiou=cfg.bdiou.min_bdiou
        )
        assigned = bdiou_assign(stream)
        for n in cfg.bdiou.top_n:
            rows.append(evaluate_subset(bdiou_top(assigned, n), datasets, baseline))

    os.makedirs(cfg.output_dir, exist_ok=True)
    out_csv = Path(cfg.output_dir) / "report.csv"
    out_json = Path(cfg.output_dir) / "report.json"
    write_atomic(out_csv, render_report_csv(baseline, rows))
    write_atomic(out_json, render_report_json(baseline, rows))
    return baseline, rows, {"csv": out_csv, "json": out_json}


def write_atomic(path, text: str) -> None:
    """Write via temp file + rename so interrupted runs leave no partials."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_CSV_HEADER = (
    "strategy,label,n,trials,cohort,mean,shift_pct,"
    "dprime,dprime_shift_pct,factor_mean,factor_std,factor_min,factor_max"
)


def _csv_rows_for(strategy, label, n, trials, mean, shift, dp, dp_shift, factor, cohort):
    f = (
        [f"{factor.mean:.3f}", f"{factor.std:.3f}", f"{factor.min:.3f}", f"{factor.max:.3f}"]
        if factor is not None
        else ["", "", "", ""]
    )
    cells = [
        strategy,
        label,
        str(n),
        str(trials),
        cohort,
        f"{mean:.4f}",
        f"{shift:+.2f}",
        f"{dp:.4f}",
        f"{dp_shift:+.2f}",
    ] + f
    return ",".join(cells)


def render_report_csv(baseline: BaselineStats, rows: list[ReportRow]) -> str:
    lines = [_CSV_HEADER]
    for cohort, stats in (("A", baseline.cohort_a), ("B", baseline.cohort_b)):
        lines.append(
            _csv_rows_for(
                "baseline", "", stats.n, 1, stats.mean, 0.0,
                baseline.dprime_u, 0.0, None, cohort,
            )
        )
    for r in rows:
        for cohort, mean, shift in (
            ("A", r.mean_a, r.shift_a_pct),
            ("B", r.mean_b, r.shift_b_pct),
        ):
            lines.append(
                _csv_rows_for(
                    r.strategy.value, r.label, r.n_pairs, r.trials, mean, shift,
                    r.dprime_b, r.dprime_shift_pct, r.factor, cohort,
                )
            )
    return "\n".join(lines) + "\n"


def render_report_json(baseline: BaselineStats, rows: list[ReportRow]) -> str:
    def stats_obj(s):
        return {"n": s.n, "mean": s.mean, "std": s.std}

    doc = {
        "baseline": {
            "cohort_a": stats_obj(baseline.cohort_a),
            "cohort_b": stats_obj(baseline.cohort_b),
            "dprime_u": baseline.dprime_u,
        },
        "rows": [
            {
                "strategy": r.strategy.value,
                "label": r.label,
                "n_pairs": r.n_pairs,
                "trials": r.trials,
                "mean_a": r.mean_a,
                "shift_a_pct": r.shift_a_pct,
                "mean_b": r.mean_b,
                "shift_b_pct": r.shift_b_pct,
                "dprime_b": r.dprime_b,
                "dprime_shift_pct": r.dprime_shift_pct,
                "factor": (
                    None
                    if r.factor is None
                    else {
                        "mean": r.factor.mean,
                        "std": r.factor.std,
                        "min": r.factor.min,
                        "max": r.factor.max,
                    }
                ),
            }
            for r in rows
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
