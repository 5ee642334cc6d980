"""Command-line interface.

Commands mirror the pipeline stages: ``extract`` turns crop+mask image
files into histogram records, ``modality`` annotates records, ``baseline``
summarizes cohorts, ``balance``/``bdiou scan`` run the balancing
machinery, ``synth`` generates datasets, and ``run`` executes a full
configured experiment.

Errors print as a single machine-parsable line ``error[<code>]: <message>``
on stderr with exit status 1.  The LUMIBAL_THREADS environment variable
overrides any ``--threads`` flag.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from . import balancing, datamodel, experiment, synthgen
from .brightness import MaskedCrop, histogram_from_masked, luma_image
from .datamodel import Cohort, CohortDataset, load_images, load_pairs, save_images
from .errors import LumibalError
from .distsim import all_set_scores
from .modality import ModalityConfig
from .stats import compute_baseline, dprime, score_stats

THREADS_ENV = "LUMIBAL_THREADS"


def _fail(code: str, message) -> None:
    text = " ".join(str(message).split())
    click.echo(f"error[{code}]: {text}", err=True)
    sys.exit(1)


def wrap_errors(fn):
    @functools.wraps(fn)
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LumibalError as exc:
            _fail(exc.code, exc)
        except OSError as exc:
            _fail("io", exc)
        except (ValueError, yaml.YAMLError) as exc:
            _fail("config", exc)

    return inner


def resolve_threads(flag: int | None) -> int | None:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            _fail("config", f"{THREADS_ENV}={env!r} is not an integer")
    return flag


threads_option = click.option(
    "--threads",
    type=int,
    default=None,
    help=f"Worker count for compiled kernels ({THREADS_ENV} overrides; results never depend on it).",
)


@click.group()
def main():
    """Brightness-balanced cohort comparison toolkit."""


# ---------------------------------------------------------------- extract


def _load_gray(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im)
        return luma_image(np.asarray(im.convert("RGB")))


def _load_mask(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("L")) != 0


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--cohort", type=click.Choice(["A", "B"]), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@wrap_errors
def extract(directory: Path, cohort: str, out: Path):
    """Histogram the masked crops in DIRECTORY into a records file.

    Expects file pairs <image_id>.crop.<ext> and <image_id>.mask.<ext>
    (mask single-channel, nonzero = face skin).  An image id of the form
    <subject>__<rest> assigns the subject id; otherwise the image is its
    own subject.  Images with an empty mask are skipped with a warning;
    unreadable or mismatched files are per-file errors and make the final
    exit status nonzero without stopping the run.
    """
    crops = sorted(p for p in directory.iterdir() if ".crop." in p.name)
    if not crops:
        _fail("ingest", f"{directory}: no *.crop.* files found")
    records = []
    n_errors = 0
    for crop_path in crops:
        image_id = crop_path.name.split(".crop.")[0]
        masks = sorted(directory.glob(f"{image_id}.mask.*"))
        try:
            if not masks:
                raise ValueError("no matching mask file")
            gray = _load_gray(crop_path)
            mask = _load_mask(masks[0])
            if mask.shape != gray.shape:
                raise ValueError(
                    f"mask dimensions {mask.shape} do not match crop {gray.shape}"
                )
            if not mask.any():
                click.echo(f"warning: {crop_path}: empty mask, skipped", err=True)
                continue
            dist = histogram_from_masked(MaskedCrop(gray=gray, mask=mask))
        except Exception as exc:  # per-file: report and continue
            click.echo(f"error[extract]: {crop_path}: {exc}", err=True)
            n_errors += 1
            continue
        subject_id = image_id.split("__")[0]
        records.append(
            datamodel.ImageRecord(
                image_id=image_id,
                subject_id=subject_id,
                cohort=Cohort(cohort),
                dist=dist,
            )
        )
    _save_images_atomic(out, records)
    click.echo(f"wrote {len(records)} records to {out}")
    if n_errors:
        sys.exit(1)


def _save_images_atomic(path: Path, records) -> None:
    tmp = path.with_name(path.name + ".tmp")
    save_images(tmp, records)
    os.replace(tmp, path)


# ---------------------------------------------------------------- modality


def _sniff_cohort(path) -> Cohort | None:
    with open(path, "r", encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            if line.strip():
                try:
                    return Cohort(json.loads(line).get("cohort"))
                except (json.JSONDecodeError, ValueError):
                    return None
    return None


@main.command("modality")
@click.argument("records_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Output path (default: annotate in place).")
@click.option("--sw", type=int, default=4, show_default=True)
@click.option("--rt", type=float, default=0.5, show_default=True)
@wrap_errors
def modality_cmd(records_file: Path, out: Path | None, sw: int, rt: float):
    """Annotate a records file with brightness and modality labels."""
    cfg = ModalityConfig(sw=sw, rt=rt)
    cohort = _sniff_cohort(records_file) or Cohort.A
    images = load_images(records_file, cohort)
    ds = CohortDataset(cohort=cohort, images=images, pairs={})
    annotated = experiment.annotate_images(ds, cfg)
    _save_images_atomic(out or records_file, annotated.images.values())
    counts: dict[str, int] = {}
    for rec in annotated.images.values():
        counts[rec.modality.value] = counts.get(rec.modality.value, 0) + 1
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    click.echo(f"annotated {len(images)} records ({summary or 'empty'})")


# ---------------------------------------------------------------- baseline


def _load_side(images_path, pairs_path):
    cohort = _sniff_cohort(images_path) or Cohort.A
    images = load_images(images_path, cohort)
    pairs = load_pairs(pairs_path, images) if pairs_path else {}
    return CohortDataset(cohort=cohort, images=images, pairs=pairs)


@main.command()
@click.option("--images-a", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--pairs-a", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--images-b", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--pairs-b", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@wrap_errors
def baseline(images_a, pairs_a, images_b, pairs_b, as_json):
    """Validate datasets and print per-cohort summaries and baseline stats.

    With one cohort given, validates and summarizes it.  With both
    cohorts' images and pairs, also prints the mean/std of the genuine
    scores and the d' separation.
    """
    sides = {"a": _load_side(images_a, pairs_a)}
    if images_b:
        sides["b"] = _load_side(images_b, pairs_b)
    doc = {}
    for key, ds in sides.items():
        s = datamodel.dataset_summary(ds)
        entry = {"images": s.n_images, "subjects": s.n_subjects, "pairs": s.n_pairs}
        if ds.pairs:
            st = score_stats(ds.pair_scores())
            entry["scores"] = {"n": st.n, "mean": st.mean, "std": st.std}
        doc[f"cohort_{key}"] = entry
    if len(sides) == 2 and sides["a"].pairs and sides["b"].pairs:
        doc["dprime"] = dprime(
            score_stats(sides["a"].pair_scores()), score_stats(sides["b"].pair_scores())
        )
    if as_json:
        click.echo(json.dumps(doc, indent=1, sort_keys=True))
        return
    for key in ("cohort_a", "cohort_b"):
        if key not in doc:
            continue
        e = doc[key]
        click.echo(
            f"{key}: {e['images']} images, {e['subjects']} subjects, {e['pairs']} pairs"
        )
        if "scores" in e:
            sc = e["scores"]
            click.echo(f"{key} scores: mean={sc['mean']:.4f} std={sc['std']:.4f}")
    if "dprime" in doc:
        click.echo(f"dprime: {doc['dprime']:.4f}")


# ---------------------------------------------------------------- balance


def _load_annotated(cfg: experiment.ExperimentConfig):
    ds_a = datamodel.load_cohort(cfg.images_a, cfg.pairs_a, Cohort.A)
    ds_b = datamodel.load_cohort(cfg.images_b, cfg.pairs_b, Cohort.B)
    ds_a = experiment.annotate_pairs(experiment.annotate_images(ds_a, cfg.modality))
    ds_b = experiment.annotate_pairs(experiment.annotate_images(ds_b, cfg.modality))
    return ds_a, ds_b


def _subset_obj(sub: balancing.BalancedSubset) -> dict:
    return {
        "strategy": sub.strategy.value,
        "n": sub.n,
        "cf_pair_ids": list(sub.cf_pair_ids),
        "af_pair_ids": list(sub.af_pair_ids),
        "provenance": sub.provenance,
        "factor_values": None if sub.factor_values is None else list(sub.factor_values),
    }


def _write_json_atomic(path: Path, obj) -> None:
    experiment.write_atomic(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


config_option = click.option(
    "--config", "config_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Experiment config supplying the dataset paths.",
)
out_option = click.option(
    "--out", type=click.Path(dir_okay=False, path_type=Path), required=True
)


@main.group()
def balance():
    """Produce a balanced subset with one of the three strategies."""


@balance.command("bvd")
@config_option
@out_option
@click.option("--top", "top_n", type=int, required=True, help="Pairs per cohort to keep.")
@wrap_errors
def balance_bvd(config_path: Path, out: Path, top_n: int):
    """Exact brightness-difference matching, keep the top-N lowest."""
    cfg = experiment.load_experiment_config(config_path)
    ds_a, ds_b = _load_annotated(cfg)
    matched = balancing.bvd_match(list(ds_a.pairs.values()), list(ds_b.pairs.values()))
    subset = balancing.take_top(matched, top_n)
    _write_json_atomic(out, _subset_obj(subset))
    click.echo(f"matched {len(matched)} pairs, wrote top {top_n} to {out}")


@balance.command("bdm")
@config_option
@out_option
@click.option("--grouping", required=True,
              help="Comma list of allowed pair types, e.g. bb,mm,bm.")
@click.option("--n", "n", type=int, required=True, help="Pairs per cohort per trial.")
@click.option("--trials", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@wrap_errors
def balance_bdm(config_path: Path, out: Path, grouping: str, n: int, trials: int, seed: int):
    """Filter by modality pair types, then shuffled per-trial sampling."""
    cfg = experiment.load_experiment_config(config_path)
    g = balancing.BdmGrouping.from_string(grouping)
    ds_a, ds_b = _load_annotated(cfg)
    subsets = balancing.bdm_sample(
        balancing.bdm_filter(list(ds_a.pairs.values()), g),
        balancing.bdm_filter(list(ds_b.pairs.values()), g),
        n, trials=trials, seed=seed, grouping=g,
    )
    _write_json_atomic(
        out,
        {"strategy": balancing.Strategy.BDM_SAMPLE.value,
         "n": n, "grouping": str(g), "trials": [_subset_obj(s) for s in subsets]},
    )
    click.echo(f"wrote {len(subsets)} trial subsets of {n} pairs to {out}")


@balance.command("bdiou")
@config_option
@out_option
@click.option("--top", "top_n", type=int, required=True, help="Sets to keep.")
@click.option("--min", "min_bdiou", type=float, default=0.0, show_default=True,
              help="Prune sets scoring below this.")
@threads_option
@wrap_errors
def balance_bdiou(config_path: Path, out: Path, top_n: int, min_bdiou: float, threads):
    """Greedy unique set assignment by descending set score, keep top-N."""
    cfg = experiment.load_experiment_config(config_path)
    experiment.set_thread_count(resolve_threads(threads))
    ds_a, ds_b = _load_annotated(cfg)
    images = {**ds_a.images, **ds_b.images}
    stream = all_set_scores(
        experiment.non_uni_pairs(ds_a), experiment.non_uni_pairs(ds_b), images, min_bdiou
    )
    assigned = balancing.bdiou_assign(stream)
    subset = balancing.bdiou_top(assigned, top_n)
    _write_json_atomic(out, _subset_obj(subset))
    click.echo(f"assigned {len(assigned)} unique sets, wrote top {top_n} to {out}")


# ---------------------------------------------------------------- bdiou scan


@main.group()
def bdiou():
    """Set-score scanning utilities."""


@bdiou.command("scan")
@config_option
@out_option
@click.option("--min", "min_bdiou", type=float, default=0.0, show_default=True)
@threads_option
@wrap_errors
def bdiou_scan(config_path: Path, out: Path, min_bdiou: float, threads):
    """Write all set scores at or above --min to a CSV file."""
    cfg = experiment.load_experiment_config(config_path)
    experiment.set_thread_count(resolve_threads(threads))
    ds_a, ds_b = _load_annotated(cfg)
    images = {**ds_a.images, **ds_b.images}
    stream = all_set_scores(
        experiment.non_uni_pairs(ds_a), experiment.non_uni_pairs(ds_b), images, min_bdiou
    )
    n = 0
    tmp = out.with_name(out.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("cf_pair_id,af_pair_id,bdiou,assignment\n")
        for blk in stream.blocks():
            for i, cf_id in enumerate(blk.cf_pair_ids):
                for j in np.flatnonzero(blk.keep[i]):
                    name = "Crossed" if blk.crossed[i, j] else "Straight"
                    fh.write(f"{cf_id},{blk.af_pair_ids[j]},{blk.bdiou[i, j]:.6f},{name}\n")
                    n += 1
    os.replace(tmp, out)
    click.echo(f"wrote {n} set scores to {out}")


# ---------------------------------------------------------------- report


@main.command()
@click.argument("report_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--plot-data", is_flag=True,
              help="Emit (factor mean, dprime shift) series instead of the table.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write here instead of stdout.")
@wrap_errors
def report(report_json: Path, plot_data: bool, out: Path | None):
    """Render a stored report: the result table, or plottable series."""
    with open(report_json, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if plot_data:
        lines = ["strategy,label,n,factor_mean,dprime_shift_pct"]
        for r in doc["rows"]:
            if r.get("factor"):
                lines.append(
                    f"{r['strategy']},{r['label']},{r['n_pairs']},"
                    f"{r['factor']['mean']:.6f},{r['dprime_shift_pct']:.4f}"
                )
        text = "\n".join(lines) + "\n"
    else:
        text = _csv_from_report_doc(doc)
    if out is None:
        click.echo(text, nl=False)
    else:
        experiment.write_atomic(out, text)


def _csv_from_report_doc(doc: dict) -> str:
    from .stats import BaselineStats, CohortScoreStats, FactorSummary, ReportRow

    b = doc["baseline"]
    baseline_stats = BaselineStats(
        cohort_a=CohortScoreStats(**b["cohort_a"]),
        cohort_b=CohortScoreStats(**b["cohort_b"]),
        dprime_u=b["dprime_u"],
    )
    rows = [
        ReportRow(
            strategy=balancing.Strategy(r["strategy"]),
            n_pairs=r["n_pairs"],
            mean_a=r["mean_a"],
            shift_a_pct=r["shift_a_pct"],
            mean_b=r["mean_b"],
            shift_b_pct=r["shift_b_pct"],
            dprime_b=r["dprime_b"],
            dprime_shift_pct=r["dprime_shift_pct"],
            factor=FactorSummary(**r["factor"]) if r.get("factor") else None,
            trials=r["trials"],
            label=r["label"],
        )
        for r in doc["rows"]
    ]
    return experiment.render_report_csv(baseline_stats, rows)


# ---------------------------------------------------------------- synth


@main.command()
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@wrap_errors
def synth(spec_path: Path, out_dir: Path):
    """Generate a synthetic two-cohort dataset from a YAML spec."""
    spec = synthgen.load_synth_spec(spec_path)
    ds_a, ds_b, sidecar = synthgen.gen_dataset(spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    for ds, tag in ((ds_a, "A"), (ds_b, "B")):
        _save_images_atomic(out_dir / f"images_{tag}.jsonl", ds.images.values())
        tmp = out_dir / f"pairs_{tag}.csv.tmp"
        datamodel.save_pairs(tmp, ds.pairs.values())
        os.replace(tmp, out_dir / f"pairs_{tag}.csv")
        s = datamodel.dataset_summary(ds)
        click.echo(
            f"cohort {tag}: {s.n_images} images, {s.n_subjects} subjects, {s.n_pairs} pairs"
        )
    synthgen.write_sidecar(out_dir / "truth_sidecar.json", sidecar)


# ---------------------------------------------------------------- run


@main.command()
@config_option
@threads_option
@wrap_errors
def run(config_path: Path, threads):
    """Run the full configured experiment and write report files."""
    cfg = experiment.load_experiment_config(config_path)
    baseline_stats, rows, paths = experiment.run_experiment(
        cfg, threads=resolve_threads(threads)
    )
    click.echo(
        f"baseline: mean_a={baseline_stats.cohort_a.mean:.4f} "
        f"mean_b={baseline_stats.cohort_b.mean:.4f} dprime={baseline_stats.dprime_u:.4f}"
    )
    for r in rows:
        tag = f"{r.strategy.value}" + (f"[{r.label}]" if r.label else "")
        click.echo(
            f"{tag} n={r.n_pairs}: dprime={r.dprime_b:.4f} ({r.dprime_shift_pct:+.2f}%)"
        )
    click.echo(f"report: {paths['csv']}")


if __name__ == "__main__":
    main()
