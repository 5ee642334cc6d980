import json
from pathlib import Path

import numpy as np
import pytest
import yaml
from click.testing import CliRunner
from PIL import Image

from lumibal import cli
from lumibal.balancing import Strategy
from lumibal.brightness import brightness_value
from lumibal.datamodel import Cohort, load_cohort, load_images
from lumibal.experiment import (
    annotate_images,
    annotate_pairs,
    load_experiment_config,
    run_experiment,
    set_thread_count,
)
from lumibal.modality import ModalityConfig
from lumibal.synthgen import (
    CohortRecipe,
    ScoreModel,
    SynthSpec,
    gen_dataset,
    save_synth_spec,
)
from lumibal.datamodel import save_images, save_pairs


def fixture_spec():
    def recipe(drift, oe):
        return CohortRecipe(
            n_subjects=40,
            images_per_subject=3,
            n_pixels=400,
            p_components=(0.3, 0.4, 0.3),
            mu_range=(40.0, 215.0),
            sigma_range=(5.0, 12.0),
            drift_sigma=drift,
            p_overexposed=oe,
            min_separation=60.0,
        )

    return SynthSpec(
        cohort_a=recipe(12.0, 0.15),
        cohort_b=recipe(5.0, 0.03),
        score_model=ScoreModel(bvd_penalty=0.0025),
        seed=301,
    )


CONFIG_YAML = """\
dataset:
  cohort_a:
    images: images_A.jsonl
    pairs: pairs_A.csv
  cohort_b:
    images: images_B.jsonl
    pairs: pairs_B.csv
modality:
  sw: 4
  rt: 0.5
strategies:
  bvd:
    top_n: [20, 10]
  bdm:
    groupings: ["bb,mm,bm", "mm,bm"]
    n: 15
    trials: 3
    seed: 7
  bdiou:
    top_n: [10]
    min_bdiou: 0.0
output_dir: out
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("experiment")
    ds_a, ds_b, _ = gen_dataset(fixture_spec())
    for ds, tag in ((ds_a, "A"), (ds_b, "B")):
        save_images(d / f"images_{tag}.jsonl", ds.images.values())
        save_pairs(d / f"pairs_{tag}.csv", ds.pairs.values())
    (d / "experiment.yaml").write_text(CONFIG_YAML, encoding="utf-8")
    return d


@pytest.fixture
def runner(monkeypatch):
    monkeypatch.delenv(cli.THREADS_ENV, raising=False)
    return CliRunner()


class TestExperimentConfig:
    def test_relative_paths_resolve_against_config(self, workdir):
        cfg = load_experiment_config(workdir / "experiment.yaml")
        assert cfg.images_a == workdir / "images_A.jsonl"
        assert cfg.output_dir == workdir / "out"
        assert cfg.modality == ModalityConfig(sw=4, rt=0.5)
        assert cfg.bvd.top_n == (20, 10)
        assert len(cfg.bdm.groupings) == 2
        assert cfg.bdm.n == 15 and cfg.bdm.trials == 3 and cfg.bdm.seed == 7
        assert cfg.bdiou.top_n == (10,)

    def test_invalid_config_names_path(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("output_dir: out\n")
        with pytest.raises(ValueError, match="bad.yaml.*invalid experiment config"):
            load_experiment_config(p)

    def test_nonpositive_top_n_rejected(self, tmp_path, workdir):
        doc = yaml.safe_load(CONFIG_YAML)
        doc["strategies"]["bvd"]["top_n"] = [0]
        p = tmp_path / "bad.yaml"
        p.write_text(yaml.safe_dump(doc))
        with pytest.raises(ValueError, match="positive"):
            load_experiment_config(p)

    def test_strategies_optional(self, tmp_path, workdir):
        doc = yaml.safe_load(CONFIG_YAML)
        del doc["strategies"]
        p = workdir / "baseline_only.yaml"
        p.write_text(yaml.safe_dump(doc))
        cfg = load_experiment_config(p)
        assert cfg.bvd is None and cfg.bdm is None and cfg.bdiou is None


class TestAnnotate:
    def test_fills_derived_fields(self, workdir):
        ds = load_cohort(workdir / "images_A.jsonl", workdir / "pairs_A.csv", Cohort.A)
        ann = annotate_pairs(annotate_images(ds, ModalityConfig()))
        for rec in ann.images.values():
            assert rec.bv is not None and rec.modality is not None
        for p in ann.pairs.values():
            assert p.pair_type is not None
            x, y = ann.images[p.img_x], ann.images[p.img_y]
            assert p.bvd == abs(brightness_value(x.dist) - brightness_value(y.dist))


class TestRunExperiment:
    def test_rows_and_reports(self, workdir, tmp_path):
        cfg = load_experiment_config(workdir / "experiment.yaml")
        from dataclasses import replace

        cfg = replace(cfg, output_dir=tmp_path / "out")
        baseline, rows, paths = run_experiment(cfg)
        assert baseline.dprime_u > 0
        # 2 bvd sizes + 2 bdm groupings + 1 bdiou size
        assert [r.strategy for r in rows] == [
            Strategy.BVD_TOP_N,
            Strategy.BVD_TOP_N,
            Strategy.BDM_SAMPLE,
            Strategy.BDM_SAMPLE,
            Strategy.BDIOU_TOP_N,
        ]
        assert rows[2].trials == 3
        assert rows[2].label and "," not in rows[2].label
        csv_text = paths["csv"].read_text()
        lines = csv_text.splitlines()
        assert lines[0].startswith("strategy,label,n,trials,cohort,mean,")
        assert lines[1].startswith("baseline,") and ",A," in lines[1]
        assert lines[2].startswith("baseline,") and ",B," in lines[2]
        # one A row and one B row per report row
        assert len(lines) == 1 + 2 + 2 * len(rows)
        doc = json.loads(paths["json"].read_text())
        assert len(doc["rows"]) == 5
        assert doc["baseline"]["cohort_a"]["n"] == 120

    def test_rerun_byte_identical(self, workdir, tmp_path):
        cfg = load_experiment_config(workdir / "experiment.yaml")
        from dataclasses import replace

        cfg = replace(cfg, output_dir=tmp_path / "out")
        _, _, first = run_experiment(cfg)
        csv1 = first["csv"].read_bytes()
        json1 = first["json"].read_bytes()
        _, _, second = run_experiment(cfg)
        assert second["csv"].read_bytes() == csv1
        assert second["json"].read_bytes() == json1

    def test_no_strategies_baseline_only(self, workdir, tmp_path):
        doc = yaml.safe_load(CONFIG_YAML)
        del doc["strategies"]
        doc["output_dir"] = str(tmp_path / "out")
        p = workdir / "none.yaml"
        p.write_text(yaml.safe_dump(doc))
        baseline, rows, paths = run_experiment(load_experiment_config(p))
        assert rows == []
        assert paths["csv"].read_text().count("\n") == 3  # header + 2 baseline rows

    def test_failure_leaves_no_partial_report(self, workdir, tmp_path):
        doc = yaml.safe_load(CONFIG_YAML)
        doc["strategies"] = {"bvd": {"top_n": [100000]}}
        doc["output_dir"] = str(tmp_path / "out")
        p = workdir / "huge.yaml"
        p.write_text(yaml.safe_dump(doc))
        from lumibal.errors import InsufficientPairsError

        with pytest.raises(InsufficientPairsError):
            run_experiment(load_experiment_config(p))
        assert not (tmp_path / "out" / "report.csv").exists()
        assert not (tmp_path / "out" / "report.json").exists()

    def test_set_thread_count_clamps(self):
        set_thread_count(None)
        set_thread_count(64)  # clamped to available workers, never an error
        with pytest.raises(ValueError):
            set_thread_count(0)


class TestCliBasics:
    def test_help_enumerates_commands(self, runner):
        res = runner.invoke(cli.main, ["--help"])
        assert res.exit_code == 0
        for cmd in ("extract", "modality", "baseline", "balance", "bdiou",
                    "report", "synth", "run"):
            assert cmd in res.output

    def test_subcommand_help(self, runner):
        res = runner.invoke(cli.main, ["balance", "--help"])
        assert res.exit_code == 0
        for cmd in ("bvd", "bdm", "bdiou"):
            assert cmd in res.output

    def test_unknown_flag_rejected(self, runner):
        res = runner.invoke(cli.main, ["run", "--frobnicate"])
        assert res.exit_code != 0

    def test_missing_dataset_file_is_single_line_io_error(self, runner, tmp_path):
        doc = yaml.safe_load(CONFIG_YAML)
        doc["dataset"]["cohort_a"]["images"] = "missing.jsonl"
        p = tmp_path / "cfg.yaml"
        p.write_text(yaml.safe_dump(doc))
        res = runner.invoke(cli.main, ["run", "--config", str(p)])
        assert res.exit_code == 1
        err_lines = [l for l in res.stderr.splitlines() if l]
        assert len(err_lines) == 1
        assert err_lines[0].startswith("error[io]: ")
        assert "missing.jsonl" in err_lines[0]

    def test_threads_env_overrides_flag(self, monkeypatch):
        monkeypatch.setenv(cli.THREADS_ENV, "3")
        assert cli.resolve_threads(8) == 3
        monkeypatch.delenv(cli.THREADS_ENV)
        assert cli.resolve_threads(8) == 8
        assert cli.resolve_threads(None) is None

    def test_threads_env_invalid(self, runner, monkeypatch, workdir):
        monkeypatch.setenv(cli.THREADS_ENV, "lots")
        res = runner.invoke(
            cli.main,
            ["run", "--config", str(workdir / "experiment.yaml")],
        )
        assert res.exit_code == 1
        assert "error[config]" in res.stderr


class TestCliRun:
    def test_run_end_to_end_and_byte_identical(self, runner, workdir, tmp_path):
        doc = yaml.safe_load(CONFIG_YAML)
        doc["output_dir"] = str(tmp_path / "out")
        p = workdir / "cli_run.yaml"
        p.write_text(yaml.safe_dump(doc))
        res = runner.invoke(cli.main, ["run", "--config", str(p)])
        assert res.exit_code == 0, res.output
        assert "baseline: mean_a=" in res.output
        assert "report: " in res.output
        csv1 = (tmp_path / "out" / "report.csv").read_bytes()
        res2 = runner.invoke(cli.main, ["run", "--config", str(p), "--threads", "2"])
        assert res2.exit_code == 0
        assert (tmp_path / "out" / "report.csv").read_bytes() == csv1


class TestCliSynthBaselineModality:
    def test_synth_then_baseline(self, runner, tmp_path):
        spec_path = tmp_path / "spec.yaml"
        save_synth_spec(spec_path, fixture_spec())
        out = tmp_path / "data"
        res = runner.invoke(
            cli.main, ["synth", "--spec", str(spec_path), "--out", str(out)]
        )
        assert res.exit_code == 0, res.output
        for name in ("images_A.jsonl", "pairs_A.csv", "images_B.jsonl",
                     "pairs_B.csv", "truth_sidecar.json"):
            assert (out / name).exists()
        res = runner.invoke(
            cli.main,
            ["baseline",
             "--images-a", str(out / "images_A.jsonl"),
             "--pairs-a", str(out / "pairs_A.csv"),
             "--images-b", str(out / "images_B.jsonl"),
             "--pairs-b", str(out / "pairs_B.csv"),
             "--json"],
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(res.output)
        assert doc["cohort_a"]["images"] == 120
        assert doc["cohort_a"]["pairs"] == 120
        assert "dprime" in doc

    def test_baseline_single_cohort_text(self, runner, workdir):
        res = runner.invoke(
            cli.main,
            ["baseline", "--images-a", str(workdir / "images_A.jsonl")],
        )
        assert res.exit_code == 0
        assert "cohort_a: 120 images, 40 subjects, 0 pairs" in res.output
        assert "dprime" not in res.output

    def test_modality_annotates_to_new_file(self, runner, workdir, tmp_path):
        out = tmp_path / "annotated.jsonl"
        res = runner.invoke(
            cli.main,
            ["modality", str(workdir / "images_A.jsonl"), "--out", str(out)],
        )
        assert res.exit_code == 0
        assert "annotated 120 records" in res.output
        recs = load_images(out, Cohort.A)
        assert all(r.bv is not None and r.modality is not None
                   for r in recs.values())

    def test_modality_in_place_idempotent(self, runner, workdir, tmp_path):
        target = tmp_path / "records.jsonl"
        target.write_bytes((workdir / "images_A.jsonl").read_bytes())
        res = runner.invoke(cli.main, ["modality", str(target)])
        assert res.exit_code == 0
        once = target.read_bytes()
        res = runner.invoke(cli.main, ["modality", str(target)])
        assert res.exit_code == 0
        assert target.read_bytes() == once


class TestCliBalance:
    def test_balance_bvd(self, runner, workdir, tmp_path):
        out = tmp_path / "subset.json"
        res = runner.invoke(
            cli.main,
            ["balance", "bvd", "--config", str(workdir / "experiment.yaml"),
             "--out", str(out), "--top", "10"],
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(out.read_text())
        assert doc["strategy"] == "bvd_top_n"
        assert len(doc["cf_pair_ids"]) == 10
        assert doc["factor_values"] == sorted(doc["factor_values"])
        assert doc["provenance"]["n"] == 10

    def test_balance_bvd_insufficient(self, runner, workdir, tmp_path):
        res = runner.invoke(
            cli.main,
            ["balance", "bvd", "--config", str(workdir / "experiment.yaml"),
             "--out", str(tmp_path / "s.json"), "--top", "100000"],
        )
        assert res.exit_code == 1
        assert res.stderr.startswith("error[insufficient-pairs]: ")
        assert not (tmp_path / "s.json").exists()

    def test_balance_bdm(self, runner, workdir, tmp_path):
        out = tmp_path / "bdm.json"
        res = runner.invoke(
            cli.main,
            ["balance", "bdm", "--config", str(workdir / "experiment.yaml"),
             "--out", str(out), "--grouping", "bb,mm,bm", "--n", "15",
             "--trials", "3", "--seed", "7"],
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(out.read_text())
        assert doc["grouping"] == "BB+BM+MM"
        assert len(doc["trials"]) == 3
        assert all(len(t["cf_pair_ids"]) == 15 for t in doc["trials"])

    def test_balance_bdm_bad_grouping(self, runner, workdir, tmp_path):
        res = runner.invoke(
            cli.main,
            ["balance", "bdm", "--config", str(workdir / "experiment.yaml"),
             "--out", str(tmp_path / "x.json"), "--grouping", "bb,zz", "--n", "5"],
        )
        assert res.exit_code == 1
        assert "error[config]" in res.stderr

    def test_balance_bdiou(self, runner, workdir, tmp_path):
        out = tmp_path / "sets.json"
        res = runner.invoke(
            cli.main,
            ["balance", "bdiou", "--config", str(workdir / "experiment.yaml"),
             "--out", str(out), "--top", "10"],
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(out.read_text())
        assert doc["strategy"] == "bdiou_top_n"
        assert len(doc["cf_pair_ids"]) == 10
        # scores come out in descending acceptance order
        fv = doc["factor_values"]
        assert fv == sorted(fv, reverse=True)


class TestCliScan:
    def test_scan_format_and_order(self, runner, workdir, tmp_path):
        out = tmp_path / "scan.csv"
        res = runner.invoke(
            cli.main,
            ["bdiou", "scan", "--config", str(workdir / "experiment.yaml"),
             "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        lines = out.read_text().splitlines()
        assert lines[0] == "cf_pair_id,af_pair_id,bdiou,assignment"
        rows = [l.split(",") for l in lines[1:]]
        assert rows
        for r in rows:
            assert len(r) == 4
            float(r[2])
            assert len(r[2].split(".")[1]) == 6
            assert r[3] in ("Straight", "Crossed")
        # cf-major: every cf id forms one contiguous block with the same
        # af sequence
        cf_order = []
        af_seqs = {}
        for cf_id, af_id, _, _ in rows:
            if not cf_order or cf_order[-1] != cf_id:
                assert cf_id not in af_seqs
                cf_order.append(cf_id)
                af_seqs[cf_id] = []
            af_seqs[cf_id].append(af_id)
        first = af_seqs[cf_order[0]]
        assert all(seq == first for seq in af_seqs.values())

    def test_scan_min_prunes(self, runner, workdir, tmp_path):
        full = tmp_path / "full.csv"
        cut = tmp_path / "cut.csv"
        base_args = ["bdiou", "scan", "--config", str(workdir / "experiment.yaml")]
        assert runner.invoke(cli.main, base_args + ["--out", str(full)]).exit_code == 0
        assert runner.invoke(
            cli.main, base_args + ["--out", str(cut), "--min", "0.5"]
        ).exit_code == 0
        full_rows = full.read_text().splitlines()[1:]
        cut_rows = cut.read_text().splitlines()[1:]
        expected = [r for r in full_rows if float(r.split(",")[2]) >= 0.5]
        assert cut_rows == expected


class TestCliReport:
    @pytest.fixture()
    def report_paths(self, runner, workdir, tmp_path):
        doc = yaml.safe_load(CONFIG_YAML)
        doc["output_dir"] = str(tmp_path / "out")
        p = workdir / "report_cfg.yaml"
        p.write_text(yaml.safe_dump(doc))
        res = runner.invoke(cli.main, ["run", "--config", str(p)])
        assert res.exit_code == 0, res.output
        return tmp_path / "out"

    def test_report_rebuilds_csv(self, runner, report_paths):
        res = runner.invoke(cli.main, ["report", str(report_paths / "report.json")])
        assert res.exit_code == 0
        assert res.output == (report_paths / "report.csv").read_text()

    def test_plot_data(self, runner, report_paths):
        res = runner.invoke(
            cli.main, ["report", str(report_paths / "report.json"), "--plot-data"]
        )
        assert res.exit_code == 0
        lines = res.output.splitlines()
        assert lines[0] == "strategy,label,n,factor_mean,dprime_shift_pct"
        # factor-bearing rows only: two bvd sizes + one bdiou size
        assert len(lines) == 4
        assert {l.split(",")[0] for l in lines[1:]} == {"bvd_top_n", "bdiou_top_n"}


def write_png(path, array):
    Image.fromarray(array).save(path)


class TestCliExtract:
    def test_extract_directory(self, runner, tmp_path):
        d = tmp_path / "crops"
        d.mkdir()
        rng = np.random.default_rng(0)
        gray = rng.integers(0, 256, size=(6, 5)).astype(np.uint8)
        mask = np.zeros((6, 5), dtype=np.uint8)
        mask[1:4, 1:4] = 255
        write_png(d / "s1__a.crop.png", gray)
        write_png(d / "s1__a.mask.png", mask)
        # full mask: record total = width * height
        gray2 = rng.integers(0, 256, size=(4, 4)).astype(np.uint8)
        write_png(d / "solo.crop.png", gray2)
        write_png(d / "solo.mask.png", np.full((4, 4), 255, dtype=np.uint8))
        out = tmp_path / "records.jsonl"
        res = runner.invoke(
            cli.main, ["extract", str(d), "--cohort", "A", "--out", str(out)]
        )
        assert res.exit_code == 0, res.output
        recs = load_images(out, Cohort.A)
        assert set(recs) == {"s1__a", "solo"}
        assert recs["s1__a"].subject_id == "s1"
        assert recs["solo"].subject_id == "solo"
        assert recs["s1__a"].dist.total == 9
        assert recs["solo"].dist.total == 16
        expected = np.bincount(gray[mask != 0].astype(np.int64), minlength=256)
        assert np.array_equal(recs["s1__a"].dist.counts, expected)

    def test_empty_mask_warns_and_skips(self, runner, tmp_path):
        d = tmp_path / "crops"
        d.mkdir()
        gray = np.zeros((4, 4), dtype=np.uint8)
        write_png(d / "ok.crop.png", gray + 10)
        write_png(d / "ok.mask.png", np.full((4, 4), 255, dtype=np.uint8))
        write_png(d / "blank.crop.png", gray)
        write_png(d / "blank.mask.png", np.zeros((4, 4), dtype=np.uint8))
        out = tmp_path / "records.jsonl"
        res = runner.invoke(
            cli.main, ["extract", str(d), "--cohort", "B", "--out", str(out)]
        )
        assert res.exit_code == 0, res.output
        assert "warning" in res.stderr and "empty mask" in res.stderr
        assert set(load_images(out, Cohort.B)) == {"ok"}

    def test_mismatch_is_per_file_error_run_continues(self, runner, tmp_path):
        d = tmp_path / "crops"
        d.mkdir()
        write_png(d / "good.crop.png", np.full((3, 3), 50, dtype=np.uint8))
        write_png(d / "good.mask.png", np.full((3, 3), 255, dtype=np.uint8))
        write_png(d / "bad.crop.png", np.full((3, 3), 50, dtype=np.uint8))
        write_png(d / "bad.mask.png", np.full((2, 2), 255, dtype=np.uint8))
        write_png(d / "lone.crop.png", np.full((3, 3), 50, dtype=np.uint8))
        out = tmp_path / "records.jsonl"
        res = runner.invoke(
            cli.main, ["extract", str(d), "--cohort", "A", "--out", str(out)]
        )
        assert res.exit_code == 1
        assert "dimensions" in res.stderr
        assert "no matching mask" in res.stderr
        # the good file still made it out
        assert set(load_images(out, Cohort.A)) == {"good"}
