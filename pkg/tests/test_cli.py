import io
import json
import math

import pandas as pd
import pytest

from harness.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, main

QUADRATIC = """
[run]
rounds = 16
seeds = 1, 2

[problem]
workers = 3
dim = 6
spectrum_max = 1.0

[local]
kind = prox
inner_iters = 20

[schedule]
c = 0.5
"""

BLOBS = """
[problem]
kind = logistic

[dataset]
kind = blobs
classes = 4
per_class = 10
dim = 2

[partition]
mode = noniid1
workers = 4

[schedule]
c = 0.5
"""


@pytest.fixture
def write_config(tmp_path):
    def write(text, name="experiment.cfg"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


def key_values(text):
    frame = pd.read_csv(io.StringIO(text), dtype={"key": str, "value": str}, keep_default_na=False)
    return dict(zip(frame["key"], frame["value"]))


class TestBounds:
    def test_fedprox_constants(self, write_config, capsys):
        assert main(["bounds", write_config(QUADRATIC)]) == EXIT_OK
        report = key_values(capsys.readouterr().out)
        assert report["algorithm"] == "FedProx"
        assert float(report["L"]) == pytest.approx(1.0)
        assert float(report["b1"]) == pytest.approx(math.sqrt(6), rel=1e-9)
        assert float(report["b2"]) == 0.5
        assert float(report["step_cap"]) == pytest.approx(1 / math.sqrt(6), rel=1e-9)
        assert float(report["bound"]) > 0
        assert 64 <= int(report["rounds_for_half_bound"]) <= 65

    def test_json_report(self, write_config, capsys):
        text = QUADRATIC.replace("[local]\nkind = prox\ninner_iters = 20", "[run]\nalgorithm = error_feedback\n\n"
                                 "[compressor]\nkind = topk\nk = 2")
        assert main(["bounds", write_config(text), "--format", "json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["algorithm"] == "EF-FedAvg"
        assert {"detail.alpha_hat", "detail.A", "detail.C2_tilde", "detail.C3_tilde"} <= set(report)

    def test_unrescaled_local_steps(self, write_config, capsys):
        fedavg = QUADRATIC.replace("[local]\nkind = prox\ninner_iters = 20", "[local]\nT = 3")
        reports = {}
        for name, text in {
            "rescaled": fedavg.replace("c = 0.5", "c = 1.5"),
            "raw": fedavg + "\n[run]\nrescale_by_T = false\n",
            "raw_large": fedavg.replace("c = 0.5", "c = 1.5") + "\n[run]\nrescale_by_T = false\n",
        }.items():
            assert main(["bounds", write_config(text, f"{name}.cfg"), "--format", "json"]) == EXIT_OK
            reports[name] = json.loads(capsys.readouterr().out)
        assert reports["raw"]["step_scale"] == 3
        assert reports["raw"]["bound"] == pytest.approx(reports["rescaled"]["bound"], rel=1e-12)
        assert reports["raw"]["in_regime"] and reports["rescaled"]["in_regime"]
        assert reports["raw_large"]["first_step"] == pytest.approx(1.125)
        assert not reports["raw_large"]["in_regime"]

    def test_step_decay_without_R(self, write_config, capsys):
        text = QUADRATIC.replace("c = 0.5", "kind = step_decay\ngamma0 = 0.3\ndecay_base = 2")
        assert main(["bounds", write_config(text), "--format", "json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["bound"] is None
        assert "theory.R" in report["note"]


class TestRunAndVerify:
    def test_run_writes_outputs(self, write_config, tmp_path):
        out = tmp_path / "out"
        assert main(["run", write_config(QUADRATIC), "--out", str(out), "--threads", "2"]) == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "aggregate.csv", "config.txt", "seed_1.csv", "seed_2.csv", "summary.json"]

    def test_seed_override(self, write_config, tmp_path):
        out = tmp_path / "single"
        assert main(["run", write_config(QUADRATIC), "--out", str(out), "--seed", "9"]) == EXIT_OK
        assert (out / "seed_9.csv").exists()
        assert not (out / "seed_1.csv").exists()

    def test_verify_prints_verdict(self, write_config, tmp_path, capsys):
        out = tmp_path / "verified"
        assert main(["verify", write_config(QUADRATIC), "--out", str(out), "--format", "json"]) == EXIT_OK
        verdict = json.loads(capsys.readouterr().out)
        assert verdict["theorem"] == "fixed"
        assert verdict["in_regime"] and not verdict["violated"]
        assert verdict["seeds"] == [1, 2]

    def test_all_seeds_diverge(self, write_config, tmp_path):
        text = QUADRATIC.replace("[local]\nkind = prox\ninner_iters = 20",
                                 "[local]\nT = 3").replace("c = 0.5", "c = 1e300") + "\n[run]\nrescale_by_T = false\n"
        assert main(["run", write_config(text), "--out", str(tmp_path / "bad")]) == EXIT_DIVERGED
        assert (tmp_path / "bad" / "seed_1_partial.csv").exists()

    def test_missing_dataset_file(self, write_config, tmp_path, capsys):
        text = (BLOBS.replace("kind = blobs\nclasses = 4\nper_class = 10\ndim = 2",
                              f"kind = idx\nimages = {tmp_path / 'absent-images'}\nlabels = {tmp_path / 'absent-labels'}"))
        assert main(["run", write_config(text), "--out", str(tmp_path / "idx")]) == EXIT_CONFIG
        assert "images.path" in capsys.readouterr().err

    def test_invalid_configuration(self, write_config, capsys):
        assert main(["run", write_config("run.rounds = 0\nschedule.c = 1")]) == EXIT_CONFIG
        assert "run.rounds must be at least 1" in capsys.readouterr().err

    def test_needs_config_or_preset(self):
        assert main(["run"]) == EXIT_CONFIG


class TestReports:
    def test_oracle(self, capsys):
        assert main(["oracle", "--trials", "20", "--kind", "fixed", "--format", "json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["fixed.violations"] == 0
        assert report["growth_factor.violations"] == 0
        assert report["trials"] == 20

    def test_partition_report(self, write_config, capsys):
        assert main(["partition-report", write_config(BLOBS), "--format", "json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["mode"] == "noniid1"
        assert report["has_skew"]
        assert [row["label_cardinality"] for row in report["workers"]] == [1, 1, 1, 1]

    def test_partition_report_csv(self, write_config, capsys):
        assert main(["partition-report", write_config(BLOBS)]) == EXIT_OK
        table = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(table["worker"]) == [0, 1, 2, 3]
        assert list(table.columns[1:5]) == ["class_0", "class_1", "class_2", "class_3"]

    def test_partition_report_needs_dataset(self, write_config):
        assert main(["partition-report", write_config(QUADRATIC)]) == EXIT_CONFIG

    def test_presets(self, capsys):
        assert main(["presets"]) == EXIT_OK
        names = capsys.readouterr().out.split()
        assert "compare-fixed" in names and "rate-fixed" in names
