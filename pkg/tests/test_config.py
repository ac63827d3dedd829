import pytest

from harness.config import SCHEMA, load_config, parse_config, serialize_config
from numerics.exceptions import ConfigurationError

QUADRATIC = """
# quadratic with error feedback
[run]
algorithm = error_feedback
rounds = 50
seeds = 1, 2, 3

[problem]
kind = quadratic
workers = 4
dim = 8
sigma_sq = 0.0

[compressor]
kind = topk
fraction = 0.25

[schedule]
kind = diminishing
c = 0.1
nu = 0.75
"""

LOGISTIC = """
run.rounds = 10
problem.kind = logistic
problem.batch_size = 16
dataset.kind = blobs
dataset.classes = 4
partition.mode = noniid2
partition.workers = 2
local.kind = prox
local.inner_iters = 20
schedule.kind = fixed
schedule.c = 0.5
"""


def problems_of(text):
    with pytest.raises(ConfigurationError) as info:
        parse_config(text)
    return info.value.problems


class TestParse:
    def test_sections_and_values(self):
        cfg = parse_config(QUADRATIC)
        assert cfg.algorithm == "error_feedback"
        assert cfg.rounds == 50
        assert cfg.seeds == (1, 2, 3)
        assert cfg.get("compressor.fraction") == 0.25
        assert cfg.get("problem.sigma_sq") == 0.0
        assert cfg.n_workers == 4
        assert not cfg.uses_dataset

    def test_defaults_fill_unset_keys(self):
        cfg = parse_config("schedule.c = 1.0")
        assert cfg.get("run.rounds") == 400
        assert cfg.get("local.T") == 30
        assert cfg.get("theory.R") is None
        assert not cfg.is_set("run.rounds")
        with pytest.raises(KeyError):
            cfg.get("run.colour")

    def test_dotted_keys_without_sections(self):
        cfg = parse_config(LOGISTIC)
        assert cfg.uses_dataset
        assert cfg.n_workers == 2
        assert cfg.get("local.inner_iters") == 20

    def test_serialized_form_parses_back(self):
        cfg = parse_config(QUADRATIC)
        text = serialize_config(cfg)
        assert text.startswith("[compressor]\nfraction = 0.25\nkind = topk\n")
        assert parse_config(text) == cfg
        assert serialize_config(parse_config(text)) == text

    def test_every_schema_default_is_parsable(self):
        for key, (parser, default) in SCHEMA.items():
            if default is None or isinstance(default, (bool, tuple)):
                continue
            assert parser(str(default)) == default, key


class TestErrors:
    def test_all_problems_reported_together(self):
        problems = problems_of("run.rounds = ten\nrun.colour = red\nnot a pair\nrun.seeds = 1, 1\nschedule.c = 1")
        assert len(problems) == 4
        assert problems[0].startswith("line 1: bad value for run.rounds")
        assert problems[1] == "line 2: unknown key run.colour"
        assert problems[2].startswith("line 3: expected key = value")
        assert "duplicate seeds" in problems[3]

    def test_duplicate_key(self):
        problems = problems_of("schedule.c = 1\n[schedule]\nc = 2")
        assert problems == ["line 3: duplicate key schedule.c"]

    def test_non_finite_numbers(self):
        assert "finite" in problems_of("schedule.c = nan")[0]

    def test_compressor_needs_error_feedback(self):
        problems = problems_of("schedule.c = 1\ncompressor.kind = sign")
        assert problems == ["compressor.kind requires run.algorithm = error_feedback"]

    def test_topk_needs_exactly_one_size(self):
        base = "run.algorithm = error_feedback\nschedule.c = 1\ncompressor.kind = topk\n"
        assert any("exactly one" in p for p in problems_of(base))
        assert any("exactly one" in p for p in problems_of(base + "compressor.k = 2\ncompressor.fraction = 0.5"))
        assert any("(0, 1]" in p for p in problems_of(base + "compressor.fraction = 1.5"))

    def test_dataset_keys_rejected_for_quadratics(self):
        problems = problems_of("schedule.c = 1\ndataset.kind = idx\npartition.mode = iid\nproblem.ridge = 0.1")
        assert len(problems) == 3
        assert all("only applies to dataset problems" in p for p in problems)

    def test_quadratic_keys_rejected_for_datasets(self):
        problems = problems_of(LOGISTIC + "problem.workers = 3\nproblem.hidden = 8")
        assert "problem.workers only applies to problem.kind = quadratic" in problems
        assert "problem.hidden only applies to problem.kind = mlp" in problems

    def test_idx_needs_paths(self):
        problems = problems_of(LOGISTIC.replace("dataset.kind = blobs", "dataset.kind = idx"))
        assert "dataset.kind = idx needs dataset.images" in problems
        assert "dataset.kind = idx needs dataset.labels" in problems

    @pytest.mark.parametrize(
        "schedule, missing",
        [("fixed", ["schedule.c"]), ("diminishing", ["schedule.c", "schedule.nu"]),
         ("step_decay", ["schedule.gamma0", "schedule.decay_base"])],
    )
    def test_schedule_parameters_required(self, schedule, missing):
        problems = problems_of(f"schedule.kind = {schedule}")
        assert problems == [f"schedule.kind = {schedule} needs {key}" for key in missing]

    def test_foreign_schedule_parameter(self):
        assert problems_of("schedule.c = 1\nschedule.nu = 0.7") == ["schedule.nu does not apply to schedule.kind = fixed"]

    def test_prox_rejects_local_steps(self):
        problems = problems_of("schedule.c = 1\nlocal.kind = prox\nlocal.T = 3")
        assert len(problems) == 1 and problems[0].startswith("local.T only applies")

    def test_positive_counts(self):
        problems = problems_of("schedule.c = 1\nrun.rounds = 0\nrun.threads = -2")
        assert problems == ["run.rounds must be at least 1, got 0", "run.threads must be at least 1, got -2"]


class TestReplaceAndLoad:
    def test_replace_revalidates(self):
        cfg = parse_config(QUADRATIC)
        shorter = cfg.replace(run__rounds=5)
        assert shorter.rounds == 5
        assert cfg.rounds == 50
        with pytest.raises(ConfigurationError):
            cfg.replace(schedule__gamma0=1.0)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "experiment.cfg"
        path.write_text(QUADRATIC, encoding="utf-8")
        assert load_config(str(path)) == parse_config(QUADRATIC)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="Cannot read configuration"):
            load_config(str(tmp_path / "absent.cfg"))
