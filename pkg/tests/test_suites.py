import csv
import json

import pytest

from config import ConfigError, ScheduleError
from file_handler import FileHandler
from generator import InstanceGenerator, trial_rng
from region import Region
from suites import SUITES, ExperimentConfig, Suite, SuiteRunner, TrialContext, describe, write_report


@pytest.fixture
def config():
    return ExperimentConfig(seed=7, trials=3, shape='segment', h=0.1, workers=2)


@pytest.mark.parametrize("kwargs", [
    {"trials": 0},
    {"n_range": (3, 1)},
    {"atom_range": (0, 2)},
    {"deltas": ()},
    {"deltas": (0.1, 0.0)},
    {"shape": "cube"},
    {"h": 0},
    {"workers": 0},
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_config_normalizes_ranges():
    config = ExperimentConfig(n_range=[2, 5], deltas=[0.1])
    assert config.n_range == (2, 5)
    assert config.deltas == (0.1,)
    assert describe(config)["n_range"] == [2, 5]


def test_trial_context_cycles_deltas():
    region = Region.segment(0, 1, 0.1)
    gen = InstanceGenerator(region)
    deltas = [TrialContext(t, trial_rng(0, t), gen, (0.1, 0.2)).delta() for t in range(4)]
    assert deltas == pytest.approx([0.1, 0.2, 0.1, 0.2])


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suites_pass_on_a_few_trials(config, name):
    report = SuiteRunner(config).run(name)
    assert [row["id"] for row in report.rows] == [0, 1, 2]
    assert report.ok, report.rows
    assert report.summary()["passed"] == 3


def test_runs_are_deterministic(config):
    first = SuiteRunner(config).run('metric-axioms')
    second = SuiteRunner(config).run('metric-axioms')
    assert first.rows == second.rows


def test_worker_count_does_not_change_rows(config):
    serial = ExperimentConfig(seed=7, trials=3, shape='segment', h=0.1, workers=1)
    assert SuiteRunner(serial).run('du-bracket').rows == SuiteRunner(config).run('du-bracket').rows


def test_replay_reproduces_the_row(config):
    runner = SuiteRunner(config)
    report = runner.run('lift-bound')
    assert runner.replay('lift-bound', 2) == report.rows[2]


def test_unknown_suite_and_negative_ids(config):
    runner = SuiteRunner(config)
    with pytest.raises(ScheduleError):
        runner.run('no-such-suite')
    with pytest.raises(ScheduleError):
        runner.replay('marriage', -1)


def test_failed_checks_are_reported(config, monkeypatch):
    def broken(ctx):
        raise ScheduleError("bad instance")

    monkeypatch.setitem(SUITES, 'marriage', Suite('marriage', broken, 3, (1, 2), (1, 2)))
    report = SuiteRunner(config).run('marriage')
    assert report.failed == [0, 1, 2]
    assert not report.ok
    assert all(row["error"].startswith("ScheduleError") for row in report.rows)


def test_write_report(config, tmp_path):
    report = SuiteRunner(config).run('marriage')
    csv_path, json_path = write_report(report, FileHandler(str(tmp_path)))
    with open(csv_path, newline='') as f:
        rows = list(csv.DictReader(f))
    assert [int(row["id"]) for row in rows] == [0, 1, 2]
    with open(json_path) as f:
        summary = json.load(f)
    assert summary == report.summary()
