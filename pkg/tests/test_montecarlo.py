import json
import math
from pathlib import Path

import numpy as np
import pytest

from lpskew.estimators import BandwidthPlan, k_hat
from lpskew.montecarlo import (
    COLUMNS,
    DEFAULT_SEED,
    REFERENCE_MSE,
    ExperimentConfig,
    ExperimentError,
    MseRow,
    emit_table,
    load_config,
    reference_config,
    reference_spec,
    replicate_estimates,
    rows_from_json,
    run_experiment,
    summarize,
    worker_count,
)
from lpskew.process import InnovationSpec, LinearProcessSpec
from lpskew.simulate import replication_seed, simulate_path

EXP1 = InnovationSpec.exponential(1.0)


@pytest.fixture
def small_config():
    return ExperimentConfig(LinearProcessSpec(ar=(0.5,), ma=(0.5,), innovation=EXP1),
                            sizes=(60, 120), replications=12, base_seed=7)


def test_single_replication_is_one_squared_deviation():
    spec = LinearProcessSpec(innovation=EXP1)
    cfg = ExperimentConfig(spec, sizes=(100,), replications=1, base_seed=3)
    (row,) = run_experiment(cfg, workers=1)
    x = simulate_path(spec, 100, replication_seed(3, 100, 0)).x
    k1 = k_hat(x, 0.0).k_hat
    assert row.mse == pytest.approx((k1 - 2.0) ** 2, rel=1e-14)
    assert row.mean_k_hat == pytest.approx(k1, rel=1e-14)
    assert row.k_true == 2.0 and row.excluded == 0 and row.mc_std_error == 0.0


def test_rows_are_deterministic_across_worker_counts(small_config):
    one = run_experiment(small_config, workers=1)
    three = run_experiment(small_config, workers=3)
    assert one == three
    assert emit_table(one, "csv") == emit_table(three, "csv")


def test_split_replications_merge_to_same_result(small_config):
    whole = replicate_estimates(small_config, 60, range(12))
    parts = replicate_estimates(small_config, 60, range(0, 5)) + \
        replicate_estimates(small_config, 60, range(5, 12), workers=2)
    np.testing.assert_array_equal(np.array(whole), np.array(parts))


def test_different_seed_changes_rows(small_config):
    other = ExperimentConfig.from_dict({**small_config.to_dict(), "base_seed": 8})
    assert run_experiment(other, workers=1) != run_experiment(small_config, workers=1)


def test_summarize_exclusions_and_errors():
    results = [(1.0, math.nan, 1.0), (math.nan, math.nan, math.nan), (3.0, math.nan, 3.0)]
    row = summarize(50, results, k_true=2.0)
    assert row.mse == 1.0 and row.excluded == 1 and row.mean_k_hat == 2.0
    assert row.mc_std_error == 0.0
    with pytest.raises(ExperimentError):
        summarize(50, [(math.nan, math.nan, math.nan)], 2.0)


def test_summarize_standard_error():
    ks = [0.0, 1.0, 2.0, 5.0]
    row = summarize(10, [(k, math.nan, k) for k in ks], k_true=1.0)
    sq = np.array([(k - 1.0) ** 2 for k in ks])
    assert row.mse == pytest.approx(sq.mean())
    assert row.mc_std_error == pytest.approx(sq.std(ddof=1) / 2)


def test_estimated_d_mode_reports_plugin_columns():
    cfg = ExperimentConfig(LinearProcessSpec(d=0.3, innovation=EXP1), sizes=(128,),
                           replications=4, d_mode="estimated")
    (row,) = run_experiment(cfg, workers=1)
    assert 0 <= row.mean_d_hat <= 0.499
    assert row.mean_plugin_gap >= 0
    text = emit_table([row], "csv")
    assert text.splitlines()[0].endswith("mean_d_hat,mean_plugin_gap")


def test_explicit_bandwidths_are_used():
    plan = BandwidthPlan(q0=3, q1=2, q2=2, q3=2)
    cfg = ExperimentConfig(LinearProcessSpec(innovation=EXP1), sizes=(40,), replications=2,
                           bandwidths={40: plan})
    assert cfg.plan_for(40) == plan
    assert cfg.bandwidth_rule == "explicit"
    with pytest.raises(ValueError):
        cfg.plan_for(41)
    (row,) = run_experiment(cfg, workers=1)
    ks = [k_hat(simulate_path(cfg.spec, 40, replication_seed(DEFAULT_SEED, 40, b)).x,
                0.0, plan).k_hat for b in range(2)]
    assert row.mean_k_hat == pytest.approx(np.mean(ks), rel=1e-14)


def test_config_round_trip(tmp_path, small_config):
    doc = small_config.to_dict()
    assert doc["bandwidth_rule"] == "default" and doc["schema_version"] == 1
    assert ExperimentConfig.from_dict(doc) == small_config
    explicit = ExperimentConfig(small_config.spec, (60,), 2,
                                bandwidths={60: BandwidthPlan(4, 2, 2, 2)})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(explicit.to_dict()))
    assert load_config(path) == explicit


@pytest.mark.parametrize("patch", [
    {"extra": 1},
    {"schema_version": 2},
    {"bandwidth_rule": "bogus"},
    {"sizes": [100, 50]},
    {"replications": 0},
    {"d_mode": "guess"},
])
def test_config_rejects_bad_documents(small_config, patch):
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**small_config.to_dict(), **patch})


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(ValueError):
        load_config(bad)
    bad.write_text("{}")
    with pytest.raises(ValueError):
        load_config(bad)


def test_reference_studies():
    assert reference_spec(1).ar == (0.5,) and reference_spec(1).ma == (0.5,)
    assert reference_spec(2).ar == (-0.5,) and reference_spec(2).ma == (-0.5,)
    assert reference_spec(3).d == 0.2 and reference_spec(4).d == 0.4
    assert all(reference_spec(t).innovation == EXP1 for t in range(1, 5))
    cfg = reference_config(3)
    assert cfg.sizes == (200, 1000, 5000) and cfg.replications == 2000
    assert REFERENCE_MSE[1][5000] == 0.298 and REFERENCE_MSE[2][200] == 1.800
    with pytest.raises(ValueError):
        reference_spec(5)


ROWS = [MseRow(200, 0.374, 1.2, 1.7, 0, 0.01), MseRow(1000, 0.113, 1.5, 1.7, 2, 0.004)]


def test_emit_csv():
    text = emit_table(ROWS[:1], "csv")
    lines = text.splitlines()
    assert lines == [",".join(COLUMNS), "200,0.374,1.2,1.7,0,0.01"]


def test_emit_json_round_trip():
    assert rows_from_json(emit_table(ROWS, "json")) == ROWS
    assert json.loads(emit_table(ROWS, "json"))["columns"] == list(COLUMNS)


def test_emit_markdown():
    assert emit_table(ROWS, "markdown") == \
        "| n | MSE(k_hat) |\n|---:|---:|\n| 200 | 0.374 |\n| 1000 | 0.113 |\n"


def test_emit_errors():
    with pytest.raises(ValueError):
        emit_table([], "csv")
    with pytest.raises(ValueError):
        emit_table(ROWS, "xlsx")


def test_worker_count(monkeypatch):
    monkeypatch.setenv("LPSKEW_WORKERS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("LPSKEW_WORKERS", "many")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.delenv("LPSKEW_WORKERS")
    assert worker_count() >= 1
    with pytest.raises(ValueError):
        worker_count(0)


CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize("table", [1, 2, 3, 4])
def test_shipped_study_configs_match_reference(table):
    assert load_config(CONFIG_DIR / f"study{table}.json") == reference_config(table, 200)
