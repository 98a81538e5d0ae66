"""Smoke tests for the python bindings: panel generation, metrics, a tiny
end-to-end grid run, and the Friedman helper."""

import json
import math
import os

import pytest

import retrainbench as rb


def test_synthetic_panel_shape_and_determinism():
    a = rb.synthetic_panel(n_series=5, length=60, frequency="weekly", rng_seed=42)
    b = rb.synthetic_panel(n_series=5, length=60, frequency="weekly", rng_seed=42)
    assert a.n_series == 5
    assert a.n_timestamps == 60
    assert a == b
    assert a.series_ids[0] == "S1"
    assert all(v >= 0 for v in a.values(0))


def test_csv_round_trip(tmp_path):
    panel = rb.synthetic_panel(n_series=3, length=40, zero_inflation=0.3, rng_seed=1)
    path = os.fspath(tmp_path / "demand.csv")
    rb.write_demand_csv(panel, path)
    again = rb.ingest_csv(path, frequency="weekly")
    assert again.n_series == 3
    assert again.values(1) == panel.values(1)


def test_metrics_match_a_hand_case():
    # train=[1,2,3,4], s=1 -> denominator 1; errors (1, 2) -> mean sq 2.5
    value = rb.rmsse([5.0, 6.0], [4.0, 4.0], [1.0, 2.0, 3.0, 4.0], 1)
    assert value == pytest.approx(math.sqrt(2.5), rel=1e-12)
    assert rb.sql([5.0], [4.0], 0.5, [0.0, 1.0], 1) == pytest.approx(0.5)
    with pytest.raises(rb.EngineError):
        rb.rmsse([1.0], [1.0], [2.0, 2.0, 2.0], 1)


def test_seasonal_naive_and_origins():
    panel = rb.synthetic_panel(n_series=1, length=30, base_rate=9.0, rng_seed=3)
    forecast = rb.seasonal_naive(panel, 0, 19, 5, 1)
    assert forecast == [panel.values(0)[19]] * 5
    origins = rb.enumerate_origins(horizon=13, test_size=52, step_size=1, n_total=260)
    assert len(origins) == 40


def test_friedman_helper():
    table = [[1.0, 2.0, 3.0] for _ in range(10)]
    result = rb.friedman_nemenyi(table, alpha=0.05)
    assert result.k == 3
    assert result.mean_ranks == [1.0, 2.0, 3.0]
    assert result.p_value < 0.01


def test_cost_helper():
    assert rb.cost_of_ct(7200.0, rate_per_hour=3.5, n_series_dataset=10,
                         n_series_target=10) == 7.0


def test_end_to_end_run(tmp_path):
    config = {
        "dataset": {
            "source": "synthetic",
            "frequency": "weekly",
            "min_obs": 80,
            "synthetic": {"n_series": 5, "length": 100, "base_rate": 6.0,
                          "zero_inflation": 0.2, "rng_seed": 11},
        },
        "features": {"lags": [1, 2], "rolling_windows": [4], "calendar_fields": ["week"]},
        "models": {
            "families": ["pooled_linear", "seasonal_naive"],
            "rng_seed": 4,
            "quantile_levels": [0.25, 0.5, 0.75],
            "pooled_linear": {"quantile_epochs": 10},
        },
        "backtest": {"horizon": 4, "test_size": 12, "retrain_set": [1, 4, 12],
                     "baseline_r": 1, "season": 1},
    }
    out_dir = os.fspath(tmp_path / "out")
    summary = rb.run_config(json.dumps(config), out_dir)
    assert summary["n_cells"] == 6
    assert summary["n_failed"] == 0
    for name in ["forecasts.csv", "metrics.csv", "stats.json", "cost.csv", "optimal.csv"]:
        assert (tmp_path / "out" / name).exists()

    files = rb.write_report(out_dir)
    assert "rel_rmsse.svg" in files

    with open(tmp_path / "out" / "metrics.csv") as fh:
        header = fh.readline().strip().split(",")
        assert header[:4] == ["model", "r", "mean_rmsse", "mean_smql"]
        baseline_rows = [line.split(",") for line in fh if line.split(",")[1] == "1"]
    for row in baseline_rows:
        assert float(row[5]) == 1.0  # rel_rmsse at the baseline


def test_validation_errors_are_engine_errors():
    with pytest.raises(rb.EngineError):
        rb.validate_config(json.dumps({"dataset": {"frequency": "hourly"}}))
