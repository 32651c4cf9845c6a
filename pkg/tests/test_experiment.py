import math

import numpy as np
import pytest

from peakfdr.experiment import (
    CSV_COLUMNS,
    METHODS,
    TrialConfig,
    classify_detections,
    csv_rows,
    run_config_trials,
    run_trial,
    summarize,
    write_grid_csv,
    write_grid_sidecar,
)
from peakfdr.signal_model import SignalSpec


def _config(**overrides):
    base = dict(a=5.0, b=3.0, sigma=1.0, nu=4.0, gamma=4.0, d=2,
                n_trials=5, base_seed=77)
    base.update(overrides)
    return TrialConfig(**base)


class TestClassifyDetections:
    SPEC = SignalSpec(5.0, 3.0, 3.0, (100.0,))  # support [91, 109]

    def test_inside_support_is_tp(self):
        tp, fp, hits = classify_detections([108], self.SPEC)
        assert (tp, fp, hits) == (1, 0, 1)

    def test_boundary_inclusive(self):
        tp, fp, hits = classify_detections([91, 109], self.SPEC)
        assert (tp, fp, hits) == (2, 0, 1)

    def test_outside_is_fp(self):
        tp, fp, hits = classify_detections([110], self.SPEC)
        assert (tp, fp, hits) == (0, 1, 0)

    def test_duplicates_count_individually(self):
        tp, fp, hits = classify_detections([99, 101], self.SPEC)
        assert (tp, fp, hits) == (2, 0, 1)

    def test_multiple_supports(self):
        spec = SignalSpec(5.0, 3.0, 3.0, (100.0, 300.0))
        tp, fp, hits = classify_detections([99, 301, 200], spec)
        assert (tp, fp, hits) == (2, 1, 2)


class TestRunTrial:
    def test_deterministic(self):
        cfg = _config()
        a = run_trial(cfg, 3)
        b = run_trial(cfg, 3)
        assert a == b

    def test_methods_present(self):
        out = run_trial(_config(), 0)
        assert set(out) == set(METHODS)
        for outcome in out.values():
            assert outcome.r >= outcome.v >= 0

    def test_null_config_r_equals_v(self):
        out = run_trial(_config(n_signals=0), 1)
        for outcome in out.values():
            assert outcome.r == outcome.v
            assert outcome.n_signals_hit == 0


class TestRunConfigTrials:
    def test_parallel_agnostic(self):
        cfg = _config(n_trials=6)
        serial = run_config_trials(cfg, parallel=1)
        pooled = run_config_trials(cfg, parallel=2)
        for method in METHODS:
            assert np.array_equal(serial.v[method], pooled.v[method])
            assert np.array_equal(serial.r[method], pooled.r[method])
            assert np.array_equal(serial.hits[method], pooled.hits[method])

    def test_single_trial_summary_equals_ratios(self):
        cfg = _config(n_trials=1)
        records = run_config_trials(cfg)
        summary = summarize(records)
        for method in METHODS:
            met = summary.per_method[method]
            assert met.power == records.hits[method][0] / cfg.n_signals
            assert met.fdr == records.v[method][0] / max(records.r[method][0], 1)
            assert met.power_stderr == 0.0

    def test_stderr_clt_scaling(self):
        small = summarize(run_config_trials(_config(n_trials=200)))
        large = summarize(run_config_trials(_config(n_trials=400)))
        for method in METHODS:
            ratio = (
                small.per_method[method].power_stderr
                / large.per_method[method].power_stderr
            )
            assert ratio == pytest.approx(math.sqrt(2.0), rel=0.20)

    def test_metrics_in_unit_interval(self):
        summary = summarize(run_config_trials(_config(n_trials=20)))
        for method in METHODS:
            met = summary.per_method[method]
            assert 0.0 <= met.power <= 1.0
            assert 0.0 <= met.fdr <= 1.0
            assert 0.0 <= met.fdr_conditional <= 1.0
            assert 0.0 <= met.prop_any_rejection <= 1.0


class TestSerialization:
    def test_csv_contract(self, tmp_path):
        summary = summarize(run_config_trials(_config(n_trials=2)))
        path = tmp_path / "grid.csv"
        write_grid_csv([summary], path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 3  # header + one row per method
        first = lines[1].split(",")
        assert len(first) == len(CSV_COLUMNS)
        assert first[CSV_COLUMNS.index("method")] == "one-sample"
        assert lines[2].split(",")[CSV_COLUMNS.index("method")] == "two-sample"

    def test_rows_parse_back(self):
        summary = summarize(run_config_trials(_config(n_trials=2)))
        for row in csv_rows(summary):
            fields = row.split(",")
            assert float(fields[CSV_COLUMNS.index("power")]) >= 0.0
            assert int(fields[CSV_COLUMNS.index("n_trials")]) == 2

    def test_sidecar(self, tmp_path):
        import json

        summary = summarize(run_config_trials(_config(n_trials=2)))
        path = tmp_path / "grid.sidecar.json"
        write_grid_sidecar([summary], path)
        payload = json.loads(path.read_text())
        assert payload["configs"][0]["base_seed"] == 77
        assert "one-sample" in payload["metrics"][0]


class TestTrialConfigValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            _config(n_trials=0)
        with pytest.raises(ValueError):
            _config(alpha=1.0)
        with pytest.raises(ValueError):
            _config(b=0.0)
