"""Tests for the experiment runners at small sizes."""

import pytest

from tensor_mp.core.errors import PreconditionError
from tensor_mp.harness.config import build_config
from tensor_mp.harness.logging import ExperimentLogger
from tensor_mp.harness.runner import (
    execute,
    run_conditions,
    run_esp_lln,
    run_gamma,
    run_mp_esd,
    run_qform_var,
)


@pytest.fixture
def log():
    return ExperimentLogger("ERROR")


def _small_mp_esd(**overrides):
    values = {"n": 8, "d": 2, "N": 200, "reps": 2, "bins": 10}
    values.update(overrides)
    return build_config("mp-esd", values)


class TestMpEsd:
    def test_rows_and_summary(self, log):
        report = run_mp_esd(_small_mp_esd(), log)
        assert [row["replicate"] for row in report.rows] == [0, 1]
        assert report.summary["p"] == 28
        assert report.summary["rho"] == pytest.approx(28 / 200)
        hist = report.summary["histogram"]
        assert len(hist["edges"]) == 11
        assert sum(hist["counts"]) + hist["below"] + hist["above"] == 2 * 28
        assert len(hist["mp_density_at_centers"]) == 10

    def test_small_p_warning(self, log):
        report = run_mp_esd(_small_mp_esd(), log)
        assert any("p = 28" in w for w in report.warnings)

    def test_rademacher_trace(self, log):
        # ||x||^2 = p for Rademacher entries, so tr(Sigma) / p = 1
        report = run_mp_esd(_small_mp_esd(), log)
        for row in report.rows:
            assert row["trace_over_p"] == pytest.approx(1.0, rel=1e-12)

    def test_byte_identical_reruns(self, log):
        config = _small_mp_esd(dist="gaussian")
        assert run_mp_esd(config, log).to_json() == run_mp_esd(config, log).to_json()

    def test_thread_count_does_not_change_report(self, log):
        one = run_mp_esd(_small_mp_esd(N=700, threads=1), log)
        four = run_mp_esd(_small_mp_esd(N=700, threads=4), log)
        assert one.to_json() == four.to_json()

    def test_rank_deficient_ratio(self, log):
        config = build_config(
            "mp-esd", {"n": 30, "d": 2, "N": 145, "dist": "gaussian", "reps": 1}
        )
        report = run_mp_esd(config, log)
        row = report.rows[0]
        assert report.summary["rho"] == pytest.approx(3.0)
        assert row["zero_fraction"] == pytest.approx(2.0 / 3.0)
        assert row["lambda_min"] == 0.0
        assert row["ks"] < 0.1
        assert report.summary["histogram"]["below"] == 0

    def test_zero_tolerance_disabled(self, log):
        values = {"n": 30, "d": 2, "N": 145, "dist": "gaussian", "zero_tol": 0.0}
        row = run_mp_esd(build_config("mp-esd", values), log).rows[0]
        assert row["zero_fraction"] < 2.0 / 3.0


class TestQformVar:
    def test_hypothesis_failures_are_case_errors(self, log):
        config = build_config(
            "qform-var",
            {
                "n": 16,
                "d": 2,
                "dist": "gaussian",
                "matrix": ["identity", "projection:0.5"],
                "reps": 200,
            },
        )
        report = run_qform_var(config, log)
        assert report.rows == []
        assert [e.kind for e in report.errors] == ["precondition", "precondition"]
        assert "n ≥ 16d violated (16 < 32)" in report.errors[0].error
        assert "2K d² ≤ n violated (24 > 16)" in report.errors[1].error
        assert report.summary["cases_evaluated"] == 0

    def test_identity_row(self, log):
        config = build_config(
            "qform-var",
            {"n": 32, "d": 2, "dist": "gaussian", "matrix": ["identity"], "reps": 2000},
        )
        report = run_qform_var(config, log)
        (row,) = report.rows
        assert row["p"] == 496
        assert row["exact_variance"] == pytest.approx(496 * 128)
        assert row["bound_ok"] and row["sandwich_ok"]
        assert report.summary["all_bound_ok"]

    def test_dense_cap_is_case_error(self, log):
        config = build_config(
            "qform-var",
            {"n": 48, "d": 3, "matrix": ["zero-diag-signs"], "reps": 200},
        )
        report = run_qform_var(config, log)
        assert report.errors[0].kind == "resource_cap"

    def test_inadmissible_cell_fails_before_dense_cap(self, log):
        config = build_config(
            "qform-var",
            {"n": 48, "d": 3, "matrix": ["projection:0.5"], "reps": 200},
        )
        (error,) = run_qform_var(config, log).errors
        assert error.kind == "precondition"
        assert "2K d² ≤ n violated (54 > 48)" in error.error


class TestEspLln:
    def test_rows(self, log):
        config = build_config("esp-lln", {"n_grid": "40,80", "reps": 4})
        report = run_esp_lln(config, log)
        assert [(row["n"], row["d"]) for row in report.rows] == [(40, 3), (80, 3)]
        assert report.summary["maclaurin_violations"] == 0
        assert report.summary["saddle_fallbacks"] == 0
        for row in report.rows:
            assert set(row["log_u_gap"]) == {"median", "q1", "q3"}

    def test_order_is_clamped_below_n(self, log):
        config = build_config(
            "esp-lln", {"n_grid": "2,3", "d_rule": "const:9", "reps": 1}
        )
        report = run_esp_lln(config, log)
        assert [row["d"] for row in report.rows] == [1, 2]


class TestGamma:
    def test_default_sweep(self, log):
        report = run_gamma(build_config("gamma"), log)
        summary = report.summary
        assert summary["exact_equals_brute_all"]
        assert summary["exact_le_bound_all"]
        assert summary["s_gt_t_all_zero"]
        assert summary["brute_cells"] > 0 and summary["skipped"] > 0
        assert report.errors == []

    def test_skipped_rows_name_the_reason(self, log):
        report = run_gamma(build_config("gamma", {"n_max": 3, "d_max": 2}), log)
        skipped = [row for row in report.rows if "skipped" in row]
        assert {"n": 1, "d": 1, "t": 0} == {k: skipped[0][k] for k in ("n", "d", "t")}


class TestConditions:
    def test_gaussian_default(self, log):
        report = run_conditions(build_config("conditions"), log)
        assert [row["d"] for row in report.rows] == [2, 4, 10, 27]
        assert report.summary["both_vanishing"]
        assert all(row["method"] == "analytic" for row in report.rows)

    def test_z_law_takes_precedence(self, log):
        config = build_config("conditions", {"z_dist": "one", "n_grid": "10,20"})
        report = run_conditions(config, log)
        assert report.summary["law"] == "one"


class TestExecute:
    def test_timing(self, log):
        config = build_config("gamma", {"n_max": 4, "bound_n_max": 4, "timing": True})
        report = execute("gamma", run_gamma, config, log)
        assert report.wall_time_s is not None and report.wall_time_s >= 0
        assert "wall_time_s" in report.to_json()

    def test_no_timing_by_default(self, log):
        config = build_config("gamma", {"n_max": 4, "bound_n_max": 4})
        assert execute("gamma", run_gamma, config, log).wall_time_s is None

    def test_failures_propagate(self, log):
        def broken(config, log):
            raise PreconditionError("nope")

        with pytest.raises(PreconditionError):
            execute("gamma", broken, build_config("gamma"), log)
