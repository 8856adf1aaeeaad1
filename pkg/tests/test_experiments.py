import json
import math

import numpy as np
import pytest

from sincspec import metrics
from sincspec.experiments import (
    ExperimentConfig,
    ExperimentReport,
    run_coverage,
    run_dof,
    run_figures,
    run_table2,
    run_table3,
    trial_spectra,
    wilson_interval,
)
from sincspec.sinc_operator import fit_decay, sinc_operator_spectrum

SMALL = dict(ms=(2, 5), n=60, quad_order=128)


class TestConfig:
    def test_rejects_m_above_n(self):
        with pytest.raises(ValueError, match="m"):
            ExperimentConfig(ms=(40,), n=30)

    def test_rejects_bad_values(self):
        for kw in ({"trials": 0}, {"n": 0}, {"xi": 0.0}, {"workers": 0}, {"ms": ()}):
            with pytest.raises(ValueError):
                ExperimentConfig(**kw)

    def test_echo_drops_workers(self):
        e = ExperimentConfig(workers=3).echo()
        assert "workers" not in e
        assert e["ms"] == [2.0, 4.0, 6.0, 10.0, 20.0]

    def test_power_defaults_to_n(self):
        assert ExperimentConfig(n=120, ms=(2,)).power() == 120.0
        assert ExperimentConfig(n=120, ms=(2,), p=3.0).power() == 3.0


class TestTrialSpectra:
    def test_shapes_and_trace(self):
        cfg = ExperimentConfig(**SMALL, trials=1)
        a, h = trial_spectra(cfg, 0, 5)
        assert len(a) == len(h) == 60
        # trace(A*A) = m and trace(H) = m as well
        assert math.fsum(a.values) == pytest.approx(5, rel=1e-12)
        assert math.fsum(h.values) == pytest.approx(5, rel=1e-12)

    def test_reproducible(self):
        cfg = ExperimentConfig(**SMALL, trials=1, seed=9)
        a1, _ = trial_spectra(cfg, 3, 2)
        a2, _ = trial_spectra(cfg, 3, 2)
        np.testing.assert_array_equal(a1.values, a2.values)


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert hi - 0.5 == pytest.approx(0.5 - lo)
    lo, hi = wilson_interval(100, 100)
    assert hi == pytest.approx(1.0)
    assert 0.95 < lo < 1.0


class TestTable2:
    @pytest.fixture(scope="class")
    @classmethod
    def report(cls):
        return run_table2(ExperimentConfig(**SMALL, trials=12, seed=3))

    def test_columns(self, report):
        assert report.columns == ["trial", "m", "n", "err_AH", "err_HQ", "err_AQ", "sqrt_m_over_n"]
        assert len(report.records) == 24

    def test_triangle_inequality(self, report):
        for r in report.records:
            assert r["err_AQ"] <= r["err_AH"] + r["err_HQ"] + 1e-12

    def test_triangle_inequality_other_seeds(self):
        for seed in (0, 17):
            rep = run_table2(ExperimentConfig(ms=(3,), n=40, quad_order=128, trials=5, seed=seed))
            assert all(r["err_AQ"] <= r["err_AH"] + r["err_HQ"] + 1e-12 for r in rep.records)

    def test_aggregates(self, report):
        agg = report.aggregates["5"]
        vals = [r["err_AQ"] for r in report.records if r["m"] == 5]
        assert agg["err_AQ"]["median"] == pytest.approx(np.median(vals))
        assert agg["err_AQ"]["min"] <= agg["err_AQ"]["median"] <= agg["err_AQ"]["max"]
        assert agg["sqrt_m_over_n"] == pytest.approx(math.sqrt(5 / 60))
        assert agg["trials"] == 12

    def test_audit_detects_tampering(self, report):
        bad = ExperimentReport(report.experiment, report.config, [dict(r) for r in report.records],
                               json.loads(json.dumps(report.aggregates)), report.provenance)
        bad.audit()
        bad.records[0]["err_AQ"] += 1.0
        with pytest.raises(RuntimeError, match="aggregates"):
            bad.audit()

    def test_provenance(self, report):
        assert report.provenance["config"]["seed"] == 3
        assert "code_version" in report.provenance
        assert report.provenance["wall_time_s"] >= 0
        assert "wall_time_s" not in report.to_dict()["provenance"]
        assert "wall_time_s" in report.to_dict(include_timing=True)["provenance"]

    def test_worker_count_invariance(self, report):
        par = run_table2(ExperimentConfig(**SMALL, trials=12, seed=3, workers=2))
        assert par.to_csv() == report.to_csv()
        assert par.to_json() == report.to_json()

    def test_json_round_trip(self, report):
        back = ExperimentReport.from_json(report.to_json())
        assert back.to_json() == report.to_json()
        assert back.config == report.config
        back.audit()

    def test_csv_values_round_trip(self, report):
        lines = report.to_csv().splitlines()
        assert lines[0] == ",".join(report.columns)
        first = lines[1].split(",")
        assert float(first[3]) == report.records[0]["err_AH"]

    def test_empty_report_csv_is_header_only(self):
        rep = ExperimentReport("table2", ExperimentConfig(**SMALL), [])
        assert rep.to_csv() == "trial,m,n,err_AH,err_HQ,err_AQ,sqrt_m_over_n\n"


class TestCoverage:
    @pytest.fixture(scope="class")
    @classmethod
    def report(cls):
        return run_coverage(ExperimentConfig(ms=(4,), n=120, quad_order=128, trials=100, seed=0))

    def test_requires_100_trials(self):
        with pytest.raises(ValueError, match="100"):
            run_coverage(ExperimentConfig(ms=(2,), n=30, trials=99))

    def test_monotone_in_factor(self, report):
        for name in metrics.BOUND_NAMES:
            f = report.aggregates["4"][name]["by_factor"]
            cov = [f[k]["coverage"] for k in ("1", "0.5", "0.25")]
            assert cov == sorted(cov, reverse=True)

    def test_guaranteed_levels(self, report):
        agg = report.aggregates["4"]
        g = 1 - 2 * math.exp(-2 * 1.63**2)
        assert agg["theorem2"]["guaranteed"] == pytest.approx(g)
        assert agg["prop2"]["guaranteed"] == pytest.approx(1 - math.exp(-2 * 1.63**2))
        for name in metrics.BOUND_NAMES:
            assert not agg[name]["flagged"]

    def test_wilson_brackets_coverage(self, report):
        for name in metrics.BOUND_NAMES:
            f = report.aggregates["4"][name]["by_factor"]["0.5"]
            assert f["wilson_low"] <= f["coverage"] <= f["wilson_high"]

    def test_bound_columns(self, report):
        r = report.records[0]
        assert r["bound_theorem2"] == pytest.approx(2 * 4 * (math.sqrt(2) * 1.63 + 1) / math.sqrt(120))
        assert r["dist_AQ"] <= r["dist_AH"] + r["dist_HQ"] + 1e-12

    def test_threshold_row_is_exact(self):
        # at the 80% row, n/m = 26 puts the relative bound at sqrt(m)
        xi = metrics.xi_for_level(0.8)
        m = 4
        b = metrics.concentration_bounds(metrics.ConcentrationQuery(xi, m, 26 * m)).theorem2
        assert b <= math.sqrt(m)
        b25 = metrics.concentration_bounds(metrics.ConcentrationQuery(xi, m, 25 * m)).theorem2
        assert b25 > math.sqrt(m)


class TestTable3:
    @pytest.fixture(scope="class")
    @classmethod
    def report(cls):
        return run_table3(ExperimentConfig(ms=(2, 4, 10), n=300, trials=8, seed=0))

    def test_tilde_and_errors(self, report):
        agg = report.aggregates
        assert agg["2"]["C_tilde"] == pytest.approx(2 * math.log(45000))
        r = report.records[0]
        assert r["E_m"] == pytest.approx(abs(r["C_m"] - r["C_tilde"]))
        assert r["Er_m"] == pytest.approx(r["E_m"] / r["C_m"])

    def test_capacity_below_jensen_bound(self, report):
        # concavity with sum(lambda) = m over n terms gives C <= n log(1 + p)
        for r in report.records:
            assert r["C_m"] <= r["n"] * math.log1p(r["p"]) + 1e-9
            assert r["C_m"] > r["C_tilde"]

    def test_relative_error_trend(self, report):
        er = [report.aggregates[k]["Er_m"]["mean"] for k in ("2", "4", "10")]
        assert er[0] > er[1] > er[2]
        assert 0.16 <= report.aggregates["10"]["Er_m"]["mean"] <= 0.22

    def test_band(self, report):
        assert report.aggregates["2"]["band_xi"] == pytest.approx(1.63 * math.log1p(300 * 300) / math.sqrt(300))


class TestFigures:
    @pytest.fixture(scope="class")
    @classmethod
    def report(cls):
        return run_figures(ExperimentConfig(ms=(10,), n=300, trials=4, seed=0))

    def test_row_count(self, report):
        assert len(report.records) == 4 * 50

    def test_q_column_deterministic(self, report):
        cols = [np.array([r["lambda_Q"] for r in report.records if r["trial"] == t]) for t in range(4)]
        for c in cols[1:]:
            np.testing.assert_array_equal(c, cols[0])

    def test_significant_eigenvalues(self, report):
        agg = report.aggregates["10"]
        assert abs(agg["count_AA_above_half"]["median"] - 10) <= 2
        assert agg["count_Q_above_half"] == 10

    def test_log_columns(self, report):
        for r in report.records[:50]:
            if r["lambda_Q"] > 0:
                assert r["log_Q"] == pytest.approx(math.log(r["lambda_Q"]))
            else:
                assert r["log_Q"] is None

    def test_decay_consistency(self, report):
        fit = fit_decay(sinc_operator_spectrum(10, 512), 10)
        assert report.aggregates["10"]["decay_eta"] == fit.eta
        lq = np.array([r["log_Q"] for r in report.records[:50]])
        lo, hi = fit.fit_range
        slope = np.polyfit(np.arange(lo, hi + 1), lq[lo:hi + 1], 1)[0]
        assert slope == pytest.approx(-fit.eta / math.log(10), rel=1e-8)

    def test_no_decay_fit_below_three(self):
        rep = run_figures(ExperimentConfig(ms=(2,), n=60, quad_order=128, trials=1))
        assert "decay_eta" not in rep.aggregates["2"]


class TestDof:
    @pytest.fixture(scope="class")
    @classmethod
    def report(cls):
        return run_dof(ExperimentConfig(ms=(10,), n=300, trials=30, seed=0))

    def test_requires_30_trials(self):
        with pytest.raises(ValueError, match="30"):
            run_dof(ExperimentConfig(ms=(2,), n=30, trials=29))

    def test_monotone_in_alpha(self, report):
        for e in ("0.25", "0.5", "0.75"):
            r = report.aggregates["10"][e]["randomized"]
            for key in ("deg_H", "deg_AA"):
                vals = [r[a][key] for a in ("0.8", "0.9", "0.99")]
                assert vals == sorted(vals)

    def test_matches_direct_definition(self, report):
        cfg = report.config
        H = [trial_spectra(cfg, t, 10)[1] for t in range(cfg.trials)]
        agg = report.aggregates["10"]["0.5"]["randomized"]["0.9"]
        assert agg["deg_H"] == metrics.deg_randomized(H, 0.5, 0.9)
        assert 8 <= agg["deg_H"] <= 12
        assert agg["dev_H"] == agg["deg_H"] - 10

    def test_operator_degrees(self, report):
        e = report.aggregates["10"]["0.5"]
        assert e["deg_inf_Q"] == 10
        assert e["deg_2_Q"] == metrics.deg_2(sinc_operator_spectrum(10, 512), 0.5)

    @pytest.mark.parametrize("m", range(2, 41))
    def test_deg_inf_half_near_m(self, m):
        q = sinc_operator_spectrum(m, max(512, 4 * m + 60))
        assert abs(metrics.deg_inf(q, 0.5) - m) <= 1
