import numpy as np
import pytest

from safebandit import cli
from safebandit.campaign import (CampaignConfig, build_eb_safety,
                                 geometry_report, load_config, parse_config,
                                 render_config, run_campaign, smoke_config)
from safebandit.errors import ConfigError, EmptySetError
from safebandit.geometry import save_polytope, vertices

from conftest import unit_square


class TestBuildEbSafety:
    def test_one_dimensional(self):
        poly = build_eb_safety([0.5])
        assert poly.n_rows == 2
        assert poly.contains(np.array([1.9]))
        assert not poly.contains(np.array([2.1]))

    def test_b1_vertices(self):
        poly = build_eb_safety([0.1, 0.1, 0.1])
        assert poly.n_rows == 8
        pts = np.array([v.point for v in vertices(poly)])
        expected = np.vstack([10.0 * np.eye(3), -10.0 * np.eye(3)])
        for e in expected:
            assert np.min(np.linalg.norm(pts - e, axis=1)) < 1e-9

    def test_membership_is_weighted_l1(self, rng):
        b = np.array([0.2, 0.05, 0.4])
        poly = build_eb_safety(b)
        for _ in range(300):
            y = rng.uniform(-25, 25, 3)
            assert poly.contains(y) == (np.abs(b * y).sum() <= 1.0 + 1e-12)

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ConfigError):
            build_eb_safety([0.1, 0.0])
        with pytest.raises(ConfigError):
            build_eb_safety([-0.1, 0.2])


class TestConfig:
    def test_round_trip(self):
        config = CampaignConfig()
        assert parse_config(render_config(config)) == config

    def test_round_trip_with_file_set_and_overrides(self):
        config = CampaignConfig(T=50, trials=2, mode="exact",
                                schedule="theory", box_half=(2.0, 2.0, 2.0),
                                sets=(("sq", "some/poly.txt"),
                                      ("b", (0.2, 0.2, 0.2))))
        assert parse_config(render_config(config)) == config

    def test_parse_errors(self):
        with pytest.raises(ConfigError):
            parse_config("what is this")
        with pytest.raises(ConfigError):
            parse_config("unknown_key = 3")
        with pytest.raises(ConfigError):
            parse_config("T = 10\nT = 20")
        with pytest.raises(ConfigError):
            parse_config("sets = a\n")  # missing set.a

    def test_validation(self):
        with pytest.raises(ConfigError):
            CampaignConfig(trials=0)
        with pytest.raises(ConfigError):
            CampaignConfig(schedule="sometimes")
        with pytest.raises(ConfigError):
            CampaignConfig(mode="both")


def test_trial_failure_identifies_seed(tmp_path):
    # an override beyond the horizon fails at trial time; the campaign
    # error names the failing seed
    from dataclasses import replace

    config = replace(smoke_config(out=str(tmp_path)), schedule="override:20")
    with pytest.raises(ConfigError, match="seed 20240"):
        run_campaign(config)


class TestGeometryReport:
    def test_unit_square_constants(self):
        report = geometry_report(unit_square())
        assert report["condition_constant"] == pytest.approx(1.0)
        assert report["diameter"] == pytest.approx(2 * np.sqrt(2))
        assert report["max_shrinkage_2"] == pytest.approx(1.0, abs=1e-9)
        assert report["max_shrinkage_inf"] == pytest.approx(1.0, abs=1e-9)

    def test_eb1_inf_shrinkage(self):
        report = geometry_report(build_eb_safety([0.1, 0.1, 0.1]))
        assert report["max_shrinkage_inf"] == pytest.approx(10 / 3, abs=1e-9)

    def test_empty_polytope_is_an_error(self):
        from safebandit.geometry import Polytope

        empty = Polytope(np.array([[1.0], [-1.0]]), np.array([-1.0, -1.0]))
        with pytest.raises(EmptySetError):
            geometry_report(empty)


@pytest.fixture(scope="module")
def smoke_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("smoke")
    summary = run_campaign(smoke_config(out=str(out)))
    return out, summary


class TestSmokeCampaign:

    def test_writes_expected_files(self, smoke_out):
        out, summary = smoke_out
        for name in ("b1", "b2", "b3"):
            assert (out / f"trial_{name}_0.csv").exists()
            assert (out / f"geometry_{name}.txt").exists()
            for norm in ("1", "2", "inf"):
                assert (out / f"sharpness_{name}_{norm}.csv").exists()
        assert (out / "summary.csv").exists()
        assert len(summary.sets) == 3

    def test_summary_schema_and_monotonicity(self, smoke_out):
        out, _ = smoke_out
        lines = (out / "summary.csv").read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header[:5] == ["set", "exploit_round", "mean_cum_regret",
                              "ci95", "n_trials"]
        by_set = {}
        for line in lines[1:]:
            fields = line.split(",")
            by_set.setdefault(fields[0], []).append(float(fields[2]))
        assert set(by_set) == {"b1", "b2", "b3"}
        for series in by_set.values():
            assert np.all(np.diff(series) >= -1e-12)

    def test_deterministic_summary_bytes(self, smoke_out, tmp_path):
        out, _ = smoke_out
        rerun = tmp_path / "rerun"
        run_campaign(smoke_config(out=str(rerun)))
        assert (rerun / "summary.csv").read_bytes() \
            == (out / "summary.csv").read_bytes()
        assert (rerun / "trial_b1_0.csv").read_bytes() \
            == (out / "trial_b1_0.csv").read_bytes()

    def test_geometry_report_files_parse(self, smoke_out):
        out, _ = smoke_out
        text = (out / "geometry_b1.txt").read_text()
        entries = dict(line.split(" = ") for line in text.strip().split("\n"))
        assert float(entries["max_shrinkage_inf"]) == pytest.approx(10 / 3)
        assert float(entries["condition_constant"]) == pytest.approx(2.0)


class TestCli:
    def test_geometry_subcommand(self, tmp_path, capsys):
        path = tmp_path / "square.txt"
        save_polytope(unit_square(), path)
        assert cli.main(["geometry", str(path)]) == 0
        printed = capsys.readouterr().out
        assert "condition_constant = 1.0" in printed

    def test_sharpness_curve_subcommand(self, tmp_path):
        path = tmp_path / "square.txt"
        save_polytope(unit_square(), path)
        out = tmp_path / "curve.csv"
        assert cli.main(["sharpness-curve", str(path), "--norm", "2",
                         "--points", "5", "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "delta,sharpness"
        assert len(lines) == 6

    def test_smoke_subcommand(self, tmp_path):
        out = tmp_path / "smoke"
        assert cli.main(["smoke", "--out", str(out)]) == 0
        assert (out / "summary.csv").exists()

    def test_run_with_config_and_overrides(self, tmp_path):
        config = smoke_config(out=str(tmp_path / "ignored"))
        config_path = tmp_path / "c.cfg"
        config_path.write_text(render_config(config))
        out = tmp_path / "actual"
        assert cli.main(["run", "--config", str(config_path),
                         "--out", str(out), "--trials", "2",
                         "--mode", "exact"]) == 0
        assert (out / "trial_b1_1.csv").exists()

    def test_bad_polytope_file_reports_error(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("2 2\n1 0 1\n")
        assert cli.main(["geometry", str(path)]) == 2
        assert "error" in capsys.readouterr().err

    def test_parse_failure_returns_error_code(self, tmp_path):
        config_path = tmp_path / "bad.cfg"
        config_path.write_text("nope")
        assert cli.main(["run", "--config", str(config_path)]) == 2


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")
