import math

import pytest

from hdhn.cli import (
    EXIT_BAD_INPUT,
    EXIT_CHECK_FAILED,
    EXIT_OK,
    SweepSpec,
    apply_sweep_value,
    main,
)
from hdhn.model import dump_config, default_two_tier_config


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "two_tier.toml"
    path.write_text(dump_config(default_two_tier_config()))
    return str(path)


@pytest.fixture
def bad_config_path(tmp_path):
    cfg = default_two_tier_config().replace_tier(0, pathloss_exp=2.0)
    path = tmp_path / "bad.toml"
    path.write_text(dump_config(cfg))
    return str(path)


class TestCompute:
    def test_throughput_csv(self, config_path, capsys):
        assert main(["compute", config_path, "--metric", "throughput"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "quantity,tier,value"
        rows = dict()
        for line in lines[1:]:
            parts = line.split(",")
            rows[(parts[0], parts[1])] = float(parts[2])
        assert rows[("tier_throughput", "0")] == pytest.approx(5.950589e-4,
                                                               rel=1e-5)
        assert rows[("total_throughput", "")] == pytest.approx(
            rows[("tier_throughput", "0")] + rows[("tier_throughput", "1")])
        assert rows[("cell_throughput", "")] == pytest.approx(
            rows[("total_throughput", "")] / 2e-3)

    def test_stp_value(self, config_path, capsys):
        code = main(["compute", config_path, "--metric", "stp", "--tier", "0",
                     "--mode", "fd", "--direction", "uplink"])
        assert code == EXIT_OK
        line = capsys.readouterr().out.strip().splitlines()[1]
        value = float(line.split(",")[5])
        assert 0.0 <= value <= 1.0
        assert value == pytest.approx(0.1071326360, rel=1e-8)

    def test_laplace_requires_arguments(self, config_path, capsys):
        code = main(["compute", config_path, "--metric", "laplace",
                     "--tier", "0"])
        assert code == EXIT_BAD_INPUT

    def test_laplace_value(self, config_path, capsys):
        code = main(["compute", config_path, "--metric", "laplace",
                     "--tier", "0", "--mode", "fd", "--s", "1000",
                     "--d-min", "30"])
        assert code == EXIT_OK
        line = capsys.readouterr().out.strip().splitlines()[1]
        assert float(line.split(",")[5]) == pytest.approx(0.892447331,
                                                          rel=1e-8)

    def test_invalid_config_exits_2(self, bad_config_path, capsys):
        code = main(["compute", bad_config_path, "--metric", "throughput"])
        assert code == EXIT_BAD_INPUT
        assert "pathloss_exp" in capsys.readouterr().err

    def test_unparseable_config_exits_2(self, tmp_path, capsys):
        path = tmp_path / "broken.toml"
        path.write_text("{nope")
        assert main(["compute", str(path), "--metric",
                     "throughput"]) == EXIT_BAD_INPUT

    def test_simulated_stp_columns(self, config_path, capsys):
        code = main(["compute", config_path, "--metric", "stp", "--tier", "0",
                     "--mode", "hd", "--direction", "downlink", "--simulate",
                     "--realizations", "300", "--seed", "5"])
        assert code == EXIT_OK
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0].endswith("sim_mean,sim_stderr,sim_n")
        sim_mean = float(out[1].split(",")[8])
        assert 0.0 <= sim_mean <= 1.0


class TestFigure:
    def test_fig8_extrema(self, config_path, tmp_path, capsys):
        out = tmp_path / "figs"
        code = main(["figure", "fig8", config_path, "--out", str(out),
                     "--grid-step", "0.25"])
        assert code == EXIT_OK
        rows = (out / "fig8_extrema.csv").read_text().strip().splitlines()
        extrema = {r.split(",")[0]: r.split(",")[1:3] for r in rows[1:]}
        assert extrema["max"] == ["1.0", "0.0"]
        assert extrema["min"] == ["0.0", "1.0"]

    def test_outputs_byte_identical_across_runs(self, config_path, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert main(["figure", "fig3", config_path, "--out",
                         str(out)]) == EXIT_OK
        for path1 in sorted(out1.iterdir()):
            path2 = out2 / path1.name
            assert path1.read_bytes() == path2.read_bytes()

    def test_fig5_high_density_ratio_monotone(self, config_path, tmp_path):
        out = tmp_path / "figs"
        assert main(["figure", "fig5", config_path, "--out",
                     str(out)]) == EXIT_OK
        rows = (out / "fig5_lam2_over_lam1_4.csv").read_text().splitlines()[1:]
        ratios = [float(r.split(",")[1]) for r in rows]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[0] == pytest.approx(1.0)

    def test_fig7_best_duplex_set_shifts_with_density(self, config_path,
                                                      tmp_path):
        out = tmp_path / "figs"
        assert main(["figure", "fig7", config_path, "--out",
                     str(out)]) == EXIT_OK
        best = {}
        for line in (out / "fig7_best.csv").read_text().splitlines()[1:]:
            ratio, tag, _ = line.split(",")
            best[float(ratio)] = tag
        assert best[1.0] == "fd_hd"
        assert best[10.0] == "fd_fd"

    def test_fig10_best_set_tracks_total_density(self, config_path, tmp_path):
        out = tmp_path / "figs"
        assert main(["figure", "fig10", config_path, "--out",
                     str(out)]) == EXIT_OK
        for lam_t, expected in (("0.002", "fd_hd"), ("0.01", "fd_fd")):
            rows = (out / f"fig10_lamt{lam_t}_best.csv").read_text()
            tags = {line.split(",")[1] for line in rows.splitlines()[1:]}
            assert tags == {expected}

    def test_svg_rendering(self, config_path, tmp_path):
        out = tmp_path / "figs"
        assert main(["figure", "fig8", config_path, "--out", str(out),
                     "--grid-step", "0.5", "--svg"]) == EXIT_OK
        svg = (out / "fig8.svg").read_text()
        assert svg.startswith("<svg") and svg.endswith("</svg>")

    def test_single_tier_config_rejected(self, tmp_path):
        from hdhn.model import HdhnConfig, TierParams

        cfg = HdhnConfig([TierParams(1e-3, 4.0, 1.0, 30.0, 3.0)])
        path = tmp_path / "one.toml"
        path.write_text(dump_config(cfg))
        assert main(["figure", "fig8", str(path), "--out",
                     str(tmp_path / "f")]) == EXIT_BAD_INPUT


class TestValidateCommand:
    def test_quick_passes(self, config_path, capsys):
        assert main(["validate", config_path, "--quick"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "all" in out and "passed" in out
        assert "FAIL" not in out

    def test_impossible_tolerance_fails(self, config_path, capsys):
        assert main(["validate", config_path, "--quick", "--tol",
                     "0"]) == EXIT_CHECK_FAILED
        assert "FAIL" in capsys.readouterr().out

    def test_invalid_config_exits_2(self, bad_config_path):
        assert main(["validate", bad_config_path,
                     "--quick"]) == EXIT_BAD_INPUT


class TestSweepSpec:
    def test_targets(self, config_path):
        cfg = default_two_tier_config()
        spec = SweepSpec("self_ic_db", 0, (-30.0,), frozenset({"throughput"}))
        assert apply_sweep_value(cfg, spec, -30.0).tiers[0].self_ic_db == -30.0
        spec = SweepSpec("density_ratio", 0, (2.0,), frozenset({"stp"}))
        out = apply_sweep_value(cfg, spec, 2.0)
        assert out.tiers[0].density == pytest.approx(2.0 * cfg.tiers[1].density)
        spec = SweepSpec("power", 1, (9.0,), frozenset({"throughput"}))
        assert apply_sweep_value(cfg, spec, 9.0).tiers[1].user_power == 9.0

    def test_empty_values_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec("density", 0, (), frozenset({"stp"}))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec("density", 0, (math.inf,), frozenset({"stp"}))
