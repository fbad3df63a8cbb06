"""End-to-end checks of the command line: exit codes, files, reproducibility."""

import json
import os

import pytest

from smallball.cli import main


def run_cli(argv, monkeypatch, tmp_path, env_seed=None):
    monkeypatch.chdir(tmp_path)
    if env_seed is None:
        monkeypatch.delenv("SMALLBALL_SEED", raising=False)
    else:
        monkeypatch.setenv("SMALLBALL_SEED", str(env_seed))
    return main(argv)


class TestExitCodes:
    def test_no_subcommand_is_usage_error(self, monkeypatch, tmp_path, capsys):
        assert run_cli([], monkeypatch, tmp_path) == 1
        assert "subcommand" in capsys.readouterr().err

    def test_unknown_process(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["diverge", "--process", "wat", "--function", "square",
             "--epsilon", "0.5"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1
        assert "unknown process" in capsys.readouterr().err

    def test_unknown_function(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["diverge", "--process", "ou", "--function", "nope",
             "--epsilon", "0.5"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1
        assert "unknown function" in capsys.readouterr().err

    def test_missing_required_flag(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["diverge", "--process", "ou", "--function", "square"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1
        assert "--epsilon" in capsys.readouterr().err

    def test_module_precondition_maps_to_exit_1(
        self, monkeypatch, tmp_path, capsys
    ):
        # fbm is not stationary, so the time-average command rejects it
        code = run_cli(
            ["ergodic", "--process", "fbm", "--hurst", "0.5",
             "--function", "square", "--replicates", "4"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1
        assert "stationary" in capsys.readouterr().err

    def test_failed_check_exits_2_and_still_writes(
        self, monkeypatch, tmp_path, capsys
    ):
        # two replicates make the median ladder noisy enough to dip
        code = run_cli(
            ["selfsim", "--replicates", "2", "--seed", "0", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 2
        assert "check failed" in capsys.readouterr().err
        assert (tmp_path / "selfsim.csv").exists()
        assert (tmp_path / "selfsim.summary.json").exists()
        assert (tmp_path / "selfsim.manifest").exists()

    def test_bad_flag_value(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["simulate", "--process", "ou", "--n", "sixteen"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1
        assert "bad value" in capsys.readouterr().err


class TestDivergeCommand:
    def test_ou_square_reference_run(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["diverge", "--process", "ou", "--theta", "1", "--function",
             "poly:0,0,1", "--epsilon", "0.5", "--seed", "7",
             "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "pass" in out
        summary = json.loads((tmp_path / "diverge.summary.json").read_text())
        assert 0.95 <= summary["slope"] <= 1.05
        assert summary["pass_divergence"] is True

    def test_csv_header_and_shape(self, monkeypatch, tmp_path):
        run_cli(
            ["diverge", "--process", "ou", "--function", "square",
             "--epsilon", "0.5", "--replicates", "3", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        lines = (tmp_path / "diverge.csv").read_text().splitlines()
        assert lines[0] == "T,I_T,replicate"
        assert len(lines) == 1 + 3 * 10  # replicates x default ladder


class TestOracleCommand:
    def test_a3_prints_gamma_value(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["oracle", "--lemma", "a3", "--hurst", "0.75"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "1.7724" in out
        assert not (tmp_path / "oracle.png").exists()

    def test_a1_closed_form_agrees(self, monkeypatch, tmp_path):
        code = run_cli(
            ["oracle", "--lemma", "a1", "--hurst", "0.7", "--x", "2.0",
             "--y", "0.5"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        summary = json.loads((tmp_path / "oracle.summary.json").read_text())
        closed = summary["values"]["closed_form"]
        quad = summary["values"]["quadrature"]
        assert abs(closed - quad) < 1e-8

    def test_unknown_lemma(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["oracle", "--lemma", "a9"], monkeypatch, tmp_path
        )
        assert code == 1
        assert "unknown lemma" in capsys.readouterr().err


class TestConfigAndManifest:
    def test_empty_config_is_usage_error(self, monkeypatch, tmp_path, capsys):
        cfg = tmp_path / "empty.cfg"
        cfg.write_text("")
        assert run_cli(["run", str(cfg)], monkeypatch, tmp_path) == 1
        assert "empty" in capsys.readouterr().err

    def test_config_without_command_is_usage_error(
        self, monkeypatch, tmp_path, capsys
    ):
        cfg = tmp_path / "no_command.cfg"
        cfg.write_text("lemma=a3\n")
        assert run_cli(["run", str(cfg)], monkeypatch, tmp_path) == 1
        assert "command" in capsys.readouterr().err

    def test_unknown_config_key_is_usage_error(
        self, monkeypatch, tmp_path, capsys
    ):
        cfg = tmp_path / "bad_key.cfg"
        cfg.write_text("command=oracle\nlemma=a3\nwidget=4\n")
        assert run_cli(["run", str(cfg)], monkeypatch, tmp_path) == 1
        assert "widget" in capsys.readouterr().err

    def test_flags_override_config(self, monkeypatch, tmp_path):
        cfg = tmp_path / "part.cfg"
        cfg.write_text("epsilon=0.5\nreplicates=20\n# comment\n\n")
        code = run_cli(
            ["diverge", "--process", "ou", "--function", "square",
             "--config", str(cfg), "--replicates", "5", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        manifest = (tmp_path / "diverge.manifest").read_text()
        assert "replicates=5\n" in manifest
        assert "epsilon=0.5\n" in manifest

    def test_manifest_rerun_reproduces_csv_bytes(self, monkeypatch, tmp_path):
        args = ["diverge", "--process", "ou", "--function", "poly:0,0,1",
                "--epsilon", "0.5", "--seed", "7", "--replicates", "10",
                "--no-figures"]
        assert run_cli(args, monkeypatch, tmp_path) == 0
        first = (tmp_path / "diverge.csv").read_bytes()
        code = run_cli(
            ["run", str(tmp_path / "diverge.manifest"), "--out", "again",
             "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        assert (tmp_path / "again.csv").read_bytes() == first

    def test_manifest_echoes_resolved_defaults(self, monkeypatch, tmp_path):
        run_cli(
            ["diverge", "--process", "ou", "--function", "square",
             "--epsilon", "0.5", "--replicates", "3", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        manifest = dict(
            line.split("=", 1)
            for line in (tmp_path / "diverge.manifest").read_text().splitlines()
        )
        assert manifest["command"] == "diverge"
        assert manifest["version"]
        assert manifest["theta"] == "1.0"  # process default materialized
        assert manifest["dt"] == "0.015625"
        assert manifest["horizons"].startswith("1.0,2.0,4.0")

    def test_run_hand_written_config(self, monkeypatch, tmp_path):
        cfg = tmp_path / "hand.cfg"
        cfg.write_text("command=oracle\nlemma=gamma\nz=0.5\n")
        assert run_cli(["run", str(cfg)], monkeypatch, tmp_path) == 0
        summary = json.loads((tmp_path / "oracle.summary.json").read_text())
        assert summary["values"]["gamma"] == pytest.approx(1.7724538509, rel=1e-9)


class TestSeedPrecedence:
    def test_env_beats_flag(self, monkeypatch, tmp_path):
        run_cli(
            ["simulate", "--process", "ou", "--n", "16", "--seed", "5",
             "--no-figures"],
            monkeypatch,
            tmp_path,
            env_seed=99,
        )
        manifest = (tmp_path / "simulate.manifest").read_text()
        assert "seed=99\n" in manifest

    def test_flag_beats_config(self, monkeypatch, tmp_path):
        cfg = tmp_path / "seeded.cfg"
        cfg.write_text("seed=3\n")
        run_cli(
            ["simulate", "--process", "ou", "--n", "16", "--seed", "5",
             "--config", str(cfg), "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert "seed=5\n" in (tmp_path / "simulate.manifest").read_text()

    def test_bad_env_seed(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["simulate", "--process", "ou", "--n", "16"],
            monkeypatch,
            tmp_path,
            env_seed="pi",
        )
        assert code == 1
        assert "SMALLBALL_SEED" in capsys.readouterr().err


class TestDryRunAndOutputs:
    def test_dry_run_writes_nothing(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["diverge", "--process", "ou", "--function", "square",
             "--epsilon", "0.5", "--dry-run"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        assert list(tmp_path.iterdir()) == []
        out = capsys.readouterr().out
        assert "command=diverge" in out

    def test_every_run_writes_manifest_csv_json(self, monkeypatch, tmp_path):
        run_cli(
            ["simulate", "--process", "bridge", "--n", "32", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        for suffix in (".csv", ".summary.json", ".manifest"):
            assert (tmp_path / f"simulate{suffix}").exists()

    def test_figures_written_by_default(self, monkeypatch, tmp_path):
        run_cli(
            ["simulate", "--process", "ou", "--n", "16"],
            monkeypatch,
            tmp_path,
        )
        png = tmp_path / "simulate.png"
        assert png.exists()
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_no_figures_suppresses_png(self, monkeypatch, tmp_path):
        run_cli(
            ["simulate", "--process", "ou", "--n", "16", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert not (tmp_path / "simulate.png").exists()

    def test_out_flag_redirects_and_creates_directories(
        self, monkeypatch, tmp_path
    ):
        run_cli(
            ["simulate", "--process", "ou", "--n", "16", "--out",
             "deep/nested/path", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert (tmp_path / "deep" / "nested" / "path.csv").exists()

    def test_csv_uses_lf_and_dot_decimal(self, monkeypatch, tmp_path):
        run_cli(
            ["simulate", "--process", "ou", "--n", "16", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        raw = (tmp_path / "simulate.csv").read_bytes()
        assert b"\r" not in raw
        assert b"," in raw and b";" not in raw.splitlines()[0]


class TestOtherCommands:
    def test_check_a1_builtin_passes(self, monkeypatch, tmp_path):
        code = run_cli(
            ["check-a1", "--function", "cubic_sin_inverse", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        summary = json.loads((tmp_path / "check-a1.summary.json").read_text())
        assert summary["passes"] is True

    def test_check_a1_needs_declared_floor(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["check-a1", "--function", "poly:0,0,1", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1  # bare family spec carries no declared constants

    def test_smallball_small_grid(self, monkeypatch, tmp_path):
        code = run_cli(
            ["smallball", "--process", "ou", "--replicates", "1000",
             "--pairs", "4", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        summary = json.loads((tmp_path / "smallball.summary.json").read_text())
        assert summary["all_dominated"] is True
        lines = (tmp_path / "smallball.csv").read_text().splitlines()
        assert lines[0] == "s,delta,eta,p_hat,half_width,bound,admissible"

    def test_smallball_explicit_pairs_mismatch(
        self, monkeypatch, tmp_path, capsys
    ):
        code = run_cli(
            ["smallball", "--process", "ou", "--etas", "0.1,0.2",
             "--deltas", "0.5"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1
        assert "equal length" in capsys.readouterr().err

    def test_estimate_ou_quick_sweep(self, monkeypatch, tmp_path):
        code = run_cli(
            ["estimate-ou", "--seeds", "5", "--t", "50", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        lines = (tmp_path / "estimate-ou.csv").read_text().splitlines()
        assert lines[0] == "seed,theta_hat,abs_error"
        assert len(lines) == 6

    def test_estimate_frac_quick_sweep(self, monkeypatch, tmp_path):
        code = run_cli(
            ["estimate-frac", "--seeds", "3", "--t", "50", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        summary = json.loads(
            (tmp_path / "estimate-frac.summary.json").read_text()
        )
        assert summary["model"] == "fractional-additive"
        assert summary["seeds"] == 3

    def test_estimate_frac_unknown_driver(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["estimate-frac", "--driver", "cir", "--seeds", "2"],
            monkeypatch,
            tmp_path,
        )
        assert code == 1
        assert "driver" in capsys.readouterr().err

    def test_ergodic_reports_time_average(self, monkeypatch, tmp_path):
        code = run_cli(
            ["ergodic", "--process", "ou", "--function", "one",
             "--replicates", "3", "--t", "50", "--no-figures"],
            monkeypatch,
            tmp_path,
        )
        assert code == 0
        summary = json.loads((tmp_path / "ergodic.summary.json").read_text())
        assert summary["mean"] == pytest.approx(1.0, abs=1e-12)


class TestCheckFailurePlumbing:
    def test_handler_failure_message_reaches_stderr(
        self, monkeypatch, tmp_path, capsys
    ):
        import smallball.cli as cli

        def stub(typed, paths):
            with open(paths["csv"], "w") as fh:
                fh.write("a\n")
            return {"ok": False}, "synthetic failure for plumbing"

        monkeypatch.setitem(cli._HANDLERS, "oracle", stub)
        code = run_cli(
            ["oracle", "--lemma", "a3"], monkeypatch, tmp_path
        )
        assert code == 2
        assert "synthetic failure" in capsys.readouterr().err
