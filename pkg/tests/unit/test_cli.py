"""
Unit tests for CLI parsing and run orchestration.
"""
import csv
import json

import pytest

from liouville.cli import (
    EXIT_ERROR,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    config_from_args,
    create_parser,
    main,
    run_experiment,
)
from liouville.config import build_config
from liouville.errors import InsufficientModesError, ScaleFinerThanPathError
from liouville.gff import sample_gff
from liouville.models import Command


def run_dirs(root):
    return sorted(p for p in root.iterdir() if p.is_dir())


class TestParser:
    """Test argument parsing."""

    def test_lists_and_points(self):
        """List flags and --start are parsed into numbers."""
        args = create_parser().parse_args(["positivity", "--gammas", "0.5,1", "--start", "0.4,0.6"])
        assert args.gammas == [0.5, 1.0]
        assert args.start == [0.4, 0.6]

    def test_flags_default_to_none(self):
        """Unset flags leave file and default values alone."""
        args = create_parser().parse_args(["clock-mean"])
        assert args.gamma is None
        assert args.export_series is None
        config = config_from_args(args)
        assert config.gamma == 1.0
        assert config.export_series is False

    def test_default_truncation(self):
        """Fields default to 512^2 modes unless --n-modes is given."""
        assert config_from_args(create_parser().parse_args(["positivity"])).n_modes == 512 ** 2
        args = create_parser().parse_args(["positivity", "--n-modes", "4096"])
        assert config_from_args(args).n_modes == 4096

    def test_config_file_and_flags(self, tmp_path):
        """Flags override values from --config."""
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"gamma": 0.3, "seed": 5}))
        args = create_parser().parse_args(["kpz-table", "--config", str(path), "--gamma", "0.9"])
        config = config_from_args(args)
        assert config.gamma == 0.9
        assert config.seed == 5

    def test_bad_point(self):
        """--start with one coordinate exits with code 2."""
        with pytest.raises(SystemExit) as exc:
            create_parser().parse_args(["clock-mean", "--start", "0.5"])
        assert exc.value.code == 2


class TestRunExperiment:
    """Test exit codes and artifacts of run_experiment."""

    def test_success(self, tmp_path):
        """A valid run writes results, summary, manifest and log."""
        config = build_config(Command.KPZ_TABLE, cli_values={"output_dir": str(tmp_path)})
        assert run_experiment(config) == EXIT_OK
        (run_dir,) = run_dirs(tmp_path)
        for name in ("results.csv", "summary.json", "manifest.json", "liouville.log"):
            assert (run_dir / name).exists()

    def test_invalid_config_creates_nothing(self, tmp_path):
        """Validation failures exit 2 before any folder exists."""
        config = build_config(Command.KPZ_TABLE, cli_values={"output_dir": str(tmp_path), "gamma": 3.0})
        assert run_experiment(config) == EXIT_VALIDATION
        assert run_dirs(tmp_path) == []

    @pytest.mark.parametrize("error,code", [
        (InsufficientModesError("too few modes"), EXIT_NUMERICAL),
        (ScaleFinerThanPathError("no scale"), EXIT_VALIDATION),
        (RuntimeError("disk gone"), EXIT_ERROR),
    ])
    def test_failures_quarantined(self, tmp_path, mocker, error, code):
        """Errors during a run map to exit codes and leave a quarantine folder."""
        mocker.patch("liouville.cli.run_command", side_effect=error)
        config = build_config(Command.KPZ_TABLE, cli_values={"output_dir": str(tmp_path)})
        assert run_experiment(config) == code
        (run_dir,) = run_dirs(tmp_path)
        report = json.loads((run_dir / "quarantine" / "error.json").read_text())
        assert report["exit_code"] == code
        assert report["error"] == type(error).__name__
        assert (run_dir / "manifest.json").exists()
        assert not (run_dir / "results.csv").exists()

    def test_failure_keeps_finished_rows(self, tmp_path, mocker):
        """Replicates finished before a numerical failure land in quarantine/results.csv."""
        def fail_on_third(domain, n_modes, seed, replicate=0):
            if replicate == 2:
                raise InsufficientModesError("replicate 2")
            return sample_gff(domain, n_modes, seed, replicate)

        mocker.patch("liouville.experiments.sample_gff", side_effect=fail_on_third)
        config = build_config(Command.FIELD_STATS, cli_values={
            "output_dir": str(tmp_path), "n_modes": 256, "n_replicates": 4, "k": 4})
        assert run_experiment(config) == EXIT_NUMERICAL
        (run_dir,) = run_dirs(tmp_path)
        with open(run_dir / "quarantine" / "results.csv", newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [row["replicate"] for row in rows] == ["0", "1"]

    def test_main_without_arguments(self, capsys):
        """No arguments prints help and returns 2."""
        assert main([]) == EXIT_VALIDATION
        assert "usage" in capsys.readouterr().out.lower()

    def test_main_runs_command(self, tmp_path):
        """main returns 0 for a valid command."""
        assert main(["kpz-table", "--output-dir", str(tmp_path), "--gamma", "0.5"]) == EXIT_OK
