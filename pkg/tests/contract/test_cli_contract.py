"""
Contract tests for the CLI surface.

These tests verify commands and flags, exit codes, output streams and
the formats of the files written into each run folder.
"""
import json
import subprocess
import sys
from pathlib import Path

import pytest

from liouville import __version__
from liouville.models import Command


def run_liouville(args: list[str]) -> subprocess.CompletedProcess:
    """Run liouville CLI with given arguments."""
    cmd = [sys.executable, "-m", "liouville"] + args
    return subprocess.run(cmd, capture_output=True, text=True)


def kpz_run(tmp_path: Path) -> Path:
    result = run_liouville(["kpz-table", "--output-dir", str(tmp_path)])
    assert result.returncode == 0, result.stderr
    return next(p for p in tmp_path.iterdir() if p.is_dir())


class TestCLIArguments:
    """Test commands, flags and argument errors."""

    def test_no_arguments_prints_help(self):
        """No arguments should print usage and exit 2."""
        result = run_liouville([])
        assert result.returncode == 2
        assert "usage" in result.stdout.lower()

    def test_version(self):
        """--version should print the package version."""
        result = run_liouville(["--version"])
        assert result.returncode == 0
        assert __version__ in result.stdout

    @pytest.mark.parametrize("command", [c.value for c in Command])
    def test_every_command_has_help(self, command):
        """Each command should accept --help."""
        result = run_liouville([command, "--help"])
        assert result.returncode == 0
        assert "--seed" in result.stdout
        assert "--output-dir" in result.stdout

    def test_unknown_command(self):
        """Unknown commands should exit 2."""
        result = run_liouville(["teleport"])
        assert result.returncode == 2
        assert "invalid choice" in result.stderr

    @pytest.mark.parametrize("args", [
        ["clock-mean", "--gamma", "abc"],
        ["clock-mean", "--start", "0.5"],
        ["positivity", "--gammas", "1,x"],
        ["field-stats", "--domain", "triangle"],
        ["kpz-table", "--log-level", "LOUD"],
    ])
    def test_malformed_values(self, args):
        """Malformed flag values should exit 2 with a message on stderr."""
        result = run_liouville(args)
        assert result.returncode == 2
        assert len(result.stderr) > 0

    def test_command_specific_flag_elsewhere(self):
        """Flags of one command are not accepted by another."""
        result = run_liouville(["kpz-table", "--alpha", "1.0"])
        assert result.returncode == 2


class TestCLIExitCodes:
    """Test validation failures."""

    def test_gamma_out_of_range(self, tmp_path):
        """gamma >= 2 should exit 2 without creating a run folder."""
        result = run_liouville(["kpz-table", "--gamma", "2.5", "--output-dir", str(tmp_path)])
        assert result.returncode == 2
        assert "gamma" in result.stderr
        assert list(tmp_path.iterdir()) == []

    def test_conformal_check_on_square(self, tmp_path):
        """conformal-check requires the disc."""
        result = run_liouville(["conformal-check", "--domain", "square", "--start", "0.5,0.5",
                                "--output-dir", str(tmp_path)])
        assert result.returncode == 2
        assert "disc" in result.stderr

    def test_bad_config_file(self, tmp_path):
        """A config with unknown keys should exit 2."""
        config = tmp_path / "c.json"
        config.write_text(json.dumps({"colour": "blue"}))
        result = run_liouville(["kpz-table", "--config", str(config)])
        assert result.returncode == 2
        assert "colour" in result.stderr


class TestCLIOutputFormat:
    """Test output files and streams."""

    def test_results_csv_format(self, tmp_path):
        """results.csv has a header row, LF endings and full-precision reals."""
        data = (kpz_run(tmp_path) / "results.csv").read_bytes()
        assert b"\r\n" not in data
        lines = data.decode().splitlines()
        assert lines[0] == "d0,d,inverse_residual"
        assert len(lines) == 10

    def test_summary_json_sorted(self, tmp_path):
        """summary.json is valid JSON with sorted keys."""
        text = (kpz_run(tmp_path) / "summary.json").read_text()
        data = json.loads(text)
        assert list(data) == sorted(data)
        assert data["gamma"] == 1.0

    def test_manifest_contents(self, tmp_path):
        """manifest.json records config, seed, generator and versions."""
        manifest = json.loads((kpz_run(tmp_path) / "manifest.json").read_text())
        assert manifest["config"]["command"] == "kpz-table"
        assert manifest["seed"] == 1
        assert "Philox" in manifest["rng"]["family"]
        assert manifest["versions"]["liouville"] == __version__
        assert manifest["wall_time_seconds"] >= 0.0

    def test_log_file(self, tmp_path):
        """The run log records the command."""
        log = (kpz_run(tmp_path) / "liouville.log").read_text()
        assert "kpz-table" in log

    def test_success_message_on_stdout(self, tmp_path):
        """The run folder is announced on stdout."""
        result = run_liouville(["kpz-table", "--output-dir", str(tmp_path)])
        assert "Results written to" in result.stdout
