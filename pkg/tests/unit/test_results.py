"""
Unit tests for run directories and result artifacts.
"""
import json
from datetime import datetime

import numpy as np
import pytest

from liouville.config import build_config, load_config_file
from liouville.models import Command
from liouville.results import (
    RunOutput,
    Table,
    build_manifest,
    create_run_dir,
    format_value,
    quarantine,
    to_jsonable,
    write_csv,
    write_manifest,
    write_output,
)


class TestFormatting:
    """Test value formatting."""

    def test_reals_use_17_digits(self):
        """Reals round-trip exactly."""
        assert format_value(0.1) == "0.10000000000000001"
        assert float(format_value(np.float64(1.0 / 3.0))) == 1.0 / 3.0

    def test_booleans_and_integers(self):
        """Booleans are lower-case, integers plain."""
        assert format_value(True) == "true"
        assert format_value(np.bool_(False)) == "false"
        assert format_value(np.int64(7)) == "7"

    def test_jsonable(self):
        """numpy scalars and arrays become plain JSON types."""
        data = to_jsonable({"a": np.float64(0.5), "b": np.arange(3), "c": np.bool_(True)})
        assert data == {"a": 0.5, "b": [0, 1, 2], "c": True}
        json.dumps(data)


class TestTables:
    """Test CSV tables."""

    def test_row_width_checked(self):
        """Rows must match the header."""
        table = Table(["a", "b"])
        with pytest.raises(ValueError):
            table.add(1)

    def test_lf_line_endings(self, tmp_path):
        """CSV files use LF only."""
        table = Table(["x", "y"])
        table.add(1, 0.5)
        table.add(2, True)
        path = tmp_path / "t.csv"
        write_csv(path, table)
        data = path.read_bytes()
        assert b"\r\n" not in data
        assert data.decode() == "x,y\n1,0.5\n2,true\n"


class TestRunDirectory:
    """Test run directory naming."""

    def test_timestamped_name(self, tmp_path):
        """Folders are named <command>-<timestamp>."""
        now = datetime(2024, 5, 6, 7, 8, 9)
        first = create_run_dir(tmp_path, "kpz-table", now)
        second = create_run_dir(tmp_path, "kpz-table", now)
        assert first.name == "kpz-table-20240506T070809"
        assert second.name == "kpz-table-20240506T070809-1"
        assert first.is_dir() and second.is_dir()


class TestArtifacts:
    """Test output, manifest and quarantine files."""

    def test_write_output(self, tmp_path):
        """The results table becomes results.csv, others keep their name."""
        output = RunOutput()
        output.table("results", ["a"]).add(1)
        output.table("grid", ["x"]).add(0.5)
        output.summary["z"] = 1
        output.summary["a"] = np.float64(2.0)
        write_output(tmp_path, output)
        assert (tmp_path / "results.csv").exists()
        assert (tmp_path / "grid.csv").exists()
        text = (tmp_path / "summary.json").read_text()
        assert text.index('"a"') < text.index('"z"')

    def test_manifest_round_trip(self, tmp_path):
        """A manifest fed back as a config file rebuilds the same config."""
        config = build_config(Command.MOMENTS, cli_values={"gamma": 0.7, "seed": 42})
        path = write_manifest(tmp_path, config, 1.23456)
        manifest = json.loads(path.read_text())
        assert manifest["seed"] == 42
        assert set(manifest) >= {"config", "rng", "versions", "platform", "wall_time_seconds"}
        rebuilt = build_config(Command.MOMENTS, load_config_file(path))
        assert rebuilt == config

    def test_manifest_versions(self):
        """Versions include the package and its numeric stack."""
        manifest = build_manifest(build_config(Command.KPZ_TABLE), 0.0)
        assert set(manifest["versions"]) == {"liouville", "python", "numpy", "scipy"}

    def test_quarantine(self, tmp_path):
        """Partial tables and the error go to quarantine/."""
        output = RunOutput()
        output.table("results", ["a"]).add(1)
        folder = quarantine(tmp_path, output, ValueError("boom"), 2)
        error = json.loads((folder / "error.json").read_text())
        assert folder.name == "quarantine"
        assert (folder / "results.csv").exists()
        assert error["exit_code"] == 2
        assert error["error"] == "ValueError"
