"""Run directories and result artifacts for liouville.

This module provides functions to:
- Create timestamped run directories
- Write CSV tables (LF endings, 17 significant digits)
- Write JSON summaries and manifests with sorted keys
- Move partial results into a quarantine folder after a failed run
"""

import csv
import json
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy

from liouville import __version__, rng
from liouville.models import ExperimentConfig

RESULTS_CSV = "results.csv"
SUMMARY_JSON = "summary.json"
MANIFEST_JSON = "manifest.json"
QUARANTINE_DIR = "quarantine"


@dataclass
class Table:
    """A CSV table built row by row."""
    header: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    def add(self, *values: Any) -> None:
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} values, header has {len(self.header)}")
        self.rows.append(list(values))


@dataclass
class RunOutput:
    """Everything a command produces: named tables plus a JSON summary.

    The table named "results" becomes results.csv; others are written
    as <name>.csv next to it.
    """
    tables: Dict[str, Table] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    def table(self, name: str, header: Sequence[str]) -> Table:
        if name not in self.tables:
            self.tables[name] = Table(list(header))
        return self.tables[name]


def create_run_dir(output_dir: Path, command: str, now: Optional[datetime] = None) -> Path:
    """Create <output_dir>/<command>-<YYYYmmddTHHMMSS>[-n]/ and return it."""
    stamp = (now or datetime.now()).strftime("%Y%m%dT%H%M%S")
    base = Path(output_dir) / f"{command}-{stamp}"
    candidate, suffix = base, 1
    while candidate.exists():
        candidate = base.with_name(f"{base.name}-{suffix}")
        suffix += 1
    candidate.mkdir(parents=True)
    return candidate


def format_value(value: Any) -> str:
    """CSV cell text: reals with 17 significant digits, booleans lower-case."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, complex):
        return f"{format(value.real, '.17g')}{format(value.imag, '+.17g')}j"
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays to plain JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_csv(path: Path, table: Table) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([format_value(value) for value in row])


def write_json(path: Path, data: Dict[str, Any]) -> None:
    text = json.dumps(to_jsonable(data), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_output(run_dir: Path, output: RunOutput) -> List[Path]:
    """Write every table and the summary into run_dir."""
    written = []
    for name, table in output.tables.items():
        path = run_dir / (RESULTS_CSV if name == "results" else f"{name}.csv")
        write_csv(path, table)
        written.append(path)
    summary_path = run_dir / SUMMARY_JSON
    write_json(summary_path, output.summary)
    written.append(summary_path)
    return written


def build_manifest(config: ExperimentConfig, wall_time: float) -> Dict[str, Any]:
    """Everything needed to re-run: config, seed, generator family, versions."""
    return {
        "config": config.to_dict(),
        "seed": config.seed,
        "rng": rng.describe(),
        "versions": {
            "liouville": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "platform": sys.platform,
        "wall_time_seconds": round(wall_time, 3),
    }


def write_manifest(run_dir: Path, config: ExperimentConfig, wall_time: float) -> Path:
    path = run_dir / MANIFEST_JSON
    write_json(path, build_manifest(config, wall_time))
    return path


def quarantine(run_dir: Path, output: RunOutput, error: BaseException, exit_code: int) -> Path:
    """Write partial tables and an error.json into <run_dir>/quarantine/."""
    folder = run_dir / QUARANTINE_DIR
    folder.mkdir(parents=True, exist_ok=True)
    for name, table in output.tables.items():
        write_csv(folder / (RESULTS_CSV if name == "results" else f"{name}.csv"), table)
    write_json(folder / "error.json", {
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": exit_code,
        "partial_summary": output.summary,
    })
    return folder
