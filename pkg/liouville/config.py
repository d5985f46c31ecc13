"""Experiment configuration for liouville.

Precedence (lowest first): per-command defaults, a JSON config file (flat
keys, or a previous manifest.json whose "config" block is reused), and
command-line flags. validate_config collects every violated precondition
before any sampling starts.
"""

import json
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from liouville.errors import ConfigError
from liouville.geometry import distance_to_boundary
from liouville.models import Command, DomainKind, DomainSpec, ExperimentConfig, VarianceMode

THREADS_ENV = "LIOUVILLE_THREADS"

COMMAND_DEFAULTS: Dict[Command, Dict[str, Any]] = {
    Command.FIELD_STATS: {"n_replicates": 200, "k": 5},
    Command.CLOCK_MEAN: {"gamma": 1.0, "k": 5, "horizon": 0.05, "n_replicates": 100},
    Command.CONVERGE: {"gamma": 0.5, "k_min": 3, "k_max": 6, "n_replicates": 20, "horizon": 0.05},
    Command.POSITIVITY: {"k": 4, "n_replicates": 20, "resolution": 2.0 ** -6},
    Command.CONFORMAL_CHECK: {"domain": "disc", "k": 4, "n_replicates": 50, "start": [0.3, 0.0]},
    Command.THICK_DIM: {"k": 4, "n_replicates": 5, "alpha": 1.3, "dt": 2.0 ** -16},
    Command.KPZ_TABLE: {"n_replicates": 1},
    Command.MOMENTS: {"n_replicates": 100, "q": 1.2, "m": 2, "max_time": 0.01},
    Command.PAIR_COUNT: {"n_replicates": 5, "max_time": 1.0},
}

FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}
LIST_FIELDS = {"gammas": float, "start": float, "n_range": int, "q_grid": float,
               "epsilons": float, "theta": float, "d0": float, "ks": int}

# commands whose circles of radius 2**-k must fit inside the margin
CLOCK_LEVEL = {
    Command.CLOCK_MEAN: "k",
    Command.POSITIVITY: "k",
    Command.CONFORMAL_CHECK: "k",
    Command.THICK_DIM: "k",
    Command.CONVERGE: "k_max",
}


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of reals (argparse type)."""
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"expected comma-separated numbers, got '{text}'") from e


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"expected comma-separated integers, got '{text}'") from e


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read flat config values from JSON; a manifest contributes its config block."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    if isinstance(data.get("config"), dict):
        data = data["config"]
    unknown = sorted(set(data) - FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return data


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    if name in LIST_FIELDS:
        if isinstance(value, str):
            return parse_int_list(value) if LIST_FIELDS[name] is int else parse_float_list(value)
        if not isinstance(value, (list, tuple)):
            value = [value]
        return [LIST_FIELDS[name](item) for item in value]
    return value


def build_config(command: Command, file_values: Optional[Dict[str, Any]] = None,
                 cli_values: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Merge defaults, file values and flag values into an ExperimentConfig."""
    merged: Dict[str, Any] = dict(COMMAND_DEFAULTS.get(command, {}))
    for source in (file_values or {}, cli_values or {}):
        for name, value in source.items():
            if name == "command" or name not in FIELD_NAMES:
                continue
            if value is not None:
                merged[name] = _coerce(name, value)
    if file_values and file_values.get("command") not in (None, command.value):
        raise ConfigError(
            f"config file is for '{file_values['command']}', not '{command.value}'"
        )
    try:
        return ExperimentConfig(command=command, **merged)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def resolve_dt(config: ExperimentConfig, level: int) -> float:
    """Configured dt, or eps**2 / 16 at the given dyadic level."""
    return config.dt if config.dt is not None else 0.25 ** level / 16.0


def finest_level(config: ExperimentConfig) -> int:
    if config.command is Command.CONVERGE:
        return config.k_max
    if config.command is Command.PAIR_COUNT:
        return max(config.ks)
    return config.k


def thread_count() -> int:
    """Replicate threads from LIOUVILLE_THREADS (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def validate_config(config: ExperimentConfig) -> List[str]:
    """Return every violated precondition (empty when the config is valid)."""
    errors: List[str] = []

    def need(condition: bool, message: str) -> None:
        if not condition:
            errors.append(message)

    need(isinstance(config.seed, int) and config.seed >= 0, f"seed must be a non-negative integer, got {config.seed}")
    need(0.0 <= config.gamma < 2.0, f"gamma must lie in [0, 2), got {config.gamma}")
    need(bool(config.gammas) and all(0.0 <= g < 2.0 for g in config.gammas), f"gammas must lie in [0, 2), got {config.gammas}")
    need(config.k >= 1, f"k must be at least 1, got {config.k}")
    need(1 <= config.k_min < config.k_max, f"need 1 <= k_min < k_max, got {config.k_min}..{config.k_max}")
    need(config.n_modes >= 64, f"n_modes must be at least 64, got {config.n_modes}")
    need(config.dt is None or config.dt > 0.0, f"dt must be positive, got {config.dt}")
    need(0.0 < config.margin < 0.5, f"margin must lie in (0, 0.5), got {config.margin}")
    need(config.n_replicates >= 1, f"n_replicates must be at least 1, got {config.n_replicates}")
    need(config.domain in {kind.value for kind in DomainKind}, f"domain must be square or disc, got {config.domain}")
    need(config.grid_n >= 16, f"grid_n must be at least 16, got {config.grid_n}")
    need(len(config.start) == 2, f"start must be two coordinates, got {config.start}")
    need(config.horizon > 0.0, f"horizon must be positive, got {config.horizon}")
    need(config.max_time >= 0.0, f"max_time must be non-negative, got {config.max_time}")
    need(config.variance_mode in {mode.value for mode in VarianceMode},
         f"variance_mode must be one of {[mode.value for mode in VarianceMode]}, got {config.variance_mode}")
    need(config.alpha >= 0.0, f"alpha must be non-negative, got {config.alpha}")
    need(config.delta > 0.0, f"delta must be positive, got {config.delta}")
    need(config.eta > 0.0, f"eta must be positive, got {config.eta}")
    need(bool(config.n_range) and all(n >= 2 for n in config.n_range), f"n_range values must be at least 2, got {config.n_range}")
    need(bool(config.q_grid) and all(0.0 < q <= 1.0 for q in config.q_grid), f"q_grid values must lie in (0, 1], got {config.q_grid}")
    need(config.threshold > 0.0, f"threshold must be positive, got {config.threshold}")
    need(1.0 < config.q < 2.0, f"q must lie in (1, 2), got {config.q}")
    need(config.m >= 1, f"m must be at least 1, got {config.m}")
    need(bool(config.epsilons) and all(2.0 ** -6 <= e <= 2.0 ** -3 for e in config.epsilons),
         f"epsilons must lie in [2**-6, 2**-3], got {config.epsilons}")
    need(bool(config.d0) and all(0.0 <= d <= 2.0 for d in config.d0), f"d0 values must lie in [0, 2], got {config.d0}")
    need(bool(config.ks) and all(k >= 1 for k in config.ks), f"ks values must be at least 1, got {config.ks}")
    need(config.n_offsets >= 1, f"n_offsets must be at least 1, got {config.n_offsets}")
    need(config.resolution > 0.0, f"resolution must be positive, got {config.resolution}")
    need(1 <= config.max_points <= 2000, f"max_points must lie in [1, 2000], got {config.max_points}")

    command = config.command
    if command is Command.CONFORMAL_CHECK:
        need(config.domain == DomainKind.UNIT_DISC.value, "conformal-check runs on the disc domain")
        need(config.gamma > 0.0, "conformal-check needs gamma > 0")
        need(bool(config.theta), "theta must list at least one angle")
    if command is Command.THICK_DIM:
        need(config.alpha < 2.0, f"thick-dim needs alpha < 2, got {config.alpha}")

    if errors:
        return errors

    level_field = CLOCK_LEVEL.get(command)
    if level_field is not None:
        level = getattr(config, level_field)
        need(2.0 ** -level <= config.margin,
             f"eps=2**-{level} exceeds margin {config.margin}; raise {level_field}")
    if config.dt is not None and command is not Command.MOMENTS:
        level = finest_level(config)
        bound = (0.25 ** level / 16.0) if command is not Command.PAIR_COUNT else 0.25 ** level
        need(config.dt <= bound * (1.0 + 1e-12), f"dt={config.dt} exceeds {bound:.3g} required at level {level}")
    if command in CLOCK_LEVEL or command is Command.FIELD_STATS:
        domain = DomainSpec(DomainKind(config.domain), config.margin, config.grid_n)
        start = complex(config.start[0], config.start[1])
        need(float(distance_to_boundary(domain, start)) > config.margin,
             f"start {config.start} is not farther than the margin {config.margin} from the boundary")
    if command is Command.FIELD_STATS:
        need(2.0 ** -config.k < float(distance_to_boundary(config.domain_spec(),
                                                                complex(*config.start))),
             f"eps=2**-{config.k} circle around start leaves the domain")
    if command is Command.MOMENTS:
        need(0.0 <= config.start[0] <= 1.0 and 0.0 <= config.start[1] <= 1.0,
             f"moments start must lie in the unit square, got {config.start}")
    return errors
