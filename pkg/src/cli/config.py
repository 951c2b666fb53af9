"""
Run configuration: built-in defaults, a key=value config file and command-line flags
"""

import os
import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

from dotenv import dotenv_values

from src.calibration.counts_calibration import ConversionRule, Estimator
from src.exceptions import UsageError
from src.multiplet.multiplet_basis import Gate, InitialState

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "TCLQEM_CONFIG"

# Seven roughly log-spaced couplings spanning 7.0e-4 ... 7.0e-3
DEFAULT_COUPLING_LADDER = (7.0e-4, 1.0e-3, 1.5e-3, 2.2e-3, 3.3e-3, 4.8e-3, 7.0e-3)


class OutputFormat:
    CSV = "csv"
    JSON = "json"
    CHOICES = (CSV, JSON)


@dataclass(frozen=True)
class RunConfig:
    """Merged settings handed to the command functions"""

    gamma0_omega_tau: Tuple[float, ...] = DEFAULT_COUPLING_LADDER
    omega_c_tau_s: float = 100.0
    delta0: float = 0.0
    tau_s: float = 1.0
    x_start: float = 0.0
    x_end: float = 3.0
    steps: int = 61
    alpha: Optional[float] = None
    t_over_tau_s: float = 1.0
    gate: Gate = Gate.CNOT
    initial_state: InitialState = InitialState.M1
    format: str = OutputFormat.CSV
    conversion_rule: ConversionRule = ConversionRule.QUADRATIC_PREFACTOR
    estimator: Estimator = Estimator.LEAST_SQUARES
    counts: Optional[str] = None
    out: Optional[str] = None


def _float_list(value: str) -> Tuple[float, ...]:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(item) for item in items)


def _choice(enum_type) -> Callable[[str], Any]:
    def parse(value: str):
        return enum_type(value.strip().lower())
    return parse


def _format(value: str) -> str:
    value = value.strip().lower()
    if value not in OutputFormat.CHOICES:
        raise ValueError(f"expected one of {OutputFormat.CHOICES}")
    return value


# Keys accepted in the config file, with the parser for their string value
FILE_KEYS: Dict[str, Callable[[str], Any]] = {
    "gamma0_omega_tau": _float_list,
    "omega_c_tau_s": float,
    "delta0": float,
    "tau_s": float,
    "x_start": float,
    "x_end": float,
    "steps": int,
    "alpha": float,
    "t_over_tau_s": float,
    "gate": _choice(Gate),
    "initial_state": _choice(InitialState),
    "format": _format,
    "conversion_rule": _choice(ConversionRule),
    "estimator": _choice(Estimator),
}


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Parse a key=value config file

    Args:
        path: Path of the file; keys are case-insensitive

    Returns:
        Parsed values for the recognised keys

    Raises:
        UsageError: The file is missing or a value does not parse
    """
    if not os.path.isfile(path):
        logger.error(f"Config file not found: {path}")
        raise UsageError(f"Config file not found: {path}")

    parsed: Dict[str, Any] = {}
    for raw_key, raw_value in dotenv_values(path).items():
        key = raw_key.strip().lower()
        if key not in FILE_KEYS:
            logger.warning(f"Ignoring unknown config key '{raw_key}' in {path}")
            continue
        if raw_value is None:
            raise UsageError(f"Config key '{raw_key}' in {path} has no value")
        try:
            parsed[key] = FILE_KEYS[key](raw_value)
        except ValueError as e:
            raise UsageError(f"Invalid value for '{raw_key}' in {path}: {raw_value!r} ({e})") from e
    logger.info(f"Loaded {len(parsed)} settings from {path}")
    return parsed


def build_run_config(flags: Mapping[str, Any], config_path: Optional[str] = None,
                     environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Merge defaults, the config file and command-line flags, in increasing precedence

    Args:
        flags: Flag values; None means the flag was not given
        config_path: Explicit config file (--config); falls back to TCLQEM_CONFIG
        environ: Environment to read TCLQEM_CONFIG from (defaults to os.environ)

    Returns:
        RunConfig with every setting resolved
    """
    environ = os.environ if environ is None else environ
    path = config_path or environ.get(CONFIG_ENV_VAR)
    settings: Dict[str, Any] = load_config_file(path) if path else {}

    known = {f.name for f in fields(RunConfig)}
    for name, value in flags.items():
        if name in known and value is not None:
            settings[name] = value
    if "gamma0_omega_tau" in settings:
        settings["gamma0_omega_tau"] = tuple(settings["gamma0_omega_tau"])

    config = replace(RunConfig(), **settings)
    logger.debug(f"Run configuration: {config}")
    return config
