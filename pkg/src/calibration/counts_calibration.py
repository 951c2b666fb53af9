"""
Calibration of Re k(tau_s) and Gamma0 * omega_c * tau_s from measured device counts
"""

import json
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from src.exceptions import CountsParseError, DomainError
from src.evolution.superoperator import ALPHA_MAX, evolve_populations
from src.multiplet.multiplet_basis import Gate, InitialState, basis_for_gate

logger = logging.getLogger(__name__)

RECORD_FIELDS = ("device", "gate", "initial_state", "counts", "shots")
RESIDUAL_ACCEPTANCE = 0.05


class ConversionRule(str, Enum):
    """How Re k(tau_s) is turned into Gamma0 * omega_c * tau_s"""

    QUADRATIC_PREFACTOR = "quadratic_prefactor"
    IDENTITY_TABLE_IMPLIED = "identity_table_implied"
    CNOT_TABLES_IMPLIED = "cnot_tables_implied"


# alpha = constant * Gamma0 * omega_c * tau_s
CONVERSION_CONSTANTS: Dict[ConversionRule, float] = {
    ConversionRule.QUADRATIC_PREFACTOR: 3.0 / math.pi,   # (2/pi) * (1 + 1/2) at t = tau_s
    ConversionRule.IDENTITY_TABLE_IMPLIED: 0.75 * math.pi,
    ConversionRule.CNOT_TABLES_IMPLIED: 16.0 / 7.0,
}


class Estimator(str, Enum):
    LEAST_SQUARES = "least_squares"
    SINGLE_OUTCOME = "single_outcome"


# Outcome column each published table reads Re k off
DESIGNATED_OUTCOME: Dict[Tuple[Gate, InitialState], int] = {
    (Gate.IDENTITY, InitialState.M1): 1,
    (Gate.CNOT, InitialState.M1): 1,
    (Gate.CNOT, InitialState.M2): 0,
    (Gate.CNOT, InitialState.M3): 0,
    (Gate.CNOT, InitialState.M4): 1,
}


@dataclass(frozen=True)
class QuotedValue:
    """A published (Re k(tau_s), Gamma0 omega_c tau_s) pair for one device run"""

    device: str
    gate: Gate
    initial_state: InitialState
    alpha: float
    coupling: float


QUOTED_VALUES: Tuple[QuotedValue, ...] = (
    QuotedValue("ibm_guadalupe", Gate.IDENTITY, InitialState.M1, 6e-3, 2.548e-3),
    QuotedValue("IonQ", Gate.IDENTITY, InitialState.M1, 1e-3, 4.26e-4),
    QuotedValue("ibm_guadalupe", Gate.CNOT, InitialState.M1, 8e-3, 3.5e-3),
    QuotedValue("IonQ", Gate.CNOT, InitialState.M1, 8e-3, 3.5e-3),
    QuotedValue("ibm_guadalupe", Gate.CNOT, InitialState.M2, 4e-2, 1.75e-2),
    QuotedValue("IonQ", Gate.CNOT, InitialState.M2, 1.7e-2, 7.44e-3),
    QuotedValue("ibm_guadalupe", Gate.CNOT, InitialState.M3, 2.4e-2, 1.05e-2),
    QuotedValue("IonQ", Gate.CNOT, InitialState.M3, 1.2e-2, 5.25e-3),
    QuotedValue("ibm_guadalupe", Gate.CNOT, InitialState.M4, 1.4e-2, 6.125e-3),
    QuotedValue("IonQ", Gate.CNOT, InitialState.M4, 8e-3, 3.5e-3),
)


def quoted_value(device: str, gate: Gate, initial_state: InitialState) -> Optional[QuotedValue]:
    for quote in QUOTED_VALUES:
        if (quote.device, quote.gate, quote.initial_state) == (device, Gate(gate), InitialState(initial_state)):
            return quote
    return None


@dataclass(frozen=True, eq=False)
class CountsRecord:
    """Measured outcome counts of one gate run, ordered |00>, |01>, |10>, |11>"""

    device: str
    gate: Gate
    initial_state: InitialState
    counts: Tuple[int, int, int, int]
    shots: int

    def __post_init__(self):
        object.__setattr__(self, "gate", Gate(self.gate))
        object.__setattr__(self, "initial_state", InitialState(self.initial_state))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.counts) != 4 or any(c < 0 for c in self.counts):
            raise DomainError(f"counts must be 4 non-negative integers, got {self.counts}")
        if self.shots <= 0:
            raise DomainError(f"shots must be positive, got {self.shots}")
        if sum(self.counts) > self.shots:
            raise DomainError(f"counts sum to {sum(self.counts)}, more than {self.shots} shots")

    @property
    def frequencies(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.shots

    @property
    def label(self) -> str:
        return f"{self.device}/{self.gate.value}/{self.initial_state.value}"


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    """Estimated Re k(tau_s) with its coupling under every conversion rule"""

    record: CountsRecord
    alpha_hat: float
    conversion_rule: ConversionRule
    residuals: np.ndarray
    estimator: Estimator = Estimator.LEAST_SQUARES
    clamped: bool = False
    couplings: Dict[ConversionRule, float] = field(default_factory=dict)

    @property
    def coupling_hat(self) -> float:
        return self.couplings[self.conversion_rule]

    @property
    def accepted(self) -> bool:
        return bool(np.all(np.abs(self.residuals) < RESIDUAL_ACCEPTANCE))


def model_probabilities(gate: Gate, initial_state: InitialState, alpha: float) -> np.ndarray:
    """Computational outcome probabilities the noise model predicts for one gate run"""
    return evolve_populations(InitialState(initial_state), alpha, basis_for_gate(Gate(gate)))


def affine_model(gate: Gate, initial_state: InitialState) -> Tuple[np.ndarray, np.ndarray]:
    """(base, slope) with model_probabilities = base + alpha * slope"""
    base = model_probabilities(gate, initial_state, 0.0)
    slope = (model_probabilities(gate, initial_state, ALPHA_MAX) - base) / ALPHA_MAX
    return base, slope


def coupling_from_alpha(alpha: float, rule: ConversionRule = ConversionRule.QUADRATIC_PREFACTOR) -> float:
    """Gamma0 * omega_c * tau_s that produces Re k(tau_s) = alpha under the given rule"""
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha}")
    return alpha / CONVERSION_CONSTANTS[ConversionRule(rule)]


def least_squares_alpha(observed: np.ndarray, base: np.ndarray, slope: np.ndarray) -> float:
    """Unclamped alpha minimizing |observed - (base + alpha * slope)|^2"""
    solution, *_ = np.linalg.lstsq(np.asarray(slope, dtype=float).reshape(-1, 1),
                                   np.asarray(observed, dtype=float) - np.asarray(base, dtype=float), rcond=None)
    return float(solution[0])


def estimate_alpha(rec: CountsRecord, estimator: Estimator = Estimator.LEAST_SQUARES,
                   rule: ConversionRule = ConversionRule.QUADRATIC_PREFACTOR) -> CalibrationResult:
    """
    Estimate Re k(tau_s) from one counts record

    The least-squares estimator fits the affine outcome model to all four
    observed frequencies; the single-outcome estimator reads alpha off the
    designated outcome column of the gate/state pair.

    Args:
        rec: Counts record
        estimator: least_squares or single_outcome
        rule: Conversion rule reported as coupling_hat

    Returns:
        CalibrationResult; alpha_hat is clamped to [0, 1/2] with clamped=True

    Raises:
        DomainError: All counts are zero or no designated outcome exists
    """
    if sum(rec.counts) == 0:
        raise DomainError(f"Record {rec.label} has no counts")
    estimator = Estimator(estimator)
    observed = rec.frequencies
    base, slope = affine_model(rec.gate, rec.initial_state)

    if estimator is Estimator.LEAST_SQUARES:
        alpha = least_squares_alpha(observed, base, slope)
    else:
        outcome = DESIGNATED_OUTCOME.get((rec.gate, rec.initial_state))
        if outcome is None:
            raise DomainError(f"No designated outcome for {rec.gate.value}/{rec.initial_state.value}")
        alpha = float((observed[outcome] - base[outcome]) / slope[outcome])

    clamped = not 0.0 <= alpha <= ALPHA_MAX
    if clamped:
        logger.warning(f"Estimate {alpha:.6g} for {rec.label} lies outside [0, {ALPHA_MAX}]; clamping")
        alpha = min(max(alpha, 0.0), ALPHA_MAX)

    residuals = observed - (base + alpha * slope)
    couplings = {r: coupling_from_alpha(alpha, r) for r in ConversionRule}
    logger.debug(f"{rec.label}: alpha_hat={alpha:.6g} ({estimator.value})")
    return CalibrationResult(
        record=rec,
        alpha_hat=alpha,
        conversion_rule=ConversionRule(rule),
        residuals=residuals,
        estimator=estimator,
        clamped=clamped,
        couplings=couplings,
    )


def implied_conversion_constants() -> List[Dict[str, Any]]:
    """Ratio Re k(tau_s) / (Gamma0 omega_c tau_s) behind every published pair"""
    rows = []
    for quote in QUOTED_VALUES:
        rows.append({
            "device": quote.device,
            "gate": quote.gate.value,
            "initial_state": quote.initial_state.value,
            "alpha": quote.alpha,
            "coupling": quote.coupling,
            "implied_constant": quote.alpha / quote.coupling,
        })
    return rows


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _skip_whitespace(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in " \t\r\n":
        pos += 1
    return pos


def _iter_json_array(text: str) -> Iterator[Tuple[int, Any]]:
    """Yield (line, value) for every element of a top-level JSON array"""
    decoder = json.JSONDecoder()
    pos = _skip_whitespace(text, 0)
    if pos == len(text):
        return
    # Open the array
    if text[pos] != "[":
        raise CountsParseError("Counts file must hold a JSON array of records", line=_line_of(text, pos))
    pos = _skip_whitespace(text, pos + 1)
    if pos < len(text) and text[pos] == "]":
        pos += 1
    else:
        while True:
            # Decode one record
            try:
                value, end = decoder.raw_decode(text, pos)
            except json.JSONDecodeError as e:
                raise CountsParseError(f"Malformed JSON: {e.msg}", line=e.lineno) from e
            yield _line_of(text, pos), value
            # Separator or closing bracket
            pos = _skip_whitespace(text, end)
            if pos < len(text) and text[pos] == ",":
                pos = _skip_whitespace(text, pos + 1)
                continue
            if pos < len(text) and text[pos] == "]":
                pos += 1
                break
            raise CountsParseError("Expected ',' or ']' after a record", line=_line_of(text, pos))
    # Nothing may follow the array
    if _skip_whitespace(text, pos) != len(text):
        raise CountsParseError("Unexpected content after the record array", line=_line_of(text, pos))


def _parse_record(raw: Any, line: int) -> CountsRecord:
    if not isinstance(raw, dict):
        raise CountsParseError("Record must be a JSON object", line=line)
    for key in raw:
        if key not in RECORD_FIELDS:
            raise CountsParseError("Unknown field", line=line, field=key)
    for key in RECORD_FIELDS:
        if key not in raw:
            raise CountsParseError("Missing field", line=line, field=key)

    device = raw["device"]
    if not isinstance(device, str) or not device:
        raise CountsParseError("device must be a non-empty string", line=line, field="device")
    try:
        gate = Gate(raw["gate"])
    except ValueError as e:
        raise CountsParseError(f"gate must be one of {[g.value for g in Gate]}", line=line, field="gate") from e
    try:
        initial_state = InitialState(raw["initial_state"])
    except ValueError as e:
        raise CountsParseError(f"initial_state must be one of {[s.value for s in InitialState]}",
                               line=line, field="initial_state") from e

    shots = raw["shots"]
    if not isinstance(shots, int) or isinstance(shots, bool) or shots <= 0:
        raise CountsParseError("shots must be a positive integer", line=line, field="shots")
    counts = raw["counts"]
    if (not isinstance(counts, list) or len(counts) != 4
            or any(not isinstance(c, int) or isinstance(c, bool) or c < 0 for c in counts)):
        raise CountsParseError("counts must be 4 non-negative integers", line=line, field="counts")
    if sum(counts) > shots:
        raise CountsParseError(f"counts sum to {sum(counts)}, exceeding {shots} shots", line=line, field="counts")

    return CountsRecord(device=device, gate=gate, initial_state=initial_state,
                        counts=tuple(counts), shots=shots)


def load_counts(path: Union[str, Path]) -> List[CountsRecord]:
    """
    Load counts records from a UTF-8 JSON array

    Args:
        path: File holding [{device, gate, initial_state, counts, shots}, ...]

    Returns:
        Parsed records in file order; an empty file gives an empty list

    Raises:
        CountsParseError: Malformed JSON or a record violating the schema
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot read counts file {path}: {e}")
        raise CountsParseError(f"Cannot read counts file {path}: {e}") from e
    except UnicodeDecodeError as e:
        logger.error(f"Counts file {path} is not valid UTF-8: {e}")
        raise CountsParseError(f"Counts file {path} is not valid UTF-8: {e}") from e

    records = [_parse_record(raw, line) for line, raw in _iter_json_array(text)]
    logger.info(f"Loaded {len(records)} counts records from {path}")
    return records
