"""
Command implementations behind the command-line subcommands
"""

import io
import csv
import json
import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.calibration.counts_calibration import (
    ConversionRule,
    Estimator,
    estimate_alpha,
    load_counts,
    quoted_value,
)
from src.cli.config import OutputFormat, RunConfig
from src.cli.discrepancy_report import build_report
from src.evolution.superoperator import ALPHA_MAX, evolve_populations, population_matrix, superoperator_for_basis
from src.exceptions import DomainError, InversionError, UsageError
from src.kernel.decoherence_kernel import KernelValue, NoiseParams, gaussian_rho11, kernel_k, kernel_k_quadratic
from src.multiplet.multiplet_basis import COMPUTATIONAL_LABELS, Gate, InitialState, basis_for_gate
from src.qem.recovery import cost_closed_form, cost_numeric

logger = logging.getLogger(__name__)

ERROR_SENTINEL = float("nan")


@dataclass(frozen=True)
class SweepSpec:
    """A t/tau_s grid and one NoiseParams entry per curve"""

    x_start: float
    x_end: float
    steps: int
    params: Sequence[NoiseParams]

    def __post_init__(self):
        if not (math.isfinite(self.x_start) and math.isfinite(self.x_end)):
            raise UsageError(f"Sweep limits must be finite, got [{self.x_start}, {self.x_end}]")
        if self.x_start < 0:
            raise UsageError(f"x_start must be >= 0, got {self.x_start}")
        if self.x_end <= self.x_start:
            raise UsageError(f"x_end must exceed x_start, got [{self.x_start}, {self.x_end}]")
        if self.steps < 2:
            raise UsageError(f"steps must be at least 2, got {self.steps}")
        if not self.params:
            raise UsageError("A sweep needs at least one parameter set")

    @classmethod
    def from_config(cls, config: RunConfig) -> "SweepSpec":
        try:
            params = tuple(
                NoiseParams.from_coupling(g, config.omega_c_tau_s, delta0=config.delta0, tau_s=config.tau_s)
                for g in config.gamma0_omega_tau
            )
        except DomainError as e:
            raise UsageError(f"Invalid noise parameters: {e}") from e
        return cls(config.x_start, config.x_end, config.steps, params)

    def grid(self) -> np.ndarray:
        return np.linspace(self.x_start, self.x_end, self.steps)


@dataclass
class SweepTable:
    """Rows of a sweep in input order, rendered as CSV or JSON"""

    columns: List[str]
    rows: List[List[float]] = field(default_factory=list)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_number(value) for value in row])
        return buffer.getvalue()

    def to_records(self) -> List[Dict[str, Optional[float]]]:
        return [
            {name: (None if isinstance(value, float) and math.isnan(value) else value)
             for name, value in zip(self.columns, row)}
            for row in self.rows
        ]

    def render(self, output_format: str) -> str:
        if output_format == OutputFormat.JSON:
            return to_json(self.to_records())
        return self.to_csv()


def format_number(value: float) -> str:
    """12 significant digits, 'nan' for error rows"""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def to_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def cmd_kernel_sweep(spec: SweepSpec) -> SweepTable:
    """Re k, Im k and the quadratic approximation of Re k along the grid, one curve per coupling"""
    table = SweepTable(["gamma0_omega_tau", "x", "re_k", "im_k", "re_k_quadratic"])
    for p in spec.params:
        for x in spec.grid():
            k = kernel_k(x, p)
            table.rows.append([p.coupling, float(x), k.re, k.im, kernel_k_quadratic(x, p)])
    logger.info(f"Kernel sweep: {len(spec.params)} curves x {spec.steps} points")
    return table


def cmd_gaussian_sweep(spec: SweepSpec) -> SweepTable:
    """Gaussian rho_11 next to its linear counterpart 1 - 2 Re k"""
    table = SweepTable(["gamma0_omega_tau", "x", "rho11_gaussian", "rho11_linear"])
    for p in spec.params:
        for x in spec.grid():
            table.rows.append([p.coupling, float(x), gaussian_rho11(x, p), 1.0 - 2.0 * kernel_k(x, p).re])
    logger.info(f"Gaussian sweep: {len(spec.params)} curves x {spec.steps} points")
    return table


def cmd_cost_sweep(spec: SweepSpec, gate: Gate = Gate.CNOT) -> SweepTable:
    """
    Mitigation cost along the grid from the numeric inverse and from the closed form

    Rows where the recovery operator does not exist carry the nan sentinel;
    the sweep continues past them. cost_closed_form is nan for every gate but CNOT.
    """
    basis = basis_for_gate(gate)
    table = SweepTable(["gamma0_omega_tau", "x", "alpha", "cost_numeric", "cost_closed_form"])
    for p in spec.params:
        for x in spec.grid():
            alpha = kernel_k(x, p).re
            try:
                numeric = cost_numeric(population_matrix(superoperator_for_basis(basis, KernelValue(alpha, 0.0))))
            except InversionError as e:
                logger.warning(f"No numeric recovery at x={x:.6g}, coupling={p.coupling:.6g}: {e}")
                numeric = ERROR_SENTINEL
            # The closed form exists for the CNOT gate only
            closed = ERROR_SENTINEL
            if Gate(gate) is Gate.CNOT:
                try:
                    closed = cost_closed_form(alpha)
                except DomainError as e:
                    logger.warning(f"No closed-form cost at x={x:.6g}, coupling={p.coupling:.6g}: {e}")
            table.rows.append([p.coupling, float(x), alpha, numeric, closed])
    logger.info(f"Cost sweep ({Gate(gate).value}): {len(spec.params)} curves x {spec.steps} points")
    return table


def cmd_evolve(gate: Gate, initial_state: InitialState, alpha: Optional[float] = None,
               params: Optional[NoiseParams] = None, t_over_tau_s: float = 1.0) -> Dict[str, Any]:
    """
    Outcome probabilities of one noisy gate run

    alpha is used directly when given; otherwise it is Re k(t_over_tau_s) for params.
    """
    if alpha is None:
        if params is None:
            raise UsageError("evolve needs --alpha or noise parameters")
        if not (math.isfinite(t_over_tau_s) and t_over_tau_s >= 0):
            raise UsageError(f"t/tau_s must be finite and >= 0, got {t_over_tau_s}")
        alpha = kernel_k(t_over_tau_s, params).re
    if not (math.isfinite(alpha) and 0.0 <= alpha <= ALPHA_MAX):
        raise UsageError(f"alpha must lie in [0, {ALPHA_MAX}], got {alpha}")

    basis = basis_for_gate(gate)
    probabilities = evolve_populations(initial_state, alpha, basis)
    p = population_matrix(superoperator_for_basis(basis, KernelValue(alpha, 0.0)))
    logger.info(f"Evolved {Gate(gate).value}/{InitialState(initial_state).value} at alpha={alpha:.6g}")
    return {
        "gate": Gate(gate).value,
        "initial_state": InitialState(initial_state).value,
        "alpha": alpha,
        "probabilities": {label: float(value) for label, value in zip(COMPUTATIONAL_LABELS, probabilities)},
        "population_matrix": p.p.tolist(),
    }


def cmd_calibrate(counts_path: str, estimator: Estimator = Estimator.LEAST_SQUARES,
                  rule: ConversionRule = ConversionRule.QUADRATIC_PREFACTOR) -> Dict[str, Any]:
    """Calibrate every record of a counts file, with all three coupling conversions"""
    records = load_counts(counts_path)
    results = []
    for rec in records:
        result = estimate_alpha(rec, estimator=estimator, rule=rule)
        quote = quoted_value(rec.device, rec.gate, rec.initial_state)
        results.append({
            "device": rec.device,
            "gate": rec.gate.value,
            "initial_state": rec.initial_state.value,
            "estimator": result.estimator.value,
            "alpha_hat": result.alpha_hat,
            "clamped": result.clamped,
            "accepted": result.accepted,
            "residuals": [float(r) for r in result.residuals],
            "conversion_rule": result.conversion_rule.value,
            "coupling_hat": result.coupling_hat,
            "couplings": {r.value: value for r, value in result.couplings.items()},
            "quoted_alpha": quote.alpha if quote else None,
        })
    logger.info(f"Calibrated {len(results)} records from {counts_path}")
    return {"records": results}


def cmd_verify() -> Dict[str, Any]:
    """Discrepancy report of every published closed form"""
    return build_report()
