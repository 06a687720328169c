"""Synthetic experiments and parameter extraction for transmon characterization."""

from .engine import FitError, FitResult, lsq_fit, numerical_jacobian, propagate
from .fitters import (
    DispersiveShift,
    dispersive_shift_measurement,
    fit_avoided_crossing,
    fit_chevron,
    fit_echo,
    fit_ramsey,
    fit_resonator,
    fit_t1,
    fit_trace,
    fit_two_tone,
)
from .models import (
    chevron_model,
    chevron_td_model,
    echo_model,
    flux_branches,
    flux_map_model,
    internal_q,
    ramsey_model,
    s21_notch_model,
    t1_model,
    two_tone_model,
)
from .report import ROWS, format_uncertainty, summarize_fits, table2_report
from .synth import MODELS, Scenario, notch_params, scenario, synthesize
from .traces import AXES, ExperimentTrace, read_trace_csv, write_trace_csv

__all__ = [
    "FitError", "FitResult", "lsq_fit", "numerical_jacobian", "propagate",
    "DispersiveShift", "dispersive_shift_measurement", "fit_avoided_crossing", "fit_chevron",
    "fit_echo", "fit_ramsey", "fit_resonator", "fit_t1", "fit_trace", "fit_two_tone",
    "chevron_model", "chevron_td_model", "echo_model", "flux_branches", "flux_map_model",
    "internal_q", "ramsey_model", "s21_notch_model", "t1_model", "two_tone_model",
    "MODELS", "Scenario", "notch_params", "scenario", "synthesize",
    "AXES", "ExperimentTrace", "read_trace_csv", "write_trace_csv",
    "ROWS", "format_uncertainty", "summarize_fits", "table2_report",
]
