"""Controllability diagnostics, tracking metrics, Lyapunov traces and filtering."""
from adaptiveGHX.analysis.controllability import ControllabilityReport, controllability_report
from adaptiveGHX.analysis.filters import savgol_filter
from adaptiveGHX.analysis.lyapunov import barbalat_check, lyapunov_trace
from adaptiveGHX.analysis.metrics import MetricsSummary, control_effort, itae, mae, summarize
