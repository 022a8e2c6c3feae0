"""Secrecy performance of an energy-harvesting untrusted AF relay with destination jamming."""

from ehrelay.params import (
    ChannelSample,
    Geometry,
    McEstimate,
    MetricReport,
    PowerSplitting,
    SystemParams,
    TimeSwitching,
    dbm_to_watts,
    default_params,
    lambda_from_geometry,
    watts_to_dbm,
)
from ehrelay.quadrature import QuadratureError, QuadSpec
from ehrelay.analytic import evaluate_policy

__version__ = "0.1.0"

__all__ = [
    "ChannelSample",
    "Geometry",
    "McEstimate",
    "MetricReport",
    "PowerSplitting",
    "QuadSpec",
    "QuadratureError",
    "SystemParams",
    "TimeSwitching",
    "dbm_to_watts",
    "default_params",
    "evaluate_policy",
    "lambda_from_geometry",
    "watts_to_dbm",
]
