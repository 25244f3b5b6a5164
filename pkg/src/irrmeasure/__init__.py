"""Exact reconnaissance of irrationality measures from parametrized integrals."""

from .diophantine import (
    MeasureBound,
    ScalingRule,
    alladi_robinson_measure,
    arctan_measure,
    empirical_delta,
    measure_bound,
    salikhov_nu,
)
from .integrate import ExactValue, initial_values, integrate_rational
from .pipeline import recon
from .recurrence import LinearRecurrence, characteristic_poly, evaluate_exact, growth_rates
from .telescope import HyperexponentialKernel, derive_recurrence, verify_certificate

__all__ = [
    "ExactValue",
    "HyperexponentialKernel",
    "LinearRecurrence",
    "MeasureBound",
    "ScalingRule",
    "alladi_robinson_measure",
    "arctan_measure",
    "characteristic_poly",
    "derive_recurrence",
    "empirical_delta",
    "evaluate_exact",
    "growth_rates",
    "initial_values",
    "integrate_rational",
    "measure_bound",
    "recon",
    "salikhov_nu",
    "verify_certificate",
]
