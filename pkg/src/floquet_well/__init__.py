"""Floquet analysis and exact dynamics of two bosons in a driven double well."""

from .analytic import (
    AnalyticSolution,
    RenormalizedCoupling,
    analytic_full_amplitudes,
    analytic_slow_amplitudes,
    averaged_rhs,
    fit_superposition,
    floquet_modes,
    quasienergies,
    renormalized_coupling,
)
from .experiments import (
    CdtResult,
    CrossingReport,
    SpectrumSweep,
    TunnelingTime,
    cdt_check,
    detect_crossings,
    population_series,
    run_switch,
    sweep_spectrum,
    tunneling_time,
)
from .model import (
    DrivingSchedule,
    FloquetMode,
    ModelParams,
    ParameterError,
    StateAmplitudes,
    TimeSeries,
    drive_value,
    reduce_interaction,
)
from .propagate import Monodromy, exact_rhs, integrate, monodromy, numeric_quasienergies
from .special import bessel_j, bessel_parity, bessel_zero

__version__ = "0.1.0"
