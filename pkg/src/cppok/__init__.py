"""Compound Poisson processes of order k, optionally run on a (inverse) tempered stable clock."""

__version__ = "0.1.0"

from .jumps import Dirac, DiscretePmf, Exponential, InfiniteMomentError, JumpLaw
from .orderk import (
    OrderKParams,
    ProcessPath,
    cppok_mean,
    cppok_pgf,
    cppok_variance,
    dispersion_report,
    levy_measure_weights,
    marginal_cdf,
    martingale_residual,
    pok_pmf,
    pok_pmf_enum,
    sample_cppok_grid,
    sample_cppok_path,
    sample_ppok_path,
    superposition_sample,
)
from .stats import MonteCarloConfig, fit_power_law, run_ensemble
from .subordinators import MtssParams, laplace_exponent, mtss_mean, mtss_variance
from .timechange import InverseMtssClock, MtssClock, TimeChangedSpec

__all__ = [
    "Dirac", "DiscretePmf", "Exponential", "InfiniteMomentError", "JumpLaw",
    "OrderKParams", "ProcessPath", "cppok_mean", "cppok_pgf", "cppok_variance",
    "dispersion_report", "levy_measure_weights", "marginal_cdf", "martingale_residual",
    "pok_pmf", "pok_pmf_enum", "sample_cppok_grid", "sample_cppok_path", "sample_ppok_path",
    "superposition_sample", "MonteCarloConfig", "fit_power_law", "run_ensemble",
    "MtssParams", "laplace_exponent", "mtss_mean", "mtss_variance",
    "InverseMtssClock", "MtssClock", "TimeChangedSpec",
]
