"""Affine balanced two-color urns with multiple drawings: analytics, exact
enumeration, Monte Carlo simulation and verification of the limit theorems."""

from .analytics import LimitConstants, LimitMoments, Mode, ResourceGuard, limit_constants, mean_white
from .model import (
    Regime,
    SamplingScheme,
    SpecError,
    StepOutcome,
    UrnClass,
    UrnSpec,
    build_rows,
    check_tenable,
    classify,
    swap_colors,
)
from .oracle import ExactDistribution, exact_distribution, exact_step_law, reachability_scan
from .simulator import Trajectory, run, tail_sums
from .stats import VerificationReport, VerificationTest

__all__ = [
    "ExactDistribution", "LimitConstants", "LimitMoments", "Mode", "Regime", "ResourceGuard",
    "SamplingScheme", "SpecError", "StepOutcome", "Trajectory", "UrnClass", "UrnSpec",
    "VerificationReport", "VerificationTest", "build_rows", "check_tenable", "classify",
    "exact_distribution", "exact_step_law", "limit_constants", "mean_white", "reachability_scan",
    "run", "swap_colors", "tail_sums",
]
