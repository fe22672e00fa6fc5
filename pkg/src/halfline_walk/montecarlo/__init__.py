"""Monte Carlo estimates and the exact small-horizon oracle."""

from .dp import dp_exact_survival
from .engine import (
    GeometricEstimate,
    LadderSample,
    LadderSamples,
    SimConfig,
    SurvivalCurve,
    default_checkpoints,
    sample_increments_compiled,
    simulate_geometric,
    simulate_ladder,
    simulate_survival,
)

__all__ = [
    "GeometricEstimate", "LadderSample", "LadderSamples", "SimConfig", "SurvivalCurve",
    "default_checkpoints", "dp_exact_survival", "sample_increments_compiled",
    "simulate_geometric", "simulate_ladder", "simulate_survival",
]
