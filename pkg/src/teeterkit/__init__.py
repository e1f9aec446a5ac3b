"""teeterkit: quantum models of teetering detectors.

Finite-dimensional quantum-model machinery (probability rule, overlap,
indistinguishable-model constructions, outcome-component reduction), the
closed-form coupled-probe model of a balancing recording device, an
independent split-step solver for cross-validation, and a Monte-Carlo
source-discrimination harness.
"""

__version__ = "0.1.0"

from .flipflop import (
    DimensionlessParams,
    DisagreementCurve,
    FlipFlopParams,
    classical_limit_probability,
    disagreement_probability,
    joint_density,
    quadrant_integral,
    to_dimensionless,
    widths,
)
from .qmodel import (
    DensityOperator,
    ProjectiveResolution,
    SpecificQuantumModel,
    UnitaryEvolution,
    operator_norm,
    overlap,
    probability,
    restrict,
)

__all__ = [
    "__version__",
    "DensityOperator",
    "ProjectiveResolution",
    "SpecificQuantumModel",
    "UnitaryEvolution",
    "probability",
    "overlap",
    "operator_norm",
    "restrict",
    "FlipFlopParams",
    "DimensionlessParams",
    "DisagreementCurve",
    "to_dimensionless",
    "widths",
    "joint_density",
    "disagreement_probability",
    "classical_limit_probability",
    "quadrant_integral",
]
