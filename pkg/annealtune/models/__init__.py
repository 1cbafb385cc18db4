"""Data models for annealtune."""

from .common import BaseModel, FrozenModel
from .ising import Edge, IsingModel, QuboModel, edge_key
from .hardware import ChimeraSpec, HardwareGraph, HardwareDocument
from .sampleset import SampleSet
from .problem import ProblemGraph
from .experiment import (
    AnnealConfig,
    BiasModelParams,
    ChainStrengthRule,
    DEConfig,
    ExperimentConfig,
    ProblemKind,
    Sense,
    Technique,
)
from .results import (
    FitnessRecord,
    ObjectiveRecord,
    OracleResult,
    SolveStats,
    ValidationReport,
    Violation,
)

__all__ = [
    "BaseModel",
    "FrozenModel",
    "Edge",
    "IsingModel",
    "QuboModel",
    "edge_key",
    "ChimeraSpec",
    "HardwareGraph",
    "HardwareDocument",
    "SampleSet",
    "ProblemGraph",
    "AnnealConfig",
    "BiasModelParams",
    "ChainStrengthRule",
    "DEConfig",
    "ExperimentConfig",
    "ProblemKind",
    "Sense",
    "Technique",
    "FitnessRecord",
    "ObjectiveRecord",
    "OracleResult",
    "SolveStats",
    "ValidationReport",
    "Violation",
]
