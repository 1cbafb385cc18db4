"""Result records and persisted artifacts."""

from typing import Any, Dict, List, Optional

from pydantic import Field, model_validator

from .common import BaseModel
from .experiment import ProblemKind, Sense


class Violation(BaseModel):
    """One embedding defect."""
    kind: str = Field(..., description="chain_missing | chain_empty | unknown_qubit | chain_disconnected | chain_overlap | edge_uncovered")
    subject: str = Field(..., description="Logical variable, qubit or edge the violation is about")


class ValidationReport(BaseModel):
    """Outcome of ``validate_embedding``; an empty list means valid."""
    violations: List[Violation] = Field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return sorted({v.kind for v in self.violations})


class ObjectiveRecord(BaseModel):
    """Problem-level evaluation of one logical assignment.

    ``metric`` is the clique size (0 for a non-clique), the cut size, or the
    number of cut edges. ``valid`` is clique validity for MaxClique, balance
    for graph partitioning and always true for MaxCut.
    """
    kind: ProblemKind
    metric: int = Field(..., ge=0)
    valid: bool
    imbalance: Optional[int] = Field(default=None, ge=0)


class OracleResult(BaseModel):
    """Exact optimum with up to a capped number of witnesses."""
    optimum_value: float
    witnesses: List[Dict[int, int]] = Field(default_factory=list)
    exhaustive: bool = Field(default=True, description="False when the witness list was truncated")


class FitnessRecord(BaseModel):
    """One generation of a differential evolution run."""
    gen: int = Field(..., ge=1, description="Generation index; the initial population is not recorded")
    best_raw: List[float]
    best_fitness: float
    mean_fitness: float
    best_physical_energy: Optional[float] = None


class SolveStats(BaseModel):
    """Inputs of a time-to-solution computation."""
    t_qpu_us: float = Field(..., ge=0)
    hits: int = Field(..., ge=0)
    reads: int = Field(..., ge=0)
    target_value: float
    target_kind: str = Field(default="optimal", pattern="^(optimal|best_known)$")

    @model_validator(mode="after")
    def check_hits(self):
        if self.hits > self.reads:
            raise ValueError("hits cannot exceed reads")
        return self


class CandidateScore(BaseModel):
    """Default-parameter score of one candidate embedding."""
    index: int
    score: Optional[float] = Field(default=None, description="Mean best value over training graphs")
    error: Optional[str] = None


class EmbeddingArtifact(BaseModel):
    config_hash: str
    hardware_ref: str
    chains: Dict[str, List[int]]


class CandidatesArtifact(BaseModel):
    config_hash: str
    hardware_ref: str
    candidates: List[Dict[str, List[int]]]


class SelectionArtifact(BaseModel):
    config_hash: str
    hardware_ref: str
    selected_index: int
    sense: Sense
    scores: List[CandidateScore]
    chains: Dict[str, List[int]]


class CreatedBy(BaseModel):
    config_hash: str
    seed: int


class ParameterArtifact(BaseModel):
    """A trained parameter vector for one technique on one embedding."""
    config_hash: str
    technique: str
    values: Dict[str, Any]
    embedding_ref: str
    created_by: CreatedBy


class TrainingArtifact(BaseModel):
    config_hash: str
    technique: str
    seed: int
    embedding_ref: str
    dimension: int
    evaluations: int
    best_raw: List[float]
    best_fitness: float
    history: List[FitnessRecord]
    decoded_params_ref: str = Field(..., description="Run-relative path of the parameter-vector artifact")
    config: Dict[str, Any]


class GraphTestResult(BaseModel):
    """Outcome of one test graph under one method."""
    graph_index: int
    n: int
    num_edges: int
    seed: int
    reads: int
    qpu_time_us: float
    best_value: float
    best_metric: Optional[int] = Field(default=None, description="Best raw metric over counted reads")
    metric_histogram: Dict[str, int] = Field(default_factory=dict, description="Raw metric -> read count; partition reads count only when balanced")
    oracle_target: Optional[int] = None
    best_physical_energy: float
    chain_break_fraction: float


class EvaluationArtifact(BaseModel):
    config_hash: str
    problem: ProblemKind
    density: float
    method: str
    sense: Sense
    embedding_ref: str
    graphs: List[GraphTestResult]


class MethodSummary(BaseModel):
    """Aggregation input: one method on one problem/density cell."""
    problem: ProblemKind
    density: float
    technique: str
    tts_us: List[float] = Field(default_factory=list, description="Per graph; inf when unsolved")
    improvements: List[Optional[float]] = Field(default_factory=list)
    best_metrics: List[float] = Field(default_factory=list)
    target_kind: str = "optimal"


class ReportRow(BaseModel):
    problem: ProblemKind
    density: float
    technique: str
    mean_tts_us: Optional[float] = None
    solved_count: int = 0
    improvement_pct: Optional[float] = None
    mean_best_metric: Optional[float] = None
    metric_delta: Optional[float] = Field(default=None, description="Mean best metric minus Default-OE's")
    target_kind: str = "optimal"
    status: str = Field(default="not_run", pattern="^(ok|no_solve|not_run)$")
    bold: bool = False


class ReportArtifact(BaseModel):
    config_hash: str
    rows: List[ReportRow]
