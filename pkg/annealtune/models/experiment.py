"""Experiment configuration models."""

import hashlib
import json
import math
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import Field, field_validator, model_validator

from annealtune.core.exceptions import UnknownTechniqueError, ValidationException
from .common import BaseModel, FrozenModel
from .hardware import ChimeraSpec, HardwareDocument


class ProblemKind(str, Enum):
    """Supported NP-hard problems."""
    MAXCLIQUE = "maxclique"
    MAXCUT = "maxcut"
    GRAPHPART = "graphpart"


class Sense(str, Enum):
    """Optimization direction of a problem's natural objective."""
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class Technique(str, Enum):
    """Tunable parameter families."""
    SR_Q = "SR(Q)"
    SR_C = "SR(C)"
    AO_Q = "AO(Q)"
    AO_C = "AO(C)"
    CW_L = "CW(L)"
    CW_Q = "CW(Q)"

    @property
    def cli_name(self) -> str:
        return self.name

    @property
    def family(self) -> str:
        return self.value[:2]

    @property
    def chain_level(self) -> bool:
        return self in (Technique.SR_C, Technique.AO_C)


def parse_technique(name: str) -> Technique:
    """Accept both ``SR_Q`` and ``SR(Q)`` spellings."""
    for technique in Technique:
        if name in (technique.name, technique.value):
            return technique
    raise UnknownTechniqueError(name, [t.name for t in Technique])


DEFAULT_OE = "Default-OE"
DEFAULT_RE = "Default-RE"
BASELINES = (DEFAULT_OE, DEFAULT_RE)


class FitnessMode(str, Enum):
    """Per-graph aggregation of read values inside the training objective."""
    BEST = "best"
    MEAN = "mean"


class DefaultREMode(str, Enum):
    """How the random-embedding baseline picks its embedding."""
    FIXED = "fixed"
    PER_GRAPH = "per_graph"


class ChainStrengthKind(str, Enum):
    CONSTANT = "constant"
    DENSITY_SCALED = "density_scaled"


class ChainStrengthRule(FrozenModel):
    """Chain strength as a constant or as ``prefactor * a * b * density``.

    ``a`` and ``b`` default to the two halves of a balanced split of the
    graph's vertices.
    """

    kind: ChainStrengthKind = ChainStrengthKind.CONSTANT
    value: float = Field(default=1.0, gt=0)
    prefactor: float = Field(default=20.0, gt=0)
    a: Optional[int] = Field(default=None, ge=1)
    b: Optional[int] = Field(default=None, ge=1)

    def strength(self, n: int, density: float) -> float:
        if self.kind == ChainStrengthKind.CONSTANT.value:
            return self.value
        a = self.a if self.a is not None else n // 2
        b = self.b if self.b is not None else math.ceil(n / 2)
        strength = self.prefactor * a * b * density
        if strength <= 0:
            raise ValidationException("chain_strength", strength, "chain strength must be positive")
        return strength

    @classmethod
    def default_for(cls, problem: ProblemKind) -> "ChainStrengthRule":
        if ProblemKind(problem) == ProblemKind.GRAPHPART:
            return cls(kind=ChainStrengthKind.DENSITY_SCALED)
        return cls(kind=ChainStrengthKind.CONSTANT, value=1.0)


class DEConfig(BaseModel):
    """Differential evolution settings (rand/1/bin, no polishing)."""

    population: int = Field(default=80, ge=1, description="Members per generation")
    generations: int = Field(default=50, ge=1, description="Generations after the initial one")
    F: float = Field(default=0.8, gt=0, le=2, description="Differential weight")
    CR: float = Field(default=0.9, ge=0, le=1, description="Crossover rate")
    elitism: bool = True
    seeded_members: List[List[float]] = Field(default_factory=list)
    seed: int = Field(default=0, ge=0)


class BiasModelParams(FrozenModel):
    """Parameters of one simulated machine's imperfections."""

    machine_seed: int = Field(default=0, ge=0)
    sigma_h: float = Field(default=0.02, ge=0, description="Std-dev of the persistent h bias")
    epsilon: float = Field(default=0.01, ge=0, description="Coupler-to-field leakage coefficient")
    dac_bits: int = Field(default=8, ge=1, le=53, description="Coefficient precision in bits")
    kappa: float = Field(default=1.0, ge=0, description="Anneal-offset sensitivity")

    @classmethod
    def zero(cls, kappa: float = 1.0) -> "BiasModelParams":
        """An ideal machine: no drift, no leakage, full precision."""
        return cls(sigma_h=0.0, epsilon=0.0, dac_bits=53, kappa=kappa)


class AnnealConfig(BaseModel):
    """Sampler settings for one ``sample`` call."""

    num_reads: int = Field(default=1000, ge=1)
    anneal_time_us: float = Field(default=1000.0, gt=0)
    sweeps: int = Field(default=1000, ge=1, description="Simulation fidelity knob")
    offsets: Dict[int, float] = Field(default_factory=dict, description="Anneal offset per qubit")
    seed: int = Field(default=0, ge=0)
    beta_min: float = Field(default=0.1, gt=0)
    beta_max: float = Field(default=10.0, gt=0)
    overhead_us: float = Field(default=200.0, ge=0, description="Per-read readout/programming time")


class ExperimentCounts(BaseModel):
    """Protocol sizes."""

    train_graphs: int = Field(default=10, ge=1)
    test_graphs: int = Field(default=10, ge=1)
    train_reads: int = Field(default=1000, ge=1)
    test_reads: int = Field(default=10000, ge=1)
    candidate_embeddings: int = Field(default=30, ge=1)


class ExperimentConfig(BaseModel):
    """Everything that determines the artifacts of one run directory."""

    problem: ProblemKind = ProblemKind.MAXCLIQUE
    density: float = Field(default=0.5, gt=0, le=1)
    hardware: HardwareDocument = Field(
        default_factory=lambda: HardwareDocument(spec=ChimeraSpec(rows=4, cols=4, shore=4))
    )
    graph_size: Optional[int] = Field(default=None, ge=1, description="Vertices per graph; defaults to the clique capacity")
    bias: BiasModelParams = Field(default_factory=BiasModelParams)
    counts: ExperimentCounts = Field(default_factory=ExperimentCounts)
    chain_strength: Optional[ChainStrengthRule] = None
    balance_penalty: Optional[float] = Field(default=None, gt=0)
    techniques: List[Technique] = Field(default_factory=lambda: list(Technique))
    de: DEConfig = Field(default_factory=DEConfig)
    anneal: AnnealConfig = Field(default_factory=AnnealConfig)
    fitness_mode: FitnessMode = FitnessMode.BEST
    default_re_mode: DefaultREMode = DefaultREMode.FIXED
    seed: int = Field(default=0, ge=0)

    @field_validator("techniques", mode="before")
    @classmethod
    def parse_techniques(cls, v):
        """Allow CLI spellings in config files."""
        return [parse_technique(t).value if isinstance(t, str) else t for t in v]

    @model_validator(mode="after")
    def check_anneal(self):
        if self.anneal.offsets:
            raise ValueError("anneal.offsets must be empty; offsets come from trained parameters")
        return self

    def chain_strength_rule(self) -> ChainStrengthRule:
        return self.chain_strength or ChainStrengthRule.default_for(self.problem)

    def config_hash(self) -> str:
        """SHA-256 of the canonical dump, ignoring the technique list."""
        payload = self.model_dump(mode="json", exclude={"techniques"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def summary(self) -> Dict[str, Any]:
        return {
            "problem": self.problem,
            "density": self.density,
            "hardware": self.hardware.spec.label,
            "seed": self.seed,
            "config_hash": self.config_hash()[:12],
        }
