"""
Differential evolution over technique parameter vectors.

DE works on raw vectors in [0, 1]^d. A SearchSpace knows how to decode a raw
vector into TechniqueParameters: binary dimensions threshold at 0.5, grid
dimensions scale to [lo, hi] and snap, simplex groups floor and normalize.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from ..core.exceptions import OptimizerConfigError
from ..core.seeding import derive_seed
from ..models.embedding import Embedding
from ..models.experiment import AnnealConfig, DEConfig, FitnessMode, ProblemKind, Sense, Technique
from ..models.hardware import HardwareGraph
from ..models.parameters import CHAIN, QUBIT, SpinReversalMask, TechniqueParameters
from ..models.problem import ProblemGraph
from ..models.results import FitnessRecord
from .problems import problem_sense
from .runner import solve
from .sampler import BiasModel
from .transforms import (
    chain_offset_range,
    chain_weights_from_raw,
    default_random_mask,
    expand_chain_offsets,
    snap_offsets,
)

logger = structlog.get_logger(__name__)

BINARY = "binary"
GRID = "grid"
SIMPLEX = "simplex"
MIN_POPULATION = 4
BINARY_THRESHOLD = 0.5


@dataclass(frozen=True)
class DimensionSpec:
    """One raw coordinate: what it controls and how it decodes."""

    kind: str
    key: Union[int, Tuple[int, int]]
    lo: float = 0.0
    hi: float = 1.0
    step: float = 0.0
    group: Optional[Union[int, Tuple[int, int]]] = None


@dataclass(frozen=True, eq=False)
class SearchSpace:
    technique: Technique
    dims: Tuple[DimensionSpec, ...]
    embedding: Embedding

    @property
    def dimension(self) -> int:
        return len(self.dims)

    @property
    def hardware(self) -> HardwareGraph:
        return self.embedding.hardware

    def clip(self, raw: Sequence[float]) -> np.ndarray:
        raw = np.asarray(raw, dtype=np.float64)
        if raw.shape != (self.dimension,):
            raise OptimizerConfigError("raw", list(raw.shape), f"expected a vector of length {self.dimension}")
        return np.clip(raw, 0.0, 1.0)

    def decode(self, raw: Sequence[float]) -> TechniqueParameters:
        raw = self.clip(raw)
        technique = Technique(self.technique)
        if technique.family == "SR":
            level = CHAIN if technique.chain_level else QUBIT
            bits = {dim.key: int(x >= BINARY_THRESHOLD) for dim, x in zip(self.dims, raw)}
            return TechniqueParameters(technique=technique.value, spin_reversal=SpinReversalMask(level, bits))

        if technique.family == "AO":
            values = {dim.key: dim.lo + x * (dim.hi - dim.lo) for dim, x in zip(self.dims, raw)}
            if technique.chain_level:
                offsets = expand_chain_offsets(values, self.embedding, self.hardware)
            else:
                offsets = snap_offsets(values, self.hardware)
            return TechniqueParameters(technique=technique.value, offsets=offsets)

        groups: Dict = {}
        for dim, x in zip(self.dims, raw):
            groups.setdefault(dim.group, []).append(x)
        return TechniqueParameters(
            technique=technique.value,
            chain_weights=chain_weights_from_raw(technique.value, groups),
        )

    def default_raw(self) -> np.ndarray:
        """Raw vector decoding to the annealer defaults.

        No reversal, zero offsets and uniform shares.
        """
        defaults = []
        for dim in self.dims:
            if dim.kind == GRID:
                defaults.append((0.0 - dim.lo) / (dim.hi - dim.lo) if dim.hi > dim.lo else 0.0)
            elif dim.kind == SIMPLEX:
                defaults.append(0.5)
            else:
                defaults.append(0.0)
        return np.asarray(defaults, dtype=np.float64)

    def seeded_members(self, seed: int) -> List[np.ndarray]:
        """Generation-0 members: the defaults, plus a random half-flip mask for SR."""
        members = [self.default_raw()]
        if Technique(self.technique).family == "SR":
            mask = default_random_mask([dim.key for dim in self.dims], seed)
            members.append(np.array([0.75 if mask.bits[dim.key] else 0.25 for dim in self.dims]))
        return members


def build_search_space(technique: Technique, emb: Embedding) -> SearchSpace:
    """Dimensions of ``technique`` over the fixed embedding ``emb``."""
    technique = Technique(technique)
    hw = emb.hardware
    dims: List[DimensionSpec] = []

    if technique == Technique.SR_Q:
        dims = [DimensionSpec(BINARY, q) for q in emb.qubits]
    elif technique == Technique.SR_C:
        dims = [DimensionSpec(BINARY, v) for v in emb.variables]
    elif technique == Technique.AO_Q:
        for q in emb.qubits:
            lo, hi = hw.offset_range(q)
            dims.append(DimensionSpec(GRID, q, lo, hi, hw.offset_step))
    elif technique == Technique.AO_C:
        for v, chain in emb.chains.items():
            lo, hi = chain_offset_range(chain, hw)
            dims.append(DimensionSpec(GRID, v, lo, hi, hw.offset_step))
    elif technique == Technique.CW_L:
        for v, chain in emb.chains.items():
            dims.extend(DimensionSpec(SIMPLEX, q, group=v) for q in chain)
    else:
        for pair, couplers in emb.inter_chain_couplers.items():
            dims.extend(DimensionSpec(SIMPLEX, coupler, group=pair) for coupler in couplers)

    return SearchSpace(technique=technique, dims=tuple(dims), embedding=emb)


@dataclass
class DEResult:
    best_raw: np.ndarray
    best_fitness: float
    history: List[FitnessRecord]
    evaluations: int


def _donors(rng: np.random.Generator, population: int, member: int) -> np.ndarray:
    picks = rng.choice(population - 1, size=3, replace=False)
    return picks + (picks >= member)


def _evaluate(
    objective: Callable[[np.ndarray], float],
    members: Sequence[np.ndarray],
    max_workers: int,
) -> np.ndarray:
    if max_workers > 1 and len(members) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            return np.array(list(executor.map(objective, members)), dtype=np.float64)
    return np.array([objective(m) for m in members], dtype=np.float64)


def differential_evolution(
    objective: Callable[[np.ndarray], float],
    space: Union[SearchSpace, int],
    config: DEConfig,
    max_workers: int = 1,
) -> DEResult:
    """DE/rand/1/bin minimizing ``objective`` over [0, 1]^d. No polishing."""
    if config.population < MIN_POPULATION:
        raise OptimizerConfigError(
            "population", config.population, f"rand/1 needs at least {MIN_POPULATION} members"
        )
    d = space if isinstance(space, int) else space.dimension
    if d < 1:
        raise OptimizerConfigError("dimension", d, "search space is empty")

    rng = np.random.default_rng(config.seed)
    population = rng.random((config.population, d))
    for i, member in enumerate(config.seeded_members[: config.population]):
        member = np.asarray(member, dtype=np.float64)
        if member.shape != (d,):
            raise OptimizerConfigError("seeded_members", i, f"expected length {d}, got {member.size}")
        population[i] = np.clip(member, 0.0, 1.0)

    fitness = _evaluate(objective, list(population), max_workers)
    evaluations = config.population
    history: List[FitnessRecord] = []

    for generation in range(1, config.generations + 1):
        elite = int(np.argmin(fitness))
        trials = population.copy()
        for i in range(config.population):
            a, b, c = population[_donors(rng, config.population, i)]
            mutant = np.clip(a + config.F * (b - c), 0.0, 1.0)
            cross = rng.random(d) < config.CR
            cross[rng.integers(d)] = True
            trials[i] = np.where(cross, mutant, population[i])

        contenders = [i for i in range(config.population) if not (config.elitism and i == elite)]
        trial_fitness = _evaluate(objective, [trials[i] for i in contenders], max_workers)
        evaluations += len(contenders)
        for i, value in zip(contenders, trial_fitness):
            if value <= fitness[i]:
                population[i] = trials[i]
                fitness[i] = value

        best = int(np.argmin(fitness))
        history.append(FitnessRecord(
            gen=generation,
            best_raw=population[best].tolist(),
            best_fitness=float(fitness[best]),
            mean_fitness=float(fitness.mean()),
        ))
        logger.debug(
            "de_generation",
            generation=generation,
            best_fitness=float(fitness[best]),
            mean_fitness=float(fitness.mean()),
        )

    best = int(np.argmin(fitness))
    return DEResult(
        best_raw=population[best].copy(),
        best_fitness=float(fitness[best]),
        history=history,
        evaluations=evaluations,
    )


def raw_key(raw: Sequence[float]) -> int:
    """Content-derived evaluation id of a raw vector."""
    return derive_seed("raw", np.asarray(raw, dtype=np.float64))


@dataclass(eq=False)
class TrainingObjective:
    """Mean per-graph score of decoded parameters, signed for minimization."""

    technique: Technique
    problem: ProblemKind
    graphs: List[ProblemGraph]
    space: SearchSpace
    bias: BiasModel
    anneal: AnnealConfig
    chain_strengths: List[float]
    balance_penalty: Optional[float] = None
    fitness_mode: FitnessMode = FitnessMode.BEST
    seed: int = 0
    max_workers: int = 1
    calls: int = 0
    physical_energies: Dict[int, float] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def graph_seed(self, raw: Sequence[float], graph_index: int) -> int:
        return derive_seed(self.seed, "train", raw_key(raw), graph_index)

    def __call__(self, raw: Sequence[float]) -> float:
        raw = self.space.clip(raw)
        params = self.space.decode(raw)
        scores, energies = [], []
        for index, graph in enumerate(self.graphs):
            anneal = self.anneal.model_copy(update={"seed": self.graph_seed(raw, index)})
            outcome = solve(
                self.problem,
                graph,
                self.space.embedding,
                params,
                self.bias,
                anneal,
                self.chain_strengths[index],
                self.balance_penalty,
                self.max_workers,
            )
            scores.append(outcome.score(self.fitness_mode))
            energies.append(outcome.best_physical_energy)

        mean = float(np.mean(scores))
        with self._lock:
            self.calls += 1
            self.physical_energies[raw_key(raw)] = float(np.mean(energies))
        return -mean if problem_sense(self.problem) == Sense.MAXIMIZE else mean

    def physical_energy(self, raw: Sequence[float]) -> Optional[float]:
        """Mean best physical energy recorded for ``raw``, if it was evaluated."""
        return self.physical_energies.get(raw_key(self.space.clip(raw)))


def make_training_objective(
    technique: Technique,
    training_graphs: Sequence[ProblemGraph],
    emb: Embedding,
    bias: BiasModel,
    anneal_config: AnnealConfig,
    problem_kind: ProblemKind,
    chain_strengths: Union[float, Sequence[float]] = 1.0,
    balance_penalty: Optional[float] = None,
    fitness_mode: FitnessMode = FitnessMode.BEST,
    seed: int = 0,
    max_workers: int = 1,
) -> TrainingObjective:
    graphs = list(training_graphs)
    if isinstance(chain_strengths, (int, float)):
        chain_strengths = [float(chain_strengths)] * len(graphs)
    return TrainingObjective(
        technique=Technique(technique),
        problem=ProblemKind(problem_kind),
        graphs=graphs,
        space=build_search_space(technique, emb),
        bias=bias,
        anneal=anneal_config,
        chain_strengths=list(chain_strengths),
        balance_penalty=balance_penalty,
        fitness_mode=FitnessMode(fitness_mode),
        seed=seed,
        max_workers=max_workers,
    )
