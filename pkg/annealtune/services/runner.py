"""
Fixed-embedding solve composite.

One call runs the whole submission path for one problem graph:
formulate, embed (with chain weights), spin-reverse, auto-scale, pass through
the machine's bias model, anneal (with offsets), undo the reversal and
majority-vote the chains back to logical spins.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import structlog

from ..core.seeding import derive_seed
from ..models.embedding import Embedding
from ..models.experiment import AnnealConfig, FitnessMode, ProblemKind, Sense
from ..models.ising import IsingModel
from ..models.parameters import CHAIN, TechniqueParameters, offsets_as_config
from ..models.problem import ProblemGraph
from ..models.sampleset import SampleSet
from .embedding import chain_break_fraction, embed_ising, restrict_embedding, unembed_majority_vote
from .problems import formulation_ising, formulation_values, objective_metrics, problem_sense
from .sampler import BiasModel, apply_bias_model, sample
from .transforms import apply_spin_reversal, auto_scale, expand_chain_mask, invert_sampleset

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    """Logical reads of one solve plus the values derived from them."""

    kind: ProblemKind
    logical: SampleSet
    values: np.ndarray
    metrics: np.ndarray
    physical_energies: np.ndarray
    qpu_time_us: float
    chain_break_fraction: float

    @property
    def sense(self) -> Sense:
        return problem_sense(self.kind)

    @property
    def num_reads(self) -> int:
        return self.logical.num_reads

    @property
    def best_value(self) -> float:
        if self.sense == Sense.MAXIMIZE:
            return float(self.values.max())
        return float(self.values.min())

    @property
    def mean_value(self) -> float:
        weights = self.logical.num_occurrences
        return float(np.average(self.values, weights=weights))

    @property
    def best_physical_energy(self) -> float:
        return float(self.physical_energies.min())

    @property
    def best_metric(self) -> Optional[int]:
        counted = self.metrics[self.metrics >= 0]
        if counted.size == 0:
            return None
        if self.sense == Sense.MAXIMIZE:
            return int(counted.max())
        return int(counted.min())

    def score(self, mode: FitnessMode = FitnessMode.BEST) -> float:
        """Per-graph training score in the problem's natural sense."""
        if FitnessMode(mode) == FitnessMode.MEAN:
            return self.mean_value
        return self.best_value

    def metric_histogram(self) -> Dict[str, int]:
        """Raw metric -> read count over counted reads."""
        histogram: Dict[int, int] = {}
        for metric, occ in zip(self.metrics, self.logical.num_occurrences):
            if metric >= 0:
                histogram[int(metric)] = histogram.get(int(metric), 0) + int(occ)
        return {str(m): histogram[m] for m in sorted(histogram)}


def _physical_model(
    logical: IsingModel,
    emb: Embedding,
    chain_strength: float,
    params: TechniqueParameters,
):
    embedded = embed_ising(logical, emb, chain_strength, params.chain_weights)
    physical = embedded.model
    mask = None
    if params.spin_reversal is not None:
        mask = params.spin_reversal
        if mask.level == CHAIN:
            mask = expand_chain_mask(mask.restricted(emb.variables), emb)
        physical, mask = apply_spin_reversal(physical, mask)
    return embedded, physical, mask


def solve(
    kind: ProblemKind,
    graph: ProblemGraph,
    emb: Embedding,
    params: TechniqueParameters,
    bias: BiasModel,
    anneal: AnnealConfig,
    chain_strength: float,
    balance_penalty: Optional[float] = None,
    max_workers: int = 1,
) -> SolveOutcome:
    """Solve ``graph`` once with ``params`` applied on the fixed embedding."""
    kind = ProblemKind(kind)
    logical = formulation_ising(kind, graph, balance_penalty)
    sub_emb = restrict_embedding(emb, graph.vertices)
    embedded, physical, mask = _physical_model(logical, sub_emb, chain_strength, params)

    scaled, scale = auto_scale(physical)
    realized = apply_bias_model(scaled, bias)
    config = anneal.model_copy(update={"offsets": offsets_as_config(params.offsets)})
    samples = sample(realized, config, emb.hardware, kappa=bias.kappa, max_workers=max_workers)

    if mask is not None:
        samples = invert_sampleset(mask, samples)
    physical_energies = embedded.model.energies(samples.records, samples.variables)
    samples = samples.replace(energies=physical_energies)

    unembedded = unembed_majority_vote(samples, sub_emb, derive_seed(anneal.seed, "unembed"), model=logical)
    values = formulation_values(kind, graph, unembedded.energies)
    metrics = objective_metrics(kind, graph, unembedded.records)

    outcome = SolveOutcome(
        kind=kind,
        logical=unembedded,
        values=values,
        metrics=metrics,
        physical_energies=physical_energies,
        qpu_time_us=samples.qpu_time_us,
        chain_break_fraction=chain_break_fraction(samples, sub_emb),
    )
    logger.debug(
        "solved",
        problem=kind.value,
        n=graph.n,
        technique=params.technique,
        scale=scale,
        best_value=outcome.best_value,
        best_physical_energy=outcome.best_physical_energy,
    )
    return outcome
