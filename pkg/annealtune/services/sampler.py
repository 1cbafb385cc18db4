"""
Simulated annealer with per-qubit anneal offsets and a hardware-bias model.

Reads are simulated in fixed-size blocks. Read ``i`` lives in block
``i // READ_BLOCK`` and draws from that block's stream
``default_rng([seed, block])`` at row ``i % READ_BLOCK``; every block draws a
full block of randomness however many of its rows are used. A read therefore
depends only on the seed and its index, not on ``num_reads`` or the worker
count. Within a sweep the two Chimera colour classes are updated alternately;
qubits of one class never couple to each other, so a whole class is a valid
simultaneous Metropolis step.
"""

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple, Union

import numpy as np
import structlog
from scipy import sparse

from ..core.exceptions import MissingVariableError, SamplerInputError
from ..models.embedding import EmbeddedIsing
from ..models.experiment import AnnealConfig, BiasModelParams
from ..models.hardware import ChimeraSpec, HardwareGraph
from ..models.ising import IsingModel, QuadraticModel
from ..models.sampleset import SampleSet
from .transforms import check_offsets

logger = structlog.get_logger(__name__)

READ_BLOCK = 256
H_RANGE = (-2.0, 2.0)
J_RANGE = (-1.0, 1.0)


@dataclass(frozen=True, eq=False)
class BiasModel:
    """One simulated machine: fixed per-qubit drift, leakage, DAC precision."""

    params: BiasModelParams
    h_bias: np.ndarray

    @classmethod
    def from_params(cls, params: BiasModelParams, spec: ChimeraSpec) -> "BiasModel":
        """Draw the persistent drift over the ideal qubit index space."""
        rng = np.random.default_rng(params.machine_seed)
        h_bias = rng.normal(0.0, params.sigma_h, size=spec.num_qubits)
        return cls(params=params, h_bias=h_bias)

    @property
    def leakage_coeff(self) -> float:
        return self.params.epsilon

    @property
    def dac_bits(self) -> int:
        return self.params.dac_bits

    @property
    def kappa(self) -> float:
        return self.params.kappa


def quantize(values: np.ndarray, lo: float, hi: float, bits: int) -> np.ndarray:
    """Round to the nearest of 2**bits evenly spaced levels on [lo, hi]."""
    step = (hi - lo) / (2.0 ** bits - 1.0)
    clipped = np.clip(np.asarray(values, dtype=np.float64), lo, hi)
    return lo + np.rint((clipped - lo) / step) * step


def apply_bias_model(model: Union[EmbeddedIsing, IsingModel], bias: BiasModel) -> IsingModel:
    """Model as the simulated machine realizes it.

    h~_i = Q(h_i + dh_i + eps * sum_j J_ij), J~_ij = Q(J_ij).
    """
    if isinstance(model, EmbeddedIsing):
        model = model.model
    leakage: Dict[int, float] = defaultdict(float)
    for (u, v), w in model.J.items():
        leakage[u] += w
        leakage[v] += w

    variables = model.variables
    drift = np.array(
        [bias.h_bias[q] if 0 <= q < len(bias.h_bias) else 0.0 for q in variables], dtype=np.float64
    )
    raw_h = np.array([model.h[q] for q in variables]) + drift
    raw_h = raw_h + bias.leakage_coeff * np.array([leakage[q] for q in variables])
    h = quantize(raw_h, *H_RANGE, bias.dac_bits)

    edges = sorted(model.J)
    J = quantize(np.array([model.J[e] for e in edges]), *J_RANGE, bias.dac_bits)
    return IsingModel(
        h={q: float(b) for q, b in zip(variables, h)},
        J={e: float(w) for e, w in zip(edges, J)},
        offset=model.offset,
    )


def energy(model: QuadraticModel, assignment: Mapping[int, float]) -> float:
    """sum h_i x_i + sum J_ij x_i x_j + offset."""
    missing = [v for v in model.variables if v not in assignment]
    if missing:
        raise MissingVariableError(missing)
    return model.energy(assignment)


def freeze_sweeps(offsets: np.ndarray, sweeps: int, kappa: float) -> np.ndarray:
    """Last sweep on which each qubit is still updated."""
    raw = np.ceil(sweeps * (1.0 - kappa * np.asarray(offsets, dtype=np.float64)) - 1e-9)
    return np.clip(raw, 0, sweeps).astype(np.int64)


def schedule_betas(offsets: np.ndarray, config: AnnealConfig, kappa: float) -> np.ndarray:
    """``(sweeps, qubits)`` inverse temperatures of the shifted schedules."""
    t = np.arange(1, config.sweeps + 1, dtype=np.float64)[:, None] / config.sweeps
    progress = np.clip(t + kappa * np.asarray(offsets)[None, :], 0.0, 1.0)
    return config.beta_min * (config.beta_max / config.beta_min) ** progress


def _validate(model: QuadraticModel, config: AnnealConfig, hw: HardwareGraph) -> None:
    if model.is_empty():
        raise SamplerInputError("model has no variables")
    unknown = [q for q in model.variables if q not in hw.qubits]
    if unknown:
        raise SamplerInputError("model variables are not working qubits", {"qubits": unknown[:50]})
    foreign = [e for e in model.J if e not in hw.couplers]
    if foreign:
        raise SamplerInputError("model couplers are not hardware couplers", {"couplers": [list(e) for e in foreign[:50]]})
    check_offsets(config.offsets, hw)


def _anneal_block(
    rng: np.random.Generator,
    size: int,
    h: np.ndarray,
    classes: List[Tuple[np.ndarray, sparse.csr_matrix]],
    betas: np.ndarray,
    active: np.ndarray,
) -> np.ndarray:
    # full-block draws keep read i a function of (seed, i) alone
    state = rng.choice(np.array([-1.0, 1.0]), size=(READ_BLOCK, h.size))[:size].copy()
    for t in range(betas.shape[0]):
        for idx, couplings in classes:
            movable = active[t, idx]
            if not movable.any():
                continue
            field = (couplings @ state.T).T + h[idx]
            spins = state[:, idx]
            delta = -2.0 * spins * field
            accept = np.exp(np.minimum(-betas[t, idx] * delta, 0.0))
            draws = rng.random((READ_BLOCK, idx.size))[:size]
            flip = (draws < accept) & movable
            state[:, idx] = np.where(flip, -spins, spins)
    return state.astype(np.int8)


def sample(
    model: IsingModel,
    config: AnnealConfig,
    hw: HardwareGraph,
    kappa: float = 1.0,
    max_workers: int = 1,
) -> SampleSet:
    """Anneal ``model`` ``config.num_reads`` times on ``hw``."""
    _validate(model, config, hw)

    variables = model.variables
    n = len(variables)
    h, rows, cols, vals = model.arrays()
    couplings = sparse.coo_matrix(
        (np.concatenate([vals, vals]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    ).tocsr()
    colours = np.array([hw.spec.colour(q) for q in variables])
    classes = []
    for colour in (0, 1):
        idx = np.flatnonzero(colours == colour)
        if idx.size:
            classes.append((idx, couplings[idx, :].tocsr()))

    offsets = np.array([config.offsets.get(q, 0.0) for q in variables], dtype=np.float64)
    betas = schedule_betas(offsets, config, kappa)
    freeze = freeze_sweeps(offsets, config.sweeps, kappa)
    active = np.arange(1, config.sweeps + 1)[:, None] <= freeze[None, :]

    blocks = -(-config.num_reads // READ_BLOCK)

    def run_block(block: int) -> np.ndarray:
        rng = np.random.default_rng([config.seed, block])
        size = min(READ_BLOCK, config.num_reads - block * READ_BLOCK)
        return _anneal_block(rng, size, h, classes, betas, active)

    if max_workers > 1 and blocks > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            states = list(executor.map(run_block, range(blocks)))
    else:
        states = [run_block(block) for block in range(blocks)]

    unique, counts = np.unique(np.vstack(states), axis=0, return_counts=True)
    energies = model.energies(unique)
    order = np.argsort(energies, kind="stable")

    qpu_time_us = config.num_reads * (config.anneal_time_us + config.overhead_us)
    logger.debug(
        "sampled",
        qubits=n,
        reads=config.num_reads,
        sweeps=config.sweeps,
        distinct=len(unique),
        min_energy=float(energies[order[0]]),
    )
    return SampleSet(
        variables=tuple(variables),
        records=unique[order],
        energies=energies[order],
        num_occurrences=counts[order],
        qpu_time_us=float(qpu_time_us),
    )
