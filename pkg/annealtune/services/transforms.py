"""
Spin reversal, anneal offsets, chain weights and auto-scaling.
"""

import math
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from ..core.exceptions import (
    MaskCoverageError,
    OffsetOutOfRangeError,
    SpinReversalTypeError,
    UnknownQubitError,
)
from ..models.embedding import Embedding
from ..models.hardware import HardwareGraph
from ..models.ising import IsingModel, QuadraticModel
from ..models.parameters import (
    CHAIN,
    QUBIT,
    ChainWeightDistribution,
    OffsetVector,
    SpinReversalMask,
)
from ..models.sampleset import SampleSet

# Largest residual (in offset units) still considered on the step grid
GRID_TOLERANCE = 1e-9
# Floor applied to raw simplex components before normalization
SHARE_FLOOR = 1e-6
DEFAULT_H_MAX = 2.0
DEFAULT_J_MAX = 1.0


def apply_spin_reversal(model: QuadraticModel, mask: SpinReversalMask) -> Tuple[IsingModel, SpinReversalMask]:
    """Gauge transform h_i -> s_i h_i, J_ij -> s_i s_j J_ij.

    Returns the transformed model and the mask restricted to its variables.
    """
    if not isinstance(model, IsingModel):
        raise SpinReversalTypeError(model.vartype)
    missing = [v for v in model.variables if v not in mask.bits]
    if missing:
        raise MaskCoverageError(missing)

    mask = mask.restricted(model.variables)
    sign = {v: mask.sign(v) for v in model.variables}
    h = {v: sign[v] * bias for v, bias in model.h.items()}
    J = {(u, v): sign[u] * sign[v] * w for (u, v), w in model.J.items()}
    return IsingModel(h=h, J=J, offset=model.offset), mask


def invert_solution(mask: SpinReversalMask, assignment: Mapping[int, int]) -> Dict[int, int]:
    """Map a solution of the reversed model back to the original frame."""
    return {v: (-x if mask.bits.get(v, 0) else x) for v, x in assignment.items()}


def invert_sampleset(mask: SpinReversalMask, samples: SampleSet) -> SampleSet:
    """Vectorized :func:`invert_solution`; energies carry over unchanged."""
    signs = np.array([-1 if mask.bits.get(v, 0) else 1 for v in samples.variables], dtype=np.int8)
    return samples.replace(records=samples.records * signs)


def default_random_mask(variables: Iterable[int], seed: int, level: str = QUBIT) -> SpinReversalMask:
    """Flip each variable independently with probability 1/2."""
    variables = sorted(variables)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=len(variables))
    return SpinReversalMask(level=level, bits={v: int(b) for v, b in zip(variables, bits)})


def expand_chain_mask(logical_mask: SpinReversalMask, emb: Embedding) -> SpinReversalMask:
    """Copy each chain's logical bit onto all of its qubits."""
    missing = [v for v in emb.variables if v not in logical_mask.bits]
    if missing:
        raise MaskCoverageError(missing)
    bits = {q: logical_mask.bits[v] for v, chain in emb.chains.items() for q in chain}
    return SpinReversalMask(level=QUBIT, bits=bits)


def snap_value(value: float, lo: float, hi: float, step: float) -> float:
    """Clamp to [lo, hi], then round to a multiple of ``step``; ties go toward zero."""
    value = min(max(value, lo), hi)
    units = abs(value) / step
    whole = math.floor(units)
    if units - whole > 0.5 + GRID_TOLERANCE:
        whole += 1
    snapped = math.copysign(whole * step, value) if whole else 0.0
    if snapped > hi + GRID_TOLERANCE:
        snapped -= step
    elif snapped < lo - GRID_TOLERANCE:
        snapped += step
    return round(snapped, 12) + 0.0


def is_on_grid(value: float, step: float) -> bool:
    units = value / step
    return abs(units - round(units)) * step <= GRID_TOLERANCE


def snap_offsets(raw: Mapping[int, float], hw: HardwareGraph) -> OffsetVector:
    unknown = [q for q in raw if q not in hw.qubits]
    if unknown:
        raise UnknownQubitError(unknown)
    offsets = {}
    for q, value in raw.items():
        lo, hi = hw.offset_range(q)
        offsets[q] = snap_value(float(value), lo, hi, hw.offset_step)
    return OffsetVector(level=QUBIT, offsets=offsets)


def chain_offset_range(chain: Iterable[int], hw: HardwareGraph) -> Tuple[float, float]:
    """Intersection of the offset ranges of a chain's qubits."""
    ranges = [hw.offset_range(q) for q in chain]
    return max(lo for lo, _ in ranges), min(hi for _, hi in ranges)


def expand_chain_offsets(per_chain: Mapping[int, float], emb: Embedding, hw: HardwareGraph) -> OffsetVector:
    """One snapped offset per chain, shared by all of its qubits."""
    offsets = {}
    for v, value in per_chain.items():
        chain = emb.chains[v]
        lo, hi = chain_offset_range(chain, hw)
        snapped = snap_value(float(value), lo, hi, hw.offset_step)
        for q in chain:
            offsets[q] = snapped
    return OffsetVector(level=CHAIN, offsets=offsets)


def check_offsets(offsets: Mapping[int, float], hw: HardwareGraph) -> None:
    """Raise unless every offset is in range and on the step grid."""
    unknown = [q for q in offsets if q not in hw.qubits]
    if unknown:
        raise UnknownQubitError(unknown)
    for q, value in offsets.items():
        lo, hi = hw.offset_range(q)
        if not (lo - GRID_TOLERANCE <= value <= hi + GRID_TOLERANCE) or not is_on_grid(value, hw.offset_step):
            raise OffsetOutOfRangeError(q, value, (lo, hi))


def simplex_normalize(raw: Iterable[float]) -> Tuple[float, ...]:
    """Floor each component at SHARE_FLOOR and rescale to sum 1."""
    values = np.maximum(np.asarray(list(raw), dtype=np.float64), SHARE_FLOOR)
    return tuple(float(x) for x in values / values.sum())


def chain_weights_from_raw(mode: str, groups: Mapping) -> ChainWeightDistribution:
    """Build a distribution from raw nonnegative vectors keyed by chain or edge."""
    shares = {key: simplex_normalize(raw) for key, raw in groups.items()}
    if mode == "CW(L)":
        return ChainWeightDistribution(mode=mode, linear_shares=shares, quadratic_shares={})
    return ChainWeightDistribution(mode=mode, linear_shares={}, quadratic_shares=shares)


def auto_scale(
    model: IsingModel,
    h_max: float = DEFAULT_H_MAX,
    j_max: float = DEFAULT_J_MAX,
) -> Tuple[IsingModel, float]:
    """Shrink the model into |h| <= h_max, |J| <= j_max; never enlarges it."""
    h_peak = max((abs(b) for b in model.h.values()), default=0.0)
    j_peak = max((abs(w) for w in model.J.values()), default=0.0)
    scale = max(h_peak / h_max, j_peak / j_max, 1.0)
    if scale == 1.0:
        return model, 1.0
    scaled = IsingModel(
        h={v: b / scale for v, b in model.h.items()},
        J={e: w / scale for e, w in model.J.items()},
        offset=model.offset / scale,
    )
    return scaled, scale
