"""Parameter vectors for the three tunable families."""

from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from annealtune.core.exceptions import InvalidChainWeightsError, ValidationException
from .ising import Edge

QUBIT = "qubit"
CHAIN = "chain"
SHARE_TOLERANCE = 1e-9


def _check_level(level: str) -> None:
    if level not in (QUBIT, CHAIN):
        raise ValidationException("level", level, f"must be '{QUBIT}' or '{CHAIN}'")


@dataclass(frozen=True)
class SpinReversalMask:
    """Spin reversal indicator per variable (1 = reversed)."""

    level: str
    bits: Dict[int, int]

    def __post_init__(self):
        _check_level(self.level)
        bits = {int(v): int(b) for v, b in sorted(self.bits.items())}
        bad = [v for v, b in bits.items() if b not in (0, 1)]
        if bad:
            raise ValidationException("bits", bad[:5], "spin reversal bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def flipped(self) -> Tuple[int, ...]:
        return tuple(v for v, b in self.bits.items() if b)

    def sign(self, v: int) -> int:
        return -1 if self.bits[v] else 1

    def restricted(self, variables) -> "SpinReversalMask":
        return SpinReversalMask(self.level, {v: self.bits[v] for v in variables})

    def to_dict(self) -> Dict[str, Any]:
        return {"level": self.level, "bits": {str(v): b for v, b in self.bits.items()}}


@dataclass(frozen=True)
class OffsetVector:
    """Anneal offset per physical qubit."""

    level: str
    offsets: Dict[int, float]

    def __post_init__(self):
        _check_level(self.level)
        object.__setattr__(self, "offsets", {int(q): float(o) for q, o in sorted(self.offsets.items())})

    def to_dict(self) -> Dict[str, Any]:
        return {"level": self.level, "offsets": {str(q): o for q, o in self.offsets.items()}}


def _check_shares(subject: str, shares: Tuple[float, ...]) -> None:
    values = np.asarray(shares, dtype=np.float64)
    if values.size == 0:
        raise InvalidChainWeightsError(subject, "empty share vector")
    if np.any(values < 0):
        raise InvalidChainWeightsError(subject, "shares must be nonnegative")
    if abs(values.sum() - 1.0) > SHARE_TOLERANCE:
        raise InvalidChainWeightsError(subject, f"shares sum to {values.sum():.12f}, not 1")


def _is_uniform(shares: Tuple[float, ...]) -> bool:
    return bool(np.allclose(shares, 1.0 / len(shares), atol=SHARE_TOLERANCE))


@dataclass(frozen=True)
class ChainWeightDistribution:
    """Split of logical weights across physical qubits or couplers.

    Missing entries mean uniform shares. ``CW(L)`` tunes only linear shares,
    ``CW(Q)`` only quadratic ones.
    """

    mode: str
    linear_shares: Dict[int, Tuple[float, ...]]
    quadratic_shares: Dict[Edge, Tuple[float, ...]]

    def __post_init__(self):
        if self.mode not in ("CW(L)", "CW(Q)"):
            raise ValidationException("mode", self.mode, "must be 'CW(L)' or 'CW(Q)'")
        linear = {int(v): tuple(float(s) for s in shares) for v, shares in sorted(self.linear_shares.items())}
        quadratic = {
            (int(u), int(v)): tuple(float(s) for s in shares)
            for (u, v), shares in sorted(self.quadratic_shares.items())
        }
        for v, shares in linear.items():
            _check_shares(f"chain {v}", shares)
            if self.mode == "CW(Q)" and not _is_uniform(shares):
                raise InvalidChainWeightsError(f"chain {v}", "CW(Q) keeps linear shares uniform")
        for edge, shares in quadratic.items():
            _check_shares(f"edge {edge}", shares)
            if self.mode == "CW(L)" and not _is_uniform(shares):
                raise InvalidChainWeightsError(f"edge {edge}", "CW(L) keeps quadratic shares uniform")
        object.__setattr__(self, "linear_shares", linear)
        object.__setattr__(self, "quadratic_shares", quadratic)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "linear_shares": {str(v): list(s) for v, s in self.linear_shares.items()},
            "quadratic_shares": {f"{u},{v}": list(s) for (u, v), s in self.quadratic_shares.items()},
        }


@dataclass(frozen=True)
class TechniqueParameters:
    """Decoded parameter vector; ``None`` fields keep the annealer defaults."""

    technique: Optional[str] = None
    spin_reversal: Optional[SpinReversalMask] = None
    offsets: Optional[OffsetVector] = None
    chain_weights: Optional[ChainWeightDistribution] = None

    @property
    def is_default(self) -> bool:
        return self.spin_reversal is None and self.offsets is None and self.chain_weights is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "technique": self.technique,
            "spin_reversal": self.spin_reversal.to_dict() if self.spin_reversal else None,
            "offsets": self.offsets.to_dict() if self.offsets else None,
            "chain_weights": self.chain_weights.to_dict() if self.chain_weights else None,
        }


def offsets_as_config(offsets: Optional[OffsetVector]) -> Mapping[int, float]:
    return dict(offsets.offsets) if offsets is not None else {}
