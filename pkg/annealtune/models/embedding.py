"""Embedding value types."""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, FrozenSet, List, Mapping, Sequence, Tuple

from .hardware import HardwareGraph
from .ising import Edge, IsingModel, edge_key


@dataclass(frozen=True, eq=False)
class Embedding:
    """Logical variable -> chain of physical qubits on one hardware graph."""

    chains: Dict[int, Tuple[int, ...]]
    hardware: HardwareGraph

    def __post_init__(self):
        chains = {int(v): tuple(int(q) for q in self.chains[v]) for v in sorted(self.chains, key=int)}
        object.__setattr__(self, "chains", chains)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.chains == other.chains and (
            self.hardware is other.hardware or self.hardware == other.hardware
        )

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.chains)

    @property
    def variables(self) -> List[int]:
        return list(self.chains)

    @cached_property
    def qubits(self) -> List[int]:
        return sorted({q for chain in self.chains.values() for q in chain})

    @cached_property
    def owner(self) -> Dict[int, int]:
        """Qubit -> logical variable."""
        return {q: v for v, chain in self.chains.items() for q in chain}

    @property
    def max_chain_length(self) -> int:
        return max((len(chain) for chain in self.chains.values()), default=0)

    @cached_property
    def intra_chain_couplers(self) -> Dict[int, Tuple[Edge, ...]]:
        """Working couplers with both ends in the same chain."""
        couplers: Dict[int, List[Edge]] = {v: [] for v in self.chains}
        owner = self.owner
        for a, b in sorted(self.hardware.couplers):
            va, vb = owner.get(a), owner.get(b)
            if va is not None and va == vb:
                couplers[va].append((a, b))
        return {v: tuple(c) for v, c in couplers.items()}

    @cached_property
    def inter_chain_couplers(self) -> Dict[Edge, Tuple[Edge, ...]]:
        """Logical pair -> working couplers joining the two chains."""
        couplers: Dict[Edge, List[Edge]] = {}
        owner = self.owner
        for a, b in sorted(self.hardware.couplers):
            va, vb = owner.get(a), owner.get(b)
            if va is None or vb is None or va == vb:
                continue
            couplers.setdefault(edge_key(va, vb), []).append((a, b))
        return {pair: tuple(c) for pair, c in sorted(couplers.items())}

    def chains_json(self) -> Dict[str, List[int]]:
        return {str(v): list(chain) for v, chain in self.chains.items()}

    def to_dict(self, hardware_ref: str) -> Dict[str, Any]:
        return {"hardware_ref": hardware_ref, "chains": self.chains_json()}

    @classmethod
    def from_chains(cls, chains: Mapping[Any, Sequence[int]], hardware: HardwareGraph) -> "Embedding":
        return cls(chains={int(v): tuple(c) for v, c in chains.items()}, hardware=hardware)


@dataclass(frozen=True, eq=False)
class EmbeddedIsing:
    """Physical model plus the bookkeeping needed to tune and unembed it."""

    model: IsingModel
    chain_couplers: FrozenSet[Edge]
    logical_edge_couplers: Dict[Edge, Tuple[Edge, ...]]
    embedding: Embedding
    chain_strength: float
