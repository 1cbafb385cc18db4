"""Chimera hardware description types."""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, List, Mapping, Set, Tuple

import dwave_networkx as dnx
import networkx as nx
from pydantic import Field, model_validator

from annealtune.core.exceptions import InvalidHardwareError
from .common import BaseModel, FrozenModel
from .ising import Edge

DEFAULT_OFFSET_RANGE: Tuple[float, float] = (-0.2, 0.2)
DEFAULT_OFFSET_STEP = 0.05


class ChimeraSpec(FrozenModel):
    """Chimera grid dimensions.

    Qubit ids follow the ``dwave_networkx`` linear Chimera labelling,
    ``((row * cols + col) * 2 + side) * shore + k``. Side 0 qubits couple to
    vertical neighbours, side 1 qubits to horizontal ones.
    """

    rows: int = Field(..., ge=1, description="Cell rows")
    cols: int = Field(..., ge=1, description="Cell columns")
    shore: int = Field(default=4, ge=1, description="Qubits per side of each bipartite cell")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols * 2 * self.shore

    @property
    def label(self) -> str:
        return f"C{self.rows}x{self.cols}x{self.shore}"

    @property
    def coords(self) -> "dnx.chimera_coordinates":
        return _chimera_coordinates(self.rows, self.cols, self.shore)

    def ideal_graph(self) -> nx.Graph:
        """Defect-free Chimera graph with linear labels."""
        return dnx.chimera_graph(self.rows, self.cols, self.shore)

    @property
    def ideal_couplers(self) -> FrozenSet[Edge]:
        return _ideal_couplers(self.rows, self.cols, self.shore)

    def qubit_id(self, row: int, col: int, side: int, k: int) -> int:
        return int(self.coords.chimera_to_linear((row, col, side, k)))

    def coordinates(self, qubit: int) -> Tuple[int, int, int, int]:
        """Inverse of :meth:`qubit_id`: ``(row, col, side, k)``."""
        row, col, side, k = self.coords.linear_to_chimera(qubit)
        return int(row), int(col), int(side), int(k)

    def colour(self, qubit: int) -> int:
        """Bipartite colour; every Chimera coupler joins opposite colours."""
        row, col, side, _ = self.coordinates(qubit)
        return (row + col + side) % 2

    def is_topological_coupler(self, a: int, b: int) -> bool:
        """Whether ``a``-``b`` is a coupler of the ideal graph."""
        return (min(a, b), max(a, b)) in self.ideal_couplers


@lru_cache(maxsize=None)
def _chimera_coordinates(rows: int, cols: int, shore: int) -> "dnx.chimera_coordinates":
    return dnx.chimera_coordinates(rows, cols, shore)


@lru_cache(maxsize=16)
def _ideal_couplers(rows: int, cols: int, shore: int) -> FrozenSet[Edge]:
    graph = dnx.chimera_graph(rows, cols, shore)
    return frozenset((int(min(a, b)), int(max(a, b))) for a, b in graph.edges())


@dataclass(frozen=True, eq=False)
class HardwareGraph:
    """Working qubits and couplers of one (possibly defective) Chimera chip."""

    spec: ChimeraSpec
    qubits: FrozenSet[int]
    couplers: FrozenSet[Edge]
    offset_ranges: Mapping[int, Tuple[float, float]]
    offset_step: float = DEFAULT_OFFSET_STEP
    offset_range_default: Tuple[float, float] = field(default=DEFAULT_OFFSET_RANGE)

    def __post_init__(self):
        if self.offset_step <= 0:
            raise InvalidHardwareError(f"offset_step must be positive, got {self.offset_step}")
        for q in self.qubits:
            if not 0 <= q < self.spec.num_qubits:
                raise InvalidHardwareError(f"qubit {q} is outside {self.spec.label}")
            lo, hi = self.offset_range(q)
            if not lo <= 0.0 <= hi:
                raise InvalidHardwareError(f"offset range of qubit {q} does not contain 0")
        for a, b in self.couplers:
            if a not in self.qubits or b not in self.qubits:
                raise InvalidHardwareError(f"coupler ({a}, {b}) touches a non-working qubit")
            if not self.spec.is_topological_coupler(a, b):
                raise InvalidHardwareError(f"({a}, {b}) is not a Chimera coupler")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HardwareGraph):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.qubits == other.qubits
            and self.couplers == other.couplers
            and self.offset_step == other.offset_step
            and all(self.offset_range(q) == other.offset_range(q) for q in self.qubits)
        )

    __hash__ = None  # type: ignore[assignment]

    def offset_range(self, qubit: int) -> Tuple[float, float]:
        return tuple(self.offset_ranges.get(qubit, self.offset_range_default))  # type: ignore[return-value]

    @cached_property
    def adjacency(self) -> Dict[int, Set[int]]:
        adjacency: Dict[int, Set[int]] = {q: set() for q in self.qubits}
        for a, b in self.couplers:
            adjacency[a].add(b)
            adjacency[b].add(a)
        return adjacency

    @cached_property
    def dead_qubits(self) -> List[int]:
        return sorted(set(range(self.spec.num_qubits)) - set(self.qubits))

    def has_coupler(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.couplers


class HardwareDocument(BaseModel):
    """JSON form of a :class:`HardwareGraph`."""

    spec: ChimeraSpec
    dead_qubits: List[int] = Field(default_factory=list)
    offset_range_default: Tuple[float, float] = DEFAULT_OFFSET_RANGE
    offset_step: float = Field(default=DEFAULT_OFFSET_STEP, gt=0)

    @model_validator(mode="after")
    def check_offset_range(self):
        lo, hi = self.offset_range_default
        if not lo <= 0.0 <= hi:
            raise ValueError("offset_range_default must contain 0")
        return self
