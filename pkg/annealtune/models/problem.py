"""Problem graph value type."""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx

from annealtune.core.exceptions import InvalidGraphParameterError
from .ising import Edge, edge_key


@dataclass(frozen=True, eq=False)
class ProblemGraph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    edges: Tuple[Edge, ...]
    density: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidGraphParameterError("n", self.n, "graphs need at least one vertex")
        canonical = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidGraphParameterError("edges", (u, v), "self-loops are not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidGraphParameterError("edges", (u, v), f"vertices must lie in 0..{self.n - 1}")
            canonical.add(edge_key(u, v))
        object.__setattr__(self, "edges", tuple(sorted(canonical)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProblemGraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    __hash__ = None  # type: ignore[assignment]

    @property
    def vertices(self) -> List[int]:
        return list(range(self.n))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self.edges)

    @cached_property
    def adjacency(self) -> Dict[int, Set[int]]:
        adjacency: Dict[int, Set[int]] = {v: set() for v in range(self.n)}
        for u, v in self.edges:
            adjacency[u].add(v)
            adjacency[v].add(u)
        return adjacency

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edge_set

    @property
    def max_degree(self) -> int:
        return max((len(nbrs) for nbrs in self.adjacency.values()), default=0)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    @classmethod
    def complete(cls, n: int) -> "ProblemGraph":
        return cls(n=n, edges=tuple((u, v) for u in range(n) for v in range(u + 1, n)), density=1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "density": self.density,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProblemGraph":
        return cls(
            n=int(data["n"]),
            edges=tuple((int(u), int(v)) for u, v in data.get("edges", [])),
            density=float(data.get("density", 0.0)),
            seed=data.get("seed"),
        )
