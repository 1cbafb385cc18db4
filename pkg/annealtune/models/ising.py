"""Ising and QUBO value types over ``dimod.BinaryQuadraticModel``.

Both share one representation: linear biases ``h``, quadratic couplers ``J``
keyed by canonical ``(u, v)`` pairs with ``u < v``, and a constant offset.
They differ only in the variable domain ({-1, +1} vs {0, 1}). The dict form
is what artifacts store; energies and vartype changes go through ``bqm``.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, ClassVar, Dict, List, Mapping, Optional, Sequence, Tuple

import dimod
import numpy as np

from annealtune.core.exceptions import MissingVariableError, ValidationException

Edge = Tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    """Canonical unordered pair."""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class QuadraticModel:
    """Shared base for :class:`IsingModel` and :class:`QuboModel`."""

    h: Dict[int, float]
    J: Dict[Edge, float]
    offset: float = 0.0

    vartype: ClassVar[str] = "ABSTRACT"

    def __post_init__(self):
        h = {int(v): float(bias) for v, bias in self.h.items()}
        J: Dict[Edge, float] = {}
        for (u, v), weight in self.J.items():
            u, v = int(u), int(v)
            if u == v:
                raise ValidationException("J", (u, v), "self-loops are not allowed")
            key = edge_key(u, v)
            J[key] = J.get(key, 0.0) + float(weight)
            h.setdefault(u, 0.0)
            h.setdefault(v, 0.0)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", float(self.offset))

    def __eq__(self, other: object) -> bool:
        if type(self) is not type(other):
            return NotImplemented
        return self.h == other.h and self.J == other.J and self.offset == other.offset

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def variables(self) -> List[int]:
        """Sorted variable ids."""
        return sorted(self.h)

    @property
    def num_variables(self) -> int:
        return len(self.h)

    def is_empty(self) -> bool:
        return not self.h

    @cached_property
    def bqm(self) -> dimod.BinaryQuadraticModel:
        """The model as a ``dimod.BinaryQuadraticModel``."""
        return dimod.BinaryQuadraticModel(self.h, self.J, self.offset, self.vartype)

    @classmethod
    def from_bqm(cls, bqm: dimod.BinaryQuadraticModel) -> "QuadraticModel":
        if bqm.vartype is not dimod.as_vartype(cls.vartype):
            bqm = bqm.change_vartype(cls.vartype, inplace=False)
        return cls(
            h={int(v): float(b) for v, b in bqm.linear.items()},
            J={(int(u), int(v)): float(w) for (u, v), w in bqm.quadratic.items()},
            offset=float(bqm.offset),
        )

    @cached_property
    def _arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if self.is_empty():
            empty = np.zeros(0, dtype=np.int64)
            return np.zeros(0), empty, empty, np.zeros(0)
        h, (rows, cols, vals), _ = self.bqm.to_numpy_vectors(variable_order=self.variables)
        return (
            np.asarray(h, dtype=np.float64),
            np.asarray(rows, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(vals, dtype=np.float64),
        )

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(h, rows, cols, vals)`` aligned with :attr:`variables`."""
        return self._arrays

    def energy(self, assignment: Mapping[int, float]) -> float:
        """Objective value of one assignment (extra keys are ignored)."""
        missing = [v for v in self.variables if v not in assignment]
        if missing:
            raise MissingVariableError(missing)
        row = np.array([[assignment[v] for v in self.variables]])
        return float(self.energies(row)[0])

    def energies(self, records: np.ndarray, order: Optional[Sequence[int]] = None) -> np.ndarray:
        """Vectorized objective for a ``(reads, len(order))`` value matrix."""
        records = np.atleast_2d(np.asarray(records))
        if order is None:
            columns = np.arange(self.num_variables)
        else:
            position = {v: i for i, v in enumerate(order)}
            missing = [v for v in self.variables if v not in position]
            if missing:
                raise MissingVariableError(missing)
            columns = np.array([position[v] for v in self.variables], dtype=np.int64)
        if self.is_empty():
            return np.full(records.shape[0], self.offset)
        samples = records[:, columns].astype(np.int8)
        return np.asarray(self.bqm.energies((samples, self.variables)), dtype=np.float64)

    def scaled(self, factor: float) -> "QuadraticModel":
        """Every coefficient, offset included, multiplied by ``factor``."""
        return type(self)(
            h={v: b * factor for v, b in self.h.items()},
            J={e: w * factor for e, w in self.J.items()},
            offset=self.offset * factor,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.vartype,
            "vars": self.variables,
            "h": {str(v): self.h[v] for v in self.variables},
            "J": {f"{u},{v}": self.J[(u, v)] for u, v in sorted(self.J)},
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QuadraticModel":
        h = {int(v): 0.0 for v in data.get("vars", [])}
        h.update({int(v): float(b) for v, b in data.get("h", {}).items()})
        J = {}
        for key, weight in data.get("J", {}).items():
            u, v = (int(part) for part in key.split(","))
            J[(u, v)] = float(weight)
        return cls(h=h, J=J, offset=float(data.get("offset", 0.0)))


class IsingModel(QuadraticModel):
    """Spin model over s in {-1, +1}."""

    vartype: ClassVar[str] = "SPIN"


class QuboModel(QuadraticModel):
    """Binary model over x in {0, 1}."""

    vartype: ClassVar[str] = "BINARY"
