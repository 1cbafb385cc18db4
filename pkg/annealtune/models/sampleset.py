"""Sample set value type."""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Aggregated reads over a fixed variable order.

    ``records`` is ``(rows, len(variables))`` int8 spins. ``chain_broken`` is
    only set on logical sets produced by unembedding: ``(rows, chains)``
    booleans aligned with ``variables``.
    """

    variables: Tuple[int, ...]
    records: np.ndarray
    energies: np.ndarray
    num_occurrences: np.ndarray
    qpu_time_us: float = 0.0
    chain_broken: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(int(v) for v in self.variables))
        object.__setattr__(self, "records", np.asarray(self.records, dtype=np.int8).reshape(-1, len(self.variables)))
        object.__setattr__(self, "energies", np.asarray(self.energies, dtype=np.float64))
        object.__setattr__(self, "num_occurrences", np.asarray(self.num_occurrences, dtype=np.int64))
        if len(self.energies) != len(self.records) or len(self.num_occurrences) != len(self.records):
            raise ValueError("records, energies and num_occurrences must have equal length")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def num_reads(self) -> int:
        return int(self.num_occurrences.sum())

    @property
    def index(self) -> Dict[int, int]:
        return {v: i for i, v in enumerate(self.variables)}

    def columns(self, variables: Sequence[int]) -> np.ndarray:
        """Spins of ``variables`` (in that order) for every row."""
        index = self.index
        return self.records[:, [index[v] for v in variables]]

    def lowest(self) -> Dict[int, int]:
        """Assignment of the lowest-energy row."""
        row = int(np.argmin(self.energies))
        return {v: int(s) for v, s in zip(self.variables, self.records[row])}

    def replace(self, **changes: Any) -> "SampleSet":
        fields = {
            "variables": self.variables,
            "records": self.records,
            "energies": self.energies,
            "num_occurrences": self.num_occurrences,
            "qpu_time_us": self.qpu_time_us,
            "chain_broken": self.chain_broken,
        }
        fields.update(changes)
        return SampleSet(**fields)

    def identical_to(self, other: "SampleSet") -> bool:
        """Bit-level equality, used for determinism checks."""
        return (
            self.variables == other.variables
            and np.array_equal(self.records, other.records)
            and np.array_equal(self.energies, other.energies)
            and np.array_equal(self.num_occurrences, other.num_occurrences)
            and self.qpu_time_us == other.qpu_time_us
        )

    def to_dict(self) -> Dict[str, Any]:
        reads: List[Dict[str, Any]] = []
        for row, energy, occ in zip(self.records, self.energies, self.num_occurrences):
            reads.append({
                "spins": {str(v): int(s) for v, s in zip(self.variables, row)},
                "energy": float(energy),
                "occ": int(occ),
            })
        return {"reads": reads, "qpu_time_us": self.qpu_time_us}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SampleSet":
        reads = data.get("reads", [])
        variables = sorted({int(v) for read in reads for v in read["spins"]})
        records = np.array(
            [[read["spins"][str(v)] for v in variables] for read in reads], dtype=np.int8
        ).reshape(-1, len(variables))
        return cls(
            variables=tuple(variables),
            records=records,
            energies=np.array([read["energy"] for read in reads], dtype=np.float64),
            num_occurrences=np.array([read["occ"] for read in reads], dtype=np.int64),
            qpu_time_us=float(data.get("qpu_time_us", 0.0)),
        )
