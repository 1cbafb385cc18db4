"""
Chimera hardware graph construction and defect simulation.

The ideal graph comes from ``dwave_networkx.chimera_graph``: every cell is a
complete bipartite K_{shore,shore}; side 0 qubits additionally couple to the
same ``k`` in the cell below, side 1 qubits to the same ``k`` in the cell to the
right. Defects are applied on top by removing qubits.
"""

import hashlib
from typing import Any, Dict, Iterable, Set, Tuple

import networkx as nx
import structlog

from ..core.exceptions import UnknownQubitError
from ..models.hardware import (
    DEFAULT_OFFSET_RANGE,
    DEFAULT_OFFSET_STEP,
    ChimeraSpec,
    HardwareDocument,
    HardwareGraph,
)

logger = structlog.get_logger(__name__)


def expected_coupler_count(spec: ChimeraSpec) -> int:
    """Closed-form coupler count of the ideal graph."""
    r, c, t = spec.rows, spec.cols, spec.shore
    return r * c * t * t + t * (r * (c - 1) + c * (r - 1))


def build_chimera(
    spec: ChimeraSpec,
    offset_range: Tuple[float, float] = DEFAULT_OFFSET_RANGE,
    offset_step: float = DEFAULT_OFFSET_STEP,
) -> HardwareGraph:
    """Build the defect-free Chimera graph for ``spec``."""
    graph = spec.ideal_graph()
    return HardwareGraph(
        spec=spec,
        qubits=frozenset(int(q) for q in graph.nodes),
        couplers=spec.ideal_couplers,
        offset_ranges={},
        offset_step=offset_step,
        offset_range_default=tuple(offset_range),
    )


def remove_qubits(hw: HardwareGraph, dead: Iterable[int]) -> HardwareGraph:
    """Return a copy of ``hw`` without ``dead`` qubits and their couplers."""
    dead = set(dead)
    unknown = dead - hw.qubits
    if unknown:
        raise UnknownQubitError(unknown)
    if not dead:
        return hw

    survivors = hw.qubits - dead
    couplers = frozenset((a, b) for a, b in hw.couplers if a in survivors and b in survivors)
    logger.debug("qubits_removed", removed=len(dead), qubits=len(survivors), couplers=len(couplers))
    return HardwareGraph(
        spec=hw.spec,
        qubits=frozenset(survivors),
        couplers=couplers,
        offset_ranges={q: r for q, r in hw.offset_ranges.items() if q in survivors},
        offset_step=hw.offset_step,
        offset_range_default=hw.offset_range_default,
    )


def neighbors(hw: HardwareGraph, q: int) -> Set[int]:
    """Qubits coupled to ``q``."""
    if q not in hw.qubits:
        raise UnknownQubitError([q])
    return set(hw.adjacency[q])


def to_networkx(hw: HardwareGraph) -> nx.Graph:
    """Working graph as networkx, nodes annotated with Chimera coordinates."""
    graph = nx.Graph()
    for q in sorted(hw.qubits):
        row, col, side, k = hw.spec.coordinates(q)
        graph.add_node(q, row=row, col=col, side=side, k=k)
    graph.add_edges_from(sorted(hw.couplers))
    return graph


def hardware_ref(hw: HardwareGraph) -> str:
    """Short stable identifier of a hardware graph (topology plus defects)."""
    dead = ",".join(str(q) for q in hw.dead_qubits)
    digest = hashlib.sha256(f"{dead}|{hw.offset_range_default}|{hw.offset_step}".encode()).hexdigest()
    return f"chimera-{hw.spec.label}-{digest[:10]}"


def hardware_from_document(document: HardwareDocument) -> HardwareGraph:
    hw = build_chimera(
        document.spec,
        offset_range=tuple(document.offset_range_default),
        offset_step=document.offset_step,
    )
    return remove_qubits(hw, document.dead_qubits)


def hardware_to_document(hw: HardwareGraph) -> HardwareDocument:
    return HardwareDocument(
        spec=hw.spec,
        dead_qubits=hw.dead_qubits,
        offset_range_default=tuple(hw.offset_range_default),
        offset_step=hw.offset_step,
    )


def hardware_from_dict(data: Dict[str, Any]) -> HardwareGraph:
    return hardware_from_document(HardwareDocument.model_validate(data))


def hardware_to_dict(hw: HardwareGraph) -> Dict[str, Any]:
    return hardware_to_document(hw).model_dump(mode="json")
