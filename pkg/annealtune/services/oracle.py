"""
Exact classical solvers for desk-scale instances.

Every solver refuses instances above its limit instead of running for hours.
"""

from itertools import combinations, islice
from typing import Dict, Iterator, List, Optional, Set, Tuple

import numpy as np
import structlog

from ..core.config import get_settings
from ..core.exceptions import OracleLimitError
from ..models.ising import IsingModel, QuadraticModel
from ..models.problem import ProblemGraph
from ..models.results import OracleResult

logger = structlog.get_logger(__name__)

MAX_WITNESSES = 64
CHUNK = 1 << 16
ENERGY_TOLERANCE = 1e-9


def _assignments(n: int, start: int, stop: int) -> np.ndarray:
    """Bit patterns of integers ``start..stop-1``; bit i is variable i."""
    index = np.arange(start, stop, dtype=np.int64)[:, None]
    return ((index >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)


def _check_limit(solver: str, size: int, limit: Optional[int], default: int) -> None:
    limit = default if limit is None else limit
    if size > limit:
        raise OracleLimitError(solver, size, limit)


def exact_ground_state(model: QuadraticModel, limit: Optional[int] = None) -> OracleResult:
    """Exhaustive minimum of an Ising or QUBO model."""
    variables = model.variables
    n = len(variables)
    _check_limit("exact_ground_state", n, limit, get_settings().ORACLE_ISING_LIMIT)
    if n == 0:
        return OracleResult(optimum_value=model.offset, witnesses=[{}])

    spin = isinstance(model, IsingModel)
    best = np.inf
    witnesses: List[np.ndarray] = []
    truncated = False
    for start in range(0, 1 << n, CHUNK):
        bits = _assignments(n, start, min(start + CHUNK, 1 << n))
        records = 2 * bits - 1 if spin else bits
        energies = model.energies(records, variables)
        low = energies.min()
        if low < best - ENERGY_TOLERANCE:
            best, witnesses, truncated = low, [], False
        best = min(best, low)
        for row in records[energies <= best + ENERGY_TOLERANCE]:
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append(row)
            else:
                truncated = True

    return OracleResult(
        optimum_value=float(best),
        witnesses=[{v: int(x) for v, x in zip(variables, row)} for row in witnesses],
        exhaustive=not truncated,
    )


def _colour_sort(candidates: List[int], adjacency: Dict[int, Set[int]]) -> Tuple[List[int], List[int]]:
    """Greedy colouring; returns vertices ordered by colour and their colour bound."""
    classes: List[List[int]] = []
    for v in candidates:
        for members in classes:
            if not any(u in adjacency[v] for u in members):
                members.append(v)
                break
        else:
            classes.append([v])
    order, bounds = [], []
    for colour, members in enumerate(classes, start=1):
        order.extend(members)
        bounds.extend([colour] * len(members))
    return order, bounds


def max_clique_exact(G: ProblemGraph, limit: Optional[int] = None) -> OracleResult:
    """Branch and bound with a greedy-colouring upper bound."""
    _check_limit("max_clique_exact", G.n, limit, get_settings().ORACLE_CLIQUE_LIMIT)
    adjacency = G.adjacency
    best: List[int] = []

    def expand(clique: List[int], candidates: List[int]) -> None:
        nonlocal best
        order, bounds = _colour_sort(candidates, adjacency)
        remaining = list(candidates)
        while order:
            v, bound = order.pop(), bounds.pop()
            if len(clique) + bound <= len(best):
                return
            grown = clique + [v]
            nested = [u for u in remaining if u in adjacency[v]]
            if nested:
                expand(grown, nested)
            elif len(grown) > len(best):
                best = grown
            remaining.remove(v)

    degree_order = sorted(G.vertices, key=lambda v: (-len(adjacency[v]), v))
    expand([], degree_order)
    chosen = set(best)
    return OracleResult(
        optimum_value=len(best),
        witnesses=[{v: int(v in chosen) for v in G.vertices}],
    )


def _spins(sides: np.ndarray, vertices: List[int]) -> Dict[int, int]:
    return {v: 1 if s else -1 for v, s in zip(vertices, sides)}


def max_cut_exact(G: ProblemGraph, limit: Optional[int] = None) -> OracleResult:
    """Maximum cut by enumeration with vertex 0 pinned to one side."""
    _check_limit("max_cut_exact", G.n, limit, get_settings().ORACLE_CUT_LIMIT)
    edges = np.array(G.edges, dtype=np.int64).reshape(-1, 2)
    free = G.n - 1
    best, witness = -1, None
    for start in range(0, 1 << free, CHUNK):
        bits = _assignments(free, start, min(start + CHUNK, 1 << free))
        sides = np.hstack([np.zeros((len(bits), 1), dtype=np.int8), bits]).astype(bool)
        cuts = (sides[:, edges[:, 0]] != sides[:, edges[:, 1]]).sum(axis=1)
        row = int(np.argmax(cuts))
        if cuts[row] > best:
            best, witness = int(cuts[row]), sides[row]
    return OracleResult(optimum_value=best, witnesses=[_spins(witness, G.vertices)])


def _balanced_subsets(n: int) -> Iterator[Tuple[int, ...]]:
    return combinations(range(n), n // 2)


def graph_partition_exact(G: ProblemGraph, limit: Optional[int] = None) -> OracleResult:
    """Fewest cut edges over partitions whose sides differ by at most one vertex."""
    _check_limit("graph_partition_exact", G.n, limit, get_settings().ORACLE_PARTITION_LIMIT)
    edges = np.array(G.edges, dtype=np.int64).reshape(-1, 2)
    subsets = _balanced_subsets(G.n)
    best, witness = None, None
    while True:
        batch = list(islice(subsets, CHUNK))
        if not batch:
            break
        sides = np.zeros((len(batch), G.n), dtype=bool)
        if G.n // 2:
            rows = np.repeat(np.arange(len(batch)), G.n // 2)
            sides[rows, np.array(batch, dtype=np.int64).ravel()] = True
        cuts = (sides[:, edges[:, 0]] != sides[:, edges[:, 1]]).sum(axis=1)
        row = int(np.argmin(cuts))
        if best is None or cuts[row] < best:
            best, witness = int(cuts[row]), sides[row]
    return OracleResult(optimum_value=best, witnesses=[_spins(witness, G.vertices)])
