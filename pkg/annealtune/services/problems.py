"""
Problem instances and their QUBO/Ising formulations.

MaxClique:        H(x) = -sum_v x_v + 2 * sum_{(u,v) not in E} x_u x_v     (QUBO)
MaxCut:           H(s) = sum_{(u,v) in E} s_u s_v                           (Ising)
GraphPartition:   H(s) = p * (sum_v s_v)^2 + sum_{(u,v) in E} (1 - s_u s_v)/2 (Ising)
"""

from typing import Dict, Mapping, Optional

import dimod
import networkx as nx
import numpy as np

from ..core.exceptions import InvalidGraphParameterError, MissingVariableError, ValidationException
from ..models.experiment import ProblemKind, Sense
from ..models.ising import Edge, IsingModel, QuboModel
from ..models.problem import ProblemGraph
from ..models.results import ObjectiveRecord

CLIQUE_REWARD = 1.0
CLIQUE_PENALTY = 2.0


def gen_random_graph(n: int, density: float, seed: int) -> ProblemGraph:
    """Erdős–Rényi G(n, p) with p = ``density``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidGraphParameterError("n", n, "must be a positive integer")
    if not 0.0 <= density <= 1.0:
        raise InvalidGraphParameterError("density", density, "must lie in [0, 1]")
    graph = nx.gnp_random_graph(int(n), density, seed=int(seed))
    return ProblemGraph(n=int(n), edges=tuple(graph.edges()), density=float(density), seed=int(seed))


def maxclique_qubo(G: ProblemGraph) -> QuboModel:
    h = {v: -CLIQUE_REWARD for v in G.vertices}
    J: Dict[Edge, float] = {}
    for u in range(G.n):
        for v in range(u + 1, G.n):
            if not G.has_edge(u, v):
                J[(u, v)] = CLIQUE_PENALTY
    return QuboModel(h=h, J=J)


def maxcut_ising(G: ProblemGraph) -> IsingModel:
    return IsingModel(h={v: 0.0 for v in G.vertices}, J={e: 1.0 for e in G.edges})


def default_balance_penalty(G: ProblemGraph) -> float:
    """min(2Δ, n)/8 + 1: large enough that balance always dominates the cut."""
    return min(2 * G.max_degree, G.n) / 8.0 + 1.0


def graphpart_ising(G: ProblemGraph, balance_penalty: Optional[float] = None) -> IsingModel:
    penalty = default_balance_penalty(G) if balance_penalty is None else balance_penalty
    if penalty <= 0:
        raise ValidationException("balance_penalty", penalty, "must be positive")

    # (sum s)^2 = n + 2 * sum_{u<v} s_u s_v
    J: Dict[Edge, float] = {}
    for u in range(G.n):
        for v in range(u + 1, G.n):
            J[(u, v)] = 2.0 * penalty
    for u, v in G.edges:
        J[(u, v)] -= 0.5
    offset = penalty * G.n + 0.5 * G.num_edges
    return IsingModel(h={v: 0.0 for v in G.vertices}, J=J, offset=offset)


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Substitute x = (s + 1) / 2."""
    return IsingModel.from_bqm(q.bqm.change_vartype(dimod.SPIN, inplace=False))


def ising_to_qubo(i: IsingModel) -> QuboModel:
    """Substitute s = 2x - 1."""
    return QuboModel.from_bqm(i.bqm.change_vartype(dimod.BINARY, inplace=False))


def problem_sense(kind: ProblemKind) -> Sense:
    return Sense.MINIMIZE if ProblemKind(kind) == ProblemKind.GRAPHPART else Sense.MAXIMIZE


def formulation_ising(kind: ProblemKind, G: ProblemGraph, balance_penalty: Optional[float] = None) -> IsingModel:
    """Logical Ising model solved for ``kind`` on ``G``."""
    kind = ProblemKind(kind)
    if kind == ProblemKind.MAXCLIQUE:
        return qubo_to_ising(maxclique_qubo(G))
    if kind == ProblemKind.MAXCUT:
        return maxcut_ising(G)
    return graphpart_ising(G, balance_penalty)


def formulation_values(kind: ProblemKind, G: ProblemGraph, energies: np.ndarray) -> np.ndarray:
    """Objective value in the problem's natural sense.

    MaxClique: -H (the clique size for valid cliques); MaxCut: (|E| - H)/2;
    graph partitioning: H itself.
    """
    kind = ProblemKind(kind)
    energies = np.asarray(energies, dtype=np.float64)
    if kind == ProblemKind.MAXCLIQUE:
        return -energies
    if kind == ProblemKind.MAXCUT:
        return (G.num_edges - energies) / 2.0
    return energies


def evaluate_objective(kind: ProblemKind, G: ProblemGraph, assignment: Mapping[int, float]) -> ObjectiveRecord:
    """Problem metric of one assignment; positive values select / mean +1."""
    missing = [v for v in G.vertices if v not in assignment]
    if missing:
        raise MissingVariableError(missing)
    kind = ProblemKind(kind)
    side = {v: assignment[v] > 0 for v in G.vertices}

    if kind == ProblemKind.MAXCLIQUE:
        selected = [v for v in G.vertices if side[v]]
        valid = all(G.has_edge(u, v) for i, u in enumerate(selected) for v in selected[i + 1:])
        return ObjectiveRecord(kind=kind, metric=len(selected) if valid else 0, valid=valid)

    cut = sum(1 for u, v in G.edges if side[u] != side[v])
    if kind == ProblemKind.MAXCUT:
        return ObjectiveRecord(kind=kind, metric=cut, valid=True)

    plus = sum(side.values())
    imbalance = abs(plus - (G.n - plus))
    return ObjectiveRecord(kind=kind, metric=cut, valid=imbalance <= 1, imbalance=imbalance)


def objective_metrics(kind: ProblemKind, G: ProblemGraph, records: np.ndarray) -> np.ndarray:
    """Vectorized :func:`evaluate_objective` over rows of spins on ``0..n-1``.

    Returns the metric per row, with -1 for reads that do not count (non-clique
    selections, unbalanced partitions).
    """
    kind = ProblemKind(kind)
    side = np.asarray(records)[:, : G.n] > 0
    edges = np.array(G.edges, dtype=np.int64).reshape(-1, 2)

    if kind == ProblemKind.MAXCLIQUE:
        size = side.sum(axis=1)
        non_edges = np.array(
            [(u, v) for u in range(G.n) for v in range(u + 1, G.n) if not G.has_edge(u, v)],
            dtype=np.int64,
        ).reshape(-1, 2)
        conflicts = (side[:, non_edges[:, 0]] & side[:, non_edges[:, 1]]).any(axis=1)
        return np.where(conflicts, -1, size).astype(np.int64)

    cut = (side[:, edges[:, 0]] != side[:, edges[:, 1]]).sum(axis=1).astype(np.int64)
    if kind == ProblemKind.MAXCUT:
        return cut
    imbalance = np.abs(2 * side.sum(axis=1) - G.n)
    return np.where(imbalance <= 1, cut, -1).astype(np.int64)
