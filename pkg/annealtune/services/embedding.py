"""
Fixed complete-graph embeddings on Chimera hardware.

The canonical construction lays out chains along "lanes" (one shore index k).
Chain (i, k) takes the side 0 qubits of column i in rows 0..i plus the side 1
qubits of row i in columns i..L-1, meeting in diagonal cell (i, i). Every two
such chains meet in cell (min, max), giving K_{shore*L} with chains of length
L+1. One more vertex fits by splitting the last lane into L+1 chains that
reach through the lower triangle the other lanes leave unused; those middle
chains have length L+2.
"""

from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import structlog

from ..core.exceptions import (
    EmbeddingCapacityError,
    EmbeddingCoverageError,
    EmbeddingFailureError,
    InvalidChainWeightsError,
    SampleCoverageError,
    ValidationException,
)
from ..models.embedding import EmbeddedIsing, Embedding
from ..models.hardware import ChimeraSpec, HardwareGraph
from ..models.ising import Edge, IsingModel, edge_key
from ..models.parameters import ChainWeightDistribution
from ..models.problem import ProblemGraph
from ..models.results import ValidationReport, Violation
from ..models.sampleset import SampleSet
from .hwgraph import to_networkx

logger = structlog.get_logger(__name__)

Coordinates = Tuple[int, int, int, int]

# Attempts per variant before giving up on a defective chip
MAX_VARIANT_ATTEMPTS = 200


def clique_capacity(hw: HardwareGraph) -> int:
    """Largest clique the canonical construction embeds on ``hw``'s grid."""
    return hw.spec.shore * min(hw.spec.rows, hw.spec.cols) + 1


def _triad(i: int, lane: int, size: int) -> List[Coordinates]:
    vertical = [(r, i, 0, lane) for r in range(i + 1)]
    horizontal = [(i, c, 1, lane) for c in range(i, size)]
    return vertical + horizontal


def _split_lane(lane: int, size: int) -> List[List[Coordinates]]:
    chains = [[(0, c, 1, lane) for c in range(size)]]
    for j in range(1, size):
        vertical = [(r, j - 1, 0, lane) for r in range(j + 1)]
        horizontal = [(j, c, 1, lane) for c in range(j - 1, size)]
        chains.append(vertical + horizontal)
    chains.append([(r, size - 1, 0, lane) for r in range(size)])
    return chains


def _canonical_layout(spec: ChimeraSpec, k: int) -> List[List[Coordinates]]:
    size = min(spec.rows, spec.cols)
    shore = spec.shore
    if k == 1:
        return [[(0, 0, 0, 0)]]
    if k <= shore * size:
        layout = [_triad(i, lane, size) for i in range(size) for lane in range(shore)]
    else:
        layout = [_triad(i, lane, size) for i in range(size) for lane in range(shore - 1)]
        layout.extend(_split_lane(shore - 1, size))
    return layout[:k]


def _place(spec: ChimeraSpec, coords: Coordinates, transpose: bool, flip_rows: bool, flip_cols: bool) -> int:
    row, col, side, k = coords
    if flip_rows:
        row = spec.rows - 1 - row
    if flip_cols:
        col = spec.cols - 1 - col
    if transpose:
        row, col, side = col, row, 1 - side
    return spec.qubit_id(row, col, side, k)


def clique_embedding(hw: HardwareGraph, k: int) -> Embedding:
    """Deterministic embedding of K_k.

    On an L x L grid with shore t, up to K_{tL} every chain is an L+1 qubit
    triad. K_{tL+1} gives the last lane over to L+1 split chains: two of length
    L and L-1 of length L+2, so the longest chain there is L+2, one more than
    the triads.

    On defective hardware the eight grid symmetries of the layout are tried in
    a fixed order and the first one that validates is returned.
    """
    if k < 1:
        raise ValidationException("k", k, "clique size must be positive")
    capacity = clique_capacity(hw)
    if k > capacity:
        raise EmbeddingCapacityError(k, capacity)

    spec = hw.spec
    layout = _canonical_layout(spec, k)
    target = ProblemGraph.complete(k)
    symmetries = [
        (transpose, flip_rows, flip_cols)
        for transpose, flip_rows, flip_cols in product((False, True), repeat=3)
        if not transpose or spec.rows == spec.cols
    ]
    for transpose, flip_rows, flip_cols in symmetries:
        chains = {
            v: tuple(_place(spec, c, transpose, flip_rows, flip_cols) for c in coords)
            for v, coords in enumerate(layout)
        }
        if any(q not in hw.qubits for chain in chains.values() for q in chain):
            continue
        embedding = Embedding(chains=chains, hardware=hw)
        if validate_embedding(hw, target, embedding).valid:
            logger.info(
                "clique_embedding_built",
                k=k,
                hardware=spec.label,
                max_chain_length=embedding.max_chain_length,
                qubits=len(embedding.qubits),
            )
            return embedding

    raise EmbeddingFailureError(
        f"no placement of K_{k} avoids the defects of {spec.label}",
        error_details=f"{len(hw.dead_qubits)} dead qubit(s)",
    )


def _random_automorphism(spec: ChimeraSpec, rng: np.random.Generator):
    transpose = spec.rows == spec.cols and bool(rng.random() < 0.5)
    flip_rows = bool(rng.random() < 0.5)
    flip_cols = bool(rng.random() < 0.5)
    column_lanes = [rng.permutation(spec.shore) for _ in range(spec.cols)]
    row_lanes = [rng.permutation(spec.shore) for _ in range(spec.rows)]

    def mapping(q: int) -> int:
        row, col, side, k = spec.coordinates(q)
        k = int(column_lanes[col][k]) if side == 0 else int(row_lanes[row][k])
        return _place(spec, (row, col, side, k), transpose, flip_rows, flip_cols)

    return mapping


def random_embedding_variants(emb: Embedding, count: int, seed: int) -> List[Embedding]:
    """``count`` embeddings of the same clique obtained from hardware symmetries.

    Each variant composes a random Chimera automorphism (transpose, reflections,
    lane permutations per column and per row) with a random relabelling of
    the logical variables.
    """
    if count <= 0:
        return []
    hw = emb.hardware
    rng = np.random.default_rng(seed)
    variables = emb.variables
    pairs = [(u, v) for i, u in enumerate(variables) for v in variables[i + 1:]]
    graph = to_networkx(hw)

    variants: List[Embedding] = []
    for index in range(count):
        for _ in range(MAX_VARIANT_ATTEMPTS):
            mapping = _random_automorphism(hw.spec, rng)
            relabel = rng.permutation(len(variables))
            chains = {
                variables[i]: tuple(mapping(q) for q in emb.chains[variables[int(relabel[i])]])
                for i in range(len(variables))
            }
            if any(q not in hw.qubits for chain in chains.values() for q in chain):
                continue
            candidate = Embedding(chains=chains, hardware=hw)
            if not _violations(hw, variables, pairs, candidate, graph):
                variants.append(candidate)
                break
        else:
            raise EmbeddingFailureError(
                f"could not place variant {index} on {hw.spec.label}",
                error_details=f"{MAX_VARIANT_ATTEMPTS} attempts",
            )

    logger.debug("embedding_variants_built", count=len(variants), seed=seed)
    return variants


def _violations(
    hw: HardwareGraph,
    vertices: Sequence[int],
    edges: Iterable[Edge],
    emb: Embedding,
    graph: Optional[nx.Graph] = None,
) -> List[Violation]:
    violations: List[Violation] = []

    for v in vertices:
        if v not in emb.chains:
            violations.append(Violation(kind="chain_missing", subject=f"variable {v}"))

    graph = graph if graph is not None else to_networkx(hw)
    seen: Dict[int, int] = {}
    for v, chain in emb.chains.items():
        if not chain:
            violations.append(Violation(kind="chain_empty", subject=f"variable {v}"))
            continue
        unknown = [q for q in chain if q not in hw.qubits]
        for q in unknown:
            violations.append(Violation(kind="unknown_qubit", subject=f"variable {v} qubit {q}"))
        for q in chain:
            if q in seen and seen[q] != v:
                violations.append(Violation(kind="chain_overlap", subject=f"qubit {q} in chains {seen[q]} and {v}"))
            seen.setdefault(q, v)
        if not unknown and not nx.is_connected(graph.subgraph(chain)):
            violations.append(Violation(kind="chain_disconnected", subject=f"variable {v}"))

    owner = emb.owner
    covered = {
        edge_key(owner[a], owner[b])
        for a, b in hw.couplers
        if a in owner and b in owner and owner[a] != owner[b]
    }
    for u, v in edges:
        if u in emb.chains and v in emb.chains and edge_key(u, v) not in covered:
            violations.append(Violation(kind="edge_uncovered", subject=f"edge ({u}, {v})"))
    return violations


def validate_embedding(hw: HardwareGraph, problem_graph: ProblemGraph, emb: Embedding) -> ValidationReport:
    """Check chain connectivity, disjointness and edge coverage."""
    return ValidationReport(violations=_violations(hw, problem_graph.vertices, problem_graph.edges, emb))


def restrict_embedding(emb: Embedding, variables: Iterable[int]) -> Embedding:
    """Sub-embedding on ``variables`` (a clique embedding of a smaller graph)."""
    keep = set(variables)
    return Embedding(chains={v: c for v, c in emb.chains.items() if v in keep}, hardware=emb.hardware)


def _uniform(length: int) -> np.ndarray:
    return np.full(length, 1.0 / length)


def _shares(subject: str, shares: Optional[Sequence[float]], length: int) -> np.ndarray:
    if shares is None:
        return _uniform(length)
    if len(shares) != length:
        raise InvalidChainWeightsError(subject, f"expected {length} shares, got {len(shares)}")
    return np.asarray(shares, dtype=np.float64)


def embed_ising(
    logical: IsingModel,
    emb: Embedding,
    chain_strength: float,
    cw: Optional[ChainWeightDistribution] = None,
) -> EmbeddedIsing:
    """Distribute a logical model over the chains of ``emb``."""
    if chain_strength <= 0:
        raise ValidationException("chain_strength", chain_strength, "chain strength must be positive")

    h: Dict[int, float] = {}
    J: Dict[Edge, float] = {}
    for v, bias in logical.h.items():
        chain = emb.chains.get(v)
        if not chain:
            raise EmbeddingCoverageError(f"variable {v}", "no chain")
        shares = _shares(f"chain {v}", cw.linear_shares.get(v) if cw else None, len(chain))
        for q, share in zip(chain, shares):
            h[q] = bias * share

    edge_couplers: Dict[Edge, Tuple[Edge, ...]] = {}
    inter = emb.inter_chain_couplers
    for (u, v), weight in logical.J.items():
        couplers = inter.get((u, v))
        if not couplers:
            raise EmbeddingCoverageError(f"edge ({u}, {v})", "no physical coupler joins the two chains")
        shares = _shares(f"edge ({u}, {v})", cw.quadratic_shares.get((u, v)) if cw else None, len(couplers))
        for coupler, share in zip(couplers, shares):
            J[coupler] = weight * share
        edge_couplers[(u, v)] = couplers

    chain_couplers = []
    for v in logical.h:
        for coupler in emb.intra_chain_couplers[v]:
            J[coupler] = -chain_strength
            chain_couplers.append(coupler)

    return EmbeddedIsing(
        model=IsingModel(h=h, J=J, offset=logical.offset),
        chain_couplers=frozenset(chain_couplers),
        logical_edge_couplers=edge_couplers,
        embedding=emb,
        chain_strength=float(chain_strength),
    )


def embed_assignment(assignment: Mapping[int, int], emb: Embedding) -> Dict[int, int]:
    """Chain-uniform physical assignment of a logical one."""
    return {q: int(assignment[v]) for v, chain in emb.chains.items() if v in assignment for q in chain}


def _chain_votes(samples: SampleSet, emb: Embedding) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    index = samples.index
    missing = [q for chain in emb.chains.values() for q in chain if q not in index]
    if missing:
        raise SampleCoverageError(missing)

    rows = len(samples)
    k = len(emb.chains)
    spins = np.zeros((rows, k), dtype=np.int8)
    broken = np.zeros((rows, k), dtype=bool)
    ties = np.zeros((rows, k), dtype=bool)
    for j, chain in enumerate(emb.chains.values()):
        block = samples.records[:, [index[q] for q in chain]].astype(np.int32)
        total = block.sum(axis=1)
        spins[:, j] = np.sign(total)
        broken[:, j] = np.abs(total) != len(chain)
        ties[:, j] = total == 0
    return spins, broken, ties


def unembed_majority_vote(
    samples: SampleSet,
    emb: Embedding,
    seed: int,
    model: Optional[IsingModel] = None,
) -> SampleSet:
    """Majority-vote unembedding.

    Rows with an exact tie on some chain are expanded to one row per read and
    each tie gets its own coin flip from ``seed``. Energies are evaluated
    against ``model`` when given, otherwise left as NaN.
    """
    spins, broken, ties = _chain_votes(samples, emb)
    occurrences = samples.num_occurrences

    tied_rows = ties.any(axis=1)
    if tied_rows.any():
        rng = np.random.default_rng(seed)
        repeat = np.where(tied_rows, occurrences, 1)
        idx = np.repeat(np.arange(len(samples)), repeat)
        spins = spins[idx]
        broken = broken[idx]
        ties = ties[idx]
        occurrences = np.where(tied_rows[idx], 1, occurrences[idx])
        spins[ties] = rng.choice(np.array([-1, 1], dtype=np.int8), size=int(ties.sum()))

    variables = tuple(emb.variables)
    if model is not None:
        energies = model.energies(spins, variables)
    else:
        energies = np.full(len(spins), np.nan)

    return SampleSet(
        variables=variables,
        records=spins,
        energies=energies,
        num_occurrences=occurrences,
        qpu_time_us=samples.qpu_time_us,
        chain_broken=broken,
    )


def chain_break_fraction(samples: SampleSet, emb: Embedding) -> float:
    """Share of (read, chain) pairs whose chain disagrees."""
    if not emb.chains or samples.num_reads == 0:
        return 0.0
    _, broken, _ = _chain_votes(samples, emb)
    weighted = (broken.sum(axis=1) * samples.num_occurrences).sum()
    return float(weighted / (samples.num_reads * len(emb.chains)))
