"""
Time-to-solution, improvement percentages and report aggregation.
"""

import math
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.exceptions import MetricInputError
from ..models.experiment import DEFAULT_OE, DEFAULT_RE, ProblemKind, Sense, Technique
from ..models.results import MethodSummary, ReportRow, SolveStats

TARGET_PROBABILITY = 0.99

CSV_COLUMNS = [
    "problem",
    "density",
    "technique",
    "mean_tts_us",
    "solved_count",
    "improvement_pct",
    "mean_best_metric",
    "metric_delta",
    "target_kind",
    "status",
    "bold",
]

METHOD_ORDER = [DEFAULT_OE, DEFAULT_RE] + [t.value for t in Technique]


def tts(stats: SolveStats) -> float:
    """T_QPU * log(1 - 0.99) / log(1 - p); +inf when nothing hit."""
    if stats.reads == 0:
        raise MetricInputError("TTS needs at least one read")
    p = stats.hits / stats.reads
    if p == 0:
        return math.inf
    if p == 1:
        return stats.t_qpu_us
    return stats.t_qpu_us * math.log(1.0 - TARGET_PROBABILITY) / math.log(1.0 - p)


def tbs(stats: SolveStats) -> float:
    """Time-to-best-solution: TTS against the best known value."""
    return tts(stats.model_copy(update={"target_kind": "best_known"}))


def improvement_pct(reference: float, achieved: float, sense: Sense) -> Optional[float]:
    """Relative gain over ``reference``; positive is better, None when undefined."""
    if reference == 0:
        return None
    if Sense(sense) == Sense.MAXIMIZE:
        return 100.0 * (achieved - reference) / abs(reference)
    return 100.0 * (reference - achieved) / abs(reference)


def method_rank(method: str) -> Tuple[int, str]:
    return (METHOD_ORDER.index(method), method) if method in METHOD_ORDER else (len(METHOD_ORDER), method)


def _mean(values: Iterable[Optional[float]]) -> Optional[float]:
    kept = [v for v in values if v is not None and math.isfinite(v)]
    return float(np.mean(kept)) if kept else None


def _row(summary: MethodSummary) -> ReportRow:
    solved = [t for t in summary.tts_us if math.isfinite(t)]
    if not summary.tts_us:
        status = "not_run"
    elif not solved:
        status = "no_solve"
    else:
        status = "ok"
    return ReportRow(
        problem=summary.problem,
        density=summary.density,
        technique=summary.technique,
        mean_tts_us=float(np.mean(solved)) if solved else None,
        solved_count=len(solved),
        improvement_pct=_mean(summary.improvements),
        mean_best_metric=_mean(summary.best_metrics),
        target_kind=summary.target_kind,
        status=status,
    )


def aggregate(summaries: Sequence[MethodSummary]) -> List[ReportRow]:
    """One row per problem/density/method; bold marks the best row of each cell.

    Best = most graphs solved, ties broken by the smaller mean TTS.
    """
    cells: Dict[Tuple[str, float], List[ReportRow]] = defaultdict(list)
    for summary in summaries:
        row = _row(summary)
        cells[(ProblemKind(row.problem).value, row.density)].append(row)

    rows: List[ReportRow] = []
    for key in sorted(cells):
        cell = sorted(cells[key], key=lambda r: method_rank(r.technique))
        reference = next((r for r in cell if r.technique == DEFAULT_OE), None)
        if reference is not None and reference.mean_best_metric is not None:
            for row in cell:
                if row.mean_best_metric is not None:
                    row.metric_delta = row.mean_best_metric - reference.mean_best_metric

        solved = [r for r in cell if r.solved_count > 0]
        if solved:
            winner = min(solved, key=lambda r: (-r.solved_count, r.mean_tts_us, method_rank(r.technique)))
            winner.bold = True
        rows.extend(cell)
    return rows


def report_frame(rows: Sequence[ReportRow]) -> pd.DataFrame:
    """Report rows as a table with the CSV column order."""
    records = [row.model_dump(mode="json") for row in rows]
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)
