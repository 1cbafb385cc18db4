"""
Experiment protocol: graphs, embedding selection, training, testing, report.

All state lives in a run directory as JSON artifacts. Each artifact carries
the hash of the ExperimentConfig that produced it, and every step refuses to
read artifacts made under a different configuration.
"""

import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..core.config import Settings, get_settings
from ..core.exceptions import (
    AnnealTuneException,
    ArtifactIOError,
    ArtifactMismatchError,
    MissingArtifactError,
    NoValidCandidateError,
    OracleLimitError,
)
from ..core.seeding import derive_seed
from ..models.embedding import Embedding
from ..models.experiment import (
    BASELINES,
    DEFAULT_OE,
    DEFAULT_RE,
    DefaultREMode,
    ExperimentConfig,
    ProblemKind,
    Sense,
    Technique,
    parse_technique,
)
from ..models.hardware import HardwareGraph
from ..models.parameters import TechniqueParameters
from ..models.problem import ProblemGraph
from ..models.results import (
    CandidatesArtifact,
    CandidateScore,
    CreatedBy,
    EmbeddingArtifact,
    EvaluationArtifact,
    GraphTestResult,
    MethodSummary,
    ParameterArtifact,
    ReportArtifact,
    ReportRow,
    SelectionArtifact,
    SolveStats,
    TrainingArtifact,
)
from .embedding import clique_capacity, clique_embedding, random_embedding_variants
from .hwgraph import hardware_from_document, hardware_ref
from .metrics import aggregate, improvement_pct, method_rank, report_frame, tts
from .optimizer import build_search_space, differential_evolution, make_training_objective
from .oracle import graph_partition_exact, max_clique_exact, max_cut_exact
from .problems import gen_random_graph, problem_sense
from .runner import SolveOutcome, solve
from .sampler import BiasModel

logger = structlog.get_logger(__name__)

CONFIG_FILE = "config.json"
TRAIN = "train"
TEST = "test"


def embedding_ref(emb: Embedding) -> str:
    """Short content hash of an embedding's chains."""
    canonical = json.dumps(emb.chains_json(), sort_keys=True, separators=(",", ":"))
    return "emb-" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def method_file_name(method: str) -> str:
    """``Default-OE`` stays as is; techniques use their CLI spelling."""
    if method in BASELINES:
        return method
    return parse_technique(method).cli_name


class ArtifactStore:
    """JSON artifacts under one run directory, written atomically."""

    def __init__(self, root: Path, config_hash: str):
        self.root = Path(root)
        self.config_hash = config_hash

    def path(self, relative: str) -> Path:
        return self.root / relative

    def exists(self, relative: str) -> bool:
        return self.path(relative).exists()

    def write_text(self, relative: str, text: str) -> Path:
        target = self.path(relative)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            os.replace(tmp, target)
        except OSError as e:
            raise ArtifactIOError(str(target), str(e))
        logger.info("artifact_written", path=str(target))
        return target

    def write_json(self, relative: str, payload: Dict[str, Any]) -> Path:
        return self.write_text(relative, json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n")

    def read_json(self, relative: str, produced_by: str) -> Dict[str, Any]:
        target = self.path(relative)
        if not target.exists():
            raise MissingArtifactError(str(target), produced_by)
        try:
            with open(target, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            raise ArtifactIOError(str(target), str(e))
        found = data.get("config_hash")
        if found is not None and found != self.config_hash:
            raise ArtifactMismatchError(str(target), self.config_hash, found)
        return data


class ExperimentPipeline:
    """The protocol steps for one (problem, density) configuration."""

    def __init__(self, config: ExperimentConfig, out_dir: Path, settings: Optional[Settings] = None):
        self.config = config
        self.settings = settings or get_settings()
        self.store = ArtifactStore(Path(out_dir), config.config_hash())
        self.problem = ProblemKind(config.problem)
        self.sense = problem_sense(self.problem)
        self._hardware: Optional[HardwareGraph] = None

    # Shared resources

    @property
    def hardware(self) -> HardwareGraph:
        if self._hardware is None:
            self._hardware = hardware_from_document(self.config.hardware)
        return self._hardware

    @property
    def hardware_ref(self) -> str:
        return hardware_ref(self.hardware)

    @property
    def graph_size(self) -> int:
        return self.config.graph_size or clique_capacity(self.hardware)

    @property
    def bias(self) -> BiasModel:
        return BiasModel.from_params(self.config.bias, self.config.hardware.spec)

    @property
    def chain_strength(self) -> float:
        return self.config.chain_strength_rule().strength(self.graph_size, self.config.density)

    def _seed(self, *labels: Any) -> int:
        return derive_seed(self.config.seed, *labels)

    def _embedding(self, chains: Dict[str, List[int]]) -> Embedding:
        return Embedding.from_chains(chains, self.hardware)

    def _write_config(self) -> None:
        self.store.write_json(CONFIG_FILE, {
            "config_hash": self.store.config_hash,
            "config": self.config.model_dump(mode="json"),
        })

    # Graphs

    def _graph_file(self, split: str, index: int) -> str:
        return f"graphs/{split}_{index:02d}.json"

    def cmd_gen_graphs(self) -> Dict[str, List[ProblemGraph]]:
        """Write the training and test graphs of this configuration."""
        self._write_config()
        counts = {TRAIN: self.config.counts.train_graphs, TEST: self.config.counts.test_graphs}
        graphs: Dict[str, List[ProblemGraph]] = {}
        for split, count in counts.items():
            graphs[split] = []
            for index in range(count):
                graph = gen_random_graph(self.graph_size, self.config.density, self._seed("graph", split, index))
                self.store.write_json(self._graph_file(split, index), {
                    "config_hash": self.store.config_hash,
                    "split": split,
                    "index": index,
                    "graph": graph.to_dict(),
                })
                graphs[split].append(graph)
        logger.info("graphs_generated", n=self.graph_size, train=counts[TRAIN], test=counts[TEST])
        return graphs

    def load_graphs(self, split: str) -> List[ProblemGraph]:
        count = self.config.counts.train_graphs if split == TRAIN else self.config.counts.test_graphs
        return [
            ProblemGraph.from_dict(self.store.read_json(self._graph_file(split, i), "gen-graphs")["graph"])
            for i in range(count)
        ]

    # Embeddings

    def cmd_build_embedding(self) -> List[Embedding]:
        """Canonical clique embedding, its random variants, and the Default-RE embedding."""
        base = clique_embedding(self.hardware, self.graph_size)
        candidates = random_embedding_variants(
            base, self.config.counts.candidate_embeddings, self._seed("candidates")
        )
        random_variant = random_embedding_variants(base, 1, self._seed("default-re", self.problem.value))[0]

        self.store.write_json("embedding/candidates.json", CandidatesArtifact(
            config_hash=self.store.config_hash,
            hardware_ref=self.hardware_ref,
            candidates=[emb.chains_json() for emb in candidates],
        ).model_dump(mode="json"))
        self.store.write_json("embedding/random.json", EmbeddingArtifact(
            config_hash=self.store.config_hash,
            hardware_ref=self.hardware_ref,
            chains=random_variant.chains_json(),
        ).model_dump(mode="json"))
        logger.info(
            "embeddings_built",
            candidates=len(candidates),
            max_chain_length=base.max_chain_length,
            qubits=len(base.qubits),
        )
        return candidates

    def load_candidates(self) -> List[Embedding]:
        artifact = CandidatesArtifact.model_validate(
            self.store.read_json("embedding/candidates.json", "build-embedding")
        )
        return [self._embedding(chains) for chains in artifact.candidates]

    def load_selected(self) -> Embedding:
        artifact = SelectionArtifact.model_validate(
            self.store.read_json("embedding/selected.json", "select-embedding")
        )
        return self._embedding(artifact.chains)

    def load_random(self) -> Embedding:
        artifact = EmbeddingArtifact.model_validate(
            self.store.read_json("embedding/random.json", "build-embedding")
        )
        return self._embedding(artifact.chains)

    def _default_score(self, emb: Embedding, graphs: Sequence[ProblemGraph]) -> float:
        anneal = self.config.anneal.model_copy(update={"num_reads": self.config.counts.train_reads})
        values = []
        for index, graph in enumerate(graphs):
            outcome = solve(
                self.problem,
                graph,
                emb,
                TechniqueParameters(),
                self.bias,
                anneal.model_copy(update={"seed": self._seed("select", index)}),
                self.chain_strength,
                self.config.balance_penalty,
                self.settings.MAX_WORKERS,
            )
            values.append(outcome.best_value)
        return float(np.mean(values))

    def cmd_select_embedding(self) -> Tuple[int, Embedding]:
        """Score every candidate with default parameters; keep the best (Default-OE)."""
        candidates = self.load_candidates()
        graphs = self.load_graphs(TRAIN)

        scores: List[CandidateScore] = []
        for index, emb in enumerate(candidates):
            try:
                score = self._default_score(emb, graphs)
                scores.append(CandidateScore(index=index, score=score))
                logger.info("candidate_scored", index=index, score=score)
            except AnnealTuneException as e:
                scores.append(CandidateScore(index=index, error=e.error_code))
                logger.warning("candidate_failed", index=index, error_code=e.error_code, error=e.message)

        valid = [s for s in scores if s.score is not None]
        if not valid:
            raise NoValidCandidateError(len(candidates))
        sign = -1.0 if self.sense == Sense.MAXIMIZE else 1.0
        winner = min(valid, key=lambda s: (sign * s.score, s.index))

        self.store.write_json("embedding/selected.json", SelectionArtifact(
            config_hash=self.store.config_hash,
            hardware_ref=self.hardware_ref,
            selected_index=winner.index,
            sense=self.sense,
            scores=scores,
            chains=candidates[winner.index].chains_json(),
        ).model_dump(mode="json"))
        logger.info("embedding_selected", index=winner.index, score=winner.score, aggregate="mean")
        return winner.index, candidates[winner.index]

    # Training

    def _training_file(self, technique: Technique) -> str:
        return f"train/{technique.cli_name}.json"

    def _params_file(self, technique: Technique) -> str:
        return f"train/{technique.cli_name}.params.json"

    def cmd_train(self, technique: Technique) -> TrainingArtifact:
        """Run differential evolution for ``technique`` on the training graphs."""
        technique = Technique(technique)
        emb = self.load_selected()
        graphs = self.load_graphs(TRAIN)
        anneal = self.config.anneal.model_copy(update={"num_reads": self.config.counts.train_reads})
        objective = make_training_objective(
            technique,
            graphs,
            emb,
            self.bias,
            anneal,
            self.problem,
            chain_strengths=self.chain_strength,
            balance_penalty=self.config.balance_penalty,
            fitness_mode=self.config.fitness_mode,
            seed=self._seed("train", technique.value),
            max_workers=self.settings.MAX_WORKERS,
        )
        space = objective.space

        seeded = [m.tolist() for m in space.seeded_members(self._seed("sr-default", technique.value))]
        seeded += [m for m in self.config.de.seeded_members if len(m) == space.dimension]
        de_config = self.config.de.model_copy(update={
            "seeded_members": seeded,
            "seed": derive_seed(self.config.de.seed, self.config.seed, technique.value),
        })
        logger.info("training_started", technique=technique.value, dimension=space.dimension)
        result = differential_evolution(objective, space, de_config, max_workers=self.settings.MAX_WORKERS)

        history = [
            record.model_copy(update={"best_physical_energy": objective.physical_energy(record.best_raw)})
            for record in result.history
        ]
        params = ParameterArtifact(
            config_hash=self.store.config_hash,
            technique=technique.value,
            values=space.decode(result.best_raw).to_dict(),
            embedding_ref=embedding_ref(emb),
            created_by=CreatedBy(config_hash=self.store.config_hash, seed=de_config.seed),
        )
        self.store.write_json(self._params_file(technique), params.model_dump(mode="json"))
        artifact = TrainingArtifact(
            config_hash=self.store.config_hash,
            technique=technique.value,
            seed=de_config.seed,
            embedding_ref=params.embedding_ref,
            dimension=space.dimension,
            evaluations=result.evaluations,
            best_raw=result.best_raw.tolist(),
            best_fitness=result.best_fitness,
            history=history,
            decoded_params_ref=self._params_file(technique),
            config=self.config.model_dump(mode="json"),
        )
        self.store.write_json(self._training_file(technique), artifact.model_dump(mode="json"))
        logger.info(
            "training_finished",
            technique=technique.value,
            best_fitness=result.best_fitness,
            evaluations=result.evaluations,
        )
        return artifact

    def trained_parameters(self, technique: Technique, emb: Embedding) -> TechniqueParameters:
        technique = Technique(technique)
        artifact = TrainingArtifact.model_validate(
            self.store.read_json(self._training_file(technique), f"train --technique {technique.cli_name}")
        )
        return build_search_space(technique, emb).decode(artifact.best_raw)

    # Testing

    def oracle_target(self, graph: ProblemGraph) -> Optional[int]:
        """Exact optimum of the raw metric, or None when the oracle refuses."""
        try:
            if self.problem == ProblemKind.MAXCLIQUE:
                return int(max_clique_exact(graph).optimum_value)
            if self.problem == ProblemKind.MAXCUT:
                return int(max_cut_exact(graph).optimum_value)
            return int(graph_partition_exact(graph).optimum_value)
        except OracleLimitError as e:
            logger.info("oracle_refused", n=graph.n, limit=e.details.get("limit"))
            return None

    def _test_embedding(self, method: str, index: int, selected: Embedding) -> Embedding:
        if method != DEFAULT_RE:
            return selected
        if DefaultREMode(self.config.default_re_mode) == DefaultREMode.PER_GRAPH:
            return random_embedding_variants(selected, 1, self._seed("default-re", self.problem.value, index))[0]
        return self.load_random()

    def _test_embedding_ref(self, method: str, selected: Embedding) -> str:
        if method != DEFAULT_RE:
            return embedding_ref(selected)
        if DefaultREMode(self.config.default_re_mode) == DefaultREMode.PER_GRAPH:
            return DefaultREMode.PER_GRAPH.value
        return embedding_ref(self.load_random())

    def _test_graph(
        self,
        method: str,
        index: int,
        graph: ProblemGraph,
        emb: Embedding,
        params: TechniqueParameters,
    ) -> GraphTestResult:
        seed = self._seed("test", index)
        anneal = self.config.anneal.model_copy(update={"num_reads": self.config.counts.test_reads, "seed": seed})
        outcome: SolveOutcome = solve(
            self.problem,
            graph,
            emb,
            params,
            self.bias,
            anneal,
            self.chain_strength,
            self.config.balance_penalty,
            1,
        )
        result = GraphTestResult(
            graph_index=index,
            n=graph.n,
            num_edges=graph.num_edges,
            seed=seed,
            reads=outcome.num_reads,
            qpu_time_us=outcome.qpu_time_us,
            best_value=outcome.best_value,
            best_metric=outcome.best_metric,
            metric_histogram=outcome.metric_histogram(),
            oracle_target=self.oracle_target(graph),
            best_physical_energy=outcome.best_physical_energy,
            chain_break_fraction=outcome.chain_break_fraction,
        )
        logger.info(
            "graph_tested",
            method=method,
            graph=index,
            best_value=result.best_value,
            best_metric=result.best_metric,
            oracle_target=result.oracle_target,
            best_physical_energy=result.best_physical_energy,
        )
        return result

    def _test_file(self, method: str) -> str:
        return f"test/{method_file_name(method)}.json"

    def cmd_test(self, method: str) -> EvaluationArtifact:
        """Evaluate one method (a technique or a baseline) on the test graphs."""
        if method not in BASELINES:
            method = parse_technique(method).value
        selected = self.load_selected()
        graphs = self.load_graphs(TEST)
        if method in BASELINES:
            params = TechniqueParameters()
        else:
            params = self.trained_parameters(Technique(method), selected)

        def run(index: int) -> GraphTestResult:
            emb = self._test_embedding(method, index, selected)
            return self._test_graph(method, index, graphs[index], emb, params)

        workers = self.settings.MAX_WORKERS
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(run, range(len(graphs))))
        else:
            results = [run(index) for index in range(len(graphs))]

        artifact = EvaluationArtifact(
            config_hash=self.store.config_hash,
            problem=self.problem,
            density=self.config.density,
            method=method,
            sense=self.sense,
            embedding_ref=self._test_embedding_ref(method, selected),
            graphs=results,
        )
        self.store.write_json(self._test_file(method), artifact.model_dump(mode="json"))
        return artifact

    def cmd_test_default(self) -> List[EvaluationArtifact]:
        """Both baselines: Default-OE and Default-RE."""
        return [self.cmd_test(method) for method in BASELINES]

    # Report

    def _load_evaluations(self) -> Dict[str, EvaluationArtifact]:
        methods = list(BASELINES) + [Technique(t).value for t in self.config.techniques]
        evaluations = {}
        for method in methods:
            if self.store.exists(self._test_file(method)):
                evaluations[method] = EvaluationArtifact.model_validate(
                    self.store.read_json(self._test_file(method), "test")
                )
        return evaluations

    def _targets(self, evaluations: Dict[str, EvaluationArtifact]) -> Dict[int, Tuple[Optional[int], str]]:
        """Per test graph: the oracle optimum, else the best metric of any method."""
        targets: Dict[int, Tuple[Optional[int], str]] = {}
        per_graph: Dict[int, List[GraphTestResult]] = {}
        for evaluation in evaluations.values():
            for result in evaluation.graphs:
                per_graph.setdefault(result.graph_index, []).append(result)
        for index, results in sorted(per_graph.items()):
            oracle = next((r.oracle_target for r in results if r.oracle_target is not None), None)
            if oracle is not None:
                targets[index] = (oracle, "optimal")
                continue
            found = [r.best_metric for r in results if r.best_metric is not None]
            best = (max(found) if self.sense == Sense.MAXIMIZE else min(found)) if found else None
            targets[index] = (best, "best_known")
        return targets

    def _hits(self, result: GraphTestResult, target: Optional[int]) -> int:
        if target is None:
            return 0
        hits = 0
        for metric, count in result.metric_histogram.items():
            value = int(metric)
            if (value >= target) if self.sense == Sense.MAXIMIZE else (value <= target):
                hits += count
        return hits

    def summarize(self, evaluations: Dict[str, EvaluationArtifact]) -> List[MethodSummary]:
        targets = self._targets(evaluations)
        reference = evaluations.get(DEFAULT_OE)
        reference_values = {r.graph_index: r.best_value for r in reference.graphs} if reference else {}

        methods = sorted(
            set(BASELINES) | {Technique(t).value for t in self.config.techniques} | set(evaluations),
            key=method_rank,
        )
        summaries = []
        for method in methods:
            evaluation = evaluations.get(method)
            summary = MethodSummary(problem=self.problem, density=self.config.density, technique=method)
            if evaluation is None:
                summaries.append(summary)
                continue
            kinds = set()
            for result in evaluation.graphs:
                target, kind = targets[result.graph_index]
                kinds.add(kind)
                stats = SolveStats(
                    t_qpu_us=result.qpu_time_us / result.reads,
                    hits=self._hits(result, target),
                    reads=result.reads,
                    target_value=float(target) if target is not None else math.nan,
                    target_kind=kind,
                )
                summary.tts_us.append(tts(stats))
                if result.graph_index in reference_values:
                    summary.improvements.append(
                        improvement_pct(reference_values[result.graph_index], result.best_value, self.sense)
                    )
                if result.best_metric is not None:
                    summary.best_metrics.append(float(result.best_metric))
            summary.target_kind = "optimal" if kinds == {"optimal"} else "best_known"
            summaries.append(summary)
        return summaries

    def cmd_report(self) -> List[ReportRow]:
        """Aggregate every test result of this run into CSV and JSON tables."""
        evaluations = self._load_evaluations()
        rows = aggregate(self.summarize(evaluations))
        self.store.write_json("report/report.json", ReportArtifact(
            config_hash=self.store.config_hash,
            rows=rows,
        ).model_dump(mode="json"))
        self.store.write_text("report/report.csv", report_frame(rows).to_csv(index=False, lineterminator="\n"))
        logger.info("report_written", rows=len(rows), methods=sorted(evaluations))
        return rows

    def cmd_run_all(self) -> List[ReportRow]:
        """The whole protocol in order."""
        self.cmd_gen_graphs()
        self.cmd_build_embedding()
        self.cmd_select_embedding()
        techniques = [Technique(t) for t in self.config.techniques]
        for technique in techniques:
            self.cmd_train(technique)
        self.cmd_test_default()
        for technique in techniques:
            self.cmd_test(technique.value)
        return self.cmd_report()


def load_run_config(out_dir: Path) -> Optional[ExperimentConfig]:
    """Configuration stored by ``gen-graphs`` in ``out_dir``, if any."""
    path = Path(out_dir) / CONFIG_FILE
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise ArtifactIOError(str(path), str(e))
    return ExperimentConfig.model_validate(data["config"])


def cmd_gen_graphs(config: ExperimentConfig, out_dir: Path) -> Dict[str, List[ProblemGraph]]:
    return ExperimentPipeline(config, out_dir).cmd_gen_graphs()


def cmd_build_embedding(config: ExperimentConfig, out_dir: Path) -> List[Embedding]:
    return ExperimentPipeline(config, out_dir).cmd_build_embedding()


def cmd_select_embedding(config: ExperimentConfig, out_dir: Path) -> Tuple[int, Embedding]:
    return ExperimentPipeline(config, out_dir).cmd_select_embedding()


def cmd_train(config: ExperimentConfig, out_dir: Path, technique: Technique) -> TrainingArtifact:
    return ExperimentPipeline(config, out_dir).cmd_train(technique)


def cmd_test(config: ExperimentConfig, out_dir: Path, method: str) -> List[EvaluationArtifact]:
    pipeline = ExperimentPipeline(config, out_dir)
    if method.lower() == "default":
        return pipeline.cmd_test_default()
    return [pipeline.cmd_test(method)]


def cmd_report(config: ExperimentConfig, out_dir: Path) -> List[ReportRow]:
    return ExperimentPipeline(config, out_dir).cmd_report()
