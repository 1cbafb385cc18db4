"""
annealtune command line interface.

Every subcommand writes its artifacts under ``--out``; failures print one
JSON line ``{"error_code", "message", "details"}`` to stderr and exit nonzero.
"""

import functools
import json
import sys
from pathlib import Path
from typing import Callable, Optional

import click
import structlog
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from annealtune.core.config import get_settings
from annealtune.core.exceptions import AnnealTuneException, InternalError, InvalidEmbeddingError, ValidationException
from annealtune.core.logging import setup_logging
from annealtune.models.experiment import BASELINES, ExperimentConfig, ProblemKind, Technique, parse_technique
from annealtune.models.problem import ProblemGraph
from annealtune.services.embedding import validate_embedding
from annealtune.services.pipeline import ExperimentPipeline, cmd_test, load_run_config

console = Console()
logger = structlog.get_logger(__name__)

TECHNIQUE_CHOICES = [t.cli_name for t in Technique]


def _fail(error: AnnealTuneException) -> None:
    click.echo(json.dumps(error.to_dict(), sort_keys=True, default=str), err=True)
    sys.exit(error.exit_code)


def handle_errors(func: Callable) -> Callable:
    """Turn every escaping exception into the machine-readable error line."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except AnnealTuneException as e:
            logger.error("command_failed", error_code=e.error_code, error=e.message)
            _fail(e)
        except ValidationError as e:
            _fail(ValidationException("config", e.error_count(), str(e)))
        except Exception as e:
            logger.error("command_crashed", error=str(e), error_type=type(e).__name__, exc_info=True)
            _fail(InternalError(e))

    return wrapper


def experiment_options(func: Callable) -> Callable:
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="ExperimentConfig JSON file"),
        click.option("--problem", type=click.Choice([p.value for p in ProblemKind]), help="Problem class"),
        click.option("--density", type=float, help="Edge density of the random graphs"),
        click.option("--seed", type=click.IntRange(min=0), help="Global seed"),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Run directory"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def resolve_config(
    config_path: Optional[str],
    out: Path,
    problem: Optional[str],
    density: Optional[float],
    seed: Optional[int],
) -> ExperimentConfig:
    """File config, else the run directory's stored config, else defaults; flags win."""
    if config_path:
        config = ExperimentConfig.model_validate_json(Path(config_path).read_text(encoding="utf-8"))
    else:
        config = load_run_config(out) or ExperimentConfig()
    overrides = {
        key: value
        for key, value in (("problem", problem), ("density", density), ("seed", seed))
        if value is not None
    }
    if overrides:
        config = ExperimentConfig.model_validate({**config.model_dump(mode="json"), **overrides})
    return config


def build_pipeline(config_path, problem, density, seed, out) -> ExperimentPipeline:
    out_dir = Path(out or get_settings().OUTPUT_DIR)
    config = resolve_config(config_path, out_dir, problem, density, seed)
    logger.info("config_resolved", out=str(out_dir), **config.summary())
    return ExperimentPipeline(config, out_dir)


def print_rows(rows) -> None:
    table = Table(title="annealtune report")
    for column in ("problem", "density", "technique", "mean TTS/TBS (us)", "solved", "improvement %", "status"):
        table.add_column(column)
    for row in rows:
        tts_text = f"{row.mean_tts_us:.1f}" if row.mean_tts_us is not None else "-"
        improvement = f"{row.improvement_pct:.2f}" if row.improvement_pct is not None else "-"
        style = "bold" if row.bold else None
        table.add_row(
            str(row.problem), f"{row.density:g}", row.technique, tts_text,
            f"({row.solved_count})", improvement, row.status, style=style,
        )
    console.print(table)


@click.group()
@click.version_option(version=get_settings().VERSION)
def cli():
    """annealtune - fixed-embedding annealer parameter tuning"""
    setup_logging()


@cli.command("gen-graphs")
@experiment_options
@handle_errors
def gen_graphs(config_path, problem, density, seed, out):
    """Generate training and test graphs."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    graphs = pipeline.cmd_gen_graphs()
    console.print(
        f"[green]✓ {len(graphs['train'])} training and {len(graphs['test'])} test graphs "
        f"(n={pipeline.graph_size}, density={pipeline.config.density:g})[/green]"
    )


@cli.command("build-embedding")
@experiment_options
@handle_errors
def build_embedding(config_path, problem, density, seed, out):
    """Build the candidate clique embeddings."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    candidates = pipeline.cmd_build_embedding()
    console.print(
        f"[green]✓ {len(candidates)} candidate embeddings of K_{pipeline.graph_size} "
        f"on {pipeline.hardware.spec.label}[/green]"
    )


@cli.command("select-embedding")
@experiment_options
@handle_errors
def select_embedding(config_path, problem, density, seed, out):
    """Pick the candidate with the best default-parameter score."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    index, emb = pipeline.cmd_select_embedding()
    console.print(f"[green]✓ selected candidate {index} (longest chain {emb.max_chain_length})[/green]")


@cli.command("validate-embedding")
@experiment_options
@click.option("--which", type=click.Choice(["selected", "random", "candidates"]), default="selected")
@handle_errors
def validate_embedding_cmd(config_path, problem, density, seed, out, which):
    """Check chains and edge coverage of stored embeddings."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    if which == "selected":
        embeddings = [pipeline.load_selected()]
    elif which == "random":
        embeddings = [pipeline.load_random()]
    else:
        embeddings = pipeline.load_candidates()

    clique = ProblemGraph.complete(pipeline.graph_size)
    table = Table(title=f"{which} embeddings")
    table.add_column("#")
    table.add_column("valid")
    table.add_column("violations")
    failures = {}
    for index, emb in enumerate(embeddings):
        report = validate_embedding(pipeline.hardware, clique, emb)
        if not report.valid:
            failures[index] = list(report.kinds())
        table.add_row(str(index), "yes" if report.valid else "no", ", ".join(report.kinds()) or "-")
    console.print(table)
    if failures:
        raise InvalidEmbeddingError(which, failures)


@cli.command("train")
@experiment_options
@click.option("--technique", required=True, type=click.Choice(TECHNIQUE_CHOICES))
@handle_errors
def train(config_path, problem, density, seed, out, technique):
    """Optimize one technique's parameters with differential evolution."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    artifact = pipeline.cmd_train(parse_technique(technique))
    console.print(
        f"[green]✓ {artifact.technique}: best fitness {artifact.best_fitness:.4f} "
        f"after {artifact.evaluations} evaluations ({artifact.dimension} dimensions)[/green]"
    )


@cli.command("test")
@experiment_options
@click.option("--technique", required=True, type=click.Choice(TECHNIQUE_CHOICES + ["default"]))
@handle_errors
def test(config_path, problem, density, seed, out, technique):
    """Evaluate trained parameters (or the baselines) on the test graphs."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    method = technique if technique == "default" else parse_technique(technique).value
    artifacts = cmd_test(pipeline.config, pipeline.store.root, method)
    for artifact in artifacts:
        solved = sum(1 for g in artifact.graphs if g.best_metric is not None and g.best_metric == g.oracle_target)
        console.print(f"[green]✓ {artifact.method}: {len(artifact.graphs)} graphs, {solved} at the oracle optimum[/green]")


@cli.command("report")
@experiment_options
@handle_errors
def report(config_path, problem, density, seed, out):
    """Aggregate test results into report.csv and report.json."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    print_rows(pipeline.cmd_report())


@cli.command("run-all")
@experiment_options
@handle_errors
def run_all(config_path, problem, density, seed, out):
    """Run every protocol step in order."""
    pipeline = build_pipeline(config_path, problem, density, seed, out)
    methods = list(BASELINES) + [Technique(t).value for t in pipeline.config.techniques]
    console.print(f"[blue]Running {', '.join(methods)} on {pipeline.config.problem}[/blue]")
    print_rows(pipeline.cmd_run_all())


if __name__ == "__main__":
    cli()
