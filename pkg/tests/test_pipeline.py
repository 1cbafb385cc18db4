"""Tests for the experiment protocol and its command line."""

import json

import pytest
from click.testing import CliRunner

from annealtune.cli import cli
from annealtune.core.exceptions import ArtifactMismatchError, MissingArtifactError, UnknownTechniqueError
from annealtune.models.experiment import DEFAULT_OE, DEFAULT_RE, ExperimentConfig
from annealtune.services.metrics import CSV_COLUMNS
from annealtune.services.pipeline import ArtifactStore, ExperimentPipeline, load_run_config

EXPECTED_FILES = {
    "config.json",
    "graphs/train_00.json",
    "graphs/train_01.json",
    "graphs/test_00.json",
    "graphs/test_01.json",
    "embedding/candidates.json",
    "embedding/random.json",
    "embedding/selected.json",
    "train/SR_C.json",
    "train/SR_C.params.json",
    "train/AO_C.json",
    "train/AO_C.params.json",
    "test/Default-OE.json",
    "test/Default-RE.json",
    "test/SR_C.json",
    "test/AO_C.json",
    "report/report.json",
    "report/report.csv",
}


def tiny_config(problem="maxcut", **overrides):
    """A 2x2 grid, six-vertex graphs and a DE budget of ten evaluations."""
    payload = {
        "problem": problem,
        "density": 0.5,
        "hardware": {"spec": {"rows": 2, "cols": 2}},
        "graph_size": 6,
        "counts": {
            "train_graphs": 2,
            "test_graphs": 2,
            "train_reads": 50,
            "test_reads": 100,
            "candidate_embeddings": 3,
        },
        "de": {"population": 4, "generations": 2},
        "anneal": {"num_reads": 50, "sweeps": 50},
        "techniques": ["SR_C", "AO_C"],
    }
    payload.update(overrides)
    return ExperimentConfig.model_validate(payload)


def run_files(root):
    return {
        path.relative_to(root).as_posix(): path.read_bytes()
        for path in root.rglob("*")
        if path.is_file()
    }


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(tiny_config().model_dump_json(), encoding="utf-8")
    return path


class TestArtifactStore:
    """Test atomic JSON artifacts."""

    def test_write_then_read(self, tmp_path):
        """Test a written artifact reads back and leaves no temp files."""
        store = ArtifactStore(tmp_path, "abc")
        store.write_json("nested/item.json", {"config_hash": "abc", "value": 3})

        assert store.read_json("nested/item.json", "test")["value"] == 3
        assert [p.name for p in (tmp_path / "nested").iterdir()] == ["item.json"]

    def test_hash_mismatch(self, tmp_path):
        """Test artifacts from another configuration are refused."""
        ArtifactStore(tmp_path, "abc").write_json("item.json", {"config_hash": "abc"})

        with pytest.raises(ArtifactMismatchError) as exc_info:
            ArtifactStore(tmp_path, "xyz").read_json("item.json", "test")

        assert exc_info.value.error_code == "PIPE_003"

    def test_missing(self, tmp_path):
        """Test a missing artifact names the step that produces it."""
        with pytest.raises(MissingArtifactError) as exc_info:
            ArtifactStore(tmp_path, "abc").read_json("embedding/selected.json", "select-embedding")

        assert exc_info.value.error_code == "PIPE_002"
        assert "select-embedding" in exc_info.value.message


class TestExperimentPipeline:
    """Test the protocol steps end to end on a tiny configuration."""

    @pytest.mark.parametrize("problem", ["maxclique", "maxcut", "graphpart"])
    def test_run_all(self, tmp_path, problem):
        """Test every artifact is written and the report has one row per method."""
        config = tiny_config(problem)
        rows = ExperimentPipeline(config, tmp_path).cmd_run_all()

        assert set(run_files(tmp_path)) == EXPECTED_FILES
        assert [row.technique for row in rows] == [DEFAULT_OE, DEFAULT_RE, "SR(C)", "AO(C)"]
        assert all(row.status in ("ok", "no_solve") for row in rows)
        header = (tmp_path / "report" / "report.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)

    def test_artifact_contents(self, tmp_path):
        """Test training and evaluation artifacts carry the configured sizes."""
        pipeline = ExperimentPipeline(tiny_config(), tmp_path)
        pipeline.cmd_run_all()

        selection = json.loads((tmp_path / "embedding" / "selected.json").read_text(encoding="utf-8"))
        assert len(selection["scores"]) == 3
        assert selection["config_hash"] == pipeline.config.config_hash()

        training = json.loads((tmp_path / "train" / "SR_C.json").read_text(encoding="utf-8"))
        assert training["evaluations"] == 4 + 2 * 3
        assert len(training["history"]) == 2
        assert training["dimension"] == 6
        assert [record["gen"] for record in training["history"]] == [1, 2]
        assert training["decoded_params_ref"] == "train/SR_C.params.json"

        params = json.loads((tmp_path / "train" / "SR_C.params.json").read_text(encoding="utf-8"))
        assert params["technique"] == "SR(C)"
        assert params["embedding_ref"] == training["embedding_ref"]
        assert params["created_by"] == {"config_hash": pipeline.config.config_hash(), "seed": training["seed"]}
        assert params["values"]["spin_reversal"]["level"] == "chain"

        evaluation = json.loads((tmp_path / "test" / "AO_C.json").read_text(encoding="utf-8"))
        assert len(evaluation["graphs"]) == 2
        for graph in evaluation["graphs"]:
            assert graph["reads"] == 100
            assert graph["oracle_target"] is not None

    def test_deterministic(self, tmp_path):
        """Test two runs of one configuration produce byte-identical artifacts."""
        ExperimentPipeline(tiny_config(), tmp_path / "a").cmd_run_all()
        ExperimentPipeline(tiny_config(), tmp_path / "b").cmd_run_all()

        assert run_files(tmp_path / "a") == run_files(tmp_path / "b")

    def test_stored_config(self, tmp_path):
        """Test gen-graphs stores the configuration for later steps."""
        config = tiny_config()
        ExperimentPipeline(config, tmp_path).cmd_gen_graphs()

        assert load_run_config(tmp_path) == config
        assert load_run_config(tmp_path / "elsewhere") is None

    def test_changed_config_is_refused(self, tmp_path):
        """Test a step under a different seed refuses earlier artifacts."""
        pipeline = ExperimentPipeline(tiny_config(), tmp_path)
        pipeline.cmd_gen_graphs()
        pipeline.cmd_build_embedding()

        with pytest.raises(ArtifactMismatchError):
            ExperimentPipeline(tiny_config(seed=5), tmp_path).load_candidates()

    def test_technique_list_does_not_change_hash(self):
        """Test adding techniques keeps earlier artifacts usable."""
        assert tiny_config().config_hash() == tiny_config(techniques=["CW_L"]).config_hash()

    def test_unknown_technique(self, tmp_path):
        """Test an unknown method name is rejected."""
        with pytest.raises(UnknownTechniqueError) as exc_info:
            ExperimentPipeline(tiny_config(), tmp_path).cmd_test("XX")

        assert exc_info.value.error_code == "PIPE_001"


def transfer_config(problem, machine_seed):
    """C4 / K_17 at density 0.5 with five train and five test graphs.

    The DE and read budgets are cut down from the protocol defaults so a full
    sweep over three problems and five machines stays under half an hour.
    """
    return ExperimentConfig.model_validate({
        "problem": problem,
        "density": 0.5,
        "hardware": {"spec": {"rows": 4, "cols": 4, "shore": 4}},
        "bias": {"machine_seed": machine_seed, "sigma_h": 0.02, "epsilon": 0.01, "dac_bits": 8, "kappa": 1.0},
        "counts": {
            "train_graphs": 5,
            "test_graphs": 5,
            "train_reads": 200,
            "test_reads": 1000,
            "candidate_embeddings": 4,
        },
        "de": {"population": 10, "generations": 6},
        "anneal": {"sweeps": 200},
        "seed": 0,
    })


@pytest.mark.slow
class TestTransfer:
    """Test trained parameters beat Default-OE on unseen graphs."""

    @pytest.mark.parametrize("problem", ["maxclique", "maxcut", "graphpart"])
    def test_some_technique_improves_on_most_machines(self, tmp_path, problem):
        """Test some technique has positive mean improvement on at least 4 of 5 machines."""
        improved = 0
        for machine_seed in range(5):
            config = transfer_config(problem, machine_seed)
            rows = ExperimentPipeline(config, tmp_path / f"machine_{machine_seed}").cmd_run_all()
            trained = [row for row in rows if row.technique not in (DEFAULT_OE, DEFAULT_RE)]

            assert config.graph_size is None and len(trained) == 6
            if any(row.improvement_pct is not None and row.improvement_pct > 0 for row in trained):
                improved += 1

        assert improved >= 4


class TestCli:
    """Test the annealtune command line."""

    def test_run_all(self, tmp_path, config_file):
        """Test run-all writes the report."""
        out = tmp_path / "run"
        result = CliRunner().invoke(cli, ["run-all", "--config", str(config_file), "--out", str(out)])

        assert result.exit_code == 0, result.output
        assert (out / "report" / "report.csv").exists()

    def test_step_by_step(self, tmp_path, config_file):
        """Test the individual steps chain through the run directory."""
        out = str(tmp_path / "run")
        runner = CliRunner()
        steps = [
            ["gen-graphs", "--config", str(config_file)],
            ["build-embedding"],
            ["select-embedding"],
            ["validate-embedding", "--which", "candidates"],
            ["train", "--technique", "SR_C"],
            ["test", "--technique", "default"],
            ["test", "--technique", "SR_C"],
            ["report"],
        ]
        for step in steps:
            result = runner.invoke(cli, step + ["--out", out])
            assert result.exit_code == 0, (step, result.output)

        assert (tmp_path / "run" / "test" / "SR_C.json").exists()

    def test_missing_artifact(self, tmp_path, config_file):
        """Test training in an empty run directory fails with PIPE_002."""
        result = CliRunner().invoke(
            cli, ["train", "--technique", "SR_C", "--config", str(config_file), "--out", str(tmp_path / "empty")]
        )

        assert result.exit_code == 1
        assert '"error_code": "PIPE_002"' in result.output

    def test_hash_mismatch(self, tmp_path, config_file):
        """Test overriding the seed after the fact fails with PIPE_003."""
        out = str(tmp_path / "run")
        runner = CliRunner()
        runner.invoke(cli, ["gen-graphs", "--config", str(config_file), "--out", out])
        runner.invoke(cli, ["build-embedding", "--out", out])
        result = runner.invoke(cli, ["select-embedding", "--seed", "5", "--out", out])

        assert result.exit_code == 1
        assert '"error_code": "PIPE_003"' in result.output

    def test_invalid_config(self, tmp_path):
        """Test a malformed configuration fails with VALIDATION_001."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"density": 2.0}), encoding="utf-8")
        result = CliRunner().invoke(cli, ["gen-graphs", "--config", str(path), "--out", str(tmp_path / "run")])

        assert result.exit_code == 2
        assert '"error_code": "VALIDATION_001"' in result.output

    def test_invalid_embedding(self, tmp_path, config_file):
        """Test a corrupted stored embedding fails with EMB_005."""
        out = tmp_path / "run"
        runner = CliRunner()
        runner.invoke(cli, ["gen-graphs", "--config", str(config_file), "--out", str(out)])
        runner.invoke(cli, ["build-embedding", "--out", str(out)])
        path = out / "embedding" / "random.json"
        artifact = json.loads(path.read_text(encoding="utf-8"))
        artifact["chains"]["1"] = artifact["chains"]["0"]
        path.write_text(json.dumps(artifact), encoding="utf-8")

        result = runner.invoke(cli, ["validate-embedding", "--which", "random", "--out", str(out)])

        assert result.exit_code == 1
        assert '"error_code": "EMB_005"' in result.output
