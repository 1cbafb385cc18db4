"""Tests for configuration management."""

import pytest
from pydantic import ValidationError

from annealtune.core.config import Settings, get_settings
from annealtune.core.exceptions import UnknownTechniqueError
from annealtune.models.experiment import (
    ChainStrengthKind,
    ChainStrengthRule,
    DEConfig,
    ExperimentConfig,
    ProblemKind,
    Technique,
    parse_technique,
)


class TestSettings:
    """Test Settings configuration."""

    def test_default_settings(self):
        """Test default settings values."""
        settings = Settings(_env_file=None)

        assert settings.VERSION == "0.1.0"
        assert settings.MAX_WORKERS >= 1
        assert settings.ORACLE_CLIQUE_LIMIT == 64

    def test_log_level_validation(self):
        """Test log level validation."""
        settings = Settings(LOG_LEVEL="debug", _env_file=None)
        assert settings.LOG_LEVEL == "DEBUG"

        with pytest.raises(ValidationError):
            Settings(LOG_LEVEL="INVALID", _env_file=None)

    def test_log_format_validation(self):
        """Test log renderer validation."""
        assert Settings(LOG_FORMAT="JSON", _env_file=None).LOG_FORMAT == "json"

        with pytest.raises(ValidationError):
            Settings(LOG_FORMAT="xml", _env_file=None)

    def test_worker_count_positive(self):
        """Test MAX_WORKERS must be at least 1."""
        with pytest.raises(ValidationError):
            Settings(MAX_WORKERS=0, _env_file=None)

    def test_get_settings_cached(self):
        """Test that get_settings returns cached instance."""
        assert get_settings() is get_settings()


class TestExperimentConfig:
    """Test the experiment configuration."""

    def test_defaults(self):
        """Test protocol defaults."""
        config = ExperimentConfig()

        assert config.problem == ProblemKind.MAXCLIQUE
        assert config.hardware.spec.rows == 4
        assert config.counts.train_graphs == 10
        assert config.counts.test_reads == 10000
        assert config.counts.candidate_embeddings == 30
        assert config.de.population == 80
        assert config.de.generations == 50
        assert config.de.F == 0.8
        assert config.de.CR == 0.9
        assert len(config.techniques) == 6

    def test_technique_spellings(self):
        """Test config files may use either technique spelling."""
        config = ExperimentConfig(techniques=["SR_Q", "AO(C)"])

        assert [Technique(t) for t in config.techniques] == [Technique.SR_Q, Technique.AO_C]

    def test_anneal_offsets_rejected(self):
        """Test offsets cannot be set in the base anneal settings."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"anneal": {"offsets": {"0": 0.1}}})

    def test_density_range(self):
        """Test densities outside (0, 1] are rejected."""
        with pytest.raises(ValidationError):
            ExperimentConfig(density=0.0)
        with pytest.raises(ValidationError):
            ExperimentConfig(density=1.5)

    def test_config_hash(self):
        """Test the hash is stable, seed-sensitive and ignores the technique list."""
        base = ExperimentConfig()

        assert base.config_hash() == ExperimentConfig().config_hash()
        assert base.config_hash() != ExperimentConfig(seed=1).config_hash()
        assert base.config_hash() == ExperimentConfig(techniques=["CW_Q"]).config_hash()
        assert len(base.config_hash()) == 64

    def test_de_config_bounds(self):
        """Test DE settings validation."""
        with pytest.raises(ValidationError):
            DEConfig(CR=1.5)
        with pytest.raises(ValidationError):
            DEConfig(F=0)


class TestChainStrength:
    """Test chain strength rules."""

    def test_constant(self):
        """Test a constant rule ignores size and density."""
        assert ChainStrengthRule(value=2.5).strength(40, 0.3) == 2.5

    def test_density_scaled(self):
        """Test the default partitioning rule is 20 * a * b * density."""
        rule = ChainStrengthRule.default_for(ProblemKind.GRAPHPART)

        assert rule.kind == ChainStrengthKind.DENSITY_SCALED
        assert rule.strength(65, 0.25) == pytest.approx(20 * 32 * 33 * 0.25)

    def test_explicit_split(self):
        """Test a and b can be set explicitly."""
        rule = ChainStrengthRule(kind=ChainStrengthKind.DENSITY_SCALED, prefactor=1.0, a=2, b=3)

        assert rule.strength(100, 0.5) == pytest.approx(3.0)

    def test_other_problems_default_to_one(self):
        """Test clique and cut use a unit chain strength."""
        for problem in (ProblemKind.MAXCLIQUE, ProblemKind.MAXCUT):
            assert ChainStrengthRule.default_for(problem).strength(65, 0.5) == 1.0

    def test_rule_from_config(self):
        """Test the config falls back to the problem default."""
        assert ExperimentConfig(problem="graphpart").chain_strength_rule().kind == ChainStrengthKind.DENSITY_SCALED


class TestParseTechnique:
    """Test technique name parsing."""

    @pytest.mark.parametrize("name", ["CW_L", "CW(L)"])
    def test_both_spellings(self, name):
        """Test CLI and display spellings."""
        assert parse_technique(name) == Technique.CW_L

    def test_unknown(self):
        """Test unknown names list the available ones."""
        with pytest.raises(UnknownTechniqueError) as exc_info:
            parse_technique("SR")

        assert "SR_Q" in exc_info.value.details["available"]
