"""Shared fixtures for annealtune tests."""

import pytest

from annealtune.models.experiment import BiasModelParams
from annealtune.models.hardware import ChimeraSpec
from annealtune.services.hwgraph import build_chimera
from annealtune.services.sampler import BiasModel


@pytest.fixture
def cell():
    """A single K_{4,4} Chimera cell."""
    return build_chimera(ChimeraSpec(rows=1, cols=1, shore=4))


@pytest.fixture
def chimera2():
    return build_chimera(ChimeraSpec(rows=2, cols=2, shore=4))


@pytest.fixture
def chimera3():
    return build_chimera(ChimeraSpec(rows=3, cols=3, shore=4))


@pytest.fixture
def ideal_bias():
    """An imperfection-free machine on a 3x3 grid (drift vector covers smaller grids too)."""
    return BiasModel.from_params(BiasModelParams.zero(), ChimeraSpec(rows=3, cols=3, shore=4))
