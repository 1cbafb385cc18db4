"""Tests for spin reversal, anneal offsets, chain weights and scaling."""

import dataclasses

import numpy as np
import pytest

from annealtune.core.exceptions import (
    InvalidChainWeightsError,
    MaskCoverageError,
    OffsetOutOfRangeError,
    SpinReversalTypeError,
    UnknownQubitError,
    ValidationException,
)
from annealtune.models.embedding import Embedding
from annealtune.models.ising import IsingModel, QuboModel
from annealtune.models.parameters import CHAIN, QUBIT, ChainWeightDistribution, SpinReversalMask
from annealtune.models.sampleset import SampleSet
from annealtune.services.embedding import clique_embedding
from annealtune.services.oracle import exact_ground_state
from annealtune.services.transforms import (
    apply_spin_reversal,
    auto_scale,
    chain_offset_range,
    chain_weights_from_raw,
    check_offsets,
    default_random_mask,
    expand_chain_mask,
    expand_chain_offsets,
    invert_sampleset,
    invert_solution,
    simplex_normalize,
    snap_offsets,
    snap_value,
)
from tests.factories import random_ising


def _mask(bits):
    return SpinReversalMask(QUBIT, bits)


class TestSpinReversal:
    """Test the spin reversal gauge transform."""

    def test_empty_mask(self):
        """Test an all-zero mask leaves the model unchanged."""
        model = IsingModel(h={0: 0.5, 1: -1.0}, J={(0, 1): 0.25}, offset=1.0)
        reversed_model, _ = apply_spin_reversal(model, _mask({0: 0, 1: 0}))

        assert reversed_model == model

    def test_full_mask(self):
        """Test flipping everything negates h and keeps J."""
        model = IsingModel(h={0: 0.5, 1: -1.0}, J={(0, 1): 0.25})
        reversed_model, _ = apply_spin_reversal(model, _mask({0: 1, 1: 1}))

        assert reversed_model.h == {0: -0.5, 1: 1.0}
        assert reversed_model.J == model.J

    def test_qubo_rejected(self):
        """Test spin reversal only applies to Ising models."""
        with pytest.raises(SpinReversalTypeError) as exc_info:
            apply_spin_reversal(QuboModel(h={0: 1.0}, J={}), _mask({0: 1}))

        assert exc_info.value.error_code == "XFORM_001"

    def test_mask_must_cover_model(self):
        """Test a mask missing a variable is rejected."""
        with pytest.raises(MaskCoverageError):
            apply_spin_reversal(IsingModel(h={0: 1.0, 1: 1.0}, J={}), _mask({0: 1}))

    def test_superset_mask_is_restricted(self):
        """Test extra mask bits are dropped from the returned mask."""
        _, mask = apply_spin_reversal(IsingModel(h={0: 1.0}, J={}), _mask({0: 1, 5: 1}))

        assert mask.bits == {0: 1}

    def test_ground_energy_is_invariant(self):
        """Test random masks preserve the exact ground-state energy and its minimizers."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 11))
            model = random_ising(n, rng, density=0.6)
            mask = _mask({v: int(b) for v, b in zip(range(n), rng.integers(0, 2, size=n))})
            reversed_model, mask = apply_spin_reversal(model, mask)
            original = exact_ground_state(model)
            transformed = exact_ground_state(reversed_model)

            assert transformed.optimum_value == pytest.approx(original.optimum_value, abs=1e-12)
            for witness in transformed.witnesses:
                recovered = invert_solution(mask, witness)
                assert model.energy(recovered) == pytest.approx(original.optimum_value, abs=1e-12)

    def test_energies_agree_everywhere(self):
        """Test H(invert(x)) equals H'(x) on every assignment of 8 spins."""
        rng = np.random.default_rng(1)
        model = random_ising(8, rng)
        mask = default_random_mask(range(8), seed=3)
        reversed_model, mask = apply_spin_reversal(model, mask)
        spins = 2 * ((np.arange(256)[:, None] >> np.arange(8)) & 1) - 1
        signs = np.array([mask.sign(v) for v in range(8)])

        np.testing.assert_allclose(model.energies(spins * signs), reversed_model.energies(spins), atol=1e-12)


class TestInversion:
    """Test mapping reversed solutions back."""

    def test_empty_mask_identity(self):
        """Test an all-zero mask is the identity."""
        assert invert_solution(_mask({0: 0, 1: 0}), {0: 1, 1: -1}) == {0: 1, 1: -1}

    def test_single_flip(self):
        """Test flipping variable 1 of (+1, +1)."""
        assert invert_solution(_mask({1: 1, 2: 0}), {1: 1, 2: 1}) == {1: -1, 2: 1}

    def test_sampleset(self):
        """Test whole sample sets flip the masked columns."""
        samples = SampleSet(
            variables=(0, 1, 2),
            records=np.array([[1, 1, -1], [-1, 1, 1]]),
            energies=np.array([-1.0, 0.0]),
            num_occurrences=np.array([3, 1]),
        )
        inverted = invert_sampleset(_mask({0: 1, 1: 0, 2: 1}), samples)

        assert inverted.records.tolist() == [[-1, 1, 1], [1, 1, -1]]
        assert inverted.energies.tolist() == [-1.0, 0.0]
        assert inverted.num_occurrences.tolist() == [3, 1]


class TestMasks:
    """Test mask construction helpers."""

    def test_reproducible(self):
        """Test a fixed seed gives the same mask."""
        assert default_random_mask(range(50), seed=4) == default_random_mask(range(50), seed=4)

    def test_about_half_flipped(self):
        """Test 10000 variables flip within 3 sigma of 5000."""
        mask = default_random_mask(range(10000), seed=12)

        assert abs(len(mask.flipped) - 5000) <= 150

    def test_empty(self):
        """Test no variables give an empty mask."""
        assert default_random_mask([], seed=0).bits == {}

    def test_invalid_bits(self):
        """Test bits other than 0/1 are rejected."""
        with pytest.raises(ValidationException):
            SpinReversalMask(QUBIT, {0: 2})

    def test_expand_all_zero(self, chimera3):
        """Test an all-zero chain mask expands to all-zero qubit bits."""
        emb = clique_embedding(chimera3, 13)
        expanded = expand_chain_mask(SpinReversalMask(CHAIN, {v: 0 for v in emb.variables}), emb)

        assert expanded.level == QUBIT
        assert set(expanded.bits) == set(emb.qubits)
        assert not expanded.flipped

    def test_expand_one_chain(self, chimera2):
        """Test one set bit flips every qubit of its chain."""
        chain = (0, 4, 12, 28, 20, 17, 9)
        emb = Embedding(chains={0: chain, 1: (1,)}, hardware=chimera2)
        expanded = expand_chain_mask(SpinReversalMask(CHAIN, {0: 1, 1: 0}), emb)

        assert sorted(expanded.flipped) == sorted(chain)

    def test_expand_singletons(self, cell):
        """Test length-1 chains copy their bits."""
        emb = Embedding(chains={0: (0,), 1: (5,)}, hardware=cell)
        expanded = expand_chain_mask(SpinReversalMask(CHAIN, {0: 1, 1: 0}), emb)

        assert expanded.bits == {0: 1, 5: 0}

    def test_expand_missing_variable(self, cell):
        """Test a chain without a mask bit is rejected."""
        emb = Embedding(chains={0: (0,), 1: (5,)}, hardware=cell)

        with pytest.raises(MaskCoverageError):
            expand_chain_mask(SpinReversalMask(CHAIN, {0: 1}), emb)


class TestOffsets:
    """Test anneal offset snapping and range checks."""

    @pytest.mark.parametrize(
        "raw,expected",
        [(0.074, 0.05), (0.26, 0.2), (-0.075, -0.05), (0.025, 0.0), (-0.3, -0.2), (0.1, 0.1), (0.0, 0.0)],
    )
    def test_snap_value(self, raw, expected):
        """Test clamping, rounding and ties toward zero."""
        assert snap_value(raw, -0.2, 0.2, 0.05) == pytest.approx(expected, abs=1e-12)

    def test_snap_offsets(self, cell):
        """Test snapping a qubit map."""
        offsets = snap_offsets({0: 0.074, 1: -0.9}, cell)

        assert offsets.level == QUBIT
        assert offsets.offsets == pytest.approx({0: 0.05, 1: -0.2})
        check_offsets(offsets.offsets, cell)

    def test_snap_unknown_qubit(self, cell):
        """Test snapping offsets of a missing qubit fails."""
        with pytest.raises(UnknownQubitError):
            snap_offsets({42: 0.0}, cell)

    def test_check_off_grid(self, cell):
        """Test an offset between grid points is rejected."""
        with pytest.raises(OffsetOutOfRangeError) as exc_info:
            check_offsets({0: 0.07}, cell)

        assert exc_info.value.error_code == "SAMPLER_002"

    def test_check_out_of_range(self, cell):
        """Test an offset outside the qubit's range is rejected."""
        with pytest.raises(OffsetOutOfRangeError):
            check_offsets({0: 0.25}, cell)

    def test_chain_range_is_intersection(self, cell):
        """Test a chain's range is the intersection of its qubits' ranges."""
        hw = dataclasses.replace(cell, offset_ranges={0: (-0.1, 0.2), 4: (-0.2, 0.15)})

        assert chain_offset_range((0, 4), hw) == (-0.1, 0.15)

    def test_expand_chain_offsets(self, cell):
        """Test every chain qubit shares its chain's snapped offset."""
        hw = dataclasses.replace(cell, offset_ranges={0: (-0.1, 0.2)})
        emb = Embedding(chains={0: (0, 4), 1: (1, 5)}, hardware=hw)
        offsets = expand_chain_offsets({0: -0.18, 1: 0.12}, emb, hw)

        assert offsets.level == CHAIN
        assert offsets.offsets == pytest.approx({0: -0.1, 4: -0.1, 1: 0.1, 5: 0.1})
        check_offsets(offsets.offsets, hw)


class TestChainWeights:
    """Test simplex shares."""

    def test_normalize(self):
        """Test shares are floored and rescaled to sum 1."""
        assert simplex_normalize([1.0, 3.0]) == pytest.approx((0.25, 0.75))
        assert simplex_normalize([0.0, 0.0]) == pytest.approx((0.5, 0.5))

    def test_from_raw_linear(self):
        """Test CW(L) tunes only linear shares."""
        cw = chain_weights_from_raw("CW(L)", {0: [1.0, 3.0], 1: [0.5]})

        assert cw.linear_shares[0] == pytest.approx((0.25, 0.75))
        assert cw.linear_shares[1] == (1.0,)
        assert cw.quadratic_shares == {}

    def test_from_raw_quadratic(self):
        """Test CW(Q) tunes only quadratic shares."""
        cw = chain_weights_from_raw("CW(Q)", {(0, 1): [2.0, 2.0]})

        assert cw.quadratic_shares[(0, 1)] == pytest.approx((0.5, 0.5))
        assert cw.linear_shares == {}

    def test_shares_must_sum_to_one(self):
        """Test unnormalized shares are rejected."""
        with pytest.raises(InvalidChainWeightsError):
            ChainWeightDistribution(mode="CW(L)", linear_shares={0: (0.5, 0.6)}, quadratic_shares={})

    def test_negative_share(self):
        """Test negative shares are rejected."""
        with pytest.raises(InvalidChainWeightsError):
            ChainWeightDistribution(mode="CW(Q)", linear_shares={}, quadratic_shares={(0, 1): (1.5, -0.5)})

    def test_mode_keeps_other_shares_uniform(self):
        """Test CW(L) may not skew quadratic shares."""
        with pytest.raises(InvalidChainWeightsError):
            ChainWeightDistribution(mode="CW(L)", linear_shares={}, quadratic_shares={(0, 1): (0.2, 0.8)})


class TestAutoScale:
    """Test coefficient range scaling."""

    def test_scales_down(self):
        """Test the largest violation sets the divisor."""
        scaled, scale = auto_scale(IsingModel(h={0: 4.0, 1: 0.0}, J={(0, 1): -3.0}, offset=6.0))

        assert scale == 3.0
        assert scaled.h[0] == pytest.approx(4.0 / 3.0)
        assert scaled.J[(0, 1)] == pytest.approx(-1.0)
        assert scaled.offset == pytest.approx(2.0)

    def test_never_enlarges(self):
        """Test in-range models come back untouched."""
        model = IsingModel(h={0: 0.1}, J={(0, 1): 0.2})
        scaled, scale = auto_scale(model)

        assert scale == 1.0
        assert scaled is model
