"""Tests for Chimera hardware graphs."""

import dataclasses

import pytest

from annealtune.core.exceptions import InvalidHardwareError, UnknownQubitError
from annealtune.models.hardware import ChimeraSpec, HardwareDocument, HardwareGraph
from annealtune.services.hwgraph import (
    build_chimera,
    expected_coupler_count,
    hardware_from_dict,
    hardware_ref,
    hardware_to_dict,
    neighbors,
    remove_qubits,
    to_networkx,
)


class TestBuildChimera:
    """Test ideal graph construction."""

    def test_full_chip_counts(self):
        """Test the 16x16 chip has 2048 qubits and 6016 couplers."""
        hw = build_chimera(ChimeraSpec(rows=16, cols=16, shore=4))

        assert len(hw.qubits) == 2048
        assert len(hw.couplers) == 6016

    def test_single_cell(self, cell):
        """Test a single cell is K_{4,4} with no inter-cell couplers."""
        assert len(cell.qubits) == 8
        assert len(cell.couplers) == 16
        for a, b in cell.couplers:
            assert cell.spec.coordinates(a)[2] != cell.spec.coordinates(b)[2]

    @pytest.mark.parametrize("rows,cols,shore", [(1, 3, 4), (2, 3, 2), (4, 4, 4), (3, 1, 3)])
    def test_couplers_follow_adjacency_rules(self, rows, cols, shore):
        """Test the built couplers are exactly the pairs the adjacency rules allow."""
        spec = ChimeraSpec(rows=rows, cols=cols, shore=shore)
        hw = build_chimera(spec)

        def allowed(a, b):
            ra, ca, sa, ka = spec.coordinates(a)
            rb, cb, sb, kb = spec.coordinates(b)
            if (ra, ca) == (rb, cb):
                return sa != sb
            if sa != sb or ka != kb:
                return False
            if sa == 0:
                return ca == cb and abs(ra - rb) == 1
            return ra == rb and abs(ca - cb) == 1

        enumerated = {
            (a, b)
            for a in range(spec.num_qubits)
            for b in range(a + 1, spec.num_qubits)
            if allowed(a, b)
        }

        assert hw.couplers == enumerated
        assert len(hw.couplers) == expected_coupler_count(spec)
        assert all(spec.is_topological_coupler(b, a) for a, b in enumerated)

    def test_linear_labels(self):
        """Test qubit ids use the row-major cell, side, k labelling."""
        spec = ChimeraSpec(rows=2, cols=3, shore=4)

        assert spec.qubit_id(0, 0, 0, 0) == 0
        assert spec.qubit_id(0, 0, 1, 2) == 6
        assert spec.qubit_id(1, 2, 1, 3) == ((1 * 3 + 2) * 2 + 1) * 4 + 3
        assert spec.coordinates(29) == (1, 0, 1, 1)

    def test_colouring_is_bipartite(self, chimera3):
        """Test every coupler joins the two colour classes."""
        spec = chimera3.spec
        assert all(spec.colour(a) != spec.colour(b) for a, b in chimera3.couplers)

    def test_coordinates_round_trip(self):
        """Test qubit ids and coordinates are inverse."""
        spec = ChimeraSpec(rows=2, cols=3, shore=4)
        for q in range(spec.num_qubits):
            assert spec.qubit_id(*spec.coordinates(q)) == q

    def test_default_offset_ranges(self, cell):
        """Test every qubit gets the default offset range and step."""
        assert cell.offset_range(0) == (-0.2, 0.2)
        assert cell.offset_step == pytest.approx(0.05)


class TestRemoveQubits:
    """Test defect simulation."""

    def test_remove_nothing(self, cell):
        """Test removing no qubits returns an identical graph."""
        assert remove_qubits(cell, set()) == cell

    def test_remove_one(self, cell):
        """Test one dead qubit takes its four couplers with it."""
        hw = remove_qubits(cell, {3})

        assert len(hw.qubits) == 7
        assert len(hw.couplers) == 12
        assert hw.dead_qubits == [3]
        assert all(3 not in coupler for coupler in hw.couplers)

    def test_remove_all(self, cell):
        """Test removing every qubit leaves an empty graph."""
        hw = remove_qubits(cell, set(cell.qubits))

        assert len(hw.qubits) == 0
        assert len(hw.couplers) == 0

    def test_remove_unknown(self, cell):
        """Test removing a qubit outside the chip fails."""
        with pytest.raises(UnknownQubitError) as exc_info:
            remove_qubits(cell, {99})

        assert exc_info.value.error_code == "HW_001"
        assert exc_info.value.details["qubits"] == [99]

    def test_removing_twice_fails(self, cell):
        """Test a dead qubit is no longer a working qubit."""
        hw = remove_qubits(cell, {0})
        with pytest.raises(UnknownQubitError):
            remove_qubits(hw, {0})


class TestNeighbors:
    """Test neighbourhood queries."""

    def test_interior_degree(self):
        """Test an interior qubit of the full chip has degree 6."""
        spec = ChimeraSpec(rows=16, cols=16, shore=4)
        hw = build_chimera(spec)

        assert len(neighbors(hw, spec.qubit_id(5, 7, 0, 2))) == 6
        assert len(neighbors(hw, spec.qubit_id(5, 7, 1, 2))) == 6

    def test_has_coupler(self, cell):
        """Test intra-cell couplers join opposite sides only, in either order."""
        assert cell.has_coupler(0, 4)
        assert cell.has_coupler(4, 0)
        assert not cell.has_coupler(0, 1)

    def test_corner_degree(self):
        """Test a corner-cell side 0 qubit of row 0 has degree 5."""
        spec = ChimeraSpec(rows=16, cols=16, shore=4)
        hw = build_chimera(spec)

        assert len(neighbors(hw, spec.qubit_id(0, 0, 0, 1))) == 5

    def test_cell_degree(self, cell):
        """Test every qubit of a lone cell has degree 4."""
        assert all(len(neighbors(cell, q)) == 4 for q in cell.qubits)

    def test_unknown_qubit(self, cell):
        """Test asking about a missing qubit fails."""
        with pytest.raises(UnknownQubitError):
            neighbors(cell, 8)

    def test_networkx_view(self, chimera2):
        """Test the networkx view carries coordinates."""
        graph = to_networkx(chimera2)

        assert graph.number_of_nodes() == 32
        assert graph.number_of_edges() == len(chimera2.couplers)
        assert graph.nodes[9]["side"] == chimera2.spec.coordinates(9)[2]


class TestHardwareValidation:
    """Test HardwareGraph invariants."""

    def test_non_topological_coupler(self, cell):
        """Test a coupler between two same-side qubits is rejected."""
        with pytest.raises(InvalidHardwareError):
            dataclasses.replace(cell, couplers=cell.couplers | {(0, 1)})

    def test_offset_range_must_contain_zero(self, cell):
        """Test an offset range excluding zero is rejected."""
        with pytest.raises(InvalidHardwareError):
            dataclasses.replace(cell, offset_ranges={0: (0.05, 0.2)})

    def test_nonpositive_step(self, cell):
        """Test the offset step must be positive."""
        with pytest.raises(InvalidHardwareError):
            HardwareGraph(
                spec=cell.spec,
                qubits=cell.qubits,
                couplers=cell.couplers,
                offset_ranges={},
                offset_step=0.0,
            )


class TestHardwareDocument:
    """Test the JSON form of hardware graphs."""

    def test_document_round_trip(self, chimera2):
        """Test a defective graph survives the document form."""
        hw = remove_qubits(chimera2, {0, 17})
        restored = hardware_from_dict(hardware_to_dict(hw))

        assert restored == hw
        assert hardware_ref(restored) == hardware_ref(hw)

    def test_ref_depends_on_defects(self, chimera2):
        """Test the hardware reference changes with the defect list."""
        assert hardware_ref(chimera2) != hardware_ref(remove_qubits(chimera2, {5}))

    def test_document_rejects_bad_range(self):
        """Test a document whose default range excludes zero is rejected."""
        with pytest.raises(ValueError):
            HardwareDocument(spec=ChimeraSpec(rows=1, cols=1), offset_range_default=(0.1, 0.2))
