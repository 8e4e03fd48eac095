"""
Test Tripartite Analysis
Slices, canonical form, coefficient matrices, the determinant test and closed-form predictions
"""

import numpy as np
import pytest

from dqls_engine import dqls_subspace, random_local_invertibles, slocc_transform
from linalg_core import PreconditionFailed, svd_rank
from locality import tripartite_structure
from quantum_state import InvalidState, random_state
from tripartite import (
    Prediction, SloccDegenerate, analyze, build_slices, central_qubit_system, coefficient_matrix,
    coefficient_nullity, coefficient_rank, determinant_test, nogo_check, orient, predict, slocc_canonical
)


class TestSlices:
    """Test orientation and slice construction"""

    def test_orient_swaps_when_a_is_larger(self):
        s = random_state((4, 2, 2), 0)
        oriented, swapped = orient(s)
        assert swapped
        assert oriented.dims == (2, 2, 4)

    def test_orient_keeps_ordered_states(self):
        s = random_state((2, 3, 4), 0)
        assert orient(s) == (s, False)

    def test_orient_needs_three_subsystems(self):
        with pytest.raises(InvalidState, match="exactly 3"):
            orient(random_state((2, 2), 0))

    def test_slices_read_the_tensor(self):
        s = random_state((2, 3, 4), 1)
        slices = build_slices(s)
        assert len(slices) == 3
        assert slices[1].shape == (2, 4)
        assert slices[1][1, 2] == s.tensor()[1, 1, 2]


class TestSloccCanonicalForm:
    """Test the [I | 0] normal form of the first slice"""

    def test_first_slice_becomes_identity_block(self):
        slices = build_slices(random_state((2, 2, 3), 2))
        canonical = slocc_canonical(slices)
        expected = np.hstack([np.eye(2), np.zeros((2, 1))])
        assert np.allclose(canonical.slices[0], expected, atol=1e-10)

    def test_transforms_reproduce_every_slice(self):
        slices = build_slices(random_state((3, 2, 4), 3))
        canonical = slocc_canonical(slices)
        for original, transformed in zip(slices, canonical.slices):
            assert np.allclose(canonical.m_a @ original @ canonical.m_c.T, transformed)

    def test_ghz_first_slice_is_degenerate(self, ghz3):
        with pytest.raises(SloccDegenerate, match="rank 1"):
            slocc_canonical(build_slices(ghz3))


class TestCoefficientMatrix:
    """Test the Kronecker-structured linear system"""

    def test_shape(self):
        slices = build_slices(random_state((2, 3, 4), 4))
        assert coefficient_matrix(slices).shape == (3 * 2 * 4, 2 * 2 + 4 * 4)

    def test_identity_pair_is_always_a_solution(self):
        slices = build_slices(random_state((2, 2, 3), 5))
        c = coefficient_matrix(slices)
        identity_pair = np.concatenate([np.eye(2).reshape(-1), np.eye(3).reshape(-1)])
        assert np.linalg.norm(c @ identity_pair) < 1e-12

    def test_rank_plus_nullity(self):
        slices = build_slices(random_state((2, 3, 3), 6))
        assert coefficient_rank(slices) + coefficient_nullity(slices) == 4 + 9

    def test_nullity_is_slocc_invariant(self):
        s = random_state((2, 2, 2), 7)
        transformed = slocc_transform(s, random_local_invertibles(s.dims, 8))
        assert coefficient_nullity(build_slices(s)) == coefficient_nullity(build_slices(transformed))

    def test_ghz_nullity_matches_geometric(self, ghz3, pairs_structure):
        geometric = dqls_subspace(ghz3, pairs_structure).dim_h0
        assert coefficient_nullity(build_slices(ghz3)) == geometric


class TestNoGoAndDeterminant:
    """Test the no-go dimension and the determinant test"""

    def test_nogo_check(self):
        assert nogo_check((2, 2, 4)) == (True, 4)
        assert nogo_check((2, 2, 3)) == (False, None)

    def test_nogo_dimension_is_d_a_squared(self, nogo_dims):
        report = analyze(random_state(nogo_dims, 9))
        assert report.nogo_applies
        assert report.dim_h0 == nogo_dims[0] ** 2
        assert report.dim_h0_nogo == nogo_dims[0] ** 2

    def test_determinant_positive_for_dqls_state(self):
        assert determinant_test(random_state((2, 2, 3), 10)) > 1e-8

    def test_determinant_vanishes_for_non_dqls_state(self):
        assert determinant_test(random_state((2, 2, 2), 11)) < 1e-8

    def test_determinant_zero_when_generators_outnumber_amplitudes(self):
        assert determinant_test(random_state((4, 3, 11), 12)) == 0.0

    def test_determinant_precondition(self):
        with pytest.raises(PreconditionFailed, match="d_a\\*d_b > d_c"):
            determinant_test(random_state((2, 2, 4), 13))


class TestAnalyze:
    """Test the full tripartite pipeline"""

    def test_central_qubit_dimension_law(self, central_qubit_case):
        dims, expected = central_qubit_case
        for seed in range(3):
            report = analyze(random_state(dims, seed))
            assert report.dim_h0 == expected
            assert not report.disagreements()

    def test_generic_dqls_dims_are_dqls(self, generic_dqls_dims):
        report = analyze(random_state(generic_dqls_dims, 14))
        assert report.is_dqls
        assert report.dim_h0_algebraic == report.dim_h0_geometric == 1
        assert report.determinant_value > report.determinant_threshold

    def test_ghz_falls_back_to_raw_slices(self, ghz3):
        report = analyze(ghz3)
        assert not report.slocc_applied
        assert report.dim_h0 == 2
        assert any("SLOCC" in note for note in report.notes)

    def test_swapped_state_reports_orientation(self):
        report = analyze(random_state((3, 2, 2), 15))
        assert report.swapped
        assert report.dims == (2, 2, 3)
        assert report.is_dqls

    def test_geometric_skipped_above_ceiling(self):
        report = analyze(random_state((2, 3, 4), 16), geometric_max_dim=10)
        assert report.dim_h0_geometric is None
        assert report.dim_h0_algebraic == 1

    def test_report_to_dict(self):
        data = analyze(random_state((2, 2, 3), 17)).to_dict()
        assert data['dims'] == [2, 2, 3]
        assert data['d_bar'] == 1
        assert data['predicted']['verdict'] == 'DQLS'
        assert data['disagreements'] == []

    def test_geometric_agrees_with_tripartite_structure(self):
        s = random_state((2, 3, 5), 18)
        report = analyze(s)
        assert report.dim_h0_geometric == dqls_subspace(s, tripartite_structure()).dim_h0


class TestPredict:
    """Test closed-form predictions"""

    @pytest.mark.parametrize("dims,verdict", [
        ((2, 2, 3), Prediction.DQLS),
        ((2, 2, 2), Prediction.NOT_DQLS),
        ((2, 2, 4), Prediction.NOT_DQLS),
        ((2, 3, 5), Prediction.DQLS),
        ((2, 3, 6), Prediction.NOT_DQLS),
        ((3, 3, 3), Prediction.DQLS),
        ((3, 3, 8), Prediction.DQLS),
        ((4, 3, 6), Prediction.DQLS),
        ((4, 3, 10), Prediction.UNKNOWN),
        ((4, 3, 11), Prediction.NOT_DQLS),
        ((5, 3, 14), Prediction.NOT_DQLS),
        ((5, 4, 16), Prediction.DQLS),
        ((5, 4, 19), Prediction.NOT_DQLS),
        ((7, 4, 27), Prediction.NOT_DQLS),
    ])
    def test_verdicts(self, dims, verdict):
        assert predict(dims).verdict is verdict

    def test_central_qubit_predicted_dimension(self):
        assert predict((3, 2, 7)).predicted_dim == 9
        assert predict((3, 2, 3)).predicted_dim == 3

    def test_outer_order_does_not_matter(self):
        assert predict((5, 2, 4)) == predict((4, 2, 5))

    def test_block_reduction_is_proven(self):
        result = predict((2, 3, 5))
        assert not result.conjectural
        assert "block reduction" in result.rule

    def test_exceptional_cell_is_conjectural(self):
        assert predict((4, 3, 11)).conjectural

    def test_nogo_rule_label(self):
        assert predict((3, 3, 9)).rule.startswith("no-go")


class TestCentralQubitSystem:
    """Test the reduced system for a qubit in the middle"""

    @pytest.mark.parametrize("dims", [(3, 2, 4), (3, 2, 5), (4, 2, 5), (4, 2, 6), (4, 2, 7)])
    def test_full_row_rank_for_generic_states(self, dims):
        d_a, _, d_c = dims
        d_bar = d_c - d_a
        for seed in range(20):
            canonical = slocc_canonical(build_slices(random_state(dims, seed)))
            system = central_qubit_system(canonical)
            assert system.shape == (d_bar * d_a + d_a ** 2, d_a ** 2 + d_bar ** 2 + d_bar * d_a)
            assert svd_rank(system) == d_bar * d_a + d_a ** 2, f"seed {seed}"

    @pytest.mark.parametrize("dims", [(3, 2, 4), (3, 2, 5), (4, 2, 7)])
    def test_solution_count_matches_full_system(self, dims):
        d_bar = dims[2] - dims[0]
        for seed in range(5):
            slices = build_slices(random_state(dims, seed))
            system = central_qubit_system(slocc_canonical(slices))
            assert system.shape[1] - svd_rank(system) == d_bar ** 2
            assert coefficient_nullity(slices) == d_bar ** 2

    def test_needs_two_slices(self):
        canonical = slocc_canonical(build_slices(random_state((2, 3, 3), 0)))
        with pytest.raises(PreconditionFailed, match="two slices"):
            central_qubit_system(canonical)

    def test_needs_larger_third_factor(self):
        canonical = slocc_canonical(build_slices(random_state((3, 2, 3), 0)))
        with pytest.raises(PreconditionFailed, match="d_c > d_a"):
            central_qubit_system(canonical)


class TestMonotonicity:
    """Growing the middle factor never destroys stabilizability"""

    @pytest.mark.parametrize("dims", [(2, 2, 3), (3, 2, 4), (2, 3, 5), (3, 3, 8), (4, 3, 6)])
    def test_dqls_survives_larger_middle_factor(self, dims):
        d_a, d_b, d_c = dims
        for seed in range(5):
            assert analyze(random_state(dims, seed), geometric_max_dim=64).is_dqls
            grown = analyze(random_state((d_a, d_b + 1, d_c), seed), geometric_max_dim=64)
            assert grown.is_dqls, f"seed {seed}"


@pytest.mark.slow
class TestTableWindow:
    """Monte Carlo reproduction of selected cells with d_b = 3 and d_b = 4"""

    @pytest.mark.parametrize("dims,expected", [
        ((2, 3, 2), True),
        ((2, 3, 3), True),
        ((2, 3, 4), True),
        ((2, 3, 5), True),
        ((2, 3, 6), False),
        ((3, 3, 8), True),
        ((4, 3, 6), True),
        ((4, 3, 11), False),
        ((5, 3, 14), False),
        ((5, 4, 18), True),
        ((5, 4, 19), False),
        ((6, 4, 23), False),
        ((7, 4, 27), False),
    ])
    def test_cell_sweep(self, dims, expected):
        for seed in range(5):
            report = analyze(random_state(dims, seed), geometric_max_dim=512)
            assert report.is_dqls is expected
            assert not report.disagreements()
