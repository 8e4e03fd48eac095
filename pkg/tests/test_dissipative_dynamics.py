"""
Test Dissipative Dynamics
Generators, certificates, integration and the approximate GHZ experiment
"""

import numpy as np
import pytest
import scipy.linalg

import dissipative_dynamics
from dissipative_dynamics import (
    IntegrationUnstable, LindbladTerm, Liouvillian, NotDQLSTarget, RootMode, build_stabilizer,
    certify, dissipator, evolve, fidelity_bound, gauge_transform, practical_stabilization_experiment,
    principal_log_hamiltonian, rk4_propagator, standard_form_check, unitary_power
)
from linalg_core import DimensionMismatch, PreconditionFailed, TooLarge, random_unitary, vec
from locality import Neighborhood
from quantum_state import DensityMatrix, PureState, product_state


@pytest.fixture
def amplitude_damping():
    """Single-qubit decay |1> -> |0>"""
    lowering = np.array([[0.0, 1.0], [0.0, 0.0]])
    return Liouvillian.assemble((2,), [LindbladTerm(Neighborhood((1,)), lowering)])


class TestLiouvillian:
    """Test superoperator assembly"""

    def test_dissipator_is_trace_preserving(self, rng):
        l_op = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert np.linalg.norm(vec(np.eye(3)).conj() @ dissipator(l_op)) < 1e-12

    def test_apply_matches_lindblad_formula(self, amplitude_damping):
        rho = np.array([[0.25, 0.1], [0.1, 0.75]])
        lowering = amplitude_damping.lindblad_terms[0].operator
        expected = (lowering @ rho @ lowering.conj().T
                    - 0.5 * (lowering.conj().T @ lowering @ rho + rho @ lowering.conj().T @ lowering))
        assert np.allclose(amplitude_damping.apply(rho), expected)

    def test_hamiltonian_part(self):
        z = np.diag([1.0, -1.0])
        l = Liouvillian.assemble((2,), [], hamiltonian=z)
        rho = np.array([[0.5, 0.5], [0.5, 0.5]])
        assert np.allclose(l.apply(rho), -1j * (z @ rho - rho @ z))

    def test_hamiltonian_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Liouvillian.assemble((2, 2), [], hamiltonian=np.eye(2))

    def test_superoperator_ceiling(self):
        with pytest.raises(TooLarge):
            Liouvillian.assemble((2, 2, 2), [], max_dim=4)


class TestCertificate:
    """Test the spectral stability certificate"""

    def test_amplitude_damping_stabilizes_ground_state(self, amplitude_damping):
        cert = certify(amplitude_damping, product_state((2,), [0]))
        assert cert.kernel_dim == 1
        assert cert.spectral_gap == pytest.approx(0.5)
        assert cert.steady_state_fidelity == pytest.approx(1.0)
        assert cert.passes

    def test_wrong_target_fails(self, amplitude_damping):
        cert = certify(amplitude_damping, product_state((2,), [1]))
        assert cert.steady_state_fidelity == pytest.approx(0.0, abs=1e-10)
        assert not cert.passes

    def test_dephasing_has_degenerate_kernel(self):
        l = Liouvillian.assemble((2,), [LindbladTerm(Neighborhood((1,)), np.diag([1.0, -1.0]))])
        cert = certify(l, product_state((2,), [0]))
        assert cert.kernel_dim == 2
        assert not cert.zero_eig_nondegenerate
        assert not cert.passes

    def test_to_dict_reports_passes(self, amplitude_damping):
        assert certify(amplitude_damping, product_state((2,), [0])).to_dict()['passes'] is True


class TestStabilizer:
    """Test quasi-local stabilizer construction"""

    def test_random_dqls_state_is_stabilized(self, make_random_state, pairs_structure):
        s = make_random_state((2, 2, 3), 0)
        l = build_stabilizer(s, pairs_structure, seed=1)
        assert l.certificate.passes
        assert l.trace_preservation_residual() < 1e-10
        assert standard_form_check(l, s)

    def test_noise_operators_stay_local(self, make_random_state, pairs_structure):
        s = make_random_state((2, 2, 2), 2)
        l = build_stabilizer(s, pairs_structure, seed=3)
        for term in l.lindblad_terms:
            assert list(term.neighborhood.members) in pairs_structure.as_lists()
            assert term.operator.shape == (4, 4)

    def test_dicke_is_stabilized(self, dicke42, triples_structure):
        l = build_stabilizer(dicke42, triples_structure, seed=0)
        assert l.certificate.steady_state_fidelity == pytest.approx(1.0, abs=1e-8)

    def test_ghz_is_rejected(self, ghz3, pairs_structure):
        with pytest.raises(NotDQLSTarget, match="2-dimensional"):
            build_stabilizer(ghz3, pairs_structure, seed=0)

    def test_ghz_generator_without_dqls_requirement(self, ghz3, pairs_structure):
        l = build_stabilizer(ghz3, pairs_structure, seed=0, require_dqls=False)
        assert l.certificate is None
        assert certify(l, ghz3).kernel_dim > 1

    def test_stabilizer_ceiling(self, pairs_structure, make_random_state):
        with pytest.raises(TooLarge):
            build_stabilizer(make_random_state((2, 2, 3), 0), pairs_structure, max_dim=8)

    def test_gauge_transform_leaves_generator_unchanged(self, make_random_state, pairs_structure):
        s = make_random_state((2, 2, 2), 4)
        l = build_stabilizer(s, pairs_structure, seed=5)
        shifts = [0.3 - 0.2j] * len(l.lindblad_terms)
        shifted = gauge_transform(l, shifts)
        assert np.allclose(shifted.superop, l.superop, atol=1e-10)
        assert not standard_form_check(shifted, s)

    def test_gauge_transform_shift_count(self, amplitude_damping):
        with pytest.raises(DimensionMismatch):
            gauge_transform(amplitude_damping, [1.0, 2.0])


class TestIntegration:
    """Test RK4 integration of the master equation"""

    def test_rk4_propagator_approximates_exponential(self, amplitude_damping):
        exact = scipy.linalg.expm(0.01 * amplitude_damping.superop)
        assert np.allclose(rk4_propagator(amplitude_damping.superop, 0.01), exact, atol=1e-10)

    def test_decay_converges_to_ground_state(self, amplitude_damping):
        rho0 = DensityMatrix.from_pure(product_state((2,), [1]))
        trajectory = evolve(amplitude_damping, rho0, 20.0, 0.1, target=product_state((2,), [0]))
        assert trajectory.points[0].fidelity == pytest.approx(0.0)
        assert trajectory.final_fidelity == pytest.approx(1 - np.exp(-20.0), abs=1e-6)
        assert trajectory.max_trace_drift < 1e-10

    def test_fidelity_follows_exponential_decay(self, amplitude_damping):
        rho0 = DensityMatrix.from_pure(product_state((2,), [1]))
        trajectory = evolve(amplitude_damping, rho0, 1.0, 0.1, target=product_state((2,), [0]))
        for point in trajectory.points:
            assert point.fidelity == pytest.approx(1 - np.exp(-point.t), abs=1e-6)

    def test_record_every_thins_samples(self, amplitude_damping):
        rho0 = DensityMatrix.maximally_mixed((2,))
        trajectory = evolve(amplitude_damping, rho0, 1.0, 0.1, target=product_state((2,), [0]), record_every=5)
        assert [round(p.t, 6) for p in trajectory.points] == [0.0, 0.5, 1.0]
        assert len(trajectory.to_rows()[0]) == 4

    def test_stabilizer_drives_mixed_state_toward_target(self, make_random_state, pairs_structure):
        s = make_random_state((2, 2, 2), 6)
        l = build_stabilizer(s, pairs_structure, seed=7)
        trajectory = evolve(l, DensityMatrix.maximally_mixed(s.dims), 10.0, 0.05)
        assert trajectory.final_fidelity > trajectory.points[0].fidelity
        assert min(p.min_eigenvalue for p in trajectory.points) > -1e-8

    def test_missing_target_raises_error(self, amplitude_damping):
        with pytest.raises(PreconditionFailed, match="target"):
            evolve(amplitude_damping, DensityMatrix.maximally_mixed((2,)), 1.0, 0.1)

    def test_bad_step_raises_error(self, amplitude_damping):
        with pytest.raises(PreconditionFailed, match="dt > 0"):
            evolve(amplitude_damping, DensityMatrix.maximally_mixed((2,)), 1.0, 0.0)

    def test_dimension_mismatch(self, amplitude_damping):
        with pytest.raises(DimensionMismatch):
            evolve(amplitude_damping, DensityMatrix.maximally_mixed((2, 2)), 1.0, 0.1,
                   target=product_state((2,), [0]))

    def test_non_trace_preserving_generator_is_flagged(self):
        l = Liouvillian(dims=(2,), superop=-np.eye(4, dtype=np.complex128), lindblad_terms=[])
        with pytest.raises(IntegrationUnstable, match="Trace drifted"):
            evolve(l, DensityMatrix.maximally_mixed((2,)), 1.0, 0.1, target=product_state((2,), [0]))


class TestApproximateGhz:
    """Test the perturbed GHZ stabilization experiment"""

    def test_fidelity_bound_value(self):
        assert fidelity_bound(0.1, 1.0) == pytest.approx(64 / 81)

    def test_fidelity_bound_undefined_past_half(self):
        assert fidelity_bound(0.3, 2.0) is None

    def test_principal_log_recovers_unitary(self):
        u = random_unitary(4, 0)
        h = principal_log_hamiltonian(u)
        assert np.allclose(h, h.conj().T)
        assert np.allclose(scipy.linalg.expm(1j * h), u, atol=1e-10)
        assert np.linalg.eigvalsh(h).min() >= -1e-10

    def test_zero_epsilon_keeps_ghz(self):
        report = practical_stabilization_experiment(0.0, seed=0)
        assert report.fidelity == pytest.approx(1.0)
        assert not report.target_was_dqls
        assert report.dim_h0 == 2

    def test_small_rotation_is_dqls_and_close(self):
        report = practical_stabilization_experiment(0.01, seed=1)
        assert report.target_was_dqls
        assert report.bound is not None
        assert report.bound_satisfied
        assert report.fidelity > 0.9

    def test_integer_root_mode(self):
        report = practical_stabilization_experiment(0.03, seed=2, mode=RootMode.INTEGER_ROOT)
        assert report.effective_epsilon == pytest.approx(1 / 34)
        assert report.to_dict()['mode'] == 'integer-root'

    def test_fractional_power_is_a_root(self):
        u = random_unitary(4, 3)
        root = unitary_power(u, 1 / 5)
        assert np.allclose(np.linalg.matrix_power(root, 5), u, atol=1e-10)
        assert np.allclose(unitary_power(u, 1), u, atol=1e-10)

    def test_integer_root_applies_the_positive_root(self, mocker):
        spy = mocker.spy(dissipative_dynamics, 'unitary_power')
        practical_stabilization_experiment(0.03, seed=2, mode=RootMode.INTEGER_ROOT)
        u, exponent = spy.call_args.args
        assert exponent == pytest.approx(1 / 34)
        assert np.allclose(np.linalg.matrix_power(spy.spy_return, 34), u, atol=1e-9)

    def test_inapplicable_bound_is_not_reported_as_satisfied(self):
        report = practical_stabilization_experiment(0.2, seed=0)
        assert report.effective_epsilon * report.h_norm >= 0.5
        assert report.bound is None
        assert report.bound_satisfied is None
        assert report.to_dict()['bound_satisfied'] is None

    def test_epsilon_out_of_range(self):
        with pytest.raises(PreconditionFailed, match="epsilon"):
            practical_stabilization_experiment(0.5, seed=0)


@pytest.mark.slow
class TestBatches:
    """Seeded batches over many draws"""

    def test_stabilizer_batch(self, make_random_state, pairs_structure):
        for seed in range(10):
            s = make_random_state((2, 2, 3), seed)
            l = build_stabilizer(s, pairs_structure, seed=seed)
            assert l.certificate.passes

    def test_epsilon_batch(self):
        for seed in range(50):
            report = practical_stabilization_experiment(0.01, seed=seed)
            assert report.target_was_dqls
            assert report.bound_satisfied

    def test_stabilized_evolution_batch(self, make_random_state, pairs_structure):
        dims = (2, 2, 3)
        for seed in range(10):
            s = make_random_state(dims, seed)
            l = build_stabilizer(s, pairs_structure, seed=seed, max_resamples=10)
            assert l.certificate.passes, f"seed {seed}"
            t_final = 20 / l.certificate.spectral_gap
            trajectory = evolve(l, DensityMatrix.maximally_mixed(dims), t_final, t_final / 200)
            assert trajectory.final_fidelity > 1 - 1e-6, f"seed {seed}"
            assert trajectory.max_trace_drift < 1e-8

    def test_random_initial_states_converge(self, make_random_state, pairs_structure):
        dims = (2, 2, 3)
        s = make_random_state(dims, 0)
        l = build_stabilizer(s, pairs_structure, seed=0)
        t_final = 20 / l.certificate.spectral_gap
        rng = np.random.default_rng(5)
        for _ in range(5):
            g = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
            rho = g @ g.conj().T
            trajectory = evolve(l, DensityMatrix(dims, rho / np.trace(rho).real), t_final, t_final / 200)
            assert trajectory.final_fidelity > 1 - 1e-6
            assert trajectory.max_trace_drift < 1e-8
