"""Linear-inversion process reconstruction."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from conftest import random_cptp_chi
from qpt import channels as ch
from qpt import states
from qpt.process_tomography import (
    INPUT_STATE_LABELS,
    ProcessEstimate,
    affine_from_state_images,
    build_beta,
    chi_from_lambda,
    expand_in_state_basis,
    input_basis,
    lambda_from_outputs,
    run_process_tomography,
    state_images_from_outputs,
)
from qpt.state_tomography import AXES, ExpectationRecord

IDENTITY_CHI = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)


def exact_records(chi):
    """Noise-free expectation records for the four canonical inputs."""
    sets = []
    for rho in input_basis():
        out = ch.apply_chi(chi, rho)
        sets.append(
            [
                ExpectationRecord(axis, float(np.trace(sigma @ out).real))
                for axis, sigma in zip(AXES, states.PAULIS[1:])
            ]
        )
    return sets


class TestInputBasis:
    def test_states_and_order(self):
        basis = input_basis()
        assert len(basis) == 4
        expected_bloch = [(0, 0, 1), (0, 0, -1), (1, 0, 0), (0, 1, 0)]
        for rho, bloch in zip(basis, expected_bloch):
            assert states.is_valid_density_matrix(rho)
            np.testing.assert_allclose(states.bloch_from_density(rho), bloch, atol=1e-15)

    def test_read_only(self):
        with pytest.raises(ValueError):
            input_basis()[0][0, 0] = 5.0

    def test_labels_align(self):
        assert len(INPUT_STATE_LABELS) == 4
        assert INPUT_STATE_LABELS[0] == "|0><0|"


class TestExpansion:
    def test_round_trip(self, rng):
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        coeffs = expand_in_state_basis(m)
        rebuilt = sum(c * rho for c, rho in zip(coeffs, input_basis()))
        np.testing.assert_allclose(rebuilt, m, atol=1e-12)

    def test_basis_state_is_unit_vector(self):
        for k, rho in enumerate(input_basis()):
            coeffs = expand_in_state_basis(rho)
            np.testing.assert_allclose(coeffs, np.eye(4)[k], atol=1e-12)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="2x2"):
            expand_in_state_basis(np.eye(3))

    def test_rejects_rank_deficient_basis(self):
        degenerate = [input_basis()[0]] * 4
        with pytest.raises(ValueError, match="rank deficient"):
            expand_in_state_basis(np.eye(2), rho_basis=degenerate)


class TestBeta:
    def test_default_is_cached_and_locked(self):
        beta = build_beta()
        assert build_beta() is beta
        assert not beta.flags.writeable
        assert beta.shape == (16, 16)

    def test_custom_elements_not_cached(self):
        beta = build_beta(operation_elements=states.PAULIS)
        assert beta is not build_beta()

    def test_defining_relation(self, rng):
        # A_m rho_j A_n^dag must equal sum_k beta[(j,k),(m,n)] rho_k.
        beta = build_beta().reshape(4, 4, 4, 4)  # j, k, m, n
        ops = states.OPERATION_ELEMENTS
        basis = input_basis()
        for _ in range(10):
            j, m, n = rng.integers(0, 4, size=3)
            direct = ops[m] @ basis[j] @ ops[n].conj().T
            rebuilt = sum(beta[j, k, m, n] * basis[k] for k in range(4))
            np.testing.assert_allclose(rebuilt, direct, atol=1e-12)

    def test_identity_process_maps_to_identity_lambda(self):
        lam_vec = build_beta() @ IDENTITY_CHI.reshape(16)
        np.testing.assert_allclose(lam_vec.reshape(4, 4), np.eye(4), atol=1e-12)

    def test_rejects_bad_operation_elements(self):
        with pytest.raises(ValueError, match="operation elements"):
            build_beta(operation_elements=[np.eye(2)] * 3)


class TestLambda:
    def test_identity_outputs(self):
        lam = lambda_from_outputs(list(input_basis()))
        np.testing.assert_allclose(lam, np.eye(4), atol=1e-12)

    def test_validates_count(self):
        with pytest.raises(ValueError, match="4 output states"):
            lambda_from_outputs(list(input_basis())[:3])

    def test_validates_entries(self):
        outputs = [np.array(m, copy=True) for m in input_basis()]
        outputs[1] = np.array([[0.5, 0.3], [0.1, 0.5]])  # not Hermitian
        with pytest.raises(ValueError, match="output 1"):
            lambda_from_outputs(outputs)
        outputs[1] = np.eye(2)  # trace 2
        with pytest.raises(ValueError, match="trace"):
            lambda_from_outputs(outputs)


class TestChiFromLambda:
    def test_identity(self):
        chi, anti = chi_from_lambda(np.eye(4))
        np.testing.assert_allclose(chi, IDENTITY_CHI, atol=1e-12)
        assert anti == pytest.approx(0.0, abs=1e-12)

    def test_round_trip_random_channels(self, rng):
        for _ in range(25):
            chi = random_cptp_chi(rng)
            outputs = [ch.apply_chi(chi, rho) for rho in input_basis()]
            recovered, anti = chi_from_lambda(lambda_from_outputs(outputs))
            np.testing.assert_allclose(recovered, chi, atol=1e-10)
            assert anti < 1e-10

    def test_output_is_hermitian(self, rng):
        lam = rng.standard_normal((4, 4))
        chi, anti = chi_from_lambda(lam)
        assert states.hermiticity_defect(chi) < 1e-14
        assert anti >= 0.0

    def test_shape_check(self):
        with pytest.raises(ValueError, match="4x4"):
            chi_from_lambda(np.eye(3))


class TestAffineFromImages:
    def test_identity_process(self):
        images = state_images_from_outputs(list(input_basis()))
        affine = affine_from_state_images(images)
        np.testing.assert_allclose(affine.matrix, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(affine.translation, np.zeros(3), atol=1e-12)

    def test_matches_chi_route(self, rng):
        for _ in range(20):
            chi = random_cptp_chi(rng)
            outputs = [ch.apply_chi(chi, rho) for rho in input_basis()]
            via_states = affine_from_state_images(state_images_from_outputs(outputs))
            via_chi = ch.affine_from_chi(chi)
            np.testing.assert_allclose(via_states.matrix, via_chi.matrix, atol=1e-10)
            np.testing.assert_allclose(via_states.translation, via_chi.translation, atol=1e-10)

    def test_amplitude_damping_translation(self):
        chi = ch.standard_channel("amplitude_damping", gamma=0.4)
        outputs = [ch.apply_chi(chi, rho) for rho in input_basis()]
        affine = affine_from_state_images(state_images_from_outputs(outputs))
        root = math.sqrt(0.6)
        np.testing.assert_allclose(affine.matrix, np.diag([root, root, 0.6]), atol=1e-12)
        np.testing.assert_allclose(affine.translation, [0.0, 0.0, 0.4], atol=1e-12)

    def test_count_checks(self):
        with pytest.raises(ValueError, match="4 output states"):
            state_images_from_outputs([np.eye(2)] * 3)
        with pytest.raises(ValueError, match="4 image states"):
            affine_from_state_images([np.eye(2) / 2.0] * 3)


class TestRunProcessTomography:
    def test_identity_channel(self):
        estimate = run_process_tomography(exact_records(IDENTITY_CHI))
        assert isinstance(estimate, ProcessEstimate)
        np.testing.assert_allclose(estimate.chi, IDENTITY_CHI, atol=1e-12)
        assert estimate.cp_flag and estimate.tp_flag and estimate.physical
        np.testing.assert_allclose(estimate.residuals, np.zeros(4), atol=1e-14)
        assert estimate.anti_hermitian_norm == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(estimate.lambda_matrix, np.eye(4), atol=1e-12)

    def test_dephasing_channel(self):
        chi = ch.standard_channel("dephasing", factor=0.5)
        estimate = run_process_tomography(exact_records(chi))
        np.testing.assert_allclose(estimate.chi, chi, atol=1e-12)
        np.testing.assert_allclose(estimate.affine.matrix, np.diag([0.5, 0.5, 1.0]), atol=1e-12)
        np.testing.assert_allclose(estimate.affine.translation, np.zeros(3), atol=1e-12)

    def test_depolarizing_channel(self):
        chi = ch.standard_channel("depolarizing", p=0.6)
        estimate = run_process_tomography(exact_records(chi))
        np.testing.assert_allclose(estimate.chi, chi, atol=1e-12)
        np.testing.assert_allclose(estimate.affine.matrix, 0.4 * np.eye(3), atol=1e-12)

    def test_random_channels_recovered(self, rng):
        for _ in range(15):
            chi = random_cptp_chi(rng)
            estimate = run_process_tomography(exact_records(chi))
            np.testing.assert_allclose(estimate.chi, chi, atol=1e-9)
            assert estimate.physical
            assert estimate.cp_min_eigenvalue > -1e-9
            assert estimate.tp_deficit < 1e-8

    def test_accepts_record_carrier_objects(self):
        sets = [SimpleNamespace(records=r) for r in exact_records(IDENTITY_CHI)]
        estimate = run_process_tomography(sets)
        np.testing.assert_allclose(estimate.chi, IDENTITY_CHI, atol=1e-12)

    def test_inconsistent_records_flagged_not_fatal(self):
        sets = exact_records(IDENTITY_CHI)
        sets[1] = [
            ExpectationRecord("x", 0.9),
            ExpectationRecord("y", 0.9),
            ExpectationRecord("z", -0.9),
        ]
        estimate = run_process_tomography(sets)
        assert estimate.residuals[1] > 0.0
        assert estimate.residuals[0] == 0.0

    def test_error_tagged_with_input_index(self):
        sets = exact_records(IDENTITY_CHI)
        sets[2] = [ExpectationRecord("x", 0.1), ExpectationRecord("x", 0.2)]
        with pytest.raises(ValueError, match=r"input state 2 \(\|\+><\+\|\): duplicate"):
            run_process_tomography(sets)

    def test_type_error_tagged_too(self):
        sets = exact_records(IDENTITY_CHI)
        sets[3] = [("z", 0.5)]
        with pytest.raises(TypeError, match="input state 3"):
            run_process_tomography(sets)

    def test_wrong_set_count(self):
        with pytest.raises(ValueError, match="4 input states"):
            run_process_tomography(exact_records(IDENTITY_CHI)[:2])
