"""Channel representations: conversions, physicality checks, standard families."""

import math

import numpy as np
import pytest

from conftest import random_bloch_vector, random_cptp_chi, random_density_matrix, random_kraus_set
from qpt import channels as ch
from qpt import states
from qpt.errors import NotCompletelyPositiveError

IDENTITY_CHI = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)

# The transpose map: positive but not completely positive, the standard
# counterexample for the CP check.
TRANSPOSE_CHI = np.diag([0.5, 0.5, -0.5, 0.5]).astype(complex)


class TestApply:
    def test_identity(self, rng):
        rho = random_density_matrix(rng)
        assert np.allclose(ch.apply_chi(IDENTITY_CHI, rho), rho)

    def test_kraus_identity(self, rng):
        rho = random_density_matrix(rng)
        assert np.allclose(ch.apply_kraus([np.eye(2)], rho), rho)

    def test_empty_kraus_rejected(self):
        with pytest.raises(ValueError):
            ch.apply_kraus([], np.eye(2) / 2.0)

    def test_chi_kraus_agree(self, rng):
        for _ in range(20):
            ops = random_kraus_set(rng)
            chi = ch.chi_from_kraus(ops)
            rho = random_density_matrix(rng)
            assert np.allclose(
                ch.apply_chi(chi, rho), ch.apply_kraus(ops, rho), atol=1e-12
            )

    def test_affine_agrees(self, rng):
        for _ in range(20):
            chi = random_cptp_chi(rng)
            affine = ch.affine_from_chi(chi)
            r = random_bloch_vector(rng)
            via_chi = states.bloch_from_density(
                ch.apply_chi(chi, states.density_from_bloch(r))
            )
            assert np.allclose(affine(r), via_chi, atol=1e-9)


class TestOperationExpansion:
    def test_round_trip(self, rng):
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        c = ch.expand_in_operation_basis(m)
        assert np.allclose(ch.operator_from_coefficients(c), m)

    def test_identity_coefficients(self):
        assert ch.expand_in_operation_basis(np.eye(2)) == pytest.approx(
            [1.0, 0.0, 0.0, 0.0]
        )


class TestKrausConversions:
    def test_kraus_round_trip(self, rng):
        for _ in range(20):
            chi = random_cptp_chi(rng)
            again = ch.chi_from_kraus(ch.kraus_from_chi(chi))
            assert np.linalg.norm(again - chi) < 1e-8

    def test_weight_cutoff_drops_null_components(self):
        ops = ch.kraus_from_chi(IDENTITY_CHI)
        assert len(ops) == 1
        assert np.allclose(ops[0], np.eye(2))

    def test_not_cp_rejected(self):
        with pytest.raises(NotCompletelyPositiveError, match="eigenvalue"):
            ch.kraus_from_chi(TRANSPOSE_CHI)

    def test_tiny_negative_clamped(self):
        chi = IDENTITY_CHI.copy()
        chi[1, 1] = -1e-10
        ops = ch.kraus_from_chi(chi)
        assert ch.kraus_completeness_deficit(ops) < 1e-9

    def test_completeness_deficit(self, rng):
        ops = random_kraus_set(rng)
        assert ch.kraus_completeness_deficit(ops) < 1e-12
        assert ch.kraus_completeness_deficit([0.9 * np.eye(2)]) == pytest.approx(
            np.linalg.norm((0.81 - 1.0) * np.eye(2))
        )


class TestPhysicalityChecks:
    def test_standard_channels_physical(self, rng):
        for chi in (
            IDENTITY_CHI,
            ch.standard_channel("dephasing", factor=0.5),
            ch.standard_channel("amplitude_damping", gamma=0.3),
            ch.standard_channel("depolarizing", p=0.5),
        ):
            cp, lowest = ch.is_completely_positive(chi)
            tp, deficit = ch.is_trace_preserving(chi)
            assert cp and tp
            assert lowest > -1e-12 and deficit < 1e-12

    def test_transpose_map_not_cp(self):
        cp, lowest = ch.is_completely_positive(TRANSPOSE_CHI)
        assert not cp
        assert lowest == pytest.approx(-0.5, abs=1e-12)
        tp, _ = ch.is_trace_preserving(TRANSPOSE_CHI)
        assert tp

    def test_scaled_identity_not_tp(self):
        tp, deficit = ch.is_trace_preserving(0.9 * IDENTITY_CHI)
        assert not tp
        assert deficit == pytest.approx(0.1 * math.sqrt(2.0), abs=1e-12)

    def test_ball_containment(self, rng):
        # CPTP maps keep Bloch vectors inside the closed unit ball.
        for _ in range(20):
            chi = random_cptp_chi(rng)
            for _ in range(10):
                r = random_bloch_vector(rng)
                image = states.bloch_from_density(
                    ch.apply_chi(chi, states.density_from_bloch(r))
                )
                assert np.linalg.norm(image) <= 1.0 + 1e-8


class TestChoi:
    def test_identity_choi_is_bell_state(self):
        choi = ch.choi_from_chi(IDENTITY_CHI)
        bell = np.zeros((4, 4), dtype=complex)
        for i in (0, 3):
            for j in (0, 3):
                bell[i, j] = 0.5
        assert np.allclose(choi, bell)

    def test_full_dephasing_choi(self):
        chi = ch.standard_channel("dephasing", factor=0.0)
        choi = ch.choi_from_chi(chi)
        assert np.allclose(choi, np.diag([0.5, 0.0, 0.0, 0.5]))

    def test_full_depolarizing_choi(self):
        chi = ch.standard_channel("depolarizing", p=1.0)
        assert np.allclose(ch.choi_from_chi(chi), np.eye(4) / 4.0)

    def test_round_trip(self, rng):
        for _ in range(20):
            chi = random_cptp_chi(rng)
            assert np.allclose(ch.chi_from_choi(ch.choi_from_chi(chi)), chi, atol=1e-12)

    def test_spectrum_matches_chi(self, rng):
        # The Choi basis is orthonormal, so both matrices share eigenvalues.
        chi = random_cptp_chi(rng)
        assert np.allclose(
            np.linalg.eigvalsh(ch.choi_from_chi(chi)), np.linalg.eigvalsh(chi)
        )

    def test_partial_traces(self, rng):
        for _ in range(10):
            chi = random_cptp_chi(rng)
            choi = ch.choi_from_chi(chi)
            # Trace preservation shows up as a maximally mixed ancilla.
            assert np.allclose(ch.partial_trace_output(choi), np.eye(2) / 2.0, atol=1e-10)
            assert ch.partial_trace_ancilla(choi).trace() == pytest.approx(1.0)

    def test_choi_trace_one(self, rng):
        chi = random_cptp_chi(rng)
        assert ch.choi_from_chi(chi).trace() == pytest.approx(1.0)


class TestAffine:
    def test_amplitude_damping_form(self):
        gamma = 0.3
        affine = ch.affine_from_chi(ch.standard_channel("amplitude_damping", gamma=gamma))
        keep = math.sqrt(1.0 - gamma)
        assert np.allclose(affine.matrix, np.diag([keep, keep, 1.0 - gamma]), atol=1e-12)
        assert np.allclose(affine.translation, [0.0, 0.0, gamma], atol=1e-12)

    def test_dephasing_form(self):
        affine = ch.affine_from_chi(ch.standard_channel("dephasing", factor=0.5))
        assert np.allclose(affine.matrix, np.diag([0.5, 0.5, 1.0]), atol=1e-12)
        assert np.allclose(affine.translation, np.zeros(3), atol=1e-12)

    def test_chi_from_affine_round_trip(self, rng):
        for _ in range(20):
            chi = random_cptp_chi(rng)
            again = ch.chi_from_affine(ch.affine_from_chi(chi))
            assert np.linalg.norm(again - chi) < 1e-9

    def test_contraction_to_chi(self):
        affine = ch.AffineMap(matrix=np.diag([0.5, 0.5, 1.0]), translation=np.zeros(3))
        assert np.allclose(
            ch.chi_from_affine(affine), np.diag([0.75, 0.0, 0.0, 0.25]), atol=1e-12
        )

    def test_result_is_tp_by_construction(self, rng):
        affine = ch.AffineMap(
            matrix=rng.standard_normal((3, 3)), translation=rng.standard_normal(3)
        )
        _, deficit = ch.is_trace_preserving(ch.chi_from_affine(affine))
        assert deficit < 1e-12

    def test_affine_validation(self):
        with pytest.raises(ValueError):
            ch.AffineMap(matrix=np.eye(2), translation=np.zeros(3))
        with pytest.raises(ValueError):
            ch.AffineMap(matrix=np.eye(3), translation=np.zeros(2))


class TestStandardChannels:
    def test_dephasing_chi(self):
        chi = ch.standard_channel("dephasing", factor=0.5)
        assert np.allclose(chi, np.diag([0.75, 0.0, 0.0, 0.25]))

    def test_dephasing_time_form(self):
        chi = ch.standard_channel("dephasing", t=100.0 * math.log(2.0), t2=100.0)
        assert np.allclose(chi, np.diag([0.75, 0.0, 0.0, 0.25]), atol=1e-12)

    def test_depolarizing_chi(self):
        chi = ch.standard_channel("depolarizing", p=0.5)
        assert np.allclose(chi, np.diag([0.625, 0.125, 0.125, 0.125]))

    def test_amplitude_damping_time_form(self):
        gamma = 1.0 - math.exp(-0.5)
        direct = ch.standard_channel("amplitude_damping", gamma=gamma)
        timed = ch.standard_channel("amplitude_damping", t=50.0, t1=100.0)
        assert np.allclose(direct, timed, atol=1e-12)

    def test_full_damping_affine(self):
        affine = ch.affine_from_chi(ch.standard_channel("amplitude_damping", gamma=1.0))
        assert np.allclose(affine.matrix, np.zeros((3, 3)), atol=1e-12)
        assert np.allclose(affine.translation, [0.0, 0.0, 1.0], atol=1e-12)

    def test_x_gate_chi(self):
        chi = ch.standard_channel("unitary_rotation", axis="x", angle=math.pi)
        assert np.allclose(chi, np.diag([0.0, 1.0, 0.0, 0.0]), atol=1e-12)

    def test_half_pi_y_rotation_chi(self):
        # In the {I, X, -iY, Z} expansion this rotation is entirely real:
        # U = (I + (-i sigma_y)) / sqrt(2).
        chi = ch.standard_channel("unitary_rotation", axis="y", angle=math.pi / 2.0)
        expected = np.zeros((4, 4))
        expected[np.ix_([0, 2], [0, 2])] = 0.5
        assert np.allclose(chi, expected, atol=1e-12)

    def test_half_pi_x_rotation_chi(self):
        # The x rotation keeps the imaginary cross terms instead.
        chi = ch.standard_channel("unitary_rotation", axis="x", angle=math.pi / 2.0)
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 0] = expected[1, 1] = 0.5
        expected[0, 1] = 0.5j
        expected[1, 0] = -0.5j
        assert np.allclose(chi, expected, atol=1e-12)

    def test_rotation_unitarity(self, rng):
        u = ch.rotation_unitary(rng.standard_normal(3), 1.234)
        assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ValueError, match="unknown channel"):
            ch.standard_channel("phase_flip")
        with pytest.raises(ValueError, match="t2 must be positive"):
            ch.standard_channel("dephasing", t=1.0, t2=0.0)
        with pytest.raises(ValueError, match="outside"):
            ch.standard_channel("depolarizing", p=1.5)
        with pytest.raises(ValueError, match="outside"):
            ch.standard_channel("amplitude_damping", gamma=-0.1)
        with pytest.raises(ValueError, match="unexpected"):
            ch.standard_channel("dephasing", factor=0.5, t=1.0)
        with pytest.raises(ValueError, match="identity takes no"):
            ch.standard_channel("identity", p=0.1)
        with pytest.raises(ValueError, match="t must be nonnegative"):
            ch.standard_channel("dephasing", t=-1.0, t2=10.0)
        with pytest.raises(ValueError, match="axis"):
            ch.rotation_unitary("w", 1.0)
        with pytest.raises(ValueError, match="nonzero"):
            ch.rotation_unitary([0.0, 0.0, 0.0], 1.0)


class TestComposition:
    def test_dephasing_additive(self):
        a = ch.standard_channel("dephasing", t=20.0, t2=100.0)
        b = ch.standard_channel("dephasing", t=30.0, t2=100.0)
        combined = ch.standard_channel("dephasing", t=50.0, t2=100.0)
        assert np.linalg.norm(ch.compose_chi(a, b) - combined) < 1e-9

    def test_rotations_additive(self):
        a = ch.standard_channel("unitary_rotation", axis="y", angle=0.4)
        b = ch.standard_channel("unitary_rotation", axis="y", angle=0.8)
        combined = ch.standard_channel("unitary_rotation", axis="y", angle=1.2)
        assert np.linalg.norm(ch.compose_chi(a, b) - combined) < 1e-9

    def test_damping_and_dephasing_commute(self):
        deph = ch.standard_channel("dephasing", factor=0.7)
        damp = ch.standard_channel("amplitude_damping", gamma=0.2)
        assert np.allclose(
            ch.compose_chi(deph, damp), ch.compose_chi(damp, deph), atol=1e-12
        )

    def test_composition_matches_application(self, rng):
        first = random_cptp_chi(rng)
        then = random_cptp_chi(rng)
        rho = random_density_matrix(rng)
        composed = ch.compose_chi(first, then)
        assert np.allclose(
            ch.apply_chi(composed, rho),
            ch.apply_chi(then, ch.apply_chi(first, rho)),
            atol=1e-10,
        )
