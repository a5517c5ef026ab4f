import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from difga.gaussian import (
    AffineSymplectic,
    GaussianState,
    append_vacuum,
    apply_beamsplitter,
    apply_displacement,
    apply_loss_channel,
    apply_loss_via_env,
    apply_rotation,
    apply_squeezing,
    detach,
    discard_mode,
    entanglement_degradation,
    is_symplectic,
    mean_p,
    mean_x,
    symplectic_eigenvalues,
    symplectic_form,
    vacuum_state,
)
from helpers import random_gaussian_state, random_symplectic_circuit

angles = st.floats(-math.pi, math.pi, allow_nan=False)
squeezes = st.floats(-1.0, 1.0, allow_nan=False)


class TestVacuum:
    @pytest.mark.parametrize("num_modes", [1, 3])
    def test_zero_mean_identity_cov(self, num_modes):
        state = vacuum_state(num_modes)
        assert np.array_equal(state.mean, np.zeros(2 * num_modes))
        assert np.array_equal(state.cov, np.eye(2 * num_modes))

    def test_five_mode_vacuum_is_pure(self):
        nu = symplectic_eigenvalues(vacuum_state(5).cov)
        assert np.allclose(nu, 1.0, atol=1e-12)

    def test_rejects_zero_modes(self):
        with pytest.raises(ValueError):
            vacuum_state(0)


class TestRotation:
    def test_zero_angle_is_bit_identity(self):
        state = apply_displacement(vacuum_state(2), 0, 0.8, -0.3)
        rotated = apply_rotation(state, 0, 0.0)
        assert np.array_equal(rotated.mean, state.mean)
        assert np.array_equal(rotated.cov, state.cov)

    def test_quarter_turn_moves_x_into_p(self):
        state = apply_displacement(vacuum_state(1), 0, 0.8, 0.0)
        rotated = apply_rotation(state, 0, math.pi / 2)
        assert mean_x(rotated, 0) == pytest.approx(0.0, abs=1e-12)
        assert mean_p(rotated, 0) == pytest.approx(1.6, abs=1e-12)

    @given(angles)
    def test_rotation_inverse(self, phi):
        rng = np.random.default_rng(5)
        state = random_gaussian_state(rng, 2, num_ops=6, allow_loss=False)
        back = apply_rotation(apply_rotation(state, 1, phi), 1, -phi)
        assert np.max(np.abs(back.mean - state.mean)) <= 1e-12
        assert np.max(np.abs(back.cov - state.cov)) <= 1e-12

    def test_out_of_range_mode(self):
        with pytest.raises(IndexError):
            apply_rotation(vacuum_state(2), 2, 0.1)


class TestSqueezing:
    def test_zero_magnitude_is_bit_identity(self):
        state = apply_displacement(vacuum_state(1), 0, 0.4, 0.2)
        assert np.array_equal(apply_squeezing(state, 0, 0.0, 0.7).cov, state.cov)
        assert np.array_equal(apply_squeezing(state, 0, 0.0, 0.7).mean, state.mean)

    def test_vacuum_squeeze_diagonal(self):
        state = apply_squeezing(vacuum_state(1), 0, 0.6, 0.0)
        assert state.cov[0, 0] == pytest.approx(math.exp(-1.2), rel=1e-12)
        assert state.cov[1, 1] == pytest.approx(math.exp(1.2), rel=1e-12)
        assert abs(state.cov[0, 1]) <= 1e-15
        assert np.allclose(symplectic_eigenvalues(state.cov), 1.0, atol=1e-12)

    def test_squeezed_vacuum_keeps_zero_mean(self):
        state = apply_squeezing(vacuum_state(1), 0, 0.6, 0.3)
        assert np.array_equal(state.mean, np.zeros(2))

    def test_rejects_non_finite_magnitude(self):
        with pytest.raises(ValueError, match="finite"):
            apply_squeezing(vacuum_state(1), 0, math.inf, 0.0)


class TestDisplacement:
    def test_real_amplitude_displaces_x_by_twice(self):
        state = apply_displacement(vacuum_state(1), 0, 0.8, 0.0)
        assert mean_x(state, 0) == 1.6
        assert mean_p(state, 0) == 0.0
        assert np.array_equal(state.cov, np.eye(2))

    def test_zero_amplitude_is_identity(self):
        state = apply_squeezing(vacuum_state(1), 0, 0.3, 0.1)
        moved = apply_displacement(state, 0, 0.0, 0.0)
        assert np.array_equal(moved.mean, state.mean)

    @given(st.floats(-2, 2, allow_nan=False), st.floats(-2, 2, allow_nan=False))
    def test_displacement_additive_inverse(self, re, im):
        state = random_gaussian_state(np.random.default_rng(8), 1, num_ops=4)
        back = apply_displacement(apply_displacement(state, 0, re, im), 0, -re, -im)
        assert np.max(np.abs(back.mean - state.mean)) <= 1e-12


class TestBeamsplitter:
    def test_zero_angle_is_identity(self):
        state = random_gaussian_state(np.random.default_rng(3), 2, num_ops=5)
        mixed = apply_beamsplitter(state, 0, 1, 0.0, 0.4)
        assert np.max(np.abs(mixed.mean - state.mean)) <= 1e-15
        assert np.max(np.abs(mixed.cov - state.cov)) <= 1e-15

    @given(st.floats(-math.pi, math.pi, allow_nan=False))
    def test_signal_mean_scales_by_cos_theta_with_vacuum_partner(self, phi):
        state = apply_displacement(vacuum_state(2), 0, 0.8, 0.0)
        mixed = apply_beamsplitter(state, 0, 1, 0.7, phi)
        magnitude = math.hypot(float(mean_x(mixed, 0)), float(mean_p(mixed, 0)))
        assert magnitude == pytest.approx(1.6 * math.cos(0.7), rel=1e-12)

    @given(angles, angles)
    def test_matrix_is_symplectic(self, theta, phi):
        op = AffineSymplectic.beamsplitter(2, 0, 1, theta, phi)
        assert is_symplectic(op.matrix, tol=1e-12)

    def test_rejects_equal_modes(self):
        with pytest.raises(ValueError, match="distinct"):
            apply_beamsplitter(vacuum_state(2), 1, 1, 0.3, 0.0)


class TestLoss:
    def test_full_transmission_is_identity(self):
        state = apply_displacement(vacuum_state(2), 0, 0.8, 0.1)
        lossy = apply_loss_via_env(state, 0, 1, 1.0)
        assert np.max(np.abs(lossy.mean - state.mean)) <= 1e-15
        assert np.max(np.abs(lossy.cov - state.cov)) <= 1e-15

    def test_amplitude_scales_by_sqrt_eta(self):
        state = apply_displacement(vacuum_state(2), 0, 0.8, 0.0)
        lossy = apply_loss_via_env(state, 0, 1, 0.55)
        assert mean_x(lossy, 0) == pytest.approx(math.sqrt(0.55) * 1.6, rel=1e-12)

    def test_zero_transmission_replaces_with_vacuum(self):
        state = apply_squeezing(apply_displacement(vacuum_state(2), 0, 0.8, 0.3), 0, 0.5, 0.2)
        lossy = apply_loss_channel(state, 0, 0.0)
        assert mean_x(lossy, 0) == pytest.approx(0.0, abs=1e-15)
        assert mean_p(lossy, 0) == pytest.approx(0.0, abs=1e-15)
        assert np.allclose(lossy.cov[:2, :2], np.eye(2), atol=1e-15)

    def test_loss_channel_fixes_vacuum(self):
        for eta in (0.0, 0.3, 0.7, 1.0):
            out = apply_loss_channel(vacuum_state(1), 0, eta)
            assert np.array_equal(out.mean, np.zeros(2))
            assert np.allclose(out.cov, np.eye(2), atol=1e-15)

    def test_zero_transmission_via_env_swaps_in_vacuum(self):
        state = apply_squeezing(apply_displacement(vacuum_state(2), 0, 0.8, 0.3), 0, 0.5, 0.2)
        lossy = apply_loss_via_env(state, 0, 1, 0.0)
        assert abs(mean_x(lossy, 0)) <= 1e-15 and abs(mean_p(lossy, 0)) <= 1e-15
        assert np.allclose(lossy.cov[:2, :2], np.eye(2), atol=1e-15)

    def test_channel_full_transmission_is_identity(self):
        state = random_gaussian_state(np.random.default_rng(2), 2, num_ops=6)
        out = apply_loss_channel(state, 1, 1.0)
        assert np.array_equal(out.mean, state.mean)
        assert np.array_equal(out.cov, state.cov)

    def test_rejects_out_of_range_eta(self):
        with pytest.raises(ValueError, match="transmissivity"):
            apply_loss_channel(vacuum_state(1), 0, 1.2)
        with pytest.raises(ValueError, match="transmissivity"):
            apply_loss_via_env(vacuum_state(2), 0, 1, -0.1)

    def test_channel_equals_dilation_plus_discard(self):
        rng = np.random.default_rng(123)
        for trial in range(100):
            state = random_gaussian_state(rng, 3)
            eta = float(rng.uniform(0.0, 1.0))
            mode = int(rng.integers(0, 3))
            direct = apply_loss_channel(state, mode, eta)
            dilated = append_vacuum(state)
            dilated = apply_loss_via_env(dilated, mode, 3, eta)
            reduced = discard_mode(dilated, 3)
            assert np.max(np.abs(direct.mean - reduced.mean)) <= 1e-12, trial
            assert np.max(np.abs(direct.cov - reduced.cov)) <= 1e-12, trial


class TestMeans:
    def test_vacuum_means_are_zero(self):
        state = vacuum_state(3)
        assert mean_x(state, 1) == 0.0 and mean_p(state, 2) == 0.0

    def test_displaced_means(self):
        state = apply_displacement(vacuum_state(1), 0, 0.8, 0.0)
        assert (mean_x(state, 0), mean_p(state, 0)) == (1.6, 0.0)

    def test_half_turn_negates_means(self):
        state = apply_displacement(vacuum_state(1), 0, 0.8, 0.25)
        flipped = apply_rotation(state, 0, math.pi)
        assert mean_x(flipped, 0) == pytest.approx(-1.6, rel=1e-12)
        assert mean_p(flipped, 0) == pytest.approx(-0.5, rel=1e-12)

    def test_mode_bounds_checked(self):
        with pytest.raises(IndexError):
            mean_x(vacuum_state(2), 5)


class TestEntanglementDegradation:
    def test_endpoints(self):
        assert entanglement_degradation(1.0) == 0.0
        assert entanglement_degradation(0.0) == 1.0

    def test_intermediate_value(self):
        assert entanglement_degradation(0.55) == pytest.approx((0.45 / 1.55) ** 2, rel=1e-12)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            entanglement_degradation(-0.2)


class TestSymplecticStructure:
    @given(st.integers(0, 10_000))
    def test_random_circuit_matrices_preserve_form(self, seed):
        rng = np.random.default_rng(seed)
        circuit = random_symplectic_circuit(rng, int(rng.integers(1, 5)))
        assert is_symplectic(circuit.matrix, tol=1e-12)

    @given(st.integers(0, 10_000))
    def test_unitary_circuits_on_vacuum_stay_pure(self, seed):
        rng = np.random.default_rng(seed)
        state = random_gaussian_state(rng, int(rng.integers(1, 5)), allow_loss=False)
        assert symplectic_eigenvalues(state.cov).min() >= 1.0 - 1e-9

    def test_affine_map_matches_primitive_action(self):
        rng = np.random.default_rng(17)
        state = random_gaussian_state(rng, 2, num_ops=5)
        op = AffineSymplectic.beamsplitter(2, 0, 1, 0.7, 0.2)
        via_map = op.apply(state)
        via_primitive = apply_beamsplitter(state, 0, 1, 0.7, 0.2)
        assert np.max(np.abs(via_map.mean - via_primitive.mean)) <= 1e-12
        assert np.max(np.abs(via_map.cov - via_primitive.cov)) <= 1e-12

    def test_symplectic_form_shape(self):
        omega = symplectic_form(2)
        assert omega[0, 1] == 1.0 and omega[1, 0] == -1.0 and omega[0, 2] == 0.0


class TestStateValidation:
    def test_random_states_validate(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            random_gaussian_state(rng, 3).validate()

    def test_unphysical_cov_rejected(self):
        bad = GaussianState(1, np.zeros(2), 0.5 * np.eye(2))
        with pytest.raises(ValueError, match="symplectic eigenvalue"):
            bad.validate()

    def test_asymmetric_cov_rejected(self):
        cov = np.eye(2)
        cov[0, 1] = 1e-6
        with pytest.raises(ValueError, match="asymmetry"):
            GaussianState(1, np.zeros(2), cov).validate()

    def test_detach_is_identity_on_float_states(self):
        state = vacuum_state(2)
        assert detach(state) is state
