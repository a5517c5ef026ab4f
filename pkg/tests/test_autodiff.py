import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import difga.autodiff as fad
from difga.autodiff import (
    DifferentiationError,
    DualScalar,
    finite_diff_gradient,
    gradient,
    seed_parameters,
    value_and_gradient,
)
from difga.circuits import CircuitSpec, RecoveryParams
from difga.noise import NoiseModel
from difga.training import loss

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
nonzero = finite.filter(lambda x: abs(x) > 1e-3)


def dual(value, tangents):
    return DualScalar(value, np.asarray(tangents, dtype=float))


class TestSeedParameters:
    def test_basis_seeding(self):
        duals = seed_parameters((0.0, 0.0))
        assert [d.value for d in duals] == [0.0, 0.0]
        assert np.array_equal(duals[0].tangents, [1.0, 0.0])
        assert np.array_equal(duals[1].tangents, [0.0, 1.0])

    def test_six_zeros_give_identity_tangent_matrix(self):
        duals = seed_parameters(np.zeros(6))
        tangent_matrix = np.stack([d.tangents for d in duals])
        assert np.array_equal(tangent_matrix, np.eye(6))

    def test_single_parameter(self):
        (d,) = seed_parameters((0.06,))
        assert d.value == 0.06
        assert np.array_equal(d.tangents, [1.0])

    def test_rejects_empty_vector(self):
        with pytest.raises(ValueError, match="empty"):
            seed_parameters(())


class TestDualArithmetic:
    @given(finite, finite, finite, finite)
    def test_product_rule_exact(self, av, at, bv, bt):
        a, b = dual(av, [at]), dual(bv, [bt])
        prod = a * b
        assert prod.tangents[0] == av * bt + bv * at
        assert prod.value == av * bv

    @given(finite, finite, nonzero, finite)
    def test_quotient_rule(self, av, at, bv, bt):
        a, b = dual(av, [at]), dual(bv, [bt])
        quot = a / b
        expect = (at - (av / bv) * bt) / bv
        assert quot.tangents[0] == pytest.approx(expect, rel=1e-12, abs=1e-12)

    @given(finite, finite)
    def test_mixed_float_operations(self, v, t):
        a = dual(v, [t])
        assert (3.0 + a).value == 3.0 + v
        assert (3.0 - a).tangents[0] == -t
        assert (2.0 * a).tangents[0] == 2.0 * t
        assert (-a).value == -v

    @given(st.floats(-1.5, 1.5, allow_nan=False), finite)
    def test_elementary_functions_chain_rule(self, v, t):
        a = dual(v, [t])
        assert fad.sin(a).tangents[0] == pytest.approx(math.cos(v) * t, rel=1e-12, abs=1e-300)
        assert fad.cos(a).tangents[0] == pytest.approx(-math.sin(v) * t, rel=1e-12, abs=1e-300)
        assert fad.sinh(a).tangents[0] == pytest.approx(math.cosh(v) * t, rel=1e-12, abs=1e-300)
        assert fad.cosh(a).tangents[0] == pytest.approx(math.sinh(v) * t, rel=1e-12, abs=1e-300)

    def test_sqrt_and_arccos_derivatives(self):
        a = dual(0.49, [1.0])
        assert fad.sqrt(a).value == 0.7
        assert fad.sqrt(a).tangents[0] == pytest.approx(0.5 / 0.7, rel=1e-14)
        b = dual(0.3, [1.0])
        assert fad.arccos(b).tangents[0] == pytest.approx(-1 / math.sqrt(1 - 0.09), rel=1e-14)

    def test_square_power(self):
        a = dual(3.0, [1.0])
        sq = a**2
        assert sq.value == 9.0 and sq.tangents[0] == 6.0


class TestGradient:
    def test_quadratic(self):
        grad = gradient(lambda t: t[0] * t[0], (3.0,))
        assert np.allclose(grad, [6.0])

    def test_constant_function_gives_zero_vector(self):
        grad = gradient(lambda t: 1.25, (0.1, 0.2, 0.3))
        assert np.array_equal(grad, np.zeros(3))

    def test_loss_gradient_matches_finite_differences_sm(self):
        spec = CircuitSpec(num_ancillas=0, eta=0.55)
        model = NoiseModel(eta=0.55, delta=0.0, samples=1)

        def f(theta):
            return loss(spec, RecoveryParams(tuple(theta)), model, step=0)

        theta = np.zeros(3)
        fwd = gradient(f, theta)
        fd = finite_diff_gradient(f, theta, h=1e-6)
        assert np.allclose(fwd, fd, rtol=1e-6, atol=1e-8)

    def test_gradient_matches_fd_on_frozen_mc_loss(self):
        spec = CircuitSpec(num_ancillas=1, eta=0.55)
        model = NoiseModel(eta=0.55, delta=0.3, samples=8, seed=7, frozen=True)

        def f(theta):
            return loss(spec, RecoveryParams(tuple(theta)), model, step=0)

        theta = np.array([0.1, -0.2, 0.05, 0.0, 0.3, -0.1])
        assert np.allclose(gradient(f, theta), finite_diff_gradient(f, theta, h=1e-6), atol=1e-5)

    def test_gradient_vanishes_at_known_optimum(self):
        spec = CircuitSpec(num_ancillas=1, eta=0.55)
        model = NoiseModel(eta=0.55, delta=0.0, samples=1)
        from difga.circuits import ideal_expectations, build_noisy, signal_expectations

        ix, ip = ideal_expectations(spec)
        nx, npp = signal_expectations(build_noisy(spec, RecoveryParams.zeros(1), (0.0, 0.0)))
        optimum = np.array([0.0, (ix - nx) / 2, (ip - npp) / 2, 0.0, 0.0, 0.0])

        def f(theta):
            return loss(spec, RecoveryParams(tuple(theta)), model, step=0)

        assert np.linalg.norm(gradient(f, optimum)) <= 1e-10

    def test_non_finite_value_reported(self):
        def f(theta):
            return fad.sqrt(theta[1] - 10.0)  # negative argument -> nan

        with pytest.raises(DifferentiationError, match="non-finite function value"):
            gradient(f, (0.0, 1.0))

    def test_non_finite_derivative_names_parameter_slot(self):
        # sqrt has value 0 but an infinite slope at the origin.
        with pytest.raises(DifferentiationError, match="slot 0"):
            gradient(lambda t: fad.sqrt(t[0]), (0.0,))

    def test_value_and_gradient_consistent(self):
        def f(theta):
            return theta[0] * theta[0] + 2.0 * theta[1]

        value, grad = value_and_gradient(f, (3.0, 1.0))
        assert value == 11.0
        assert np.allclose(grad, [6.0, 2.0])


class TestFiniteDifferences:
    def test_quadratic(self):
        grad = finite_diff_gradient(lambda t: t[0] ** 2, (3.0,), h=1e-5)
        assert abs(grad[0] - 6.0) <= 1e-9

    def test_linear_exact_for_any_step(self):
        for h in (1e-8, 1e-3, 0.5):
            grad = finite_diff_gradient(lambda t: 4.0 * t[0] - t[1], (0.3, 0.7), h=h)
            assert np.allclose(grad, [4.0, -1.0], rtol=1e-9)

    def test_rejects_non_positive_step(self):
        with pytest.raises(ValueError, match="positive"):
            finite_diff_gradient(lambda t: t[0], (1.0,), h=0.0)

    def test_non_finite_values_raise(self):
        with pytest.raises(DifferentiationError, match="slot 0"):
            finite_diff_gradient(lambda t: fad.sqrt(t[0]), (0.0,), h=1e-6)
