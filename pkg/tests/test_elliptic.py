"""Theta functions, Phi/Psi and their Fourier series, the positivity kernel, q-analogues.

mpmath is the independent oracle for theta functions and q-Gamma.
"""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertex_bethe.elliptic import (
    double_product,
    phi,
    phi_fourier,
    phi_prime,
    phi_prime_direct,
    positivity_kernel,
    positivity_kernel_poisson,
    psi,
    psi_fourier,
    psi_prime,
    psi_prime_direct,
    q_gamma,
    q_gamma_identity_residual,
    q_gamma_identity_sides,
    q_pochhammer,
    theta,
    theta_log_derivative,
)
from vertex_bethe.errors import DomainError, PreconditionError

mpmath.mp.dps = 30

_JTHETA = {(1, 1): (1, -1), (0, 0): (3, 1), (0, 1): (4, 1), (1, 0): (2, 1)}


def mp_theta_raw(char, z, tau):
    n, sign = _JTHETA[char]
    q = mpmath.exp(1j * mpmath.pi * mpmath.mpmathify(tau))
    return sign * mpmath.jtheta(n, mpmath.pi * mpmath.mpmathify(z), q)


def mp_theta(char, z, tau):
    return complex(mp_theta_raw(char, z, tau))


class TestThetaAgainstMpmath:
    @pytest.mark.parametrize("char", sorted(_JTHETA))
    @pytest.mark.parametrize("t", [0.3, 1.0, 2.0, 10.0])
    def test_values(self, char, t):
        tau = 1j / t
        rng = np.random.default_rng(7)
        for z in rng.uniform(-0.5, 0.5, 4) + 1j * rng.uniform(-0.3, 0.3, 4) / t:
            ref = mp_theta(char, z, tau)
            assert abs(theta(char, z, tau) - ref) <= 1e-12 * max(1.0, abs(ref))

    def test_complex_modulus(self):
        tau = 0.3 + 0.8j
        z = 0.17 - 0.05j
        for char in _JTHETA:
            assert theta(char, z, tau) == pytest.approx(mp_theta(char, z, tau), rel=1e-12)

    def test_vectorized(self):
        z = np.linspace(-0.4, 0.4, 7) + 0.1j
        vals = theta((0, 1), z, 0.5j)
        assert vals.shape == z.shape
        assert vals[3] == pytest.approx(theta((0, 1), z[3], 0.5j))


class TestThetaSymmetries:
    @given(x=st.floats(-1, 1), y=st.floats(-0.2, 0.2))
    @settings(max_examples=40, deadline=None)
    def test_parity_and_period(self, x, y):
        tau = 0.5j
        z = complex(x, y)
        assert abs(theta((1, 1), -z, tau) + theta((1, 1), z, tau)) < 1e-12
        assert abs(theta((0, 0), -z, tau) - theta((0, 0), z, tau)) < 1e-12
        assert abs(theta((1, 1), z + 1, tau) + theta((1, 1), z, tau)) < 1e-12

    @given(x=st.floats(-0.5, 0.5), y=st.floats(-0.5, 0.5))
    @settings(max_examples=40, deadline=None)
    def test_quasi_period(self, x, y):
        tau = 0.5j
        z = complex(x, y * tau.imag)
        lhs = theta((1, 1), z + tau, tau)
        rhs = -np.exp(-1j * np.pi * tau - 2j * np.pi * z) * theta((1, 1), z, tau)
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(rhs))

    def test_log_derivative(self):
        tau, z = 0.5j, 0.13 + 0.07j
        h = mpmath.mpf("1e-12")
        zz = mpmath.mpmathify(z)
        ref = complex(
            (mpmath.log(mp_theta_raw((0, 1), zz + h, tau)) - mpmath.log(mp_theta_raw((0, 1), zz - h, tau))) / (2 * h)
        )
        assert theta_log_derivative((0, 1), z, tau) == pytest.approx(ref, rel=1e-11)


MUS = [0.05, 0.1, 0.25, 1 / 3, 0.45]


class TestPhiPsi:
    x = np.linspace(-0.5, 0.5, 51)

    @pytest.mark.parametrize("mu", MUS)
    @pytest.mark.parametrize("t", [1.0, 2.0, 3.5])
    def test_direct_matches_series(self, mu, t):
        assert np.max(np.abs(phi(self.x, mu, t) - phi_fourier(self.x, mu, t))) < 1e-9
        assert np.max(np.abs(psi(self.x, mu, t) - psi_fourier(self.x, mu, t))) < 1e-9

    @pytest.mark.parametrize("mu", [0.1, 0.3, 0.45])
    def test_derivatives(self, mu):
        t = 2.0
        assert np.max(np.abs(phi_prime_direct(self.x, mu, t) - phi_prime(self.x, mu, t))) < 1e-10
        assert np.max(np.abs(psi_prime_direct(self.x, mu, t) - psi_prime(self.x, mu, t))) < 1e-10

    @pytest.mark.parametrize("mu", [0.6, 0.85])
    def test_derivative_reflection(self, mu):
        # theta_11(z + tau') = -exp(-pi i tau' - 2 pi i z) theta_11(z) with tau' = i t
        # gives Phi'(x; mu) = -4 pi - Phi'(x; 1 - mu)
        t = 2.0
        lhs = phi_prime_direct(self.x, mu, t)
        assert np.max(np.abs(lhs + 4 * np.pi + phi_prime_direct(self.x, 1 - mu, t))) < 1e-10

    def test_derivative_half(self):
        assert np.max(np.abs(phi_prime_direct(self.x, 0.5, 2.0) + 2 * np.pi)) < 1e-10

    def test_phi_is_odd_and_vanishes_at_zero(self):
        assert phi(0.0, 0.2, 2.0) == 0.0
        assert np.allclose(phi(-self.x, 0.2, 2.0), -phi(self.x, 0.2, 2.0), atol=1e-13)

    def test_phi_quasi_period(self):
        # theta_11(z + 1) = -theta_11(z) advances Phi by a fixed multiple of 2 pi
        a = phi(np.array([0.3, 1.3]), 0.2, 2.0)
        assert a[1] - a[0] == pytest.approx(-2 * np.pi, abs=1e-10)

    def test_phi_derivative_by_difference(self):
        h = 1e-5
        x0, mu, t = 0.21, 0.3, 2.0
        fd = (phi(x0 + h, mu, t) - phi(x0 - h, mu, t)) / (2 * h)
        assert fd == pytest.approx(phi_prime_direct(x0, mu, t), rel=1e-8)

    @pytest.mark.parametrize("mu", [0.0, 0.5, -0.1, 0.7])
    def test_domain(self, mu):
        with pytest.raises(DomainError):
            phi(0.1, mu, 2.0)


class TestPositivityKernel:
    @given(a=st.floats(0.05, 5.0), frac=st.floats(0.05, 0.95))
    @settings(max_examples=40, deadline=None)
    def test_positive(self, a, frac):
        b = a / frac
        vals = positivity_kernel(a, b, np.linspace(-0.5, 0.5, 101))
        assert np.min(vals) > 0

    @pytest.mark.parametrize("a,b", [(0.2, 1.0), (0.9, 1.0), (1.5, 4.0), (0.3, 0.5)])
    def test_poisson_form(self, a, b):
        x = np.linspace(-0.5, 0.5, 41)
        assert np.max(np.abs(positivity_kernel(a, b, x) - positivity_kernel_poisson(a, b, x))) < 1e-10

    def test_mean(self):
        x = -0.5 + np.arange(512) / 512
        assert np.mean(positivity_kernel(0.4, 1.0, x)) == pytest.approx(0.4, abs=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            positivity_kernel(1.0, 0.5, 0.0)


class TestQAnalogues:
    @pytest.mark.parametrize("q", [0.1, 0.4, 0.8])
    @pytest.mark.parametrize("x", [0.3, 1.0, 2.5])
    def test_q_gamma(self, q, x):
        assert q_gamma(x, q) == pytest.approx(complex(mpmath.qgamma(x, q)), rel=1e-11)

    def test_q_gamma_at_one(self):
        assert q_gamma(1.0, 0.37) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("q", [0.2, 0.6])
    def test_pochhammer(self, q):
        assert q_pochhammer(0.3, q) == pytest.approx(complex(mpmath.qp(0.3, q)), rel=1e-13)

    def test_double_product_symmetric(self):
        assert double_product(0.4, 0.3, 0.5) == pytest.approx(double_product(0.4, 0.5, 0.3), rel=1e-13)

    def test_double_product_shift(self):
        # (x; q1, q2) / (x q1; q1, q2) = (x; q2)
        x, q1, q2 = 0.35, 0.3, 0.55
        ratio = double_product(x, q1, q2) / double_product(x * q1, q1, q2)
        assert ratio == pytest.approx(q_pochhammer(x, q2), rel=1e-13)

    @pytest.mark.parametrize(
        "args", [(0.3, 0.9, 0.5, 0.7, 1.3, 0.4), (0.25, 1.1, 0.6, 0.75, 0.7, 0.2), (1.0, 2.0, 1.5, 1.5, 2.0, 0.6)]
    )
    def test_product_identity(self, args):
        assert q_gamma_identity_residual(*args) < 1e-10

    def test_identity_needs_balanced_arguments(self):
        with pytest.raises(PreconditionError):
            q_gamma_identity_sides(0.3, 0.9, 0.5, 0.8, 1.0, 0.4)

    @pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
    def test_domain(self, q):
        with pytest.raises(DomainError):
            q_pochhammer(0.3, q)
