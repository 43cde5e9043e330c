"""Thermodynamic densities, free energy, excited states, polarization and the S matrix.

The polarization oracle solves its integral equation by a Nystrom method on
Gauss-Legendre nodes, independently of the Fourier construction.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid

from vertex_bethe import thermo as th
from vertex_bethe.elliptic import phi, phi_prime_direct, psi
from vertex_bethe.errors import ConsistencyError, DomainError, PreconditionError
from vertex_bethe.sklyanin import ModelParams

SPINS = [1, 2]
X1, X2 = 0.1, -0.3


@pytest.fixture(scope="module", params=SPINS, ids=lambda k: f"2l={k}")
def params(request):
    return ModelParams.default(request.param)


class TestDensities:
    def test_rho_constant(self, params):
        assert th.ground_density(params).constant_term == 0.5

    def test_rho_generic_matches_closed(self, params):
        x = np.linspace(-0.5, 0.5, 51)
        closed, generic = th.ground_density(params), th.ground_density_generic(params)
        assert generic.constant_term == pytest.approx(0.5, abs=1e-13)
        assert np.max(np.abs(closed(x) - generic(x))) < 1e-12

    def test_rho_equation(self, params):
        assert th.ground_residual(params, 2048) < 1e-6

    def test_excitation_equations(self, params):
        res = th.excitation_residuals(params, 2048)
        assert set(res) == {"sigma", "omega_minus", "omega_plus", "omega_zero"}
        assert max(res.values()) < 1e-6

    def test_constants(self, params):
        l = params.ell
        dens = th.excitation_densities(params)
        assert dens.sigma.constant_term == pytest.approx(-1 / (4 * l), abs=1e-15)
        assert dens.omega_minus.constant_term == pytest.approx(-(2 * l - 1) / (2 * l), abs=1e-15)
        assert dens.omega_plus.constant_term == -1.0
        assert dens.omega_zero.constant_term == 0.0

    def test_signs(self, params):
        x = np.linspace(-0.5, 0.5, 201)
        assert np.min(th.ground_density(params)(x)) > 0
        assert np.min(-th.uniqueness_integrand(params, "plus", x)) > 0
        assert np.min(th.uniqueness_integrand(params, "zero", x)) > 0
        if params.two_ell > 1:
            assert np.max(th.excitation_densities(params).omega_minus(x)) < 0

    def test_spin_half_omega_minus_vanishes(self):
        w = th.excitation_densities(ModelParams.default(1)).omega_minus
        assert np.max(np.abs(w(np.linspace(-0.5, 0.5, 21)))) < 1e-15

    @pytest.mark.parametrize("which", ["plus", "zero"])
    def test_uniqueness_kernel(self, params, which):
        x = np.linspace(-0.5, 0.5, 101)
        diff = th.uniqueness_integrand(params, which, x) - th.uniqueness_kernel_oracle(params, which, x)
        assert np.max(np.abs(diff)) < 1e-10


class TestFourierDensity:
    @given(c0=st.floats(-2, 2), a=st.lists(st.floats(-1, 1), min_size=1, max_size=6))
    @settings(max_examples=30, deadline=None)
    def test_integral_and_antiderivative(self, c0, a):
        f = th.FourierDensity(c0, np.array(a))
        y = np.linspace(-0.5, 0.5, 2001)
        assert trapezoid(f(y), y) == pytest.approx(f.integral(), abs=1e-6)
        h = 1e-6
        assert (f.antiderivative(0.2 + h) - f.antiderivative(0.2 - h)) / (2 * h) == pytest.approx(f(0.2), abs=1e-6)
        assert f.antiderivative(0.0) == 0.0

    def test_delta_part_is_counted_in_integral_only(self):
        f = th.FourierDensity(0.3, np.full(4, -2.0), singular_weight=-1.0)
        assert f.integral() == 0.3
        assert f(0.1) == pytest.approx(1.3)

    def test_odd_density_has_no_antiderivative(self):
        with pytest.raises(PreconditionError):
            th.FourierDensity(0.0, np.zeros(1), sine_coefficients=np.ones(1)).antiderivative(0.1)


class TestFreeEnergy:
    def test_series_vs_quadrature(self, params):
        lams = params.eta * np.array([0.2, 0.6, 1.0, 1.4, 1.8])
        assert th.free_energy_spread(params, lams, nodes=2048) < 1e-6

    def test_constant_offset(self):
        p = ModelParams.default(1)
        diff = th.free_energy(p, 0.1) - th.free_energy_quadrature(p, 0.1)
        assert abs(diff) == pytest.approx(2 * np.log(2), abs=1e-8)

    def test_derivative(self, params):
        lam, h = 0.7 * params.eta, 1e-6
        fd = (th.free_energy(params, lam + h) - th.free_energy(params, lam - h)) / (2 * h)
        assert th.free_energy_derivative(params, lam) == pytest.approx(fd, rel=1e-6, abs=1e-6)

    def test_printed_series_disagrees(self):
        p = ModelParams.default(1)
        lams = p.eta * np.array([0.2, 0.6, 1.0])
        assert th.free_energy_spread(p, lams, form="printed") > 1e-3

    @pytest.mark.parametrize("lam", [-0.01, 0.0, 0.5])
    def test_domain(self, lam):
        with pytest.raises(DomainError):
            th.free_energy(ModelParams.default(1), lam)

    def test_dominance_spin_half(self):
        p = ModelParams.default(1)
        for lam in (0.02, 0.1):
            got = th.dominance_log_ratio(p, lam)
            assert got.real > 0
            assert got.real == pytest.approx(th.dominance_reference_spin_half(p, lam).real, abs=1e-9)

    def test_dominance_equal_magnitudes(self):
        assert abs(th.dominance_log_ratio(ModelParams.default(2), 0.05).real) < 1e-10


def _phi_any(y, mu, t):
    if abs(mu - 0.5) < 1e-15:
        return -2 * np.pi * y
    if mu < 0.5:
        return phi(y, mu, t)
    return -4 * np.pi * y - phi(y, 1 - mu, t)


def nystrom_polarization(p, state, m=240):
    """Solve -2 pi J + int K(x - y) J(y) dy = R on Gauss-Legendre nodes."""
    t = p.t
    y, w = leggauss(m)
    y, w = y / 2, w / 2
    kmus = th.kernel_mus(p)
    diff = (y[:, None] - y[None, :]).ravel()
    K = sum(phi_prime_direct(diff, mu, t).reshape(m, m) for mu in kmus)
    R = np.full(m, -8 * np.pi * p.ell * p.eta * (state.nu + 2 * state.sigma))
    for mu in th.minus_string_mus(p):
        R += _phi_any(y - state.x_minus, mu, t)
    if state.kind == "I":
        for mu in th.plus_string_mus(p):
            R += _phi_any(y - state.representative, mu, t)
    else:
        for mu in th.parity_minus_mus(p):
            if mu > 0:
                R += psi(y - state.representative, mu, t)
        for mu in kmus:
            R += _phi_any(y - 0.5, mu, t)
    for xa in (state.x1, state.x2):
        for mu in kmus:
            R -= _phi_any(y - xa, mu, t)
    return y, np.linalg.solve(-2 * np.pi * np.eye(m) + K * w[None, :], R)


@pytest.mark.parametrize("variant", th.VARIANTS)
class TestExcitedStates:
    def test_table(self, params, variant):
        s = th.solve_excited_state(params, variant, X1, X2)
        assert s.x_minus == (X1 + X2) / 2
        want = (X1 + X2) / 2 if variant.endswith("0") else (X1 + X2 + 1) / 2
        got = s.x_plus if s.kind == "I" else s.x_zero
        assert got == pytest.approx(want, abs=1e-12)
        assert s.residual < 1e-7
        assert th.x_minus_residual(params, s) < 1e-7
        if variant in ("I0", "II0"):
            assert s.nu == 0
        if variant == "II1":
            assert s.nu == 1

    def test_polarization_against_nystrom(self, params, variant):
        s = th.solve_excited_state(params, variant, X1, X2)
        y, J = nystrom_polarization(params, s)
        assert np.max(np.abs(J - th.polarization(params, s)(y))) < 1e-9

    def test_polarization_sum_rule(self, params, variant):
        s = th.solve_excited_state(params, variant, X1, X2)
        checks = th.polarization_checks(params, s, 2048)
        assert checks["sum_rule"] < 1e-9
        if s.kind == "I":
            assert checks["quadrature"] < 1e-9
            assert checks["printed_vs_generic"] < 1e-9


class TestExcitedStateErrors:
    def test_hole_outside(self):
        with pytest.raises(PreconditionError):
            th.solve_excited_state(ModelParams.default(1), "I0", 0.6, 0.0)

    def test_unknown_variant(self):
        with pytest.raises(PreconditionError):
            th.solve_excited_state(ModelParams.default(1), "III", 0.1, 0.0)

    def test_sign_change_is_inconsistent(self, monkeypatch):
        monkeypatch.setattr(th, "uniqueness_integrand", lambda p, which, x: np.sin(2 * np.pi * np.asarray(x)))
        with pytest.raises(ConsistencyError):
            th.solve_excited_state(ModelParams.default(1), "I0", 0.1, 0.0)


class TestSMatrix:
    xs = np.linspace(-0.5, 0.5, 11)

    @pytest.mark.parametrize("variant", th.VARIANTS)
    def test_series_vs_closed(self, params, variant):
        assert th.s_series_vs_closed(params, variant, self.xs) < 1e-7

    @pytest.mark.parametrize("variant", th.VARIANTS)
    def test_unitary_on_real_line(self, params, variant):
        for x in self.xs:
            assert abs(th.s_matrix_closed(params, variant, x)) == pytest.approx(1.0, abs=1e-10)

    def test_permutation_at_zero(self, params):
        vals = [th.s_matrix_eigenvalue(params, v, 0.0) for v in th.VARIANTS]
        assert np.allclose(vals, [-1, 1, 1, 1], atol=1e-12)

    def test_sbb_three_ways(self, params):
        l, e = params.ell, params.eta
        for mu in (1 - 4 * l * e, 4 * l * e):
            assert th.sbb_three_way(params, 0.2, mu) < 1e-8

    def test_proportional_to_r(self, params):
        assert th.s_vs_r_check(params, np.linspace(-0.4, 0.4, 9)) < 1e-6

    def test_printed_series_disagrees(self):
        p = ModelParams.default(2)
        a = th.log_s_series(p, "I0", 0.2, form="printed")
        b = th.log_s_series(p, "I0", 0.2)
        assert abs(a - b) > 1e-3

    @pytest.mark.parametrize("x", [-1.0, 1.0, 1.5])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            th.log_s_series(ModelParams.default(1), "I0", x)
