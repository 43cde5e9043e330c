"""Transfer matrix, Bethe vectors and the Bethe equation solver.

Dense diagonalization of T(lam) is the brute-force oracle for eigenvalues.
"""

import time

import numpy as np
import pytest

from vertex_bethe.bethe import (
    bethe_residual,
    conjecture_congruences,
    parity_measure,
    solve_bethe,
    sum_rule_check,
    t_r_closed_form_fit,
    t_r_tilde_residual,
)
from vertex_bethe.errors import ConvergenceError, DegenerateSolutionError, DimensionError, PreconditionError
from vertex_bethe.sklyanin import ModelParams
from vertex_bethe.transfer import (
    ModelContext,
    bethe_vector_algebraic,
    bethe_vector_coordinate,
    eigenvalue_t,
    eigenvalue_via_q,
    q_automorphy_residuals,
    transfer_matrix,
)

CASES = [(1, 2), (1, 4), (2, 2)]


def _random_lams(p, rng, n):
    return rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(-0.4, 0.4, n) * p.tau.imag


class TestTransferMatrix:
    def test_commuting_family(self):
        ctx = ModelContext(ModelParams.default(1, N=4))
        a, b = transfer_matrix(ctx, 0.13 + 0.05j), transfer_matrix(ctx, -0.31 + 0.02j)
        assert np.linalg.norm(a @ b - b @ a) / np.linalg.norm(a @ b) < 1e-10

    def test_dimension_cap(self):
        with pytest.raises(DimensionError):
            ModelContext(ModelParams.default(1, N=4), dim_cap=8)

    def test_shape(self):
        ctx = ModelContext(ModelParams.default(2, N=2))
        assert transfer_matrix(ctx, 0.1).shape == (9, 9)
        assert ctx.hilbert_dim == 9


@pytest.mark.parametrize("case", CASES, ids=lambda c: f"2l={c[0]},N={c[1]}")
class TestBetheStates:
    def test_equations(self, bethe_states, case):
        _, sol = bethe_states[case]
        assert sol.residual < 1e-10
        assert np.max(np.abs(bethe_residual(sol.params, sol.nu, sol.lambdas))) < 1e-10

    def test_algebraic_equals_coordinate(self, bethe_states, case):
        ctx, sol = bethe_states[case]
        start = time.perf_counter()
        a = bethe_vector_algebraic(ctx, sol.nu, sol.lambdas)
        c = bethe_vector_coordinate(ctx, sol.nu, sol.lambdas)
        assert np.linalg.norm(a - c) / np.linalg.norm(a) < 1e-7
        assert time.perf_counter() - start < 60

    def test_eigenvector(self, bethe_states, case, rng):
        ctx, sol = bethe_states[case]
        psi = bethe_vector_algebraic(ctx, sol.nu, sol.lambdas)
        nrm = np.linalg.norm(psi)
        assert nrm > 1e-8
        for lam in _random_lams(sol.params, rng, 5):
            T = transfer_matrix(ctx, lam)
            t = eigenvalue_t(sol.params, sol.nu, sol.lambdas, lam)
            assert np.linalg.norm(T @ psi - t * psi) / nrm < 1e-7
            assert np.min(np.abs(np.linalg.eigvals(T) - t)) / abs(t) < 1e-7
            assert eigenvalue_via_q(sol.params, sol.nu, sol.lambdas, lam) == pytest.approx(t, rel=1e-9)

    def test_sum_rule(self, bethe_states, case):
        _, sol = bethe_states[case]
        assert sum_rule_check(sol.params, sol.lambdas)[2] < 1e-6
        shifted = [lj + 0.01 + 0.005j for lj in sol.lambdas]
        assert sum_rule_check(sol.params, shifted)[2] > 1e-3

    def test_q_automorphy(self, bethe_states, case):
        _, sol = bethe_states[case]
        assert max(q_automorphy_residuals(sol.params, sol.nu, sol.lambdas, 0.21 + 0.03j)) < 1e-9


class TestBetheOffShell:
    def test_vectors_agree_off_shell(self):
        # the two constructions agree for arbitrary rapidities, not only on solutions
        ctx = ModelContext(ModelParams.default(1, N=4))
        lams = [0.11 + 0.02j, -0.23 + 0.07j]
        a = bethe_vector_algebraic(ctx, 0, lams)
        c = bethe_vector_coordinate(ctx, 0, lams)
        assert np.linalg.norm(a - c) / np.linalg.norm(a) < 1e-7

    def test_off_shell_is_not_eigenvector(self):
        ctx = ModelContext(ModelParams.default(1, N=2))
        lams = [0.17 + 0.03j]
        psi = bethe_vector_algebraic(ctx, 0, lams)
        lam = 0.05 + 0.02j
        T = transfer_matrix(ctx, lam)
        t = eigenvalue_t(ctx.params, 0, lams, lam)
        assert np.linalg.norm(T @ psi - t * psi) / np.linalg.norm(psi) > 1e-4


class TestKnownSolutions:
    def test_two_sites_spin_half(self, bethe_states):
        _, sol = bethe_states[(1, 2)]
        assert abs(sol.lambdas[0]) < 1e-10
        assert sum_rule_check(sol.params, sol.lambdas)[:2] == (0, 0)

    def test_four_sites_symmetric(self, bethe_states):
        _, sol = bethe_states[(1, 4)]
        a, b = sol.lambdas
        assert abs(a + b) < 1e-9

    def test_t_r_closed_form(self, bethe_states, rng):
        _, sol = bethe_states[(1, 2)]
        grid = _random_lams(sol.params, rng, 16)
        _, _, dev = t_r_closed_form_fit(sol.params, sol.nu, sol.lambdas, grid)
        assert dev < 1e-6

    def test_t_r_tilde(self, bethe_states):
        _, sol = bethe_states[(1, 2)]
        assert t_r_tilde_residual(sol.params, sol.nu, sol.lambdas, 0.12 + 0.04j) < 1e-8

    @pytest.mark.parametrize("case,expected", [((1, 2), False), ((1, 4), True), ((2, 2), True)])
    def test_parity_congruences(self, bethe_states, case, expected):
        ctx, sol = bethe_states[case]
        psi = bethe_vector_algebraic(ctx, sol.nu, sol.lambdas)
        rep = conjecture_congruences(sol.params, sol.nu, sol.lambdas, parity_measure(ctx, psi))
        assert bool(rep.congruence_1) is expected


class TestSolverFailures:
    def test_not_converging(self):
        p = ModelParams.default(1, N=4)
        with pytest.raises(ConvergenceError) as info:
            solve_bethe(p, init=[0.25 + 0.25j, -0.25 + 0.25j], max_iter=3)
        assert len(info.value.trace) >= 3

    def test_coinciding_roots(self):
        p = ModelParams.default(1, N=4)
        with pytest.raises((DegenerateSolutionError, ConvergenceError)) as info:
            solve_bethe(p, init=[0.2, 0.3])
        assert info.value.trace

    def test_wrong_root_count(self):
        with pytest.raises(PreconditionError):
            solve_bethe(ModelParams.default(1, N=4), init=[0.1])

    def test_unknown_init(self):
        with pytest.raises(PreconditionError):
            solve_bethe(ModelParams.default(1, N=2), init="bogus")

    def test_random_init_is_seeded(self):
        p = ModelParams.default(1, N=2)
        a = solve_bethe(p, init="random", seed=3)
        b = solve_bethe(p, init="random", seed=3)
        assert a.lambdas == b.lambdas
