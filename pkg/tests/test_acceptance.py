"""Acceptance criteria, one test each, at the contract tolerances.

Each test records its measured numbers with ``record_property``; conftest.py
prints one ``CRITERION n ...: PASS/FAIL`` line per test at the end of the run.
"""

import time

import numpy as np

from vertex_bethe import thermo as th
from vertex_bethe.bethe import solve_bethe, sum_rule_check, t_r_closed_form_fit
from vertex_bethe.cli import main
from vertex_bethe.elliptic import phi, phi_fourier, positivity_kernel, psi, psi_fourier, q_gamma_identity_residual
from vertex_bethe.sklyanin import (
    ModelParams,
    build_basis,
    pauli_residual,
    rll_residual,
    sklyanin_residuals,
    spin_rep,
)
from vertex_bethe.sos import DEFAULT_GAUGE, admissible, vertex_face_residuals
from vertex_bethe.transfer import (
    ModelContext,
    bethe_vector_algebraic,
    bethe_vector_coordinate,
    eigenvalue_t,
    transfer_matrix,
)

BETHE_CASES = [(1, 2), (1, 4), (2, 2)]  # (2l, N); M = N l is 1, 2, 2
SEED = 20240601


def _rep(two_ell):
    p = ModelParams.default(two_ell)
    basis = build_basis(two_ell, p.tau)
    return p, basis, spin_rep(p, basis)


def _spectral(p, rng, n):
    return rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(-0.4, 0.4, n) * p.tau.imag


def _fmt(x):
    return f"{x:.3g}"


def test_criterion_01_rll(record_property):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for two_ell in (1, 2):
        p, _, S = _rep(two_ell)
        for _ in range(20):
            lam, mu = _spectral(p, rng, 2)
            worst = max(worst, rll_residual(p, S, lam, mu))
    elapsed = time.perf_counter() - start
    record_property("residual", f"{_fmt(worst)} < 1e-9")
    record_property("runtime_s", f"{elapsed:.2f} < 5")
    assert worst < 1e-9 and elapsed < 5


def test_criterion_02_comm_rel(record_property):
    worst = max(max(sklyanin_residuals(S, p.eta, p.tau).values()) for p, _, S in map(_rep, (1, 2, 3)))
    record_property("residual", f"{_fmt(worst)} < 1e-9")
    assert worst < 1e-9


def test_criterion_03_pauli(record_property):
    p, _, S = _rep(1)
    res = pauli_residual(S, p.eta, p.tau)
    record_property("residual", f"{_fmt(res)} < 1e-9")
    assert res < 1e-9


def test_criterion_04_vertex_face(record_property):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for two_ell in (1, 2):
        p, basis, S = _rep(two_ell)
        diffs = [d for d in range(-two_ell, two_ell + 1) if admissible(p, d, 0)]
        for _ in range(10):
            k = int(rng.integers(-p.r, p.r))
            kp = k - int(rng.choice(diffs))
            for lam in _spectral(p, rng, 5):
                worst = max(worst, max(vertex_face_residuals(p, basis, S, DEFAULT_GAUGE, k, kp, lam).values()))
    record_property("residual", f"{_fmt(worst)} < 1e-9")
    assert worst < 1e-9


def _solutions():
    for two_ell, N in BETHE_CASES:
        p = ModelParams.default(two_ell, N=N)
        yield ModelContext(p), solve_bethe(p)


def test_criterion_05_bethe_vectors(record_property):
    start = time.perf_counter()
    worst = 0.0
    for ctx, sol in _solutions():
        a = bethe_vector_algebraic(ctx, sol.nu, sol.lambdas)
        c = bethe_vector_coordinate(ctx, sol.nu, sol.lambdas)
        worst = max(worst, np.linalg.norm(a - c) / np.linalg.norm(a))
    elapsed = time.perf_counter() - start
    record_property("residual", f"{_fmt(worst)} < 1e-7")
    record_property("runtime_s", f"{elapsed:.2f} < 60")
    assert worst < 1e-7 and elapsed < 60


def test_criterion_06_eigenvectors(record_property):
    rng = np.random.default_rng(SEED)
    vec, val = 0.0, 0.0
    for ctx, sol in _solutions():
        psi_ = bethe_vector_algebraic(ctx, sol.nu, sol.lambdas)
        nrm = np.linalg.norm(psi_)
        for lam in _spectral(ctx.params, rng, 5):
            T = transfer_matrix(ctx, lam)
            t = eigenvalue_t(ctx.params, sol.nu, sol.lambdas, lam)
            vec = max(vec, np.linalg.norm(T @ psi_ - t * psi_) / nrm)
            val = max(val, np.min(np.abs(np.linalg.eigvals(T) - t)) / abs(t))
    record_property("vector", f"{_fmt(vec)} < 1e-7")
    record_property("eigenvalue", f"{_fmt(val)} < 1e-7")
    assert vec < 1e-7 and val < 1e-7


def test_criterion_07_sum_rule(record_property):
    worst, control = 0.0, np.inf
    for ctx, sol in _solutions():
        worst = max(worst, sum_rule_check(ctx.params, sol.lambdas)[2])
        shifted = [z + 0.01 + 0.005j for z in sol.lambdas]
        control = min(control, sum_rule_check(ctx.params, shifted)[2])
    record_property("deviation", f"{_fmt(worst)} < 1e-6")
    record_property("control", f"{_fmt(control)} > 1e-3")
    assert worst < 1e-6 and control > 1e-3


def test_criterion_08_t_r_closed_form(record_property):
    p = ModelParams.default(1, N=2)
    sol = solve_bethe(p)
    grid = _spectral(p, np.random.default_rng(SEED), 16)
    _, _, dev = t_r_closed_form_fit(p, sol.nu, sol.lambdas, grid)
    record_property("deviation", f"{_fmt(dev)} < 1e-6")
    assert dev < 1e-6


def test_criterion_09_fourier_identities(record_property):
    x = np.linspace(-0.5, 0.5, 101)
    series = max(
        max(np.max(np.abs(phi(x, mu, t) - phi_fourier(x, mu, t))), np.max(np.abs(psi(x, mu, t) - psi_fourier(x, mu, t))))
        for mu in (0.05, 1 / 6, 0.25, 1 / 3, 0.45)
        for t in (1.0, 2.0, 3.5)
    )
    kernel_min = min(
        np.min(positivity_kernel(a, b, x)) for a, b in [(0.1, 1.0), (0.5, 1.0), (0.95, 1.0), (1.0, 3.0), (2.0, 2.5)]
    )
    qgamma = max(
        q_gamma_identity_residual(*args)
        for args in [(0.3, 0.9, 0.5, 0.7, 1.3, 0.4), (0.25, 1.1, 0.6, 0.75, 0.7, 0.2), (1.0, 2.0, 1.5, 1.5, 2.0, 0.6)]
    )
    record_property("series", f"{_fmt(series)} < 1e-9")
    record_property("kernel_min", f"{_fmt(kernel_min)} > 0")
    record_property("q_gamma", f"{_fmt(qgamma)} < 1e-10")
    assert series < 1e-9 and kernel_min > 0 and qgamma < 1e-10


def test_criterion_10_densities(record_property):
    worst, const_ok = 0.0, True
    for two_ell in (1, 2):
        p = ModelParams.default(two_ell)
        worst = max(worst, th.ground_residual(p, 2048), *th.excitation_residuals(p, 2048).values())
        const_ok &= th.ground_density(p).constant_term == 0.5
    record_property("residual", f"{_fmt(worst)} < 1e-6")
    record_property("rho_constant_is_half", const_ok)
    assert worst < 1e-6 and const_ok


def test_criterion_11_free_energy(record_property):
    worst = 0.0
    for two_ell in (1, 2):
        p = ModelParams.default(two_ell)
        lams = p.eta * np.array([0.2, 0.6, 1.0, 1.4, 1.8])
        worst = max(worst, th.free_energy_spread(p, lams, nodes=2048))
    record_property("spread", f"{_fmt(worst)} < 1e-6")
    assert worst < 1e-6


def test_criterion_12_excited_states(record_property):
    x1, x2 = 0.1, -0.3
    table_dev, resid = 0.0, 0.0
    for two_ell in (1, 2):
        p = ModelParams.default(two_ell)
        for v in th.VARIANTS:
            s = th.solve_excited_state(p, v, x1, x2)
            want = (x1 + x2) / 2 if v.endswith("0") else (x1 + x2 + 1) / 2
            got = s.x_plus if s.kind == "I" else s.x_zero
            nu_want = {"I0": 0, "II0": 0, "II1": 1}.get(v, s.nu)
            table_dev = max(table_dev, abs(s.x_minus - (x1 + x2) / 2), abs(got - want), abs(s.nu - nu_want))
            resid = max(resid, s.residual, th.x_minus_residual(p, s))
    record_property("table", f"{_fmt(table_dev)} < 1e-12")
    record_property("residual", f"{_fmt(resid)} < 1e-7")
    assert table_dev < 1e-12 and resid < 1e-7


def test_criterion_13_s_matrix(record_property):
    xs = np.linspace(-0.5, 0.5, 11)
    series, three, spread = 0.0, 0.0, 0.0
    for two_ell in (1, 2):
        p = ModelParams.default(two_ell)
        l, e = p.ell, p.eta
        series = max(series, *(th.s_series_vs_closed(p, v, xs) for v in th.VARIANTS))
        three = max(three, *(th.sbb_three_way(p, x, mu) for x in (-0.3, 0.2) for mu in (1 - 4 * l * e, 4 * l * e)))
        spread = max(spread, th.s_vs_r_check(p, np.linspace(-0.4, 0.4, 9)))
    record_property("series_vs_closed", f"{_fmt(series)} < 1e-7")
    record_property("three_way", f"{_fmt(three)} < 1e-8")
    record_property("s_vs_r", f"{_fmt(spread)} < 1e-6")
    assert series < 1e-7 and three < 1e-8 and spread < 1e-6


def test_criterion_14_verify_all_runtime(record_property, capsys):
    start = time.perf_counter()
    code = main(["verify", "all"])
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    record_property("exit", code)
    record_property("runtime_s", f"{elapsed:.1f} < 300")
    assert code == 0 and elapsed < 300
