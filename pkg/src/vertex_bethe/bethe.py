"""Bethe equations: residuals, a damped Newton solver, the sum rule and t^r.

Roots are kept in the original variable lam (modulus tau = i/t).  The
rescaled variable x = i t lam is used only to build string-hypothesis
initial guesses, where string centres are real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import fsolve

from .elliptic import _unwrapped_phase_change, theta, theta11_log_derivative
from .errors import ConvergenceError, DegenerateSolutionError, PreconditionError
from .sklyanin import ModelParams
from .transfer import (
    ModelContext,
    eigenvalue_regular,
    eigenvalue_t,
    h_function,
    parity_operators_H,
    q_function,
)

DEFAULT_TOL = 1e-12
MAX_ITER = 200


@dataclass
class BetheSolution:
    """A solution (nu, {lam_j}) of the Bethe equations.

    ``branch_ints`` are the integers n_j with
    Log(LHS_j / RHS_j) = 0 reached on the principal branch of each factor,
    i.e. the winding of the logarithmic form at the solution.  String
    quantum numbers used to seed the solve are kept separately in
    ``quantum_numbers``.  ``reductions`` lists (j, m, n) for every shift
    lam_j -> lam_j - m - n tau applied to reach the fundamental domain.
    """

    params: ModelParams
    nu: int
    lambdas: list[complex]
    branch_ints: list[int]
    residual: float
    iterations: int = 0
    quantum_numbers: list[float] | None = None
    reductions: list[tuple[int, int, int]] = field(default_factory=list)
    vector_factor: complex = 1.0


# ---------------------------------------------------------------------------
# residuals


def _th(z, tau):
    return theta((1, 1), z, tau)


def _sides(params: ModelParams, nu: int, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tau, eta, ell, N = params.tau, params.eta, params.ell, params.N
    lhs = (_th(lams + 2 * ell * eta, tau) / _th(lams - 2 * ell * eta, tau)) ** N
    diff = lams[:, None] - lams[None, :]
    num = _th(diff + 2 * eta, tau)
    den = _th(diff - 2 * eta, tau)
    ratio = num / den
    np.fill_diagonal(ratio, 1.0)
    rhs = np.exp(-4j * np.pi * nu * eta) * np.prod(ratio, axis=1)
    return np.atleast_1d(lhs), np.atleast_1d(rhs)


def bethe_residual(params: ModelParams, nu: int, lambdas: Sequence[complex]) -> np.ndarray:
    """LHS_j - RHS_j of the product form of the Bethe equations."""
    lams = np.asarray(lambdas, dtype=complex)
    if lams.size != params.M:
        raise PreconditionError(f"need M = N l = {params.M} roots, got {lams.size}")
    lhs, rhs = _sides(params, nu, lams)
    return lhs - rhs


def log_residual(params: ModelParams, nu: int, lambdas: Sequence[complex]) -> np.ndarray:
    """Principal Log(LHS_j / RHS_j); zero exactly at a solution."""
    lams = np.asarray(lambdas, dtype=complex)
    lhs, rhs = _sides(params, nu, lams)
    return np.log(lhs / rhs)


def log_jacobian(params: ModelParams, lambdas: Sequence[complex]) -> np.ndarray:
    """d Log(LHS_j/RHS_j) / d lam_k, from psi = theta_11'/theta_11."""
    tau, eta, ell, N = params.tau, params.eta, params.ell, params.N
    lams = np.asarray(lambdas, dtype=complex)
    M = lams.size
    psi = lambda z: theta11_log_derivative(z, tau)  # noqa: E731
    diff = lams[:, None] - lams[None, :]
    kern = psi(diff + 2 * eta) - psi(diff - 2 * eta)
    np.fill_diagonal(kern, 0.0)
    jac = kern.copy()
    diag = N * (psi(lams + 2 * ell * eta) - psi(lams - 2 * ell * eta)) - kern.sum(axis=1)
    jac[np.arange(M), np.arange(M)] = diag
    return jac


def winding_integers(params: ModelParams, nu: int, lambdas: Sequence[complex]) -> list[int]:
    """n_j with sum of principal logs of all factors = 2 pi i n_j at a solution."""
    tau, eta, ell, N = params.tau, params.eta, params.ell, params.N
    lams = np.asarray(lambdas, dtype=complex)
    out = []
    for j, lj in enumerate(lams):
        total = N * (np.log(_th(lj + 2 * ell * eta, tau)) - np.log(_th(lj - 2 * ell * eta, tau)))
        total += 4j * np.pi * nu * eta
        for k, lk in enumerate(lams):
            if k != j:
                total -= np.log(_th(lj - lk + 2 * eta, tau)) - np.log(_th(lj - lk - 2 * eta, tau))
        out.append(int(round(total.imag / (2 * np.pi))))
    return out


# ---------------------------------------------------------------------------
# fundamental domain


def reduce_to_fundamental(params: ModelParams, nu: int, lambdas: Sequence[complex]):
    """Shift roots into |Re lam| <= 1/2, |Im lam| <= Im(tau)/2.

    A unit shift of one root multiplies the Bethe vector by (-1)^N; a shift
    lam_j -> lam_j - tau is compensated by nu -> nu - 2.  Returns
    (nu, roots, reductions, vector_factor).
    """
    im_tau = params.tau.imag
    out = []
    reductions = []
    factor = 1.0 + 0j
    for j, lam in enumerate(lambdas):
        lam = complex(lam)
        n = int(math.floor(lam.imag / im_tau + 0.5))
        lam -= n * params.tau
        m = int(math.floor(lam.real + 0.5))
        lam -= m
        nu -= 2 * n
        if m or n:
            reductions.append((j, m, n))
            factor *= (-1) ** ((m * params.N) % 2)
        out.append(lam)
    return nu, out, reductions, factor


# ---------------------------------------------------------------------------
# string initial guesses


def _phase(x: float, mu: float, t: float) -> float:
    """Phi(x; i mu t) by continuity from 0, for any 0 < mu < 1 (initial guesses only)."""
    gap = min(mu, 1 - mu) * t
    return float(2.0 * _unwrapped_phase_change((1, 1), np.atleast_1d(float(x)), 1j * mu * t, 1j * t, gap)[0])


def _ground_state_centres(params: ModelParams, n_c: int, quantum_numbers: Sequence[float]) -> np.ndarray:
    """Solve the real string-centre equations for 2l-strings of parity +."""
    ell, eta, t, N = params.ell, params.eta, params.t, params.N
    alphas = [a - ell + 0.5 for a in range(params.two_ell)]
    own = [2 * (a + ell) * eta for a in alphas]
    kern_a = [2 * m * eta for m in range(1, params.two_ell)]
    kern_b = [2 * (m + 1) * eta for m in range(params.two_ell)]
    Q = np.asarray(quantum_numbers, dtype=float)

    def eqs(x):
        out = np.empty(n_c)
        for j in range(n_c):
            lhs = N * sum(_phase(x[j], mu, t) for mu in own)
            rhs = 2 * np.pi * Q[j]
            for k in range(n_c):
                if k != j:
                    d = x[j] - x[k]
                    rhs += sum(_phase(d, mu, t) for mu in kern_a) + sum(_phase(d, mu, t) for mu in kern_b)
            out[j] = lhs - rhs
        return out

    x0 = (np.arange(n_c) + 0.5) / n_c - 0.5
    x, info, ier, msg = fsolve(eqs, x0, full_output=True, xtol=1e-13)
    if ier != 1:
        raise ConvergenceError(f"string-centre equations did not converge: {msg}", trace=[])
    return x


def ground_state_guess(params: ModelParams, perturb: float = 1e-3, seed: int = 0):
    """Initial roots for the ground state: N/2 strings of length 2l, nu = 0.

    Members are lam = -i x_j / t + 2 eta alpha.  Exact strings make the
    Bethe equations singular for l >= 1, so a small seeded perturbation is
    added.  Returns (roots, quantum numbers).
    """
    if params.N % 2:
        raise PreconditionError("the ground-state configuration needs an even number of sites")
    n_c = params.N // 2
    Q = [(n_c + 1) / 2 - j for j in range(1, n_c + 1)]
    x = _ground_state_centres(params, n_c, Q)
    rng = np.random.default_rng(seed)
    roots = []
    for xj in x:
        for a in range(params.two_ell):
            alpha = a - params.ell + 0.5
            roots.append(-1j * xj / params.t + 2 * params.eta * alpha)
    roots = np.asarray(roots, dtype=complex)
    if params.two_ell > 1:
        roots = roots + perturb * (rng.standard_normal(roots.size) + 1j * rng.standard_normal(roots.size))
    return roots, Q


# ---------------------------------------------------------------------------
# Newton


def solve_bethe(
    params: ModelParams,
    nu: int = 0,
    init: str | Sequence[complex] = "string",
    quantum_numbers: Sequence[float] | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
    seed: int = 0,
) -> BetheSolution:
    """Damped Newton on Log(LHS_j / RHS_j) = 0.

    ``init`` is "string" (ground-state strings), "random" (seeded random
    roots in the fundamental domain) or an explicit list of roots.
    """
    qn = list(quantum_numbers) if quantum_numbers is not None else None
    if isinstance(init, str):
        if init == "string":
            lams, qn_default = ground_state_guess(params, seed=seed)
            qn = qn if qn is not None else qn_default
        elif init == "random":
            rng = np.random.default_rng(seed)
            lams = rng.uniform(-0.4, 0.4, params.M) + 1j * params.tau.imag * rng.uniform(-0.4, 0.4, params.M)
        else:
            raise PreconditionError(f"unknown init strategy {init!r}")
    else:
        lams = np.asarray(init, dtype=complex)
    if lams.size != params.M:
        raise PreconditionError(f"need M = N l = {params.M} roots, got {lams.size}")

    trace = []
    g = log_residual(params, nu, lams)
    norm = float(np.max(np.abs(g)))
    it = 0
    for it in range(1, max_iter + 1):
        trace.append(norm)
        if not np.isfinite(norm):
            raise ConvergenceError("Bethe residual became non-finite", trace)
        if norm < tol:
            break
        jac = log_jacobian(params, lams)
        if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e14:
            raise DegenerateSolutionError(f"singular Bethe Jacobian at iteration {it}", trace)
        step = np.linalg.solve(jac, -g)
        damp = 1.0
        while damp > 1e-6:
            trial = lams + damp * step
            g_trial = log_residual(params, nu, trial)
            n_trial = float(np.max(np.abs(g_trial)))
            if np.isfinite(n_trial) and n_trial < norm:
                break
            damp /= 2
        lams, g, norm = trial, g_trial, n_trial
    else:
        trace.append(norm)
    if not norm < tol:
        raise ConvergenceError(f"Newton did not reach {tol:g} in {max_iter} iterations (last {norm:.3e})", trace)

    nu_red, roots, reductions, factor = reduce_to_fundamental(params, nu, lams)
    try:
        _check_distinct(params, roots)
    except DegenerateSolutionError as exc:
        raise DegenerateSolutionError(str(exc), trace) from None
    residual = float(np.max(np.abs(bethe_residual(params, nu_red, roots))))
    return BetheSolution(
        params=params,
        nu=nu_red,
        lambdas=list(roots),
        branch_ints=winding_integers(params, nu_red, roots),
        residual=residual,
        iterations=it,
        quantum_numbers=qn,
        reductions=reductions,
        vector_factor=factor,
    )


def _check_distinct(params: ModelParams, roots, tol: float = 1e-6) -> None:
    """Coinciding roots (mod 1, tau) give spurious solutions of the product form."""
    tau = params.tau
    for i in range(len(roots)):
        for j in range(i):
            d = roots[i] - roots[j]
            n = round(d.imag / tau.imag)
            d -= n * tau
            d -= round(d.real)
            if abs(d) < tol:
                raise DegenerateSolutionError(f"roots {j} and {i} coincide modulo the period lattice")


# ---------------------------------------------------------------------------
# sum rule


def sum_rule_check(params: ModelParams, lambdas: Sequence[complex]) -> tuple[int, int, float]:
    """Nearest lattice point n0 + n1 tau to 2 sum lam_j and the distance to it."""
    s = 2 * complex(np.sum(np.asarray(lambdas, dtype=complex)))
    tau = params.tau
    n1 = int(round(s.imag / tau.imag))
    n0 = int(round((s - n1 * tau).real))
    return n0, n1, float(abs(s - n0 - n1 * tau))


# ---------------------------------------------------------------------------
# t^r and its closed form


def _t_safe(params: ModelParams, nu: int, lambdas, lam: complex) -> complex:
    if min(abs(lam - lj) for lj in lambdas) < 1e-6 if lambdas else False:
        return eigenvalue_regular(params, nu, lambdas, lam)
    return eigenvalue_t(params, nu, lambdas, lam)


def t_r_determinant(params: ModelParams, nu: int, lambdas, lam: complex) -> complex:
    """det of the (r-1)x(r-1) tridiagonal matrix built from t and h."""
    r, eta, ell = params.r, params.eta, params.ell
    if r < 2:
        raise PreconditionError("t^r needs r >= 2")
    n = r - 1
    mat = np.zeros((n, n), dtype=complex)
    for j in range(1, n + 1):
        mat[j - 1, j - 1] = _t_safe(params, nu, lambdas, lam + 2 * j * eta)
        if j < n:
            mat[j - 1, j] = h_function(params, lam + 2 * (j - ell) * eta)
        if j > 1:
            mat[j - 1, j - 2] = h_function(params, lam + 2 * (j + ell) * eta)
    return complex(np.linalg.det(mat))


def _h_product(params: ModelParams, lam: complex) -> complex:
    ell, eta, r = params.ell, params.eta, params.r
    count = int(round(r - 2 * ell - 1))
    return complex(np.prod([h_function(params, lam + 2 * (ell + 1 + i) * eta) for i in range(count)]))


def t_r_closed_form_fit(
    params: ModelParams, nu: int, lambdas, grid: Sequence[complex], n_range: int = 12
) -> tuple[int, complex, float]:
    """Fit t^r = c e^{2 pi i n lam} prod h Q(lam)^2 over integer n and complex c.

    Returns (n, c, max relative deviation over the grid).
    """
    grid = np.asarray(grid, dtype=complex)
    ratio = np.array(
        [
            t_r_determinant(params, nu, lambdas, z) / (_h_product(params, z) * q_function(params, nu, lambdas, z) ** 2)
            for z in grid
        ]
    )
    best = None
    for n in range(-n_range, n_range + 1):
        vals = ratio * np.exp(-2j * np.pi * n * grid)
        c = complex(np.median(vals.real) + 1j * np.median(vals.imag))
        c = complex(np.mean(vals)) if abs(c) == 0 else c
        dev = float(np.max(np.abs(vals - c)) / abs(c)) if abs(c) > 0 else math.inf
        if best is None or dev < best[2]:
            best = (n, c, dev)
    return best


def f_terms(params: ModelParams, nu: int, lambdas, lam: complex) -> np.ndarray:
    """f_0(lam), ..., f_{r-1}(lam) of the expanded determinant.

    f_k carries Q(lam + 2 j eta) for j in 1..r with j not congruent to k or
    k + 1 modulo r.  For 1 <= k <= r - 1 this is the range 1..k-1, k+2..r;
    for k = 0 it drops j = r as well, which is what makes
    f_k(lam + 2 eta) = f_{k+1}(lam) hold cyclically.
    """
    r, eta, ell = params.r, params.eta, params.ell
    Q = lambda z: q_function(params, nu, lambdas, z)  # noqa: E731
    out = []
    for k in range(r):
        val = np.prod([h_function(params, lam + 2 * (k - ell + j) * eta) for j in range(1, params.two_ell + 1)])
        skip = {k % r, (k + 1) % r}
        val *= np.prod([Q(lam + 2 * j * eta) for j in range(1, r + 1) if j % r not in skip])
        out.append(complex(val))
    return np.array(out)


def t_r_tilde_residual(params: ModelParams, nu: int, lambdas, lam: complex) -> float:
    """Relative gap between Q(lam+2eta)...Q(lam+2(r-1)eta) t^r(lam) and prod h * Q(lam) F(lam)."""
    r, eta = params.r, params.eta
    lhs = np.prod([q_function(params, nu, lambdas, lam + 2 * j * eta) for j in range(1, r)])
    lhs *= t_r_determinant(params, nu, lambdas, lam)
    rhs = _h_product(params, lam) * q_function(params, nu, lambdas, lam) * f_sum(params, nu, lambdas, lam)
    return float(abs(lhs - rhs) / abs(lhs))


def f_sum(params: ModelParams, nu: int, lambdas, lam: complex) -> complex:
    return complex(np.sum(f_terms(params, nu, lambdas, lam)))


def residue_estimate(params: ModelParams, nu: int, lambdas, centre: complex, radius: float = 1e-2, n: int = 64) -> float:
    """|(1/2 pi i) contour integral of t^r| around ``centre``: a pole detector."""
    ang = 2 * np.pi * np.arange(n) / n
    pts = centre + radius * np.exp(1j * ang)
    vals = np.array([t_r_determinant(params, nu, lambdas, z) for z in pts])
    res = np.mean(vals * radius * np.exp(1j * ang))
    scale = max(np.max(np.abs(vals)) * radius, 1e-300)
    return float(abs(res) / scale)


# ---------------------------------------------------------------------------
# parities


@dataclass
class ParityReport:
    nu_doubleprime: int | None
    nu_prime: int | None
    residuals: tuple[float, float]
    indeterminate: bool
    congruence_1: bool | None = None
    congruence_2: bool | None = None


def _parity(U: np.ndarray, v: np.ndarray) -> tuple[int, float]:
    ev = complex(np.vdot(v, U @ v) / np.vdot(v, v))
    sign = 1 if ev.real >= 0 else -1
    res = float(np.linalg.norm(U @ v - sign * v) / np.linalg.norm(v))
    return (0 if sign == 1 else 1), res


def parity_measure(ctx: ModelContext, state: np.ndarray, tol: float = 1e-4) -> ParityReport:
    """Parities from U_1^{(x)N} Psi = (-1)^{nu''} Psi and U_3^{(x)N} Psi = (-1)^{nu'} Psi."""
    U1, U3 = parity_operators_H(ctx)
    npp, r1 = _parity(U1, state)
    npr, r3 = _parity(U3, state)
    bad = r1 > tol or r3 > tol
    return ParityReport(
        nu_doubleprime=None if bad else npp,
        nu_prime=None if bad else npr,
        residuals=(r1, r3),
        indeterminate=bad,
    )


def conjecture_congruences(params: ModelParams, nu: int, lambdas, report: ParityReport) -> ParityReport:
    """Fill in the two parity congruences as observations.

    The second congruence is read through the sum-rule lattice decomposition
    2 sum lam_j = n0 + n1 tau, so nu tau - 2 sum lam_j = -n0 + (nu - n1) tau;
    it is taken to mean that -n0 and nu - n1 have the parities prescribed
    by nu'' + N l.
    """
    if report.indeterminate:
        return report
    M = params.M
    report.congruence_1 = (nu + report.nu_prime + M) % 2 == 0
    n0, n1, _ = sum_rule_check(params, lambdas)
    report.congruence_2 = (-n0 - report.nu_doubleprime - M) % 2 == 0 and (nu - n1) % 2 == 0
    return report
