"""Monodromy and transfer matrices, pseudo-vacua and Bethe vectors.

The Hilbert space is V_N (x) ... (x) V_1 with site N as the leftmost tensor
factor, matching the fundamental vectors

    |a_N, ..., a_1, a_0> = phi_{a_N, a_{N-1}} (x) ... (x) phi_{a_1, a_0}.

The monodromy matrix L_N(lam) ... L_1(lam) is stored as auxiliary blocks
``T[alpha, beta]``, each a dense ``(d^N, d^N)`` array.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .elliptic import theta
from .errors import DimensionError, PreconditionError
from .sklyanin import ModelParams, ThetaSpaceBasis, build_basis, build_L, parity_ops, spin_rep
from .sos import DEFAULT_GAUGE, GaugeParams, admissible, gauge_matrix, intertwining_vector, sos_weight

DEFAULT_DIM_CAP = 6561


@dataclass
class ModelContext:
    """Everything needed to build operators on the Hilbert space, with caches.

    The representation matrices, basis and intertwining vectors are computed
    once per context and then treated as immutable.
    """

    params: ModelParams
    gauge: GaugeParams = DEFAULT_GAUGE
    seed: int = 20240601
    dim_cap: int = DEFAULT_DIM_CAP
    basis: ThetaSpaceBasis = field(init=False, repr=False)
    S: np.ndarray = field(init=False, repr=False)
    _phi_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if self.params.dim**self.params.N > self.dim_cap:
            raise DimensionError(
                f"Hilbert space dimension {self.params.dim}^{self.params.N} exceeds the cap {self.dim_cap}"
            )
        self.gauge.validate(self.params)
        self.basis = build_basis(self.params.two_ell, self.params.tau, seed=self.seed)
        self.S = spin_rep(self.params, self.basis)

    @property
    def hilbert_dim(self) -> int:
        return self.params.dim**self.params.N

    def phi(self, k: int, kp: int) -> np.ndarray:
        """Intertwining vector phi_{k,k'}(0; s), cached modulo the period r."""
        r = self.params.r
        key = (k % r, kp - (k - k % r))
        if key not in self._phi_cache:
            self._phi_cache[key] = intertwining_vector(self.params, self.basis, self.gauge, key[0], key[1])
        return self._phi_cache[key]

    def fundamental(self, heights) -> np.ndarray:
        """|a_N, ..., a_0> for heights listed as (a_N, ..., a_0)."""
        hs = list(heights)
        if len(hs) != self.params.N + 1:
            raise PreconditionError(f"need N + 1 = {self.params.N + 1} heights, got {len(hs)}")
        return reduce(np.kron, [self.phi(hs[i], hs[i + 1]) for i in range(len(hs) - 1)])


def lift_blocks(L: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Multiply auxiliary blocks: result[a, b] = sum_c L[a, c] (x) T[c, b]."""
    return np.stack(
        [np.stack([sum(np.kron(L[a, c], T[c, b]) for c in range(2)) for b in range(2)]) for a in range(2)]
    )


def monodromy(ctx: ModelContext, lam: complex, heights: tuple[int, int] | None = None) -> np.ndarray:
    """Monodromy blocks T[alpha, beta]; with ``heights=(k, k')`` returns M_k^{-1} T M_{k'}."""
    L = build_L(ctx.params, ctx.S, lam)
    T = L
    for _ in range(ctx.params.N - 1):
        T = lift_blocks(L, T)
    if heights is not None:
        T = twist_monodromy(ctx, T, lam, *heights)
    return T


def twist_monodromy(ctx: ModelContext, T: np.ndarray, lam: complex, k: int, kp: int) -> np.ndarray:
    Minv = np.linalg.inv(gauge_matrix(ctx.params, ctx.gauge, k, lam))
    Mkp = gauge_matrix(ctx.params, ctx.gauge, kp, lam)
    return np.einsum("ia,abxy,bj->ijxy", Minv, T, Mkp)


def b_operator(ctx: ModelContext, T: np.ndarray, lam: complex, k: int, kp: int) -> np.ndarray:
    """B_{k,k'}(lam): the (-1, +1) block of the twisted monodromy."""
    Minv = np.linalg.inv(gauge_matrix(ctx.params, ctx.gauge, k, lam))
    Mkp = gauge_matrix(ctx.params, ctx.gauge, kp, lam)
    return np.einsum("a,abxy,b->xy", Minv[0], T, Mkp[:, 1])


def transfer_matrix(ctx: ModelContext, lam: complex) -> np.ndarray:
    T = monodromy(ctx, lam)
    return T[0, 0] + T[1, 1]


def pseudo_vacuum(ctx: ModelContext, a: int) -> np.ndarray:
    """Omega^a_N = |a + 2Nl, a + 2(N-1)l, ..., a + 2l, a>."""
    p = ctx.params
    return ctx.fundamental([a + p.two_ell * j for j in range(p.N, -1, -1)])


def parity_operators_H(ctx: ModelContext) -> tuple[np.ndarray, np.ndarray]:
    """U_1^{(x)N} and U_3^{(x)N} on the Hilbert space."""
    u1, _, u3 = parity_ops(ctx.params, ctx.basis)
    N = ctx.params.N
    return reduce(np.kron, [u1] * N), reduce(np.kron, [u3] * N)


# ---------------------------------------------------------------------------
# Bethe vectors


def _check_roots(params: ModelParams, lambdas) -> list[complex]:
    lams = [complex(x) for x in lambdas]
    if len(lams) != params.M:
        raise PreconditionError(f"need M = N l = {params.M} roots, got {len(lams)}")
    return lams


def bethe_vector_algebraic(ctx: ModelContext, nu: int, lambdas) -> np.ndarray:
    """sum_a e^{2 pi i nu eta a} B_{a+1,a-1}(lam_1) ... B_{a+M,a-M}(lam_M) Omega^{a-M}."""
    p = ctx.params
    lams = _check_roots(p, lambdas)
    M = p.M
    mons = [monodromy(ctx, lam) for lam in lams]
    total = np.zeros(ctx.hilbert_dim, dtype=complex)
    for a in range(p.r):
        v = pseudo_vacuum(ctx, a - M)
        for i in range(M, 0, -1):
            v = b_operator(ctx, mons[i - 1], lams[i - 1], a + i, a - i) @ v
        total += np.exp(2j * np.pi * nu * p.eta * a) * v
    return total


def _row_transitions(params: ModelParams, gauge: GaugeParams, row: tuple[int, ...], lam: complex):
    """All admissible rows above ``row`` with the product of face weights.

    ``row`` lists heights a_{i,0}, ..., a_{i,N}; the next row up has
    a_{i-1,j} = a_{i,j} + eps_j with eps_0 = +1 and eps_N = -1.
    """
    N = params.N
    for inner in itertools.product((-1, 1), repeat=N - 1):
        eps = (1,) + inner + (-1,)
        new = tuple(h + e for h, e in zip(row, eps))
        if not all(admissible(params, new[j], new[j - 1]) for j in range(1, N + 1)):
            continue
        w = 1.0 + 0j
        for j in range(1, N + 1):
            w *= sos_weight(params, gauge, row[j], row[j - 1], eps[j], eps[j - 1], lam)
            if w == 0:
                break
        if w != 0:
            yield new, w


def coordinate_amplitudes(ctx: ModelContext, nu: int, lambdas) -> dict[tuple[int, ...], complex]:
    """Coefficients of the Bethe vector on fundamental vectors, keyed by (a_N, ..., a_0).

    Sums products of face weights over admissible height arrays a_{i,j} with
    a_{M,j} = a - Nl + 2lj, a_{i,0} = a - i, a_{i,N} = a + i; row i is
    turned into row i - 1 with spectral parameter lam_i.
    """
    p = ctx.params
    lams = _check_roots(p, lambdas)
    M = p.M
    amps: dict[tuple[int, ...], complex] = {}
    for a in range(p.r):
        states = {tuple(a - M + p.two_ell * j for j in range(p.N + 1)): 1.0 + 0j}
        for i in range(M, 0, -1):
            new_states: dict[tuple[int, ...], complex] = {}
            for row, coef in states.items():
                for new, w in _row_transitions(p, ctx.gauge, row, lams[i - 1]):
                    new_states[new] = new_states.get(new, 0) + coef * w
            states = new_states
        phase = np.exp(2j * np.pi * nu * p.eta * a)
        for row, coef in states.items():
            key = tuple(reversed(row))
            amps[key] = amps.get(key, 0) + phase * coef
    return amps


def bethe_vector_coordinate(ctx: ModelContext, nu: int, lambdas) -> np.ndarray:
    total = np.zeros(ctx.hilbert_dim, dtype=complex)
    for heights, coef in coordinate_amplitudes(ctx, nu, lambdas).items():
        total += coef * ctx.fundamental(heights)
    return total


# ---------------------------------------------------------------------------
# eigenvalues


def h_function(params: ModelParams, z: complex) -> complex:
    return (2 * theta((1, 1), z, params.tau)) ** params.N


def q_function(params: ModelParams, nu: int, lambdas, lam) -> complex:
    """Q(lam) = e^{-pi i nu lam} prod_j theta_11(lam - lam_j)."""
    lam = np.asarray(lam, dtype=complex)
    out = np.exp(-1j * np.pi * nu * lam)
    for lj in lambdas:
        out = out * theta((1, 1), lam - lj, params.tau)
    return complex(out) if out.ndim == 0 else out


def eigenvalue_t(params: ModelParams, nu: int, lambdas, lam: complex) -> complex:
    """Transfer-matrix eigenvalue written with the two products over roots."""
    tau, eta, ell = params.tau, params.eta, params.ell
    th = lambda z: theta((1, 1), z, tau)  # noqa: E731
    p1 = np.prod([th(lam - lj - 2 * eta) / th(lam - lj) for lj in lambdas])
    p2 = np.prod([th(lam - lj + 2 * eta) / th(lam - lj) for lj in lambdas])
    return complex(
        np.exp(2j * np.pi * nu * eta) * h_function(params, lam + 2 * ell * eta) * p1
        + np.exp(-2j * np.pi * nu * eta) * h_function(params, lam - 2 * ell * eta) * p2
    )


def eigenvalue_via_q(params: ModelParams, nu: int, lambdas, lam: complex) -> complex:
    """h(lam + 2 l eta) Q(lam - 2 eta)/Q(lam) + h(lam - 2 l eta) Q(lam + 2 eta)/Q(lam)."""
    eta, ell = params.eta, params.ell
    Q = lambda z: q_function(params, nu, lambdas, z)  # noqa: E731
    q0 = Q(lam)
    return (
        h_function(params, lam + 2 * ell * eta) * Q(lam - 2 * eta) / q0
        + h_function(params, lam - 2 * ell * eta) * Q(lam + 2 * eta) / q0
    )


def eigenvalue_regular(params: ModelParams, nu: int, lambdas, lam: complex, radius: float = 1e-4) -> complex:
    """Pole-free evaluation near a root: average over four points at distance ``radius``.

    For a genuine solution t is analytic there, so the mean over the stencil
    equals t(lam) up to O(radius^4).
    """
    pts = lam + radius * np.array([1, 1j, -1, -1j])
    return complex(np.mean([eigenvalue_t(params, nu, lambdas, z) for z in pts]))


def q_automorphy_residuals(params: ModelParams, nu: int, lambdas, lam: complex) -> tuple[float, float]:
    """Relative residuals of Q(lam+1) = (-1)^{Nl-nu} Q(lam) and of the tau-shift law.

    Q(lam + tau) = exp(-pi i N l (1 + tau + 2 lam) - pi i tau nu + 2 pi i sum_j lam_j) Q(lam)
    (with M = N l roots).
    """
    tau = params.tau
    M = params.M
    q0 = q_function(params, nu, lambdas, lam)
    r1 = q_function(params, nu, lambdas, lam + 1) - (-1) ** ((M - nu) % 2) * q0
    fac = np.exp(-1j * np.pi * M * (1 + tau + 2 * lam) - 1j * np.pi * tau * nu + 2j * np.pi * sum(lambdas))
    r2 = q_function(params, nu, lambdas, lam + tau) - fac * q0
    return float(abs(r1) / abs(q0)), float(abs(r2) / abs(fac * q0))
