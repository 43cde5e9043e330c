"""Jacobi theta functions and the special functions built from them.

Conventions
-----------
For a characteristic (a, b) with a, b in {0, 1}::

    theta_ab(z; tau) = sum_n exp(pi i (n + a/2)^2 tau + 2 pi i (n + a/2)(z + b/2))

so that theta_11 is odd and the other three are even.  The modulus of the
model is pure imaginary, ``tau = i/t``.  Small ``Im tau`` is handled through
the Jacobi imaginary transformation, so every evaluation sums a series with a
small nome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._series import geometric_cutoff, sinh_ratio
from .errors import DomainError, PreconditionError, SeriesError

ArrayLike = Union[complex, float, np.ndarray]


@dataclass(frozen=True)
class ThetaChar:
    """Characteristic (a, b) of a theta function with a, b in {0, 1}."""

    a: int
    b: int

    def __post_init__(self):
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise ValueError(f"theta characteristic must be in {{0,1}}^2, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class ModulusParam:
    """The modulus ``tau = i/t`` of the model."""

    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t}")

    @property
    def tau(self) -> complex:
        return 1j / self.t


@dataclass(frozen=True)
class SeriesControl:
    abs_tol: float = 1e-14
    max_terms: int = 400

    def __post_init__(self):
        if not self.abs_tol >= 10 * np.finfo(float).eps:
            raise ValueError("abs_tol must be at least 10 machine epsilons")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")


DEFAULT_CONTROL = SeriesControl()

_CHARS = {(0, 0), (0, 1), (1, 0), (1, 1)}


def _as_char(char) -> tuple[int, int]:
    if isinstance(char, ThetaChar):
        return char.a, char.b
    a, b = char
    if (a, b) not in _CHARS:
        raise ValueError(f"invalid theta characteristic {char!r}")
    return int(a), int(b)


def _theta_series(alpha: float, beta: float, z: np.ndarray, tau: complex, ctrl: SeriesControl) -> np.ndarray:
    """Sum exp(pi i (n+alpha)^2 tau + 2 pi i (n+alpha)(z+beta)) after reducing Im z.

    The reduction brings Im z into [-Im tau/2, Im tau/2] using
    theta(z + m tau) = exp(-pi i m^2 tau - 2 pi i m (z + beta)) theta(z).
    """
    m = np.round(z.imag / tau.imag)
    z0 = z - m * tau
    total = np.zeros_like(z0)
    # walk n = 0, -1, 1, -2, 2, ...; after the reduction the magnitudes are
    # unimodal in n so two consecutive small terms end the sum
    small_run = 0
    used = 0
    k = 0
    while True:
        for n in ((0,) if k == 0 else (-k, k)):
            c = n + alpha
            term = np.exp(1j * np.pi * c * c * tau + 2j * np.pi * c * (z0 + beta))
            total = total + term
            used += 1
            if np.max(np.abs(term), initial=0.0) < ctrl.abs_tol:
                small_run += 1
            else:
                small_run = 0
        if small_run >= 2 and k >= 1:
            break
        k += 1
        if used >= ctrl.max_terms:
            raise SeriesError(
                f"theta series did not converge within {ctrl.max_terms} terms", partial_sum=total
            )
    factor = np.exp(-1j * np.pi * m * m * tau - 2j * np.pi * m * (z0 + beta))
    return factor * total


def theta(char, z: ArrayLike, tau: complex, ctrl: SeriesControl = DEFAULT_CONTROL) -> ArrayLike:
    """Evaluate theta_ab(z; tau).  ``z`` may be a scalar or an array."""
    a, b = _as_char(char)
    tau = complex(tau)
    if not tau.imag > 0:
        raise DomainError(f"Im(tau) must be positive, got {tau}")
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=complex)
    if tau.imag < 0.5 and (-1.0 / tau).imag > tau.imag:
        tau2 = -1.0 / tau
        pref = (-1j * tau) ** -0.5 * np.exp(-1j * np.pi * zz * zz / tau)
        if (a, b) == (1, 1):
            pref = 1j * pref
        val = pref * _theta_series(0.5 * b, 0.5 * a, zz / tau, tau2, ctrl)
    else:
        val = _theta_series(0.5 * a, 0.5 * b, zz, tau, ctrl)
    return complex(val) if scalar else val


def theta_rational(alpha: float, beta: float, z: ArrayLike, tau: complex, ctrl: SeriesControl = DEFAULT_CONTROL) -> ArrayLike:
    """Theta function with real characteristic (alpha, beta), summed directly.

    Intended for moduli with Im tau of order one or larger, such as the
    level-4l moduli 4 l tau used for the spin-l representation space.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise DomainError(f"Im(tau) must be positive, got {tau}")
    zz = np.asarray(z, dtype=complex)
    val = _theta_series(float(alpha), float(beta), zz, tau, ctrl)
    return complex(val) if np.ndim(z) == 0 else val


def theta11(z: ArrayLike, tau: complex) -> ArrayLike:
    return theta((1, 1), z, tau)


def theta10(z: ArrayLike, tau: complex) -> ArrayLike:
    return theta((1, 0), z, tau)


def theta01(z: ArrayLike, tau: complex) -> ArrayLike:
    return theta((0, 1), z, tau)


def theta00(z: ArrayLike, tau: complex) -> ArrayLike:
    return theta((0, 0), z, tau)


def theta_log_derivative(char, z: ArrayLike, tau: complex, h: float = 2e-3) -> ArrayLike:
    """d/dz log theta_ab(z; tau) by a sixth-order central difference.

    With the default step the relative error is around 1e-13 for moduli of
    order one, which is plenty for Newton Jacobians and quadrature oracles.
    """
    zz = np.asarray(z, dtype=complex)
    f = lambda s: theta(char, zz + s * h, tau)  # noqa: E731
    d = (45 * (f(1) - f(-1)) - 9 * (f(2) - f(-2)) + (f(3) - f(-3))) / (60 * h)
    out = d / f(0)
    return complex(out) if np.ndim(z) == 0 else out


def theta11_log_derivative(z: ArrayLike, tau: complex, h: float = 2e-3) -> ArrayLike:
    return theta_log_derivative((1, 1), z, tau, h)


# ---------------------------------------------------------------------------
# Phi and Psi


def _check_mu(mu: float) -> None:
    if not 0.0 < mu < 0.5:
        raise DomainError(f"mu must lie in (0, 1/2), got {mu}")


def _unwrapped_phase_change(char, x: np.ndarray, shift: complex, tau: complex, gap: float) -> np.ndarray:
    """Continuous change of arg theta(s + shift) as s runs from 0 to x."""
    xmax = float(np.max(np.abs(x), initial=0.0))
    step = min(gap / 4.0, 1.0 / 64.0)
    k = max(16, int(math.ceil(xmax / step)))
    frac = np.linspace(0.0, 1.0, k + 1)
    path = x[:, None] * frac[None, :] + shift
    vals = theta(char, path, tau)
    ang = np.unwrap(np.angle(vals), axis=1)
    return ang[:, -1] - ang[:, 0]


def phi(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    """Phi(x; i mu t) = (1/i) log(theta_11(x + i mu t)/theta_11(x - i mu t)) + pi.

    The branch is fixed by continuity from Phi(0) = 0.  Since the modulus is
    pure imaginary, theta_11(conj z) = conj theta_11(z), so Phi is twice the
    continuous change of arg theta_11(x + i mu t) along [0, x].
    """
    _check_mu(mu)
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    gap = min(mu, 0.5 - mu) * t
    val = 2.0 * _unwrapped_phase_change((1, 1), xx, 1j * mu * t, 1j * t, gap)
    return float(val[0]) if np.ndim(x) == 0 else val


def psi(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    """Psi(x; i mu t) = (1/i) log(theta_01(x + i mu t)/theta_01(x - i mu t)), Psi(0) = 0."""
    _check_mu(mu)
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    gap = min(mu, 0.5 - mu) * t
    val = 2.0 * _unwrapped_phase_change((0, 1), xx, 1j * mu * t, 1j * t, gap)
    return float(val[0]) if np.ndim(x) == 0 else val


def _harmonics(rate: float, tol: float, cap: int = 200_000) -> np.ndarray:
    n_max = int(min(cap, max(64, math.ceil((math.log(1.0 / tol) + 10.0) / rate))))
    return np.arange(1, n_max + 1, dtype=float)


def phi_coefficients(mu: float, t: float, tol: float = 1e-16) -> np.ndarray:
    """c_n = sinh(pi n (1 - 2 mu) t) / sinh(pi n t) for n = 1, 2, ..."""
    _check_mu(mu)
    n = _harmonics(2 * np.pi * mu * t, tol)
    c = sinh_ratio(np.pi * n * (1 - 2 * mu) * t, np.pi * n * t)
    k, _ = geometric_cutoff(c, tol)
    return c[:k]


def psi_coefficients(mu: float, t: float, tol: float = 1e-16) -> np.ndarray:
    """d_n = sinh(2 pi n mu t) / sinh(pi n t) for n = 1, 2, ..."""
    _check_mu(mu)
    n = _harmonics(np.pi * (1 - 2 * mu) * t, tol)
    d = sinh_ratio(2 * np.pi * n * mu * t, np.pi * n * t)
    k, _ = geometric_cutoff(d, tol)
    return d[:k]


def _sine_sum(coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = np.arange(1, coef.size + 1)
    return np.sin(2 * np.pi * np.outer(x, n)) @ coef


def _cosine_sum(coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = np.arange(1, coef.size + 1)
    return np.cos(2 * np.pi * np.outer(x, n)) @ coef


def _finish(val: np.ndarray, x: ArrayLike):
    return float(val[0]) if np.ndim(x) == 0 else val


def phi_fourier(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    """Fourier form -2 pi x - 2 sum_n c_n sin(2 pi n x) / n."""
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    c = phi_coefficients(mu, t)
    n = np.arange(1, c.size + 1)
    return _finish(-2 * np.pi * xx - 2 * _sine_sum(c / n, xx), x)


def psi_fourier(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    """Fourier form 2 sum_n d_n sin(2 pi n x) / n."""
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    d = psi_coefficients(mu, t)
    n = np.arange(1, d.size + 1)
    return _finish(2 * _sine_sum(d / n, xx), x)


def phi_prime(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    c = phi_coefficients(mu, t)
    return _finish(-2 * np.pi * (1 + 2 * _cosine_sum(c, xx)), x)


def psi_prime(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    d = psi_coefficients(mu, t)
    return _finish(4 * np.pi * _cosine_sum(d, xx), x)


def phi_prime_direct(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    """Phi'(x; i mu t) = 2 Im theta_11'/theta_11(x + i mu t), for any 0 < mu < 1.

    Independent of the Fourier coefficients, so it serves as the quadrature
    oracle for the thermodynamic integral equations.
    """
    if not 0.0 < mu < 1.0:
        raise DomainError(f"mu must lie in (0, 1), got {mu}")
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    val = 2.0 * np.imag(theta_log_derivative((1, 1), xx + 1j * mu * t, 1j * t))
    return _finish(val, x)


def psi_prime_direct(x: ArrayLike, mu: float, t: float) -> ArrayLike:
    """Psi'(x; i mu t) = 2 Im theta_01'/theta_01(x + i mu t); mu = 0 gives 0."""
    if mu == 0:
        return _finish(np.zeros(np.atleast_1d(x).shape), x)
    if not 0.0 < mu < 1.0 or mu == 0.5:
        raise DomainError(f"mu must lie in (0, 1) and differ from 1/2, got {mu}")
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    val = 2.0 * np.imag(theta_log_derivative((0, 1), xx + 1j * mu * t, 1j * t))
    return _finish(val, x)


# ---------------------------------------------------------------------------
# positivity kernel


def _check_ab(a: float, b: float) -> None:
    if not (0 < a < b):
        raise DomainError(f"positivity kernel needs 0 < a < b, got a={a}, b={b}")


def positivity_kernel(a: float, b: float, x: ArrayLike, ctrl: SeriesControl = DEFAULT_CONTROL) -> ArrayLike:
    """sum_{n in Z} sinh(pi n a)/sinh(pi n b) e^{2 pi i n x}, the n = 0 term being a/b."""
    _check_ab(a, b)
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    n = _harmonics(np.pi * (b - a), ctrl.abs_tol, cap=max(ctrl.max_terms, 64) * 100)
    c = sinh_ratio(np.pi * n * a, np.pi * n * b)
    k, _ = geometric_cutoff(c, ctrl.abs_tol)
    return _finish(a / b + 2 * _cosine_sum(c[:k], xx), x)


def positivity_kernel_poisson(a: float, b: float, x: ArrayLike, ctrl: SeriesControl = DEFAULT_CONTROL) -> ArrayLike:
    """The same kernel after Poisson resummation: sum over integers xi of f(x - xi), where

    f(u) = (2 sin(a pi/b)/b) E / ((E + cos(a pi/b))^2 + sin(a pi/b)^2),  E = exp(-2 pi |u|/b).
    """
    _check_ab(a, b)
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    s, c = math.sin(math.pi * a / b), math.cos(math.pi * a / b)
    kmax = int(math.ceil(b * math.log(1e3 / ctrl.abs_tol) / (2 * math.pi))) + 2
    xi = np.arange(-kmax, kmax + 1, dtype=float)
    u = np.abs(xx[:, None] - xi[None, :])
    e = np.exp(-2 * np.pi * u / b)
    f = (2 * s / b) * e / ((e + c) ** 2 + s * s)
    return _finish(f.sum(axis=1), x)


# ---------------------------------------------------------------------------
# q-analogues


def _check_q(q: float) -> None:
    if not 0 < abs(q) < 1:
        raise DomainError(f"|q| must lie in (0, 1), got {q}")


def q_pochhammer(x: ArrayLike, q: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> ArrayLike:
    """(x; q)_inf = prod_{n >= 0} (1 - x q^n)."""
    _check_q(q)
    xx = np.asarray(x, dtype=complex)
    prod = np.ones_like(xx)
    cur = xx.copy()
    for _ in range(100 * ctrl.max_terms):
        prod = prod * (1 - cur)
        if np.max(np.abs(cur), initial=0.0) < ctrl.abs_tol * 1e-3:
            break
        cur = cur * q
    else:
        raise SeriesError("q-Pochhammer product did not converge", partial_sum=prod)
    return complex(prod) if np.ndim(x) == 0 else prod


def q_gamma(x: ArrayLike, q: float) -> ArrayLike:
    """Gamma_q(x) = (q; q)_inf / (q^x; q)_inf * (1 - q)^(1 - x)."""
    _check_q(q)
    xx = np.asarray(x, dtype=complex)
    lq = np.log(q)
    val = q_pochhammer(q, q) / q_pochhammer(np.exp(xx * lq), q) * np.exp((1 - xx) * np.log1p(-q))
    return complex(val) if np.ndim(x) == 0 else val


def double_product(x: ArrayLike, q1: float, q2: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> ArrayLike:
    """(x; q1, q2)_inf = prod_{n1, n2 >= 0} (1 - x q1^n1 q2^n2)."""
    _check_q(q1)
    _check_q(q2)
    xx = np.asarray(x, dtype=complex)
    prod = np.ones_like(xx)
    cur = xx.copy()
    for _ in range(100 * ctrl.max_terms):
        prod = prod * q_pochhammer(cur, q2, ctrl)
        if np.max(np.abs(cur), initial=0.0) < ctrl.abs_tol * 1e-3:
            break
        cur = cur * q1
    else:
        raise SeriesError("double product did not converge", partial_sum=prod)
    return complex(prod) if np.ndim(x) == 0 else prod


def q_gamma_identity_sides(x, y, z, w, a: float, q: float, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Both sides of the infinite q-Gamma product identity (requires x + y = z + w).

        prod_{n >= 0} Gamma_q(z + a n) Gamma_q(w + a n) / (Gamma_q(x + a n) Gamma_q(y + a n))
            = (q^x; q^a, q)(q^y; q^a, q) / ((q^z; q^a, q)(q^w; q^a, q))

    Returns ``(product_side, double_product_side)``.
    """
    if abs((x + y) - (z + w)) > 1e-12:
        raise PreconditionError("the q-Gamma product identity requires x + y = z + w")
    _check_q(q)
    qa = q**a
    qp = lambda s: complex(q ** complex(s))  # noqa: E731
    rhs = (
        double_product(qp(x), qa, q, ctrl)
        * double_product(qp(y), qa, q, ctrl)
        / (double_product(qp(z), qa, q, ctrl) * double_product(qp(w), qa, q, ctrl))
    )
    lhs = 1.0 + 0j
    for n in range(100 * ctrl.max_terms):
        term = (
            q_gamma(z + a * n, q) * q_gamma(w + a * n, q) / (q_gamma(x + a * n, q) * q_gamma(y + a * n, q))
        )
        lhs *= term
        if abs(term - 1) < ctrl.abs_tol * 1e-3:
            break
    else:
        raise SeriesError("q-Gamma product did not converge", partial_sum=lhs)
    return lhs, rhs


def q_gamma_identity_residual(x, y, z, w, a: float, q: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    lhs, rhs = q_gamma_identity_sides(x, y, z, w, a, q, ctrl)
    return float(abs(lhs - rhs))
