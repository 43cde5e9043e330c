"""Thermodynamic limit: string densities, free energy, excitations, polarization and S matrix.

The rescaled rapidity is x = i t lambda.  Densities live on the period
[-1/2, 1/2] and are stored as truncated cosine (occasionally sine) series.

The kernel of every integral equation is

    K(x) = sum_{m=1}^{2l-1} Phi'(x; 2 i m eta t) + sum_{m=0}^{2l-1} Phi'(x; 2 i (m+1) eta t),

i.e. Phi'(x; i mu t) summed over the 4l - 1 values of mu in :func:`kernel_mus`.
Phi'(x; i mu t) has the two-sided Fourier coefficients -2 pi (n = 0) and
-2 pi c_n(mu) with c_n(mu) = sinh(pi n (1 - 2 mu) t) / sinh(pi n t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from ._series import geometric_cutoff, log_cosh, log_sinh, sinh_ratio
from .elliptic import (
    double_product,
    phi_prime_direct,
    positivity_kernel,
    psi_prime_direct,
    q_gamma,
    theta,
    theta11_log_derivative,
)
from .errors import ConsistencyError, DomainError, PreconditionError
from .sklyanin import ModelParams, r_eigenvalues_direct

_TWO_PI = 2.0 * np.pi
_N_MAX = 4096
DEFAULT_NODES = 2048

VARIANTS = ("I0", "I1", "II0", "II1")


# ---------------------------------------------------------------------------
# Fourier densities


@dataclass(frozen=True)
class FourierDensity:
    """f(x) = c0 + sum_n a_n cos 2 pi n x + sum_n b_n sin 2 pi n x + beta x  on [-1/2, 1/2].

    ``singular_weight`` w marks a density whose cosine coefficients tend to
    2w instead of zero: the series then contains w times the periodic delta
    function.  Evaluation returns the regular remainder
    (c0 - w) + sum (a_n - 2w) cos 2 pi n x + ..., and :meth:`integral` still
    counts the delta.
    """

    constant_term: float
    coefficients: np.ndarray
    sine_coefficients: np.ndarray = field(default_factory=lambda: np.zeros(0))
    linear_term: float = 0.0
    singular_weight: float = 0.0
    tail_bound: float = 0.0
    label: str = ""

    @property
    def truncation(self) -> int:
        return int(max(self.coefficients.size, self.sine_coefficients.size))

    def regular_cosine(self) -> tuple[float, np.ndarray]:
        w = self.singular_weight
        return self.constant_term - w, self.coefficients - 2.0 * w

    def __call__(self, x):
        xx = np.atleast_1d(np.asarray(x, dtype=float))
        c0, a = self.regular_cosine()
        out = np.full(xx.shape, c0) + self.linear_term * xx
        if a.size:
            n = np.arange(1, a.size + 1)
            out = out + np.cos(_TWO_PI * np.outer(xx, n)) @ a
        if self.sine_coefficients.size:
            n = np.arange(1, self.sine_coefficients.size + 1)
            out = out + np.sin(_TWO_PI * np.outer(xx, n)) @ self.sine_coefficients
        return float(out[0]) if np.ndim(x) == 0 else out

    def antiderivative(self, x):
        """Primitive of the regular part vanishing at 0 (cosine and constant terms only)."""
        if self.sine_coefficients.size or self.linear_term:
            raise PreconditionError("antiderivative is implemented for even densities only")
        xx = np.atleast_1d(np.asarray(x, dtype=float))
        c0, a = self.regular_cosine()
        n = np.arange(1, a.size + 1)
        out = c0 * xx + np.sin(_TWO_PI * np.outer(xx, n)) @ (a / (_TWO_PI * n))
        return float(out[0]) if np.ndim(x) == 0 else out

    def integral(self) -> float:
        """Integral over one period, delta part included."""
        return float(self.constant_term)

    def two_sided(self, n: int) -> complex:
        """Coefficient of e^{2 pi i n x} of the periodic part (n >= 1)."""
        a = self.coefficients[n - 1] if n <= self.coefficients.size else 0.0
        b = self.sine_coefficients[n - 1] if n <= self.sine_coefficients.size else 0.0
        return complex(a / 2, -b / 2)


def _truncate(coeffs: np.ndarray, tol: float = 1e-16) -> tuple[np.ndarray, float]:
    k, tail = geometric_cutoff(coeffs, tol)
    return np.asarray(coeffs[:k], dtype=float), tail


def _harmonics(params: ModelParams) -> np.ndarray:
    # the slowest geometric rate among the densities is min(2 eta t, ...) pi;
    # 40 / rate harmonics push every coefficient below 1e-17
    rate = np.pi * params.t * min(2 * params.eta, 1 - (4 * params.ell + 2) * params.eta)
    n_max = int(min(_N_MAX, max(64, math.ceil(45.0 / rate))))
    return np.arange(1, n_max + 1, dtype=float)


def _make_density(constant, raw: np.ndarray, label: str, singular: float = 0.0) -> FourierDensity:
    reg, tail = _truncate(raw - 2.0 * singular)
    return FourierDensity(
        constant_term=float(constant),
        coefficients=reg + 2.0 * singular,
        singular_weight=singular,
        tail_bound=tail,
        label=label,
    )


# ---------------------------------------------------------------------------
# kernel bookkeeping


def kernel_mus(params: ModelParams) -> list[float]:
    """mu values in K: 2 m eta (m = 1..2l-1) and 2 (m+1) eta (m = 0..2l-1)."""
    e, n = params.eta, params.two_ell
    return [2 * m * e for m in range(1, n)] + [2 * (m + 1) * e for m in range(n)]


def source_mus(params: ModelParams) -> list[float]:
    """mu = 2 (alpha + l) eta for alpha = -l+1/2, ..., l-1/2 (left side of the ground-state equation)."""
    return [(2 * k + 1) * params.eta for k in range(params.two_ell)]


def _half_string_mus(params: ModelParams, top: float) -> list[float]:
    """mu values 2 m eta and 2 (m+1) eta for half-integral m = 1/2 .. top."""
    out = []
    m = 0.5
    while m <= top + 1e-12:
        out += [2 * m * params.eta, 2 * (m + 1) * params.eta]
        m += 1.0
    return out


def minus_string_mus(params: ModelParams) -> list[float]:
    return _half_string_mus(params, params.two_ell - 1.5)


def plus_string_mus(params: ModelParams) -> list[float]:
    return _half_string_mus(params, params.two_ell - 0.5)


def parity_minus_mus(params: ModelParams) -> list[float]:
    """Psi arguments (2l+1) eta and (2l-1) eta of the one-string with parity minus."""
    return [(params.two_ell + 1) * params.eta, (params.two_ell - 1) * params.eta]


def _c(n: np.ndarray, mu: float, t: float) -> np.ndarray:
    return sinh_ratio(np.pi * n * (1 - 2 * mu) * t, np.pi * n * t)


def _d(n: np.ndarray, mu: float, t: float) -> np.ndarray:
    return sinh_ratio(2 * np.pi * n * mu * t, np.pi * n * t)


def kernel_hat(params: ModelParams, n: np.ndarray) -> np.ndarray:
    """Two-sided Fourier coefficients of K at harmonics n (n = 0 allowed)."""
    n = np.asarray(n, dtype=float)
    out = np.zeros(n.shape)
    for mu in kernel_mus(params):
        out += np.where(n == 0, 1.0, _c(np.where(n == 0, 1.0, np.abs(n)), mu, params.t))
    return -_TWO_PI * out


def _phi_prime_sum(x: np.ndarray, mus: list[float], t: float) -> np.ndarray:
    out = np.zeros(np.shape(x))
    for mu in mus:
        out = out + phi_prime_direct(x, mu, t)
    return out


def _periodic_nodes(nodes: int) -> np.ndarray:
    return -0.5 + np.arange(nodes) / nodes


def _convolve_kernel(params: ModelParams, f: Callable, x: np.ndarray, nodes: int) -> np.ndarray:
    """int_{-1/2}^{1/2} K(x - y) f(y) dy by the composite trapezoid rule on the periodic grid."""
    y = _periodic_nodes(nodes)
    fy = f(y)
    diff = (x[:, None] - y[None, :]).ravel()
    kern = _phi_prime_sum(diff, kernel_mus(params), params.t).reshape(x.size, y.size)
    return kern @ fy / nodes


# ---------------------------------------------------------------------------
# ground state


def ground_density(params: ModelParams) -> FourierDensity:
    """rho(x) = sum_{n in Z} e^{2 pi i n x} / (2 cosh 2 pi n eta t)."""
    n = _harmonics(params)
    a = np.exp(-log_cosh(_TWO_PI * n * params.eta * params.t))
    return _make_density(0.5, a, "rho")


def ground_density_generic(params: ModelParams) -> FourierDensity:
    """rho solved from the Fourier transform of its integral equation (no closed form used)."""
    n = _harmonics(params)
    src = sum(-_TWO_PI * _c(n, mu, params.t) for mu in source_mus(params))
    src0 = -_TWO_PI * len(source_mus(params))
    a = 2 * src / (kernel_hat(params, n) - _TWO_PI)
    c0 = src0 / (kernel_hat(params, np.zeros(1))[0] - _TWO_PI)
    return _make_density(c0, a, "rho (generic)")


def _grid(points: int) -> np.ndarray:
    return np.linspace(-0.5, 0.5, points)


def ground_residual(params: ModelParams, quad_points: int = DEFAULT_NODES, grid_points: int = 41) -> float:
    """sup |LHS - RHS| of the ground-state integral equation on a grid.

    LHS = sum_alpha Phi'(x; 2 i (alpha + l) eta t),
    RHS = -2 pi rho(x) + int K(x - y) rho(y) dy, with Phi' from theta log-derivatives.
    """
    rho = ground_density(params)
    x = _grid(grid_points)
    lhs = _phi_prime_sum(x, source_mus(params), params.t)
    rhs = -_TWO_PI * rho(x) + _convolve_kernel(params, rho, x, quad_points)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# excitation densities


@dataclass(frozen=True)
class ExcitationDensities:
    sigma: FourierDensity
    omega_minus: FourierDensity
    omega_plus: FourierDensity
    omega_zero: FourierDensity

    def as_dict(self) -> dict[str, FourierDensity]:
        return {
            "sigma": self.sigma,
            "omega_minus": self.omega_minus,
            "omega_plus": self.omega_plus,
            "omega_zero": self.omega_zero,
        }


def excitation_densities(params: ModelParams) -> ExcitationDensities:
    t, e, l = params.t, params.eta, params.ell
    n = _harmonics(params)
    a = np.pi * n * t
    sig = -np.exp(
        log_sinh(a)
        + log_sinh(2 * a * e)
        - log_sinh(a * (1 - 4 * l * e))
        - log_sinh(4 * a * l * e)
        - log_cosh(2 * a * e)
    )
    om_m = -2 * sinh_ratio(2 * a * (2 * l - 1) * e, 4 * a * l * e)
    om_p = -2 * sinh_ratio(a * (1 - 2 * (2 * l + 1) * e), a * (1 - 4 * l * e))
    om_0 = 2 * sinh_ratio(2 * a * e, a * (1 - 4 * l * e))
    return ExcitationDensities(
        sigma=_make_density(-1 / (4 * l), sig, "sigma", singular=-1.0),
        omega_minus=_make_density(-(2 * l - 1) / (2 * l), om_m, "omega_minus"),
        omega_plus=_make_density(-1.0, om_p, "omega_plus"),
        omega_zero=_make_density(0.0, om_0, "omega_zero"),
    )


def excitation_residuals(
    params: ModelParams, quad_points: int = DEFAULT_NODES, grid_points: int = 41
) -> dict[str, float]:
    """sup-norm residuals of the four defining integral equations.

    sigma carries -delta; writing sigma = -delta + sigma_r turns its equation
    into 2 pi sigma_r = -K + K * sigma_r, which is what is checked.  The
    omega_0 source is Psi'(x; i(2l+1) eta t) + Psi'(x; i(2l-1) eta t).
    """
    dens = excitation_densities(params)
    t = params.t
    x = _grid(grid_points)
    conv = lambda f: _convolve_kernel(params, f, x, quad_points)  # noqa: E731
    kern = _phi_prime_sum(x, kernel_mus(params), t)
    out = {}
    s = dens.sigma
    out["sigma"] = np.max(np.abs(_TWO_PI * s(x) - (-kern + conv(s))))
    w = dens.omega_minus
    out["omega_minus"] = np.max(np.abs(_TWO_PI * w(x) - conv(w) - _phi_prime_sum(x, minus_string_mus(params), t)))
    w = dens.omega_plus
    out["omega_plus"] = np.max(np.abs(_TWO_PI * w(x) - conv(w) - _phi_prime_sum(x, plus_string_mus(params), t)))
    w = dens.omega_zero
    src = sum(psi_prime_direct(x, mu, t) for mu in parity_minus_mus(params))
    out["omega_zero"] = np.max(np.abs(_TWO_PI * w(x) - conv(w) - src))
    return {k: float(v) for k, v in out.items()}


def uniqueness_integrand(params: ModelParams, which: str, x) -> np.ndarray:
    """omega_+ + 2 eta/(1 - 4 l eta) or omega_0 + 2 eta/(1 - 4 l eta)."""
    dens = excitation_densities(params)
    shift = 2 * params.eta / (1 - 4 * params.ell * params.eta)
    w = {"plus": dens.omega_plus, "zero": dens.omega_zero}[which]
    return w(x) + shift


def uniqueness_kernel_oracle(params: ModelParams, which: str, x) -> np.ndarray:
    """Same functions written through the positivity kernel (fixed sign by construction)."""
    t, e, l = params.t, params.eta, params.ell
    b = t * (1 - 4 * l * e)
    if which == "plus":
        return -positivity_kernel(t * (1 - 2 * (2 * l + 1) * e), b, x)
    return positivity_kernel(2 * e * t, b, x)


# ---------------------------------------------------------------------------
# free energy


def _fe_domain(params: ModelParams, lam: float, form: str) -> None:
    u = lam - params.eta
    if form == "derived":
        width = 2 * params.eta
    elif form == "printed":
        width = (params.two_ell + 1) * params.eta
    else:
        raise ValueError(f"unknown free-energy form {form!r}")
    if not lam > 0:
        raise DomainError(f"free energy needs lambda > 0, got {lam}")
    if not abs(u) < width:
        raise DomainError(f"series diverges: |lambda - eta| = {abs(u):.4g} >= {width:.4g}")


def _fe_coefficients(params: ModelParams, u: float, form: str, n: np.ndarray) -> np.ndarray:
    t, e, l = params.t, params.eta, params.ell
    numer = 1 - 2 * e if form == "derived" else 1 - 4 * l * e
    # sinh(pi n t numer) sinh(2 pi n t u) / (sinh(pi n t) cosh(2 pi n eta t)), overflow-free
    log_mag = (
        log_sinh(np.pi * n * t * numer)
        - log_sinh(np.pi * n * t)
        - log_cosh(_TWO_PI * n * e * t)
    )
    su = np.zeros_like(n) if u == 0 else np.sign(u) * np.exp(log_sinh(_TWO_PI * n * t * u) + log_mag)
    return su / n


def _fe_linear(params: ModelParams, form: str) -> float:
    base = np.pi if form == "derived" else _TWO_PI
    return base * params.t * (1 - 4 * params.ell * params.eta)


def free_energy(params: ModelParams, lam: float, form: str = "derived") -> float:
    """-beta f(lambda) modulo a lambda-independent constant.

    ``form="derived"`` (default):
        log|theta_11(lambda + 2 l eta; tau)| - pi t (lambda - eta)(1 - 4 l eta)
        - sum_n sinh(pi n t (1 - 2 eta)) sinh(2 pi n t (lambda - eta)) / (n sinh(pi n t) cosh(2 pi n eta t)),
    which agrees with the quadrature of log Lambda_1.  ``form="printed"`` keeps
    the linear coefficient 2 pi t (1 - 4 l eta) and the numerator
    sinh(pi n t (1 - 4 l eta)); it differs from the quadrature by a term
    linear in lambda (l = 1/2) or by a nonlinear odd function (l > 1/2).
    """
    _fe_domain(params, lam, form)
    u = lam - params.eta
    n = np.arange(1, _series_length(params, u, form) + 1, dtype=float)
    series = float(np.sum(_fe_coefficients(params, u, form, n)))
    th = theta((1, 1), lam + 2 * params.ell * params.eta, params.tau)
    return float(np.log(abs(th)) - _fe_linear(params, form) * u - series)


def _series_length(params: ModelParams, u: float, form: str) -> int:
    width = 2 * params.eta if form == "derived" else (params.two_ell + 1) * params.eta
    rate = _TWO_PI * params.t * (width - abs(u))
    return int(min(20_000, max(32, math.ceil(40.0 / rate))))


def free_energy_derivative(params: ModelParams, lam: float, form: str = "derived") -> float:
    """d/dlambda of :func:`free_energy`, differentiated term by term."""
    _fe_domain(params, lam, form)
    u = lam - params.eta
    t, e, l = params.t, params.eta, params.ell
    n = np.arange(1, _series_length(params, u, form) + 1, dtype=float)
    numer = 1 - 2 * e if form == "derived" else 1 - 4 * l * e
    log_mag = log_sinh(np.pi * n * t * numer) - log_sinh(np.pi * n * t) - log_cosh(_TWO_PI * n * e * t)
    dseries = float(np.sum(_TWO_PI * t * np.exp(log_cosh(_TWO_PI * n * t * u) + log_mag)))
    dlog = float(np.real(theta11_log_derivative(lam + 2 * l * e, params.tau)))
    return dlog - _fe_linear(params, form) - dseries


def free_energy_quadrature(params: ModelParams, lam: float, nodes: int = DEFAULT_NODES) -> float:
    """Real part of the thermodynamic limit of (1/N) log Lambda_1 at x = i t lambda.

    Sum of log(-2i) + (1/2) log t + (pi/t)(x^2 - 4 l (l+1) eta^2 t^2) + log 2
    + log theta_11(x + 2 i l eta t; i t) + int log(theta_11(x-y-2i eta t)/theta_11(x-y)) rho(y) dy,
    the integral done by the periodic trapezoid rule.  Valid for 0 < lambda < 2 eta.
    """
    t, e, l = params.t, params.eta, params.ell
    if not 0 < lam < 2 * e:
        raise DomainError(f"quadrature form needs 0 < lambda < 2 eta, got {lam}")
    x = 1j * t * lam
    T = 1j * t
    y = _periodic_nodes(nodes)
    rho = ground_density(params)
    integrand = np.log(np.abs(theta((1, 1), x - y - 2j * e * t, T) / theta((1, 1), x - y, T)))
    const = np.log(2.0) + 0.5 * np.log(t) + np.log(2.0)
    quad = (np.pi / t) * (x**2 - 4 * l * (l + 1) * e**2 * t**2)
    return float(const + quad.real + np.log(abs(theta((1, 1), x + 2j * l * e * t, T))) + np.mean(integrand * rho(y)))


def free_energy_spread(params: ModelParams, lams, form: str = "derived", nodes: int = DEFAULT_NODES) -> float:
    """Spread (max - min) of series minus quadrature over a lambda grid; zero when they agree up to a constant."""
    diffs = [free_energy(params, lam, form) - free_energy_quadrature(params, lam, nodes) for lam in lams]
    return float(np.ptp(diffs))


def dominance_log_ratio(params: ModelParams, lam: float, nodes: int = DEFAULT_NODES) -> complex:
    """Thermodynamic limit of (1/N) log(Lambda_1/Lambda_2) at x = i t lambda.

    Principal logarithms are used inside the integral, so only the real part
    and the value modulo 2 pi i are meaningful.  For l > 1/2 the real part
    vanishes (equal magnitudes); for l = 1/2 it is positive for lambda > 0.
    """
    t, e, l = params.t, params.eta, params.ell
    x = 1j * t * lam
    T = 1j * t
    y = _periodic_nodes(nodes)
    rho = ground_density(params)

    def lg(s):
        return np.log(theta((1, 1), x - y - 1j * s * e * t, T) / theta((1, 1), x - y + 1j * s * e * t, T))

    integrand = lg(params.two_ell + 1)
    if params.two_ell > 1:
        integrand = integrand + lg(params.two_ell - 1)
    head = np.log(theta((1, 1), x + 2j * l * e * t, T) / theta((1, 1), x - 2j * l * e * t, T))
    return complex(head + np.mean(integrand * rho(y)))


def dominance_reference_spin_half(params: ModelParams, lam: float) -> complex:
    """-3 pi i/2 - pi i x - i sum sin(2 pi n x)/(n cosh 2 pi n eta t) at x = i t lambda (needs lambda < eta)."""
    t, e = params.t, params.eta
    if not 0 <= lam < e:
        raise DomainError(f"reference series needs 0 <= lambda < eta, got {lam}")
    n = np.arange(1, 4000, dtype=float)
    # sin(2 pi n i t lam) = i sinh(2 pi n t lam)
    terms = np.exp(log_sinh(_TWO_PI * n * t * lam) - log_cosh(_TWO_PI * n * e * t)) / n if lam > 0 else 0 * n
    x = 1j * t * lam
    return complex(-1.5j * np.pi - 1j * np.pi * x + np.sum(terms))


# ---------------------------------------------------------------------------
# string configurations and excited states


@dataclass
class StringConfig:
    """Counts and real centres of strings, keyed by (length, parity)."""

    counts: dict[tuple[int, int], int]
    centers: dict[tuple[int, int], list[float]] = field(default_factory=dict)

    def total_roots(self) -> int:
        return sum(length * cnt for (length, _), cnt in self.counts.items())

    @classmethod
    def ground_state(cls, params: ModelParams) -> "StringConfig":
        return cls({(params.two_ell, +1): params.N // 2})

    @classmethod
    def excited(cls, params: ModelParams, kind: str) -> "StringConfig":
        n2 = params.two_ell
        if kind == "I":
            counts = {(n2, +1): params.N // 2 - 2, (n2 - 1, +1): 1, (n2 + 1, +1): 1}
        elif kind == "II":
            counts = {(n2, +1): params.N // 2 - 1, (n2 - 1, +1): 1, (1, -1): 1}
        else:
            raise PreconditionError(f"unknown excited-state kind {kind!r}")
        return cls({k: v for k, v in counts.items() if k[0] > 0})


@dataclass(frozen=True)
class ExcitedState:
    """Two-hole excited state with holes x1, x2.

    ``x_plus`` / ``x_zero`` are the values listed in the two-particle table;
    ``representative`` is the abscissa that enters the constraint equations
    (they differ by an integer shift of the string, which leaves the Bethe
    vector unchanged).
    """

    variant: str
    x1: float
    x2: float
    x_minus: float
    nu: int
    sigma: float
    x_plus: float | None = None
    x_zero: float | None = None
    representative: float = 0.0
    residual: float = 0.0
    k: int = 0

    @property
    def kind(self) -> str:
        return "I" if self.variant.startswith("I") and not self.variant.startswith("II") else "II"


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise PreconditionError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _gl_integral(f: Callable, a: float, b: float, order: int = 200) -> float:
    nodes, weights = leggauss(order)
    mid, half = (a + b) / 2, (b - a) / 2
    return float(half * np.sum(weights * f(mid + half * nodes)))


def constraint_integral(params: ModelParams, variant: str, x1: float, x2: float, X: float) -> float:
    """LHS + nu-term of the x+ (or x0) equation by Gauss-Legendre quadrature of the closed density."""
    which = "plus" if variant in ("I0", "I1") else "zero"
    nu = _variant_nu(params, variant)[0]
    c = 2 * params.eta / (1 - 4 * params.ell * params.eta)
    val = _gl_integral(lambda y: uniqueness_integrand(params, which, y), -X + x2, X - x1)
    return val + nu * c


def _variant_nu(params: ModelParams, variant: str) -> tuple[int, float, int]:
    """(nu, Sigma, k) for each variant."""
    if variant in ("I0", "II0"):
        return 0, 0.0, 0
    if variant == "II1":
        return 1, -0.5, 0
    k = pow(params.r_prime, -1, params.r)
    nu = k * (params.r // 2 - (params.two_ell + 1) * params.r_prime)
    sigma = (params.two_ell + 1) * k * params.r_prime / 2
    return nu, sigma, k


def solve_excited_state(
    params: ModelParams, variant: str, x1: float, x2: float, grid_points: int = 201
) -> ExcitedState:
    """Fix x_-, x_+ or x_0, nu and Sigma for one of the four two-hole states.

    x_- = (x1 + x2)/2 always.  The x_+ (or x_0) equation
        int_{-X + x2}^{X - x1} (omega(y) + 2 eta/(1 - 4 l eta)) dy = -nu 2 eta/(1 - 4 l eta)
    is solved by bracketing; its integrand must keep one sign, otherwise the
    solution need not be unique and ConsistencyError is raised.
    """
    _check_variant(variant)
    for name, v in (("x1", x1), ("x2", x2)):
        if not -0.5 < v < 0.5:
            raise PreconditionError(f"{name} must lie in (-1/2, 1/2), got {v}")
    which = "plus" if variant in ("I0", "I1") else "zero"
    grid = np.linspace(-0.5, 0.5, grid_points)
    vals = uniqueness_integrand(params, which, grid)
    if not (np.all(vals > 0) or np.all(vals < 0)):
        raise ConsistencyError(f"omega_{which} + 2 eta/(1 - 4 l eta) changes sign; x_{which} is not unique")

    nu, sigma, k = _variant_nu(params, variant)
    centre = (x1 + x2) / 2
    if variant == "I1":
        expected = centre + k * params.r_prime / 2
    elif variant == "II1":
        expected = centre - 0.5
    else:
        expected = centre

    dens = excitation_densities(params)
    w = dens.omega_plus if which == "plus" else dens.omega_zero
    c = 2 * params.eta / (1 - 4 * params.ell * params.eta)

    def g(X):
        return w.antiderivative(X - x1) - w.antiderivative(-X + x2) + 2 * c * X - c * (x1 + x2) + nu * c

    root = brentq(g, expected - 1.0, expected + 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    resid = abs(constraint_integral(params, variant, x1, x2, root))
    if variant == "I1":
        x_plus, x_zero = centre + 0.5, None
    elif variant == "I0":
        x_plus, x_zero = root, None
    elif variant == "II1":
        x_plus, x_zero = None, root + 1.0
    else:
        x_plus, x_zero = None, root
    return ExcitedState(
        variant=variant,
        x1=x1,
        x2=x2,
        x_minus=centre,
        nu=nu,
        sigma=sigma,
        x_plus=x_plus,
        x_zero=x_zero,
        representative=root,
        residual=resid,
        k=k,
    )


def x_minus_residual(params: ModelParams, state: ExcitedState) -> float:
    """int_{-x_- + x2}^{x_- - x1} omega_-(y) dy; zero exactly when x_- = (x1+x2)/2."""
    w = excitation_densities(params).omega_minus
    return abs(_gl_integral(w, -state.x_minus + state.x2, state.x_minus - state.x1))


# ---------------------------------------------------------------------------
# polarization


def _phi_hat(n: np.ndarray, mu: float, t: float, c: float) -> np.ndarray:
    """Coefficient of e^{2 pi i n x} (n >= 1) of Phi(x - c; i mu t) restricted to [-1/2, 1/2]."""
    return -1j * (-1.0) ** n / n + 1j * _c(n, mu, t) * np.exp(-_TWO_PI * 1j * n * c) / n


def _psi_hat(n: np.ndarray, mu: float, t: float, c: float) -> np.ndarray:
    if mu == 0:
        return np.zeros(n.shape, dtype=complex)
    return -1j * _d(n, mu, t) * np.exp(-_TWO_PI * 1j * n * c) / n


def _pol_sources(params: ModelParams, state: ExcitedState):
    """(Phi terms, Psi terms, constant) on the right side of the J equation.

    Each Phi term is (sign, mu, centre).  The hole terms enter as Phi, not
    Phi': only then is the right side of the J equation the difference of the
    two logarithmic Bethe equations it is derived from.
    """
    kmus = kernel_mus(params)
    phis = [(+1, mu, state.x_minus) for mu in minus_string_mus(params)]
    psis = []
    if state.kind == "I":
        phis += [(+1, mu, state.representative) for mu in plus_string_mus(params)]
    else:
        psis += [(+1, mu, state.representative) for mu in parity_minus_mus(params)]
        phis += [(+1, mu, 0.5) for mu in kmus]
    for xa in (state.x1, state.x2):
        phis += [(-1, mu, xa) for mu in kmus]
    const = -8 * np.pi * params.ell * params.eta * (state.nu + 2 * state.sigma)
    return phis, psis, const


def polarization(params: ModelParams, state: ExcitedState) -> FourierDensity:
    """J(x) from the Fourier solution of its integral equation -2 pi J + K * J = R.

    For state I the right side R is periodic and J is a smooth periodic
    function.  For state II R contains -2 pi s x with s = -1 (the net count of
    Phi terms), so J = s x + (periodic part); ``linear_term`` carries s.
    """
    t = params.t
    phis, psis, const = _pol_sources(params, state)
    n = _harmonics(params)
    den = kernel_hat(params, n) - _TWO_PI
    R = np.zeros(n.shape, dtype=complex)
    for sign, mu, c in phis:
        R += sign * _phi_hat(n, mu, t, c)
    for sign, mu, c in psis:
        R += sign * _psi_hat(n, mu, t, c)
    J = R / den
    saw = sum(s for s, _, _ in phis)
    yhat = 1j * (-1.0) ** n / (_TWO_PI * n)  # coefficients of y on [-1/2, 1/2]
    P = J - saw * yhat
    R0 = const + sum(s * _TWO_PI * c for s, _, c in phis)
    J0 = R0 / (kernel_hat(params, np.zeros(1))[0] - _TWO_PI)
    cos_c, _ = _truncate(2 * P.real, 1e-17)
    sin_c, _ = _truncate(-2 * P.imag, 1e-17)
    k = max(cos_c.size, sin_c.size)
    tail = float(np.max(np.abs(P[k:]))) if k < P.size else float(np.abs(P[-1]))
    return FourierDensity(
        constant_term=float(J0),
        coefficients=(2 * P.real)[:k],
        sine_coefficients=(-2 * P.imag)[:k],
        linear_term=float(saw),
        tail_bound=2 * tail,
        label=f"J ({state.variant})",
    )


def polarization_coefficients(params: ModelParams, state: ExcitedState, n) -> np.ndarray:
    """Two-sided J_n (n >= 1) of the generic solution, linear piece included."""
    n = np.atleast_1d(np.asarray(n, dtype=float))
    phis, psis, _ = _pol_sources(params, state)
    R = np.zeros(n.shape, dtype=complex)
    for sign, mu, c in phis:
        R += sign * _phi_hat(n, mu, params.t, c)
    for sign, mu, c in psis:
        R += sign * _psi_hat(n, mu, params.t, c)
    return R / (kernel_hat(params, n) - _TWO_PI)


def polarization_printed(params: ModelParams, state: ExcitedState, n) -> tuple[float, np.ndarray]:
    """(J_0, J_n) from the printed closed forms; J_0 of state II evaluated with its x term dropped."""
    n = np.atleast_1d(np.asarray(n, dtype=float))
    t, e, l = params.t, params.eta, params.ell
    E = lambda y: np.exp(-_TWO_PI * 1j * n * y)  # noqa: E731
    ch2 = 2 * np.cosh(np.minimum(_TWO_PI * n * e * t, 700))
    s1 = sinh_ratio(_TWO_PI * n * (2 * l - 1) * e * t, 4 * np.pi * n * l * e * t)
    s2 = sinh_ratio(np.pi * n * (1 - 2 * (2 * l + 1) * e) * t, np.pi * n * (1 - 4 * l * e) * t)
    holes = E(state.x1) + E(state.x2)
    base = e * (state.nu + 2 * state.sigma) - (2 * l - 1) / (2 * l) * state.x_minus
    if state.kind == "I":
        J0 = base - state.representative + (4 * l - 1) / (4 * l) * (state.x1 + state.x2)
        Jn = s1 / (_TWO_PI * 1j * n) * (E(state.x_minus) - holes / ch2) + s2 / (_TWO_PI * 1j * n) * (
            E(state.representative) - holes / ch2
        )
    else:
        J0 = base - 0.5 + (4 * l - 1) / (4 * l) * (state.x1 + state.x2)
        A = -np.exp(-np.pi * 1j * n) + holes
        inv = np.exp(-log_sinh(np.pi * n * t * (1 - 4 * l * e)))
        Jn = s1 * (E(state.x_minus) - A / ch2 - E(state.representative) * inv) + s2 / ch2 * A
    return float(J0), Jn


def polarization_sum_rhs(params: ModelParams, state: ExcitedState) -> float:
    """Right side of 2l int J dx = ... obtained from the definition of J."""
    l2 = params.two_ell
    if state.kind == "I":
        return state.sigma - (l2 + 1) * state.representative - (l2 - 1) * state.x_minus + l2 * (state.x1 + state.x2)
    return state.sigma - (l2 - 1) * state.x_minus - state.representative - params.ell + l2 * (state.x1 + state.x2)


def polarization_checks(params: ModelParams, state: ExcitedState, nodes: int = DEFAULT_NODES) -> dict[str, float]:
    """Consistency numbers for the polarization of a solved excited state.

    ``sum_rule``: |2l J_0(printed) - (2l int J from the definition)|, which
    vanishes exactly when the polarization sum rule holds.
    ``quadrature``: for state I, |2l int J dx (trapezoid of the generic J) - rhs|.
    ``printed_vs_generic``: max |J_n printed - J_n generic| over the first harmonics.
    """
    J = polarization(params, state)
    n = np.arange(1, 33)
    J0p, Jnp = polarization_printed(params, state, n)
    Jng = polarization_coefficients(params, state, n)
    rhs = polarization_sum_rhs(params, state)
    out = {
        "sum_rule": abs(params.two_ell * J0p - rhs),
        "j0_printed_vs_generic": abs(J0p - J.constant_term),
        "printed_vs_generic": float(np.max(np.abs(Jnp - Jng))),
    }
    if state.kind == "I":
        y = _periodic_nodes(nodes)
        out["quadrature"] = abs(params.two_ell * float(np.mean(J(y))) - rhs)
    return out


# ---------------------------------------------------------------------------
# S matrix

_S_CHAR = {"I0": (1, 1), "I1": (1, 0), "II0": (0, 1), "II1": (0, 0)}
_R_BRANCH = {"I0": "c-b", "I1": "b+c", "II0": "a-d", "II1": "a+d"}
_S_EPS = {"I0": 0, "I1": 1, "II0": 0, "II1": 1}
# sign s_v in S_v(x) = s_v exp(-i log_s_series(x)), chosen so that S(0) is the
# permutation matrix: -1 on the singlet I0, +1 on the triplet I1, II0, II1
_S_SIGN = {"I0": -1.0, "I1": 1.0, "II0": -1.0, "II1": -1.0}

S_NORMALIZATION = (
    "S(0) = P (permutation): eigenvalue -1 on the singlet I0 and +1 on the triplet I1, II0, II1; "
    "the theta-quotient forms are multiplied by -1 to reach this normalization"
)


def _s_terms(n: int, params: ModelParams) -> np.ndarray:
    return np.arange(1, n + 1, dtype=float)


def _s_length(params: ModelParams) -> int:
    rate = np.pi * params.t * min(2 * params.eta, 1 - (4 * params.ell + 2) * params.eta, 1.0)
    return int(min(_N_MAX, max(64, math.ceil(45.0 / rate))))


def log_s_series(params: ModelParams, variant: str, x: float, form: str = "corrected") -> float:
    """i log(+-S(x)) from its Fourier series.

    With ``form="corrected"`` the (2l-1)-string term carries -1/n and the last
    term (the (2l+1)-string for I, the parity-minus one-string for II) carries
    2/n; with these factors the series reproduces the theta-quotient forms.
    ``form="printed"`` uses the series without those factors.
    """
    _check_variant(variant)
    if not -1 < x < 1:
        raise DomainError(f"x must lie in (-1, 1), got {x}")
    t, e, l = params.t, params.eta, params.ell
    n = _s_terms(_s_length(params), params)
    a = (
        sinh_ratio(np.pi * n * t * (1 - 4 * l * e - 2 * e), np.pi * n * t * (1 - 4 * l * e))
        + sinh_ratio(np.pi * n * t * (4 * l * e - 2 * e), 4 * np.pi * n * l * e * t)
    ) * np.exp(-log_cosh(_TWO_PI * n * e * t)) / n
    b = 2 * sinh_ratio(np.pi * n * t * (4 * l * e - 2 * e), 4 * np.pi * n * l * e * t)
    if variant.startswith("II"):
        c = sinh_ratio(_TWO_PI * n * e * t, np.pi * n * t * (1 - 4 * l * e))
        extra = np.pi + np.pi * x
    else:
        c = sinh_ratio(np.pi * n * t * (2 * e - (1 - 4 * l * e)), np.pi * n * t * (1 - 4 * l * e))
        extra = 0.0
    if form == "corrected":
        b, c = -b / n, 2 * c / n
    elif form != "printed":
        raise ValueError(f"unknown series form {form!r}")
    eps = _S_EPS[variant]
    return float(
        np.sum(a * np.sin(_TWO_PI * n * x)) + np.sum(b * np.sin(np.pi * n * x)) + np.sum(c * np.sin(np.pi * n * (x - eps))) + extra
    )


def sbb(params: ModelParams, x, mu: float, method: str = "double_product") -> complex:
    """The factor S(x; mu) with p = e^{-2 pi t}, q = p^eta and x = i lambda t.

    ``double_product`` and ``q_gamma`` are the two product forms; ``series``
    is exp(i sum_n sinh(pi n t (mu - 2 eta)) / (n sinh(pi n t mu) cosh(2 pi n t eta)) sin 2 pi n x),
    the exponent written with the factor i that makes |S| = 1 on the real line.
    """
    t, e = params.t, params.eta
    x = complex(x)
    lam = -1j * x / t
    p = np.exp(-_TWO_PI * t)
    q = p**e
    if method == "series":
        n = np.arange(1, _s_length(params) + 1, dtype=float)
        coef = sinh_ratio(np.pi * n * t * (mu - 2 * e), np.pi * n * t * mu) * np.exp(-log_cosh(_TWO_PI * n * t * e)) / n
        return complex(np.exp(1j * np.sum(coef * np.sin(_TWO_PI * n * x))))
    if method == "double_product":
        P = lambda s: np.exp(-_TWO_PI * t * s)  # noqa: E731  p**s for complex s
        d = lambda z: double_product(z, p**mu, q**4)  # noqa: E731
        num = d(q**4 * P(lam)) * d(P(lam + mu)) * d(q**2 * P(-lam)) * d(q**2 * P(-lam + mu))
        den = d(q**4 * P(-lam)) * d(P(-lam + mu)) * d(q**2 * P(lam)) * d(q**2 * P(lam + mu))
        return complex(num / den)
    if method == "q_gamma":
        Q = q**4
        g = lambda z: q_gamma(z, Q)  # noqa: E731
        f = 4 * e
        val = g(0.5 + lam / f) * g(1 - lam / f) / (g(0.5 - lam / f) * g(1 + lam / f))
        for k in range(1, 10_000):
            a, b = (lam + k * mu) / f, (-lam + k * mu) / f
            term = g(0.5 + a) ** 2 * g(1 + b) * g(b) / (g(0.5 + b) ** 2 * g(1 + a) * g(a))
            val *= term
            if abs(term - 1) < 1e-17:
                break
        return complex(val)
    raise ValueError(f"unknown method {method!r}")


def s0(params: ModelParams, x: float) -> complex:
    """e^{-2 pi i x} theta_11 quotient at modulus 4 l i t eta, divided by S(x; 1-4l eta) S(x; 4l eta).

    The product forms of S equal exp(+i sum ...); the theta-quotient S matrix
    agrees with the series only with both S factors inverted.
    """
    t, e, l = params.t, params.eta, params.ell
    T = 4j * l * t * e
    quo = theta((1, 1), x / 2 - 1j * t * e, T) / theta((1, 1), x / 2 + 1j * t * e, T)
    s = sbb(params, x, 1 - 4 * l * e) * sbb(params, x, 4 * l * e)
    return complex(np.exp(-_TWO_PI * 1j * x) * quo / s)


def s_matrix_closed(params: ModelParams, variant: str, x: float) -> complex:
    """Theta-quotient eigenvalue, permutation-normalized (see S_NORMALIZATION)."""
    _check_variant(variant)
    t, e, l = params.t, params.eta, params.ell
    T = 1j * t * (1 - 4 * l * e)
    ch = _S_CHAR[variant]
    quo = theta(ch, x / 2 - 1j * t * e, T) / theta(ch, x / 2 + 1j * t * e, T)
    return complex(-s0(params, x) * quo)


def s_matrix_eigenvalue(params: ModelParams, variant: str, x: float, method: str = "series") -> complex:
    """S-matrix eigenvalue of a two-particle state, normalized so that S(0) = P."""
    if method == "closed":
        return s_matrix_closed(params, variant, x)
    if method != "series":
        raise ValueError(f"unknown method {method!r}")
    return complex(_S_SIGN[variant] * np.exp(-1j * log_s_series(params, variant, x)))


def s_series_vs_closed(params: ModelParams, variant: str, xs) -> float:
    return float(max(abs(s_matrix_eigenvalue(params, variant, x) - s_matrix_closed(params, variant, x)) for x in xs))


def sbb_three_way(params: ModelParams, x, mu: float) -> float:
    vals = [sbb(params, x, mu, m) for m in ("series", "double_product", "q_gamma")]
    return float(max(abs(a - b) for a in vals for b in vals))


def modified_r_params(params: ModelParams) -> tuple[float, float]:
    """(t', eta') with i t' eta' = i t eta and modulus i t' = i t (1 - 4 l eta)."""
    f = 1 - 4 * params.ell * params.eta
    return params.t * f, params.eta / f


def s_vs_r_ratios(params: ModelParams, x: float) -> dict[str, complex]:
    """S_variant(x) / R-eigenvalue at modulus i t(1 - 4 l eta), lambda = x/(i t')."""
    tp, ep = modified_r_params(params)
    R = r_eigenvalues_direct(x / (1j * tp), ep, tp)
    return {v: s_matrix_closed(params, v, x) / R[_R_BRANCH[v]] for v in VARIANTS}


def s_vs_r_check(params: ModelParams, x_grid) -> float:
    """Max over the grid of the relative spread of the four S/R ratios."""
    worst = 0.0
    for x in x_grid:
        rat = np.array(list(s_vs_r_ratios(params, float(x)).values()))
        spread = float(np.max(np.abs(rat - rat[0])) / abs(rat[0]))
        worst = max(worst, spread)
    return worst
