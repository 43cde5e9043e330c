"""Intertwining vectors, gauge matrices and the face (SOS) weights.

Heights are integers k; a pair (k, k') is admissible when
k - k' is one of -2l, -2l+2, ..., 2l.  Auxiliary-space indices
epsilon = -1, +1 are stored as array positions 0, 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import theta
from .errors import PreconditionError, SingularGaugeError
from .sklyanin import ModelParams, ThetaSpaceBasis, build_L


@dataclass(frozen=True)
class GaugeParams:
    s_plus: complex = 0.31 + 0.17j
    s_minus: complex = -0.23 + 0.11j

    def w(self, params: ModelParams, k: float) -> complex:
        """w_k = (s_+ + s_-)/2 + 2 k eta - tau/2; k may be half-integral."""
        return (self.s_plus + self.s_minus) / 2 + 2 * k * params.eta - params.tau / 2

    def validate(self, params: ModelParams, tol: float = 1e-8) -> None:
        """Check theta_11(w_k) != 0 for every k (and half-integral k) modulo r."""
        for k2 in range(2 * params.r):
            val = theta((1, 1), self.w(params, k2 / 2), params.tau)
            if abs(val) < tol:
                raise SingularGaugeError(f"theta_11(w_{k2 / 2}) vanishes for s = {self}")


DEFAULT_GAUGE = GaugeParams()

_IDX = {-1: 0, 1: 1}


def admissible(params: ModelParams, k: int, kp: int) -> bool:
    diff = k - kp
    return abs(diff) <= params.two_ell and (diff - params.two_ell) % 2 == 0


def _check_pair(params: ModelParams, k: int, kp: int) -> None:
    if not admissible(params, k, kp):
        raise PreconditionError(f"height pair ({k}, {kp}) is not admissible for 2l = {params.two_ell}")


# ---------------------------------------------------------------------------
# intertwining vectors


def intertwining_prefactor(
    params: ModelParams, gauge: GaugeParams, k: int, kp: int, base_variant: str = "consistent"
) -> complex:
    """a_{k,k'} = e^{2 pi i l (k+k') eta} B^{(k-k')/2} with a principal-branch power.

    The base B = -e^{pi i (s_+ - s_-)} is the one for which the four face
    weights, taken literally, satisfy the vertex-face relation with the gauge
    matrices of :func:`gauge_matrix`.  ``base_variant="printed"`` uses
    B = i t^{-1/2} e^{pi i (s_+ - s_-)} instead; with that choice the (-1, +1)
    and (+1, -1) relations are off by the constants (i t^{1/2})^{-1} and
    i t^{1/2} respectively.
    """
    phase = np.exp(1j * np.pi * (gauge.s_plus - gauge.s_minus))
    if base_variant == "printed":
        base = 1j * params.t**-0.5 * phase
    elif base_variant == "consistent":
        base = -phase
    else:
        raise ValueError(f"unknown base variant {base_variant!r}")
    return complex(np.exp(2j * np.pi * params.ell * (k + kp) * params.eta) * base ** ((k - kp) / 2))


def intertwining_function(params: ModelParams, gauge: GaugeParams, k: int, kp: int, lam: complex = 0.0):
    """The theta-product phi_{k,k'}(lam; s) as a callable of z."""
    _check_pair(params, k, kp)
    ell, eta, tau = params.ell, params.eta, params.tau
    n_plus = (params.two_ell + (k - kp)) // 2
    n_minus = (params.two_ell - (k - kp)) // 2
    shifts = [(gauge.s_plus - lam) / 2 + tau / 4 + (kp - ell + 2 * j - 1) * eta for j in range(1, n_plus + 1)]
    shifts += [(gauge.s_minus + lam) / 2 + tau / 4 + (k - ell + 2 * j - 1) * eta for j in range(1, n_minus + 1)]
    pref = intertwining_prefactor(params, gauge, k, kp)

    def f(z):
        zz = np.asarray(z, dtype=complex)
        out = np.full(zz.shape, pref, dtype=complex)
        for c in shifts:
            out = out * theta((0, 0), zz + c, tau) * theta((0, 0), zz - c, tau)
        return out

    return f


def intertwining_vector(
    params: ModelParams, basis: ThetaSpaceBasis, gauge: GaugeParams, k: int, kp: int, lam: complex = 0.0
) -> np.ndarray:
    """Coefficients of phi_{k,k'}(lam; s) in the basis of the representation space."""
    return basis.expand(intertwining_function(params, gauge, k, kp, lam))


# ---------------------------------------------------------------------------
# gauge matrices and weights


def gauge_matrix(params: ModelParams, gauge: GaugeParams, k: int, lam: complex) -> np.ndarray:
    """M_k(lam; s) as the product of its three printed factors."""
    t, eta = params.t, params.eta
    T = 2j * t
    up = gauge.s_plus - lam + 2 * k * eta
    um = gauge.s_minus + lam + 2 * k * eta
    first = np.array(
        [
            [theta((1, 1), -1j * t * up, T), theta((1, 1), -1j * t * um, T)],
            [theta((0, 1), -1j * t * up, T), theta((0, 1), -1j * t * um, T)],
        ]
    )
    second = np.diag(
        [
            np.exp(-np.pi * t / 2 * (up - 0.5j / t) ** 2),
            np.exp(-np.pi * t / 2 * (um - 0.5j / t) ** 2),
        ]
    )
    th_w = theta((1, 1), gauge.w(params, k), params.tau)
    if abs(th_w) < 1e-300:
        raise SingularGaugeError(f"theta_11(w_{k}) vanishes")
    third = np.diag([1.0, 1.0 / th_w])
    return first @ second @ third


def sos_weight(params: ModelParams, gauge: GaugeParams, k: int, kp: int, eps: int, eps_p: int, lam: complex) -> complex:
    """Face weight W[(k, k') -> (k + eps, k' + eps')](lam)."""
    tau, eta, ell = params.tau, params.eta, params.ell
    th = lambda z: theta((1, 1), z, tau)  # noqa: E731
    w = lambda m: gauge.w(params, m)  # noqa: E731
    d = k - kp
    if (eps, eps_p) == (-1, -1):
        return 2 * th(lam + d * eta) * th(w((k + kp + 2 * ell) / 2)) / th(w(k))
    if (eps, eps_p) == (-1, 1):
        return 2 * th((kp - k - 2 * ell) * eta) * th(w((k + kp) / 2) + lam) / (th(w(k)) * th(w(kp)))
    if (eps, eps_p) == (1, -1):
        return 2 * th((k - kp - 2 * ell) * eta) * th(w((k + kp) / 2) - lam)
    if (eps, eps_p) == (1, 1):
        return 2 * th(lam - d * eta) * th(w((k + kp - 2 * ell) / 2)) / th(w(kp))
    raise PreconditionError(f"eps, eps' must be +-1, got ({eps}, {eps_p})")


def sos_weight_matrix(params: ModelParams, gauge: GaugeParams, k: int, kp: int, lam: complex) -> np.ndarray:
    """All four weights arranged as W[idx(eps), idx(eps')]."""
    out = np.empty((2, 2), dtype=complex)
    for e, i in _IDX.items():
        for ep, j in _IDX.items():
            out[i, j] = sos_weight(params, gauge, k, kp, e, ep, lam)
    return out


def twist(blocks: np.ndarray, m_left: np.ndarray, m_right: np.ndarray) -> np.ndarray:
    """M_left^{-1} X M_right for an operator stored as auxiliary 2x2 blocks."""
    inv = np.linalg.inv(m_left)
    return np.einsum("ia,ab...,bj->ij...", inv, blocks, m_right)


def twisted_L(params: ModelParams, S: np.ndarray, gauge: GaugeParams, k: int, kp: int, lam: complex) -> np.ndarray:
    """L_{k,k'}(lam; s) = M_k^{-1} L(lam) M_{k'} as blocks of shape (2, 2, d, d)."""
    Mk = gauge_matrix(params, gauge, k, lam)
    Mkp = gauge_matrix(params, gauge, kp, lam)
    if abs(np.linalg.det(Mk)) < 1e-300:
        raise SingularGaugeError(f"M_{k} is singular")
    return twist(build_L(params, S, lam), Mk, Mkp)


def vertex_face_residuals(
    params: ModelParams,
    basis: ThetaSpaceBasis,
    S: np.ndarray,
    gauge: GaugeParams,
    k: int,
    kp: int,
    lam: complex,
) -> dict[tuple[int, int], float]:
    """Relative residuals of L_{k,k'}(eps, eps') phi_{k,k'} = W phi_{k+eps, k'+eps'} for all four (eps, eps').

    Each residual is normalised by the norm of the left-hand side plus the
    norm of the right-hand side, so a vanishing weight still gives a
    meaningful (absolute-scale) number.
    """
    Lt = twisted_L(params, S, gauge, k, kp, lam)
    phi = intertwining_vector(params, basis, gauge, k, kp)
    scale = np.linalg.norm(phi) * max(np.max(np.abs(Lt)), 1e-300)
    out = {}
    for e, i in _IDX.items():
        for ep, j in _IDX.items():
            lhs = Lt[i, j] @ phi
            if admissible(params, k + e, kp + ep):
                rhs = sos_weight(params, gauge, k, kp, e, ep, lam) * intertwining_vector(
                    params, basis, gauge, k + e, kp + ep
                )
            else:
                rhs = np.zeros_like(lhs)
            out[(e, ep)] = float(np.linalg.norm(lhs - rhs) / scale)
    return out
