"""Spin-l representations of the Sklyanin algebra, the L operator and Baxter's R matrix.

The representation space is the (2l+1)-dimensional space of even theta
functions of level 4l,

    Theta_00^{4l+} = { f : f(z+1) = f(-z) = f(z), f(z+tau) = exp(-4 l pi i (2z+tau)) f(z) }.

Operators on it are realised numerically: a function in the space is
identified with its values at 2l+1 generic sample points, and an operator
given as a difference operator is turned into a matrix by evaluating it on
the basis and solving against the Gram matrix of basis values.

Matrices acting on V (x) C^2 are stored as arrays ``L[alpha, beta]`` of shape
``(2, 2, d, d)``, i.e. as 2x2 blocks in the auxiliary space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .elliptic import theta, theta_rational
from .errors import ConfigError, DegenerateBasisError, SingularGaugeError

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# theta characteristic attached to each Sklyanin generator / L weight
WEIGHT_CHARS = ((1, 1), (1, 0), (0, 0), (0, 1))

DEFAULT_RATIONAL = {1: (6, 1), 2: (8, 1)}


@dataclass(frozen=True)
class ModelParams:
    """Parameters (l, t, eta = r'/r) of the model and the number N of columns."""

    two_ell: int
    t: float = 2.0
    r: int = 6
    r_prime: int = 1
    N: int = 2

    def __post_init__(self):
        if not isinstance(self.two_ell, (int, np.integer)) or self.two_ell < 1:
            raise ConfigError(f"2l must be a positive integer, got {self.two_ell}")
        if not self.t > 0:
            raise ConfigError(f"t must be positive, got {self.t}")
        if self.r <= 0 or self.r % 2 != 0 or self.r_prime % 2 != 1:
            raise ConfigError(
                f"invalid (r, r') = ({self.r}, {self.r_prime}): r is even, r′ is odd "
                "(r must be a positive even integer and r′ an odd integer)"
            )
        if math.gcd(self.r, self.r_prime) != 1:
            raise ConfigError(f"r and r′ must be coprime, got ({self.r}, {self.r_prime})")
        if not 2 * (self.two_ell + 1) * self.r_prime / self.r < 1:
            raise ConfigError(
                f"eta = {self.r_prime}/{self.r} violates 2(2l+1) eta < 1 for 2l = {self.two_ell}"
            )
        if self.r_prime <= 0:
            raise ConfigError("r′ must be positive so that 0 < eta")
        if self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}")
        if (self.N * self.two_ell) % 2 != 0:
            raise ConfigError(f"N l must be an integer, got N = {self.N}, l = {self.two_ell}/2")

    @property
    def ell(self) -> float:
        return self.two_ell / 2

    @property
    def eta(self) -> float:
        return self.r_prime / self.r

    @property
    def tau(self) -> complex:
        return 1j / self.t

    @property
    def M(self) -> int:
        return self.N * self.two_ell // 2

    @property
    def dim(self) -> int:
        return self.two_ell + 1

    def with_sites(self, N: int) -> "ModelParams":
        return ModelParams(self.two_ell, self.t, self.r, self.r_prime, N)

    @classmethod
    def default(cls, two_ell: int, N: int | None = None, t: float = 2.0) -> "ModelParams":
        """Default rational eta for a given spin: 1/6 for l = 1/2, 1/8 for l = 1,
        and the largest admissible 1/r with r even otherwise."""
        if two_ell in DEFAULT_RATIONAL:
            r, rp = DEFAULT_RATIONAL[two_ell]
        else:
            r = 2 * (two_ell + 1) + 2
            r += r % 2
            rp = 1
        if N is None:
            N = 2 if two_ell % 2 else 1
        return cls(two_ell, t, r, rp, N)


# ---------------------------------------------------------------------------
# the space Theta_00^{4l+}


def _level_theta(j: int, level: int, z: np.ndarray, tau: complex) -> np.ndarray:
    """sum_n exp(level pi i (n + j/level)^2 tau + 2 level pi i (n + j/level) z)."""
    return theta_rational(j / level, 0.0, level * z, level * tau)


@dataclass
class ThetaSpaceBasis:
    """A basis of Theta_00^{4l+} together with sample points and their Gram matrix."""

    two_ell: int
    tau: complex
    sample_points: np.ndarray
    gram: np.ndarray = field(repr=False)
    condition: float = 0.0

    @property
    def dim(self) -> int:
        return self.two_ell + 1

    def evaluate(self, z) -> np.ndarray:
        """Matrix of basis values, shape (len(z), dim)."""
        return evaluate_basis(self.two_ell, self.tau, z)

    def coordinates(self, values: np.ndarray) -> np.ndarray:
        """Coefficients of the function taking ``values`` at the sample points."""
        return np.linalg.solve(self.gram, values)

    def expand(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return self.coordinates(func(self.sample_points))

    def membership_residual(self, func: Callable[[np.ndarray], np.ndarray], coeffs: np.ndarray, points) -> float:
        """Relative mismatch between ``func`` and its expansion at extra points."""
        pts = np.asarray(points, dtype=complex)
        want = func(pts)
        got = self.evaluate(pts) @ coeffs
        return float(np.max(np.abs(want - got)) / max(np.max(np.abs(want)), 1e-300))

    def operator_matrix(self, op: Callable[[int, np.ndarray], np.ndarray]) -> np.ndarray:
        """Matrix of a linear operator given by ``op(j, z) = (A f_j)(z)``."""
        cols = [self.coordinates(op(j, self.sample_points)) for j in range(self.dim)]
        return np.stack(cols, axis=1)


def evaluate_basis(two_ell: int, tau: complex, z) -> np.ndarray:
    """Values of the symmetrised level-4l theta constituents.

    f_j = theta_j + theta_{4l-j} for 0 < j < 2l, while f_0 = theta_0 and
    f_{2l} = theta_{2l} are already even.
    """
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    level = 2 * two_ell
    cols = []
    for j in range(two_ell + 1):
        v = _level_theta(j, level, zz, tau)
        if 0 < j < two_ell:
            v = v + _level_theta(j, level, -zz, tau)
        cols.append(v)
    return np.stack(cols, axis=-1)


def build_basis(two_ell: int, tau: complex, seed: int = 20240601, max_tries: int = 50) -> ThetaSpaceBasis:
    """Pick seeded random sample points with a well-conditioned Gram matrix."""
    if two_ell < 1:
        raise ConfigError("2l must be at least 1")
    tau = complex(tau)
    rng = np.random.default_rng(seed)
    d = two_ell + 1
    for _ in range(max_tries):
        pts = rng.uniform(-0.45, 0.45, d) + 1j * rng.uniform(-0.2, 0.2, d) * tau.imag
        # keep away from zeros of theta_11(2z), i.e. 2z in Z + tau Z
        if np.min(np.abs(theta((1, 1), 2 * pts, tau))) < 1e-3:
            continue
        gram = evaluate_basis(two_ell, tau, pts)
        cond = float(np.linalg.cond(gram))
        if cond < 1e8:
            return ThetaSpaceBasis(two_ell, tau, pts, gram, cond)
    raise DegenerateBasisError(f"no well-conditioned sample set found for 2l = {two_ell}")


# ---------------------------------------------------------------------------
# generators


def _s_function(a: int, z: np.ndarray, eta: float, tau: complex) -> np.ndarray:
    ch = WEIGHT_CHARS[a]
    pref = theta(ch, eta, tau)
    if a == 2:
        pref = 1j * pref
    return pref * theta(ch, 2 * z, tau)


def spin_rep(params: ModelParams, basis: ThetaSpaceBasis) -> np.ndarray:
    """Matrices of rho^l(S^a), a = 0..3, stacked into shape (4, d, d).

    (rho(S^a) f)(z) = [s_a(z - l eta) f(z + eta) - s_a(-z - l eta) f(z - eta)] / theta_11(2z)
    """
    ell, eta, tau = params.ell, params.eta, params.tau
    pts = basis.sample_points
    fp = basis.evaluate(pts + eta)
    fm = basis.evaluate(pts - eta)
    den = theta((1, 1), 2 * pts, tau)
    mats = []
    for a in range(4):
        sp = _s_function(a, pts - ell * eta, eta, tau)
        sm = _s_function(a, -pts - ell * eta, eta, tau)
        vals = (sp[:, None] * fp - sm[:, None] * fm) / den[:, None]
        mats.append(basis.coordinates(vals))
    return np.stack(mats)


def apply_generator(params: ModelParams, a: int, func: Callable, z) -> np.ndarray:
    """Apply the difference operator rho(S^a) to an arbitrary function at points z."""
    ell, eta, tau = params.ell, params.eta, params.tau
    zz = np.asarray(z, dtype=complex)
    num = _s_function(a, zz - ell * eta, eta, tau) * func(zz + eta) - _s_function(
        a, -zz - ell * eta, eta, tau
    ) * func(zz - eta)
    return num / theta((1, 1), 2 * zz, tau)


def structure_constants(eta: float, tau: complex) -> dict[tuple[int, int], complex]:
    t00, t01, t10, t11 = (theta(c, eta, tau) for c in ((0, 0), (0, 1), (1, 0), (1, 1)))
    return {
        (1, 2): t01**2 * t11**2 / (t00**2 * t10**2),
        (2, 3): t10**2 * t11**2 / (t00**2 * t01**2),
        (3, 1): -(t00**2) * t11**2 / (t01**2 * t10**2),
    }


def sklyanin_residuals(S: np.ndarray, eta: float, tau: complex, index: str = "cyclic") -> dict[str, float]:
    """Residuals of the two families of quadratic relations for every cyclic (alpha, beta, gamma).

        [S^alpha, S^0]_-    = -i J_{beta gamma} [S^beta, S^gamma]_+
        [S^alpha, S^beta]_- =  i [S^0, S^gamma]_+

    ``index="printed"`` attaches J_{alpha beta} to the first family instead.
    That variant holds only where both sides vanish separately (spin 1/2) and
    is kept to document the discrepancy.  Residuals are normalised by the
    largest generator norm squared.
    """
    J = structure_constants(eta, tau)
    scale = max(np.linalg.norm(s) for s in S) ** 2
    comm = lambda A, B: A @ B - B @ A  # noqa: E731
    anti = lambda A, B: A @ B + B @ A  # noqa: E731
    out = {}
    for al, be, ga in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        key = (be, ga) if index == "cyclic" else (al, be)
        r1 = comm(S[al], S[0]) + 1j * J[key] * anti(S[be], S[ga])
        r2 = comm(S[al], S[be]) - 1j * anti(S[0], S[ga])
        out[f"[S{al},S0]+iJ{key[0]}{key[1]}[S{be},S{ga}]"] = float(np.linalg.norm(r1) / scale)
        out[f"[S{al},S{be}]-i[S0,S{ga}]"] = float(np.linalg.norm(r2) / scale)
    return out


def pauli_scalar(eta: float, tau: complex) -> complex:
    """The common scalar relating rho^{1/2}(S^a) to sigma^a in the standard basis."""
    t = lambda c, z: theta(c, z, tau)  # noqa: E731
    return (
        2
        * t((0, 0), eta)
        * t((0, 1), eta)
        * t((1, 0), eta)
        * t((1, 1), eta)
        / (t((0, 0), 0) * t((0, 1), 0) * t((1, 0), 0))
    )


# basis (theta_00(2z;2tau) - theta_10(2z;2tau), theta_00(2z;2tau) + theta_10(2z;2tau))
# expressed in the coordinates of evaluate_basis(1, .)
PAULI_BASIS_CHANGE = np.array([[1, 1], [-1, 1]], dtype=complex)


def pauli_residual(S: np.ndarray, eta: float, tau: complex) -> float:
    """Max deviation of P^{-1} S^a P from kappa sigma^a (spin 1/2 only), relative to kappa."""
    if S.shape[1] != 2:
        raise ValueError("Pauli comparison needs the spin-1/2 representation")
    P = PAULI_BASIS_CHANGE
    Pinv = np.linalg.inv(P)
    kappa = pauli_scalar(eta, tau)
    return float(max(np.max(np.abs(Pinv @ S[a] @ P - kappa * PAULI[a])) for a in range(4)) / abs(kappa))


# ---------------------------------------------------------------------------
# L and R


def l_weights(lam: complex, eta: float, tau: complex) -> np.ndarray:
    w = []
    for ch in WEIGHT_CHARS:
        den = theta(ch, eta, tau)
        if abs(den) == 0:
            raise SingularGaugeError("theta(eta) vanishes in an L weight")
        w.append(theta(ch, lam, tau) / den)
    return np.array(w)


def build_L(params: ModelParams, S: np.ndarray, lam: complex) -> np.ndarray:
    """L(lam) = sum_a W_a(lam) rho(S^a) (x) sigma^a as blocks ``L[alpha, beta]`` of shape (2, 2, d, d)."""
    w = l_weights(lam, params.eta, params.tau)
    return np.einsum("a,aij,akl->ijkl", w, PAULI, S)


def blocks_to_matrix(L: np.ndarray) -> np.ndarray:
    """Flatten auxiliary blocks into a matrix on V (x) C^2 (quantum factor first)."""
    d = L.shape[2]
    return np.einsum("ijkl->kilj", L).reshape(2 * d, 2 * d)


def r_weights(lam: complex, eta: float, t: float) -> np.ndarray:
    return l_weights(lam + eta, eta, 1j / t)


def build_R(lam: complex, eta: float, t: float) -> np.ndarray:
    """Baxter's R matrix sum_a W_a(lam + eta) sigma^a (x) sigma^a, a 4x4 array."""
    w = r_weights(lam, eta, t)
    return sum(w[a] * np.kron(PAULI[a], PAULI[a]) for a in range(4))


def r_abcd(lam: complex, eta: float, t: float) -> tuple[complex, complex, complex, complex]:
    """Entries a, b, c, d of the R matrix in its theta-product form at modulus 2it."""
    T = 2j * t
    th = lambda c, z: theta(c, z, T)  # noqa: E731
    x = 1j * t * lam
    e = 2j * t * eta
    c1 = -2 * np.exp(-np.pi * t * lam * (lam + 2 * eta)) / (th((0, 1), 0) * th((0, 1), e) * th((1, 1), e))
    a = c1 * th((0, 1), e) * th((0, 1), x) * th((1, 1), x + e)
    b = c1 * th((1, 1), e) * th((0, 1), x) * th((0, 1), x + e)
    c = c1 * th((0, 1), e) * th((1, 1), x) * th((0, 1), x + e)
    d = c1 * th((1, 1), e) * th((1, 1), x) * th((1, 1), x + e)
    return complex(a), complex(b), complex(c), complex(d)


def build_R_abcd(lam: complex, eta: float, t: float) -> np.ndarray:
    a, b, c, d = r_abcd(lam, eta, t)
    return np.array([[a, 0, 0, d], [0, c, b, 0], [0, b, c, 0], [d, 0, 0, a]], dtype=complex)


def r_eigenvalues_closed(lam: complex, eta: float, t: float) -> dict[str, complex]:
    """Closed theta-quotient forms of the eigenvalues of the abcd matrix.

    Keys refer to the entries a, b, c, d of the weight-sum matrix
    :func:`build_R`, which is minus the theta-product matrix
    :func:`build_R_abcd`.  The antisymmetric singlet has eigenvalue c - b.
    """
    T = 1j * t
    th = lambda c, z: theta(c, z, T)  # noqa: E731
    u = 1j * t * lam / 2
    e = 1j * t * eta
    c2 = (
        2
        * np.exp(-np.pi * t * lam * (lam + 2 * eta))
        * th((0, 0), u + e)
        * th((0, 1), u + e)
        * th((1, 0), u + e)
        * th((1, 1), u + e)
        / (th((0, 0), e) * th((0, 1), e) * th((1, 0), e) * th((1, 1), e))
    )
    return {
        "a+d": c2 * th((0, 0), u - e) / th((0, 0), u + e),
        "a-d": c2 * th((0, 1), u - e) / th((0, 1), u + e),
        "b+c": c2 * th((1, 0), u - e) / th((1, 0), u + e),
        "c-b": c2 * th((1, 1), u - e) / th((1, 1), u + e),
    }


def r_eigenvalues_direct(lam: complex, eta: float, t: float) -> dict[str, complex]:
    """Eigenvalues of :func:`build_R` read off from its entries."""
    R = build_R(lam, eta, t)
    a, d, c, b = R[0, 0], R[0, 3], R[1, 1], R[1, 2]
    return {"a+d": a + d, "a-d": a - d, "b+c": b + c, "c-b": c - b}


def rll_residual(params: ModelParams, S: np.ndarray, lam: complex, mu: complex) -> float:
    """Relative Frobenius residual of R12(lam-mu) L01(lam) L02(mu) = L02(mu) L01(lam) R12(lam-mu).

    Space 0 is the quantum space, spaces 1 and 2 are auxiliary copies of C^2.
    Operators are assembled on C^2 (x) C^2 (x) V with V last.
    """
    d = S.shape[1]
    R = build_R(lam - mu, params.eta, params.t)
    La = build_L(params, S, lam)
    Lb = build_L(params, S, mu)
    I2 = np.eye(2)
    # L01 acts on aux 1 and V: sum over blocks placed on the first factor
    L01 = sum(np.kron(np.kron(np.outer(I2[i], I2[j]), I2), La[i, j]) for i in range(2) for j in range(2))
    L02 = sum(np.kron(np.kron(I2, np.outer(I2[i], I2[j])), Lb[i, j]) for i in range(2) for j in range(2))
    R12 = np.kron(R, np.eye(d))
    lhs = R12 @ L01 @ L02
    rhs = L02 @ L01 @ R12
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300))


# ---------------------------------------------------------------------------
# parity operators


def parity_ops(params: ModelParams, basis: ThetaSpaceBasis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrices of U_1, U_2 = U_3 U_1 and U_3 on the representation space.

    (U_1 f)(z) = e^{pi i l} f(z + 1/2),
    (U_3 f)(z) = e^{pi i l} e^{pi i l (4z + tau)} f(z + tau/2).
    """
    ell, tau = params.ell, params.tau
    pts = basis.sample_points
    ph = np.exp(1j * np.pi * ell)
    u1 = basis.coordinates(ph * basis.evaluate(pts + 0.5))
    fac = ph * np.exp(1j * np.pi * ell * (4 * pts + tau))
    u3 = basis.coordinates(fac[:, None] * basis.evaluate(pts + tau / 2))
    return u1, u3 @ u1, u3
