"""Small numerical helpers shared by the series-based modules.

Hyperbolic ratios such as sinh(a n)/sinh(b n) overflow quickly when evaluated
naively, so everything here works with logarithms of the hyperbolic factors.
"""

from __future__ import annotations

import numpy as np

_LOG2 = np.log(2.0)


def log_sinh(a: np.ndarray) -> np.ndarray:
    """log|sinh a| for real a != 0, stable for large |a|."""
    a = np.abs(np.asarray(a, dtype=float))
    return a + np.log1p(-np.exp(-2.0 * a)) - _LOG2


def log_cosh(a: np.ndarray) -> np.ndarray:
    a = np.abs(np.asarray(a, dtype=float))
    return a + np.log1p(np.exp(-2.0 * a)) - _LOG2


def sinh_ratio(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sinh(a)/sinh(b) for real b > 0, computed without overflow.

    Entries with a == 0 return exactly 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    out = np.zeros(a.shape)
    nz = a != 0
    out[nz] = np.sign(a[nz]) * np.exp(log_sinh(a[nz]) - log_sinh(b[nz]))
    return out


def geometric_cutoff(coeffs: np.ndarray, tol: float) -> tuple[int, float]:
    """Pick a truncation for a geometrically decaying coefficient list.

    ``coeffs[k]`` is the coefficient of harmonic ``k + 1``.  Returns the
    number of harmonics kept and an estimate of the discarded tail, using the
    ratio of the last two retained magnitudes as the decay rate.
    """
    mags = np.abs(np.asarray(coeffs))
    if mags.size == 0:
        return 0, 0.0
    above = np.nonzero(mags >= tol)[0]
    n_keep = int(above[-1]) + 2 if above.size else 1
    n_keep = min(n_keep, mags.size)
    if n_keep >= mags.size:
        tail = float(mags[-1])
    else:
        last = mags[n_keep - 1]
        prev = mags[n_keep - 2] if n_keep >= 2 else 1.0
        rate = min(last / prev, 0.99) if prev > 0 else 0.0
        tail = float(mags[n_keep] / (1.0 - rate)) if rate < 1 else float("inf")
    return n_keep, tail
