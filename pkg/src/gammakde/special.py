"""Scalar special functions backing the gamma kernel and its expansions.

All gamma-function arithmetic is done in log space: the kernel shape
parameter grows like x/b and direct evaluation of Gamma overflows long
before the bandwidths of interest are reached.
"""

import numpy as np
from scipy.special import gammaln

__all__ = ["log_gamma", "digamma", "stirling_ratio"]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

# Shift argument above this value before applying the asymptotic series;
# the series error is O(z^-8), below 1e-10 from z = 10 on.
_DIGAMMA_SHIFT = 10.0


def _check_positive(z, name="z"):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)) or np.any(z <= 0.0):
        raise ValueError(f"{name} must be finite and strictly positive")
    return z


def log_gamma(z):
    """ln Gamma(z) for z > 0.

    Accepts scalars or arrays. Raises ValueError on non-finite or
    non-positive input.
    """
    z = _check_positive(z)
    out = gammaln(z)
    return float(out) if out.ndim == 0 else out


def digamma(z):
    """Psi(z), the logarithmic derivative of Gamma, for z > 0.

    Uses the recurrence Psi(z) = Psi(z+1) - 1/z to shift the argument
    above 10, then the asymptotic expansion

        Psi(z) = ln z - 1/(2z) - 1/(12 z^2) + 1/(120 z^4) - 1/(252 z^6)

    whose remainder is O(z^-8). Absolute error is below 1e-10 for
    z >= 1e-3.
    """
    z = _check_positive(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).astype(float).copy()
    acc = np.zeros_like(z)

    n_shifts = int(np.max(np.ceil(np.maximum(_DIGAMMA_SHIFT - z, 0.0))))
    for _ in range(n_shifts):
        below = z < _DIGAMMA_SHIFT
        if not np.any(below):
            break
        acc[below] -= 1.0 / z[below]
        z[below] += 1.0

    inv2 = 1.0 / (z * z)
    series = (
        np.log(z)
        - 0.5 / z
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
    )
    out = acc + series
    return float(out[0]) if scalar else out


def stirling_ratio(z):
    """R(z) = sqrt(2*pi) * exp(-z) * z**(z + 1/2) / Gamma(z + 1).

    Monotonically increasing on (0, inf), bounded by 1, and tending to 1
    as z -> inf. Evaluated in log space.
    """
    z = _check_positive(z)
    log_r = _LOG_SQRT_2PI - z + (z + 0.5) * np.log(z) - gammaln(z + 1.0)
    out = np.exp(log_r)
    return float(out) if out.ndim == 0 else out
