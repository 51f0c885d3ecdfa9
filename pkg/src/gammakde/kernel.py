"""The two-branch gamma kernel and its derivative in the evaluation point.

As a function of the data coordinate t, the kernel is a gamma density
with scale b and shape

    rho(x, b) = x/b               if x >= 2b   (interior branch)
    rho(x, b) = (x/(2b))^2 + 1    if x in [0, 2b)  (boundary branch)

so it integrates to one over [0, inf) and puts no weight on the negative
axis. The two branches agree at x = 2b where both give shape 2.
"""

import numpy as np
from scipy.special import gammaln

from .special import digamma

__all__ = ["rho", "kernel_eval", "log_kernel_eval", "l_term", "kernel_grad_x"]


def _validate_point(x, b):
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0):
        raise ValueError("evaluation coordinate x must be finite and >= 0")
    if np.any(~np.isfinite(b)) or np.any(b <= 0.0):
        raise ValueError("bandwidth b must be finite and > 0")
    return x, b


def rho(x, b):
    """Shape parameter of the kernel and the branch it was taken from.

    Returns ``(rho, interior)`` where ``interior`` is True on the
    x >= 2b branch. Works elementwise on arrays.
    """
    x, b = _validate_point(x, b)
    interior = x >= 2.0 * b
    r = np.where(interior, x / b, (x / (2.0 * b)) ** 2 + 1.0)
    if r.ndim == 0:
        return float(r), bool(interior)
    return r, interior


def log_kernel_eval(t, x, b):
    """Log of the kernel, with the t = 0 limit handled explicitly.

    At t = 0 the kernel is 0 for shape > 1 and 1/b for shape = 1 (which
    occurs only at x = 0); the log is -inf and -ln b respectively.
    """
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0):
        raise ValueError("kernel argument t must be finite and >= 0")
    x, b = _validate_point(x, b)
    r = np.where(x >= 2.0 * b, x / b, (x / (2.0 * b)) ** 2 + 1.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.log(t)
        out = (r - 1.0) * logt - t / b - r * np.log(b) - gammaln(r)
    # t == 0: (r-1)*log(0) is -inf for r > 1 but nan for r == 1
    zero_t = t == 0.0
    if np.any(zero_t):
        out = np.where(zero_t & (r == 1.0), -np.log(b), out)
        out = np.where(zero_t & (r > 1.0), -np.inf, out)
    return float(out) if out.ndim == 0 else out


def kernel_eval(t, x, b):
    """K_{rho(x,b),b}(t) = t^(rho-1) exp(-t/b) / (b^rho Gamma(rho)).

    Computed in log space; t = 0 returns the exact limit.
    """
    out = np.exp(log_kernel_eval(t, x, b))
    return float(out) if np.ndim(out) == 0 else out


def l_term(t, x, b):
    """L(t, x, b) = ln t - ln b - Psi(rho(x, b)).

    The factor turning the kernel into its own x-derivative. Requires
    t > 0 (log singularity at 0).
    """
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t <= 0.0):
        raise ValueError("l_term requires t > 0")
    x, b = _validate_point(x, b)
    r = np.where(x >= 2.0 * b, x / b, (x / (2.0 * b)) ** 2 + 1.0)
    out = np.log(t) - np.log(b) - digamma(r)
    return float(out) if np.ndim(out) == 0 else out


def grad_prefactor(x, b):
    """d(rho)/dx over the two branches: 1/b interior, x/(2 b^2) boundary."""
    x, b = _validate_point(x, b)
    out = np.where(x >= 2.0 * b, 1.0 / b, x / (2.0 * b**2))
    return float(out) if out.ndim == 0 else out


def kernel_grad_x(t, x, b):
    """Partial derivative of the kernel in the evaluation coordinate x.

    Interior branch: (1/b) K L; boundary branch: (x/(2 b^2)) K L with the
    boundary shape and L. Requires t > 0.
    """
    out = grad_prefactor(x, b) * kernel_eval(t, x, b) * l_term(t, x, b)
    return float(out) if np.ndim(out) == 0 else out
