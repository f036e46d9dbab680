"""Special functions behind every kernel formula in the package.

The modified Bessel function is only ever needed in the exponentially
scaled form ``exp(-z) I_alpha(z)``; the heat kernels multiply it by
Gaussians that would overflow otherwise.  Laguerre functions are evaluated
through a normalised three-term recurrence with a running log-scale so that
degrees in the hundreds are safe at any ``x``.
"""

import math

import numpy as np
from numba import njit, vectorize
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "gamma_fn",
    "bessel_i_scaled",
    "laguerre_poly",
    "laguerre_fn",
    "laguerre_fn_table",
    "laguerre_fn_nd",
    "gauss_laguerre_rule",
]

# Switch point between the power series and the large-argument expansion.
SERIES_LIMIT = 40.0


def gamma_fn(x):
    """Gamma function with an explicit domain error at the poles."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"gamma_fn: pole at x={x}")
    return math.gamma(x)


@njit(cache=True)
def _ive_series(alpha, z):
    # Sum with a unit leading term and a separate log offset; the terms
    # themselves may span far more than the double range.
    lt = alpha * math.log(0.5 * z) - math.lgamma(alpha + 1.0) - z
    term = 1.0
    total = 1.0
    q = 0.25 * z * z
    m = 1
    while m < 100000:
        term *= q / (m * (m + alpha))
        total += term
        if term < 1e-18 * total:
            break
        if total > 1e250:
            term *= 1e-250
            total *= 1e-250
            lt += 250.0 * math.log(10.0)
        m += 1
    return math.exp(lt + math.log(total))


@njit(cache=True)
def _ive_asymptotic(alpha, z):
    mu = 4.0 * alpha * alpha
    term = 1.0
    total = 1.0
    prev = 1.0
    k = 1
    while k < 500:
        term *= -(mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * z)
        a = abs(term)
        if a > prev:
            break
        total += term
        if a < 1e-17 * abs(total):
            break
        prev = a
        k += 1
    return total / math.sqrt(2.0 * math.pi * z)


@njit(cache=True)
def ive_scalar(alpha, z):
    """``exp(-z) I_alpha(z)`` for ``alpha > -1`` and ``z >= 0`` (no checks)."""
    if z == 0.0:
        if alpha == 0.0:
            return 1.0
        if alpha > 0.0:
            return 0.0
        return math.inf
    if z > SERIES_LIMIT and z > alpha * alpha:
        return _ive_asymptotic(alpha, z)
    return _ive_series(alpha, z)


@vectorize(["float64(float64, float64)"], cache=True)
def _ive_ufunc(alpha, z):
    return ive_scalar(alpha, z)


def bessel_i_scaled(alpha, z):
    """Exponentially scaled modified Bessel function ``exp(-z) I_alpha(z)``.

    Parameters
    ----------
    alpha : float or array_like
        Order, must satisfy ``alpha > -1``.
    z : float or array_like
        Nonnegative argument.  Any finite size is fine; the scaled value
        never overflows.

    Returns
    -------
    float or ndarray
        Broadcast result.  At ``z = 0`` the value is 1 for ``alpha = 0``,
        0 for ``alpha > 0`` and ``inf`` for ``-1 < alpha < 0``.
    """
    a = np.asarray(alpha, dtype=float)
    zz = np.asarray(z, dtype=float)
    if np.any(a <= -1):
        raise ValueError("bessel_i_scaled: order must exceed -1")
    if np.any(zz < 0):
        raise ValueError("bessel_i_scaled: argument must be nonnegative")
    out = _ive_ufunc(a, zz)
    return float(out) if out.ndim == 0 else out


def laguerre_poly(k, nu, u):
    """Generalised Laguerre polynomial ``L_k^nu(u)`` by forward recurrence."""
    if k < 0:
        raise ValueError("laguerre_poly: degree must be nonnegative")
    u = np.asarray(u, dtype=float)
    prev = np.ones_like(u)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + nu - u
    for j in range(2, k + 1):
        prev, cur = cur, ((2 * j - 1 + nu - u) * cur - (j - 1 + nu) * prev) / j
    return cur if cur.ndim else float(cur)


def _check_nu(nu):
    if not nu > -1:
        raise ValueError(f"order nu={nu} must exceed -1")


def laguerre_fn_table(kmax, nu, x):
    """All Laguerre functions ``phi_0^nu .. phi_kmax^nu`` at points ``x``.

    Returns an array of shape ``(kmax + 1,) + x.shape``.

    The recurrence runs on the normalised polynomials with a per-point
    log-scale that absorbs ``x**(nu+1/2) exp(-x**2/2)``; rescaling keeps the
    mantissa representable, so large degrees and large ``x`` do not
    overflow or lose everything to underflow.
    """
    _check_nu(nu)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("laguerre_fn_table: x must be positive")
    shape = x.shape
    xf = x.ravel()
    u = xf * xf
    out = np.empty((kmax + 1, xf.size))
    logscale = (0.5 * math.log(2.0) + (nu + 0.5) * np.log(xf) - 0.5 * u
                - 0.5 * math.lgamma(nu + 1.0))
    prev = np.zeros_like(xf)
    cur = np.ones_like(xf)
    out[0] = np.exp(logscale)
    for k in range(1, kmax + 1):
        a = (2 * k - 1 + nu - u) / math.sqrt(k * (k + nu))
        b = math.sqrt((k - 1) * (k - 1 + nu) / (k * (k + nu))) if k > 1 else 0.0
        prev, cur = cur, a * cur - b * prev
        big = np.abs(cur) > 1e100
        if np.any(big):
            cur[big] *= 1e-100
            prev[big] *= 1e-100
            logscale[big] += 100 * math.log(10.0)
        with np.errstate(under="ignore"):
            out[k] = cur * np.exp(logscale)
    return out.reshape((kmax + 1,) + shape)


def laguerre_fn(k, nu, x):
    """Normalised Laguerre function ``phi_k^nu(x)`` on ``x > 0``.

    ``phi_k^nu(x) = sqrt(2 k!/Gamma(k+nu+1)) L_k^nu(x^2) x^(nu+1/2) e^(-x^2/2)``,
    an orthonormal basis of ``L^2(0, inf)``.
    """
    if k < 0:
        raise ValueError("laguerre_fn: degree must be nonnegative")
    vals = laguerre_fn_table(k, nu, x)[k]
    return vals if vals.ndim else float(vals)


def laguerre_fn_nd(k, nu, x):
    """Tensor-product Laguerre function ``prod_j phi_{k_j}^{nu_j}(x_j)``.

    ``x`` has shape ``(..., n)``; ``k`` and ``nu`` have length ``n``.
    """
    k = tuple(int(v) for v in np.atleast_1d(k))
    nu = tuple(float(v) for v in np.atleast_1d(nu))
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if not (len(k) == len(nu) == x.shape[-1]):
        raise ValueError("laguerre_fn_nd: dimension mismatch between k, nu and x")
    val = np.ones(x.shape[:-1])
    for j, (kj, nj) in enumerate(zip(k, nu)):
        val = val * laguerre_fn(kj, nj, x[..., j])
    return val if val.ndim else float(val)


def gauss_laguerre_rule(npts, nu, scale=1.0):
    """Quadrature on ``(0, inf)`` matched to the ``phi^nu`` basis.

    Nodes are ``x_i = sqrt(u_i / scale)`` with ``u_i`` the zeros of
    ``L_npts^nu``; weights are the inverse Christoffel sums
    ``1 / sum_{k<npts} phi_k(x_i)^2`` (rescaled).  With ``scale = 1`` the
    rule integrates ``phi_j^nu phi_k^nu`` exactly for ``j + k < 2 npts``.
    A different ``scale`` adapts the rule to integrands decaying like
    ``exp(-scale x^2)``.

    Returns
    -------
    x, w : ndarray
        Nodes and weights with ``sum(w * f(x)) ~ int_0^inf f(x) dx``.
    """
    _check_nu(nu)
    j = np.arange(npts)
    diag = 2.0 * j + nu + 1.0
    off = np.sqrt(j[1:] * (j[1:] + nu))
    u = eigh_tridiagonal(diag, off, eigvals_only=True)
    u = np.clip(u, 1e-300, None)
    # Newton polish on L_npts^nu through the normalised recurrence.
    for _ in range(2):
        lo, hi = _laguerre_pair(npts, nu, u)
        du = u * hi / (npts * hi - math.sqrt(npts * (npts + nu)) * lo)
        u = u - du
    x = np.sqrt(u)
    table = laguerre_fn_table(npts - 1, nu, x)
    w = 1.0 / np.sum(table * table, axis=0)
    if scale != 1.0:
        # int f(x) dx = (1/s) int f(y/s) dy
        s = math.sqrt(scale)
        x = x / s
        w = w / s
    return x, w


def _laguerre_pair(n, nu, u):
    # Normalised (L_{n-1}, L_n) up to a common positive factor.
    prev = np.zeros_like(u)
    cur = np.ones_like(u)
    for k in range(1, n + 1):
        a = (2 * k - 1 + nu - u) / math.sqrt(k * (k + nu))
        b = math.sqrt((k - 1) * (k - 1 + nu) / (k * (k + nu))) if k > 1 else 0.0
        prev, cur = cur, a * cur - b * prev
        big = np.abs(cur) > 1e100
        if np.any(big):
            cur[big] *= 1e-100
            prev[big] *= 1e-100
    return prev, cur
