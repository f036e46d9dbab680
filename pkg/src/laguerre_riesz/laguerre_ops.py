"""Heat kernels of the Laguerre operator and their derivative kernels.

Everything here is built from the one-dimensional kernel

    p_t(x, y) = 2 sqrt(r x y) / (1 - r) exp(-(1+r)/(2(1-r)) (x^2 + y^2))
                I_nu(2 sqrt(r) x y / (1 - r)),      r = exp(-4 t),

evaluated in log space with the scaled Bessel function so that nothing
overflows for small ``t`` or large ``x y``.

Derivatives ``delta_nu^k p_t`` are expanded symbolically.  With
``E = 1 - A = -2r/(1-r)`` and ``B = 2 sqrt(r)/(1-r)`` one application of
``delta_nu = d/dx + x - (nu + 1/2)/x`` maps

    x^a y^b E^e B^s p^(nu+m)  ->  (a + m) x^(a-1) y^b E^e B^s p^(nu+m)
                                  + x^(a+1) y^b E^(e+1) B^s p^(nu+m)
                                  + x^a y^(b+1) E^e B^(s+1) p^(nu+m+1),

so ``delta^k p_t`` is a finite sum of such monomials with integer
coefficients that do not depend on ``nu``.
"""

import math
from functools import lru_cache
from itertools import product as iproduct
from typing import NamedTuple

import numpy as np
from numba import njit

from .special_fn import ive_scalar, laguerre_fn_table

__all__ = [
    "ConvergenceError",
    "GammaExponents",
    "as_nu",
    "as_multi_index",
    "gamma_nu",
    "sigma_of_k",
    "p_range",
    "heat_kernel_1d",
    "heat_kernel_nd",
    "delta_heat_kernel_1d",
    "delta_k_heat_kernel_1d",
    "delta_k_heat_kernel_nd",
    "delta_k_log_abs_1d",
    "delta_k_terms",
    "dual_delta_heat_kernel_1d",
    "time_derivative_heat_kernel",
    "eigenvalue",
]


class ConvergenceError(ArithmeticError):
    """A truncated expansion or quadrature did not reach its tolerance."""


class GammaExponents(NamedTuple):
    per_coordinate: tuple
    max: float


def as_nu(nu):
    """Validate an order vector; scalars become length-one tuples."""
    vals = tuple(float(v) for v in np.atleast_1d(np.asarray(nu, dtype=float)))
    if not vals:
        raise ValueError("nu must have at least one entry")
    for v in vals:
        if not v > -1:
            raise ValueError(f"every nu entry must exceed -1, got {v}")
    return vals


def as_multi_index(k):
    vals = np.atleast_1d(np.asarray(k))
    out = []
    for v in vals:
        if float(v) != int(v) or int(v) < 0:
            raise ValueError(f"multi-index entries must be nonnegative integers, got {v}")
        out.append(int(v))
    if not out:
        raise ValueError("multi-index must have at least one entry")
    return tuple(out)


def _gamma_1(v):
    return -0.5 - v if v < -0.5 else 0.0


def gamma_nu(nu):
    """Per-coordinate exponents ``(-1/2 - nu_j)_+`` and their maximum."""
    nu = as_nu(nu)
    per = tuple(_gamma_1(v) for v in nu)
    return GammaExponents(per, max(per))


def sigma_of_k(k):
    """Parity vector of a multi-index."""
    return tuple(v % 2 for v in as_multi_index(k))


def p_range(nu, k):
    """Open interval ``(1/(1-gamma_nu), 1/gamma_{nu+sigma(k)})``; 1/0 is inf."""
    nu = as_nu(nu)
    k = as_multi_index(k)
    if len(nu) != len(k):
        raise ValueError("nu and k must have the same length")
    g = gamma_nu(nu).max
    shifted = tuple(v + s for v, s in zip(nu, sigma_of_k(k)))
    gs = gamma_nu(shifted).max
    return 1.0 / (1.0 - g), (math.inf if gs == 0 else 1.0 / gs)


def eigenvalue(k, nu):
    """``4|k| + 2|nu| + 2n`` for the tensor basis function ``phi_k^nu``."""
    k = as_multi_index(k)
    nu = as_nu(nu)
    return 4.0 * sum(k) + 2.0 * sum(nu) + 2.0 * len(nu)


# --- scalar kernels (numba) -------------------------------------------------

@njit(cache=True)
def _time_logs(t):
    # log r, log(1 - r), log(1 - sqrt r), log(1 + sqrt r)
    lr = -4.0 * t
    l1r = math.log(-math.expm1(lr))
    l1s = math.log(-math.expm1(0.5 * lr))
    lps = math.log1p(math.exp(0.5 * lr))
    return lr, l1r, l1s, lps


@njit(cache=True)
def _log_prefactor(t, x, y):
    # log of p_t / (e^{-z} I(z)), shared by every order
    lr, l1r, l1s, lps = _time_logs(t)
    amp = (1.0 + math.exp(lr)) / (-math.expm1(lr))
    d = x - y
    return (math.log(2.0) + 0.5 * lr - l1r + 0.5 * math.log(x * y)
            - 0.5 * amp * d * d - x * y * math.exp(l1s - lps))


@njit(cache=True)
def _bessel_arg(t, x, y):
    lr, l1r, _, _ = _time_logs(t)
    return math.exp(math.log(2.0) + 0.5 * lr - l1r + math.log(x * y))


@njit(cache=True)
def log_heat_1d(nu, t, x, y):
    z = _bessel_arg(t, x, y)
    return _log_prefactor(t, x, y) + math.log(ive_scalar(nu, z))


@njit(cache=True)
def delta_k_log_abs(nu, t, x, y, coef, pa, pb, pe, ps, pm):
    """Return ``(sign, log|value|)`` of a symbolic delta^k kernel sum."""
    lr, l1r, _, _ = _time_logs(t)
    log_e = math.log(2.0) + lr - l1r          # |E|, E < 0
    log_b = math.log(2.0) + 0.5 * lr - l1r
    lx = math.log(x)
    ly = math.log(y)
    z = _bessel_arg(t, x, y)
    mmax = 0
    for i in range(pm.size):
        if pm[i] > mmax:
            mmax = pm[i]
    log_iv = np.empty(mmax + 1)
    for m in range(mmax + 1):
        v = ive_scalar(nu + m, z)
        log_iv[m] = math.log(v) if v > 0 else -math.inf
    nterm = coef.size
    logs = np.empty(nterm)
    big = -math.inf
    for i in range(nterm):
        li = (math.log(abs(coef[i])) + pa[i] * lx + pb[i] * ly
              + pe[i] * log_e + ps[i] * log_b + log_iv[pm[i]])
        logs[i] = li
        if li > big:
            big = li
    if big == -math.inf:
        return 0.0, -math.inf
    acc = 0.0
    for i in range(nterm):
        s = 1.0 if coef[i] > 0 else -1.0
        if pe[i] % 2 == 1:
            s = -s
        acc += s * math.exp(logs[i] - big)
    if acc == 0.0:
        return 0.0, -math.inf
    sign = 1.0 if acc > 0 else -1.0
    return sign, big + math.log(abs(acc)) + _log_prefactor(t, x, y)


@njit(cache=True)
def delta_k_value(nu, t, x, y, coef, pa, pb, pe, ps, pm):
    s, la = delta_k_log_abs(nu, t, x, y, coef, pa, pb, pe, ps, pm)
    if s == 0.0:
        return 0.0
    return s * math.exp(la)


@njit(cache=True)
def _dual_value(nu, t, x, y):
    # delta*_nu p^{nu+1} = (1+A) x p^{nu+1} - B y p^{nu}, 1 + A = 2/(1-r)
    lr, l1r, _, _ = _time_logs(t)
    z = _bessel_arg(t, x, y)
    lp = _log_prefactor(t, x, y)
    a = math.exp(math.log(2.0) - l1r + math.log(x) + lp) * ive_scalar(nu + 1.0, z)
    b = math.exp(math.log(2.0) + 0.5 * lr - l1r + math.log(y) + lp) * ive_scalar(nu, z)
    return a - b


# --- symbolic expansion ------------------------------------------------------

@lru_cache(maxsize=None)
def delta_k_terms(k):
    """Monomial expansion of ``delta_nu^k p_t^nu``.

    Returns
    -------
    tuple of ndarray
        ``(coef, a, b, e, s, m)``: each term is
        ``coef * x^a * y^b * E^e * B^s * p_t^(nu+m)``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    terms = {(0, 0, 0, 0, 0): 1}
    for _ in range(k):
        new = {}
        for (a, b, e, s, m), c in terms.items():
            for key, val in (((a - 1, b, e, s, m), c * (a + m)),
                             ((a + 1, b, e + 1, s, m), c),
                             ((a, b + 1, e, s + 1, m + 1), c)):
                if val:
                    new[key] = new.get(key, 0) + val
        terms = {key: c for key, c in new.items() if c}
    keys = sorted(terms)
    coef = np.array([float(terms[q]) for q in keys])
    cols = np.array(keys, dtype=np.int64).reshape(len(keys), 5)
    arrs = (coef,) + tuple(np.ascontiguousarray(cols[:, i]) for i in range(5))
    for arr in arrs:
        arr.setflags(write=False)
    return arrs


# --- public wrappers ---------------------------------------------------------

def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("t must be positive")
    return t


def _check_xy(*arrs):
    for a in arrs:
        if np.any(~(np.asarray(a) > 0)):
            raise ValueError("spatial points must lie in the open orthant")


def _broadcast_apply(fn, *arrays):
    b = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in arrays])
    out = np.empty(b[0].shape)
    flat = [v.ravel() for v in b]
    of = out.ravel()
    for i in range(of.size):
        of[i] = fn(*[v[i] for v in flat])
    return float(out) if out.ndim == 0 else out


def heat_kernel_1d(nu, t, x, y):
    """One-dimensional heat kernel ``p_t^nu(x, y)``; broadcasts over inputs."""
    as_nu(nu)
    _check_t(t)
    _check_xy(x, y)
    return _broadcast_apply(lambda n, tt, xx, yy: math.exp(log_heat_1d(n, tt, xx, yy)),
                            nu, t, x, y)


def _nd_args(nu, x, y):
    nu = as_nu(nu)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if y.ndim == 0:
        y = y.reshape(1)
    if x.shape[-1] != len(nu) or y.shape[-1] != len(nu):
        raise ValueError("dimension mismatch between nu and the points")
    return nu, x, y


def heat_kernel_nd(nu, t, x, y):
    """Product kernel ``prod_j p_t^{nu_j}(x_j, y_j)``; points have shape (..., n)."""
    nu, x, y = _nd_args(nu, x, y)
    val = 1.0
    for j, v in enumerate(nu):
        val = val * heat_kernel_1d(v, t, x[..., j], y[..., j])
    return val


def delta_heat_kernel_1d(nu, t, x, y):
    """``delta_nu p_t^nu(x, y) = (x - A x) p^nu + B y p^(nu+1)``."""
    return delta_k_heat_kernel_1d(nu, 1, t, x, y)


def delta_k_log_abs_1d(nu, k, t, x, y):
    """Sign and log-magnitude of ``delta_nu^k p_t^nu``; no underflow."""
    as_nu(nu)
    _check_t(t)
    _check_xy(x, y)
    terms = delta_k_terms(int(k))
    b = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in (t, x, y)])
    sign = np.empty(b[0].shape)
    la = np.empty(b[0].shape)
    sf, lf = sign.ravel(), la.ravel()
    tf, xf, yf = (v.ravel() for v in b)
    for i in range(sf.size):
        sf[i], lf[i] = delta_k_log_abs(float(nu), tf[i], xf[i], yf[i], *terms)
    return sign, la


def delta_k_heat_kernel_1d(nu, k, t, x, y):
    """``delta_nu^k p_t^nu(x, y)`` with ``delta_nu`` acting on ``x``.

    The same ``nu`` is used in every factor of the composition.
    """
    sign, la = delta_k_log_abs_1d(nu, k, t, x, y)
    with np.errstate(under="ignore"):
        out = sign * np.exp(la)
    return float(out) if out.ndim == 0 else out


def delta_k_heat_kernel_nd(nu, k, t, x, y):
    """Tensorised ``prod_j delta_{nu_j}^{k_j} p_t^{nu_j}(x_j, y_j)``."""
    nu, x, y = _nd_args(nu, x, y)
    k = as_multi_index(k)
    if len(k) != len(nu):
        raise ValueError("dimension mismatch between nu and k")
    val = 1.0
    for j, (v, kj) in enumerate(zip(nu, k)):
        val = val * delta_k_heat_kernel_1d(v, kj, t, x[..., j], y[..., j])
    return val


def dual_delta_heat_kernel_1d(nu, t, x, y):
    """``delta*_nu p_t^(nu+1)(x, y)`` with ``delta*_nu = -d/dx + x - (nu+1/2)/x``.

    Uses the reduced form ``(1 + A) x p^(nu+1) - B y p^nu``; the ``1/x``
    terms cancel through the three-term order identity.
    """
    as_nu(nu)
    _check_t(t)
    _check_xy(x, y)
    return _broadcast_apply(_dual_value, nu, t, x, y)


def _spectral_derivs(nu, ell, t, x, y, tol, kmax):
    # d^m/dt^m sum_k e^{-t lam_k} phi_k(x) phi_k(y), m = 0..ell, one coordinate
    lam0 = 2.0 * nu + 2.0
    n_need = 0
    while True:
        lam = 4.0 * n_need + lam0
        if n_need > 4 and lam ** ell * math.exp(-t * lam) < tol * 1e-3 and lam * t > ell:
            break
        n_need += 1
        if n_need > kmax:
            raise ConvergenceError(
                f"spectral sum needs more than {kmax} terms at t={t}")
    ks = np.arange(n_need + 1)
    lam = 4.0 * ks + lam0
    tx = laguerre_fn_table(n_need, nu, x)
    ty = laguerre_fn_table(n_need, nu, y)
    base = np.exp(-t * lam)[:, None] * tx * ty
    return [(((-lam) ** m)[:, None] * base).sum(axis=0) for m in range(ell + 1)]


def time_derivative_heat_kernel(nu, ell, t, x, y, tol=1e-12, kmax=2048):
    """``d^ell/dt^ell p_t^nu(x, y)`` from the truncated eigen-expansion.

    Parameters
    ----------
    nu : sequence of float
    ell : int
        Order of the time derivative.
    t : float
    x, y : array_like, shape (..., n)
    tol : float
        Size of the first neglected eigen-term relative to which the sum is
        truncated.
    kmax : int
        Largest degree per coordinate; exceeding it raises
        :class:`ConvergenceError`.
    """
    nu, x, y = _nd_args(nu, x, y)
    _check_t(t)
    _check_xy(x, y)
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    shape = x.shape[:-1]
    xs = x.reshape(-1, len(nu))
    ys = y.reshape(-1, len(nu))
    per = [_spectral_derivs(v, ell, float(t), xs[:, j], ys[:, j], tol, kmax)
           for j, v in enumerate(nu)]
    total = np.zeros(xs.shape[0])
    # Leibniz rule over the coordinates
    for split in iproduct(range(ell + 1), repeat=len(nu)):
        if sum(split) != ell:
            continue
        mult = math.factorial(ell)
        term = np.ones(xs.shape[0])
        for j, m in enumerate(split):
            mult //= math.factorial(m)
            term = term * per[j][m]
        total += mult * term
    total = total.reshape(shape)
    return float(total) if total.ndim == 0 else total
