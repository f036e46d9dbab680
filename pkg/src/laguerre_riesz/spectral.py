"""Truncated Laguerre expansions, functional calculus and Riesz transforms.

The Riesz transform of order ``k`` is ``R_k = delta_nu^k L_nu^{-|k|/2}``.
Two independent representations are provided:

* a spectral one, exact for ``k`` in ``{0, 1}^n`` where ``delta_nu^k`` maps
  each basis function to a single shifted basis function;
* a kernel one through the heat semigroup,
  ``R_k = Gamma(|k|/2)^{-1} int_0^inf t^{|k|/2} delta_nu^k e^{-tL} dt/t``.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import roots_legendre

from .laguerre_ops import (
    ConvergenceError, as_multi_index, as_nu, delta_k_log_abs, delta_k_terms,
)
from .special_fn import gauss_laguerre_rule, laguerre_fn_table

__all__ = [
    "SpectralCoeffs",
    "SingularityError",
    "BasisMismatchError",
    "RieszMatrix01",
    "analyze",
    "synthesize",
    "apply_heat",
    "apply_neg_power",
    "eigenvalues",
    "pair",
    "riesz_matrix_01",
    "riesz_kernel",
    "riesz_kernel_matrix_1d",
    "riesz_apply",
    "diagonal_coefficient",
    "quadrature_grid",
]

DEFAULT_CUTOFF = 128


class SingularityError(ArithmeticError):
    """Kernel evaluated on its singular set."""


class BasisMismatchError(ValueError):
    """Coefficient arrays tagged with different bases were combined."""


@dataclass(frozen=True)
class SpectralCoeffs:
    """Coefficients ``<f, phi_alpha^nu>`` for ``alpha_j <= cutoff``."""

    nu: tuple
    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self):
        nu = as_nu(self.nu)
        object.__setattr__(self, "nu", nu)
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.cutoff + 1,) * len(nu):
            raise ValueError(f"coefficient shape {c.shape} does not match "
                             f"cutoff {self.cutoff} in dimension {len(nu)}")
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self):
        return len(self.nu)

    def with_coeffs(self, c):
        return SpectralCoeffs(self.nu, self.cutoff, c)

    def norm(self):
        return float(np.sqrt(np.sum(self.coeffs ** 2)))


def pair(a, b):
    """Inner product of two expansions in the same basis."""
    if a.nu != b.nu or a.cutoff != b.cutoff:
        raise BasisMismatchError(f"cannot pair basis nu={a.nu} with nu={b.nu}")
    return float(np.sum(a.coeffs * b.coeffs))


def eigenvalues(nu, cutoff):
    """Array of ``4|alpha| + 2|nu| + 2n`` over the coefficient grid."""
    nu = as_nu(nu)
    grids = np.meshgrid(*[np.arange(cutoff + 1)] * len(nu), indexing="ij")
    return 4.0 * sum(grids) + 2.0 * sum(nu) + 2.0 * len(nu)


def quadrature_grid(nu, npts):
    """Tensor Gauss-Laguerre nodes (shape ``(npts**n, n)``) and weights."""
    nu = as_nu(nu)
    rules = [gauss_laguerre_rule(npts, v) for v in nu]
    xs = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    ws = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    pts = np.stack([g.ravel() for g in xs], axis=-1)
    w = np.prod([g.ravel() for g in ws], axis=0)
    return pts, w


def _coeffs_from_values(nu, cutoff, npts, vals):
    rules = [gauss_laguerre_rule(npts, v) for v in nu]
    tables = [laguerre_fn_table(cutoff, v, r[0]) * r[1] for v, r in zip(nu, rules)]
    c = vals.reshape((npts,) * len(nu))
    for j, tab in enumerate(tables):
        # contract the j-th grid axis against the weighted table
        c = np.tensordot(tab, c, axes=([1], [j]))
        c = np.moveaxis(c, 0, j)
    return c


def analyze(f, nu, cutoff=DEFAULT_CUTOFF, npts=None, check=True, tol=1e-9):
    """Expansion coefficients of ``f`` in the ``phi^nu`` basis.

    Parameters
    ----------
    f : callable or ndarray
        Either a vectorised function of points with shape ``(m, n)``, or
        the values of ``f`` on ``quadrature_grid(nu, npts)``.
    nu : sequence of float
    cutoff : int
        Largest degree per coordinate.
    npts : int, optional
        Quadrature nodes per coordinate; defaults to ``cutoff + 64``.
    check : bool
        For callables, recompute with 32 more nodes and raise
        :class:`ConvergenceError` if the coefficients move by more than
        ``tol`` (relative to the largest one).
    """
    nu = as_nu(nu)
    npts = cutoff + 64 if npts is None else int(npts)
    if callable(f):
        pts, _ = quadrature_grid(nu, npts)
        c = _coeffs_from_values(nu, cutoff, npts, np.asarray(f(pts), dtype=float))
        if check:
            pts2, _ = quadrature_grid(nu, npts + 32)
            c2 = _coeffs_from_values(nu, cutoff, npts + 32,
                                     np.asarray(f(pts2), dtype=float))
            scale = max(np.max(np.abs(c2)), 1e-300)
            if np.max(np.abs(c - c2)) > tol * scale:
                raise ConvergenceError("analyze: quadrature did not converge")
    else:
        vals = np.asarray(f, dtype=float)
        if vals.size != npts ** len(nu):
            raise ValueError("grid values do not match the quadrature grid")
        c = _coeffs_from_values(nu, cutoff, npts, vals)
    return SpectralCoeffs(nu, cutoff, c)


def synthesize(c, x):
    """Evaluate ``sum_alpha c_alpha phi_alpha^nu`` at points ``x`` (shape (m, n))."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and c.n == 1:
        x = x[:, None]
    if x.shape[-1] != c.n:
        raise ValueError("dimension mismatch between points and coefficients")
    lead = x.shape[:-1]
    xf = x.reshape(-1, c.n)
    tables = [laguerre_fn_table(c.cutoff, v, xf[:, j]) for j, v in enumerate(c.nu)]
    acc = c.coeffs
    # contract one coordinate at a time, keeping the point axis last
    out = np.tensordot(acc, tables[0], axes=([0], [0]))  # (..., m)
    for tab in tables[1:]:
        out = np.einsum("a...m,am->...m", out, tab)
    return out.reshape(lead)


def apply_heat(c, t):
    """Multiply each coefficient by ``exp(-t lambda_alpha)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return c.with_coeffs(c.coeffs * np.exp(-t * eigenvalues(c.nu, c.cutoff)))


def apply_neg_power(c, s, a=0.0):
    """Multiply each coefficient by ``(lambda_alpha + a)^(-s)``."""
    if s < 0 or a < 0:
        raise ValueError("s and a must be nonnegative")
    return c.with_coeffs(c.coeffs * (eigenvalues(c.nu, c.cutoff) + a) ** (-s))


@dataclass(frozen=True)
class RieszMatrix01:
    """Exact matrix of ``delta_nu^k L_nu^{-|k|/2}`` for ``k`` in ``{0,1}^n``.

    Basis function ``alpha`` (order ``nu``) maps to basis function
    ``alpha - k`` (order ``nu + k``) with coefficient
    ``(-2)^|k| sqrt(prod_{k_j=1} alpha_j) / lambda_alpha^{|k|/2}``.
    """

    nu: tuple
    k: tuple

    @property
    def target_nu(self):
        return tuple(v + kj for v, kj in zip(self.nu, self.k))

    def coefficients(self, cutoff):
        """Array over source indices; zero where ``alpha_j = 0 < k_j``."""
        grids = np.meshgrid(*[np.arange(cutoff + 1)] * len(self.nu), indexing="ij")
        lam = eigenvalues(self.nu, cutoff)
        prod = np.ones_like(lam)
        for g, kj in zip(grids, self.k):
            if kj:
                prod = prod * g
        order = sum(self.k)
        return (-2.0) ** order * np.sqrt(prod) / lam ** (order / 2)

    def entries(self, cutoff):
        """List of ``(source, target, coefficient)`` with nonzero coefficient."""
        coef = self.coefficients(cutoff)
        out = []
        for idx in zip(*np.nonzero(coef)):
            tgt = tuple(int(i - kj) for i, kj in zip(idx, self.k))
            out.append((tuple(int(i) for i in idx), tgt, float(coef[idx])))
        return out

    def apply(self, c):
        if c.nu != self.nu:
            raise BasisMismatchError(f"matrix expects basis nu={self.nu}, got {c.nu}")
        coef = self.coefficients(c.cutoff) * c.coeffs
        out = coef
        for j, kj in enumerate(self.k):
            if kj:
                out = np.roll(out, -1, axis=j)
                sl = [slice(None)] * len(self.k)
                sl[j] = -1
                out[tuple(sl)] = 0.0
        return SpectralCoeffs(self.target_nu, c.cutoff, out)

    def apply_transpose(self, c):
        if c.nu != self.target_nu:
            raise BasisMismatchError(
                f"transpose expects basis nu={self.target_nu}, got {c.nu}")
        out = c.coeffs
        for j, kj in enumerate(self.k):
            if kj:
                out = np.roll(out, 1, axis=j)
                sl = [slice(None)] * len(self.k)
                sl[j] = 0
                out[tuple(sl)] = 0.0
        return SpectralCoeffs(self.nu, c.cutoff, out * self.coefficients(c.cutoff))

    def to_sparse(self, cutoff):
        """``scipy.sparse`` matrix on flattened coefficient arrays."""
        from scipy.sparse import coo_matrix
        shape = (cutoff + 1,) * len(self.nu)
        ent = self.entries(cutoff)
        rows = [np.ravel_multi_index(tg, shape) for _, tg, _ in ent]
        cols = [np.ravel_multi_index(src, shape) for src, _, _ in ent]
        vals = [v for _, _, v in ent]
        size = int(np.prod(shape))
        return coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()


def riesz_matrix_01(nu, k):
    """Exact Riesz matrix for ``k`` with entries in ``{0, 1}``."""
    nu = as_nu(nu)
    k = as_multi_index(k)
    if len(k) != len(nu):
        raise ValueError("dimension mismatch between nu and k")
    if any(kj > 1 for kj in k):
        raise ValueError(f"riesz_matrix_01 needs k in {{0,1}}^n, got {k}")
    return RieszMatrix01(nu, k)


def diagonal_coefficient(k):
    """Point-mass part of the Riesz kernel: the sphere average of its symbol.

    For all-even ``k`` the distributional kernel of ``R_k`` is a principal
    value integral plus ``c * identity`` with
    ``c = (-1)^{|k|/2} Gamma(n/2) prod Gamma((k_j+1)/2)
    / (pi^{n/2} Gamma((|k|+n)/2))``; for any odd entry ``c = 0``.
    """
    k = as_multi_index(k)
    if any(kj % 2 for kj in k) or sum(k) == 0:
        return 0.0 if sum(k) else 1.0
    n = len(k)
    s = sum(k)
    logc = (math.lgamma(n / 2) + sum(math.lgamma((kj + 1) / 2) for kj in k)
            - (n / 2) * math.log(math.pi) - math.lgamma((s + n) / 2))
    return (-1.0) ** (s // 2) * math.exp(logc)


# --- kernel representation ---------------------------------------------------

@njit(cache=True)
def _riesz_integrand_sum(nus, x, y, order, v0, h, nnode, terms_flat, offsets):
    # trapezoid sum over v = log t of t^{order/2} prod_j delta^{k_j} p_t
    total = 0.0
    n = nus.size
    for i in range(nnode):
        v = v0 + i * h
        t = math.exp(v)
        sgn = 1.0
        lg = 0.5 * order * v
        for j in range(n):
            a0 = offsets[j]
            a1 = offsets[j + 1]
            s, la = delta_k_log_abs(nus[j], t, x[j], y[j],
                                    terms_flat[0, a0:a1], terms_flat[1, a0:a1].astype(np.int64),
                                    terms_flat[2, a0:a1].astype(np.int64),
                                    terms_flat[3, a0:a1].astype(np.int64),
                                    terms_flat[4, a0:a1].astype(np.int64),
                                    terms_flat[5, a0:a1].astype(np.int64))
            sgn *= s
            lg += la
        if sgn != 0.0:
            total += sgn * math.exp(lg)
    return total * h


def _pack_terms(k):
    blocks = [np.vstack([np.asarray(a, dtype=float) for a in delta_k_terms(kj)])
              for kj in k]
    offsets = np.zeros(len(k) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([b.shape[1] for b in blocks])
    return np.ascontiguousarray(np.hstack(blocks)), offsets


def _time_window(nu, k, d):
    lam0 = 2.0 * sum(nu) + 2.0 * len(nu)
    v_lo = 2.0 * math.log(d) - math.log(400.0)
    v_hi = math.log(max(60.0 / lam0, 1.0))
    return v_lo, max(v_hi, v_lo + 1.0)


def riesz_kernel(nu, k, x, y, tol=1e-10, h0=0.5, hmin=1e-3):
    """Off-diagonal kernel of ``delta_nu^k L_nu^{-|k|/2}`` at ``(x, y)``.

    Computes ``Gamma(|k|/2)^{-1} int_0^inf t^{|k|/2} delta^k p_t(x, y) dt/t``
    with the trapezoid rule in ``v = log t`` (the integrand is analytic in
    a strip, so the rule converges geometrically), halving the step until
    the change is below ``tol`` relative.  The window in ``t`` runs from
    ``|x-y|^2/400`` to ``60/lambda_0``.
    """
    nu = as_nu(nu)
    k = as_multi_index(k)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if not (len(k) == len(nu) == x.size == y.size):
        raise ValueError("dimension mismatch")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("points must lie in the open orthant")
    order = sum(k)
    if order == 0:
        raise ValueError("k = 0 gives the identity, which has no kernel")
    d = float(np.sqrt(np.sum((x - y) ** 2)))
    if d == 0.0:
        raise SingularityError("Riesz kernel is singular on the diagonal x = y")
    flat, offs = _pack_terms(k)
    nus = np.array(nu)
    v_lo, v_hi = _time_window(nu, k, d)
    h = h0
    nnode = int(math.ceil((v_hi - v_lo) / h)) + 1
    prev = _riesz_integrand_sum(nus, x, y, order, v_lo, h, nnode, flat, offs)
    while True:
        h *= 0.5
        nnode = int(math.ceil((v_hi - v_lo) / h)) + 1
        cur = _riesz_integrand_sum(nus, x, y, order, v_lo, h, nnode, flat, offs)
        if abs(cur - prev) <= tol * abs(cur) or (cur == 0.0 and prev == 0.0):
            return cur / math.gamma(order / 2)
        if h < hmin:
            raise ConvergenceError("riesz_kernel: time quadrature did not converge")
        prev = cur


@njit(cache=True)
def _kernel_row_block(nu, x, order, v_lo_all, h, v_hi, coef, pa, pb, pe, ps, pm):
    m = x.size
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            v0 = v_lo_all[i, j]
            nnode = int(math.ceil((v_hi - v0) / h)) + 1
            total = 0.0
            for q in range(nnode):
                v = v0 + q * h
                t = math.exp(v)
                s, la = delta_k_log_abs(nu, t, x[i], x[j], coef, pa, pb, pe, ps, pm)
                if s != 0.0:
                    total += s * math.exp(la + 0.5 * order * v)
            out[i, j] = total * h
    return out


def riesz_kernel_matrix_1d(nu, k, x, h=0.4):
    """Matrix ``K[i, j]`` of the one-dimensional Riesz kernel at node pairs.

    The diagonal is left at zero.  A fixed step ``h`` in ``log t`` is used;
    ``h = 0.4`` gives a relative quadrature error near ``exp(-pi^2/h)``.
    """
    nu = float(as_nu(nu)[0])
    k = int(k)
    x = np.ascontiguousarray(x, dtype=float)
    d = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(d, 1.0)
    v_lo = 2.0 * np.log(d) - math.log(400.0)
    v_hi = math.log(max(60.0 / (2.0 * nu + 2.0), 1.0))
    terms = delta_k_terms(k)
    out = _kernel_row_block(nu, x, float(k), v_lo, h, v_hi, *terms)
    return out / math.gamma(k / 2)


# --- operator application ----------------------------------------------------

def _time_rule(nu, n_small, n_large):
    # t in (0, 1] through u = sqrt(t); t in [1, T] through v = log t
    lam0 = 2.0 * sum(nu) + 2.0 * len(nu)
    t_hi = max(40.0 / lam0, 2.0)
    u, wu = roots_legendre(n_small)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    v, wv = roots_legendre(n_large)
    vmax = math.log(t_hi)
    v = 0.5 * vmax * (v + 1.0)
    wv = 0.5 * vmax * wv
    t = np.concatenate([u ** 2, np.exp(v)])
    # measure dt/t = 2 du/u and dv
    meas = np.concatenate([2.0 * wu / u, wv])
    return t, meas


def _space_rule(xc, t, ny, gl):
    # local rule for y around xc that resolves the heat kernel at time t
    r = math.exp(-4.0 * t)
    width = 14.0 * math.sqrt(-math.expm1(-4.0 * t) / (1.0 + r))
    lo = xc - width
    hi = xc + width
    s, w = gl
    if lo > 0:
        y = lo + 0.5 * (hi - lo) * (s + 1.0)
        return y, 0.5 * (hi - lo) * w
    # graded map y = hi * tau^2 towards the boundary
    tau = 0.5 * (s + 1.0)
    return hi * tau ** 2, hi * tau * w


def riesz_apply(f, nu, k, x, path="kernel", cutoff=DEFAULT_CUTOFF,
                n_small=48, n_large=40, ny=96):
    """Apply ``delta_nu^k L_nu^{-|k|/2}`` to ``f`` and evaluate at ``x``.

    Parameters
    ----------
    f : callable
        Vectorised function of points with shape ``(m, n)``.
    nu, k : sequences
    x : array_like, shape (m, n)
        Evaluation points.
    path : {"kernel", "spectral"}
        ``"kernel"`` integrates ``t^{|k|/2-1} (delta^k e^{-tL} f)(x)`` over
        ``t`` with the heat semigroup applied by local quadrature in ``y``;
        it includes any point-mass part of the kernel automatically.
        ``"spectral"`` expands ``f`` to ``cutoff`` and uses the exact
        matrix; it requires ``k`` in ``{0, 1}^n``.

    Returns
    -------
    ndarray of shape (m,)
    """
    nu = as_nu(nu)
    k = as_multi_index(k)
    if len(k) != len(nu):
        raise ValueError("dimension mismatch between nu and k")
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and len(nu) == 1:
        x = x[:, None]
    if sum(k) == 0:
        return np.asarray(f(x), dtype=float)
    if path == "spectral":
        mat = riesz_matrix_01(nu, k)
        return synthesize(mat.apply(analyze(f, nu, cutoff)), x)
    if path != "kernel":
        raise ValueError(f"unknown path {path!r}")
    n = len(nu)
    order = sum(k)
    t_nodes, meas = _time_rule(nu, n_small, n_large)
    gl = roots_legendre(ny)
    terms = [delta_k_terms(kj) for kj in k]
    out = np.zeros(x.shape[0])
    for i, xp in enumerate(x):
        acc = 0.0
        for t, mw in zip(t_nodes, meas):
            rules = [_space_rule(xp[j], t, ny, gl) for j in range(n)]
            kern = []
            for j in range(n):
                yj, wj = rules[j]
                vals = _delta_k_vec(nu[j], t, xp[j], yj, *terms[j])
                kern.append(vals * wj)
            grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
            pts = np.stack([g.ravel() for g in grids], axis=-1)
            fv = np.asarray(f(pts), dtype=float).reshape((ny,) * n)
            val = fv
            for j in range(n - 1, -1, -1):
                val = val @ kern[j]
            acc += mw * t ** (order / 2) * float(val)
        out[i] = acc / math.gamma(order / 2)
    return out


@njit(cache=True)
def _delta_k_vec(nu, t, x, ys, coef, pa, pb, pe, ps, pm):
    out = np.zeros(ys.size)
    for i in range(ys.size):
        s, la = delta_k_log_abs(nu, t, x, ys[i], coef, pa, pb, pe, ps, pm)
        if s != 0.0:
            out[i] = s * math.exp(la)
    return out
