"""Muckenhoupt and reverse Hoelder classes, exact for power weights.

Power weights ``w(x) = |x|^alpha`` on the orthant are classified by the
closed-form conditions ``-n < alpha < n (p - 1)`` (``A_p``) and
``alpha q > -n`` (``RH_q``).  For weights given on a grid the constants
are estimated as maxima of the defining ball averages.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .laguerre_ops import as_multi_index, as_nu, gamma_nu, p_range, sigma_of_k

__all__ = [
    "PowerWeight",
    "GridWeight",
    "RangeError",
    "conjugate",
    "in_Ap_power",
    "in_A1_power",
    "in_RHq_power",
    "composite_class_power",
    "theorem_weight_condition",
    "ap_constant_estimate",
    "rh_constant_estimate",
    "maximal_fn",
    "dyadic_balls",
    "geometric_grid",
    "power_grid_weight",
    "constant_growth_verdict",
]


class RangeError(ValueError):
    """The exponent ``p`` lies outside the admissible interval."""


@dataclass(frozen=True)
class PowerWeight:
    alpha: float
    n: int = 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if self.n == 1 and x.ndim <= 1 else np.linalg.norm(x, axis=-1)
        return r ** self.alpha


@dataclass(frozen=True)
class GridWeight:
    """Weight samples ``w`` at nodes ``x`` (shape (m, n)) with cell volumes ``h``."""

    x: np.ndarray
    h: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if not (x.shape[0] == self.h.size == self.w.size):
            raise ValueError("x, h and w must describe the same nodes")
        if np.any(self.w <= 0):
            raise ValueError("weight samples must be positive")


def conjugate(p):
    """Hoelder conjugate with ``1' = inf`` and ``inf' = 1``."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def in_Ap_power(alpha, p, n=1):
    """``|x|^alpha`` belongs to ``A_p`` (``p > 1``)."""
    if not p > 1:
        raise ValueError("in_Ap_power needs p > 1; use in_A1_power for p = 1")
    if math.isinf(p):
        return alpha > -n
    return -n < alpha < n * (p - 1)


def in_A1_power(alpha, n=1):
    """``|x|^alpha`` belongs to ``A_1``: ``-n < alpha <= 0``."""
    return -n < alpha <= 0


def in_RHq_power(alpha, q, n=1):
    """``|x|^alpha`` belongs to ``RH_q`` (``q > 1``).

    ``q = inf`` is accepted and answered by ``alpha >= 0``.
    """
    if not q > 1:
        raise ValueError("in_RHq_power needs q > 1")
    if math.isinf(q):
        return alpha >= 0
    return alpha * q > -n


def _in_A(alpha, p, n):
    return in_A1_power(alpha, n) if p == 1 else in_Ap_power(alpha, p, n)


def _in_RH(alpha, q, n):
    # RH_1 holds for every weight
    return True if q == 1 else in_RHq_power(alpha, q, n)


def composite_class_power(alpha, a_index, rh_index, n=1):
    """Membership of ``|x|^alpha`` in ``A_a cap RH_q``; ``RH_1`` is vacuous."""
    return _in_A(alpha, a_index, n) and _in_RH(alpha, rh_index, n)


def theorem_weight_condition(nu, k, p, alpha):
    """Weight condition for boundedness of the order-``k`` Riesz transform.

    Tests ``|x|^alpha`` in ``A_{p(1-gamma_nu)} cap RH_{(1/(p gamma'))'}``
    where ``gamma' = gamma_{nu + sigma(k)}``; the reverse Hoelder part is
    vacuous when ``gamma' = 0``.

    Raises
    ------
    RangeError
        If ``p`` is outside the open interval given by ``p_range``.
    """
    nu = as_nu(nu)
    k = as_multi_index(k)
    lo, hi = p_range(nu, k)
    if not lo < p < hi:
        raise RangeError(f"p={p} outside the admissible interval ({lo}, {hi})")
    g = gamma_nu(nu).max
    gs = gamma_nu(tuple(v + s for v, s in zip(nu, sigma_of_k(k)))).max
    a_index = p * (1.0 - g)
    rh_index = 1.0 if gs == 0 else conjugate(1.0 / (p * gs))
    return composite_class_power(alpha, a_index, rh_index, len(nu))


# --- grid estimates ----------------------------------------------------------

def geometric_grid(x_min, x_max, npts):
    """Log-spaced cell midpoints and widths on ``[x_min, x_max]``."""
    edges = np.geomspace(x_min, x_max, npts + 1)
    return np.sqrt(edges[1:] * edges[:-1]), np.diff(edges)


def power_grid_weight(alpha, x_min=1e-12, x_max=1e3, per_decade=12):
    """One-dimensional :class:`GridWeight` sampling ``x^alpha``."""
    npts = int(round(per_decade * math.log10(x_max / x_min)))
    x, h = geometric_grid(x_min, x_max, npts)
    return GridWeight(x, h, x ** alpha)


def dyadic_balls(x_min, x_max, n=1):
    """Centers ``2^i e`` (``e`` the diagonal unit) times radii ``2^j``."""
    i0 = math.floor(math.log2(x_min))
    i1 = math.ceil(math.log2(x_max))
    levels = [2.0 ** i for i in range(i0, i1 + 1)]
    e = np.ones(n) / math.sqrt(n)
    return [(c * e, r) for c in levels for r in levels]


def _ball_masks(gw, balls):
    for c, r in balls:
        mask = np.sum((gw.x - c) ** 2, axis=1) < r * r
        if np.count_nonzero(mask) >= 2:
            yield mask


def _avg(vals, h, mask):
    return np.sum(vals[mask] * h[mask]) / np.sum(h[mask])


def ap_constant_estimate(gw, p, balls=None):
    """Largest ``A_p`` ball product over a ball family.

    For ``p = 1`` the essential infimum is replaced by the grid minimum, so
    the result is a lower bound of the true ``A_1`` constant.  Balls are
    intersected with the orthant (only grid nodes inside are used).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if balls is None:
        r = np.linalg.norm(gw.x, axis=1)
        balls = dyadic_balls(r.min(), r.max(), gw.x.shape[1])
    best = 0.0
    for mask in _ball_masks(gw, balls):
        aw = _avg(gw.w, gw.h, mask)
        if p == 1:
            val = aw / np.min(gw.w[mask])
        else:
            dual = _avg(gw.w ** (-1.0 / (p - 1.0)), gw.h, mask)
            val = aw * dual ** (p - 1.0)
        best = max(best, val)
    return best


def rh_constant_estimate(gw, q, balls=None):
    """Largest ``RH_q`` ratio ``avg(w^q)^{1/q} / avg(w)`` over a ball family."""
    if q <= 1:
        raise ValueError("q must exceed 1")
    if balls is None:
        r = np.linalg.norm(gw.x, axis=1)
        balls = dyadic_balls(r.min(), r.max(), gw.x.shape[1])
    best = 0.0
    for mask in _ball_masks(gw, balls):
        top = _avg(gw.w ** q, gw.h, mask) ** (1.0 / q)
        best = max(best, top / _avg(gw.w, gw.h, mask))
    return best


def constant_growth_verdict(estimator, alpha, index, x_mins=(1e-6, 1e-12, 1e-24),
                            threshold=1.5):
    """Classify a power weight by how its constant moves as the grid nears 0.

    Returns ``(estimates, stable)`` where ``stable`` means the last
    refinement changed the estimate by less than ``threshold`` times.
    """
    est = [float(estimator(power_grid_weight(alpha, x_min=m), index)) for m in x_mins]
    return est, bool(est[-1] < threshold * est[-2])


@njit(cache=True)
def _maximal_1d(v, h):
    m = v.size
    cv = np.zeros(m + 1)
    ch = np.zeros(m + 1)
    for i in range(m):
        cv[i + 1] = cv[i] + v[i] * h[i]
        ch[i + 1] = ch[i] + h[i]
    out = np.zeros(m)
    suffix = np.empty(m)
    for a in range(m):
        # suffix[b] = max over b' >= b of the average on [a, b']
        run = 0.0
        for b in range(m - 1, a - 1, -1):
            avg = (cv[b + 1] - cv[a]) / (ch[b + 1] - ch[a])
            if avg > run:
                run = avg
            suffix[b] = run
        for i in range(a, m):
            if suffix[i] > out[i]:
                out[i] = suffix[i]
    return out


def maximal_fn(f, r, x=None, h=None):
    """Discrete maximal function ``M_r f = sup_B (avg_B |f|^r)^{1/r}``.

    In one dimension the supremum runs over every interval made of whole
    grid cells that contains the point, which is exact for the discrete
    data and contains every dyadic interval.  In higher dimension ``f``
    is an array on a tensor grid and cubes centred at each node with side
    ``2^j`` cells (clipped to the grid) are used.

    Parameters
    ----------
    f : ndarray
        Grid values; 1-D array, or an ``n``-dimensional array.
    r : float
    x : ndarray, optional
        Node coordinates (1-D only; only cell widths ``h`` matter).
    h : ndarray, optional
        Cell widths in 1-D; defaults to ``diff`` of cell edges from ``x``
        or to unit widths.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    f = np.asarray(f, dtype=float)
    v = np.abs(f) ** r
    if f.ndim == 1:
        if h is None:
            h = np.gradient(np.asarray(x, dtype=float)) if x is not None else np.ones_like(f)
        return _maximal_1d(v, np.asarray(h, dtype=float)) ** (1.0 / r)
    # centred cubes on a uniform tensor grid, via a summed-area table
    sat = v.copy()
    for ax in range(v.ndim):
        sat = np.cumsum(sat, axis=ax)
    sat = np.pad(sat, [(1, 0)] * v.ndim)
    out = np.zeros_like(v)
    idx = np.indices(v.shape)
    half = 0
    while half <= max(v.shape):
        lo = [np.clip(i - half, 0, s) for i, s in zip(idx, v.shape)]
        hi = [np.clip(i + half + 1, 0, s) for i, s in zip(idx, v.shape)]
        total = np.zeros_like(v)
        vol = np.ones_like(v)
        for corner in range(2 ** v.ndim):
            sel = []
            sgn = 1
            for ax in range(v.ndim):
                if corner >> ax & 1:
                    sel.append(lo[ax])
                    sgn = -sgn
                else:
                    sel.append(hi[ax])
            total += sgn * sat[tuple(sel)]
        for ax in range(v.ndim):
            vol = vol * (hi[ax] - lo[ax])
        out = np.maximum(out, total / vol)
        half = 2 * half + 1 if half else 1
    return out ** (1.0 / r)
