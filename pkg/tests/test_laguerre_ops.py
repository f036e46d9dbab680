import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from laguerre_riesz.laguerre_ops import (
    ConvergenceError, delta_heat_kernel_1d, delta_k_heat_kernel_1d, delta_k_heat_kernel_nd,
    delta_k_log_abs_1d, delta_k_terms, dual_delta_heat_kernel_1d, eigenvalue, gamma_nu,
    heat_kernel_1d, heat_kernel_nd, p_range, sigma_of_k, time_derivative_heat_kernel,
)
from laguerre_riesz.special_fn import laguerre_fn_table

HEAT_REF = [
    ((0.5, 0.5, 1.0, 2.0), 0.073224407137382699468),
    ((-0.75, 0.2, 1.0, 2.0), 0.10848894643533567179),
    ((-0.75, 0.01, 0.3, 0.31), 2.7055002837915400674),
    ((1.5, 3.0, 0.5, 2.5), 2.7882423627302100632e-8),
]

DELTA_REF = [
    ((0.5, 1, 0.5, 1.0, 2.0), 0.037041947898584275995),
    ((-0.75, 2, 0.3, 0.8, 1.1), 0.33040358121674570372),
    ((0.5, 3, 1.0, 1.2, 0.7), 0.000072046232711928036681),
]


def spectral_heat(nu, t, x, y, kmax=400):
    tx = laguerre_fn_table(kmax, nu, np.atleast_1d(x))
    ty = laguerre_fn_table(kmax, nu, np.atleast_1d(y))
    lam = 4.0 * np.arange(kmax + 1) + 2 * nu + 2
    return np.sum(np.exp(-t * lam)[:, None] * tx * ty, axis=0)


def nested_delta(f, nu, k, x, h=2e-3):
    """delta^k f at x by nested fourth-order central differences."""
    if k == 0:
        return f(x)

    def g(s):
        return nested_delta(f, nu, k - 1, s, h)
    d = (-g(x + 2 * h) + 8 * g(x + h) - 8 * g(x - h) + g(x - 2 * h)) / (12 * h)
    return d + (x - (nu + 0.5) / x) * g(x)


class TestExponents:
    def test_gamma(self):
        assert gamma_nu([-0.75]).max == pytest.approx(0.25)
        assert gamma_nu([0.3, -0.9, -0.6]).per_coordinate == pytest.approx((0.0, 0.4, 0.1))
        assert gamma_nu([-0.5]).max == 0.0

    def test_sigma(self):
        assert sigma_of_k([0, 1, 2, 7]) == (0, 1, 0, 1)

    def test_p_range(self):
        assert p_range([-0.75], [2]) == pytest.approx((4 / 3, 4.0))
        lo, hi = p_range([-0.75], [1])
        assert lo == pytest.approx(4 / 3) and math.isinf(hi)
        assert p_range([0.5], [2]) == (1.0, math.inf)

    def test_p_range_mismatch(self):
        with pytest.raises(ValueError):
            p_range([0.0, 0.0], [1])

    def test_eigenvalue(self):
        assert eigenvalue([2, 1], [0.5, -0.25]) == 4 * 3 + 2 * 0.25 + 4

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            gamma_nu([-1.0])
        with pytest.raises(ValueError):
            sigma_of_k([-1])


class TestHeatKernel:
    @pytest.mark.parametrize("args,ref", HEAT_REF)
    def test_frozen(self, args, ref):
        assert heat_kernel_1d(*args) == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("nu", [-0.75, 0.5])
    @pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
    def test_spectral_sum(self, nu, t):
        x = np.linspace(0.1, 3.0, 12)
        X, Y = np.meshgrid(x, x)
        ref = spectral_heat(nu, t, X.ravel(), Y.ravel()).reshape(X.shape)
        assert np.max(np.abs(heat_kernel_1d(nu, t, X, Y) - ref)) < 1e-10

    @given(st.floats(-0.95, 5.0), st.floats(1e-3, 10.0), st.floats(1e-3, 20.0),
           st.floats(1e-3, 20.0))
    def test_symmetric_positive(self, nu, t, x, y):
        a = heat_kernel_1d(nu, t, x, y)
        b = heat_kernel_1d(nu, t, y, x)
        assert a >= 0 and a == pytest.approx(b, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("nu", [-0.75, 0.5])
    def test_semigroup(self, nu):
        s, t = 0.2, 0.3
        for x, y in ((0.5, 0.9), (1.3, 2.0), (0.2, 0.25)):
            val, _ = integrate.quad(lambda z: heat_kernel_1d(nu, s, x, z) * heat_kernel_1d(nu, t, z, y),
                                    0, 12, points=[x, y], epsabs=1e-13, epsrel=1e-12, limit=200)
            assert abs(val - heat_kernel_1d(nu, s + t, x, y)) < 1e-10

    def test_nd_product(self):
        x = np.array([0.4, 1.2])
        y = np.array([0.9, 0.7])
        ref = heat_kernel_1d(0.5, 0.3, 0.4, 0.9) * heat_kernel_1d(-0.75, 0.3, 1.2, 0.7)
        assert heat_kernel_nd([0.5, -0.75], 0.3, x, y) == pytest.approx(ref, rel=1e-14)

    def test_no_underflow_in_log_form(self):
        s, la = delta_k_log_abs_1d(0.0, 0, 1e-4, 1.0, 3.0)
        assert s == 1.0 and la < -5e3 and np.isfinite(la)

    def test_domain(self):
        with pytest.raises(ValueError):
            heat_kernel_1d(0.0, 0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            heat_kernel_1d(0.0, 1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            heat_kernel_1d(-1.2, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            heat_kernel_nd([0.0, 0.0], 1.0, np.ones(3), np.ones(3))


class TestDeltaKernels:
    def test_terms(self):
        coef, a, b, e, s, m = delta_k_terms(0)
        assert coef.tolist() == [1.0] and m.tolist() == [0]
        # the x^-1 term of the first step carries the factor a + m = 0
        assert len(delta_k_terms(1)[0]) == 2
        assert not delta_k_terms(2)[0].flags.writeable

    @pytest.mark.parametrize("args,ref", DELTA_REF)
    def test_frozen(self, args, ref):
        assert delta_k_heat_kernel_1d(*args) == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("nu", [-0.75, 0.5])
    def test_delta_ladder(self, nu):
        # delta phi_k^nu = -2 sqrt(k) phi_{k-1}^(nu+1)
        t, kmax = 0.4, 300
        x = np.linspace(0.2, 3, 9)
        y = 1.1
        lam = 4.0 * np.arange(kmax + 1) + 2 * nu + 2
        tx = laguerre_fn_table(kmax, nu + 1, x)
        ty = laguerre_fn_table(kmax, nu, np.array([y]))[:, 0]
        ks = np.arange(1, kmax + 1)
        ref = np.sum((np.exp(-t * lam[1:]) * -2 * np.sqrt(ks) * ty[1:])[:, None] * tx[:-1], axis=0)
        assert np.max(np.abs(delta_heat_kernel_1d(nu, t, x, y) - ref)) < 1e-10

    @pytest.mark.parametrize("nu", [-0.75, 0.5])
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_nested_differences(self, nu, k):
        for t, x, y in ((0.3, 0.8, 1.1), (1.0, 1.5, 0.6), (0.1, 0.5, 0.6)):
            f = lambda s: heat_kernel_1d(nu, t, s, y)  # noqa: E731
            ref = nested_delta(f, nu, k, x)
            assert delta_k_heat_kernel_1d(nu, k, t, x, y) == pytest.approx(ref, rel=1e-5)

    def test_nd_tensorised(self):
        x = np.array([0.6, 1.4])
        y = np.array([0.9, 1.0])
        ref = (delta_k_heat_kernel_1d(0.5, 1, 0.3, 0.6, 0.9)
               * delta_k_heat_kernel_1d(-0.75, 2, 0.3, 1.4, 1.0))
        val = delta_k_heat_kernel_nd([0.5, -0.75], [1, 2], 0.3, x, y)
        assert val == pytest.approx(ref, rel=1e-14)

    @pytest.mark.parametrize("nu", [-0.75, 0.5])
    def test_dual_differences(self, nu):
        for t, x, y in ((0.3, 0.8, 1.1), (1.0, 1.5, 0.6)):
            h = 1e-4
            f = lambda s: heat_kernel_1d(nu + 1, t, s, y)  # noqa: E731
            d = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
            ref = -d + (x - (nu + 0.5) / x) * f(x)
            assert dual_delta_heat_kernel_1d(nu, t, x, y) == pytest.approx(ref, rel=1e-8)

    @pytest.mark.parametrize("nu", [-0.75, 0.5])
    def test_dual_ladder(self, nu):
        # delta* phi_k^(nu+1) = -2 sqrt(k+1) phi_{k+1}^nu
        t, kmax = 0.4, 300
        x = np.linspace(0.2, 3, 9)
        y = 0.8
        lam = 4.0 * np.arange(kmax + 1) + 2 * (nu + 1) + 2
        tx = laguerre_fn_table(kmax + 1, nu, x)
        ty = laguerre_fn_table(kmax, nu + 1, np.array([y]))[:, 0]
        ks = np.arange(kmax + 1)
        ref = np.sum((np.exp(-t * lam) * -2 * np.sqrt(ks + 1) * ty)[:, None] * tx[1:], axis=0)
        assert np.max(np.abs(dual_delta_heat_kernel_1d(nu, t, x, y) - ref)) < 1e-10

    @given(st.floats(-0.9, 3.0), st.integers(0, 4), st.floats(0.01, 5.0),
           st.floats(0.05, 5.0), st.floats(0.05, 5.0))
    def test_sign_log_consistent(self, nu, k, t, x, y):
        s, la = delta_k_log_abs_1d(nu, k, t, x, y)
        v = delta_k_heat_kernel_1d(nu, k, t, x, y)
        assert v == pytest.approx(float(s) * math.exp(float(la)), rel=1e-14, abs=1e-300)


class TestTimeDerivative:
    def test_order_zero(self):
        x = np.array([[0.7]])
        y = np.array([[1.3]])
        v = time_derivative_heat_kernel([0.5], 0, 0.4, x, y)
        assert v[0] == pytest.approx(heat_kernel_1d(0.5, 0.4, 0.7, 1.3), rel=1e-11)

    @pytest.mark.parametrize("ell", [1, 2])
    def test_finite_difference(self, ell):
        nu, x, y, t, h = (0.5, -0.75), np.array([0.6, 1.1]), np.array([0.9, 1.4]), 0.5, 1e-3
        f = lambda s: heat_kernel_nd(nu, s, x, y)  # noqa: E731
        if ell == 1:
            ref = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
        else:
            ref = (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h)
                   - f(t + 2 * h)) / (12 * h * h)
        assert time_derivative_heat_kernel(nu, ell, t, x, y) == pytest.approx(ref, rel=1e-6)

    def test_small_t_needs_many_terms(self):
        with pytest.raises(ConvergenceError):
            time_derivative_heat_kernel([0.0], 1, 1e-4, np.array([1.0]), np.array([1.0]), kmax=50)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            time_derivative_heat_kernel([0.0], -1, 1.0, np.array([1.0]), np.array([1.0]))
