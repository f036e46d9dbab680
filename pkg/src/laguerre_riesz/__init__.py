"""Laguerre expansions, higher-order Riesz transforms and weighted estimates."""

from .special_fn import (
    bessel_i_scaled, gamma_fn, gauss_laguerre_rule, laguerre_fn, laguerre_fn_nd,
    laguerre_fn_table, laguerre_poly,
)
from .laguerre_ops import (
    ConvergenceError, GammaExponents, delta_heat_kernel_1d, delta_k_heat_kernel_1d,
    delta_k_heat_kernel_nd, dual_delta_heat_kernel_1d, eigenvalue, gamma_nu,
    heat_kernel_1d, heat_kernel_nd, p_range, sigma_of_k, time_derivative_heat_kernel,
)
from .spectral import (
    BasisMismatchError, RieszMatrix01, SingularityError, SpectralCoeffs, analyze,
    apply_heat, apply_neg_power, diagonal_coefficient, riesz_apply, riesz_kernel,
    riesz_matrix_01, synthesize,
)
from .weights import (
    GridWeight, PowerWeight, RangeError, composite_class_power, in_A1_power,
    in_Ap_power, in_RHq_power, maximal_fn, theorem_weight_condition,
)

__version__ = "0.1.0"
