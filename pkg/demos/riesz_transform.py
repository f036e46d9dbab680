"""Two ways of applying the first-order Riesz transform."""

# %%
import numpy as np

from laguerre_riesz import laguerre_fn_table, riesz_apply, riesz_kernel

nu = 0.5
x = np.linspace(0.2, 3.0, 12)


def f(p):
    tab = laguerre_fn_table(4, nu, p[:, 0])
    return tab[1] - 0.3 * tab[4]


# %% through the heat semigroup and through the exact coefficient matrix
a = riesz_apply(f, [nu], [1], x, path="kernel")
b = riesz_apply(f, [nu], [1], x, path="spectral", cutoff=16)
print("max path difference:", np.abs(a - b).max())

# %% the kernel is singular on the diagonal and decays away from it
for y in (1.2, 1.5, 2.0, 3.0, 5.0):
    print(f"R(1, {y}) = {riesz_kernel([nu], [1], [1.0], [y]):+.6f}")
