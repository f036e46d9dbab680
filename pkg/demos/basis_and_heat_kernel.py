"""Tour of the Laguerre function basis and its heat kernel."""

# %%
import numpy as np

from laguerre_riesz import gauss_laguerre_rule, heat_kernel_1d, laguerre_fn_table

nu = -0.5

# %% the basis is orthonormal under the matched quadrature rule
x, w = gauss_laguerre_rule(60, nu)
tab = laguerre_fn_table(20, nu, x)
gram = (tab * w) @ tab.T
print("Gram deviation:", np.abs(gram - np.eye(21)).max())

# %% the heat kernel equals its eigenfunction expansion
pts = np.linspace(0.2, 3.0, 8)
t = 0.5
tab = laguerre_fn_table(200, nu, pts)
lam = 4.0 * np.arange(201) + 2 * nu + 2
series = (tab * np.exp(-t * lam)[:, None]).T @ tab
direct = heat_kernel_1d(nu, t, pts[:, None], pts[None, :])
print("kernel vs series:", np.abs(series - direct).max())

# %% small times concentrate on the diagonal, large times on the ground state
for t in (0.01, 0.1, 1.0, 5.0):
    row = heat_kernel_1d(nu, t, 1.0, pts)
    print(f"t={t:<5} peak at y={pts[np.argmax(row)]:.2f}  mass={row.sum() * (pts[1] - pts[0]):.4f}")
