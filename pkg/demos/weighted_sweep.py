"""Weighted norm estimates of the discretised transform on refining grids.

A stable sequence of estimates suggests boundedness on the weighted
space, while steady growth suggests the opposite.  Runs in about a minute.
"""

# %%
from laguerre_riesz.harness import norm_sweep

rows = norm_sweep([-0.75], [2], [], [], sizes=(128, 256, 512),
                  pairs=[(2.0, 0.0), (2.0, 0.25), (2.0, 0.8), (6.0, 0.0)])

# %%
print(f"{'p':>4} {'alpha':>6} {'N':>5} {'norm':>10}  verdict   condition")
for r in rows:
    print(f"{r.p:4g} {r.alpha:6g} {r.N:5d} {r.norm:10.4f}  {r.verdict:<9} {r.condition}")
