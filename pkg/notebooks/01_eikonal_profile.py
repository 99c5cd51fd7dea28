# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Radial maps with constant gradient norm
#
# For each level `a > n` the map `v(x) = exp(g(|x|^2)) x` satisfies
# `|Dv|^2 = a` once the profile `g` solves a first-order ODE with `g(1) = 0`.
# The profile only exists down to a positive radius: integrating backwards,
# `g` runs off to minus infinity at a finite `t0 > 0`.

# %%
import numpy as np

from linfty import ode, solutions, verify

for n, a in [(2, 3.0), (2, 5.0), (2, 10.0), (3, 4.0), (3, 10.0)]:
    t0 = ode.blowup_time(a, n)
    print(f"n={n} a={a:>4}: t0={t0:.4f}  radius={np.sqrt(t0):.3f}")

# %% [markdown]
# Solving close to `t0` is fine; asking for the default `t_min = 1e-6`
# raises `SingularityReached` carrying the last good point.

# %%
from linfty.errors import SingularityReached

try:
    ode.solve_profile(5.0, 2, t_min=1e-6)
except SingularityReached as exc:
    print(exc)

sol = ode.solve_profile(5.0, 2, t_min=1.2 * ode.blowup_time(5.0, 2))
print(sol.size, "grid points, max midpoint residual", sol.ode_residual(sol.midpoints()).max())

# %% [markdown]
# On the annulus where all three profiles exist, the maps solve the
# infinity-Laplace system, agree on the unit sphere and differ inside.

# %%
rep = verify.nonuniqueness_demo("infinity-laplacian", [3.0, 5.0, 10.0], 2)
for m in rep.members:
    print(m.summary())
print("r_min", rep.samples["r_min"], "pairwise distances", rep.distances["pairs"])
