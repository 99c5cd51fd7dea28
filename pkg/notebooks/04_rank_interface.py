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
# # A smooth solution with a rank interface
#
# `u(x, y) = e^{ix} - e^{iy}` has `det Du = sin(x - y)`.  The gradient drops to
# rank one on the diagonal, where the normal projection `[Du]^perp` jumps.

# %%
import numpy as np

from linfty import operators as ops
from linfty import solutions, verify
from linfty.tensor import interface_gap, numerical_rank

u = solutions.trig_map()
for p in ([0.2, 0.2], [0.2, 0.2 + 1e-8], [0.2, 0.25], [0.1, -0.2]):
    p = np.array(p)
    print(p, "rank", numerical_rank(u.gradient(p)), "gap", f"{interface_gap(u.gradient(p)):.3g}",
          "residual", np.linalg.norm(ops.infinity_laplacian(u, p)))

# %% [markdown]
# Reports keep points near the diagonal but leave them out of the aggregates.

# %%
rep = verify.residual_report("infinity-laplacian", u, verify.sample_punctured_ball(2, r_max=0.3))
print(rep.summary(), rep.aggregates["excluded"], "excluded")
