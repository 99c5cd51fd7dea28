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
# # Power maps and the dilation system
#
# `v(x) = |x|^gamma x` has constant dilation `K(Dv)`.  Since
# `det(Dv^T Dv) = |x|^(2 n gamma) (1 + gamma)^2`, the level is
# `(n + gamma^2 + 2 gamma) / (1 + gamma)^(2/n)`.

# %%
import numpy as np

from linfty import solutions, verify
from linfty.tensor import dilation

samples = verify.sample_punctured_ball(3)
for gamma in (-0.5, 0.5, 1.0, 2.0):
    u = solutions.power_map(gamma, 3)
    K = np.array([dilation(u.gradient(x)) for x in samples.points])
    print(f"gamma={gamma:>4}: K in [{K.min():.12f}, {K.max():.12f}], level {solutions.dilation_level(gamma, 3):.12f}")

# %% [markdown]
# The exponent matters for `n = 3`: with `n/2` in place of `2/n` the level
# would be off by a factor `(1 + gamma)^(n/2 - 2/n)`.

# %%
for gamma in (0.5, 1.0, 2.0):
    alt = (3 + gamma**2 + 2 * gamma) / (1 + gamma) ** 1.5
    print(gamma, solutions.dilation_level(gamma, 3), alt)

# %% [markdown]
# Every power map solves the dilation system, and the tangential and normal
# parts vanish separately.  The same maps are not infinity-harmonic.

# %%
for op in ("q-infinity", "infinity-laplacian"):
    rep = verify.residual_report(op, solutions.power_map(1.0, 2), verify.sample_punctured_ball(2))
    print(rep.summary(), rep.aggregates["tangential_max"], rep.aggregates["normal_max"])

# %%
from linfty.inclusion import scan_inclusion

for mode in ("nonzero", "strict"):
    rep = scan_inclusion(solutions.power_map(1.0, 2), verify.sample_punctured_ball(2), "K",
                         solutions.dilation_level(1.0, 2), det_mode=mode)
    print(mode, rep.summary())
