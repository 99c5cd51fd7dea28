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
# # A linear degenerate system with two solutions
#
# Freezing the coefficients of the dilation system at a power map gives the
# linear system `A(x) : D^2 u = 0` with
# `A = (I - mu [x]) (x) (I - mu [x])`, `[x] = x x^T / |x|^2`.
# Both `u(x) = x` and `u(x) = |x|^gamma x`, `gamma = (n - mu)/(mu - 1)`, solve it
# with the same boundary values on the unit sphere.

# %%
import numpy as np

from linfty import operators as ops
from linfty import solutions, verify
from linfty.tensor import dilation_gradient

n, mu = 3, 2.0
gamma = solutions.mu_exponent(mu, n)
u = solutions.mu_map(mu, n)
x = np.array([0.3, -0.2, 0.5])

KP = dilation_gradient(u.gradient(x))
c = 4 * gamma**2 * (2 + gamma) ** 2 * np.linalg.norm(x) ** (-2 * gamma) / (n**2 * (1 + gamma) ** (4 / n))
print("gamma", gamma)
print("max |K_P (x) K_P - c A|", np.abs(np.einsum("ai,bj->aibj", KP, KP) - c * ops.coefficient_tensor(mu, x)).max())

# %%
rep = verify.nonuniqueness_demo("linear", [mu], n)
for m in rep.members:
    print(m.summary())
print("sup distance", rep.distances["min"])
