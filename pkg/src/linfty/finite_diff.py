"""Central finite differences used as the independent oracle for analytic derivatives."""
from __future__ import annotations

import numpy as np

from .errors import DomainError

GRADIENT_STEP = 1e-5
HESSIAN_STEP = 1e-4


def _stencil_check(domain, x, h):
    if domain is None:
        return
    for i in range(x.size):
        for sign in (1.0, -1.0):
            y = x.copy()
            y[i] += sign * h
            if not domain(y):
                raise DomainError(f"finite-difference stencil leaves the domain at {y}")


def jacobian(f, x, h=GRADIENT_STEP, domain=None):
    """Central-difference Jacobian of ``f: R^n -> R^...``; result has the input axis last."""
    x = np.asarray(x, dtype=float)
    _stencil_check(domain, x, h)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def fd_gradient(u, x, h=GRADIENT_STEP):
    """``N x n`` central-difference gradient of a map's value."""
    return jacobian(u.value, x, h, u.domain)


def fd_hessian(u, x, h=HESSIAN_STEP, from_gradient=True):
    """``N x n x n`` Hessian by central differences.

    With ``from_gradient`` the map's gradient evaluator is differenced once;
    otherwise second differences of the value are used.
    """
    x = np.asarray(x, dtype=float)
    if from_gradient:
        H = jacobian(u.gradient, x, h, u.domain)
        return 0.5 * (H + np.swapaxes(H, 1, 2))
    _stencil_check(domain=u.domain, x=x, h=h)
    n = x.size
    f0 = np.asarray(u.value(x))
    H = np.empty((f0.size, n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[:, i, i] = (u.value(x + ei) - 2.0 * f0 + u.value(x - ei)) / h**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            d = (u.value(x + ei + ej) - u.value(x + ei - ej)
                 - u.value(x - ei + ej) + u.value(x - ei - ej)) / (4.0 * h**2)
            H[:, i, j] = H[:, j, i] = d
    return H


def relative_error(approx, reference):
    """Max-norm error of ``approx`` scaled by the max-norm of ``reference``."""
    approx = np.asarray(approx, dtype=float)
    reference = np.asarray(reference, dtype=float)
    diff = np.max(np.abs(approx - reference), initial=0.0)
    scale = np.max(np.abs(reference), initial=0.0)
    if scale == 0.0:
        return diff
    return diff / scale
