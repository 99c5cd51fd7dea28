"""Explicit map families on the punctured ball, as analytic :class:`MapModel` s.

Radial maps ``v(x) = e^{g(|x|^2)} x`` have

    Dv   = e^g (I + 2 g' x (x) x)
    D2v  = 2 e^g g' (d_ai x_j + d_aj x_i + d_ij x_a) + 4 e^g (g'^2 + g'') x_a x_i x_j

and power maps ``v(x) = |x|^gamma x`` have

    Dv   = |x|^gamma (I + gamma x (x) x / |x|^2)
    D2v  = gamma |x|^(gamma-2) (d_ai x_j + d_aj x_i + d_ij x_a)
           + gamma (gamma-2) |x|^(gamma-4) x_a x_i x_j
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable
import math

import numpy as np

from . import ode
from .errors import DomainError
from .operators import MapModel


def _sym3(n, x):
    # d_ai x_j + d_aj x_i + d_ij x_a
    I = np.eye(n)
    return (np.einsum("ai,j->aij", I, x) + np.einsum("aj,i->aij", I, x)
            + np.einsum("ij,a->aij", I, x))


def _nonzero(x):
    return bool(np.any(x != 0.0))


@dataclass(frozen=True)
class RadialProfile:
    """A profile ``g`` of ``t = |x|^2`` with its first two derivatives."""

    derivatives: Callable  # t -> (g, g', g'')
    t_range: tuple = (0.0, math.inf)
    params: dict = None

    def contains(self, t):
        lo, hi = self.t_range
        # slack of a few ulps so points normalised onto |x| = 1 stay inside
        return lo * (1 - 1e-14) <= t <= hi * (1 + 1e-14) and t > 0.0

    @classmethod
    def constant(cls, c=0.0):
        return cls(lambda t: (c, 0.0, 0.0), params={"g": c})

    @classmethod
    def from_solution(cls, sol):
        def derivs(t):
            g, gp, gpp = sol.derivatives(t)
            return float(g), float(gp), float(gpp)
        return cls(derivs, (sol.t[0], sol.t[-1]), {"a": sol.a, "n": sol.n})


def radial_map(profile, n, name="radial", params=None):
    """``v(x) = e^{g(|x|^2)} x`` for a given profile."""

    def domain(x):
        return profile.contains(float(x @ x))

    def parts(x):
        x = np.asarray(x, dtype=float)
        t = float(x @ x)
        if not profile.contains(t):
            raise DomainError(f"{name}: |x|^2 = {t} outside the profile range {profile.t_range}")
        g, gp, gpp = profile.derivatives(t)
        return x, math.exp(g), gp, gpp

    def value(x):
        x, E, _, _ = parts(x)
        return E * x

    def gradient(x):
        x, E, gp, _ = parts(x)
        return E * (np.eye(n) + 2.0 * gp * np.outer(x, x))

    def hessian(x):
        x, E, gp, gpp = parts(x)
        return (2.0 * E * gp * _sym3(n, x)
                + 4.0 * E * (gp * gp + gpp) * np.einsum("a,i,j->aij", x, x, x))

    return MapModel(name, n, n, value, gradient, hessian,
                    params=dict(params or profile.params or {}), domain=domain)


# default distance (as a factor on t) kept from the blow-up point of g_a
EXISTENCE_MARGIN = 1.2


def existence_radius(a, n):
    """Radius ``sqrt(t0)`` below which the eikonal profile does not exist."""
    return math.sqrt(ode.blowup_time(a, n))


def eikonal_map(a, n, t_min=None, tol=ode.DEFAULT_TOL):
    """The radial solution ``v_a`` with ``|Dv_a|^2 = a`` and ``v_a = x`` on ``|x| = 1``.

    The profile only exists for ``|x|^2 > ode.blowup_time(a, n)``.  With
    ``t_min=None`` the map is built down to ``EXISTENCE_MARGIN`` times that
    point; an explicit ``t_min`` below it raises
    :class:`~linfty.errors.SingularityReached`.
    """
    if not a > n:
        raise DomainError(f"eikonal maps need a > n (a={a}, n={n})")
    if t_min is None:
        t_min = EXISTENCE_MARGIN * ode.blowup_time(a, n)
    sol = ode.solve_profile(a, n, t_min=t_min, tol=tol)
    return radial_map(RadialProfile.from_solution(sol), n, name="eikonal",
                      params={"a": float(a), "t_min": float(t_min), "tol": float(tol)})


def dilation_level(gamma, n):
    """Constant dilation ``K(Dv^gamma) = (n + gamma^2 + 2 gamma) / (1 + gamma)^(2/n)``.

    Follows from ``|Dv|^2 = |x|^(2 gamma) (n + gamma^2 + 2 gamma)`` and
    ``det(Dv^T Dv) = |x|^(2 n gamma) (1 + gamma)^2``.
    """
    return (n + gamma * gamma + 2.0 * gamma) / (1.0 + gamma) ** (2.0 / n)


def power_map(gamma, n):
    """``v(x) = |x|^gamma x`` for ``gamma > -1``."""
    if not gamma > -1.0:
        raise DomainError(f"power maps need gamma > -1, got {gamma}")

    def check(x):
        x = np.asarray(x, dtype=float)
        if not _nonzero(x):
            raise DomainError("power map evaluated at the origin")
        return x, math.sqrt(float(x @ x))

    def value(x):
        x, r = check(x)
        return r**gamma * x

    def gradient(x):
        x, r = check(x)
        return r**gamma * np.eye(n) + gamma * r ** (gamma - 2.0) * np.outer(x, x)

    def hessian(x):
        x, r = check(x)
        return (gamma * r ** (gamma - 2.0) * _sym3(n, x)
                + gamma * (gamma - 2.0) * r ** (gamma - 4.0) * np.einsum("a,i,j->aij", x, x, x))

    return MapModel("power", n, n, value, gradient, hessian,
                    params={"gamma": float(gamma)}, domain=_nonzero)


def mu_exponent(mu, n):
    """``gamma(mu) = (n - mu) / (mu - 1)``."""
    if not mu > 1.0:
        raise DomainError(f"mu must exceed 1, got {mu}")
    return (n - mu) / (mu - 1.0)


def mu_map(mu, n):
    """``u^mu(x) = |x|^gamma(mu) x``, a solution of the frozen-coefficient system."""
    gamma = mu_exponent(mu, n)
    m = power_map(gamma, n)
    return MapModel("mu", n, n, m.value, m.gradient, m.hessian,
                    params={"mu": float(mu), "gamma": gamma}, domain=m.domain)


def trig_map():
    """``u(x, y) = e^{ix} - e^{iy}`` read as a map R^2 -> R^2.

    ``rank(Du)`` drops to 1 on the diagonal ``x = y``.
    """

    def value(p):
        x, y = p
        return np.array([math.cos(x) - math.cos(y), math.sin(x) - math.sin(y)])

    def gradient(p):
        x, y = p
        return np.array([[-math.sin(x), math.sin(y)],
                         [math.cos(x), -math.cos(y)]])

    def hessian(p):
        x, y = p
        return np.array([[[-math.cos(x), 0.0], [0.0, math.cos(y)]],
                         [[-math.sin(x), 0.0], [0.0, math.sin(y)]]])

    return MapModel("trig", 2, 2, value, gradient, hessian,
                    interface_distance=lambda p: abs(p[0] - p[1]) / math.sqrt(2.0))


def identity_map(n):
    """``u(x) = x``."""
    zero = np.zeros((n, n, n))
    return MapModel("identity", n, n,
                    value=lambda x: np.asarray(x, dtype=float).copy(),
                    gradient=lambda x: np.eye(n),
                    hessian=lambda x: zero.copy())


FAMILIES = {
    "eikonal": "a",
    "power": "gamma",
    "mu": "mu",
    "trig": None,
    "identity": None,
}


def build(family, n, param=None, **kw):
    """Construct a family member by name; ``param`` is ``a``, ``gamma`` or ``mu``."""
    if family == "eikonal":
        return eikonal_map(param, n, **kw)
    if family == "power":
        return power_map(param, n)
    if family == "mu":
        return mu_map(param, n)
    if family == "trig":
        if n != 2:
            raise DomainError("the trig map lives in dimension 2")
        return trig_map()
    if family == "identity":
        return identity_map(n)
    raise DomainError(f"unknown family {family!r}")
