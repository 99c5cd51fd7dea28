"""Pointwise evaluation of the second-order systems.

Every operator takes a :class:`MapModel` and a point and contracts the map's
gradient ``Du`` (``N x n``) and Hessian ``D2u`` (``N x n x n``, indexed
``[beta, i, j]``) against a coefficient tensor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import finite_diff as fd
from .errors import DomainError
from .tensor import (
    RANK_TOL,
    dilation,
    dilation_gradient,
    dilation_hessian_projected,
    interface_gap,
    nullspace_projection,
    radial_projections,
)

ANALYTIC = "analytic"
FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class MapModel:
    """A map ``u: R^n -> R^N`` with value, gradient and Hessian evaluators.

    ``domain`` returns False for points where the evaluators are undefined;
    ``interface_distance``, when given, measures the distance to a known set
    where ``rank(Du)`` jumps.
    """

    name: str
    n: int
    N: int
    value: Callable
    gradient: Callable
    hessian: Callable
    provenance: dict = field(default_factory=lambda: {"gradient": ANALYTIC, "hessian": ANALYTIC})
    params: dict = field(default_factory=dict)
    domain: Optional[Callable] = None
    interface_distance: Optional[Callable] = None

    @classmethod
    def from_value(cls, name, n, N, value, domain=None, h_grad=fd.GRADIENT_STEP,
                   h_hess=fd.HESSIAN_STEP, **kw):
        """Wrap a value function, backing both derivatives by finite differences."""
        def grad(x):
            return fd.jacobian(value, x, h_grad, domain)

        def hess(x):
            # second differences of the value; differencing ``grad`` would nest FD
            H = fd.jacobian(lambda y: fd.jacobian(value, y, h_hess), x, h_hess, domain)
            return 0.5 * (H + np.swapaxes(H, 1, 2))

        return cls(name, n, N, value, grad, hess,
                   provenance={"gradient": FINITE_DIFFERENCE, "hessian": FINITE_DIFFERENCE},
                   domain=domain, **kw)

    @property
    def analytic(self):
        return all(v == ANALYTIC for v in self.provenance.values())

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DomainError(f"{self.name}: expected a point in R^{self.n}, got shape {x.shape}")
        if self.domain is not None and not self.domain(x):
            raise DomainError(f"{self.name}: point {x} outside the domain")
        return x

    def derivatives(self, x):
        x = self.check_point(x)
        return np.asarray(self.gradient(x), dtype=float), np.asarray(self.hessian(x), dtype=float)


@dataclass(frozen=True)
class HamiltonianModel:
    """A Hamiltonian ``H`` on ``N x n`` matrices with derivatives ``H_P``, ``H_PP``."""

    name: str
    N: int
    n: int
    value: Callable
    gradient: Callable
    hessian: Callable
    provenance: dict = field(default_factory=lambda: {"gradient": ANALYTIC, "hessian": ANALYTIC})

    @classmethod
    def norm_squared(cls, N, n):
        """``H(P) = |P|^2``."""
        I4 = np.einsum("ab,ij->aibj", np.eye(N), np.eye(n))
        return cls("norm-squared", N, n,
                   value=lambda P: float(np.sum(P * P)),
                   gradient=lambda P: 2.0 * np.asarray(P, dtype=float),
                   hessian=lambda P: 2.0 * I4)

    @classmethod
    def from_value(cls, name, N, n, value, h=1e-5):
        """Finite-difference gradient and Hessian of an arbitrary ``value``."""
        def grad(P):
            return _matrix_jacobian(value, P, h)

        def hess(P):
            return _matrix_jacobian(grad, P, 10 * h)

        return cls(name, N, n, value, grad, hess,
                   provenance={"gradient": FINITE_DIFFERENCE, "hessian": FINITE_DIFFERENCE})

    @classmethod
    def dilation(cls, N, n, h=1e-5):
        """The dilation ``K``: analytic gradient, Hessian differenced from it."""
        return cls("dilation", N, n,
                   value=lambda P: float(dilation(P)),
                   gradient=dilation_gradient,
                   hessian=lambda P: _matrix_jacobian(dilation_gradient, P, h),
                   provenance={"gradient": ANALYTIC, "hessian": FINITE_DIFFERENCE})


def _matrix_jacobian(f, P, h):
    P = np.asarray(P, dtype=float)
    f0 = np.asarray(f(P))
    out = np.empty(f0.shape + P.shape)
    for idx in np.ndindex(P.shape):
        E = np.zeros_like(P)
        E[idx] = h
        out[(...,) + idx] = (np.asarray(f(P + E)) - np.asarray(f(P - E))) / (2.0 * h)
    return out


class Residual(NamedTuple):
    point: np.ndarray
    value: np.ndarray
    norm: float


def residual(operator, *args):
    """Evaluate ``operator(*args)`` and package it with its Euclidean norm."""
    value = np.asarray(operator(*args))
    return Residual(np.asarray(args[-1], dtype=float), value, float(np.linalg.norm(value)))


def normalization(Du, D2u):
    """Scale ``(1 + |Du|^3)(1 + |D2u|)`` used to make residual tolerances dimensionless."""
    return (1.0 + np.linalg.norm(Du) ** 3) * (1.0 + np.linalg.norm(D2u))


def near_interface(Du, tol=RANK_TOL, ratio=1e3):
    """True when the rank decision for ``Du`` has a singular-value gap below ``ratio``."""
    return interface_gap(Du, tol) < ratio


# -- infinity-Laplacian ---------------------------------------------------------

def _tangential(A, D2u):
    # A[a, i] A[b, j] D2u[b, i, j]
    return np.einsum("ai,bj,bij->a", A, A, D2u)


def infinity_laplacian(u, x, tol=RANK_TOL):
    """``(Du (x) Du + |Du|^2 [Du]^perp (x) I) : D2u`` at ``x``."""
    Du, D2u = u.derivatives(x)
    proj = nullspace_projection(Du, tol)
    return (np.einsum("ai,bj,bij->a", Du, Du, D2u)
            + np.sum(Du * Du) * np.einsum("ab,bii->a", proj, D2u))


def infinity_laplacian_decoupled(u, x, tol=RANK_TOL):
    """Split into ``Du D(|Du|^2/2)`` and ``|Du|^2 [Du]^perp Lap u``."""
    Du, D2u = u.derivatives(x)
    grad_half_norm2 = np.einsum("bj,bij->i", Du, D2u)
    tangential = Du @ grad_half_norm2
    normal = np.sum(Du * Du) * nullspace_projection(Du, tol) @ np.einsum("bii->b", D2u)
    return tangential, normal


def aronsson_system(H, u, x, tol=RANK_TOL):
    """``(H_P (x) H_P + H [H_P]^perp H_PP)(Du) : D2u`` for a general Hamiltonian."""
    Du, D2u = u.derivatives(x)
    HP = np.asarray(H.gradient(Du), dtype=float)
    HPP = np.asarray(H.hessian(Du), dtype=float)
    proj = nullspace_projection(HP, tol)
    return (_tangential(HP, D2u)
            + H.value(Du) * proj @ np.einsum("gibj,bij->g", HPP, D2u))


# -- optimal quasiconformal system -------------------------------------------

def q_infinity(u, x, tol=RANK_TOL):
    """``(K_P (x) K_P + [K_P]^perp K_PP)(Du) : D2u`` with the projected ``K_PP``."""
    Du, D2u = u.derivatives(x)
    KP = dilation_gradient(Du, tol)
    proj = nullspace_projection(KP, tol)
    KPP = dilation_hessian_projected(Du, tol)
    return _tangential(KP, D2u) + proj @ np.einsum("gibj,bij->g", KPP, D2u)


def q_infinity_decoupled(u, x, tol=RANK_TOL):
    """``K_P(Du) D(K(Du))`` and ``([K_P]^perp K_PP)(Du) : D2u``.

    ``D(K(Du))`` is formed by the chain rule from ``K_P`` and the Hessian.
    """
    Du, D2u = u.derivatives(x)
    KP = dilation_gradient(Du, tol)
    grad_K = np.einsum("bi,bij->j", KP, D2u)
    normal = nullspace_projection(KP, tol) @ np.einsum(
        "gibj,bij->g", dilation_hessian_projected(Du, tol), D2u)
    return KP @ grad_K, normal


# -- frozen-coefficient linear system ----------------------------------------

def _check_mu(mu):
    if not mu > 1.0:
        raise DomainError(f"mu must exceed 1, got {mu}")


def coefficient_tensor(mu, x):
    """``A[a,i,b,j] = (d_ai - mu x_a x_i/|x|^2)(d_bj - mu x_b x_j/|x|^2)``."""
    _check_mu(mu)
    along, _ = radial_projections(x)
    B = np.eye(along.shape[0]) - mu * along
    return np.einsum("ai,bj->aibj", B, B)


def linear_system_residual(mu, u, x):
    """``A(x) : D2u(x)`` for the coefficients of :func:`coefficient_tensor`."""
    A = coefficient_tensor(mu, x)
    _, D2u = u.derivatives(x)
    return np.einsum("aibj,bij->a", A, D2u)

