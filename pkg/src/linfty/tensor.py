"""Small dense linear algebra: projections, Ahlfors operator, dilation.

Matrices are plain ``numpy`` arrays indexed ``P[alpha, i]`` (rows live in the
target space R^N, columns in the domain R^n).  Four-tensors are arrays of
shape ``(N, n, N, n)`` indexed ``A[alpha, i, beta, j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

RANK_TOL = 1e-10


@dataclass(frozen=True)
class InfiniteDilation:
    """The value ``+inf`` taken by the dilation on rank-deficient matrices.

    Kept distinct from ``float('inf')`` so that callers can tell a rank
    failure apart from an overflow.
    """

    rank: int

    def __float__(self):
        return math.inf

    def __repr__(self):
        return f"InfiniteDilation(rank={self.rank})"


def _as_vector(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError(f"expected a vector, got shape {x.shape}")
    return x


def _as_matrix(P):
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise DomainError(f"expected a matrix, got shape {P.shape}")
    return P


def radial_projections(x):
    """Return ``([x]^T, [x]^perp)``, the projections along and across ``x``."""
    x = _as_vector(x)
    r2 = x @ x
    if r2 == 0.0:
        raise DomainError("radial projections are undefined at the origin")
    along = np.outer(x, x) / r2
    return along, np.eye(x.size) - along


def singular_values(P):
    return np.linalg.svd(_as_matrix(P), compute_uv=False)


def numerical_rank(P, tol=RANK_TOL):
    """Number of singular values above ``tol * sigma_max``."""
    s = singular_values(P)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def interface_gap(P, tol=RANK_TOL):
    """Ratio of the smallest retained to the largest discarded singular value.

    When nothing is discarded the cutoff ``tol * sigma_max`` stands in for the
    discarded value.  A small gap means the rank decision is fragile.
    """
    s = singular_values(P)
    if s.size == 0 or s[0] == 0.0:
        return math.inf
    cut = tol * s[0]
    r = int(np.count_nonzero(s > cut))
    discarded = s[r] if r < s.size else 0.0
    return s[r - 1] / max(discarded, cut)


def nullspace_projection(P, tol=RANK_TOL):
    """Orthogonal projection of R^N onto the nullspace of ``P.T``.

    ``P`` is ``N x n``; the result is ``N x N``.  Singular values at or below
    ``tol * sigma_max`` count as zero, so the zero matrix maps to the identity.
    """
    P = _as_matrix(P)
    U, s, _ = np.linalg.svd(P, full_matrices=True)
    r = 0 if s.size == 0 or s[0] == 0.0 else int(np.count_nonzero(s > tol * s[0]))
    W = U[:, r:]
    return W @ W.T


def ahlfors(A):
    """Trace-free symmetric part ``(A + A^T)/2 - tr(A)/n I``."""
    A = _as_matrix(A)
    n, m = A.shape
    if n != m:
        raise DomainError(f"Ahlfors operator needs a square matrix, got {A.shape}")
    return 0.5 * (A + A.T) - (np.trace(A) / n) * np.eye(n)


def _gram(P):
    P = _as_matrix(P)
    return P, P.T @ P


def dilation(P, tol=RANK_TOL):
    """``|P|^2 / det(P^T P)^(1/n)``, or :class:`InfiniteDilation` if rank < n."""
    P = _as_matrix(P)
    n = P.shape[1]
    s = singular_values(P)
    r = 0 if s.size == 0 or s[0] == 0.0 else int(np.count_nonzero(s > tol * s[0]))
    if r < n:
        return InfiniteDilation(r)
    # det(P^T P)^(1/n) from singular values: avoids squaring the condition number
    scaled = s / s[0]
    return float(np.sum(scaled * scaled) * math.exp(-2.0 * np.sum(np.log(scaled)) / n))


def _full_rank_gram(P, tol):
    P, C = _gram(P)
    n = P.shape[1]
    if numerical_rank(P, tol) < n:
        raise DomainError("dilation derivatives need rank(P) = n")
    sign, logdet = np.linalg.slogdet(C)
    return P, C, np.linalg.inv(C), math.exp(logdet / n)


def dilation_gradient(P, tol=RANK_TOL):
    """Derivative ``K_P`` of the dilation, an ``N x n`` matrix."""
    P = _as_matrix(P)
    n = P.shape[1]
    if numerical_rank(P, tol) < n:
        raise DomainError("dilation derivatives need rank(P) = n")
    # 2 P (I - |P|^2/n C^{-1}) / det(C)^{1/n} in SVD form, without forming C^{-1}
    U, s, Vt = np.linalg.svd(P, full_matrices=False)
    d = math.exp(2.0 * np.sum(np.log(s)) / n)
    norm2 = np.sum(s * s)
    return (2.0 / d) * (U * (s - (norm2 / n) / s)) @ Vt


def conformal_tensor(n):
    """Constant tensor ``E[k, j, l, m] = d_ml d_jk + d_mj d_kl - (2/n) d_mk d_jl``."""
    I = np.eye(n)
    return (np.einsum("ml,jk->kjlm", I, I)
            + np.einsum("mj,kl->kjlm", I, I)
            - (2.0 / n) * np.einsum("mk,jl->kjlm", I, I))


def dilation_hessian_projected(P, tol=RANK_TOL):
    """The explicit part of ``K_PP`` that survives projection by ``[K_P]^perp``.

    The full Hessian carries an extra term of the form ``K_P(P)[alpha, m] *
    B[m, beta, i, j]``; it is killed by ``[K_P]^perp`` and is not included, so
    the result is only meaningful after that projection.
    """
    P, C, Cinv, d = _full_rank_gram(P, tol)
    N, n = P.shape
    first = (2.0 / d) * np.einsum("ab,ij->aibj", np.eye(N), Cinv @ ahlfors(C))
    second = (2.0 / d) * np.einsum("am,bl,ik,kjlm->aibj", P, P, Cinv, conformal_tensor(n))
    return first + second


def rank_one_inverse(gamma, x):
    """Closed-form inverse of ``I + gamma [x]^T``."""
    if gamma == -1.0:
        raise DomainError("I - [x]^T is singular")
    along, _ = radial_projections(x)
    return np.eye(along.shape[0]) - (gamma / (gamma + 1.0)) * along
