"""Membership in the inclusion sets ``L_a`` and ``K_a``.

``L_a`` holds the square matrices with ``|A|^2 = a`` and ``det A != 0``;
``K_a`` holds those with dilation ``a`` and a non-degenerate Ahlfors part
``S(A^T A)``.  For ``n = 2`` the Ahlfors part is a trace-free symmetric 2x2
matrix, so its determinant is never positive; ``det_mode`` selects between
the strict-sign reading (``"strict"``) and the non-degeneracy reading
(``"nonzero"``, the default).
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError
from .tensor import InfiniteDilation, ahlfors, dilation

DET_MODES = ("nonzero", "strict")
ANALYTIC_TOL = 1e-9
FD_TOL = 1e-6
DET_SCALE = 1e-12


@dataclass(frozen=True)
class InclusionVerdict:
    """Outcome of one membership test.

    ``deviations`` maps a name to a real; ``tolerances`` holds the bound each
    was tested against.
    """

    member: bool
    set: str
    a: float
    deviations: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    det_mode: str | None = None

    def worst(self, name):
        return self.deviations.get(name, math.nan)


def _square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"inclusion sets contain square matrices, got shape {A.shape}")
    return A


def _sigma_max(A):
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


def in_L_a(A, a, tol=ANALYTIC_TOL, tol_det=None):
    """Test ``|A|^2 = a`` within ``tol`` and ``|det A| > tol_det``.

    ``tol_det`` defaults to ``1e-12 * sigma_max(A)^n``.
    """
    A = _square(A)
    if a < 0:
        raise DomainError(f"a must be non-negative, got {a}")
    n = A.shape[0]
    if tol_det is None:
        tol_det = DET_SCALE * _sigma_max(A) ** n
    norm_dev = abs(float(np.sum(A * A)) - a)
    det = float(np.linalg.det(A))
    member = norm_dev <= tol and abs(det) > tol_det
    return InclusionVerdict(
        member, "L", float(a),
        {"norm_deviation": norm_dev, "determinant": det, "determinant_margin": abs(det) - tol_det},
        {"tol": tol, "tol_det": tol_det})


def in_K_a(A, a, tol=ANALYTIC_TOL, tol_det=None, det_mode="nonzero"):
    """Test ``K(A) = a`` within ``tol`` and non-degeneracy of ``det S(A^T A)``.

    With ``det_mode="strict"`` the determinant must exceed ``tol_det``; with
    ``"nonzero"`` its absolute value must.  ``tol_det`` defaults to
    ``1e-12 * sigma_max(A)^(2n)``, the scale of ``det(A^T A)``.
    """
    A = _square(A)
    if det_mode not in DET_MODES:
        raise DomainError(f"det_mode must be one of {DET_MODES}, got {det_mode!r}")
    n = A.shape[0]
    if tol_det is None:
        tol_det = DET_SCALE * _sigma_max(A) ** (2 * n)
    K = dilation(A)
    if isinstance(K, InfiniteDilation):
        dil_dev = math.inf
    else:
        dil_dev = abs(K - a)
    det_S = float(np.linalg.det(ahlfors(A.T @ A)))
    margin = (det_S if det_mode == "strict" else abs(det_S)) - tol_det
    member = dil_dev <= tol and margin > 0
    return InclusionVerdict(
        member, "K", float(a),
        {"dilation_deviation": dil_dev, "ahlfors_determinant": det_S, "determinant_margin": margin},
        {"tol": tol, "tol_det": tol_det}, det_mode)


def default_tol(u):
    """1e-6 for maps with any finite-difference evaluator, else 1e-9."""
    return ANALYTIC_TOL if u.analytic else FD_TOL


def scan_inclusion(u, samples, set_spec, a, tol=None, det_mode="nonzero", threads=None):
    """Test ``Du(x)`` against ``L_a`` or ``K_a`` at every sample point.

    Evaluation failures are recorded per point.  Returns a
    :class:`~linfty.report.Report` whose verdict is ``pass`` only at full
    membership.
    """
    from .report import Report, point_rows
    from .verify import parallel_map, as_samples

    samples = as_samples(samples, u.n)
    name = {"L": "L", "L_A": "L", "K": "K", "K_A": "K"}.get(str(set_spec).upper())
    if name is None:
        raise DomainError(f"set must be 'L' or 'K', got {set_spec!r}")
    set_spec = name
    if u.N != u.n:
        raise DomainError("inclusion scans need square gradients (N = n)")
    tol = default_tol(u) if tol is None else tol

    def one(x):
        try:
            Du = u.gradient(u.check_point(x))
            if set_spec == "L":
                return in_L_a(Du, a, tol), None
            return in_K_a(Du, a, tol, det_mode=det_mode), None
        except (DomainError, ArithmeticError, ValueError) as exc:
            return None, f"error: {exc}"

    results = parallel_map(one, samples.points, threads)
    key = "norm_deviation" if set_spec == "L" else "dilation_deviation"
    dev = np.array([math.nan if v is None else v.deviations[key] for v, _ in results])
    margins = np.array([math.nan if v is None else v.deviations["determinant_margin"] for v, _ in results])
    flags = []
    for v, err in results:
        if err is not None:
            flags.append([err])
        elif not v.member:
            f = []
            if not v.deviations[key] <= tol:
                f.append("equality")
            if not v.deviations["determinant_margin"] > 0:
                f.append("determinant")
            flags.append(f)
        else:
            flags.append([])
    member = np.array([v is not None and v.member for v, _ in results])
    finite = dev[np.isfinite(dev)]
    summary = {
        "set": set_spec,
        "a": float(a),
        "det_mode": det_mode if set_spec == "K" else None,
        "members": int(member.sum()),
        "count": int(member.size),
        "membership_fraction": float(member.mean()) if member.size else 0.0,
        "worst_deviation": float(finite.max()) if finite.size else None,
        "min_determinant_margin": float(np.nanmin(margins)) if np.any(np.isfinite(margins)) else None,
        "errors": sum(1 for _, e in results if e is not None),
    }
    rows = point_rows(samples.points, dev, dev, flags)
    return Report(
        map=u.name, operator=f"inclusion-{set_spec}", params=dict(u.params), n=u.n,
        samples=samples.describe(), points=rows,
        aggregates=Report.aggregate(dev, np.ones(dev.size, dtype=bool)),
        inclusion=summary,
        tolerances={"tol": tol, "tol_det": f"{DET_SCALE:g} * sigma_max^{'n' if set_spec == 'L' else '2n'}"},
        verdict="pass" if member.size and member.all() else "fail")
