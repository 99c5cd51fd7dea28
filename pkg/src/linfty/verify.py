"""Sampling, oracle pairing, residual aggregation and nonuniqueness demos.

Everything here is deterministic given the seed: points are generated from
``numpy.random.default_rng(seed)`` and point-parallel evaluation keeps the
input order, so reports are identical across thread counts.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
import math
import os

import numpy as np
from scipy.spatial import ConvexHull

from . import operators as ops
from . import solutions
from .errors import DomainError
from .finite_diff import GRADIENT_STEP, HESSIAN_STEP, fd_gradient, fd_hessian, relative_error
from .report import FAIL, PASS, Report, point_rows

__all__ = [
    "SampleSet", "sample_punctured_ball", "as_samples", "parallel_map",
    "fd_gradient", "fd_hessian", "oracle_check", "residual_report",
    "boundary_check", "nonuniqueness_demo", "convex_hull_check", "OPERATORS",
]

DEFAULT_SEED = 42
DEFAULT_R_MIN = 1e-2
DEFAULT_R_MAX = 0.99
RESIDUAL_TOL = 1e-6
BOUNDARY_TOL = 1e-10
GRADIENT_ORACLE_TOL = 1e-6
HESSIAN_ORACLE_TOL = 1e-5
INTERFACE_BAND = 1e-3
INNER_PROXY_RADIUS = 1e-3
DISTINCTNESS = 1e-2


# -- sampling ---------------------------------------------------------------

@dataclass(frozen=True)
class SampleSet:
    """Points of ``R^n`` plus the recipe that produced them."""

    n: int
    points: np.ndarray
    spec: dict = field(default_factory=dict)

    def __len__(self):
        return self.points.shape[0]

    def radii(self):
        return np.linalg.norm(self.points, axis=1)

    def describe(self):
        return dict(self.spec, count=len(self))


def as_samples(samples, n):
    if isinstance(samples, SampleSet):
        if samples.n != n:
            raise DomainError(f"samples live in R^{samples.n}, map in R^{n}")
        return samples
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.shape[1] != n:
        raise DomainError(f"expected points in R^{n}, got shape {pts.shape}")
    return SampleSet(n, pts, {"kind": "explicit"})


def _directions(rng, n, k):
    if n == 1:
        return np.where(np.arange(k) % 2 == 0, 1.0, -1.0)[:, None]
    if n == 2:
        phase = rng.uniform(0.0, 2.0 * np.pi / k)
        theta = phase + 2.0 * np.pi * np.arange(k) / k
        return np.column_stack([np.cos(theta), np.sin(theta)])
    d = rng.standard_normal((k, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def sample_punctured_ball(n, shells=10, per_shell=36, r_min=DEFAULT_R_MIN, r_max=DEFAULT_R_MAX,
                          seed=DEFAULT_SEED):
    """Points on ``shells`` concentric spheres with geometrically spaced radii.

    In the plane each shell is an equally spaced ring with a random phase;
    in higher dimension the directions are normalised Gaussians.
    """
    if n < 1 or shells < 1 or per_shell < 1:
        raise DomainError("n, shells and per_shell must be positive")
    if not 0.0 < r_min <= r_max <= 1.0:
        raise DomainError(f"need 0 < r_min <= r_max <= 1, got r_min={r_min}, r_max={r_max}")
    rng = np.random.default_rng(seed)
    radii = np.geomspace(r_min, r_max, shells)
    pts = []
    for r in radii:
        d = _directions(rng, n, per_shell)
        x = r * d
        # rounding can push |x| an ulp outside [r_min, r_max]
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        x *= np.clip(norms, r_min * (1 + 4e-16), r_max * (1 - 4e-16)) / norms
        pts.append(x)
    spec = {"kind": "shells", "shells": shells, "per_shell": per_shell,
            "r_min": r_min, "r_max": r_max, "seed": seed}
    return SampleSet(n, np.vstack(pts), spec)


def _threads(threads):
    if threads is None:
        env = os.environ.get("LINFTY_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise DomainError(f"threads must be positive, got {threads}")
    return threads


def parallel_map(fn, items, threads=None):
    """``list(map(fn, items))`` on a thread pool; order is preserved."""
    items = list(items)
    threads = min(_threads(threads), max(1, len(items)))
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


# -- operators by name --------------------------------------------------------

def _op_infinity_laplacian(u, x, mu):
    t, nrm = ops.infinity_laplacian_decoupled(u, x)
    return ops.infinity_laplacian(u, x), (t, nrm)


def _op_q_infinity(u, x, mu):
    t, nrm = ops.q_infinity_decoupled(u, x)
    return ops.q_infinity(u, x), (t, nrm)


def _op_linear(u, x, mu):
    return ops.linear_system_residual(mu, u, x), None


OPERATORS = {
    "infinity-laplacian": _op_infinity_laplacian,
    "q-infinity": _op_q_infinity,
    "linear": _op_linear,
}


def _resolve_op(op, u, mu):
    if op not in OPERATORS:
        raise DomainError(f"unknown operator {op!r}; choose from {sorted(OPERATORS)}")
    if op == "linear":
        mu = u.params.get("mu") if mu is None else mu
        if mu is None:
            raise DomainError("the linear system needs mu")
        if not mu > 1.0:
            raise DomainError(f"mu must exceed 1, got {mu}")
    if op == "q-infinity" and u.N != u.n:
        raise DomainError("q-infinity needs N = n")
    return OPERATORS[op], mu


# -- oracle -------------------------------------------------------------------

def oracle_check(u, samples, grad_tol=GRADIENT_ORACLE_TOL, hess_tol=HESSIAN_ORACLE_TOL, threads=None):
    """Compare analytic evaluators with central differences at every sample.

    Steps are ``1e-5`` (gradient of the value) and ``1e-4`` (gradient of the
    analytic gradient), each scaled by ``min(1, |x|)`` so that stencils stay
    proportionate near the puncture.
    """
    samples = as_samples(samples, u.n)
    entries = {}
    for which, tol in (("gradient", grad_tol), ("hessian", hess_tol)):
        if u.provenance.get(which) != ops.ANALYTIC:
            entries[which] = {"provenance": u.provenance.get(which), "skipped": True, "passed": True}
            continue

        def one(x, which=which):
            scale = min(1.0, float(np.linalg.norm(x)))
            try:
                if which == "gradient":
                    return relative_error(u.gradient(x), fd_gradient(u, x, GRADIENT_STEP * scale))
                return relative_error(u.hessian(x), fd_hessian(u, x, HESSIAN_STEP * scale))
            except (DomainError, ArithmeticError, ValueError):
                return math.nan

        errs = np.array(parallel_map(one, samples.points, threads))
        bad = int(np.count_nonzero(~np.isfinite(errs)))
        worst = float(np.nanmax(errs)) if np.any(np.isfinite(errs)) else math.nan
        entries[which] = {"provenance": ops.ANALYTIC, "max_relative_error": worst,
                          "tol": tol, "errors": bad,
                          "passed": bad == 0 and worst <= tol}
    entries["passed"] = all(e["passed"] for e in entries.values())
    return entries


# -- residuals ----------------------------------------------------------------

def residual_report(op, u, samples, tol=RESIDUAL_TOL, mu=None, boundary=False, oracle=True,
                    band=INTERFACE_BAND, threads=None):
    """Evaluate operator ``op`` on ``u`` at every sample and aggregate.

    Residuals are normalised by ``(1 + |Du|^3)(1 + |D2u|)`` before the
    ``tol`` comparison.  Points whose rank decision is fragile, or within
    ``band/2`` of the map's known interface, are flagged and left out of the
    aggregates.  The verdict also requires the FD oracle (and, with
    ``boundary``, the outer boundary check) to pass.
    """
    samples = as_samples(samples, u.n)
    fn, mu = _resolve_op(op, u, mu)

    def one(x):
        flags = []
        if u.interface_distance is not None and u.interface_distance(x) < 0.5 * band:
            flags.append("interface-band")
        try:
            value, parts = fn(u, x, mu)
            Du, D2u = u.derivatives(x)
        except (DomainError, ArithmeticError, ValueError) as exc:
            return math.nan, math.nan, (math.nan, math.nan), flags + [f"error: {exc}"]
        if ops.near_interface(Du):
            flags.append("near-interface")
        scale = ops.normalization(Du, D2u)
        raw = float(np.linalg.norm(value))
        if parts is None:
            pn = (math.nan, math.nan)
        else:
            pn = tuple(float(np.linalg.norm(p)) / scale for p in parts)
        return raw, raw / scale, pn, flags

    results = parallel_map(one, samples.points, threads)
    raw = np.array([r[0] for r in results])
    normed = np.array([r[1] for r in results])
    parts = np.array([r[2] for r in results])
    flags = [r[3] for r in results]
    include = np.array([not any(f in ("interface-band", "near-interface") for f in fl) for fl in flags])
    aggregates = Report.aggregate(normed, include)
    aggregates["raw"] = Report.aggregate(raw, include)
    if op != "linear":
        aggregates["tangential_max"] = _nanmax(parts[include, 0]) if include.any() else None
        aggregates["normal_max"] = _nanmax(parts[include, 1]) if include.any() else None
    oracle_entry = oracle_check(u, samples, threads=threads) if oracle else {"passed": True, "skipped": True}
    bnd = boundary_check(u, u.n) if boundary else None

    ok = (aggregates["included"] > 0 and aggregates["non_finite"] == 0
          and aggregates["max"] is not None and aggregates["max"] <= tol
          and oracle_entry["passed"] and (bnd is None or bnd["passed"]))
    params = dict(u.params)
    if mu is not None:
        params["mu"] = float(mu)
    return Report(
        map=u.name, operator=op, params=params, n=u.n, samples=samples.describe(),
        points=point_rows(samples.points, raw, normed, flags), aggregates=aggregates,
        boundary=bnd, oracle=oracle_entry,
        tolerances={"residual": tol, "interface_band": band,
                    "gradient_oracle": GRADIENT_ORACLE_TOL, "hessian_oracle": HESSIAN_ORACLE_TOL,
                    "boundary": BOUNDARY_TOL if boundary else None},
        verdict=PASS if ok else FAIL)


def _nanmax(v):
    v = np.asarray(v, dtype=float)
    return float(np.nanmax(v)) if np.any(np.isfinite(v)) else None


def _unit_sphere(n, count, seed=DEFAULT_SEED):
    return _directions(np.random.default_rng(seed), n, count)


def boundary_check(u, n, tol=BOUNDARY_TOL, count=72, inner_radius=INNER_PROXY_RADIUS, seed=DEFAULT_SEED):
    """``max |u(x) - x|`` on ``|x| = 1`` and ``max |u(x)|`` on ``|x| = inner_radius``.

    The inner value is a proxy for the limit ``u(0) = 0`` and does not enter
    ``passed``; if the map is undefined there the error is recorded instead.
    """
    dirs = _unit_sphere(n, count, seed)
    out = {"tol": tol}
    try:
        dev = max(float(np.linalg.norm(u.value(u.check_point(d)) - d)) for d in dirs)
        out["outer"] = {"max_deviation": dev, "count": count, "passed": dev <= tol}
    except (DomainError, ArithmeticError, ValueError) as exc:
        out["outer"] = {"error": str(exc), "count": count, "passed": False}
    try:
        mags = [float(np.linalg.norm(u.value(u.check_point(inner_radius * d)))) for d in dirs]
        out["inner"] = {"radius": inner_radius, "max_norm": max(mags)}
    except (DomainError, ArithmeticError, ValueError) as exc:
        out["inner"] = {"radius": inner_radius, "error": str(exc)}
    out["passed"] = out["outer"]["passed"]
    return out


# -- nonuniqueness --------------------------------------------------------------

def eikonal_r_min(a_values, n, r_min=None):
    """Smallest admissible sampling radius shared by several eikonal maps.

    Without an explicit ``r_min`` this is ``max(1e-2, sqrt(1.25 t0))`` over
    the family, ``t0`` being the profile's blow-up point.
    """
    if r_min is not None:
        return r_min
    floor = max(math.sqrt(1.25) * solutions.existence_radius(a, n) for a in a_values)
    return max(DEFAULT_R_MIN, floor)


def eikonal_t_min(r_min):
    # profile reaches a little inside the sampled annulus, for FD stencils
    return (0.99 * r_min) ** 2


def sup_distance(u, v, samples):
    """``max |u(x) - v(x)|`` over the sample points."""
    return max(float(np.linalg.norm(u.value(x) - v.value(x))) for x in samples.points)


def _demo_members(problem, params, n, r_min):
    if problem == "infinity-laplacian":
        t_min = eikonal_t_min(r_min)
        return [solutions.eikonal_map(a, n, t_min=t_min) for a in params], None
    if problem == "q-infinity":
        return [solutions.power_map(g, n) for g in params], None
    if problem == "linear":
        if len(params) != 1:
            raise DomainError("the linear demo takes a single mu (members u^mu and u*)")
        mu = params[0]
        return [solutions.mu_map(mu, n), solutions.identity_map(n)], mu
    raise DomainError(f"unknown problem {problem!r}")


def nonuniqueness_demo(problem, params, n, samples=None, tol=RESIDUAL_TOL, delta=DISTINCTNESS,
                       threads=None, shells=10, per_shell=36, r_min=None, r_max=DEFAULT_R_MAX,
                       seed=DEFAULT_SEED):
    """Build several solutions of one Dirichlet problem and certify them.

    ``problem`` is ``"infinity-laplacian"`` (``params`` are levels ``a``),
    ``"q-infinity"`` (exponents ``gamma``) or ``"linear"`` (a single ``mu``,
    giving the pair ``u^mu`` and ``u*``).  Each member must pass its
    residual and boundary checks on the common samples, and every pair must
    differ by at least ``delta`` somewhere on them.
    """
    params = [float(p) for p in params]
    if len(set(params)) != len(params):
        raise DomainError("parameter values must be distinct")
    if problem != "linear" and len(params) < 2:
        raise DomainError("a nonuniqueness demo needs at least two parameter values")
    if problem == "infinity-laplacian":
        r_min = eikonal_r_min(params, n, r_min)
    elif r_min is None:
        r_min = DEFAULT_R_MIN
    members, mu = _demo_members(problem, params, n, r_min)
    if samples is None:
        samples = sample_punctured_ball(n, shells, per_shell, r_min, r_max, seed)
    samples = as_samples(samples, n)

    reports = tuple(residual_report(problem, m, samples, tol=tol, mu=mu, boundary=True, threads=threads)
                    for m in members)
    pairs = []
    for i, j in combinations(range(len(members)), 2):
        pairs.append({"i": i, "j": j, "sup_distance": sup_distance(members[i], members[j], samples)})
    min_dist = min(p["sup_distance"] for p in pairs)
    ok = all(r.passed for r in reports) and min_dist >= delta
    maxima = [r.aggregates.get("max") for r in reports]
    return Report(
        map="family", operator=problem,
        params={"values": params, "mu": mu} if mu is not None else {"values": params},
        n=n, samples=samples.describe(),
        aggregates={"members": len(reports), "passed": sum(r.passed for r in reports),
                    "max": max((m for m in maxima if m is not None), default=None)},
        tolerances={"residual": tol, "distinctness": delta},
        members=reports,
        distances={"pairs": pairs, "min": min_dist, "delta": delta},
        verdict=PASS if ok else FAIL)


# -- convex hull ----------------------------------------------------------------

def convex_hull_check(u, r1, r2, count=720, shells=8, seed=DEFAULT_SEED, rtol=1e-12):
    """Sampled check of ``u(annulus) within co(u(boundary))``.

    In the plane the boundary circles are sampled at ``count`` angles and
    interior points are tested against the exact hull of their images.  For
    ``n >= 3`` the sufficient criterion is used: ``|u|`` increases along
    every sampled ray and never exceeds its minimum over the outer sphere.
    """
    if not 0.0 < r1 < r2 < 1.0:
        raise DomainError(f"need 0 < r1 < r2 < 1, got ({r1}, {r2})")
    n = u.n
    interior_r = np.geomspace(r1, r2, shells + 2)[1:-1]
    if n == 2:
        dirs = _unit_sphere(2, count, seed)
        bnd = np.array([u.value(r * d) for r in (r1, r2) for d in dirs])
        hull = ConvexHull(bnd)
        scale = float(np.max(np.linalg.norm(bnd, axis=1)))
        # interior rings at angles offset from the boundary ones
        off = np.column_stack([np.cos(np.pi / count), np.sin(np.pi / count)])
        rot = np.array([[off[0, 0], -off[0, 1]], [off[0, 1], off[0, 0]]])
        pts = np.array([u.value(r * (rot @ d)) for r in interior_r for d in dirs])
        side = pts @ hull.equations[:, :-1].T + hull.equations[:, -1]
        return bool(np.all(side <= rtol * scale))
    dirs = _unit_sphere(n, max(count // 4, 16), seed)
    radii = np.concatenate([[r1], interior_r, [r2]])
    mags = np.array([[np.linalg.norm(u.value(r * d)) for r in radii] for d in dirs])
    increasing = bool(np.all(np.diff(mags, axis=1) > 0))
    return increasing and bool(np.max(mags[:, 1:-1]) <= np.min(mags[:, -1]))
