"""The singular first-order problem for the eikonal profile ``g_a``.

The profile solves ``g'(t) = F(t, g)`` with ``g(1) = 0`` and is integrated
backwards from ``t = 1``.  In the log variable ``s = ln t`` the equation
becomes autonomous, ``dg/ds = (sqrt(a e^{-2g} - (n-1)) - 1) / 2``, which is
what the stepper actually integrates.

Going backwards ``w = e^g`` satisfies ``dw/ds = (sqrt(a - (n-1) w^2) - w)/2``,
bounded below by a positive constant on ``[0, 1]``; hence ``g`` reaches
``-inf`` at a strictly positive ``t``.  :func:`blowup_time` locates that point
by quadrature and :func:`solve_profile` raises :class:`SingularityReached`
when asked to integrate past it.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate
from scipy.interpolate import BPoly

from .errors import DomainError, SingularityReached

DEFAULT_TOL = 1e-10
DEFAULT_T_MIN = 1e-6
MAX_LOG_STEP = 0.02

# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _check_params(a, n):
    if n < 1:
        raise DomainError(f"dimension must be positive, got {n}")
    if not a > n:
        raise DomainError(f"the eikonal level a must exceed n (a={a}, n={n})")


def upper_bound(a, n):
    """``ln sqrt(a/n)``: ``F`` is smooth and positive for ``y`` below this."""
    return 0.5 * math.log(a / n)


def _radicand(y, a, n):
    return a * math.exp(-2.0 * y) - (n - 1)


def rhs(t, y, a, n):
    """``F(t, y) = (sqrt(a e^{-2y} - (n-1)) - 1) / (2t)``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if y >= upper_bound(a, n):
        raise DomainError(f"y={y} outside the admissible region y < ln sqrt(a/n)")
    return (math.sqrt(_radicand(y, a, n)) - 1.0) / (2.0 * t)


def second_derivative(t, g, gprime, a, n):
    """``g'' = -(g'/t)(1 + a e^{-2g} / (2 sqrt(a e^{-2g} - (n-1))))`` along a solution."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if g >= upper_bound(a, n):
        raise DomainError(f"g={g} outside the admissible region g < ln sqrt(a/n)")
    q = a * math.exp(-2.0 * g)
    return -(gprime / t) * (1.0 + q / (2.0 * math.sqrt(q - (n - 1))))


def _log_rhs(g, a, n):
    # dg/ds; exp overflow below g ~ -354 is reported by the caller as a singularity
    return 0.5 * (math.sqrt(_radicand(g, a, n)) - 1.0)


def blowup_time(a, n):
    """The ``t0 > 0`` at which the backward solution reaches ``g = -inf``.

    Computed independently of the stepper from
    ``ln t0 = -2 * int_0^1 dw / (sqrt(a - (n-1) w^2) - w)``.
    """
    _check_params(a, n)
    val, _ = integrate.quad(lambda w: 1.0 / (math.sqrt(a - (n - 1) * w * w) - w), 0.0, 1.0,
                            epsabs=1e-14, epsrel=1e-13)
    return math.exp(-2.0 * val)


@dataclass(frozen=True)
class ProfileSolution:
    """Grid values of ``g_a`` with a piecewise quintic Hermite interpolant.

    The interpolant is built in ``s = ln t`` from ``(g, dg/ds, d2g/ds2)`` at the
    nodes, so it is C^2 and its derivatives are exact derivatives of the
    value it returns.
    """

    t: np.ndarray
    g: np.ndarray
    gprime: np.ndarray
    gsecond: np.ndarray
    a: float
    n: int
    t_min: float
    tol: float
    _poly: BPoly

    @property
    def size(self):
        return self.t.size

    def _s(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.t[0], self.t[-1]
        if np.any(t < lo * (1 - 1e-14)) or np.any(t > hi * (1 + 1e-14)):
            raise DomainError(f"t outside the solved interval [{lo}, {hi}]")
        return np.log(np.clip(t, lo, hi))

    def __call__(self, t):
        return self._poly(self._s(t))

    def derivatives(self, t):
        """Return ``(g, g', g'')`` in the ``t`` variable."""
        t = np.asarray(t, dtype=float)
        s = self._s(t)
        g = self._poly(s)
        gs = self._poly(s, 1)
        gss = self._poly(s, 2)
        return g, gs / t, (gss - gs) / t**2

    def ode_residual(self, t):
        """``|g'_interp(t) - F(t, g_interp(t))|`` at the given abscissae."""
        g, gp, _ = self.derivatives(t)
        F = np.array([rhs(ti, gi, self.a, self.n) for ti, gi in zip(np.atleast_1d(t), np.atleast_1d(g))])
        return np.abs(np.atleast_1d(gp) - F)

    def midpoints(self):
        return np.sqrt(self.t[1:] * self.t[:-1])

    def to_csv(self, path):
        """Write ``t,g,gprime,gsecond`` rows with 17 significant digits."""
        data = np.column_stack([self.t, self.g, self.gprime, self.gsecond])
        np.savetxt(path, data, delimiter=",", header="t,g,gprime,gsecond", comments="", fmt="%.17g")


# interior abscissae (fractions of a step) where the interpolant's defect is checked
_DEFECT_TAU = np.linspace(0.1, 0.9, 9)


def _hermite5_weights(tau):
    # rows: p(0), p'(0), p''(0), p(1), p'(1), p''(1) of the monomials tau^k
    k = np.arange(6)
    rows = [k == 0, k == 1, 2.0 * (k == 2),
            np.ones(6), k.astype(float), k * (k - 1.0)]
    Minv = np.linalg.inv(np.array(rows, dtype=float))
    tau = np.asarray(tau, dtype=float)[:, None]
    value = tau ** k
    deriv = k * tau ** np.maximum(k - 1, 0)
    return value @ Minv, deriv @ Minv


_DEFECT_VALUE, _DEFECT_DERIV = _hermite5_weights(_DEFECT_TAU)


def _second_log_derivative(g, gs, a, n):
    return -a * math.exp(-2.0 * g) / (2.0 * math.sqrt(_radicand(g, a, n))) * gs


def _step_defect(g0, g1, s0, h, a, n):
    """Largest ODE residual ``|g' - F|`` (in ``t``) of the step's quintic Hermite interpolant."""
    d0 = _log_rhs(g0, a, n)
    d1 = _log_rhs(g1, a, n)
    # shifted by g0 so the weights act on the increment, not on |g|
    data = np.array([0.0, h * d0, h * h * _second_log_derivative(g0, d0, a, n),
                     g1 - g0, h * d1, h * h * _second_log_derivative(g1, d1, a, n)])
    g_in = g0 + _DEFECT_VALUE @ data
    gs_in = (_DEFECT_DERIV @ data) / h
    if np.any(g_in >= upper_bound(a, n)):
        return math.inf
    rad = a * np.exp(-2.0 * g_in) - (n - 1)
    resid = np.abs(gs_in - 0.5 * (np.sqrt(rad) - 1.0)) / np.exp(s0 + _DEFECT_TAU * h)
    return float(np.max(resid))


def _dopri_step(f, y, h, k1):
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(aij * kj for aij, kj in zip(_A[i], k))
        k.append(f(yi))
    y5 = y + h * float(np.dot(_B5, k))
    err = h * float(np.dot(_B5 - _B4, k))
    return y5, err, k[6]


def solve_profile(a, n, t_min=DEFAULT_T_MIN, tol=DEFAULT_TOL, max_log_step=MAX_LOG_STEP):
    """Integrate ``g' = F(t, g)``, ``g(1) = 0`` backwards from 1 down to ``t_min``.

    Adaptive Dormand-Prince 5(4) in ``s = ln t``.  A step is accepted when
    its local error estimate is at most ``tol * max(1, |g|)`` and the dense
    interpolant's ODE residual ``|g' - F(t, g)|`` inside the step is at most
    ``tol``.  Raises :class:`SingularityReached` if the
    step size underflows (or ``g`` leaves floating-point range) before
    ``t_min`` is reached.
    """
    _check_params(a, n)
    if not 0.0 < t_min < 1.0:
        raise DomainError(f"t_min must lie in (0, 1), got {t_min}")
    if not tol > 0:
        raise DomainError("tol must be positive")

    def f(g):
        return _log_rhs(g, a, n)

    s_end = math.log(t_min)
    s, g = 0.0, 0.0
    k1 = f(g)
    h = -min(max_log_step, 0.1 * tol ** 0.2)
    ss, gs = [s], [g]
    eps = np.finfo(float).eps
    while s > s_end:
        if s + h < s_end:
            h = s_end - s
        if abs(h) < 16 * eps * max(1.0, abs(s)):
            raise SingularityReached(
                f"profile blows up near t={math.exp(s):.15g} (g={g:.6g}); "
                f"choose t_min above it", math.exp(s), g)
        try:
            g_new, err, k7 = _dopri_step(f, g, h, k1)
            ok = math.isfinite(g_new) and math.isfinite(err)
        except (OverflowError, ValueError):
            ok, err = False, math.inf
        scale = tol * max(1.0, abs(g), abs(g_new) if ok else 0.0)
        ratio = abs(err) / scale if ok else math.inf
        if ratio <= 1.0:
            defect = _step_defect(g, g_new, s, h, a, n) / tol
            ratio = max(ratio, defect)
        if ratio <= 1.0:
            s = s_end if s + h <= s_end else s + h
            g = g_new
            k1 = k7
            ss.append(s)
            gs.append(g)
            factor = 5.0 if ratio == 0 else min(5.0, 0.9 * ratio ** -0.2)
        else:
            factor = 0.2 if not math.isfinite(ratio) else max(0.2, 0.9 * ratio ** -0.2)
        h = -min(abs(h) * factor, max_log_step)

    s_arr = np.array(ss[::-1])
    g_arr = np.array(gs[::-1])
    g_arr[-1] = 0.0
    t_arr = np.exp(s_arr)
    t_arr[-1] = 1.0
    t_arr[0] = t_min
    gs_ = np.array([_log_rhs(v, a, n) for v in g_arr])
    gss_ = np.array([-a * math.exp(-2 * v) / (2 * math.sqrt(_radicand(v, a, n))) * d
                     for v, d in zip(g_arr, gs_)])
    poly = BPoly.from_derivatives(np.log(t_arr), np.column_stack([g_arr, gs_, gss_]))
    gprime = gs_ / t_arr
    gsecond = np.array([second_derivative(t, v, d, a, n) for t, v, d in zip(t_arr, g_arr, gprime)])
    return ProfileSolution(t_arr, g_arr, gprime, gsecond, float(a), int(n), float(t_min), float(tol), poly)
