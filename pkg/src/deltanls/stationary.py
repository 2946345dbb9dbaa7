"""Positive stationary states at fixed frequency lambda.

Every positive H^1 solution is even, radially decreasing, and determined by
one number t > 1 (the branch coordinate) through the vertex matching
condition f(t) = g(lambda).  This module enumerates the admissible t for
given (p, q, lambda), materializes the explicit profiles, and exposes the
fold frequency lambda_bar past which the two-solution branch disappears.

The zero-frequency solution (algebraic decay, existing iff p < 6 and the
exponents are off the diagonal) is carried with branch coordinate
t = math.inf; it is a genuine branch endpoint, not a large float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra
from .params import Params

#: Relative collapse width below which a bracketed root pair is reported as
#: a single tangency root at t*.
TANGENCY_COLLAPSE_REL = 1e-9


_LN2 = math.log(2.0)


@dataclass(frozen=True)
class BranchPoint:
    """One stationary state: branch coordinate, frequency, offset, peak value.

    For lambda > 0: t = coth((p-2) sqrt(lambda) a / 2) and
    u0 = ((p lambda / 2)(t^2 - 1))^(1/(p-2)).
    For lambda = 0: t = inf and the offset a solves the algebraic vertex
    condition of the power-law profile.

    `d` carries t - 1 at full relative precision (t alone cannot represent
    coordinates within ~1e-16 of 1); consumers that evaluate t^2 - 1 must
    use d * (d + 2).
    """

    t: float
    lam: float
    a: float
    u0: float
    params: Params
    d: float

    @property
    def zero_frequency(self) -> bool:
        return math.isinf(self.t)


@dataclass(frozen=True)
class SolutionSet:
    """All positive solutions at one frequency, ordered by ascending t."""

    points: tuple[BranchPoint, ...]
    lam: float

    @property
    def count(self) -> int:
        return len(self.points)


def branch_point_from_t(params: Params, lam: float, t: float | None = None,
                        d: float | None = None) -> BranchPoint:
    """Materialize the stationary state at frequency lam > 0.

    Accepts the branch coordinate as t, as d = t - 1 (preferred near the
    left endpoint), or both.
    """
    if not lam > 0.0:
        raise ValueError("positive-frequency branch point needs lambda > 0")
    if d is None:
        if t is None or not t > 1.0:
            raise ValueError(f"branch coordinate must exceed 1, got {t}")
        d = t - 1.0
    elif not d > 0.0:
        raise ValueError(f"branch offset must be positive, got {d}")
    t = 1.0 + d
    p = params.p
    sq = math.sqrt(lam)
    # atanh(1/t) = ln((t+1)/(t-1)) / 2, written in d for accuracy near t = 1
    a = (math.log(d + 2.0) - math.log(d)) / ((p - 2.0) * sq)
    u0 = (0.5 * p * lam * d * (d + 2.0)) ** (1.0 / (p - 2.0))
    return BranchPoint(t=t, lam=lam, a=a, u0=u0, params=params, d=d)


def zero_frequency_point(params: Params) -> BranchPoint:
    """The lambda = 0 state (t = inf); exists iff p < 6 off the diagonal."""
    p, q = params.p, params.q
    if not p < 6.0:
        raise ValueError("zero-frequency states require p < 6")
    if params.diagonal:
        raise ValueError("zero-frequency states do not exist on the diagonal")
    cp = algebra.c_p(params)
    a = ((p - 2.0) * cp ** (q - 2.0) / 4.0) ** ((p - 2.0) / (2.0 * q - p - 2.0))
    u0 = cp * a ** (-2.0 / (p - 2.0))
    return BranchPoint(t=math.inf, lam=0.0, a=a, u0=u0, params=params, d=math.inf)


def lambda_bar(params: Params) -> float | None:
    """Fold frequency for q < p/2 + 1: the largest lambda carrying solutions.

    Equal to g^(-1)(f(t*)) with t* the unique zero of f'.  Returns None for
    q > p/2 + 1 where one solution exists at every lambda > 0.
    """
    if params.diagonal:
        raise ValueError("use diagonal_exists on the diagonal q = p/2 + 1")
    if params.q > params.p / 2.0 + 1.0:
        return None
    ts = algebra.t_star(params)
    return algebra.g_inverse(params, algebra.f_of_t(params, ts))


def diagonal_exists(params: Params) -> tuple[bool, float | None]:
    """On the diagonal: whether positive states exist (p > 8) and at which t.

    The matching degenerates to t / sqrt(t^2 - 1) = sqrt(p)/(2 sqrt(2)),
    solvable iff the right side exceeds 1; then t = sqrt(p/(p-8)) for every
    lambda > 0.
    """
    if not params.diagonal:
        raise ValueError("diagonal_exists applies only when q = p/2 + 1 exactly")
    p = params.p
    if p <= 8.0:
        return (False, None)
    return (True, math.sqrt(p / (p - 8.0)))


# ---------------------------------------------------------------------------
# root finding for f(t) = g(lambda) in log coordinates y = ln(t - 1)

_SCAN_Y_LO = -30.0
_SCAN_Y_HI = 14.0
_SCAN_POINTS = 1024
_Y_FLOOR = -33.0   # below this, 1 + e^y is not representable apart from 1.0
_Y_CEIL = 600.0


def _f_from_logd(params: Params, y: float) -> float:
    # f(1 + e^y) computed from d = e^y, accurate for very negative y
    d = math.exp(y)
    expo = (params.q - 2.0) / (params.p - 2.0)
    return (1.0 + d) * (d * (d + 2.0)) ** (-expo)


def _bisect_logd(params: Params, g_level: float, y_lo: float, y_hi: float) -> float:
    """Bisect f(1+e^y) - g_level on a sign-change bracket, then Newton polish.

    Returns the branch offset d = t - 1 (exact even when t rounds to 1).
    """
    F = lambda y: _f_from_logd(params, y) - g_level
    f_lo = F(y_lo)
    f_hi = F(y_hi)
    if f_lo == 0.0:
        return math.exp(y_lo)
    if f_hi == 0.0:
        return math.exp(y_hi)
    if f_lo * f_hi > 0.0:
        raise ValueError("root bracket does not straddle a sign change")
    for _ in range(200):
        if y_hi - y_lo <= 1e-13:
            break
        y_mid = 0.5 * (y_lo + y_hi)
        f_mid = F(y_mid)
        if f_mid == 0.0:
            return math.exp(y_mid)
        if f_lo * f_mid < 0.0:
            y_hi, f_hi = y_mid, f_mid
        else:
            y_lo, f_lo = y_mid, f_mid
    # safeguarded Newton on d = t - 1 using the analytic derivative
    d_lo, d_hi = math.exp(y_lo), math.exp(y_hi)
    d = 0.5 * (d_lo + d_hi)
    for _ in range(4):
        resid = algebra.f_of_t(params, 1.0 + d, d) - g_level
        slope = algebra.f_prime(params, 1.0 + d, d)
        if slope == 0.0:
            break
        d_new = d - resid / slope
        if not (d_lo <= d_new <= d_hi):
            d_new = 0.5 * (d_lo + d_hi)
        if abs(d_new - d) <= 1e-15 * d:
            d = d_new
            break
        d = d_new
    return d


def _scan_roots(params: Params, g_level: float) -> list[float]:
    """Sign-change scan of f - g on the doubly logarithmic grid t = 1 + e^y.

    Returns branch offsets d = t - 1.  The grid is extended outward as
    needed: f diverges at t -> 1+ always, and at t -> inf exactly when
    q < p/2 + 1, so every root is eventually bracketed.
    """
    y_lo, y_hi = _SCAN_Y_LO, _SCAN_Y_HI
    while _f_from_logd(params, y_lo) <= g_level and y_lo > _Y_FLOOR:
        y_lo = max(_Y_FLOOR, y_lo - 10.0)
    two_sided = params.q < params.p / 2.0 + 1.0
    if two_sided:
        while _f_from_logd(params, y_hi) <= g_level and y_hi < _Y_CEIL:
            y_hi = min(_Y_CEIL, y_hi * 2.0)
    ys = np.linspace(y_lo, y_hi, _SCAN_POINTS)
    vals = np.array([_f_from_logd(params, y) - g_level for y in ys])
    roots: list[float] = []
    sign = np.sign(vals)
    for i in range(len(ys) - 1):
        if sign[i] == 0.0:
            roots.append(math.exp(ys[i]))
        elif sign[i] * sign[i + 1] < 0.0:
            roots.append(_bisect_logd(params, g_level, ys[i], ys[i + 1]))
    if sign[-1] == 0.0:
        roots.append(math.exp(ys[-1]))
    return roots


def _roots_of_matching(params: Params, lam: float) -> list[float]:
    """All offsets d = t - 1 with f(t) = g(lambda), fold-aware near tangency."""
    g_level = algebra.g_of_lambda(params, lam)
    roots = _scan_roots(params, g_level)

    if params.q < params.p / 2.0 + 1.0:
        ts = algebra.t_star(params)
        d_star = ts - 1.0
        f_min = algebra.f_of_t(params, ts)
        if abs(g_level - f_min) <= 1e-12 * f_min:
            return [d_star]  # at the fold within double precision
        if g_level < f_min:
            return []
        if len(roots) < 2:
            # grid missed one or both branches near the fold; split at t*
            y_star = math.log(d_star)
            roots = []
            y = y_star - 1.0
            while _f_from_logd(params, y) <= g_level and y > _Y_FLOOR:
                y = max(_Y_FLOOR, y - 10.0)
            if _f_from_logd(params, y) > g_level:
                roots.append(_bisect_logd(params, g_level, y, y_star))
            y = y_star + 1.0
            while _f_from_logd(params, y) <= g_level and y < _Y_CEIL:
                y = min(_Y_CEIL, y * 2.0 if y > 0 else 1.0)
            if _f_from_logd(params, y) > g_level:
                roots.append(_bisect_logd(params, g_level, y_star, y))
        if len(roots) == 2 and abs(roots[1] - roots[0]) <= TANGENCY_COLLAPSE_REL * ts:
            return [d_star]
        if not roots:
            return [d_star]  # tangency to grid resolution
    return sorted(roots)


def solve_for_lambda(params: Params, lam: float) -> SolutionSet:
    """Enumerate every positive H^1 stationary state at frequency lam >= 0.

    lam = 0 yields the algebraically decaying state iff p in (2, 6) off the
    diagonal; lam > 0 on the diagonal yields one state iff p > 8;
    off-diagonal frequencies carry 0, 1 or 2 states depending on the
    position of g(lambda) relative to the minimum of f.
    """
    lam = float(lam)
    if lam < 0.0:
        raise ValueError("no stationary states exist for lambda < 0")
    if lam == 0.0:
        if params.p < 6.0 and not params.diagonal:
            return SolutionSet((zero_frequency_point(params),), 0.0)
        return SolutionSet((), 0.0)
    if params.diagonal:
        exists, t = diagonal_exists(params)
        if not exists:
            return SolutionSet((), lam)
        return SolutionSet((branch_point_from_t(params, lam, t),), lam)
    roots = _roots_of_matching(params, lam)
    points = tuple(branch_point_from_t(params, lam, d=d) for d in roots)
    return SolutionSet(points, lam)


# ---------------------------------------------------------------------------
# profiles and pointwise residuals


def _sinh_neg_pow(z: np.ndarray, expo: float) -> np.ndarray:
    """sinh(z)^(-expo) for z > 0, stable for large z via the log form."""
    z = np.asarray(z, dtype=float)
    big = z > 20.0
    safe = np.where(big, 1.0, z)
    direct = np.sinh(safe) ** (-expo)
    logsinh = z - _LN2 + np.log1p(-np.exp(-2.0 * np.clip(z, 1e-300, None)))
    return np.where(big, np.exp(-expo * logsinh), direct)


def profile(point: BranchPoint, x):
    """Evaluate the profile u at x (scalar or array); even in x.

    lambda > 0: u = (p lam / 2)^(1/(p-2)) sinh(kappa (|x|+a))^(-2/(p-2))
    with kappa = (p-2) sqrt(lam) / 2.
    lambda = 0: u = c_p (|x| + a)^(-2/(p-2)).
    """
    p = point.params.p
    ax = np.abs(np.asarray(x, dtype=float)) + point.a
    expo = 2.0 / (p - 2.0)
    if point.zero_frequency:
        out = algebra.c_p(point.params) * ax ** (-expo)
    else:
        kappa = 0.5 * (p - 2.0) * math.sqrt(point.lam)
        amp = (0.5 * p * point.lam) ** (1.0 / (p - 2.0))
        out = amp * _sinh_neg_pow(kappa * ax, expo)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def profile_derivative(point: BranchPoint, x):
    """du/dx away from 0; at x = 0 returns the one-sided derivative u'(0+)."""
    p = point.params.p
    xs = np.asarray(x, dtype=float)
    ax = np.abs(xs) + point.a
    u = profile(point, xs)
    if point.zero_frequency:
        mag = -(2.0 / (p - 2.0)) * u / ax
    else:
        kappa = 0.5 * (p - 2.0) * math.sqrt(point.lam)
        mag = -math.sqrt(point.lam) * u / np.tanh(kappa * ax)
    out = np.where(xs < 0.0, -mag, mag)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def vertex_residual(point: BranchPoint) -> float:
    """|(-2 u'(0+)) - u0^(q-1)| from the analytic one-sided derivative.

    Contract: at most 1e-8 * u0^(q-1) on every constructed branch point.
    """
    q = point.params.q
    jump = -2.0 * profile_derivative(point, 0.0)
    return abs(jump - point.u0 ** (q - 1.0))


def matching_residual(point: BranchPoint) -> float:
    """|2 sqrt(lam) coth((p-2) sqrt(lam) a / 2) - u0^(q-2)| (lambda > 0 form).

    For the zero-frequency point the analogous algebraic condition
    4 u0 / ((p-2) a) = u0^(q-1) is used.
    """
    p, q = point.params.p, point.params.q
    if point.zero_frequency:
        return abs(4.0 * point.u0 / ((p - 2.0) * point.a) - point.u0 ** (q - 1.0))
    sq = math.sqrt(point.lam)
    lhs = 2.0 * sq / math.tanh(0.5 * (p - 2.0) * sq * point.a)
    return abs(lhs - point.u0 ** (q - 2.0))


def first_integral_residual(point: BranchPoint, x) -> float:
    """max |u'^2 - lam u^2 - (2/p) u^p| over the sample points x (all nonzero)."""
    p = point.params.p
    u = np.asarray(profile(point, x), dtype=float)
    du = np.asarray(profile_derivative(point, x), dtype=float)
    resid = du ** 2 - point.lam * u ** 2 - (2.0 / p) * u ** p
    return float(np.max(np.abs(resid)))
