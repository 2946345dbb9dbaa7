"""Mass of the solution branches and its inversion at prescribed mass.

Off the diagonal every positive-frequency state corresponds to one t > 1,
and its squared L^2 norm is the explicit map

    mu(t) = C_pq * f(t)^((6-p)/(2q-p-2)) * I(t),

extended by mu(inf) = mu0 for p < 6 (the zero-frequency state).  The
qualitative shape of mu -- its limits at both ends, where it is monotone,
and where it dips to an interior minimum -- decides for which masses the
constrained problem is solvable, with how many solutions, and what the
mass thresholds are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import algebra, stationary
from .params import Params, Region, classify, expected_solution_regime, ExistenceRule
from .algebra import ScalarEval
from .stationary import BranchPoint

#: Relative mismatch below which a requested mass is identified with mu0
#: (and served by the zero-frequency branch endpoint).
MU0_MATCH_RTOL = 1e-12

#: Relative tolerance of the profile-mass quadrature gate.
MASS_GATE_RTOL = 1e-6

_SCAN_Y_LO = -30.0
_SCAN_Y_HI = 30.0
_SCAN_POINTS = 2048


def monotone_mass_regime(params: Params) -> bool:
    """True where mu(t) is provably strictly increasing on (1, inf).

    Covers q in (2, 4] with q < p/2 + 1, and q >= 4 with q > p/2 + 1.
    The complementary strips (regions C and F) are non-monotone in general.
    """
    p, q = params.p, params.q
    half = p / 2.0 + 1.0
    return (2.0 < q <= 4.0 and q < half) or (q >= 4.0 and q > half)


def mass_of_t(params: Params, t: float, d: float | None = None) -> ScalarEval:
    """mu(t) for t in (1, inf]; t = inf is allowed only for p < 6 (returns mu0).

    Pass d = t - 1 for coordinates too close to 1 for t to represent.
    """
    if params.diagonal:
        raise ValueError("mass-versus-t map is defined off the diagonal only")
    p, q = params.p, params.q
    if d is None and math.isinf(t):
        if p >= 6.0:
            raise ValueError("branch mass diverges as t -> inf for p >= 6")
        return ScalarEval(algebra.constants(params).mu0, 0.0)
    c_pq = algebra.constants(params).c_pq
    factor = c_pq * algebra.f_of_t(params, t, d) ** ((6.0 - p) / (2.0 * q - p - 2.0))
    integral = algebra.I_of_t(params, t, d)
    return ScalarEval(factor * integral.value, abs(factor) * integral.abs_error_estimate)


def diagonal_mass_coefficient(params: Params) -> ScalarEval:
    """M_pq such that mu(lambda) = M_pq lambda^((6-p)/(2(p-2))) on the diagonal, p > 8."""
    exists, t = stationary.diagonal_exists(params)
    if not exists:
        raise ValueError("diagonal mass map requires p > 8")
    p = params.p
    pref = 2.0 ** ((2.0 * p - 6.0) / (p - 2.0)) * p ** (2.0 / (p - 2.0)) / (p - 2.0)
    integral = algebra.I_of_t(params, t)
    return ScalarEval(pref * integral.value, pref * integral.abs_error_estimate)


def mass_of_lambda_diagonal(params: Params, lam: float) -> ScalarEval:
    """Mass of the unique diagonal state at frequency lam > 0 (p > 8 only)."""
    if not lam > 0.0:
        raise ValueError(f"need lambda > 0, got {lam}")
    coeff = diagonal_mass_coefficient(params)
    p = params.p
    scale = lam ** ((6.0 - p) / (2.0 * (p - 2.0)))
    return ScalarEval(coeff.value * scale, coeff.abs_error_estimate * scale)


@dataclass(frozen=True)
class MassAsymptotics:
    """Predicted limits and rates of mu(t) at both branch ends.

    At t -> 1+:  mu ~ t1_prefactor * (t-1)^t1_rate.
    At t -> inf: plateau at mu0 (p < 6), logarithmic growth (p = 6), or
    power growth with exponent (p-6)/(p-2) (p > 6).
    """

    t1_limit: float
    tinf_limit: float
    t1_rate: float
    tinf_rate: float | None
    t1_prefactor: float
    tinf_kind: str  # "plateau" | "log" | "power"


def asymptotics(params: Params) -> MassAsymptotics:
    if params.diagonal:
        raise ValueError("asymptotics of mu(t) are defined off the diagonal only")
    p, q = params.p, params.q
    denom = 2.0 * q - p - 2.0
    t1_rate = (q - 4.0) / denom
    t1_pref = p ** ((q - 4.0) / denom) * 2.0 ** ((6.0 - p) / denom)
    if t1_rate > 0.0:
        t1_limit = 0.0
    elif t1_rate == 0.0:
        t1_limit = t1_pref
    else:
        t1_limit = math.inf
    if p < 6.0:
        return MassAsymptotics(t1_limit, algebra.constants(params).mu0,
                               t1_rate, 0.0, t1_pref, "plateau")
    if p == 6.0:
        return MassAsymptotics(t1_limit, math.inf, t1_rate, None, t1_pref, "log")
    return MassAsymptotics(t1_limit, math.inf, t1_rate,
                           (p - 6.0) / (p - 2.0), t1_pref, "power")


# ---------------------------------------------------------------------------
# sampled curve


@dataclass(frozen=True)
class MassCurve:
    """Sampled mu(t) with its limits and interior critical points."""

    params: Params
    samples: tuple[tuple[float, float, float], ...]  # (t, mu, mu_err)
    limits: tuple[float, float]                      # (t -> 1+, t -> inf)
    extrema: tuple[tuple[float, float], ...]         # interior (t, mu) critical points


@lru_cache(maxsize=64)
def _sampled_mass(params: Params, n: int, y_lo: float, y_hi: float):
    ys = np.linspace(y_lo, y_hi, n)
    ts = 1.0 + np.exp(ys)
    evals = [mass_of_t(params, 1.0 + dd, dd) for dd in np.exp(ys)]
    mus = np.array([e.value for e in evals])
    errs = np.array([e.abs_error_estimate for e in evals])
    return ys, ts, mus, errs


def _h_sign_roots(params: Params, n: int = 512,
                  y_lo: float = _SCAN_Y_LO, y_hi: float = _SCAN_Y_HI) -> list[float]:
    """Branch coordinates where h (hence mu') changes sign, bisected to 1e-12.

    Grid cells where |h| sits below its reported error bound (quadrature
    plus cancellation) carry no sign information and are skipped; a genuine
    simple root is flanked by resolvable values.
    """

    def h_at(y: float) -> algebra.ScalarEval:
        dd = math.exp(y)
        return algebra.h_of_t(params, 1.0 + dd, dd)

    ys = np.linspace(y_lo, y_hi, n)
    evs = [h_at(y) for y in ys]
    hs = np.array([e.value for e in evs])
    resolvable = np.array([abs(e.value) > e.abs_error_estimate for e in evs])
    roots = []
    for i in range(n - 1):
        if not (resolvable[i] and resolvable[i + 1]):
            continue
        if hs[i] * hs[i + 1] < 0.0:
            lo, hi = ys[i], ys[i + 1]
            f_lo = hs[i]
            for _ in range(200):
                if hi - lo <= 1e-12:
                    break
                ev = h_at(0.5 * (lo + hi))
                if abs(ev.value) <= ev.abs_error_estimate:
                    break  # at the noise floor of the cancellation
                if f_lo * ev.value < 0.0:
                    hi = 0.5 * (lo + hi)
                else:
                    lo, f_lo = 0.5 * (lo + hi), ev.value
            roots.append(1.0 + math.exp(0.5 * (lo + hi)))
    return roots


def mass_curve(params: Params, n: int = _SCAN_POINTS,
               y_lo: float = _SCAN_Y_LO, y_hi: float = _SCAN_Y_HI) -> MassCurve:
    """Sample mu on the log grid t = 1 + e^y and annotate limits and extrema."""
    _, ts, mus, errs = _sampled_mass(params, n, y_lo, y_hi)
    asym = asymptotics(params)
    roots = _h_sign_roots(params)
    extrema = tuple((t, mass_of_t(params, t).value) for t in roots)
    samples = tuple((float(t), float(m), float(e)) for t, m, e in zip(ts, mus, errs))
    return MassCurve(params, samples, (asym.t1_limit, asym.tinf_limit), extrema)


# ---------------------------------------------------------------------------
# inversion: solutions at prescribed mass


@dataclass(frozen=True)
class NormalizedSolution:
    """A stationary state together with its prescribed mass and total energy."""

    point: BranchPoint
    mass: float
    energy: float


def profile_mass_quadrature(point: BranchPoint) -> float:
    """Mass of the materialized profile by adaptive quadrature (gate oracle).

    Independent of the closed-form mass map: integrates u(x)^2 directly.
    Positive frequencies are integrated in the scaled variable
    z = (p-2) sqrt(lambda) x / 2 over geometric panels, so branch points
    with tiny lambda (structure on scale 1/sqrt(lambda)) stay resolvable;
    the algebraic zero-frequency tail is added in closed form past a cutoff.
    """
    u2 = lambda x: stationary.profile(point, x) ** 2
    p = point.params.p
    if point.zero_frequency:
        cutoff = max(1e3, 100.0 * point.a)
        core, _ = quad(u2, 0.0, cutoff, epsabs=1e-12, epsrel=1e-10, limit=400)
        cp = algebra.c_p(point.params)
        tail = cp * cp * (p - 2.0) / (6.0 - p) \
            * (cutoff + point.a) ** (-(6.0 - p) / (p - 2.0))
        return 2.0 * (core + tail)
    kappa = 0.5 * (p - 2.0) * math.sqrt(point.lam)
    eps = kappa * point.a
    z_max = max(40.0, 7.0 * (p - 2.0))  # u^2 ~ exp(-4 z/(p-2)) in the far tail
    cuts = [0.0]
    z = eps
    while z < 1.0:
        cuts.append(z)
        z *= 10.0
    cuts.extend([1.0, 5.0, 20.0, z_max])
    cuts = sorted(set(c for c in cuts if c <= z_max))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = quad(lambda zz: u2(zz / kappa), lo, hi,
                      epsabs=1e-14, epsrel=1e-10, limit=200)
        total += val
    return 2.0 * total / kappa


def _bisect_mass(params: Params, mu: float, y_lo: float, y_hi: float,
                 f_lo: float) -> float:
    """Bisect mu(1 + e^y) - mu on a bracket; returns the offset d = t - 1."""
    for _ in range(200):
        if y_hi - y_lo <= 1e-12:
            break
        mid = 0.5 * (y_lo + y_hi)
        dd = math.exp(mid)
        f_mid = mass_of_t(params, 1.0 + dd, dd).value - mu
        if f_mid == 0.0:
            return dd
        if f_lo * f_mid < 0.0:
            y_hi = mid
        else:
            y_lo, f_lo = mid, f_mid
    return math.exp(0.5 * (y_lo + y_hi))


def _scan_crossings(params: Params, mu: float, ys, mus, errs) -> list[float]:
    """Sign changes of mu(t) - mu over the sampled grid, as offsets d.

    Cells whose endpoint values differ by less than the combined error
    bound carry no slope information (the flat plateau tail sits below the
    quadrature noise there) and are skipped.
    """
    vals = mus - mu
    ds: list[float] = []
    eps_mass = 32.0 * 2.220446049250313e-16 * abs(mu)
    for i in range(len(ys) - 1):
        noise = errs[i] + errs[i + 1] + eps_mass
        if abs(vals[i + 1] - vals[i]) <= noise:
            continue
        if vals[i] == 0.0:
            ds.append(math.exp(ys[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            ds.append(_bisect_mass(params, mu, ys[i], ys[i + 1], vals[i]))
    if vals[-1] == 0.0 and abs(vals[-1] - vals[-2]) > errs[-1] + errs[-2] + eps_mass:
        ds.append(math.exp(ys[-1]))
    return ds


def _mu_at(params: Params, y: float) -> float:
    dd = math.exp(y)
    return mass_of_t(params, 1.0 + dd, dd).value


@lru_cache(maxsize=64)
def _dip_location(params: Params) -> tuple[float, float] | None:
    """(log-offset, mass) of the single interior minimum of mu, if there is one."""
    roots = _h_sign_roots(params)
    if len(roots) != 1:
        return None
    y0 = math.log(roots[0] - 1.0)
    t_min, mu_min = _golden_min_mass(params, y0 - 0.5, y0 + 0.5)
    return math.log(t_min - 1.0), mu_min


def _dip_crossings(params: Params, mu: float, y_min: float, mu_min: float) -> list[float]:
    """Both crossings of a V-shaped mass map with the level mu > mu_min."""
    ds: list[float] = []
    y, step = y_min - 1.0, 1.0
    while _mu_at(params, y) <= mu and y > -300.0:
        step *= 2.0
        y = max(-300.0, y - step)
    if _mu_at(params, y) > mu:
        ds.append(_bisect_mass(params, mu, y, y_min, _mu_at(params, y) - mu))
    y, step = y_min + 1.0, 1.0
    while y < 340.0 and _mu_at(params, y) <= mu:
        step *= 2.0
        y = min(340.0, y + step)
    if _mu_at(params, y) > mu:
        ds.append(_bisect_mass(params, mu, y_min, y, mu_min - mu))
    return ds


def _branch_offsets_at_mass(params: Params, mu: float) -> tuple[list[float], bool]:
    """(offsets d = t - 1 with mu(t) = mu, include zero-frequency point?)"""
    region = classify(params)
    mu0 = algebra.constants(params).mu0  # None for p >= 6
    with_zero = (params.p < 6.0 and abs(mu - mu0) <= MU0_MATCH_RTOL * mu0)

    if region in (Region.C, Region.F):
        dip = _dip_location(params)
        if dip is not None:
            y_min, mu_min = dip
            if with_zero:
                # at the plateau level only the falling branch crosses
                return ([_bisect_mass(params, mu, y_min - 40.0, y_min,
                                      _mu_at(params, y_min - 40.0) - mu)], True)
            if mu < mu_min * (1.0 - 1e-12):
                return ([], False)
            if abs(mu - mu_min) <= 1e-12 * mu_min:
                return ([math.exp(y_min)], False)
            return (_dip_crossings(params, mu, y_min, mu_min), False)

    ys, _, mus, errs = _sampled_mass(params, _SCAN_POINTS, _SCAN_Y_LO, _SCAN_Y_HI)
    ds = _scan_crossings(params, mu, ys, mus, errs)
    # masses between the t -> 1+ limit and the first grid value sit left of
    # the grid (relevant near the limit 2 of the q = 4 lines)
    t1_limit = asymptotics(params).t1_limit
    if not with_zero and t1_limit < mu < mus[0]:
        ds.append(_bisect_mass(params, mu, -300.0, ys[0],
                               _mu_at(params, -300.0) - mu))
    if params.p < 6.0 and not with_zero:
        # masses between the grid end value and mu0 cross the plateau tail
        # beyond the default grid; rescan the far window once
        if mu < mu0 and (mus[-1] - mu) * (mu0 - mu) < 0.0:
            ys2, _, mus2, errs2 = _sampled_mass(params, 512, _SCAN_Y_HI, 340.0)
            ds.extend(_scan_crossings(params, mu, ys2, mus2, errs2))
    # collapse duplicates from grazing crossings
    ds.sort()
    deduped: list[float] = []
    for dd in ds:
        if not deduped or dd - deduped[-1] > 1e-9 * deduped[-1]:
            deduped.append(dd)
    return deduped, with_zero


def normalized_solutions(params: Params, mu: float) -> list[NormalizedSolution]:
    """Every stationary state with prescribed mass mu, or [] where none exists.

    Each returned solution passes the profile-mass quadrature gate at
    relative tolerance 1e-6.
    """
    from .energy import branch_energy  # deferred: energy builds on this module

    if not mu > 0.0:
        raise ValueError(f"need mu > 0, got {mu}")
    points: list[BranchPoint] = []
    if params.diagonal:
        if params.p > 8.0:
            p = params.p
            coeff = diagonal_mass_coefficient(params).value
            lam = (mu / coeff) ** (2.0 * (p - 2.0) / (6.0 - p))
            _, t = stationary.diagonal_exists(params)
            points.append(stationary.branch_point_from_t(params, lam, t))
    else:
        ds, with_zero = _branch_offsets_at_mass(params, mu)
        for dd in ds:
            lam = algebra.g_inverse(params, algebra.f_of_t(params, 1.0 + dd, dd))
            points.append(stationary.branch_point_from_t(params, lam, d=dd))
        if with_zero:
            points.append(stationary.zero_frequency_point(params))

    out = []
    for point in points:
        got = profile_mass_quadrature(point)
        if abs(got - mu) > MASS_GATE_RTOL * mu:
            raise RuntimeError(
                f"profile-mass gate failed: requested {mu}, quadrature gives {got} "
                f"(t={point.t}, lambda={point.lam})")
        out.append(NormalizedSolution(point, mu, branch_energy(point).total))
    return out


# ---------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True)
class ThresholdReport:
    """Mass threshold of the existence rule, with endpoint-inclusion flags.

    For the dipping regimes (C, F) the branch minimum is certified two ways
    (root of h, and direct golden-section minimization); both values and
    their gap are reported.
    """

    region: Region
    rule: ExistenceRule
    mu0: float | None
    mu_threshold: float | None
    threshold_attained: bool | None
    lower_cutoff: float | None          # 2.0 for regions G and H, else None
    lower_cutoff_included: bool | None
    minimizer_t: float | None
    h_root_mass: float | None
    direct_min_mass: float | None
    certification_gap: float | None


def _golden_min_mass(params: Params, y_lo: float, y_hi: float) -> tuple[float, float]:
    """Golden-section minimum of mu(1 + e^y) on [y_lo, y_hi] -> (t, mu)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = y_lo, y_hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)

    def mu_at(y: float) -> float:
        dd = math.exp(y)
        return mass_of_t(params, 1.0 + dd, dd).value

    fc = mu_at(c)
    fd = mu_at(d)
    for _ in range(120):
        if b - a < 1e-8:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = mu_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = mu_at(d)
    y = 0.5 * (a + b)
    return 1.0 + math.exp(y), mu_at(y)


def mass_threshold(params: Params) -> ThresholdReport:
    """Region-dependent mass threshold of the existence rule (off-diagonal)."""
    if params.diagonal:
        raise ValueError("mass thresholds are defined off the diagonal only")
    region = classify(params)
    rule = expected_solution_regime(params)
    mu0 = algebra.constants(params).mu0

    if region in (Region.A, Region.E):
        return ThresholdReport(region, rule, mu0, mu0, True, None, None,
                               math.inf, None, None, None)
    if region in (Region.B, Region.D):
        return ThresholdReport(region, rule, mu0, None, None, None, None,
                               None, None, None, None)
    if region is Region.G:
        return ThresholdReport(region, rule, mu0, mu0, True, 2.0, False,
                               math.inf, None, None, None)
    if region is Region.H:
        return ThresholdReport(region, rule, mu0, 2.0, False, 2.0, False,
                               None, None, None, None)

    # regions C and F: interior minimum of the branch mass
    roots = _h_sign_roots(params)
    h_root_mass = None
    minimizer_t = None
    if roots:
        masses = [(mass_of_t(params, t).value, t) for t in roots]
        h_root_mass, minimizer_t = min(masses)
    candidates = []
    if h_root_mass is not None:
        candidates.append((h_root_mass, minimizer_t))
    if region is Region.F:
        candidates.append((mu0, math.inf))
    if not candidates:
        # monotone dip not detected: fall back to the grid minimum
        ys, ts, mus, _ = _sampled_mass(params, _SCAN_POINTS, _SCAN_Y_LO, _SCAN_Y_HI)
        candidates.append((float(np.min(mus)), float(ts[int(np.argmin(mus))])))
    mu_thr, t_min = min(candidates)

    direct_min = None
    gap = None
    if minimizer_t is not None and math.isfinite(minimizer_t):
        y0 = math.log(minimizer_t - 1.0)
        _, direct_min = _golden_min_mass(params, y0 - 0.5, y0 + 0.5)
        gap = abs(direct_min - h_root_mass)
        if direct_min < mu_thr:
            mu_thr = direct_min
    return ThresholdReport(region, rule, mu0, mu_thr, True, None, None, t_min,
                           h_root_mass, direct_min, gap)
