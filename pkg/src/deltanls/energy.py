"""Energy of branch states and the ground-state energy level E(mu).

The functional is E(u) = (1/2)||u'||_2^2 + (1/p)||u||_p^p - (1/q)|u(0)|^q.
For branch states all three pieces reduce to closed forms in (t, lambda),
so the level curve E(mu) = inf {E(u) : ||u||_2^2 = mu} is assembled from
branch enumeration plus the vanishing competitor 0: the level is always
non-positive and non-increasing, and the minimizer (when one exists) is a
stationary state.  Attainment bookkeeping is explicit: per sample the flag
says attained / infimum-not-attained / minus-infinity / unknown.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import algebra, massmap, stationary
from .params import Params, Region, classify
from .stationary import BranchPoint

#: Numerical stand-in for "below any floor" in unboundedness probes.
PROBE_FLOOR = -1.0e6


@dataclass(frozen=True)
class EnergyBreakdown:
    """The three pieces of the functional and their signed sum."""

    kinetic: float   # (1/2) ||u'||_2^2
    bulk: float      # (1/p) ||u||_p^p
    point: float     # (1/q) |u(0)|^q
    total: float     # kinetic + bulk - point


def branch_energy(point: BranchPoint) -> EnergyBreakdown:
    """Closed-form energy pieces of a branch state.

    For lambda > 0, with B(t) = t (t^2-1)^(2/(p-2)) and the shared prefactor
    P = 2^((p-4)/(p-2)) p^(2/(p-2)) lambda^((p+2)/(2(p-2))) / (p+2):

        kinetic = P (B + I(t)),   bulk = P (B - 4 I(t)/(p-2)),
        point   = (1/q) (p lambda / 2)^(q/(p-2)) (t^2-1)^(q/(p-2)).

    The lambda = 0 state integrates termwise to algebraic expressions in
    the offset a (its kinetic and bulk pieces coincide).
    """
    p, q = point.params.p, point.params.q
    if point.zero_frequency:
        cp = algebra.c_p(point.params)
        a_pow = point.a ** (-(p + 2.0) / (p - 2.0))
        kinetic = 4.0 * cp * cp * a_pow / ((p - 2.0) * (p + 2.0))
        bulk = 2.0 * cp ** p * a_pow * (p - 2.0) / (p * (p + 2.0))
        pt = cp ** q * point.a ** (-2.0 * q / (p - 2.0)) / q
        return EnergyBreakdown(kinetic, bulk, pt, kinetic + bulk - pt)
    t, lam = point.t, point.lam
    tsq = point.d * (point.d + 2.0)
    pref = 2.0 ** ((p - 4.0) / (p - 2.0)) * p ** (2.0 / (p - 2.0)) \
        * lam ** ((p + 2.0) / (2.0 * (p - 2.0))) / (p + 2.0)
    block = t * tsq ** (2.0 / (p - 2.0))
    integral = algebra.I_of_t(point.params, t, point.d).value
    kinetic = pref * (block + integral)
    bulk = pref * (block - 4.0 * integral / (p - 2.0))
    pt = (0.5 * p * lam) ** (q / (p - 2.0)) * tsq ** (q / (p - 2.0)) / q
    return EnergyBreakdown(kinetic, bulk, pt, kinetic + bulk - pt)


def multiplier_identity_residual(point: BranchPoint, mass: float) -> float:
    """|lambda - (u0^q - ||u'||^2 - ||u||_p^p) / mu|, an exact identity on branches."""
    e = branch_energy(point)
    q, p = point.params.q, point.params.p
    lam_from_energy = (q * e.point - 2.0 * e.kinetic - p * e.bulk) / mass
    return abs(point.lam - lam_from_energy)


def gagliardo_nirenberg_margin(point: BranchPoint, mass: float | None = None) -> float:
    """||u||_2 ||u'||_2 - ||u||_inf^2 for the materialized profile (must be >= 0)."""
    if mass is None:
        mass = massmap.profile_mass_quadrature(point)
    grad_sq = 2.0 * branch_energy(point).kinetic
    return math.sqrt(mass * grad_sq) - point.u0 ** 2


def peak_bound_margin(point: BranchPoint) -> float:
    """p/8 - u0^(p+2-2q): non-negative on every branch state when q < p/2 + 1."""
    p, q = point.params.p, point.params.q
    return p / 8.0 - point.u0 ** (p + 2.0 - 2.0 * q)


# ---------------------------------------------------------------------------
# ground-state energy level


class Attainment(enum.Enum):
    ATTAINED = "attained"
    NOT_ATTAINED = "infimum-not-attained"
    MINUS_INFINITY = "minus-infinity"
    UNKNOWN = "unknown-finiteness"


@dataclass(frozen=True)
class EnergySample:
    """One point of the level curve: value, multiplier, provenance, flag."""

    mu: float
    value: float | None          # None for minus-infinity / unknown samples
    lam: float | None            # multiplier of the minimizing branch, if any
    branch_id: str
    flag: Attainment
    candidates: tuple[tuple[float, float, float], ...] = field(default_factory=tuple)
    # (t, lambda, energy) of every branch state at this mass


@dataclass(frozen=True)
class EnergyCurve:
    params: Params
    samples: tuple[EnergySample, ...]


@lru_cache(maxsize=64)
def _plateau_energy(params: Params) -> float:
    return branch_energy(stationary.zero_frequency_point(params)).total


def groundstate_energy(params: Params, mu: float) -> EnergySample:
    """E(mu) at one mass, with attainment resolved region by region.

    Regions D and E (and G past mass 2) are unbounded below: the sample is
    flagged minus-infinity and carries no number.  On the diagonal with
    p >= 6 finiteness is genuinely open and reported as unknown.
    """
    if not mu > 0.0:
        raise ValueError(f"need mu > 0, got {mu}")
    region = classify(params)

    if region in (Region.D, Region.E):
        return EnergySample(mu, None, None, "none", Attainment.MINUS_INFINITY)
    if region is Region.G:
        if mu <= 2.0:
            return EnergySample(mu, 0.0, None, "vanishing", Attainment.NOT_ATTAINED)
        return EnergySample(mu, None, None, "none", Attainment.MINUS_INFINITY)
    if region is Region.I:
        if params.p < 6.0:
            return EnergySample(mu, 0.0, None, "vanishing", Attainment.NOT_ATTAINED)
        cands: tuple = ()
        if params.p > 8.0:
            sols = massmap.normalized_solutions(params, mu)
            cands = tuple((s.point.t, s.point.lam, s.energy) for s in sols)
        return EnergySample(mu, None, None, "none", Attainment.UNKNOWN, cands)

    if region is Region.A:
        mu0 = algebra.constants(params).mu0
        if mu > mu0 * (1.0 + massmap.MU0_MATCH_RTOL):
            # constant level past mu0; only partial mass can concentrate
            return EnergySample(mu, _plateau_energy(params), 0.0, "plateau",
                                Attainment.NOT_ATTAINED)

    sols = massmap.normalized_solutions(params, mu)
    cands = tuple(sorted((s.point.t, s.point.lam, s.energy) for s in sols))
    if not sols:
        return EnergySample(mu, 0.0, None, "vanishing", Attainment.NOT_ATTAINED, cands)
    best = min(sols, key=lambda s: s.energy)
    if best.point.zero_frequency:
        branch_id = "zero-frequency"
    elif len(sols) == 1:
        branch_id = "only"
    else:
        branch_id = "lower" if best.point.t <= sols[0].point.t else "upper"
    if best.energy <= 0.0:
        return EnergySample(mu, best.energy, best.point.lam, branch_id,
                            Attainment.ATTAINED, cands)
    # branch states exist but all cost positive energy: the level sits at 0
    return EnergySample(mu, 0.0, None, "vanishing", Attainment.NOT_ATTAINED, cands)


def energy_curve(params: Params, mu_grid) -> EnergyCurve:
    """Sample the level curve on the given masses (ascending order enforced)."""
    mus = sorted(float(m) for m in mu_grid)
    return EnergyCurve(params, tuple(groundstate_energy(params, m) for m in mus))


def zero_level_mass(params: Params) -> float | None:
    """Largest mass with E(mu) = 0, where the level starts strictly negative.

    Exactly 2 for q = 4; located numerically in regions C and F as the zero
    of the minimal branch energy; None where the level is negative for all
    masses (A, B) or identically unbounded/zero elsewhere.
    """
    region = classify(params)
    if region in (Region.G, Region.H):
        return 2.0
    if region not in (Region.C, Region.F):
        return None

    thr = massmap.mass_threshold(params)

    def min_branch_energy(mu: float) -> float:
        sols = massmap.normalized_solutions(params, mu)
        return min(s.energy for s in sols)

    lo = thr.mu_threshold * (1.0 + 1e-9)
    if min_branch_energy(lo) <= 0.0:
        return thr.mu_threshold
    hi = max(2.0 * lo, 4.0)
    while min_branch_energy(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("no sign change found for the zero-level mass")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-10 * lo:
            break
        if min_branch_energy(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def multiplier_consistency(params: Params, mu: float, step: float) -> float:
    """|dE/dmu + lambda(mu)/2| via Richardson-refined central differences.

    Defined where the minimizing branch is unique and smooth around mu.
    """
    center = groundstate_energy(params, mu)
    if center.lam is None:
        raise ValueError("multiplier is undefined: no minimizing branch at this mass")

    def level(m: float) -> float:
        s = groundstate_energy(params, m)
        if s.value is None:
            raise ValueError("level curve is not finite near the requested mass")
        return s.value

    def central(s: float) -> float:
        return (level(mu + s) - level(mu - s)) / (2.0 * s)

    d1 = central(step)
    d2 = central(step / 2.0)
    deriv = (4.0 * d2 - d1) / 3.0
    return abs(deriv + center.lam / 2.0)


# ---------------------------------------------------------------------------
# unboundedness probes


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of a closed-form trial-family descent at fixed mass."""

    min_energy: float
    descended_below_floor: bool
    floor: float
    family: str
    best: dict


def unboundedness_probe(params: Params, mu: float,
                        floor: float = PROBE_FLOOR) -> ProbeResult:
    """Scan closed-form trial energies and report the lowest value found.

    Trial functions are exponential bumps delta * exp(-delta^2 |x|)
    rescaled to the target mass; for q != 4 the mass rescaling gives

        E = -mu'^(q/(4-q)) (delta^q/q - delta^4/2)
            + (2 delta^(p-2)/p^2) mu'^((p+2-q)/(4-q))

    evaluated over a delta ladder and masses mu' <= mu (parking the rest of
    the mass at infinity costs nothing, so any trial at mu' <= mu bounds the
    level at mu).  For q = 4 that rescaling degenerates and the width family
    sqrt(sigma) u(sigma x) is used instead.
    """
    p, q = params.p, params.q
    if not mu > 0.0:
        raise ValueError(f"need mu > 0, got {mu}")

    with np.errstate(over="ignore", invalid="ignore"):
        if q == 4.0:
            sigmas = np.logspace(0.0, 8.0, 81)
            deltas = np.logspace(-1.0, 1.0, 21)
            S, D = np.meshgrid(sigmas, deltas, indexing="ij")
            vals = (S ** 2 * mu * D ** 4 * (2.0 - mu) / 4.0
                    + S ** (p / 2.0 - 1.0) * 2.0 * mu ** (p / 2.0)
                    * D ** (p - 2.0) / p ** 2)
            family = "width-rescaled bump"
            axes = {"sigma": S, "delta": D}
        else:
            deltas = np.logspace(-2.0, 2.0, 81)
            mus = mu * np.logspace(-6.0, 0.0, 31)
            D, M = np.meshgrid(deltas, mus, indexing="ij")
            vals = (-M ** (q / (4.0 - q)) * (D ** q / q - D ** 4 / 2.0)
                    + (2.0 * D ** (p - 2.0) / p ** 2)
                    * M ** ((p + 2.0 - q) / (4.0 - q)))
            family = "mass-rescaled bump"
            axes = {"delta": D, "mu_trial": M}

    finite = np.isfinite(vals)
    if not np.any(finite):
        raise RuntimeError("trial family evaluated to no finite energies")
    idx = np.unravel_index(np.nanargmin(np.where(finite, vals, np.inf)), vals.shape)
    best_val = float(vals[idx])
    best = {name: float(grid[idx]) for name, grid in axes.items()}
    return ProbeResult(best_val, best_val < floor, floor, family, best)


# ---------------------------------------------------------------------------
# convexity of the level curve


@dataclass(frozen=True)
class ConvexityReport:
    """Concave-then-convex diagnosis of the level curve (regions A and B)."""

    mu_bar: float                # crossing located from second differences
    lambda_peak_mass: float      # mass of the branch point maximizing lambda
    crossing_gap: float          # grid spacing at the crossing
    annotation: str


def convexity_scan(params: Params, mu_grid=None) -> ConvexityReport:
    """Locate the single concave-to-convex crossing of the level curve.

    Second divided differences must change sign at most once, from <= 0 to
    >= 0; anything else is reported as insufficient resolution.  The
    crossing is cross-checked against the mass of the fold point t*, where
    the multiplier lambda(mu) peaks.
    """
    p, q = params.p, params.q
    if not q < min(4.0, p / 2.0 + 1.0):
        raise ValueError("level-curve convexity split needs q < min(4, p/2 + 1)")
    if mu_grid is None:
        if p < 6.0:
            mu0 = algebra.constants(params).mu0
            mu_grid = np.linspace(mu0 / 400.0, mu0 * (1.0 - 1e-4), 400)
        else:
            mu_grid = np.geomspace(1e-2, 1e3, 400)
    mus = np.asarray(sorted(float(m) for m in mu_grid))
    levels = np.array([groundstate_energy(params, m).value for m in mus])
    if np.any(~np.isfinite(levels)):
        raise ValueError("level curve is not finite on the requested grid")

    dd = np.empty(len(mus) - 2)
    for i in range(1, len(mus) - 1):
        left = (levels[i] - levels[i - 1]) / (mus[i] - mus[i - 1])
        right = (levels[i + 1] - levels[i]) / (mus[i + 1] - mus[i])
        dd[i - 1] = 2.0 * (right - left) / (mus[i + 1] - mus[i - 1])

    noise = 64.0 * np.finfo(float).eps * np.max(np.abs(levels)) \
        / np.min(np.diff(mus)) ** 2
    signs = np.where(np.abs(dd) <= noise, 0.0, np.sign(dd))
    nonzero = signs[signs != 0.0]
    if len(nonzero) == 0:
        raise ValueError("grid resolution insufficient: no curvature resolved")
    flips = np.nonzero(np.diff(nonzero) != 0.0)[0]
    if len(flips) != 1 or nonzero[0] >= 0.0 or nonzero[-1] <= 0.0:
        raise ValueError(
            "grid resolution insufficient: curvature does not split cleanly "
            f"into a concave then a convex part ({len(flips)} sign flips)")

    last_neg = int(np.max(np.nonzero(signs < 0.0)[0]))
    first_pos = int(np.min(np.nonzero(signs > 0.0)[0]))
    lo = mus[1 + last_neg]
    hi = mus[1 + first_pos]
    mu_bar = 0.5 * (lo + hi)
    lam_peak_mass = massmap.mass_of_t(params, algebra.t_star(params)).value
    return ConvexityReport(mu_bar, lam_peak_mass, hi - lo, "concave-then-convex")
