"""Independent brute-force checks: shooting, grid functionals, gradient flow.

Nothing here trusts the closed forms.  The shooter integrates the radial
ODE u'' = lambda u + |u|^(p-2) u from the vertex data (u0, -u0^(q-1)/2)
outward; grid functionals evaluate mass and energy of sampled profiles by
trapezoidal quadrature; the constrained minimizer runs projected gradient
descent on the discretized functional at fixed mass.

Shooting detail: the decaying orbit is a saddle connection, so forward
integration in double precision is eventually taken over by the growing
mode (error ~ eps * exp(sqrt(lambda) x)).  The shooter therefore stops at
a capture radius where |u| + |u'|/sqrt(lambda) has dropped to 1e-6 * u0 --
reached well before noise can -- and continues the tail with the exact
decay law of the first integral.  Trajectories that instead cross zero,
turn around, or exceed 1e3 * u0 are classified as non-decaying; that
dichotomy is what the vertex-height bisection consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .params import Params
from .stationary import BranchPoint, profile as analytic_profile

#: Relative (to u0) capture radius of the saddle neighbourhood.  Forward
#: noise grows like exp(sqrt(lambda) x); 1e-5 is reached a safe margin
#: before the noise floor while keeping the matched tail error negligible.
CAPTURE_TOL = 1e-5
#: Looser capture for zero-frequency shots (algebraic tails, polynomial error growth).
CAPTURE_TOL_ZERO = 1e-3
#: Relative decay gate evaluated at the far end of the domain.
DECAY_GATE = 1e-7
#: Relative blow-up ceiling.
BLOWUP_FACTOR = 1e3
#: Energy below which a flow in a bounded regime is declared divergent.
FLOW_DIVERGENCE_FLOOR = -1.0e6


@dataclass(frozen=True)
class GridProfile:
    """Even function sampled at n+1 uniform nodes on [0, L]."""

    L: float
    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} nodal values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("profile contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n + 1)

    @property
    def h(self) -> float:
        return self.L / self.n


@dataclass(frozen=True)
class ShootingResult:
    u0: float
    lam: float
    decay_ok: bool
    mass: float
    profile: GridProfile
    outcome: str               # decayed | crossed_zero | rebounded | blew_up | no_event
    first_integral_drift: float
    capture_x: float | None


def default_domain(lam: float) -> float:
    """Truncation radius: 20 decay lengths for lam > 0, 1e3 for algebraic tails."""
    if lam > 0.0:
        return max(50.0, 20.0 / math.sqrt(lam))
    return 1e3


def save_profile_csv(profile: GridProfile, path: str) -> None:
    """Write the profile as (x, u) rows at 17 significant digits.

    The header documents the grid convention: values are the even half-line
    samples at n+1 uniform nodes on [0, L].
    """
    lines = [
        "# even half-line profile: u sampled at n+1 uniform nodes on [0, L]",
        f"# L={profile.L:.17g} n={profile.n}",
        "x,u",
    ]
    lines.extend(f"{x:.17g},{u:.17g}" for x, u in zip(profile.x, profile.values))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_profile_csv(path: str) -> GridProfile:
    """Read a profile written by :func:`save_profile_csv`."""
    xs: list[float] = []
    us: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#") or line == "x,u":
                continue
            sx, su = line.split(",")
            xs.append(float(sx))
            us.append(float(su))
    if len(xs) < 2:
        raise ValueError(f"{path}: expected at least two profile rows")
    return GridProfile(xs[-1], len(xs) - 1, np.asarray(us))


def sample_profile(point: BranchPoint, L: float, n: int) -> GridProfile:
    """Materialize a branch state on a uniform grid (closed-form sampling)."""
    x = np.linspace(0.0, L, n + 1)
    return GridProfile(L, n, np.asarray(analytic_profile(point, x), dtype=float))


def functional_eval(params: Params, profile: GridProfile):
    """(mass, EnergyBreakdown) of a sampled even profile by trapezoidal rules.

    mass = 2 * trapz(u^2); kinetic = trapz(u'^2) with centered differences
    (the factor 2 for evenness cancels the 1/2 of the functional); bulk and
    point terms follow the functional directly.
    """
    from .energy import EnergyBreakdown  # local: avoid import cycle

    u = profile.values
    x = profile.x
    mass = 2.0 * float(np.trapezoid(u * u, x))
    du = np.gradient(u, profile.h)
    kinetic = float(np.trapezoid(du * du, x))
    bulk = (2.0 / params.p) * float(np.trapezoid(np.abs(u) ** params.p, x))
    point = abs(u[0]) ** params.q / params.q
    return mass, EnergyBreakdown(kinetic, bulk, point, kinetic + bulk - point)


def _tail_value(params: Params, lam: float, u_d: float, dx: float) -> float:
    """Decay law continuation a distance dx past the capture point."""
    if u_d <= 0.0:
        return 0.0
    if lam > 0.0:
        return u_d * math.exp(-math.sqrt(lam) * dx)
    p = params.p
    half = 0.5 * (p - 2.0)
    base = u_d ** (-half) + half * math.sqrt(2.0 / p) * dx
    return base ** (-1.0 / half)


def shoot(params: Params, lam: float, u0: float, L: float | None = None,
          n: int = 20000, rtol: float = 1e-12) -> ShootingResult:
    """Integrate the vertex initial-value problem outward and classify it.

    decay_ok requires the trajectory to stay positive and the far-end gate
    |u(L)| + |u'(L)| <= 1e-7 * u0 to hold; blow-up past 1e3 * u0 is an
    outcome, not an exception.
    """
    if not u0 > 0.0:
        raise ValueError(f"need a positive vertex height, got {u0}")
    if lam < 0.0:
        raise ValueError("shooting is defined for lambda >= 0")
    if L is None:
        L = default_domain(lam)
    p, q = params.p, params.q

    def rhs(x, y):
        return (y[1], lam * y[0] + abs(y[0]) ** (p - 2.0) * y[0])

    slope_scale = max(math.sqrt(lam), 1.0) if lam > 0.0 else 1.0
    cap_tol = CAPTURE_TOL if lam > 0.0 else CAPTURE_TOL_ZERO

    def ev_capture(x, y):
        return y[0] - y[1] / slope_scale - cap_tol * u0

    def ev_cross(x, y):
        return y[0]

    def ev_rebound(x, y):
        return y[1]

    def ev_blow(x, y):
        return y[0] - BLOWUP_FACTOR * u0

    ev_capture.terminal, ev_capture.direction = True, -1.0
    ev_cross.terminal, ev_cross.direction = True, -1.0
    ev_rebound.terminal, ev_rebound.direction = True, 1.0
    ev_blow.terminal, ev_blow.direction = True, 1.0

    sol = solve_ivp(rhs, (0.0, L), [u0, -0.5 * u0 ** (q - 1.0)],
                    method="DOP853", rtol=rtol,
                    atol=[1e-14 * u0, 1e-14 * u0 * slope_scale],
                    events=[ev_capture, ev_cross, ev_rebound, ev_blow],
                    dense_output=True)

    captured = len(sol.t_events[0]) > 0
    crossed = len(sol.t_events[1]) > 0
    rebounded = len(sol.t_events[2]) > 0
    blew_up = len(sol.t_events[3]) > 0
    x_end = sol.t[-1]
    if (crossed or rebounded) and not captured:
        # a turn or zero crossing with the whole state inside the saddle
        # neighbourhood means the trajectory tracked the connection until
        # integration noise took over: classify as captured there
        u_end, du_end = (float(v) for v in sol.sol(x_end))
        if abs(u_end) <= 10.0 * cap_tol * u0 \
                and abs(du_end) <= 10.0 * cap_tol * u0 * slope_scale:
            captured, crossed, rebounded = True, False, False

    x = np.linspace(0.0, L, n + 1)
    numeric = x <= x_end
    vals = np.empty(n + 1)
    vals[numeric] = sol.sol(x[numeric])[0]
    if captured:
        u_d = float(sol.sol(x_end)[0])
        vals[~numeric] = [_tail_value(params, lam, u_d, xi - x_end)
                          for xi in x[~numeric]]
        capture_x = x_end
        outcome = "decayed"
    else:
        vals[~numeric] = 0.0
        capture_x = None
        if crossed:
            outcome = "crossed_zero"
        elif blew_up:
            outcome = "blew_up"
        elif rebounded:
            outcome = "rebounded"
        else:
            outcome = "no_event"

    # first-integral drift along the numeric part of the trajectory
    xs = np.linspace(0.0, x_end, 512)
    uu, dd = sol.sol(xs)
    H = dd ** 2 - lam * uu ** 2 - (2.0 / p) * np.abs(uu) ** p
    scale = lam * u0 ** 2 + (2.0 / p) * u0 ** p
    drift = float(np.max(np.abs(H - H[0]))) / scale

    stayed_positive = outcome in ("decayed", "no_event") and np.all(vals >= 0.0)
    if outcome == "decayed":
        dx = L - capture_x
        uL = _tail_value(params, lam, float(sol.sol(x_end)[0]), dx)
        duL = math.sqrt(lam) * uL if lam > 0.0 \
            else math.sqrt(2.0 / p) * uL ** (p / 2.0)
        gate = uL + duL <= DECAY_GATE * u0
    elif outcome == "no_event":
        uL, duL = sol.sol(L)
        gate = abs(uL) + abs(duL) <= DECAY_GATE * u0
    else:
        gate = False

    profile = GridProfile(L, n, vals if stayed_positive else np.maximum(vals, 0.0))
    mass = 2.0 * float(np.trapezoid(profile.values ** 2, profile.x))
    return ShootingResult(u0=u0, lam=lam, decay_ok=bool(gate and stayed_positive),
                          mass=mass, profile=profile, outcome=outcome,
                          first_integral_drift=drift, capture_x=capture_x)


def shooting_sup_distance(point: BranchPoint, result: ShootingResult) -> float:
    """sup_x |numeric profile - closed-form profile| on the shooter's grid."""
    exact = np.asarray(analytic_profile(point, result.profile.x), dtype=float)
    return float(np.max(np.abs(result.profile.values - exact)))


def bisect_vertex_height(params: Params, lam: float, lo: float, hi: float,
                         rel_tol: float = 1e-8, L: float | None = None) -> float:
    """Locate a decaying vertex height between an undershoot and an overshoot.

    Trajectories rebound (or blow up) on one side of the connection and
    cross zero on the other; that dichotomy is monotone in u0 near a simple
    connection, so plain bisection applies.
    """

    def over(u0: float) -> bool:
        out = shoot(params, lam, u0, L=L, n=200).outcome
        if out == "decayed":
            return False  # landed on the connection within tolerance
        return out == "crossed_zero"

    o_lo, o_hi = over(lo), over(hi)
    if o_lo == o_hi:
        raise ValueError("bracket does not straddle the decay/blow-up dichotomy")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel_tol * mid:
            return mid
        if over(mid) == o_hi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# discrete functional and projected gradient flow


def discrete_energy(params: Params, u: np.ndarray, h: float) -> float:
    """Energy of the piecewise-linear even extension of nodal values u."""
    p, q = params.p, params.q
    w = np.full(len(u), h)
    w[0] = w[-1] = 0.5 * h
    kin = float(np.sum(np.diff(u) ** 2)) / h
    bulk = (2.0 / p) * float(np.sum(w * np.abs(u) ** p))
    point = abs(u[0]) ** q / q
    return kin + bulk - point


def discrete_gradient(params: Params, u: np.ndarray, h: float) -> np.ndarray:
    """Coordinate gradient dE/du_i of :func:`discrete_energy`."""
    p, q = params.p, params.q
    w = np.full(len(u), h)
    w[0] = w[-1] = 0.5 * h
    g = np.zeros_like(u)
    g[1:-1] = 2.0 * (2.0 * u[1:-1] - u[:-2] - u[2:]) / h
    g[0] = 2.0 * (u[0] - u[1]) / h
    g[-1] = 2.0 * (u[-1] - u[-2]) / h
    g += 2.0 * w * np.abs(u) ** (p - 2.0) * u
    g[0] -= np.abs(u[0]) ** (q - 2.0) * u[0]
    return g


def discrete_mass(u: np.ndarray, h: float) -> float:
    w = np.full(len(u), h)
    w[0] = w[-1] = 0.5 * h
    return 2.0 * float(np.sum(w * u * u))


class FlowDivergence(RuntimeError):
    """Raised when the flow dives below the probe floor in a bounded regime."""

    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = trace


def make_initial_profile(mu: float, L: float, n: int,
                         width: float = 2.0) -> GridProfile:
    """Mass-mu bump exp(-(x/width)^2) on the grid (generic flow seed)."""
    x = np.linspace(0.0, L, n + 1)
    u = np.exp(-((x / width) ** 2))
    u *= math.sqrt(mu / discrete_mass(u, L / n))
    return GridProfile(L, n, u)


def constrained_minimize(params: Params, mu: float, profile0: GridProfile,
                         max_iters: int = 200000, stall_rel: float = 1e-10,
                         probe_floor: float | None = None):
    """Projected gradient descent at fixed discrete mass.

    Steps follow the L^2 gradient (coordinate gradient divided by the
    quadrature weights, which concentrates the point term at the origin
    node); every step is renormalized back to the mass sphere and accepted
    only if the energy does not increase, with halving on increase and mild
    growth on success.  Returns (final profile, energy trace).

    In probe mode (probe_floor set) the flow stops as soon as the energy
    drops below the floor; in bounded regimes such a drop raises
    :class:`FlowDivergence` instead.
    """
    h = profile0.h
    u = profile0.values.copy()
    u *= math.sqrt(mu / discrete_mass(u, h))
    w = np.full(len(u), h)
    w[0] = w[-1] = 0.5 * h

    energy = discrete_energy(params, u, h)
    trace = [energy]
    tau = 1e-3 * h * h
    stall_count = 0
    for _ in range(max_iters):
        g = discrete_gradient(params, u, h) / (2.0 * w)
        accepted = False
        for _ in range(60):
            trial = u - tau * g
            trial *= math.sqrt(mu / discrete_mass(trial, h))
            e_trial = discrete_energy(params, trial, h)
            if e_trial <= energy:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            break
        u = trial
        drop = energy - e_trial
        energy = e_trial
        trace.append(energy)
        tau *= 1.3
        if energy < FLOW_DIVERGENCE_FLOOR and probe_floor is None:
            raise FlowDivergence(
                "flow descended below the divergence floor in a bounded regime",
                trace)
        if probe_floor is not None and energy < probe_floor:
            break
        if drop <= stall_rel * max(1.0, abs(energy)):
            stall_count += 1
            if stall_count >= 8:
                break
        else:
            stall_count = 0
    return GridProfile(profile0.L, profile0.n, u), trace
