"""Regular solutions of the radial equation, their zeros and phase shifts.

The equation integrated is

    psi'' + (E - V(r) - (lam^2 - 1/4)/r^2) psi = 0,      lam = ell + 1/2,

with the Cauchy normalization psi(r) * r^(-ell-1) -> 1 at the origin.
Integration starts at a small r0 > 0 from the two-term Frobenius series
psi ~ r^(ell+1) (1 + (V(0+) - E) r^2 / (4 ell + 6)), which sidesteps the
centrifugal singularity; r0 is shrunk until the truncated term is below
1e-9 so the normalization invariant holds at the series handoff.

For piecewise-constant potentials every operation here transparently
dispatches to the closed-form backend in :mod:`zeroline.exact`; the
adaptive integrator (DOP853 with dense output) covers everything else.
Integration legs are split at potential discontinuities so the integrator
never steps across a jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import spherical_jn, spherical_yn

from .errors import ZeroBeyondRange
from .exact import ExactRegularSolution, exact_regular_solution
from .potentials import (PiecewiseConstantPotential, Potential, ZeroPotential,
                         abs_integral)

__all__ = [
    "AngularParameter",
    "as_angular",
    "RegularSolutionTrajectory",
    "ZeroSet",
    "integrate_regular",
    "exact_regular_solution",
    "find_zeros",
    "nth_zero",
    "phase_shift",
    "phase_shift_curve",
    "bound_states",
]

_OVERFLOW_LOG = 575.0          # ln(|psi|) guard, ~1e250
_DEFAULT_CEILING = 1000.0


@dataclass(frozen=True)
class AngularParameter:
    """Angular-momentum parameter lam = ell + 1/2, allowed real >= 1/2.

    The centrifugal coefficient used everywhere is exactly lam^2 - 1/4,
    which is analytic in lam and lets zero lines continue through
    non-integer ell.
    """

    lam: float

    def __post_init__(self):
        if self.lam < 0.5:
            raise ValueError("lam must be >= 1/2")

    @classmethod
    def from_ell(cls, ell: float) -> "AngularParameter":
        return cls(lam=float(ell) + 0.5)

    @property
    def ell(self) -> float:
        return self.lam - 0.5

    @property
    def centrifugal(self) -> float:
        return self.lam * self.lam - 0.25


def as_angular(ell_like) -> AngularParameter:
    """Coerce an ell value (int/float) or AngularParameter."""
    if isinstance(ell_like, AngularParameter):
        return ell_like
    return AngularParameter.from_ell(ell_like)


def _series_start(potential: Potential, ang: AngularParameter, E: float,
                  r_max: float) -> tuple[float, float]:
    """Start radius and Frobenius coefficient c2 = (V(0+) - E)/(4 ell + 6)."""
    c2 = (potential(0.0) - E) / (4.0 * ang.lam + 4.0)
    r0 = min(1e-3, 0.01 * r_max)
    disc = [d for d in potential.discontinuities() if d > 0.0]
    if disc:
        r0 = min(r0, 0.5 * disc[0])
    while abs(c2) * r0 * r0 > 1e-9:
        r0 *= 0.5
    return r0, c2


class RegularSolutionTrajectory:
    """Dense-output trajectory of (psi, psi') on [0, r_stop].

    Below the series start the two-term Frobenius expansion is used, so the
    trajectory is evaluable on the whole range.  ``truncated`` is set when
    the overflow guard stopped integration early (large negative E with a
    large range); ``r_stop`` is then the explicit truncation radius.
    """

    def __init__(self, potential, ang, E, r0, c2, legs, truncated, r_stop,
                 r_grid, psi_grid, dpsi_grid):
        self.potential = potential
        self.ang = ang
        self.E = E
        self.r0 = r0
        self.c2 = c2
        self._legs = legs          # list of (lo, hi, OdeSolution)
        self.truncated = truncated
        self.r_stop = r_stop
        self.r_grid = r_grid
        self.psi_grid = psi_grid
        self.dpsi_grid = dpsi_grid

    def _series(self, r: np.ndarray):
        ell = self.ang.ell
        head = r ** (ell + 1.0)
        psi = head * (1.0 + self.c2 * r * r)
        dpsi = np.where(
            r > 0.0,
            r ** ell * ((ell + 1.0) + (ell + 3.0) * self.c2 * r * r),
            1.0 if ell == 0.0 else 0.0,
        )
        return psi, dpsi

    def _eval(self, r):
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(arr < 0.0):
            raise ValueError("radius must be nonnegative")
        if np.any(arr > self.r_stop * (1.0 + 1e-12)):
            raise ValueError(f"radius beyond trajectory range r_stop={self.r_stop}")
        psi = np.empty_like(arr)
        dpsi = np.empty_like(arr)
        low = arr <= self.r0
        if np.any(low):
            psi[low], dpsi[low] = self._series(arr[low])
        rest = ~low
        if np.any(rest):
            rs = arr[rest]
            out = np.empty((2, rs.size))
            for lo, hi, sol in self._legs:
                m = (rs >= lo) & (rs <= hi)
                if np.any(m):
                    out[:, m] = sol(rs[m])
            psi[rest], dpsi[rest] = out[0], out[1]
        if np.isscalar(r) or np.ndim(r) == 0:
            return float(psi[0]), float(dpsi[0])
        return psi, dpsi

    def psi(self, r):
        return self._eval(r)[0]

    def dpsi(self, r):
        return self._eval(r)[1]

    def normalization_check(self) -> float:
        """|psi(r0) r0^(-ell-1) / (1 + c2 r0^2) - 1|; ~0 by construction."""
        p = self.psi(self.r0)
        return abs(p / (self.r0 ** (self.ang.ell + 1.0) * (1.0 + self.c2 * self.r0**2)) - 1.0)


def integrate_regular(potential: Potential, ang: AngularParameter, E: float,
                      r_max: float, tol: float = 1e-10) -> RegularSolutionTrajectory:
    """Adaptive high-order integration of the regular solution to r_max."""
    ang = as_angular(ang) if not isinstance(ang, AngularParameter) else ang
    if r_max <= 0.0:
        raise ValueError("r_max must be positive")
    if not (1e-12 <= tol <= 1e-4):
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    r0, c2 = _series_start(potential, ang, E, r_max)
    coeff = ang.centrifugal

    def rhs(r, y):
        return (y[1], (potential(r) + coeff / (r * r) - E) * y[0])

    def overflow(r, y):
        return math.log(math.hypot(y[0], y[1]) + 1e-300) - _OVERFLOW_LOG
    overflow.terminal = True
    overflow.direction = 1.0

    ell = ang.ell
    psi0 = r0 ** (ell + 1.0) * (1.0 + c2 * r0 * r0)
    dpsi0 = r0 ** ell * ((ell + 1.0) + (ell + 3.0) * c2 * r0 * r0)
    scale0 = max(abs(psi0), abs(dpsi0))
    atol = scale0 * tol * 1e-2 + 1e-300

    cuts = [d for d in potential.discontinuities() if r0 < d < r_max]
    edges = [r0] + sorted(cuts) + [r_max]

    legs = []
    r_grid = [0.0, r0]
    psi_grid = [0.0, psi0]
    dpsi_grid = [1.0 if ell == 0.0 else 0.0, dpsi0]
    y = (psi0, dpsi0)
    truncated = False
    r_stop = r_max
    for lo, hi in zip(edges, edges[1:]):
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=tol,
                        atol=atol, dense_output=True, events=overflow)
        if not sol.success and sol.status != 1:
            raise RuntimeError(f"integration failed: {sol.message}")
        leg_hi = sol.t[-1]
        legs.append((lo, leg_hi, sol.sol))
        r_grid.extend(sol.t[1:])
        psi_grid.extend(sol.y[0, 1:])
        dpsi_grid.extend(sol.y[1, 1:])
        if sol.status == 1:          # overflow guard fired
            truncated = True
            r_stop = leg_hi
            break
        y = (sol.y[0, -1], sol.y[1, -1])
    return RegularSolutionTrajectory(
        potential, ang, E, r0, c2, legs, truncated, r_stop,
        np.asarray(r_grid), np.asarray(psi_grid), np.asarray(dpsi_grid))


@dataclass(frozen=True)
class ZeroSet:
    """Ordered zeros of the regular solution on (0, r_max]."""

    radii: np.ndarray
    degenerate: tuple[bool, ...]
    r_max: float
    backend: str

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        object.__setattr__(self, "radii", r)
        if np.any(np.diff(r) <= 0.0):
            raise ValueError("zeros must be strictly increasing")

    def __len__(self):
        return len(self.radii)


def _use_exact(potential) -> bool:
    return isinstance(potential, (PiecewiseConstantPotential, ZeroPotential))


def _numeric_zeros(traj: RegularSolutionTrajectory, r_max: float):
    """Bracket sign changes of psi on dense output, then polish."""
    pot, ang, E = traj.potential, traj.ang, traj.E
    roots: list[float] = []
    hi_cap = min(r_max, traj.r_stop)
    grid_pts = [traj.r0]
    rg = traj.r_grid[traj.r_grid > traj.r0]
    for a, b in zip(np.concatenate(([traj.r0], rg)), rg):
        b = min(b, hi_cap)
        if b <= a:
            break
        mid = 0.5 * (a + b)
        kloc = math.sqrt(max(E - pot(mid) - ang.centrifugal / (mid * mid), 0.0))
        pieces = max(int((b - a) * max(kloc, 1e-3) / (math.pi / 5.0)) + 1, 2)
        grid_pts.extend(np.linspace(a, b, pieces + 1)[1:])
    grid = np.asarray(grid_pts)
    vals = traj.psi(grid)
    for i in range(len(grid) - 1):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0 and grid[i] > traj.r0:
            roots.append(float(grid[i]))
        elif fa * fb < 0.0:
            roots.append(brentq(lambda x: traj.psi(x), grid[i], grid[i + 1],
                                xtol=1e-14))
    if len(vals) and vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    roots = sorted(set(roots))
    dpsis = [abs(traj.dpsi(z)) for z in roots]
    ref = max(dpsis) if dpsis else 1.0
    flags = tuple(d < 1e-8 * ref for d in dpsis)
    return np.asarray(roots), flags


def find_zeros(potential: Potential, ang, E: float, r_max: float,
               tol: float = 1e-10) -> ZeroSet:
    """All zeros of the regular solution on (0, r_max].

    Uses the closed-form backend automatically for piecewise-constant
    potentials; sign changes of the dense numeric output otherwise.
    Tangential (double) zeros, not expected at real E, are flagged.
    """
    ang = as_angular(ang)
    if _use_exact(potential):
        sol = exact_regular_solution(potential, E, ang.lam)
        radii = sol.zeros_upto(r_max)
        return ZeroSet(radii, (False,) * len(radii), r_max, "exact")
    traj = integrate_regular(potential, ang, E, r_max, tol)
    radii, flags = _numeric_zeros(traj, r_max)
    return ZeroSet(radii, flags, r_max, "numeric")


def nth_zero(potential: Potential, ang, E: float, n: int,
             tol: float = 1e-10, r_ceiling: float = _DEFAULT_CEILING,
             r_hint: float | None = None) -> float:
    """Radius of the n-th zero, expanding the search range geometrically.

    Raises :class:`ZeroBeyondRange` when the ceiling is hit, which signals
    an energy at or below the asymptote of the requested line.
    """
    ang = as_angular(ang)
    if n < 1:
        raise ValueError("zero index n must be >= 1")
    if _use_exact(potential):
        sol = exact_regular_solution(potential, E, ang.lam)
        return sol.nth_zero(n, r_ceiling)
    if r_hint is not None:
        guess = 1.3 * r_hint
    elif E > 0.0:
        guess = (n * math.pi + 4.0 + 2.0 * ang.ell) / math.sqrt(E)
    else:
        kap = math.sqrt(-E) if E < 0.0 else 0.0
        guess = max(potential.negligible_beyond(1e-6) * 1.5,
                    6.0 / max(kap, 0.5))
    guess = min(guess, r_ceiling)
    prev_count = -1
    while True:
        zs = find_zeros(potential, ang, E, guess, tol)
        if len(zs) >= n:
            return float(zs.radii[n - 1])
        stalled = len(zs) == prev_count and zs.r_max > guess * 0.99 and False
        if guess >= r_ceiling or stalled:
            raise ZeroBeyondRange(
                f"zero n={n} not found below r={guess:.6g} at E={E}",
                r_searched=guess)
        prev_count = len(zs)
        guess = min(guess * 2.0, r_ceiling)


# ---------------------------------------------------------------------------
# phase shifts


def _riccati_pair(ell: int, x: float):
    """(jhat, jhat', yhat, yhat') with jhat = x j_ell, yhat = -x y_ell."""
    j = spherical_jn(ell, x)
    jp = spherical_jn(ell, x, derivative=True)
    y = spherical_yn(ell, x)
    yp = spherical_yn(ell, x, derivative=True)
    return x * j, j + x * jp, -x * y, -(y + x * yp)


def _principal_phase(potential, ell: int, k: float, r_match: float,
                     tol: float) -> float:
    """Phase in (-pi, pi] from matching (psi, psi') to free solutions."""
    if _use_exact(potential):
        sol = exact_regular_solution(potential, k * k, ell + 0.5)
        return sol.phase_shift_principal()
    for attempt in range(4):
        traj = integrate_regular(potential, AngularParameter.from_ell(ell),
                                 k * k, r_match, tol)
        psi, dpsi = traj._eval(r_match)
        scale = max(np.max(np.abs(traj.psi_grid)), 1e-300)
        if math.hypot(psi, dpsi / k) > 1e-8 * scale:
            break
        # matched at a node: shift by a quarter local wavelength and retry
        r_match += 0.5 * math.pi / k
    jh, jph, yh, yph = _riccati_pair(ell, k * r_match)
    mat = np.array([[jh, yh], [k * jph, k * yph]])
    alpha, beta = np.linalg.solve(mat, np.array([psi, dpsi]))
    return math.remainder(math.atan2(beta, alpha), 2.0 * math.pi)


@lru_cache(maxsize=64)
def _born_scale(potential) -> float:
    return abs_integral(potential)


def _match_radius(potential, k: float, tol: float) -> float:
    return max(potential.negligible_beyond(0.1 * tol), 2.0 / k, 1.0)


def phase_shift(potential: Potential, ell: int, k: float,
                r_match: float | None = None, tol: float = 1e-10) -> float:
    """Continuous-branch phase shift delta(ell, k), radians.

    The branch is fixed by continuity along a descending k chain starting
    where the Born bound makes |delta| < 0.05, so delta -> 0 as k -> inf.
    """
    if ell < 0 or int(ell) != ell:
        raise ValueError("ell must be a nonnegative integer")
    if k <= 0.0:
        raise ValueError("momentum k must be positive")
    ell = int(ell)
    if r_match is None:
        r_match = _match_radius(potential, k, tol)
    k_top = max(k, _born_scale(potential) / 0.05, 2.0)
    if k_top <= k * 1.0000001:
        return _principal_phase(potential, ell, k, r_match, tol)
    m = int(math.ceil(math.log(k_top / k) / math.log(1.12))) + 1
    chain = np.geomspace(k, k_top, m + 1)[::-1]
    delta = _principal_phase(potential, ell, chain[0],
                             _match_radius(potential, chain[0], tol), tol)
    for kk in chain[1:]:
        princ = _principal_phase(potential, ell, kk,
                                 _match_radius(potential, kk, tol), tol)
        delta = princ + 2.0 * math.pi * round((delta - princ) / (2.0 * math.pi))
    return delta


def phase_shift_curve(potential: Potential, ell: int, k_grid,
                      tol: float = 1e-10) -> np.ndarray:
    """delta(ell, k) on an ascending grid, one continuous branch."""
    ks = np.asarray(k_grid, dtype=float)
    if np.any(np.diff(ks) <= 0.0) or np.any(ks <= 0.0):
        raise ValueError("k grid must be positive and ascending")
    ell = int(ell)
    k_top = max(ks[-1], _born_scale(potential) / 0.05, 2.0)
    ext = []
    kk = k_top
    while kk > ks[-1] * 1.0001:
        ext.append(kk)
        kk /= 1.12
    all_k = np.concatenate((ks, np.asarray(ext[::-1], dtype=float)))
    princ = np.array([
        _principal_phase(potential, ell, kv, _match_radius(potential, kv, tol), tol)
        for kv in all_k])
    cont = np.empty_like(princ)
    cont[-1] = princ[-1]
    for i in range(len(all_k) - 2, -1, -1):
        cont[i] = princ[i] + 2.0 * math.pi * round((cont[i + 1] - princ[i])
                                                   / (2.0 * math.pi))
    return cont[: len(ks)]


# ---------------------------------------------------------------------------
# bound states


def _tail_mismatch(potential, ang, E: float, R: float, tol: float) -> float:
    """Signed amplitude of the growing exponential at radius R.

    Zero exactly at an eigenvalue: there psi ~ e^(-kappa r) only.
    Normalized so brentq can work with it across many orders of magnitude.
    """
    kap = math.sqrt(-E)
    if _use_exact(potential):
        sol = exact_regular_solution(potential, E, ang.lam)
        psi, dpsi = sol._eval(R)
    else:
        traj = integrate_regular(potential, ang, E, R, tol)
        psi, dpsi = traj._eval(min(R, traj.r_stop))
    return (dpsi + kap * psi) / (abs(psi) + abs(dpsi) / kap + 1e-300)


def _node_count(potential, ang, E: float, R: float, tol: float) -> int:
    return len(find_zeros(potential, ang, E, R, tol))


def bound_states(potential: Potential, ell, E_window: tuple[float, float],
                 tol: float = 1e-8) -> list[float]:
    """Eigenvalues in (lo, hi), hi <= 0, by node counting plus bisection.

    The count of nodes of the regular solution below radius R equals the
    number of eigenvalues below E, so brackets come from integer jumps of
    the node count; each eigenvalue is then polished on the sign change of
    the growing-exponential amplitude at R.
    """
    ang = as_angular(ell)
    lo, hi = float(E_window[0]), float(E_window[1])
    if hi > 0.0 or lo >= hi:
        raise ValueError("window must satisfy lo < hi <= 0")
    hi_eff = min(hi, -1e-8)
    solver_tol = min(1e-10, tol)
    r_v = potential.negligible_beyond(1e-10)

    def radius(E: float) -> float:
        return min(max(r_v * 1.5, 1.0) + 40.0 / math.sqrt(-E), 400.0)

    n_lo = _node_count(potential, ang, lo, radius(lo), solver_tol)
    n_hi = _node_count(potential, ang, hi_eff, radius(hi_eff), solver_tol)
    out = []
    for target in range(n_lo + 1, n_hi + 1):
        a, b = lo, hi_eff
        # bisect on node count to isolate the jump target-1 -> target
        for _ in range(200):
            if b - a < max(tol, 1e-13):
                break
            mid = 0.5 * (a + b)
            if _node_count(potential, ang, mid, radius(mid), solver_tol) >= target:
                b = mid
            else:
                a = mid
        fa = _tail_mismatch(potential, ang, a, radius(a), solver_tol)
        fb = _tail_mismatch(potential, ang, b, radius(b), solver_tol)
        if fa * fb < 0.0:
            R = radius(0.5 * (a + b))
            root = brentq(lambda E: _tail_mismatch(potential, ang, E, R, solver_tol),
                          a, b, xtol=tol, rtol=4e-16)
        else:
            root = 0.5 * (a + b)
        out.append(root)
    return out
