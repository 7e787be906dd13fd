"""Potential models for the radial scattering problem.

Units: hbar^2/(2m) = 1, so energies are 1/L^2, lengths are L and E = k^2.
All models are short range: r|V| is integrable at the origin and |V| is
integrable beyond any b > 0.  Every object is immutable after construction
and evaluation is pure, so instances are safe to share between threads.

Potentials evaluate with ``pot(r)`` for scalar or array ``r >= 0``.  At a
discontinuity the returned value is the right limit; jump values are read
through :meth:`PiecewiseConstantPotential.value_left` /
:meth:`~PiecewiseConstantPotential.value_right`.

A plain-text key=value serialization (``type=piecewise``,
``breakpoints=2,3``, ``values=-2,-1``) is provided for file interchange
with the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate

from .errors import InputFormatError

__all__ = [
    "Potential",
    "ZeroPotential",
    "PiecewiseConstantPotential",
    "ExponentialPotential",
    "BargmannOneBoundPotential",
    "SampledPotential",
    "bargmann_profile",
    "IntegrabilityReport",
    "check_integrability",
    "potential_to_text",
    "potential_from_text",
    "save_potential",
    "load_potential",
]

_FMT = "%.17g"


def _check_radius(r):
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("radius must be nonnegative")
    return arr


def _as_scalar_or_array(result, r):
    if np.isscalar(r) or np.ndim(r) == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class ZeroPotential:
    """V(r) = 0 everywhere; the free-particle reference."""

    def __call__(self, r):
        arr = _check_radius(r)
        return _as_scalar_or_array(np.zeros_like(arr), r)

    def discontinuities(self) -> tuple[float, ...]:
        return ()

    def negligible_beyond(self, eps: float) -> float:
        return 0.0


@dataclass(frozen=True)
class PiecewiseConstantPotential:
    """Step potential: constant on [a_j, a_{j+1}), identically 0 past a_J.

    Parameters
    ----------
    breakpoints : strictly increasing positive radii a_1 < ... < a_J.
    values : one energy value per segment [a_j, a_{j+1}) with a_0 = 0,
        so ``len(values) == len(breakpoints)``.  The tail value beyond the
        last breakpoint is fixed to zero (compact support).
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) != len(vals):
            raise ValueError("need exactly one value per segment")
        if any(b <= 0 for b in bp):
            raise ValueError("breakpoints must be strictly positive")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def support_radius(self) -> float:
        return self.breakpoints[-1] if self.breakpoints else 0.0

    def __call__(self, r):
        arr = _check_radius(r)
        if not self.breakpoints:
            return _as_scalar_or_array(np.zeros_like(arr), r)
        vals = np.append(self.values, 0.0)
        # side="right" makes the value at a breakpoint the right limit
        idx = np.searchsorted(self.breakpoints, arr, side="right")
        return _as_scalar_or_array(vals[idx], r)

    def value_right(self, a: float) -> float:
        """V(a+)."""
        return self(float(a))

    def value_left(self, a: float) -> float:
        """V(a-); V(0-) is taken as V(0+) by convention."""
        a = float(a)
        if a <= 0.0:
            return self(0.0)
        idx = int(np.searchsorted(self.breakpoints, a, side="left"))
        if idx == 0:
            return self.values[0] if self.values else 0.0
        vals = self.values + (0.0,)
        # a <= breakpoints[idx-1] < ... ; left limit belongs to segment idx-1
        if a <= self.breakpoints[idx - 1]:
            return vals[idx - 1]
        return vals[idx]

    def discontinuities(self) -> tuple[float, ...]:
        """Radii where the step actually jumps (zero-height steps dropped)."""
        out = []
        for a in self.breakpoints:
            if self.value_left(a) != self.value_right(a):
                out.append(a)
        return tuple(out)

    def negligible_beyond(self, eps: float) -> float:
        return self.support_radius


@dataclass(frozen=True)
class ExponentialPotential:
    """V(r) = v0 * exp(-mu * r), the smooth short-range test case."""

    v0: float
    mu: float

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("decay rate mu must be positive")

    def __call__(self, r):
        arr = _check_radius(r)
        return _as_scalar_or_array(self.v0 * np.exp(-self.mu * arr), r)

    def discontinuities(self) -> tuple[float, ...]:
        return ()

    def negligible_beyond(self, eps: float) -> float:
        # bound the tail integral: int_R |V| = |v0| e^(-mu R)/mu <= eps
        if self.v0 == 0.0:
            return 0.0
        return max(0.0, math.log(abs(self.v0) / (self.mu * eps)) / self.mu)


def bargmann_profile(gamma: float, c: float, r):
    """One-bound-state transparent-type potential V = -2 (d/dr)^2 ln W.

    W(r) = 1 + c * int_0^r sinh(gamma s)^2 ds grows like exp(2 gamma r), so
    the second log-derivative is evaluated on exp(-2 gamma r)-scaled
    factors, which stays finite for arbitrarily large gamma*r.  The s-wave
    problem supports exactly one bound state, at energy -gamma^2.
    """
    if gamma <= 0 or c <= 0:
        raise ValueError("gamma and c must be positive")
    arr = _check_radius(r)
    t = np.exp(-2.0 * gamma * arr)
    w = t * (1.0 - 0.5 * c * arr) + c * (1.0 - t * t) / (8.0 * gamma)
    w1 = 0.25 * c * (1.0 - t) ** 2
    w2 = 0.5 * c * gamma * (1.0 - t * t)
    v = -2.0 * (w2 * w - w1 * w1) / (w * w)
    return _as_scalar_or_array(v, r)


@dataclass(frozen=True)
class BargmannOneBoundPotential:
    """Potential built by adding a single s-wave bound state at -gamma^2.

    ``c`` sets the shape of the well without moving the bound-state energy.
    """

    gamma: float
    c: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0 or self.c <= 0:
            raise ValueError("gamma and c must be positive")

    @property
    def bound_energy(self) -> float:
        return -self.gamma**2

    def __call__(self, r):
        return bargmann_profile(self.gamma, self.c, r)

    def discontinuities(self) -> tuple[float, ...]:
        return ()

    def negligible_beyond(self, eps: float) -> float:
        # V ~ exp(-2 gamma r); double a starting guess until the tail bound
        # |V(R)|/(2 gamma) drops below eps
        R = 1.0 / self.gamma
        for _ in range(60):
            if abs(self(R)) / (2.0 * self.gamma) <= eps:
                return R
            R *= 2.0
        raise ValueError("tail of Bargmann potential did not decay")


@dataclass(frozen=True)
class SampledPotential:
    """Piecewise-linear interpolant of tabulated values; 0 past the grid."""

    grid: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(x) for x in self.grid)
        v = tuple(float(x) for x in self.values)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        if len(g) != len(v):
            raise ValueError("grid and values must have equal length")
        if len(g) < 2:
            raise ValueError("need at least two samples")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("grid must be strictly increasing")
        if any(x < 0 for x in g):
            raise ValueError("grid radii must be nonnegative")

    def __call__(self, r):
        arr = _check_radius(r)
        out = np.interp(arr, self.grid, self.values,
                        left=self.values[0], right=0.0)
        return _as_scalar_or_array(out, r)

    def discontinuities(self) -> tuple[float, ...]:
        # continuous by construction except for the drop to 0 at the end
        if self.values[-1] != 0.0:
            return (self.grid[-1],)
        return ()

    def negligible_beyond(self, eps: float) -> float:
        return self.grid[-1]


Potential = Union[
    ZeroPotential,
    PiecewiseConstantPotential,
    ExponentialPotential,
    BargmannOneBoundPotential,
    SampledPotential,
]


def evaluate(potential: Potential, r):
    """V(r) for scalar or array r >= 0 (right limit at discontinuities)."""
    return potential(r)


@dataclass(frozen=True)
class IntegrabilityReport:
    """Numerical estimates of the two short-range integrability integrals."""

    near_origin_integral: float   # int_0^b r |V| dr
    tail_integral: float          # int_b^inf |V| dr (tail extrapolated)
    both_finite: bool
    tail_extrapolated: float = 0.0


def _quad_abs(fun, a, b, points=()):
    pts = [p for p in points if a < p < b]
    val, _ = integrate.quad(fun, a, b, points=pts or None, limit=200)
    return val


def check_integrability(potential: Potential, b: float, r_max: float) -> IntegrabilityReport:
    """Estimate int_0^b r|V| dr and int_b^rmax |V| dr with a tail estimate.

    The tail beyond ``r_max`` is extrapolated geometrically from the decay
    of the last two half-blocks; when those blocks do not decay the report
    flags the tail as (numerically) divergent.  Report-only: never raises.
    """
    if not (0.0 < b < r_max):
        raise ValueError("need 0 < b < r_max")
    disc = potential.discontinuities()
    near = _quad_abs(lambda r: r * abs(potential(r)), 0.0, b, disc)
    tail = _quad_abs(lambda r: abs(potential(r)), b, r_max, disc)

    # decay probe on [3/4 rmax, rmax] vs [1/2 rmax, 3/4 rmax]
    block_lo = _quad_abs(lambda r: abs(potential(r)), 0.5 * r_max, 0.75 * r_max, disc)
    block_hi = _quad_abs(lambda r: abs(potential(r)), 0.75 * r_max, r_max, disc)
    scale = max(near, tail, 1e-300)
    finite = True
    extra = 0.0
    if block_hi > 1e-13 * scale:
        ratio = block_hi / block_lo if block_lo > 0 else 1.0
        if ratio < 0.95:
            extra = block_hi * ratio / (1.0 - ratio)
        else:
            finite = False
    return IntegrabilityReport(
        near_origin_integral=near,
        tail_integral=tail + extra,
        both_finite=finite and math.isfinite(near) and math.isfinite(tail),
        tail_extrapolated=extra,
    )


def abs_integral(potential: Potential, eps: float = 1e-12) -> float:
    """int_0^inf |V| dr, used for Born-magnitude and matching estimates."""
    R = max(potential.negligible_beyond(eps), 1.0)
    return _quad_abs(lambda r: abs(potential(r)), 0.0, R,
                     potential.discontinuities())


# ---------------------------------------------------------------------------
# plain-text serialization


def _fmt_list(xs) -> str:
    return ",".join(_FMT % x for x in xs)


def _parse_list(s: str) -> tuple[float, ...]:
    s = s.strip()
    if not s:
        return ()
    try:
        return tuple(float(x) for x in s.split(","))
    except ValueError as exc:
        raise InputFormatError(f"bad number list: {s!r}") from exc


def potential_to_text(potential: Potential) -> str:
    """Serialize to the key=value format consumed by the CLI."""
    if isinstance(potential, ZeroPotential):
        lines = ["type=zero"]
    elif isinstance(potential, PiecewiseConstantPotential):
        lines = [
            "type=piecewise",
            f"breakpoints={_fmt_list(potential.breakpoints)}",
            f"values={_fmt_list(potential.values)}",
        ]
    elif isinstance(potential, ExponentialPotential):
        lines = [
            "type=exponential",
            f"v0={_FMT % potential.v0}",
            f"mu={_FMT % potential.mu}",
        ]
    elif isinstance(potential, BargmannOneBoundPotential):
        lines = [
            "type=bargmann",
            f"gamma2={_FMT % potential.gamma**2}",
            f"c={_FMT % potential.c}",
        ]
    elif isinstance(potential, SampledPotential):
        lines = [
            "type=sampled",
            f"grid={_fmt_list(potential.grid)}",
            f"values={_fmt_list(potential.values)}",
        ]
    else:
        raise TypeError(f"unknown potential type {type(potential).__name__}")
    return "\n".join(lines) + "\n"


def potential_from_text(text: str) -> Potential:
    """Parse the key=value format; '#' lines are comments."""
    kv: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputFormatError(f"expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        kv[key.strip()] = val.strip()
    kind = kv.get("type")
    if kind is None:
        raise InputFormatError("missing 'type=' entry")
    try:
        if kind == "zero":
            return ZeroPotential()
        if kind == "piecewise":
            return PiecewiseConstantPotential(
                breakpoints=_parse_list(kv.get("breakpoints", "")),
                values=_parse_list(kv.get("values", "")),
            )
        if kind == "exponential":
            return ExponentialPotential(v0=float(kv["v0"]), mu=float(kv["mu"]))
        if kind == "bargmann":
            return BargmannOneBoundPotential(
                gamma=math.sqrt(float(kv["gamma2"])), c=float(kv.get("c", "1")))
        if kind == "sampled":
            return SampledPotential(grid=_parse_list(kv["grid"]),
                                    values=_parse_list(kv["values"]))
    except (KeyError, ValueError) as exc:
        raise InputFormatError(f"bad potential definition: {exc}") from exc
    raise InputFormatError(f"unknown potential type {kind!r}")


def save_potential(potential: Potential, path, header: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(potential_to_text(potential))


def load_potential(path) -> Potential:
    with open(path, "r", encoding="utf-8") as fh:
        return potential_from_text(fh.read())
