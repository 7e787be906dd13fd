"""Closed-form regular solutions for piecewise-constant potentials.

On each segment where V is the constant v, the radial equation

    psi'' + (E - v - (lam^2 - 1/4)/r^2) psi = 0

has an elementary basis.  For the s wave (lam = 1/2) the centrifugal term
vanishes and the basis is {sin, cos} / {sinh, cosh} / {1, r - a} depending
on the sign of w = E - v.  For general real lam >= 1/2 the basis is built
from (cylinder) Bessel functions of real order:

    w > 0:  sqrt(r) J_lam(kappa r),  sqrt(r) Y_lam(kappa r)
    w < 0:  sqrt(r) I_lam(kappa r),  sqrt(r) K_lam(kappa r)
    w = 0:  r^(lam + 1/2),           r^(1/2 - lam)

Coefficients propagate across breakpoints by matching psi and psi'; the
Wronskians of the pairs above are the constants 2/pi, -1 and -2*lam, so the
matching is a closed-form 2x2 solve.  Everything downstream (zeros, phase
shifts) is then available at machine precision, which is what makes
third-derivative estimation on zero lines viable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import iv, jv, kv, yv

from .errors import ZeroBeyondRange
from .potentials import PiecewiseConstantPotential, ZeroPotential

__all__ = ["Segment", "ExactRegularSolution", "exact_regular_solution"]

_SWAVE = 0.5
_DEDUPE = 1e-12


@dataclass(frozen=True)
class Segment:
    """One constant-V piece: psi = c1*u1 + c2*u2 on [r_lo, r_hi)."""

    r_lo: float
    r_hi: float          # math.inf on the tail
    v: float
    kind: str            # trig | hyper | linear | bessel_j | bessel_i | power
    kappa: float         # sqrt(|E - v|); 0 for linear/power
    c1: float
    c2: float


def _segment_kind(w: float, lam: float) -> tuple[str, float]:
    if w > 0.0:
        return ("trig" if lam == _SWAVE else "bessel_j", math.sqrt(w))
    if w < 0.0:
        return ("hyper" if lam == _SWAVE else "bessel_i", math.sqrt(-w))
    return ("linear" if lam == _SWAVE else "power", 0.0)


def _eval_segment(seg: Segment, r, lam: float):
    """(psi, dpsi) on the segment, vectorized over r."""
    r = np.asarray(r, dtype=float)
    k, c1, c2 = seg.kappa, seg.c1, seg.c2
    if seg.kind == "trig":
        th = k * (r - seg.r_lo)
        s, c = np.sin(th), np.cos(th)
        return c1 * s + c2 * c, k * (c1 * c - c2 * s)
    if seg.kind == "hyper":
        th = k * (r - seg.r_lo)
        sh, ch = np.sinh(th), np.cosh(th)
        return c1 * sh + c2 * ch, k * (c1 * ch + c2 * sh)
    if seg.kind == "linear":
        return c1 * (r - seg.r_lo) + c2, c1 * np.ones_like(r)
    sq = np.sqrt(r)
    x = k * r
    if seg.kind == "bessel_j":
        f1, f2 = jv(lam, x), yv(lam, x)
        d1 = 0.5 * (jv(lam - 1, x) - jv(lam + 1, x))
        d2 = 0.5 * (yv(lam - 1, x) - yv(lam + 1, x))
    elif seg.kind == "bessel_i":
        f1, f2 = iv(lam, x), kv(lam, x)
        d1 = 0.5 * (iv(lam - 1, x) + iv(lam + 1, x))
        d2 = -0.5 * (kv(lam - 1, x) + kv(lam + 1, x))
    elif seg.kind == "power":
        u1, u2 = r ** (lam + 0.5), r ** (0.5 - lam)
        psi = c1 * u1 + c2 * u2
        dpsi = c1 * (lam + 0.5) * r ** (lam - 0.5) + c2 * (0.5 - lam) * r ** (-lam - 0.5)
        return psi, dpsi
    else:  # pragma: no cover - guarded by construction
        raise ValueError(f"unknown segment kind {seg.kind}")
    u1, u2 = sq * f1, sq * f2
    du1 = f1 / (2.0 * sq) + sq * k * d1
    du2 = f2 / (2.0 * sq) + sq * k * d2
    return c1 * u1 + c2 * u2, c1 * du1 + c2 * du2


def _wronskian(kind: str, lam: float) -> float:
    if kind == "bessel_j":
        return 2.0 / math.pi
    if kind == "bessel_i":
        return -1.0
    return -2.0 * lam  # power


def _basis_at(kind: str, lam: float, k: float, r: float):
    """(u1, u2, du1, du2) of the Bessel/power basis at radius r."""
    probe = Segment(r_lo=0.0, r_hi=math.inf, v=0.0, kind=kind, kappa=k, c1=1.0, c2=0.0)
    u1, du1 = _eval_segment(probe, r, lam)
    probe2 = Segment(r_lo=0.0, r_hi=math.inf, v=0.0, kind=kind, kappa=k, c1=0.0, c2=1.0)
    u2, du2 = _eval_segment(probe2, r, lam)
    return float(u1), float(u2), float(du1), float(du2)


class ExactRegularSolution:
    """Regular solution with Cauchy normalization psi * r^(-ell-1) -> 1.

    Exposes closed-form evaluation anywhere, machine-precision zeros, and
    (for E > 0) the principal-branch phase shift read off the free tail.
    """

    def __init__(self, potential: PiecewiseConstantPotential | ZeroPotential,
                 E: float, lam: float = _SWAVE):
        if lam < _SWAVE:
            raise ValueError("angular parameter lam must be >= 1/2")
        if isinstance(potential, ZeroPotential):
            potential = PiecewiseConstantPotential((), ())
        self.potential = potential
        self.E = float(E)
        self.lam = float(lam)
        self.segments = self._build_segments()

    # -- construction -----------------------------------------------------

    def _build_segments(self) -> list[Segment]:
        bps = self.potential.breakpoints
        vals = self.potential.values + (0.0,)
        edges = (0.0,) + bps + (math.inf,)
        segs: list[Segment] = []
        psi = dpsi = 0.0
        for j, v in enumerate(vals):
            lo, hi = edges[j], edges[j + 1]
            w = self.E - v
            kind, k = _segment_kind(w, self.lam)
            if j == 0:
                c1, c2 = self._cauchy_coeffs(kind, k)
            else:
                c1, c2 = self._match_coeffs(kind, k, lo, psi, dpsi)
            seg = Segment(lo, hi, v, kind, k, c1, c2)
            segs.append(seg)
            if math.isfinite(hi):
                p, dp = _eval_segment(seg, hi, self.lam)
                psi, dpsi = float(p), float(dp)
        return segs

    def _cauchy_coeffs(self, kind: str, k: float) -> tuple[float, float]:
        lam = self.lam
        if kind in ("trig", "hyper"):
            return 1.0 / k, 0.0
        if kind in ("linear", "power"):
            return 1.0, 0.0
        # sqrt(r) J_lam(k r) ~ r^(lam+1/2) (k/2)^lam / Gamma(lam+1) near 0
        return math.gamma(lam + 1.0) * (2.0 / k) ** lam, 0.0

    def _match_coeffs(self, kind: str, k: float, a: float,
                      psi: float, dpsi: float) -> tuple[float, float]:
        if kind in ("trig", "hyper"):
            return dpsi / k, psi
        if kind == "linear":
            return dpsi, psi
        u1, u2, du1, du2 = _basis_at(kind, self.lam, k, a)
        w = _wronskian(kind, self.lam)
        return (psi * du2 - dpsi * u2) / w, (dpsi * u1 - psi * du1) / w

    # -- evaluation -------------------------------------------------------

    def _segment_index(self, r: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.potential.breakpoints, r, side="right")

    def psi(self, r):
        return self._eval(r)[0]

    def dpsi(self, r):
        return self._eval(r)[1]

    def _eval(self, r):
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(arr < 0.0):
            raise ValueError("radius must be nonnegative")
        out = np.zeros_like(arr)
        dout = np.zeros_like(arr)
        idx = self._segment_index(arr)
        for j, seg in enumerate(self.segments):
            m = idx == j
            if not np.any(m):
                continue
            p, dp = _eval_segment(seg, arr[m], self.lam)
            out[m], dout[m] = p, dp
        # the origin itself: psi(0) = 0, slope meaningful only for lam = 1/2
        zero_mask = arr == 0.0
        if np.any(zero_mask):
            out[zero_mask] = 0.0
            dout[zero_mask] = 1.0 if self.lam == _SWAVE else 0.0
        if np.isscalar(r) or np.ndim(r) == 0:
            return float(out[0]), float(dout[0])
        return out, dout

    # -- zeros ------------------------------------------------------------

    def _segment_zeros(self, seg: Segment, hi: float) -> list[float]:
        """Zeros of psi inside (seg.r_lo, min(seg.r_hi, hi)]."""
        lo = seg.r_lo
        hi = min(seg.r_hi, hi)
        if hi <= lo:
            return []
        k, c1, c2 = seg.kappa, seg.c1, seg.c2
        if seg.kind == "trig":
            # psi = C sin(theta + phi), theta = k (r - lo)
            phi = math.atan2(c2, c1)
            th_end = k * (hi - lo)
            m_lo = math.floor(phi / math.pi) + 1      # first m with theta > 0
            out = []
            m = m_lo
            while True:
                th = m * math.pi - phi
                if th > th_end * (1 + 1e-15) and th > th_end + 1e-300:
                    break
                r = lo + th / k
                if lo < r <= hi:
                    out.append(r)
                m += 1
            return out
        if seg.kind == "hyper":
            if c1 == 0.0 or abs(c2) >= abs(c1):
                return []
            th = math.atanh(-c2 / c1)
            r = lo + th / k
            return [r] if lo < r <= hi else []
        if seg.kind == "linear":
            if c1 == 0.0:
                return []
            r = lo - c2 / c1
            return [r] if lo < r <= hi else []
        if seg.kind in ("bessel_i", "power"):
            # at most one zero: the basis ratio is monotone on the segment
            eps = max(1e-12, 1e-12 * lo)
            a = lo + eps if lo > 0 else min(hi, eps) * 0.5
            b = hi
            fa = float(self.psi(a))
            fb = float(self.psi(b))
            if fa == 0.0:
                return [a]
            if fa * fb < 0.0:
                return [brentq(lambda x: float(self.psi(x)), a, b, xtol=1e-15)]
            return [b] if fb == 0.0 else []
        # bessel_j: oscillatory; consecutive zeros are >= pi/kappa apart
        step = math.pi / (2.5 * k)
        start = lo if lo > 0 else min(step, hi) * 1e-6
        ngrid = int(math.ceil((hi - start) / step)) + 1
        grid = np.linspace(start, hi, max(ngrid, 2))
        vals = np.atleast_1d(self.psi(grid))
        out = []
        for i in range(len(grid) - 1):
            fa, fb = vals[i], vals[i + 1]
            if fa == 0.0 and grid[i] > lo:
                out.append(float(grid[i]))
            elif fa * fb < 0.0:
                out.append(brentq(lambda x: float(self.psi(x)),
                                  grid[i], grid[i + 1], xtol=1e-15))
        if vals[-1] == 0.0:
            out.append(float(grid[-1]))
        return out

    def zeros_upto(self, r_max: float) -> np.ndarray:
        """All zeros of psi on (0, r_max], ascending, machine precision."""
        out: list[float] = []
        for seg in self.segments:
            if seg.r_lo >= r_max:
                break
            out.extend(self._segment_zeros(seg, r_max))
        out.sort()
        dedup: list[float] = []
        for z in out:
            if not dedup or z - dedup[-1] > _DEDUPE * max(1.0, z):
                dedup.append(z)
        return np.asarray(dedup)

    def oscillates_at_infinity(self) -> bool:
        return self.segments[-1].kind in ("trig", "bessel_j")

    def nth_zero(self, n: int, r_ceiling: float = math.inf) -> float:
        """Radius of the n-th zero (n >= 1), or ZeroBeyondRange."""
        if n < 1:
            raise ValueError("zero index n must be >= 1")
        tail_lo = self.segments[-1].r_lo
        bounded = self.zeros_upto(tail_lo) if tail_lo > 0 else np.asarray([])
        if len(bounded) >= n:
            return float(bounded[n - 1])
        if not self.oscillates_at_infinity():
            # the tail holds at most one more zero, found in closed form
            tail = self._segment_zeros(self.segments[-1], math.inf)
            allz = sorted(set(list(bounded) + tail))
            if len(allz) >= n and allz[n - 1] <= r_ceiling:
                return float(allz[n - 1])
            raise ZeroBeyondRange(
                f"regular solution has only {len(allz)} zeros at E={self.E}"
                f" (requested n={n})", r_searched=r_ceiling)
        # oscillatory tail: extend the search window until n zeros appear
        k = self.segments[-1].kappa
        hi = tail_lo + (n + 2) * math.pi / k
        while True:
            hi = min(hi, r_ceiling)
            zs = self.zeros_upto(hi)
            if len(zs) >= n:
                return float(zs[n - 1])
            if hi >= r_ceiling:
                raise ZeroBeyondRange(
                    f"zero n={n} not found below r={r_ceiling} at E={self.E}",
                    r_searched=r_ceiling)
            hi *= 2.0

    # -- scattering -------------------------------------------------------

    def phase_shift_principal(self) -> float:
        """Phase shift in (-pi, pi] read from the free tail; needs E > 0."""
        if self.E <= 0.0:
            raise ValueError("phase shift defined for E > 0 only")
        tail = self.segments[-1]
        k = tail.kappa
        if tail.kind == "trig":
            delta = math.atan2(tail.c2, tail.c1) - k * tail.r_lo
        else:
            # sqrt(r) J -> sin(kr - ell pi/2), sqrt(r) Y -> -cos(kr - ell pi/2)
            delta = math.atan2(-tail.c2, tail.c1)
        return math.remainder(delta, 2.0 * math.pi)


def exact_regular_solution(potential: PiecewiseConstantPotential | ZeroPotential,
                           E: float, lam: float = _SWAVE) -> ExactRegularSolution:
    """Build the closed-form segment representation of the regular solution."""
    return ExactRegularSolution(potential, E, lam)
