"""Monotone radial twist maps: profiles, Calabi invariant, Hofer bound, census.

A profile is the twist angle f(r) >= 0 (radians) as a non-increasing function
of the radius, represented piecewise by Laurent polynomials so that all the
radial integrals are closed-form.  Sampled profiles are converted to
piecewise-linear segments at construction.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from scipy.integrate import quad

TWO_PI = 2.0 * math.pi

# Calibration constants for the combinatorial model, recorded in every run
# manifest.  The winding ("p") term of the level action is the symplectic
# area between the periodic circle and the boundary, p_area_scale * E(r) with
# E(r) = (1 - r^2)/2; the quadrature oracle fixes p_area_scale = 2*pi.  The
# spectral invariant uses the radial staircase rule (see pfh module).
CALIBRATION = {
    "p_area_scale": TWO_PI,
    "reference_action": 0.0,
    "spectral_rule": "radial-staircase",
}


class PlateauError(ValueError):
    """The profile is constant at a requested rotation level."""


class MonotonicityError(ValueError):
    """The profile fails its non-increasing certificate."""


@dataclass(frozen=True)
class Segment:
    """f(s) = sum of coef * s**expo on [lo, hi]."""

    lo: float
    hi: float
    terms: Tuple[Tuple[float, int], ...]

    def value(self, s: float) -> float:
        return sum(c * s**k for c, k in self.terms)

    def derivative(self, s: float) -> float:
        return sum(c * k * s ** (k - 1) for c, k in self.terms if k != 0)

    def is_constant(self) -> bool:
        return all(c == 0 or k == 0 for c, k in self.terms)

    def integral_weighted(self, x: float, y: float, weight: int) -> float:
        """Integral of s**weight * f(s) over [x, y] (closed form, log-aware)."""
        total = 0.0
        for c, k in self.terms:
            kk = k + weight
            if kk == -1:
                total += c * (math.log(y) - math.log(x))
            else:
                total += c * (y ** (kk + 1) - x ** (kk + 1)) / (kk + 1)
        return total

    def diverges_at_zero(self, weight: int) -> bool:
        """Whether the integral of s**weight * f from 0 diverges on a segment touching 0."""
        return any(c != 0 and k + weight <= -1 for c, k in self.terms)


class TwistProfile:
    """Non-increasing twist-angle profile with a monotonicity certificate.

    ``support_flag`` is true exactly when the profile vanishes on a
    neighborhood of r = 1, which is required by the chain-complex export.
    """

    def __init__(self, segments: Sequence[Segment], name: str = "profile", _certify: bool = True):
        segs = sorted(segments, key=lambda s: s.lo)
        if not segs or abs(segs[0].lo) > 1e-15 or abs(segs[-1].hi - 1.0) > 1e-15:
            raise ValueError("segments must cover (0, 1]")
        for a, b in zip(segs, segs[1:]):
            if abs(a.hi - b.lo) > 1e-12:
                raise ValueError("segments must be contiguous")
        self.segments = tuple(segs)
        self.name = name
        self._los = [s.lo for s in self.segments]
        if _certify:
            self._certify_monotone()

    # -- certification and basic queries ------------------------------------

    def _certify_monotone(self, samples_per_segment: int = 64):
        prev_val = math.inf
        for seg in self.segments:
            lo = max(seg.lo, 1e-9)
            for j in range(samples_per_segment + 1):
                s = lo + (seg.hi - lo) * j / samples_per_segment
                v = seg.value(s)
                if v < -1e-12:
                    raise MonotonicityError(f"negative twist angle {v} at r={s}")
                if v > prev_val + 1e-9 * max(1.0, abs(prev_val)):
                    raise MonotonicityError(f"profile increases near r={s}")
                prev_val = v
            d_lo = seg.derivative(max(seg.lo, 1e-9))
            d_hi = seg.derivative(seg.hi)
            if max(d_lo, d_hi) > 1e-9 * max(1.0, abs(seg.value(seg.hi))):
                raise MonotonicityError(f"positive slope on segment [{seg.lo}, {seg.hi}]")

    def _segment_at(self, r: float) -> Segment:
        i = bisect_right(self._los, r) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        return self.segments[i]

    def __call__(self, r: float) -> float:
        if not (0.0 < r <= 1.0):
            raise ValueError("radius must lie in (0, 1]")
        return self._segment_at(r).value(r)

    def value_at_center(self) -> float:
        """sup f = f(0+); may be math.inf."""
        first = self.segments[0]
        if first.diverges_at_zero(0):
            return math.inf
        return sum(c for c, k in first.terms if k == 0 and c != 0)

    @property
    def support_flag(self) -> bool:
        last = self.segments[-1]
        return last.is_constant() and last.value(last.hi) == 0.0 and last.lo < 1.0

    @property
    def support_end(self) -> float:
        """Smallest r0 with f == 0 on [r0, 1] (1.0 when f(1) > 0)."""
        r0 = 1.0
        for seg in reversed(self.segments):
            if seg.is_constant() and seg.value(seg.hi) == 0.0:
                r0 = seg.lo
            else:
                break
        return r0

    # -- integrals -----------------------------------------------------------

    def hamiltonian(self, r: float) -> float:
        """H(r) = integral of s f(s) ds over [r, 1]; the generating Hamiltonian."""
        if r >= 1.0:
            return 0.0
        if r <= 0.0:
            return self.hamiltonian_at_center()
        total = 0.0
        for seg in self.segments:
            lo, hi = max(seg.lo, r), seg.hi
            if hi > lo:
                total += seg.integral_weighted(lo, hi, 1)
        return total

    def hamiltonian_at_center(self) -> float:
        if self.segments[0].diverges_at_zero(1):
            return math.inf
        return sum(seg.integral_weighted(max(seg.lo, 0.0), seg.hi, 1) for seg in self.segments)

    def calabi_closed_form(self) -> float:
        """Cal = integral of s^2 f(s) ds over [0, 1]; +inf when divergent."""
        if self.segments[0].diverges_at_zero(2):
            return math.inf
        return sum(seg.integral_weighted(max(seg.lo, 0.0), seg.hi, 2) for seg in self.segments)

    # -- transforms -----------------------------------------------------------

    def truncated(self, i: int) -> "TwistProfile":
        """Plateau the profile at its value at r = 1/i on (0, 1/i]."""
        if i < 1:
            raise ValueError("truncation index must be >= 1")
        cut = 1.0 / i
        plateau = self(cut)
        segs: List[Segment] = [Segment(0.0, cut, ((plateau, 0),))]
        for seg in self.segments:
            lo, hi = max(seg.lo, cut), seg.hi
            if hi > lo + 1e-15:
                segs.append(Segment(lo, hi, seg.terms))
        return TwistProfile(segs, name=f"{self.name}|trunc{i}", _certify=False)

    def __add__(self, other: "TwistProfile") -> "TwistProfile":
        cuts = sorted({s.lo for s in self.segments + other.segments} | {1.0})
        segs = []
        for lo, hi in zip(cuts, cuts[1:]):
            mid = 0.5 * (lo + hi)
            terms: Dict[int, float] = {}
            for seg in (self._segment_at(mid), other._segment_at(mid)):
                for c, k in seg.terms:
                    terms[k] = terms.get(k, 0.0) + c
            segs.append(Segment(lo, hi, tuple((c, k) for k, c in sorted(terms.items()))))
        return TwistProfile(segs, name=f"{self.name}+{other.name}")

    def scaled(self, factor: float) -> "TwistProfile":
        if factor < 0:
            raise ValueError("scale must be nonnegative")
        segs = [Segment(s.lo, s.hi, tuple((c * factor, k) for c, k in s.terms)) for s in self.segments]
        return TwistProfile(segs, name=f"{factor}*{self.name}", _certify=False)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "type": "piecewise",
            "name": self.name,
            "segments": [
                {"lo": s.lo, "hi": s.hi, "terms": [[c, k] for c, k in s.terms]}
                for s in self.segments
            ],
        }

    @staticmethod
    def from_json(d: dict) -> "TwistProfile":
        if d.get("type") == "samples":
            return profile_from_samples(d["r"], d["f"], name=d.get("name", "samples"))
        segs = [
            Segment(s["lo"], s["hi"], tuple((float(c), int(k)) for c, k in s["terms"]))
            for s in d["segments"]
        ]
        return TwistProfile(segs, name=d.get("name", "profile"))


# -- constructors -------------------------------------------------------------


def zero_profile() -> TwistProfile:
    return TwistProfile([Segment(0.0, 1.0, ((0.0, 0),))], name="zero", _certify=False)


def constant_profile(c: float, support_end: float = 1.0, name: Optional[str] = None) -> TwistProfile:
    """f = c on (0, support_end], dropping to 0 beyond (compactly supported if < 1)."""
    if support_end >= 1.0:
        segs = [Segment(0.0, 1.0, ((float(c), 0),))]
    else:
        segs = [Segment(0.0, support_end, ((float(c), 0),)), Segment(support_end, 1.0, ((0.0, 0),))]
    return TwistProfile(segs, name=name or f"const{c}", _certify=False)


def linear_profile(height: float, support_end: float = 1.0, name: Optional[str] = None) -> TwistProfile:
    """f decreasing linearly from ``height`` at r = 0 to 0 at ``support_end``."""
    slope = -height / support_end
    segs = [Segment(0.0, support_end, ((float(height), 0), (slope, 1)))]
    if support_end < 1.0:
        segs.append(Segment(support_end, 1.0, ((0.0, 0),)))
    return TwistProfile(segs, name=name or f"linear{height}", _certify=False)


def power_profile(exponent: int = -3, coefficient: float = 1.0, name: Optional[str] = None) -> TwistProfile:
    """f(s) = coefficient * s**exponent (exponent < 0 blows up at the center)."""
    if exponent >= 0 or coefficient <= 0:
        raise ValueError("power profiles model center singularities: exponent < 0, coefficient > 0")
    return TwistProfile(
        [Segment(0.0, 1.0, ((float(coefficient), exponent),))],
        name=name or f"s^{exponent}",
        _certify=False,
    )


def profile_from_samples(r: Sequence[float], f: Sequence[float], name: str = "samples") -> TwistProfile:
    """Piecewise-linear profile through sample points (certified monotone)."""
    if len(r) != len(f) or len(r) < 2:
        raise ValueError("need matching r/f arrays with at least two samples")
    pts = sorted(zip((float(x) for x in r), (float(y) for y in f)))
    if abs(pts[0][0]) > 1e-12 or abs(pts[-1][0] - 1.0) > 1e-12:
        raise ValueError("samples must span [0, 1]")
    segs = []
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x1 <= x0:
            raise ValueError("duplicate sample radius")
        slope = (y1 - y0) / (x1 - x0)
        segs.append(Segment(x0, x1, ((y0 - slope * x0, 0), (slope, 1))))
    return TwistProfile(segs, name=name)


# -- derived objects -----------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianProfile:
    """The generating Hamiltonian H(r) of a twist profile; H(1) = 0, H >= 0."""

    profile: TwistProfile

    def __call__(self, r: float) -> float:
        return self.profile.hamiltonian(r)

    @property
    def at_center(self) -> float:
        return self.profile.hamiltonian_at_center()

    @property
    def divergent(self) -> bool:
        return math.isinf(self.at_center)


def hamiltonian_profile(f: TwistProfile) -> HamiltonianProfile:
    return HamiltonianProfile(f)


def calabi(f: TwistProfile, self_check_tol: Optional[float] = 1e-9) -> float:
    """Calabi invariant of the twist: the double radial integral of s f(s).

    Computed in closed form as the single integral of s^2 f(s); when finite
    and a tolerance is given, cross-checked against adaptive quadrature of
    the Hamiltonian (the other integration order) to that relative accuracy.
    """
    value = f.calabi_closed_form()
    if self_check_tol is not None and math.isfinite(value):
        other, _ = quad(f.hamiltonian, 0.0, 1.0, limit=200)
        scale = max(abs(value), 1e-30)
        if abs(other - value) > self_check_tol * scale + 1e-12:
            raise ArithmeticError(
                f"Fubini self-check failed: {value} (s^2 f) vs {other} (H quadrature)"
            )
    return value


def hofer_norm_bound(f: TwistProfile) -> float:
    """Oscillation of the generating Hamiltonian: H(0) - H(1) = H(0); +inf when divergent."""
    return f.hamiltonian_at_center()


@dataclass(frozen=True)
class PeriodicCircle:
    """A circle of q-periodic points winding p times, with its Morse-Bott pair."""

    p: int
    q: int
    radius: float
    action: float
    labels: Tuple[str, ...] = ("e", "h")

    @property
    def rotation(self) -> Fraction:
        return Fraction(self.p, self.q)


def disk_area_level(r: float) -> float:
    """E(r) = (1 - r^2)/2: the normalized area between radius r and the boundary."""
    return 0.5 * (1.0 - r * r)


def level_action(
    f: TwistProfile, p: int, q: int, radius: float, p_area_scale: Optional[float] = None
) -> float:
    """Action of the level-(p/q) circle: q H(r) + p * (area term).

    The area term is p_area_scale * E(r); the calibrated scale (2*pi, i.e.
    the honest symplectic area p * pi * (1 - r^2)) comes from the run
    manifest.  Both Morse-Bott partners receive the same action.
    """
    scale = CALIBRATION["p_area_scale"] if p_area_scale is None else p_area_scale
    return q * f.hamiltonian(radius) + p * scale * disk_area_level(radius)


def _solve_level(f: TwistProfile, target: float, tol: float = 1e-12) -> Optional[float]:
    """Radius with f(r) = target (f non-increasing), or None when unattained.

    Raises PlateauError when the level is met by a constant segment.
    """
    for seg in f.segments:
        lo = max(seg.lo, 1e-15)
        v_lo, v_hi = seg.value(lo), seg.value(seg.hi)
        if seg.is_constant():
            if abs(v_hi - target) <= tol * max(1.0, abs(target)):
                raise PlateauError(
                    f"profile is constant at level {target} on [{seg.lo}, {seg.hi}]"
                )
            continue
        if v_hi - tol <= target <= v_lo + tol:
            a, b = lo, seg.hi
            for _ in range(200):
                mid = 0.5 * (a + b)
                if seg.value(mid) >= target:
                    a = mid
                else:
                    b = mid
                if b - a <= tol:
                    break
            return 0.5 * (a + b)
    return None


def periodic_census(f: TwistProfile, d: int, tol: float = 1e-12) -> List[PeriodicCircle]:
    """All level circles f(r) = 2 pi p/q with q <= d, solved by bisection.

    Requires the rotation at the center to be finite (truncate divergent
    profiles first).  Plateaus at a requested rational level raise
    PlateauError with the offending interval.
    """
    top = f.value_at_center()
    if math.isinf(top):
        raise ValueError("unbounded twist at the center; truncate the profile first")
    out: List[PeriodicCircle] = []
    # the center value is attained only when the profile plateaus there;
    # otherwise it is an unattained supremum and sits outside the range
    top_attained = f.segments[0].is_constant()
    cutoff = top + tol * max(1.0, top) if top_attained else top - tol * max(1.0, top)
    for q in range(1, d + 1):
        p = 1
        while TWO_PI * p / q < cutoff:
            if math.gcd(p, q) == 1:
                r = _solve_level(f, TWO_PI * p / q, tol)
                if r is not None:
                    out.append(PeriodicCircle(p, q, r, level_action(f, p, q, r)))
            p += 1
    out.sort(key=lambda c: (Fraction(c.p, c.q), c.q), reverse=True)
    return out


def truncate_profile(f: TwistProfile, i: int) -> TwistProfile:
    return f.truncated(i)
