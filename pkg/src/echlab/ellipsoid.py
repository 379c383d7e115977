"""Exact Reeb dynamics on ellipsoid boundaries and their action spectra.

The flow on the boundary of E(a,b) is linear in the two angle coordinates,
so everything here is closed-form: no numerical integration enters except in
the volume cross-check, which deliberately recomputes the contact volume by
quadrature of the pulled-back volume form.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

TWO_PI = 2.0 * math.pi


class ResourceCapError(RuntimeError):
    """Spectrum enumeration would exceed the configured entry cap."""


def _detect_rational(x: Union[float, Fraction], tol: float = 1e-12, max_den: int = 10**6):
    """Return Fraction(p, q) when x is (within tol of) a rational with small
    denominator, else None.  Exact Fractions pass straight through.

    Floats must beat the Diophantine-typical approximation quality c/q^2 by
    a wide margin, so quadratic irrationals near the tolerance boundary are
    not misflagged.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    cand = Fraction(x).limit_denominator(max_den)
    err = abs(float(cand) - x)
    # a float that truly encodes p/q (q <= 1e6) is off by storage rounding
    # only (~1e-16); irrational best approximants sit orders of magnitude
    # higher, so the effective gate is far below the nominal tolerance
    if err <= tol * max(1.0, abs(x)) and err <= 1e-14 * max(1.0, abs(x)):
        return cand
    return None


@dataclass(frozen=True)
class Ellipsoid:
    """Parameters (a, b) of E(a,b); actions of the two core orbits.

    The aspect ratio a/b is probed for rationality at construction: exact
    Fraction inputs are tested exactly, and floats are treated as irrational
    unless within 1e-12 of a rational with denominator <= 1e6.
    """

    a: Union[float, Fraction]
    b: Union[float, Fraction]

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("ellipsoid parameters must be positive")

    @property
    def ratio_rational(self) -> Optional[Fraction]:
        if isinstance(self.a, Fraction) and isinstance(self.b, Fraction):
            return self.a / self.b
        if isinstance(self.a, (int, Fraction)) and isinstance(self.b, (int, Fraction)):
            return Fraction(self.a) / Fraction(self.b)
        return _detect_rational(float(self.a) / float(self.b))

    @property
    def is_rational(self) -> bool:
        return self.ratio_rational is not None


@dataclass(frozen=True)
class FlowState:
    """A point on the boundary: two angles and the amplitude split mu.

    mu is the fraction of the constraint carried by the first factor; the
    state sits on a core circle exactly when mu is 0 or 1.
    """

    theta1: float
    theta2: float
    mu: float

    def __post_init__(self):
        if not (0.0 <= self.mu <= 1.0):
            raise ValueError("amplitude split must lie in [0, 1]")

    @property
    def on_core_circle(self) -> bool:
        return self.mu in (0.0, 1.0)


def reeb_flow(e: Ellipsoid, s: FlowState, t: float) -> FlowState:
    """Time-t Reeb flow: each angle advances linearly, mu is preserved."""
    return FlowState(
        theta1=(s.theta1 + TWO_PI * t / float(e.a)) % TWO_PI,
        theta2=(s.theta2 + TWO_PI * t / float(e.b)) % TWO_PI,
        mu=s.mu,
    )


def simple_orbit_census(e: Ellipsoid, L: float) -> List[dict]:
    """Simple orbits (and degenerate torus families) with action <= L.

    Irrational aspect ratio: exactly the two core circles, with model
    rotation numbers a/b and b/a.  Rational ratio p/q in lowest terms: the
    core circles plus one Morse-Bott torus family per common period m*q*a.
    """
    if L <= 0:
        raise ValueError("action bound must be positive")
    a, b = float(e.a), float(e.b)
    out: List[dict] = []
    if a <= L:
        out.append(
            {
                "label": "gamma1",
                "type": "core-circle",
                "action": a,
                "rotation": a / b,
                "kind": "elliptic",
                "degenerate": e.is_rational,
            }
        )
    if b <= L:
        out.append(
            {
                "label": "gamma2",
                "type": "core-circle",
                "action": b,
                "rotation": b / a,
                "kind": "elliptic",
                "degenerate": e.is_rational,
            }
        )
    ratio = e.ratio_rational
    if ratio is not None:
        p, q = ratio.numerator, ratio.denominator
        period = q * a  # = p * b up to rounding; exact when inputs are exact
        m = 1
        while m * period <= L:
            out.append(
                {
                    "label": f"torus{m}",
                    "type": "torus-family",
                    "action": m * period,
                    "windings": (m * q, m * p),
                    "degenerate": True,
                }
            )
            m += 1
    return out


@dataclass(frozen=True)
class SpectrumEntry:
    k: int
    c: float
    grading: int
    witness: Tuple[int, int]


def spectrum_values(
    e: Ellipsoid,
    L: Optional[float] = None,
    count: Optional[int] = None,
    formal: bool = False,
    cap: int = 10**7,
) -> List[Tuple[float, int, int]]:
    """Sorted values m*a + n*b with (m, n) witnesses, by bounded-heap enumeration.

    Provide either an action bound L or a target entry count.  Rational
    aspect ratios produce coinciding values; these are rejected unless
    ``formal`` is set, in which case the multiset is enumerated as-is.
    """
    if (L is None) == (count is None):
        raise ValueError("provide exactly one of L or count")
    if e.is_rational and not formal:
        raise ValueError(
            "rational aspect ratio: the spectrum has coinciding values; "
            "pass formal=True for the formal lattice spectrum"
        )
    a, b = float(e.a), float(e.b)
    out: List[Tuple[float, int, int]] = []
    heap: List[Tuple[float, int, int]] = [(0.0, 0, 0)]
    while heap:
        v, m, n = heapq.heappop(heap)
        if L is not None and v > L * (1 + 1e-15):
            break
        out.append((v, m, n))
        if count is not None and len(out) >= count:
            break
        if len(out) > cap:
            raise ResourceCapError(f"spectrum entry cap {cap} exceeded")
        heapq.heappush(heap, (v + a, m + 1, n))
        if m == 0:
            heapq.heappush(heap, (v + b, 0, n + 1))
    return out


def cached_spectrum_values(e: Ellipsoid, count: int, cap: int = 10**7) -> np.ndarray:
    """Spectrum values with optional on-disk memoization.

    When ECHLAB_CACHE_DIR is set, results are stored as .npy files (binary
    layout v1: a float64 vector of the first ``count`` values, one file per
    (a, b, count) triple) and reused across runs.
    """
    import os

    cache_dir = os.environ.get("ECHLAB_CACHE_DIR")
    path = None
    if cache_dir:
        key = f"spectrum_v1_{float(e.a)!r}_{float(e.b)!r}_{count}.npy"
        path = os.path.join(cache_dir, key)
        if os.path.exists(path):
            data = np.load(path)
            if len(data) == count:
                return data
    data = np.array([v[0] for v in spectrum_values(e, count=count, cap=cap)])
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        np.save(path, data)
    return data


def action_spectrum(
    e: Ellipsoid, L: float, formal: bool = False, cap: int = 10**7
) -> List[SpectrumEntry]:
    """Indexed action spectrum up to L: entries (k, c_k, grading 2k, witness)."""
    vals = spectrum_values(e, L=L, formal=formal, cap=cap)
    return [SpectrumEntry(k, v, 2 * k, (m, n)) for k, (v, m, n) in enumerate(vals)]


def spectral_invariant(e: Ellipsoid, k: int, formal: bool = False, cap: int = 10**7) -> SpectrumEntry:
    """The k-th spectral value, growing the enumeration adaptively."""
    if k < 0:
        raise ValueError("index must be nonnegative")
    vals = spectrum_values(e, count=k + 1, formal=formal, cap=cap)
    v, m, n = vals[k]
    return SpectrumEntry(k, v, 2 * k, (m, n))


def weyl_table(e: Ellipsoid, kmax: int, formal: bool = False, cap: int = 10**7) -> dict:
    """Convergence of c_k^2 / (2k) to the contact volume a*b.

    Rows are a geometric subsample of k up to kmax; the summary records the
    running maximum deviation over the final decade [kmax/10, kmax].
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    if not formal and e.is_rational:
        raise ValueError("irrational aspect ratio required outside formal mode")
    if formal:
        cs = np.array([x[0] for x in spectrum_values(e, count=kmax + 1, formal=True, cap=cap)])
    else:
        cs = cached_spectrum_values(e, kmax + 1, cap)
    v = volume(e)
    ks = np.arange(len(cs))
    rows = []
    k = 1
    while k <= kmax:
        ratio = cs[k] ** 2 / (2.0 * k)
        rows.append({"k": k, "c_k": float(cs[k]), "ratio": float(ratio), "deviation": float(abs(ratio - v))})
        k *= 2
    if rows and rows[-1]["k"] != kmax:
        ratio = cs[kmax] ** 2 / (2.0 * kmax)
        rows.append({"k": kmax, "c_k": float(cs[kmax]), "ratio": float(ratio), "deviation": float(abs(ratio - v))})
    lo = max(1, kmax // 10)
    dec = np.abs(cs[lo : kmax + 1] ** 2 / (2.0 * ks[lo : kmax + 1]) - v)
    return {
        "volume": v,
        "rows": rows,
        "final_decade_max_deviation": float(dec.max()),
        "kmax": kmax,
    }


def max_deviation_over(e: Ellipsoid, k_lo: int, k_hi: int, cap: int = 10**7) -> float:
    """max over k in [k_lo, k_hi] of |c_k^2/(2k) - volume|."""
    cs = cached_spectrum_values(e, k_hi + 1, cap)
    v = volume(e)
    ks = np.arange(len(cs))
    dev = np.abs(cs[k_lo : k_hi + 1] ** 2 / (2.0 * ks[k_lo : k_hi + 1]) - v)
    return float(dev.max())


def volume(e: Ellipsoid) -> float:
    """Contact volume of the boundary: the closed form a*b."""
    return float(e.a) * float(e.b)


def volume_quadrature(e: Ellipsoid, n_mu: int = 200, n_angle: int = 16) -> float:
    """Contact volume recomputed by quadrature of the pulled-back volume form.

    Parameterizes the boundary by (mu, theta1, theta2), evaluates the 3-form
    lambda ^ d(lambda) on the coordinate frame numerically from the ambient
    embedding, and integrates with Gauss-Legendre in mu and trapezoids in the
    angles.  Never consults the closed form.
    """
    a, b = float(e.a), float(e.b)

    def frame(mu, t1, t2):
        # embedding (x1, y1, x2, y2) and its partial derivatives
        r1 = math.sqrt(a * mu / math.pi) if mu > 0 else 0.0
        r2 = math.sqrt(b * (1 - mu) / math.pi) if mu < 1 else 0.0
        c1, s1, c2, s2 = math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2)
        p = (r1 * c1, r1 * s1, r2 * c2, r2 * s2)
        dr1 = a / (2 * math.pi * r1) if r1 > 0 else 0.0
        dr2 = -b / (2 * math.pi * r2) if r2 > 0 else 0.0
        d_mu = (dr1 * c1, dr1 * s1, dr2 * c2, dr2 * s2)
        d_t1 = (-r1 * s1, r1 * c1, 0.0, 0.0)
        d_t2 = (0.0, 0.0, -r2 * s2, r2 * c2)
        return p, d_mu, d_t1, d_t2

    def lam(p, v):
        x1, y1, x2, y2 = p
        return 0.5 * (x1 * v[1] - y1 * v[0] + x2 * v[3] - y2 * v[2])

    def dlam(u, v):
        return (u[0] * v[1] - u[1] * v[0]) + (u[2] * v[3] - u[3] * v[2])

    nodes, weights = np.polynomial.legendre.leggauss(n_mu)
    mus = 0.5 * (nodes + 1.0)
    wmu = 0.5 * weights
    angles = np.linspace(0.0, TWO_PI, n_angle, endpoint=False)
    total = 0.0
    for mu, w in zip(mus, wmu):
        acc = 0.0
        for t1 in angles:
            for t2 in angles:
                p, dm, d1, d2 = frame(mu, t1, t2)
                val = (
                    lam(p, dm) * dlam(d1, d2)
                    - lam(p, d1) * dlam(dm, d2)
                    + lam(p, d2) * dlam(dm, d1)
                )
                acc += val
        total += w * acc * (TWO_PI / n_angle) ** 2
    return abs(total)


def gss_return_map(e: Ellipsoid, point: Tuple[float, float]) -> Tuple[Tuple[float, float], float]:
    """First-return map on the disk section spanning gamma2 at theta1 = 0.

    The return time is exactly a; the induced map rotates the section angle
    by 2*pi*a/b and preserves the radius fraction.
    """
    radius, angle = point
    if not (0.0 <= radius < 1.0):
        raise ValueError("point on binding orbit" if radius >= 1.0 else "radius fraction must be in [0, 1)")
    a, b = float(e.a), float(e.b)
    return (radius, (angle + TWO_PI * a / b) % TWO_PI), a


def product_of_periods_check(e: Ellipsoid, rel_tol: float = 1e-12) -> dict:
    """Two-orbit identity: the product of the two simple periods equals the volume."""
    if e.is_rational:
        raise ValueError("not a two-orbit flow")
    prod = float(e.a) * float(e.b)
    vol = volume(e)
    diff = abs(prod - vol)
    return {
        "product_of_periods": prod,
        "volume": vol,
        "difference": diff,
        "ok": diff <= rel_tol * max(abs(prod), abs(vol)),
    }
