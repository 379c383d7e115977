"""Orbit sets, curve data, topological index bookkeeping, and tower audits.

Orbit actions are kept as exact Fractions wherever the caller supplies them
that way, so the telescoping identities in tower audits hold with zero
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .rotations import (
    Rotation,
    cz_index,
    partition_negative,
    partition_positive,
)

ELLIPTIC = "elliptic"
POSITIVE_HYPERBOLIC = "positive-hyperbolic"
NEGATIVE_HYPERBOLIC = "negative-hyperbolic"
KINDS = (ELLIPTIC, POSITIVE_HYPERBOLIC, NEGATIVE_HYPERBOLIC)


class StructuralError(ValueError):
    """Malformed orbit-set / curve / tower data."""


@dataclass(frozen=True)
class SimpleOrbit:
    """An embedded periodic orbit with action, rotation number, and type.

    The model convention ties the type to the rotation number: positive
    hyperbolic at integral theta, negative hyperbolic at half-integral theta,
    elliptic otherwise.  ``period`` is the orbit's period count used by the
    mapping-torus degree; it defaults to 1 and is ignored in the abstract
    setting.
    """

    label: str
    action: Union[Fraction, float]
    theta: Rotation
    kind: str
    period: int = 1

    def __post_init__(self):
        object.__setattr__(self, "_cz_memo", {})
        object.__setattr__(self, "_cls_memo", {})
        if self.kind not in KINDS:
            raise StructuralError(f"unknown orbit kind {self.kind!r}")
        if not (self.action > 0):
            raise StructuralError(f"orbit action must be positive, got {self.action}")
        if self.kind == ELLIPTIC and self.theta.is_integral():
            raise StructuralError(f"elliptic orbit {self.label} has integral rotation")
        if self.kind == POSITIVE_HYPERBOLIC and not self.theta.is_integral():
            raise StructuralError(f"positive-hyperbolic orbit {self.label} needs integral rotation")
        if self.kind == NEGATIVE_HYPERBOLIC and not self.theta.is_half_integral():
            raise StructuralError(f"negative-hyperbolic orbit {self.label} needs half-integral rotation")

    @property
    def is_hyperbolic(self) -> bool:
        return self.kind != ELLIPTIC


class OrbitSet:
    """A finite multiset of simple orbits with positive multiplicities."""

    def __init__(self, entries: Iterable[Tuple[SimpleOrbit, int]] = ()):
        self._entries: Dict[str, Tuple[SimpleOrbit, int]] = {}
        self._action = None
        self._score = None
        self._cz = None
        for orbit, mult in entries:
            if mult < 1:
                raise StructuralError(f"multiplicity must be >= 1, got {mult} at {orbit.label}")
            if orbit.label in self._entries:
                raise StructuralError(f"duplicate orbit id {orbit.label!r}")
            self._entries[orbit.label] = (orbit, mult)

    def items(self):
        return [self._entries[k] for k in sorted(self._entries)]

    def multiplicity(self, label: str) -> int:
        entry = self._entries.get(label)
        return entry[1] if entry else 0

    def orbit(self, label: str) -> SimpleOrbit:
        return self._entries[label][0]

    def __contains__(self, label: str) -> bool:
        return label in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrbitSet):
            return NotImplemented
        return {k: (o.label, m) for k, (o, m) in self._entries.items()} == {
            k: (o.label, m) for k, (o, m) in other._entries.items()
        }

    def degree(self, mapping_torus: bool = False) -> int:
        """Sum of multiplicities, weighted by orbit periods in the mapping-torus setting."""
        if mapping_torus:
            return sum(o.period * m for o, m in self.items())
        return sum(m for _, m in self.items())


def orbit_set_action(alpha: OrbitSet):
    """Multiplicity-weighted total action; empty set has action 0."""
    if alpha._action is None:
        total = Fraction(0)
        exact = True
        for orbit, mult in alpha.items():
            if not isinstance(orbit.action, Fraction):
                exact = False
            total = total + mult * orbit.action
        alpha._action = total if exact else float(total)
    return alpha._action


def is_ech_generator(alpha: OrbitSet) -> bool:
    """True iff every hyperbolic entry has multiplicity 1."""
    return all(m == 1 for o, m in alpha.items() if o.is_hyperbolic)


def _orbit_cz(orbit: SimpleOrbit, m: int, tol: float) -> int:
    memo = orbit._cz_memo
    if m not in memo:
        memo[m] = cz_index(orbit.theta, m, tol=tol)
    return memo[m]


def cz_top(alpha: OrbitSet, tol: float = 1e-12) -> int:
    """Sum over entries of the Conley-Zehnder index of the m_i-fold cover."""
    if alpha._cz is None:
        alpha._cz = sum(_orbit_cz(o, m, tol) for o, m in alpha.items())
    return alpha._cz


@dataclass(frozen=True)
class CurveEnds:
    """Ends of the nontrivial component at one orbit, plus trivial-cylinder coverage."""

    orbit_label: str
    multiplicities: Tuple[int, ...]
    c0_present: bool

    def __post_init__(self):
        if not self.multiplicities:
            raise StructuralError(f"ends record at {self.orbit_label} lists no end")
        if any(m < 1 for m in self.multiplicities):
            raise StructuralError(f"end multiplicities must be positive at {self.orbit_label}")

    @property
    def total(self) -> int:
        return sum(self.multiplicities)

    @property
    def count(self) -> int:
        return len(self.multiplicities)


@dataclass
class CurveData:
    """Combinatorial data of one U-map curve C = C0 u C1.

    ``positive_ends`` / ``negative_ends`` record the ends of the embedded
    component C1; at each listed orbit the deficit against the endpoint
    multiplicity is carried by trivial cylinders (C0), and ``c0_present``
    must flag exactly the orbits with a positive deficit.  Orbits of the
    endpoint sets that carry no C1 end at all are implicitly C0-only.
    """

    genus: int
    positive_ends: Tuple[CurveEnds, ...]
    negative_ends: Tuple[CurveEnds, ...]
    alpha: OrbitSet
    beta: OrbitSet
    c_tau: int = 0

    def __post_init__(self):
        if self.genus < 0:
            raise StructuralError("genus must be nonnegative")
        self.positive_ends = tuple(self.positive_ends)
        self.negative_ends = tuple(self.negative_ends)
        self._check_side(self.positive_ends, self.alpha, "positive")
        self._check_side(self.negative_ends, self.beta, "negative")
        act = self.action
        if act < 0:
            raise StructuralError(f"curve action must be nonnegative, got {act}")

    @staticmethod
    def _check_side(ends: Tuple[CurveEnds, ...], endpoint: OrbitSet, side: str):
        seen = set()
        for e in ends:
            if e.orbit_label in seen:
                raise StructuralError(f"repeated ends record at {e.orbit_label} ({side})")
            seen.add(e.orbit_label)
            if e.orbit_label not in endpoint:
                raise StructuralError(f"{side} ends at {e.orbit_label} missing from endpoint set")
            total = endpoint.multiplicity(e.orbit_label)
            if e.total > total:
                raise StructuralError(
                    f"{side} end multiplicities at {e.orbit_label} exceed endpoint multiplicity"
                )
            deficit = total - e.total
            if (deficit > 0) != e.c0_present:
                raise StructuralError(
                    f"c0_present flag at {e.orbit_label} ({side}) inconsistent with deficit {deficit}"
                )

    @property
    def action(self):
        """Endpoint action difference (Stokes bookkeeping)."""
        return orbit_set_action(self.alpha) - orbit_set_action(self.beta)

    def is_cylinder(self) -> bool:
        """C1 a cylinder: genus 0 with exactly one positive and one negative end."""
        pos = sum(e.count for e in self.positive_ends)
        neg = sum(e.count for e in self.negative_ends)
        return self.genus == 0 and pos == 1 and neg == 1


def j0_of_curve(c: CurveData) -> int:
    """J0 topology index: -2 + 2 g(C1) + e(C).

    e(C) sums, over every orbit where C1 has ends, twice the number of ends
    minus one when no trivial cylinder covers that orbit.
    """
    cached = getattr(c, "_j0", None)
    if cached is None:
        e = 0
        for side in (c.positive_ends, c.negative_ends):
            for ends in side:
                e += 2 * ends.count - (0 if ends.c0_present else 1)
        cached = -2 + 2 * c.genus + e
        c._j0 = cached
    return cached


def ech_index_from_j0(c: CurveData, tol: float = 1e-12) -> int:
    """ECH index from the index-difference identity: I = J0 + 2 c_tau + CZ^top(alpha) - CZ^top(beta)."""
    return j0_of_curve(c) + 2 * c.c_tau + cz_top(c.alpha, tol) - cz_top(c.beta, tol)


def forced_topology(j0: int, full_coverage: bool, max_genus: int = 3, max_ends: int = 6):
    """Solve -2 + 2g + e = j0 for small (genus, end count) data.

    With full trivial-cylinder coverage, e = 2E and the solutions are pairs
    (g, E); a curve between nonempty orbit sets needs at least one end of
    each sign, so E >= 2.  Without full coverage the number A of C1-end
    orbits lacking C0 enters as e = 2E - A, and triples (g, E, A) are
    returned.
    """
    out = set()
    for g in range(0, max_genus + 1):
        for ends in range(2, max_ends + 1):
            if full_coverage:
                if -2 + 2 * g + 2 * ends == j0:
                    out.add((g, ends))
            else:
                for absent in range(0, ends + 1):
                    if -2 + 2 * g + 2 * ends - absent == j0:
                        out.add((g, ends, absent))
    return out


def _orbit_classify(orbit: SimpleOrbit, m: int, tol: float) -> Tuple[bool, bool, bool]:
    memo = orbit._cls_memo
    if m not in memo:
        pp = partition_positive(orbit.theta, m, tol)
        pn = partition_negative(orbit.theta, m, tol)
        memo[m] = (pp.parts == (m,), pn.parts == (m,), m > 1 and 1 not in pp)
    return memo[m]


def component_classification(orbit: SimpleOrbit, m: int, tol: float = 1e-12) -> dict:
    """Classify one orbit-set component against its partition data.

    p+ component: the positive partition is the single part (m); p- likewise;
    special: m > 1 with no part of size 1 in the positive partition.
    """
    is_pp, is_pn, special = _orbit_classify(orbit, m, tol)
    return {"is_p_plus": is_pp, "is_p_minus": is_pn, "is_special": special}


def orbit_set_score(alpha: OrbitSet, tol: float = 1e-12) -> int:
    """Score S = (# p+ components) + (# special components) - (# p- components)."""
    if alpha._score is None:
        score = 0
        for orbit, mult in alpha.items():
            is_pp, is_pn, special = _orbit_classify(orbit, mult, tol)
            score += int(is_pp) + int(special) - int(is_pn)
        alpha._score = score
    return alpha._score


def curve_score(c: CurveData, tol: float = 1e-12) -> int:
    """S(C) = S(alpha) - S(beta)."""
    return orbit_set_score(c.alpha, tol) - orbit_set_score(c.beta, tol)


def total_score(c: CurveData, tol: float = 1e-12) -> int:
    """T(C) = S(C) + 3 y(C) with y = J0 - 2."""
    return curve_score(c, tol) + 3 * (j0_of_curve(c) - 2)


def _k_of_set(alpha: OrbitSet) -> int:
    """K(alpha) <= 0: minus the number of components with multiplicity > 1."""
    return -sum(1 for _, m in alpha.items() if m > 1)


def k_invariant(c: CurveData) -> int:
    """K(C) = K(alpha) - K(beta) + 2 y(C)."""
    return _k_of_set(c.alpha) - _k_of_set(c.beta) + 2 * (j0_of_curve(c) - 2)


@dataclass
class Tower:
    """A chained sequence of curves: curves[i].beta equals curves[i+1].alpha."""

    curves: List[CurveData]

    def __post_init__(self):
        for i in range(len(self.curves) - 1):
            if not self.curves[i].beta == self.curves[i + 1].alpha:
                raise StructuralError(f"tower adjacency fails between curves {i} and {i + 1}")

    def __len__(self):
        return len(self.curves)

    @property
    def top(self) -> OrbitSet:
        return self.curves[0].alpha

    @property
    def bottom(self) -> OrbitSet:
        return self.curves[-1].beta


def tower_audit(t: Tower, action_threshold, tol: float = 1e-12) -> dict:
    """Exact telescoping and budget audit of a U-tower.

    Verifies the total-score and action telescoping identities exactly,
    reports ECH-index totals against 2N, counts high-action curves against
    the pigeonhole budget (sum of actions) / threshold, tallies the score
    census, and scans for low-action non-cylinders with negative total score
    (expected none).
    """
    n = len(t)
    scores = [total_score(c, tol) for c in t.curves]
    ys = [j0_of_curve(c) - 2 for c in t.curves]
    actions = [c.action for c in t.curves]
    indices = [ech_index_from_j0(c, tol) for c in t.curves]

    lhs_score = sum(scores)
    rhs_score = orbit_set_score(t.top, tol) - orbit_set_score(t.bottom, tol) + 3 * sum(ys)
    lhs_action = sum(actions, Fraction(0)) if all(isinstance(a, Fraction) for a in actions) else sum(actions)
    rhs_action = orbit_set_action(t.top) - orbit_set_action(t.bottom)

    total_action = lhs_action
    budget = float(total_action) / float(action_threshold) if action_threshold > 0 else math.inf
    high_action = [i for i, a in enumerate(actions) if a > action_threshold]

    negative_low_action = [
        i
        for i, c in enumerate(t.curves)
        if actions[i] <= action_threshold and not c.is_cylinder() and scores[i] < 0
    ]

    return {
        "n": n,
        "score_telescoping_ok": lhs_score == rhs_score,
        "score_telescoping": {"lhs": lhs_score, "rhs": rhs_score},
        "action_telescoping_ok": lhs_action == rhs_action,
        "action_telescoping": {"lhs": lhs_action, "rhs": rhs_action},
        "total_ech_index": sum(indices),
        "ech_index_deviation_from_2n": sum(indices) - 2 * n,
        "high_action_count": len(high_action),
        "high_action_budget": budget,
        "high_action_within_budget": len(high_action) <= budget,
        "count_t_positive": sum(1 for s in scores if s > 0),
        "count_t0_j01": sum(1 for s, y in zip(scores, ys) if s == 0 and y == -1),
        "count_t0_j02": sum(1 for s, y in zip(scores, ys) if s == 0 and y == 0),
        "negative_low_action_noncylinders": negative_low_action,
    }


# --- JSON wire formats -----------------------------------------------------
#
# orbit: {"label": str, "action": [num, den] | float, "theta": [num, den] | float,
#         "kind": str, "period": int}
# orbit set: {"orbits": [orbit...], "entries": [[label, mult]...]}
# curve: {"genus": int, "c_tau": int, "alpha": entries, "beta": entries,
#         "positive_ends": [{"orbit": label, "multiplicities": [..], "c0": bool}...],
#         "negative_ends": [...]}
# tower: {"orbits": [orbit...], "curves": [curve...]} with per-curve entries lists.


def _num_to_json(x):
    if isinstance(x, Fraction):
        return [x.numerator, x.denominator]
    return float(x)


def _num_from_json(v):
    if isinstance(v, list):
        return Fraction(v[0], v[1])
    return float(v)


def orbit_to_json(o: SimpleOrbit) -> dict:
    theta = [o.theta.value.numerator, o.theta.value.denominator] if o.theta.exact else float(o.theta.value)
    return {
        "label": o.label,
        "action": _num_to_json(o.action),
        "theta": theta,
        "kind": o.kind,
        "period": o.period,
    }


def orbit_from_json(d: dict) -> SimpleOrbit:
    theta = d["theta"]
    rot = Rotation.rational(theta[0], theta[1]) if isinstance(theta, list) else Rotation.real(theta)
    return SimpleOrbit(
        label=d["label"],
        action=_num_from_json(d["action"]),
        theta=rot,
        kind=d["kind"],
        period=d.get("period", 1),
    )


def orbit_set_to_json(alpha: OrbitSet) -> dict:
    return {
        "orbits": [orbit_to_json(o) for o, _ in alpha.items()],
        "entries": [[o.label, m] for o, m in alpha.items()],
    }


def orbit_set_from_json(d: dict) -> OrbitSet:
    pool = {o["label"]: orbit_from_json(o) for o in d["orbits"]}
    return OrbitSet((pool[label], mult) for label, mult in d["entries"])


def curve_to_json(c: CurveData) -> dict:
    def ends(side):
        return [
            {"orbit": e.orbit_label, "multiplicities": list(e.multiplicities), "c0": e.c0_present}
            for e in side
        ]

    labels = {o.label: o for o, _ in c.alpha.items()}
    labels.update({o.label: o for o, _ in c.beta.items()})
    return {
        "genus": c.genus,
        "c_tau": c.c_tau,
        "orbits": [orbit_to_json(labels[k]) for k in sorted(labels)],
        "alpha": [[o.label, m] for o, m in c.alpha.items()],
        "beta": [[o.label, m] for o, m in c.beta.items()],
        "positive_ends": ends(c.positive_ends),
        "negative_ends": ends(c.negative_ends),
    }


def curve_from_json(d: dict, pool: Optional[Dict[str, SimpleOrbit]] = None) -> CurveData:
    local = dict(pool or {})
    for o in d.get("orbits", []):
        local.setdefault(o["label"], orbit_from_json(o))

    def ends(key):
        return tuple(
            CurveEnds(e["orbit"], tuple(e["multiplicities"]), e["c0"]) for e in d.get(key, [])
        )

    return CurveData(
        genus=d["genus"],
        positive_ends=ends("positive_ends"),
        negative_ends=ends("negative_ends"),
        alpha=OrbitSet((local[l], m) for l, m in d["alpha"]),
        beta=OrbitSet((local[l], m) for l, m in d["beta"]),
        c_tau=d.get("c_tau", 0),
    )


def tower_to_json(t: Tower) -> dict:
    labels: Dict[str, SimpleOrbit] = {}
    for c in t.curves:
        for o, _ in list(c.alpha.items()) + list(c.beta.items()):
            labels[o.label] = o
    curves = []
    for c in t.curves:
        d = curve_to_json(c)
        d.pop("orbits")
        curves.append(d)
    return {"orbits": [orbit_to_json(labels[k]) for k in sorted(labels)], "curves": curves}


def tower_from_json(d: dict) -> Tower:
    pool = {o["label"]: orbit_from_json(o) for o in d["orbits"]}
    return Tower([curve_from_json(c, pool) for c in d["curves"]])
