"""Command-line entry point: deterministic experiment orchestration.

Exit codes: 0 when every verdict passes, 1 when any fails, 2 on usage or
schema errors.  All randomized sweeps consume only the seeded generator, so
identical configurations produce byte-identical output bundles.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence

from . import ellipsoid as el
from . import pfh, twist
from .orbits import (
    curve_from_json,
    forced_topology,
    is_ech_generator,
    k_invariant,
    orbit_set_action,
    orbit_set_from_json,
    orbit_set_score,
    total_score,
    tower_audit,
    tower_from_json,
)
from .reporting import ReportBundle, base_manifest
from .rotations import Rotation, cz_index, partition_negative, partition_positive, partition_properties
from .sampling import random_tower, score_falsification_scan
from .svgplot import emit_svg


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: Dict[str, object] = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None
    formats: Sequence[str] = ("csv", "json")


def parse_number(text: str) -> float:
    """Accept plain floats, fractions 'p/q', 'sqrtN', 'pi', and 'golden'."""
    text = text.strip()
    named = {"pi": math.pi, "golden": (1 + math.sqrt(5)) / 2, "e": math.e}
    if text in named:
        return named[text]
    if text.startswith("sqrt"):
        return math.sqrt(float(text[4:]))
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    return float(text)


def parse_rotation(text: str) -> Rotation:
    if "/" in text:
        num, den = text.split("/")
        return Rotation.rational(int(num), int(den))
    if text.startswith("sqrt"):
        return Rotation.real(math.sqrt(float(text[4:])))
    try:
        return Rotation.rational(int(text))
    except ValueError:
        return Rotation.real(float(text))


def _load_profile(path: str) -> twist.TwistProfile:
    with open(path) as fh:
        return twist.TwistProfile.from_json(json.load(fh))


# -- command implementations ------------------------------------------------


def run(config: RunConfig) -> ReportBundle:
    """Dispatch a validated RunConfig to its module operation."""
    handlers = {
        "ellipsoid.census": _ellipsoid_census,
        "ellipsoid.spectrum": _ellipsoid_spectrum,
        "ellipsoid.weyl": _ellipsoid_weyl,
        "ellipsoid.return-map": _ellipsoid_return_map,
        "ellipsoid.identity-check": _ellipsoid_identity,
        "twist.calabi": _twist_calabi,
        "twist.census": _twist_census,
        "twist.complex": _twist_complex,
        "twist.cd": _twist_cd,
        "twist.axioms": _twist_axioms,
        "twist.infinite": _twist_infinite,
        "partitions": _partitions,
        "score": _score,
        "tower": _tower,
        "selftest": _selftest,
    }
    if config.command not in handlers:
        raise UsageError(f"unknown subcommand {config.command!r}")
    bundle = ReportBundle(manifest=base_manifest({"command": config.command, **config.params, "seed": config.seed}))
    handlers[config.command](config, bundle)
    return bundle


def _ellipsoid_census(cfg: RunConfig, bundle: ReportBundle):
    e = el.Ellipsoid(cfg.params["a"], cfg.params["b"])
    census = el.simple_orbit_census(e, cfg.params.get("L", 10.0))
    bundle.add_table(
        "census",
        ["label", "type", "action", "degenerate"],
        [(c["label"], c["type"], float(c["action"]), c["degenerate"]) for c in census],
    )
    bundle.manifest["rational_ratio"] = e.is_rational
    core = [c for c in census if c["type"] == "core-circle"]
    bundle.add_verdict("census_core_count", len(core) <= 2, detail=f"{len(core)} core circles")


def _ellipsoid_spectrum(cfg: RunConfig, bundle: ReportBundle):
    e = el.Ellipsoid(cfg.params["a"], cfg.params["b"])
    formal = bool(cfg.params.get("formal", False))
    if "count" in cfg.params and cfg.params["count"]:
        entries = [
            el.SpectrumEntry(k, v, 2 * k, (m, n))
            for k, (v, m, n) in enumerate(
                el.spectrum_values(e, count=int(cfg.params["count"]), formal=formal, cap=int(cfg.params.get("cap", 10**7)))
            )
        ]
    else:
        entries = el.action_spectrum(e, float(cfg.params.get("L", 10.0)), formal=formal)
    bundle.add_table(
        "spectrum",
        ["k", "c_k", "grading", "m", "n"],
        [(s.k, s.c, s.grading, s.witness[0], s.witness[1]) for s in entries],
    )
    nondecreasing = all(a.c <= b.c + 1e-12 for a, b in zip(entries, entries[1:]))
    bundle.add_verdict("spectrum_sorted", nondecreasing)


def _ellipsoid_weyl(cfg: RunConfig, bundle: ReportBundle):
    e = el.Ellipsoid(cfg.params["a"], cfg.params["b"])
    kmax = int(cfg.params.get("kmax", 10**5))
    tol = float(cfg.params.get("tol", 0.02))
    table = el.weyl_table(e, kmax, formal=bool(cfg.params.get("formal", False)))
    rows = [(r["k"], r["c_k"], r["ratio"], r["deviation"]) for r in table["rows"]]
    bundle.add_table("weyl", ["k", "c_k", "ratio", "deviation"], rows)
    t = bundle.tables["weyl"]
    bundle.plots["weyl_convergence"] = emit_svg(t, "k", ["deviation"], title="weyl deviation", logx=True, logy=True)
    final_dev = float(table["rows"][-1]["deviation"])
    bundle.add_verdict(
        "weyl_final_deviation",
        final_dev <= tol * table["volume"],
        margin=tol * table["volume"] - final_dev,
        detail=f"|c_k^2/2k - V| = {final_dev:.6g} at k={kmax}, V = {table['volume']:.6g}",
    )


def _ellipsoid_return_map(cfg: RunConfig, bundle: ReportBundle):
    e = el.Ellipsoid(cfg.params["a"], cfg.params["b"])
    n = int(cfg.params.get("points", 100))
    rng = random.Random(cfg.seed)
    expected = (2 * math.pi * float(e.a) / float(e.b)) % (2 * math.pi)
    rows = []
    worst = 0.0
    for _ in range(n):
        pt = (rng.random() * 0.99, rng.random() * 2 * math.pi)
        (r2, a2), rt = el.gss_return_map(e, pt)
        delta = abs((a2 - pt[1]) % (2 * math.pi) - expected)
        delta = min(delta, 2 * math.pi - delta)
        worst = max(worst, delta, abs(r2 - pt[0]), abs(rt - float(e.a)))
        rows.append((pt[0], pt[1], r2, a2, rt))
    bundle.add_table("return_map", ["r_in", "angle_in", "r_out", "angle_out", "return_time"], rows)
    bundle.add_verdict("return_map_rotation", worst <= 1e-9, margin=1e-9 - worst)


def _ellipsoid_identity(cfg: RunConfig, bundle: ReportBundle):
    e = el.Ellipsoid(cfg.params["a"], cfg.params["b"])
    rep = el.product_of_periods_check(e)
    quad = el.volume_quadrature(e)
    rel = abs(quad - rep["volume"]) / rep["volume"]
    bundle.add_table(
        "identity",
        ["product_of_periods", "volume_closed_form", "volume_quadrature", "difference"],
        [(rep["product_of_periods"], rep["volume"], quad, rep["difference"])],
    )
    bundle.add_verdict("product_equals_volume", rep["ok"] and rel <= 1e-6, margin=1e-6 - rel)


def _twist_calabi(cfg: RunConfig, bundle: ReportBundle):
    f = _load_profile(cfg.params["profile"])
    value = twist.calabi(f)
    hofer = twist.hofer_norm_bound(f)
    bundle.add_table("calabi", ["calabi", "hofer_bound"], [(value, hofer)])
    bundle.add_verdict("calabi_finite" if math.isfinite(value) else "calabi_divergent", True,
                       detail=f"Cal = {value}")


def _twist_census(cfg: RunConfig, bundle: ReportBundle):
    f = _load_profile(cfg.params["profile"])
    d = int(cfg.params.get("d", 6))
    circles = twist.periodic_census(f, d)
    bundle.add_table(
        "twist_census",
        ["p", "q", "radius", "action", "labels"],
        [(c.p, c.q, c.radius, c.action, "+".join(c.labels)) for c in circles],
    )
    bundle.add_verdict("census_radii_sorted", all(
        a.radius < b.radius + 1e-12 for a, b in zip(circles, circles[1:])), detail=f"{len(circles)} levels")


def _twist_complex(cfg: RunConfig, bundle: ReportBundle):
    f = _load_profile(cfg.params["profile"])
    d = int(cfg.params.get("d", 4))
    cx = pfh.build_complex(f, d, generator_cap=int(cfg.params.get("cap", 200_000)))
    rep = cx.validate()
    bundle.add_table(
        "complex",
        ["generators", "classes", "distinguished_grading", "min_action_drop"],
        [(rep["generators"], rep["class_count"], rep["distinguished_grading"],
          rep["min_action_drop"] if rep["min_action_drop"] is not None else 0.0)],
    )
    bundle.add_verdict("complex_valid", True, detail=f"d={d}: {rep['generators']} generators")


def _twist_cd(cfg: RunConfig, bundle: ReportBundle):
    f = _load_profile(cfg.params["profile"])
    d = int(cfg.params.get("d", 16))
    cd = pfh.spectral_invariant_cd(f, d)
    cal = twist.calabi(f, self_check_tol=None)
    bundle.add_table("cd", ["d", "c_d", "ratio", "calabi"], [(d, cd, cd / d, cal)])
    bundle.add_verdict("cd_nonnegative", cd >= 0.0, margin=cd)


def _twist_axioms(cfg: RunConfig, bundle: ReportBundle):
    f = _load_profile(cfg.params["profile"])
    g = _load_profile(cfg.params.get("profile2", cfg.params["profile"]))
    rep = pfh.axioms_report(f, g, dmax=int(cfg.params.get("dmax", 128)))
    rows = []
    for side, table in (("f", rep["weyl_f"]), ("g", rep["weyl_g"])):
        for r in table:
            rows.append((side, r["d"], r["ratio"], r["calabi"], r["deviation"]))
    bundle.add_table("weyl_axiom", ["profile", "d", "ratio", "calabi", "deviation"], rows)
    bundle.add_table(
        "hofer_lipschitz",
        ["d", "bound", "difference", "slack"],
        [(r["d"], r["bound"], r["difference"], r["slack"]) for r in rep["hofer_lipschitz_rows"]],
    )
    bundle.add_verdict("identity_axiom", rep["identity_ok"])
    if rep["monotonicity_applicable"]:
        bundle.add_verdict("monotonicity_axiom", bool(rep["monotonicity_ok"]))
    bundle.add_verdict("hofer_lipschitz_axiom", rep["hofer_lipschitz_ok"])
    bundle.add_verdict("weyl_axiom", rep["weyl_ok"])


def _twist_infinite(cfg: RunConfig, bundle: ReportBundle):
    f = _load_profile(cfg.params["profile"])
    rep = pfh.infinite_twist_experiment(
        f, imax=int(cfg.params.get("imax", 20)), dmax=int(cfg.params.get("dmax", 32))
    )
    rows = []
    for r in rep["rows"]:
        for d, ratio in sorted(r["ratios"].items()):
            rows.append((r["i"], r["calabi"], r["hofer_bound"], d, ratio))
    bundle.add_table("infinite_twist", ["i", "calabi", "hofer_bound", "d", "ratio"], rows)
    bundle.plots["infinite_twist"] = emit_svg(
        bundle.tables["infinite_twist"], "d", ["ratio"], title="c_d/d by truncation", logx=True
    )
    bundle.add_verdict("calabi_increasing", rep["calabi_strictly_increasing"])
    bundle.add_verdict("monotone_chain", rep["monotone_chain_ok"])
    bundle.add_verdict("step1_domination", rep["step1_ok"])
    bundle.add_verdict("step2_bound", rep["step2_ok"])
    bundle.add_verdict("growth_witnessed", rep["sup_ratio_growth_witnessed"], detail=rep["conclusion"])


def _partitions(cfg: RunConfig, bundle: ReportBundle):
    theta = parse_rotation(str(cfg.params["theta"]))
    m = int(cfg.params["m"])
    pp = partition_positive(theta, m)
    pn = partition_negative(theta, m)
    bundle.add_table("partitions", ["side", "parts"], [("positive", " ".join(map(str, pp.parts))),
                                                       ("negative", " ".join(map(str, pn.parts)))])
    bundle.manifest["cz_index"] = cz_index(theta, m)
    if m >= 2 and not theta.is_integral():
        rep = partition_properties(theta, m)
        bundle.add_verdict("partition_properties", rep["all_pass"],
                           detail=f"disjoint={rep['disjoint']} one={rep['one_in_exactly_one']} bound={rep['count_bound']}")
    else:
        bundle.add_verdict("partition_properties", True, detail="m < 2 or integral rotation: vacuous")


def _score(cfg: RunConfig, bundle: ReportBundle):
    with open(cfg.params["input"]) as fh:
        doc = json.load(fh)
    if "genus" in doc:
        curve = curve_from_json(doc)
        bundle.add_table(
            "score",
            ["object", "score", "total_score", "k_invariant", "is_generator"],
            [("curve", orbit_set_score(curve.alpha) - orbit_set_score(curve.beta),
              total_score(curve), k_invariant(curve),
              is_ech_generator(curve.alpha) and is_ech_generator(curve.beta))],
        )
    else:
        alpha = orbit_set_from_json(doc)
        bundle.add_table(
            "score",
            ["object", "score", "action", "is_generator"],
            [("orbit-set", orbit_set_score(alpha), float(orbit_set_action(alpha)), is_ech_generator(alpha))],
        )
    bundle.add_verdict("score_computed", True)


def _tower(cfg: RunConfig, bundle: ReportBundle):
    with open(cfg.params["input"]) as fh:
        t = tower_from_json(json.load(fh))
    threshold = cfg.params.get("threshold", 0.1)
    rep = tower_audit(t, threshold)
    bundle.add_table(
        "tower_audit",
        ["n", "score_telescoping", "action_telescoping", "total_index", "high_action", "t_positive"],
        [(rep["n"], rep["score_telescoping_ok"], rep["action_telescoping_ok"],
          rep["total_ech_index"], rep["high_action_count"], rep["count_t_positive"])],
    )
    bundle.add_verdict("score_telescoping", rep["score_telescoping_ok"])
    bundle.add_verdict("action_telescoping", rep["action_telescoping_ok"])
    bundle.add_verdict("high_action_budget", rep["high_action_within_budget"])
    bundle.add_verdict("no_negative_low_action_noncylinder",
                       not rep["negative_low_action_noncylinders"])


def _selftest(cfg: RunConfig, bundle: ReportBundle):
    rng = random.Random(cfg.seed)

    # partition lemmas on a small grid plus seeded irrationals
    all_ok = True
    for den in range(2, 7):
        for num in range(1, 2 * den):
            if num % den == 0:
                continue
            for m in (2, 3, 5, 8):
                if not partition_properties(Rotation.rational(num, den), m)["all_pass"]:
                    all_ok = False
    for _ in range(50):
        theta = Rotation.real(rng.uniform(0.01, 2.99))
        if not partition_properties(theta, rng.randint(2, 20))["all_pass"]:
            all_ok = False
    bundle.add_verdict("partition_lemmas", all_ok)

    # CZ parity and proportionality
    cz_ok = True
    for den in range(1, 9):
        for num in range(0, 2 * den + 1):
            theta = Rotation.rational(num, den)
            for m in range(1, 12):
                idx = cz_index(theta, m)
                frac_is_int = (num * m) % den == 0
                if (idx % 2 == 1) == frac_is_int:
                    cz_ok = False
                if abs(idx / (2 * m) - num / den) > 1.0 / m + 1e-12:
                    cz_ok = False
    bundle.add_verdict("cz_parity_and_growth", cz_ok)

    # ellipsoid: small weyl run, product identity, return map
    e = el.Ellipsoid(1.0, math.sqrt(2))
    table = el.weyl_table(e, 4000)
    bundle.add_table("weyl", ["k", "c_k", "ratio", "deviation"],
                     [(r["k"], r["c_k"], r["ratio"], r["deviation"]) for r in table["rows"]])
    bundle.plots["weyl_convergence"] = emit_svg(bundle.tables["weyl"], "k", ["deviation"],
                                                title="weyl deviation", logx=True, logy=True)
    bundle.add_verdict("weyl_small", table["rows"][-1]["deviation"] <= 0.05 * table["volume"])
    ok = True
    for a, b in [(1.0, math.sqrt(2)), (1.0, (1 + math.sqrt(5)) / 2), (3.0, math.pi)]:
        rep = el.product_of_periods_check(el.Ellipsoid(a, b))
        ok = ok and rep["ok"]
    bundle.add_verdict("product_of_periods", ok)
    _ellipsoid_return_map(RunConfig("ellipsoid.return-map", {"a": 1.0, "b": math.sqrt(2), "points": 25}, cfg.seed), bundle)

    # topology: the forced-cylinder conclusion
    bundle.add_verdict("forced_cylinder", forced_topology(2, True, 3, 6) == {(0, 2)})

    # tower audit on a seeded random tower
    t = random_tower(rng, 200)
    rep = tower_audit(t, Fraction(1, 2))
    bundle.add_verdict("tower_telescoping", rep["score_telescoping_ok"] and rep["action_telescoping_ok"])

    # score falsification scan (reduced bounds)
    scan = score_falsification_scan(max_mult=9)
    bundle.add_table("score_scan", ["scanned", "violations", "min_total_score"],
                     [(scan["scanned"], scan["violations"], scan["min_total_score"])])
    bundle.add_verdict("score_nonnegative", scan["violations"] == 0)

    # twist: exact Calabi, axioms on a sample pair, small complex validation
    const = twist.constant_profile(1.5)
    bundle.add_verdict("calabi_closed_form", abs(twist.calabi(const) - 0.5) < 1e-12)
    f = twist.linear_profile(1.5 * 2 * math.pi, support_end=0.97)
    cx = pfh.build_complex(f, 4)
    cx.validate()
    bundle.add_verdict("twist_complex_valid", True)
    rep = pfh.axioms_report(f, twist.truncate_profile(f, 3), ds=[8, 16, 32], weyl_tolerance=0.2)
    bundle.add_verdict("twist_axioms", rep["identity_ok"] and rep["hofer_lipschitz_ok"]
                       and (rep["monotonicity_ok"] is not False))

    rows = [(d, rep["c_d_f"][d], rep["c_d_f"][d] / d) for d in rep["ds"]]
    bundle.add_table("twist_cd", ["d", "c_d", "ratio"], rows)


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--cap", type=int, default=None)
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--format", dest="formats", action="append",
                        choices=["csv", "json", "svg"], default=None)
    common.add_argument("--config", type=str, default=None, help="JSON file of parameter overrides")

    parser = argparse.ArgumentParser(prog="echlab", description=__doc__)
    sub = parser.add_subparsers(dest="group")

    ell = sub.add_parser("ellipsoid").add_subparsers(dest="cmd")
    for name in ("census", "spectrum", "weyl", "return-map", "identity-check"):
        p = ell.add_parser(name, parents=[common])
        p.add_argument("--a", type=parse_number, required=True)
        p.add_argument("--b", type=parse_number, required=True)
        if name == "census":
            p.add_argument("--L", type=float, default=10.0)
        if name == "spectrum":
            p.add_argument("--L", type=float, default=None)
            p.add_argument("--count", type=int, default=None)
            p.add_argument("--formal", action="store_true")
        if name == "weyl":
            p.add_argument("--kmax", type=int, default=10**5)
            p.add_argument("--formal", action="store_true")
        if name == "return-map":
            p.add_argument("--points", type=int, default=100)

    tw = sub.add_parser("twist").add_subparsers(dest="cmd")
    for name in ("calabi", "census", "complex", "cd", "axioms", "infinite"):
        p = tw.add_parser(name, parents=[common])
        p.add_argument("--profile", type=str, required=True)
        if name in ("census", "complex", "cd"):
            p.add_argument("--d", type=int, default=4 if name != "cd" else 16)
        if name == "axioms":
            p.add_argument("--profile2", type=str, default=None)
            p.add_argument("--dmax", type=int, default=128)
        if name == "infinite":
            p.add_argument("--imax", type=int, default=20)
            p.add_argument("--dmax", type=int, default=32)

    p = sub.add_parser("partitions", parents=[common])
    p.add_argument("--theta", type=str, required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("score", parents=[common])
    p.add_argument("--input", type=str, required=True)

    p = sub.add_parser("tower", parents=[common])
    p.add_argument("--input", type=str, required=True)
    p.add_argument("--threshold", type=parse_number, default=0.1)

    sub.add_parser("selftest", parents=[common])
    return parser


def config_from_args(args) -> RunConfig:
    group = args.group
    if group is None:
        raise UsageError("no subcommand given")
    command = group if group in ("partitions", "score", "tower", "selftest") else f"{group}.{getattr(args, 'cmd', None)}"
    if command.endswith("None"):
        raise UsageError(f"missing subcommand for {group!r}")
    skip = {"group", "cmd", "seed", "tol", "cap", "out", "formats", "config"}
    params = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    if args.config:
        with open(args.config) as fh:
            params.update(json.load(fh))
    if args.tol is not None:
        params["tol"] = args.tol
    if args.cap is not None:
        params["cap"] = args.cap
    return RunConfig(
        command=command,
        params=params,
        seed=args.seed,
        out=args.out,
        formats=tuple(args.formats) if args.formats else ("csv", "json"),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = config_from_args(args)
        bundle = run(config)
    except (UsageError, FileNotFoundError, json.JSONDecodeError, KeyError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    except SystemExit as ex:
        return 2 if ex.code not in (0, None) else 0
    if config.out:
        for path in bundle.write(config.out, config.formats):
            print(path)
    else:
        sys.stdout.write(bundle.to_json())
    for name, verdict in sorted(bundle.verdicts.items()):
        status = "PASS" if verdict["pass"] else "FAIL"
        print(f"[{status}] {name}: {verdict['detail'] or ''}", file=sys.stderr)
    return 0 if bundle.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
