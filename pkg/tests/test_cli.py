"""CLI dispatch, exit codes, output formats, and determinism."""

import json
import math
import os

import pytest

from echlab.cli import RunConfig, UsageError, main, parse_number, run
from echlab.reporting import Table
from echlab.svgplot import emit_svg
from echlab.twist import linear_profile


def test_parse_number():
    assert parse_number("sqrt2") == math.sqrt(2)
    assert parse_number("3/4") == 0.75
    assert parse_number("2.5") == 2.5
    assert abs(parse_number("golden") - 1.618033988749895) < 1e-12


def test_unknown_command_raises():
    with pytest.raises(UsageError):
        run(RunConfig("nonsense"))


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["ellipsoid", "identity-check", "--a", "1", "--b", "sqrt2"]) == 0
    capsys.readouterr()
    assert main(["bogus-subcommand"]) == 2
    assert main([]) == 2


def test_ellipsoid_weyl_bundle(tmp_path):
    cfg = RunConfig("ellipsoid.weyl", {"a": 1.0, "b": math.sqrt(2), "kmax": 3000, "tol": 0.05}, out=str(tmp_path))
    bundle = run(cfg)
    assert bundle.verdicts["weyl_final_deviation"]["pass"]
    files = bundle.write(str(tmp_path), ("csv", "json", "svg"))
    names = {os.path.basename(p) for p in files}
    assert {"weyl.csv", "report.json", "weyl_convergence.svg"} <= names
    text = open(tmp_path / "weyl.csv").read()
    assert text.startswith("k,c_k,ratio,deviation\n") and text.endswith("\n")


def test_partitions_command(capsys):
    code = main(["partitions", "--theta", "1/5", "--m", "4"])
    out = capsys.readouterr().out
    doc = json.loads(out)
    rows = dict(doc["tables"]["partitions"]["rows"])
    assert rows == {"positive": "1 1 1 1", "negative": "4"}
    assert doc["manifest"]["cz_index"] == 1
    assert code == 0


def test_twist_commands(tmp_path, capsys):
    profile_path = tmp_path / "profile.json"
    profile_path.write_text(json.dumps(linear_profile(2.2, support_end=0.9).to_json()))
    assert main(["twist", "calabi", "--profile", str(profile_path)]) == 0
    capsys.readouterr()
    assert main(["twist", "cd", "--profile", str(profile_path), "--d", "6"]) == 0
    capsys.readouterr()
    assert main(["twist", "complex", "--profile", str(profile_path), "--d", "3"]) == 0
    capsys.readouterr()


def test_score_and_tower_commands(tmp_path, capsys):
    import random

    from echlab.orbits import orbit_set_to_json, tower_to_json
    from echlab.sampling import orbit_pool, random_orbit_set, random_tower

    rng = random.Random(3)
    pool = orbit_pool(rng)
    sets = orbit_set_to_json(random_orbit_set(rng, pool))
    spath = tmp_path / "set.json"
    spath.write_text(json.dumps(sets))
    assert main(["score", "--input", str(spath)]) == 0
    capsys.readouterr()

    tpath = tmp_path / "tower.json"
    tpath.write_text(json.dumps(tower_to_json(random_tower(rng, 12))))
    assert main(["tower", "--input", str(tpath), "--threshold", "1/2"]) == 0
    capsys.readouterr()


def test_selftest_deterministic(tmp_path):
    b1 = run(RunConfig("selftest", {}, seed=11))
    b2 = run(RunConfig("selftest", {}, seed=11))
    assert b1.to_json() == b2.to_json()
    assert b1.all_pass
    d1, d2 = tmp_path / "one", tmp_path / "two"
    b1.write(str(d1), ("csv", "json", "svg"))
    b2.write(str(d2), ("csv", "json", "svg"))
    for name in sorted(os.listdir(d1)):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_config_file_merges_params(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 2}))
    code = main(["partitions", "--theta", "7/10", "--m", "4", "--config", str(cfg)])
    doc = json.loads(capsys.readouterr().out)
    assert doc["manifest"]["config"]["m"] == 2  # config file overrides the flag
    assert code == 0


def test_svg_emission():
    t = Table(("x", "y"), [(1, 2.0), (2, 1.0), (3, 4.0)])
    svg = emit_svg(t, "x", ["y"], title="demo")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "polyline" in svg
    empty = emit_svg(Table(("x", "y"), []), "x", ["y"])
    assert "no data" in empty
    with pytest.raises(ValueError):
        emit_svg(Table(("x", "y"), [("a", 1.0)]), "x", ["y"])


def test_svg_log_axes():
    t = Table(("k", "dev"), [(10, 0.1), (100, 0.01), (1000, 0.001)])
    svg = emit_svg(t, "k", ["dev"], logx=True, logy=True)
    assert svg.count("polyline") == 1
