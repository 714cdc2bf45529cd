"""End-to-end checks of the command line front end.

Runs subcommands through click's CliRunner. Determinism is asserted the same
way a shell script would: hash the artifact bytes from two runs.
"""
from __future__ import annotations

import hashlib
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from plateau_lab import cones
from plateau_lab.cli import main
from plateau_lab.geometry import meshio

from conftest import flat_slice_mesh


@pytest.fixture
def runner():
    # click >= 8.2 separates stdout and stderr by default
    return CliRunner()


@pytest.fixture
def square_instance(tmp_path):
    doc = {"terminals": [{"pos": [0.0, 0.0]}, {"pos": [1.0, 0.0]},
                         {"pos": [1.0, 1.0]}, {"pos": [0.0, 1.0]}],
           "objective": "size"}
    p = tmp_path / "square.json"
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def y_mesh(tmp_path):
    p = tmp_path / "y.off"
    meshio.write_mesh(str(p), cones.y_cone(extent=1.5))
    return str(p)


def summary_of(result):
    assert result.exit_code == 0, result.stderr
    doc = json.loads(result.stdout)
    assert doc["schema"] == 1
    return doc


def sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_steiner_square(runner, square_instance, tmp_path):
    out = tmp_path / "sol.json"
    csv = tmp_path / "net.csv"
    r = runner.invoke(main, ["steiner", "--instance", square_instance,
                             "--out", str(out), "--csv", str(csv)])
    doc = summary_of(r)
    assert doc["score"] == pytest.approx(1 + math.sqrt(3), abs=1e-6)
    assert doc["angle_audit"]["ok"]
    sol = json.loads(out.read_text())
    assert len(sol["nodes"]) == 6          # 4 terminals + 2 junctions
    assert csv.exists()


def test_steiner_is_deterministic(runner, square_instance, tmp_path):
    hashes = []
    for run in ("a", "b"):
        out = tmp_path / f"sol_{run}.json"
        r = runner.invoke(main, ["steiner", "--instance", square_instance,
                                 "--seed", "7", "--out", str(out)])
        assert r.exit_code == 0
        hashes.append((sha(out), r.stdout.replace(f"sol_{run}", "sol_X")))
    assert hashes[0] == hashes[1]


def test_missing_input_is_a_config_error(runner, tmp_path):
    out = tmp_path / "never.json"
    r = runner.invoke(main, ["steiner", "--instance", str(tmp_path / "nope.json"),
                             "--out", str(out)])
    assert r.exit_code == 2
    assert not out.exists()        # nothing staged, nothing written


def test_unknown_config_fields_are_all_reported(runner, square_instance, tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"functionl": "size", "betta": 2.0}))
    r = runner.invoke(main, ["steiner", "--config", str(conf),
                             "--instance", square_instance])
    assert r.exit_code == 2
    assert "functionl" in r.stderr and "betta" in r.stderr


def test_flag_beats_config(runner, tmp_path):
    # a charged instance works under every functional
    inst = tmp_path / "v.json"
    inst.write_text(json.dumps({
        "terminals": [{"pos": [-0.5, 1.0], "charge": 1},
                      {"pos": [0.5, 1.0], "charge": 1},
                      {"pos": [0.0, 0.0], "charge": -2}],
        "objective": "size"}))
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"functional": "mass"}))
    r = runner.invoke(main, ["steiner", "--config", str(conf),
                             "--instance", str(inst), "--functional", "size"])
    assert summary_of(r)["functional"] == "size"
    # and without the flag the config wins over the instance objective
    r2 = runner.invoke(main, ["steiner", "--config", str(conf),
                              "--instance", str(inst)])
    assert summary_of(r2)["functional"] == "mass"


def test_thread_cap_is_recorded(runner, square_instance):
    r = runner.invoke(main, ["steiner", "--instance", square_instance],
                      env={"PLATEAU_THREADS": "7"})
    assert summary_of(r)["threads"] == 7


def test_density_profile_of_y_cone(runner, y_mesh, tmp_path):
    out = tmp_path / "prof.csv"
    r = runner.invoke(main, ["density", "--mesh", y_mesh, "--center", "0,0,0",
                             "--radii", "0.25,0.5,1.0", "--out", str(out)])
    summary_of(r)
    rows = out.read_text().strip().splitlines()
    assert rows[0].startswith("r,theta")
    for row in rows[1:]:
        theta = float(row.split(",")[1])
        assert theta == pytest.approx(3 * math.pi / 2, abs=1e-9)


def test_bad_radii_fail_before_any_write(runner, y_mesh, tmp_path):
    out = tmp_path / "prof.csv"
    r = runner.invoke(main, ["density", "--mesh", y_mesh, "--center", "0,0,0",
                             "--radii", "1,abc", "--out", str(out)])
    assert r.exit_code == 2
    assert not out.exists()


def test_cone_check_on_generator(runner, y_mesh):
    r = runner.invoke(main, ["cone-check", "--mesh", y_mesh,
                             "--center", "0,0,0", "--radius", "1.0"])
    doc = summary_of(r)
    assert doc["residual"] <= 1e-9
    assert doc["ok"]


def test_classify_plane_quickly(runner, tmp_path):
    p = tmp_path / "plane.off"
    meshio.write_mesh(str(p), cones.plane_cone(extent=1.5))
    r = runner.invoke(main, ["classify", "--mesh", str(p), "--center", "0,0,0",
                             "--radius", "1.0", "--rotations", "64",
                             "--depth", "0.01"])
    doc = summary_of(r)
    assert doc["best"] == "plane"
    assert doc["residual"] <= 0.05


def test_blowup_writes_a_mesh(runner, y_mesh, tmp_path):
    out = tmp_path / "zoom.off"
    r = runner.invoke(main, ["blowup", "--mesh", y_mesh, "--center", "0,0,0",
                             "--radius", "0.5", "--out", str(out)])
    summary_of(r)
    zoomed = meshio.read_mesh(str(out))
    assert zoomed.ambient_dim == 3


def test_hausdorff_of_mesh_with_itself(runner, y_mesh):
    r = runner.invoke(main, ["hausdorff", "--mesh-a", y_mesh, "--mesh-b", y_mesh,
                             "--center", "0,0,0", "--radius", "1.0"])
    assert summary_of(r)["distance"] == pytest.approx(0.0, abs=1e-12)


def test_douglas_circle(runner):
    r = runner.invoke(main, ["douglas", "--samples", "256"])
    assert summary_of(r)["energy"] == pytest.approx(16 * math.pi**2, rel=1e-3)


def test_minimize_flat_slice(runner, tmp_path):
    p = tmp_path / "flat.off"
    meshio.write_mesh(str(p), flat_slice_mesh(level=0.5, n=8))
    report = tmp_path / "report.json"
    r = runner.invoke(main, ["minimize", "--init", str(p), "--levels", "4",
                             "--audit-trials", "200", "--report", str(report)])
    doc = summary_of(r)
    assert doc["final_measure"] == pytest.approx(1.0)
    assert doc["audit_worst_ratio"] <= 1.0
    rep = json.loads(report.read_text())
    assert rep["levels"][0]["source"] == "threshold"
    assert rep["levels"][0]["rounds"] == 0


def test_ff_project_determinism(runner, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"corner": [0, 0, 0], "size": 1.0, "N": 2}))
    mesh = tmp_path / "blob.off"
    rng = np.random.default_rng(3)
    from plateau_lab.geometry.core import EmbeddedMesh
    verts = rng.uniform(0.1, 0.9, size=(9, 3))
    meshio.write_mesh(str(mesh), EmbeddedMesh(2, verts, np.arange(9).reshape(3, 3)))
    hashes = []
    for run in ("a", "b"):
        out = tmp_path / f"proj_{run}.off"
        rep = tmp_path / f"rep_{run}.json"
        r = runner.invoke(main, ["ff-project", "--grid", str(grid),
                                 "--mesh", str(mesh), "--seed", "11",
                                 "--out", str(out), "--report", str(rep)])
        assert r.exit_code == 0, r.stderr
        hashes.append((sha(out), sha(rep)))
    assert hashes[0] == hashes[1]


def test_ff_project_report_is_local(runner, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"corner": [0, 0, 0], "size": 1.0, "N": 2}))
    mesh = tmp_path / "blob.off"
    rng = np.random.default_rng(5)
    from plateau_lab.geometry.core import EmbeddedMesh
    verts = rng.uniform(0.1, 0.9, size=(9, 3))
    meshio.write_mesh(str(mesh), EmbeddedMesh(2, verts, np.arange(9).reshape(3, 3)))
    rep = tmp_path / "rep.json"
    r = runner.invoke(main, ["ff-project", "--grid", str(grid), "--mesh", str(mesh),
                             "--report", str(rep)])
    summary_of(r)
    doc = json.loads(rep.read_text())
    assert doc["locality_ok"]
    assert doc["measure_in"] > 0
    assert doc["stages"], "per-stage ledger must be present"
    assert doc["per_cell"], "per-cube ledger must be present"
