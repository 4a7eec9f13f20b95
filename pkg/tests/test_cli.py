import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gasvalve.classification import ch_prime, classify
from gasvalve.riemann_classic import WaveKind, sample, solve_rp
from gasvalve.state_space import GasParams, State

G = GasParams(1.0)


def cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "gasvalve", *args], capture_output=True, text=True, cwd=cwd, timeout=120
    )


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# riemann ---------------------------------------------------------------------


def test_riemann_constant(tmp_path):
    out = tmp_path / "r.csv"
    res = cli("riemann", "--left", "1,0", "--right", "1,0", "--a", "1", "--t", "1", "--out", str(out))
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    assert len(rows) == 201
    assert {(r["rho"], r["q"]) for r in rows} == {("1", "0")}
    fan = json.loads(out.with_suffix(".json").read_text())
    assert fan["waves"] == []


def test_riemann_closed_valve(tmp_path):
    out = tmp_path / "r.csv"
    valve = '{"type":"electronic","M":1.5}'
    res = cli("riemann", "--left", "1,0", "--right", "2,0", "--a", "1", "--valve", valve, "--t", "1", "--out", str(out))
    assert res.returncode == 0, res.stderr
    for r in read_csv(out):
        expected = "1" if float(r["x"]) < 0 else "2"
        assert r["rho"] == expected and r["q"] == "0"
    fan = json.loads(out.with_suffix(".json").read_text())
    assert [w["kind"] for w in fan["waves"]] == [WaveKind.UNDERCOMPRESSIVE.value]
    assert fan["mode"] == "Active" and fan["q_m"] == 0.0 and fan["gap"] == 1.0


def test_riemann_matches_library(tmp_path):
    out = tmp_path / "r.csv"
    fan_path = tmp_path / "fan.json"
    res = cli(
        "riemann", "--left", "1,0", "--right", "2,0", "--a", "1", "--t", "1",
        "--xrange", "-3:3", "--samples", "61", "--out", str(out), "--fan", str(fan_path),
    )
    assert res.returncode == 0, res.stderr
    fan = solve_rp(State(1, 0), State(2, 0), G)
    for r in read_csv(out):
        u = sample(fan, float(r["x"]), G)
        assert float(r["rho"]) == u.rho and float(r["q"]) == u.q
        assert float(r["mu"]) == pytest.approx(math.log(u.rho), rel=1e-15, abs=1e-16)
    doc = json.loads(fan_path.read_text())
    assert [w["kind"] for w in doc["waves"]] == [w.kind.value for w in fan.waves]
    assert doc["mode"] is None and doc["valve"] is None
    assert doc["traces"]["minus"] == doc["traces"]["plus"]


def test_riemann_stdout_and_stderr():
    res = cli("riemann", "--left", "1,0", "--right", "2,0", "--samples", "3")
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "t,x,rho,q,v,p,mu,nu"
    assert len(res.stdout.splitlines()) == 4
    assert json.loads(res.stderr)["waves"]


def test_riemann_errors():
    assert cli("riemann", "--left", "1", "--right", "2,0").returncode == 2
    assert cli("riemann", "--left", "1,0", "--right", "2,0", "--valve", "{bad").returncode == 2
    assert cli("riemann", "--left", "1,0", "--right", "2,0", "--valve", '{"type":"x"}').returncode == 2
    res = cli("riemann", "--left", "-1,0", "--right", "2,0")
    assert res.returncode == 3 and "domain error" in res.stderr
    res = cli("riemann", "--left", "1,3", "--right", "0.1,0", "--valve", '{"type":"pressure_drop","k":1}')
    assert res.returncode == 3 and "no root" in res.stderr


def test_csv_byte_stable(tmp_path):
    args = ["riemann", "--left", "1.3,0.2", "--right", "0.4,-0.7", "--valve", '{"type":"spring","M":0.3}']
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli(*args, "--out", str(a))
    cli(*args, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


# classify --------------------------------------------------------------------


@pytest.mark.parametrize(
    "left,right,M,expected",
    [
        ("1,0", "2,0", "0.5", {"open_active": "Open", "o_sub": "O_O^2", "coherent": True}),
        ("1,0", "2,0", "0.999", {"o_sub": "O_A^2", "coherent": False}),
        ("1,0", "1,0", "1", {"open_active": "Active", "influence": "A_N", "consistent": True}),
    ],
)
def test_classify(left, right, M, expected):
    res = cli("classify", "--left", left, "--right", right, "--a", "1", "--M", M)
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    for k, v in expected.items():
        assert doc[k] == v
    lib = classify(State(*map(float, left.split(","))), State(*map(float, right.split(","))), float(M), G)
    assert doc == lib.to_dict()


def test_classify_rejects_bad_threshold():
    assert cli("classify", "--left", "1,0", "--right", "1,0", "--M", "0").returncode == 2


# sweep -----------------------------------------------------------------------


def test_sweep_full_grid(tmp_path):
    out = tmp_path / "s.csv"
    res = cli("sweep", "--slice", "left=1,1", "--mu", "-2:2:101", "--nu", "-2:2:101", "--M", "1", "--a", "1", "--out", str(out))
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    assert len(rows) == 10201
    mus = [float(r["mu"]) for r in rows]
    assert mus == sorted(mus)
    u_l = State(1, 1)
    checked = 0
    for r in rows:
        u_r = State.from_mu_nu(float(r["mu"]), float(r["nu"]), G)
        if ch_prime(u_l, u_r, 1.0, G):
            assert r["coherent"] == "true"
            checked += 1
    assert checked > 100


def test_sweep_diagonal_row():
    res = cli("sweep", "--slice", "left=1,1", "--mu", "0:0:1", "--nu", "1:1:1", "--M", "3")
    assert res.returncode == 0, res.stderr
    line = res.stdout.splitlines()[1]
    assert line == "0,1,Active/A_I,true,false"


def test_sweep_zero_resolution():
    res = cli("sweep", "--slice", "left=1,1", "--mu", "-2:2:0", "--nu", "-2:2:5", "--M", "1")
    assert res.returncode == 2
    assert cli("sweep", "--slice", "middle=1,1", "--mu", "0:1:2", "--nu", "0:1:2", "--M", "1").returncode == 2


# simulate --------------------------------------------------------------------


def _sim(tmp_path, **cfg):
    out = tmp_path / "out"
    base = {"a": 1.0, "t_end": 1.0, "n_cells": 40, "out": str(out)}
    base.update(cfg)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(base))
    return cli("simulate", "--config", str(path)), out


RIEMANN_CELLS = [{"x_lo": -1, "x_hi": 0, "rho": 1, "q": 0}, {"x_lo": 0, "x_hi": 1, "rho": 2, "q": 0}]


def test_simulate_constant_reflective(tmp_path):
    cells = [{"x_lo": -1, "x_hi": 1, "rho": 1.3, "q": 0.4}]
    res, out = _sim(tmp_path, cells=cells, boundary="reflective", output_every=0.25)
    assert res.returncode == 0, res.stderr
    rep = json.loads(res.stdout)
    assert abs(rep["relative_mass_drift"]) <= 1e-12
    rows = read_csv(out / "snapshots.csv")
    assert sorted({float(r["t"]) for r in rows}) == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])
    assert (out / "valve_events.csv").read_text() == "t,mode,q_m,gap\n"


def test_simulate_closed_valve_static(tmp_path):
    res, out = _sim(tmp_path, cells=RIEMANN_CELLS, valve={"type": "electronic", "M": 1.5})
    assert res.returncode == 0, res.stderr
    events = read_csv(out / "valve_events.csv")
    assert events and all(e["mode"] == "Active" for e in events)
    rows = read_csv(out / "snapshots.csv")
    for r in rows:
        assert r["rho"] == ("1" if float(r["x"]) < 0 else "2") and r["q"] == "0"


def test_simulate_chattering(tmp_path):
    res, out = _sim(tmp_path, cells=RIEMANN_CELLS, valve={"type": "electronic", "M": 0.999})
    assert res.returncode == 0, res.stderr
    events = read_csv(out / "valve_events.csv")
    assert events[0]["mode"] != events[1]["mode"]
    assert json.loads(res.stdout)["valve_flips"] >= 1


def test_simulate_byte_stable(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    a_dir.mkdir()
    b_dir.mkdir()
    _sim(a_dir, cells=RIEMANN_CELLS, valve={"type": "electronic", "M": 0.5}, t_end=0.5)
    _sim(b_dir, cells=RIEMANN_CELLS, valve={"type": "electronic", "M": 0.5}, t_end=0.5)
    for name in ("snapshots.csv", "valve_events.csv"):
        assert (a_dir / "out" / name).read_bytes() == (b_dir / "out" / name).read_bytes()


@pytest.mark.parametrize(
    "patch,needle",
    [
        ({"bogus": 1}, "bogus"),
        ({"n_cells": 0}, "n_cells"),
        ({"boundary": "periodic"}, "boundary"),
        ({"valve": {"type": "electronic"}}, "valve"),
        ({"cells": [{"x_lo": -1, "x_hi": 1, "rho": 1}]}, "cells[0]"),
        ({"cfl": 2.0}, "cfl"),
        ({"t_end": "soon"}, "t_end"),
    ],
)
def test_simulate_config_errors(tmp_path, patch, needle):
    cfg = {"cells": RIEMANN_CELLS}
    cfg.update(patch)
    res, _ = _sim(tmp_path, **cfg)
    assert res.returncode == 2
    assert needle in res.stderr


def test_simulate_missing_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"t_end": 1.0, "cells": RIEMANN_CELLS, "out": str(tmp_path)}))
    res = cli("simulate", "--config", str(path))
    assert res.returncode == 2 and "n_cells" in res.stderr


def test_simulate_valve_without_origin(tmp_path):
    cells = [{"x_lo": 1, "x_hi": 2, "rho": 1, "q": 0}]
    res, _ = _sim(tmp_path, cells=cells, valve={"type": "electronic", "M": 1})
    assert res.returncode == 2 and "valve" in res.stderr


def test_sweep_rows_match_library():
    res = cli("sweep", "--slice", "right=2,0", "--mu", "-1:1:3", "--nu", "-0.5:0.5:3", "--M", "0.5")
    rows = list(csv.DictReader(res.stdout.splitlines()))
    for r in rows:
        u_l = State.from_mu_nu(float(r["mu"]), float(r["nu"]), G)
        rep = classify(u_l, State(2, 0), 0.5, G)
        label = f"Active/{rep.influence}" if rep.open_active == "Active" else f"Open/{rep.o_sub}"
        assert r["regime"] == label
        assert r["coherent"] == str(rep.coherent).lower()
    assert np.isfinite([float(r["mu"]) for r in rows]).all()
