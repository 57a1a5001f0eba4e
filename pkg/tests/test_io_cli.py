import io as _stdio
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calibra import io
from calibra.cli import run
from calibra.forms import OrientedPlane, make_form
from calibra.graphpde import GridField
from calibra.holonomy import g2_phi, spin7_phi


def _run(argv, monkeypatch=None):
    out, err = _stdio.StringIO(), _stdio.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


# serialisation ------------------------------------------------------------------

def test_form_round_trip():
    for a in (g2_phi(), spin7_phi(), make_form(5, 2, [([1, 2], 0.1), ([3, 5], -1 / 3)])):
        d = json.loads(io.dumps(a))
        assert set(d) == {"n", "k", "terms"}
        assert io.form_from_dict(d) == a


def test_form_schema():
    d = io.form_to_dict(make_form(4, 2, [([1, 3], 2.5)]))
    assert d == {"n": 4, "k": 2, "terms": [{"idx": [1, 3], "c": 2.5}]}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 8))
def test_plane_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n + 1))
    P = OrientedPlane(np.linalg.qr(rng.standard_normal((n, k)))[0].T)
    Q = io.plane_from_dict(json.loads(io.dumps(P)))
    assert np.array_equal(P.basis, Q.basis)


def test_plane_record_checked():
    with pytest.raises(ValueError):
        io.plane_from_dict({"n": 3, "k": 1, "basis": [[1, 0]]})


def test_grid_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    f = GridField(rng.standard_normal((4, 5)) * 1e3, 1 / 7)
    p = tmp_path / "f.grid"
    io.write_grid(str(p), f)
    g = io.read_grid(str(p))
    assert g.h == f.h and np.array_equal(g.values, f.values)
    assert p.read_text().splitlines()[0] == "GRID 2 4 5 %.17g" % (1 / 7)


def test_grid_errors():
    with pytest.raises(ValueError):
        io.grid_loads("GRIF 2 3 3 0.5\n")
    with pytest.raises(ValueError):
        io.grid_loads("GRID 2 3 3 0.5\n1\n2\n")


# command line ----------------------------------------------------------------------

def test_identities():
    code, out, _ = _run(["identities"])
    assert code == 0
    assert out.count("PASS") >= 6 and "FAIL" not in out


def test_usage_errors():
    assert _run(["bogus"])[0] == 2
    assert _run([])[0] == 2
    assert _run(["comass", "--form", "g2_phi", "--nonsense"])[0] == 2
    code, _, err = _run(["lawlor", "--psi", "a,b"])
    assert code == 2 and "usage" in err


def test_angle_theorem_two_lines(tmp_path):
    p = _write(tmp_path, "p.json", {"n": 2, "k": 1, "basis": [[1, 0]]})
    q = _write(tmp_path, "q.json", {"n": 2, "k": 1, "basis": [[0.6, 0.8]]})
    code, out, _ = _run(["angle-theorem", "--p", p, "--q", q])
    assert code == 0
    rec = json.loads(out)
    assert rec["minimizing"] is False and "psi_sum" in rec


def test_domain_error_exit(tmp_path):
    p = _write(tmp_path, "p.json", {"n": 4, "k": 2, "basis": [[1, 0, 0, 0], [0, 1, 0, 0]]})
    q = _write(tmp_path, "q.json", {"n": 4, "k": 2, "basis": [[1, 0, 0, 0], [0, 0, 1, 0]]})
    code, _, err = _run(["angle-theorem", "--p", p, "--q", q])
    assert code == 1 and err.startswith("NotTransverse")


def test_angle_theorem_slag_pair():
    code, out, _ = _run(["angle-theorem", "--theta", "60,60,60", "--degrees", "--witness"])
    rec = json.loads(out)
    assert code == 0 and rec["minimizing"] is True


def test_classify_and_comass_deterministic(monkeypatch):
    argv = ["comass", "--form", "g2_phi", "--starts", "8"]
    a, b = _run(argv), _run(argv)
    assert a[0] == 0 and a[1] == b[1]
    assert abs(json.loads(a[1])["value"] - 1) < 1e-6
    monkeypatch.setenv("CALIBRA_SEED", "7")
    c = _run(argv)
    assert json.loads(c[1])["seed"] == 7
    code, out, _ = _run(["classify", "--theta", "60,60,60", "--degrees"])
    rec = json.loads(out)
    assert code == 0 and rec["label"] == "special_lagrangian"
    assert rec["phase"] == pytest.approx(np.pi)
    code, out, _ = _run(["classify", "--theta", "0.5,0.5"])
    assert code == 0 and json.loads(out)["label"] == "lagrangian"


def test_argmax_round_trips_through_plane_schema():
    code, out, _ = _run(["comass", "--form", "kahler:3:2", "--starts", "4"])
    rec = json.loads(out)
    P = io.plane_from_dict(rec["argmax"])
    assert P.dim == 4 and P.ambient_dim == 6


def test_lawlor_csv():
    code, out, _ = _run(["lawlor", "--psi", "1.0471975511965976,1.0471975511965976,"
                         "1.0471975511965976", "--samples", "9", "--format", "csv"])
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 10
    assert lines[0].startswith("t,dir1")
    D = np.array([[float(x) for x in ln.split(",")[-3:]] for ln in lines[1:]])
    assert D.max() < 1e-6


def test_surface():
    code, out, _ = _run(["surface", "--preset", "catenoid", "--at", "0.2,1.0"])
    assert code == 0 and json.loads(out)["norm"] < 1e-7
    code, out, _ = _run(["surface", "--preset", "graph:u*v", "--op", "area", "--grid", "16"])
    assert code == 0 and json.loads(out)["area"] > 1
    code, _, err = _run(["surface", "--preset", "graph:u*", "--op", "area"])
    assert code == 1 and err.startswith("ParseError")


def test_pde_writes_grid(tmp_path):
    path = tmp_path / "sol.grid"
    code, out, _ = _run(["pde", "--eq", "slag2", "--grid", "17", "--boundary", "harmonic-cubic",
                         "--method", "newton", "--out", str(path)])
    assert code == 0
    rec = json.loads(out)
    assert rec["residual_norm"] < 1e-10
    g = io.read_grid(str(path))
    assert g.shape == (17, 17)


def test_pde_picard_failure_exit():
    code, _, err = _run(["pde", "--eq", "minimal", "--grid", "17", "--boundary", "wave",
                         "--amplitude", "4", "--method", "picard"])
    assert code == 1 and err.startswith("NoConvergence")


def test_csv_output(tmp_path):
    path = tmp_path / "ids.csv"
    assert _run(["identities", "--format", "csv", "--out", str(path)])[0] == 0
    assert path.read_text().splitlines()[0] == "identity,deviation,pass"
