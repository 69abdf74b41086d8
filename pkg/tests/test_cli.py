import csv
import io
import json
import math

import pytest

from borel_stokes import CauchyDatum, datum_to_json
from borel_stokes.cli import UsageError, load_problem, main


def problem(tmp_path, datum, p=1, q=2, quad=None, name="problem.json"):
    obj = {"p": p, "q": q, "datum": datum_to_json(datum)}
    if quad:
        obj["quad"] = quad
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def heat_pole(tmp_path):
    return problem(tmp_path, CauchyDatum.simple_pole(1.0))


@pytest.fixture
def heat_z2(tmp_path):
    return problem(tmp_path, CauchyDatum.from_parts(entire=[(1.0, 0.0, 2)]), name="z2.json")


# -- kernel ------------------------------------------------------------------

def test_kernel_at_zero(capsys):
    code, out, _ = run(capsys, "kernel", "--alpha", "2", "--grid", "0")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["tau_re", "tau_im", "C_re", "C_im"]
    assert float(rows[0]["C_re"]) == pytest.approx(0.5641896, abs=1e-7)
    assert float(rows[0]["C_im"]) == 0.0


def test_kernel_grid_matches_gaussian(capsys):
    code, out, _ = run(capsys, "kernel", "--alpha", "2", "--grid", "0:4:9")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9
    for r in rows:
        x = float(r["tau_re"])
        assert float(r["C_re"]) == pytest.approx(math.exp(-x * x / 4) / math.sqrt(math.pi),
                                                 abs=1e-12)


def test_kernel_fractional_alpha_json(capsys):
    code, out, _ = run(capsys, "kernel", "--alpha", "3/2", "--grid", "0,1", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["alpha"] == "3/2" and len(obj["rows"]) == 2


@pytest.mark.parametrize("alpha", ["1", "0.5", "x"])
def test_kernel_bad_alpha(capsys, alpha):
    code, _, err = run(capsys, "kernel", "--alpha", alpha)
    assert code == 1
    assert "usage" in err


# -- sum ---------------------------------------------------------------------

def test_sum_polynomial(capsys, heat_z2):
    code, out, _ = run(capsys, "sum", "--problem", heat_z2, "--theta", 0.0, "--t-mod", 0.5,
                       "--z-re", 1.0)
    assert code == 0
    obj = json.loads(out)
    assert obj["value"] == pytest.approx([2.0, 0.0], abs=1e-10)
    assert obj["period"] == pytest.approx(4 * math.pi)


def test_sum_singular_direction_exit_3(capsys, heat_pole):
    code, _, err = run(capsys, "sum", "--problem", heat_pole, "--theta", 0.0, "--t-mod", 0.1)
    assert code == 3
    assert "SingularDirection" in err


def test_sum_fast_path_equals_general(capsys, heat_pole):
    args = ["sum", "--problem", heat_pole, "--theta", 0.5, "--t-mod", 0.1, "--t-arg", 0.3]
    _, fast, _ = run(capsys, *args)
    _, gen, _ = run(capsys, *args, "--force-general")
    a, b = json.loads(fast)["value"], json.loads(gen)["value"]
    assert abs(complex(*a) - complex(*b)) < 1e-8


def test_sum_grid_csv(capsys, heat_pole, tmp_path):
    out_file = tmp_path / "grid.csv"
    code, out, _ = run(capsys, "sum", "--problem", heat_pole, "--theta", 0.5, "--t-arg", 0.3,
                       "--grid", "0.05:0.2:4", "--format", "csv", "--out", out_file)
    assert code == 0 and out == ""
    rows = list(csv.DictReader(io.StringIO(out_file.read_text())))
    assert [float(r["t_mod"]) for r in rows] == pytest.approx([0.05, 0.1, 0.15, 0.2])
    assert all(r["error"] == "" for r in rows)


def test_sum_requires_theta(capsys, heat_pole):
    code, _, _ = run(capsys, "sum", "--problem", heat_pole, "--t-mod", 0.1)
    assert code == 1


# -- formal, stokes ------------------------------------------------------------

def test_formal(capsys, heat_pole):
    code, out, _ = run(capsys, "formal", "--problem", heat_pole, "--t-mod", 0.01)
    assert code == 0
    obj = json.loads(out)
    assert obj["s"] == 1.0
    assert obj["gevrey_estimate"] == pytest.approx(1.0, abs=0.15)
    assert obj["N_star"] > 5


def test_stokes_heat_pole_at_i(capsys, tmp_path):
    path = problem(tmp_path, CauchyDatum.simple_pole(1j))
    code, out, _ = run(capsys, "stokes", "--problem", path)
    assert code == 0
    obj = json.loads(out)
    assert obj["stokes"] == pytest.approx([math.pi, 3 * math.pi])
    assert obj["period"] == pytest.approx(4 * math.pi)


def test_stokes_q3(capsys, tmp_path):
    path = problem(tmp_path, CauchyDatum.simple_pole(1.0), q=3)
    obj = json.loads(run(capsys, "stokes", "--problem", path)[1])
    assert obj["stokes"] == pytest.approx([0.0, 2 * math.pi, 4 * math.pi], abs=1e-12)
    assert obj["period"] == pytest.approx(6 * math.pi)


def test_stokes_entire_is_empty(capsys, heat_z2):
    obj = json.loads(run(capsys, "stokes", "--problem", heat_z2)[1])
    assert obj["stokes"] == [] and obj["anti_stokes"] == []


# -- jump --------------------------------------------------------------------

def test_jump_all_routes(capsys, heat_pole):
    code, out, _ = run(capsys, "jump", "--problem", heat_pole, "--t-mod", 0.1)
    assert code == 0
    routes = json.loads(out)["routes"]
    assert set(routes) == {"closed", "residue", "quad"}
    for r in routes.values():
        assert abs(complex(*r["value"]) - (-0.4600857j)) < 1e-5


def test_jump_outside_disc_exit_4(capsys, heat_pole):
    # the closed form holds for |z| below half the smallest pole modulus
    code, _, err = run(capsys, "jump", "--problem", heat_pole, "--z-re", 0.7, "--route", "closed")
    assert code == 4
    assert "OutsideDisc" in err


def test_jump_entire_exit_5(capsys, heat_z2):
    code, _, err = run(capsys, "jump", "--problem", heat_z2)
    assert code == 5
    assert "NoStokesLines" in err


def test_jump_bad_line_index(capsys, heat_pole):
    assert run(capsys, "jump", "--problem", heat_pole, "--line", 7)[0] == 1


# -- family, verify ------------------------------------------------------------

def test_family_heat(capsys, heat_pole):
    obj = json.loads(run(capsys, "family", "--problem", heat_pole)[1])
    assert len(obj["members"]) == 2
    assert obj["members"][0]["sector"]["lower"] == pytest.approx(-math.pi / 2 + 0.05)


def test_family_q3(capsys, tmp_path):
    path = problem(tmp_path, CauchyDatum.simple_pole(1.0), q=3)
    obj = json.loads(run(capsys, "family", "--problem", path)[1])
    assert len(obj["members"]) == 3


def test_family_verify(capsys, heat_pole):
    code, out, _ = run(capsys, "family", "--problem", heat_pole, "--verify")
    assert code == 0
    assert json.loads(out)["verification"]["all_pass"]


def test_verify_subcommand(capsys, heat_pole):
    obj = json.loads(run(capsys, "verify", "--problem", heat_pole)[1])
    assert obj["all_pass"] and obj["n_members"] == 2


def test_family_eps_too_large_exit_4(capsys, heat_pole):
    assert run(capsys, "family", "--problem", heat_pole, "--eps", 10)[0] == 4


# -- problem files and usage --------------------------------------------------

def test_unknown_problem_key(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"p": 1, "q": 2, "datum": {"poles": []}, "colour": 1}))
    assert run(capsys, "stokes", "--problem", path)[0] == 1


def test_unknown_quad_key():
    with pytest.raises(UsageError):
        load_problem({"p": 1, "q": 2, "datum": {"poles": []}, "quad": {"speed": 3}})


def test_quad_override_and_tol():
    prob = load_problem({"p": 1, "q": 3, "datum": {"poles": []}, "quad": {"tol": 1e-9}})
    assert prob.quad.tol == 1e-9
    assert load_problem({"p": 1, "q": 3, "datum": {"poles": []}}, tol=1e-6).quad.tol == 1e-6


@pytest.mark.parametrize("obj", [{"p": 2, "q": 2, "datum": {}}, {"q": 2, "datum": {}}, []])
def test_invalid_problem(obj):
    with pytest.raises(UsageError):
        load_problem(obj)


def test_missing_file_and_bad_json(capsys, tmp_path):
    assert run(capsys, "stokes", "--problem", tmp_path / "none.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "stokes", "--problem", bad)[0] == 1


def test_no_subcommand(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1


def test_json_only_without_grid(capsys, heat_pole):
    assert run(capsys, "stokes", "--problem", heat_pole, "--format", "csv")[0] == 1


def test_deterministic(capsys, heat_pole):
    args = ["sum", "--problem", heat_pole, "--theta", 1.0, "--t-mod", 0.2, "--t-arg", 1.2]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]
