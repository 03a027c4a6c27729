import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monostab import Reaction, cli
from monostab.pipelines import config as cf
from monostab.pipelines import marginal as mg
from monostab.pipelines.report import Report, csv_table

CONFIGS = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


def test_all_shipped_configs_validate():
    names = set()
    for p in sorted(CONFIGS.glob("*.json")):
        names.add(cf.load(p).experiment)
    assert names == set(cf.EXPERIMENTS)


@pytest.mark.parametrize("bad", [
    {},
    {"experiment": "Nope"},
    {"experiment": "LengthCurve", "colour": 1},
    {"experiment": "LengthCurve", "h": -0.1},
    {"experiment": "LengthCurve", "reaction": {"family": "Quartic", "params": {}}},
    {"experiment": "LiebSuite"},
])
def test_invalid_configs_rejected(bad):
    with pytest.raises(cf.ConfigError):
        cf.from_dict(bad)


def test_config_defaults_and_round_trip():
    c = cf.from_dict({"experiment": "Marginal", "tolerances": {"a": 0.5}, "params": {"k": 3}})
    assert c.tol("a", 1.0) == 0.5 and c.tol("b", 1.0) == 1.0
    assert c.param("k") == 3 and c.param("z", 7) == 7
    assert cf.from_dict(c.to_dict()) == c


def test_seed_override(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"experiment": "LiebSuite"}))
    assert cf.load(p, seed=4).seed == 4


def test_cli_list(capsys):
    assert cli.main(["--list"]) == 0
    assert capsys.readouterr().out.split() == list(cf.EXPERIMENTS)


def test_cli_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "LengthCurve", "h": 0}))
    assert cli.main(["LengthCurve", "--config", str(bad)]) == 2
    assert cli.main(["Dilate1D", "--config", str(CONFIGS / "lengthcurve.json")]) == 2
    assert cli.main(["Bogus", "--config", str(CONFIGS / "lengthcurve.json")]) == 2
    with pytest.raises(SystemExit):
        cli.main([])


def test_cli_lengthcurve_is_byte_deterministic(tmp_path, capsys):
    cfg = tmp_path / "lc.json"
    cfg.write_text(json.dumps({"experiment": "LengthCurve",
                               "reaction": {"family": "Cubic", "params": {"m": 1.0, "c": 2.0}},
                               "params": {"n_geo": 6, "n_uni": 20}}))
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli.main(["lengthcurve", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(out)
    for name in ("length_curve.csv", "report.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    rep = json.loads((outs[0] / "report.json").read_text())
    assert rep["passed"] and rep["results"]["nonmonotone"]
    assert "PASS" in capsys.readouterr().out


def test_report_checks_and_csv():
    rep = Report("X", {})
    assert rep.upper("a", 1.0, 2.0) and not rep.lower("b", 1.0, 2.0)
    assert not rep.passed
    assert "[FAIL] b" in rep.summary()
    assert csv_table(["x", "y"], [(0.1, "s")]) == "x,y\n0.10000000000000001,s\n"


def test_family_endpoints():
    f0, f1 = Reaction.logistic(3.0), Reaction.cubic(3.0, 2.0)
    s = np.linspace(0, 1, 5)
    assert np.allclose(mg.family(0.0, f0, f1).f(s), f0.f(s))
    assert np.allclose(mg.family(1.0, f0, f1).f(s), f1.f(s))


def test_discrete_march_solves_difference_equation():
    r = Reaction.logistic(10.0)
    n = 32
    L = mg.discrete_length(r, 0.5, n, 1.0)
    h = L / n
    u = mg.discrete_march(r, 0.5, h, n)
    assert abs(u[n]) < 1e-12
    res = (2 * u[1:-1] - u[:-2] - u[2:]) / h ** 2 - r.f(u[1:-1])
    assert np.max(np.abs(res)) < 1e-9


@given(st.floats(-5, 5), st.floats(0.1, 10), st.floats(1.5, 4))
def test_richardson_exact_for_power_law(lam_inf, c, p):
    depths = [2.0, 4.0, 8.0]
    lams = [lam_inf + c / d ** p for d in depths]
    assert mg.richardson(depths, lams, order=p) == pytest.approx(lam_inf, abs=1e-9 * (1 + c))
    assert mg.observed_order(depths, lams) == pytest.approx(p, rel=1e-9)


def test_lambda_at_dip_sign_flip():
    f0 = Reaction.logistic(3 * math.pi ** 2)
    f1 = Reaction.double_hump(3 * math.pi ** 2, 0.3, 1e-4)
    dl0, lam0 = mg.lambda_at_dip(0.0, f0, f1)
    dl1, lam1 = mg.lambda_at_dip(1.0, f0, f1)
    assert dl0 > 0 and lam0 > 0
    assert dl1 < 0 and lam1 < 0
