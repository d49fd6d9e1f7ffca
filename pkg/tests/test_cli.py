import json
from importlib.resources import files
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from hks.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def schema(name):
    return json.loads(files("hks").joinpath("schemas", name).read_text())


@pytest.fixture
def data(tmp_path):
    (tmp_path / "a.csv").write_text("1\n")
    (tmp_path / "b.csv").write_text("2\n")
    rng = np.random.default_rng(0)
    (tmp_path / "x.csv").write_text("\n".join(map(str, rng.normal(size=40))) + "\n")
    (tmp_path / "y.csv").write_text("\n".join(map(str, rng.normal(0.5, 1, size=30))) + "\n")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestTest:
    def test_singleton(self, data, capsys):
        code, out, _ = run(capsys, "test", "--x", data / "a.csv", "--y", data / "b.csv", "--k", 2, "--method", "exact")
        assert code == 0
        res = json.loads(out)
        assert res["statistic"] == pytest.approx(1.5)
        assert res["config"]["perms"] == 999 and res["seed"] == 0
        jsonschema.validate(res, schema("test_result.schema.json"))

    def test_deterministic(self, data, capsys):
        args = ("test", "--x", data / "x.csv", "--y", data / "y.csv", "--k", 1, "--perms", 999, "--seed", 7)
        a = run(capsys, *args)[1]
        b = run(capsys, *args)[1]
        assert a == b
        assert 0 < json.loads(a)["p_value"] <= 1

    def test_json_file(self, data, capsys):
        target = data / "out.json"
        run(capsys, "test", "--x", data / "x.csv", "--y", data / "y.csv", "--k", 6, "--perms", 0, "--json", target)
        res = json.loads(target.read_text())
        assert res["method"] == "eps_approx" and res["p_value"] is None
        jsonschema.validate(res, schema("test_result.schema.json"))

    def test_negative_k(self, data, capsys):
        code, _, err = run(capsys, "test", "--x", data / "a.csv", "--y", data / "b.csv", "--k", -1)
        assert code == 1 and "--k" in err

    def test_unknown_flag(self, data, capsys):
        code, _, err = run(capsys, "test", "--x", data / "a.csv", "--y", data / "b.csv", "--k", 1, "--frobnicate")
        assert code == 1 and "frobnicate" in err

    def test_missing_file(self, data, capsys):
        assert run(capsys, "test", "--x", data / "nope.csv", "--y", data / "b.csv", "--k", 1)[0] == 2

    def test_bad_number(self, data, capsys):
        (data / "bad.csv").write_text("abc\n")
        code, _, err = run(capsys, "test", "--x", data / "bad.csv", "--y", data / "b.csv", "--k", 1)
        assert code == 2 and "line 1" in err

    def test_labeled(self, data, capsys):
        (data / "l.csv").write_text("sample,value\nx,1\ny,2\n")
        code, out, _ = run(capsys, "test", "--x", data / "l.csv", "--format", "csv_labeled", "--k", 2, "--perms", 0)
        assert code == 0 and json.loads(out)["statistic"] == pytest.approx(1.5)

    def test_missing_y(self, data, capsys):
        assert run(capsys, "test", "--x", data / "a.csv", "--k", 2)[0] == 1


class TestRoc:
    def test_smoke(self, tmp_path, capsys):
        code, out, _ = run(capsys, "roc", "--config", CONFIGS / "smoke.cfg", "--out", tmp_path)
        assert code == 0
        summary = json.loads(out)
        jsonschema.validate(summary, schema("roc_summary.schema.json"))
        assert summary["config"]["seed"] == 7
        assert (tmp_path / "roc.csv").exists()

    def test_missing_config(self, tmp_path, capsys):
        assert run(capsys, "roc", "--config", tmp_path / "none.cfg")[0] == 2

    def test_unknown_test(self, tmp_path, capsys):
        f = tmp_path / "c.cfg"
        f.write_text("[experiment]\np=normal:0,1\nq=normal:0,1\nm=5\nn=5\nreps=1\ntests=\n    bogus\n")
        assert run(capsys, "roc", "--config", f, "--out", tmp_path)[0] == 1


class TestNullSim:
    def test_single_draw(self, capsys):
        code, out, _ = run(capsys, "null-sim", "--dist", "normal:0,1", "--k", 0, "--draws", 1, "--grid", 64)
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("#") and "grid=64" in lines[0] and "seed=0" in lines[0]
        assert len(lines) == 2 and float(lines[1]) > 0

    def test_t3(self, tmp_path, capsys):
        target = tmp_path / "d.csv"
        code, _, _ = run(capsys, "null-sim", "--dist", "t:3", "--k", 2, "--draws", 20, "--grid", 32, "--out", target)
        assert code == 0 and len(target.read_text().splitlines()) == 21

    def test_bad_spec(self, capsys):
        assert run(capsys, "null-sim", "--dist", "gamma:1", "--k", 0)[0] == 1

    def test_help_documents_specs(self, capsys):
        with pytest.raises(SystemExit):
            main(["null-sim", "--help"])
        assert "normal:MU,SIGMA" in capsys.readouterr().out


class TestWitness:
    def test_singleton(self, data, capsys):
        code, out, _ = run(capsys, "witness", "--x", data / "a.csv", "--y", data / "b.csv", "--k", 2, "--grid", 50)
        lines = out.splitlines()
        assert code == 0 and "t_star=0.0" in lines[0] and "side=plus" in lines[0]
        vals = np.array([list(map(float, ln.split(","))) for ln in lines[2:]])
        assert np.max(np.abs(vals[:, 1])) == 1.0
        pos = vals[:, 0] > 0
        np.testing.assert_allclose(vals[pos, 1], -vals[pos, 0] ** 2 / np.max(vals[pos, 0] ** 2))

    def test_zero_gap(self, data, capsys):
        code, out, _ = run(capsys, "witness", "--x", data / "a.csv", "--y", data / "a.csv", "--k", 1)
        assert code == 0 and "zero_gap=true" in out.splitlines()[0]

    def test_step(self, data, capsys):
        out = run(capsys, "witness", "--x", data / "x.csv", "--y", data / "y.csv", "--k", 0, "--grid", 40)[1]
        vals = [abs(float(ln.split(",")[1])) for ln in out.splitlines()[2:]]
        assert set(vals) <= {0.0, 1.0}


class TestBaselines:
    def test_all(self, data, capsys):
        code, out, _ = run(capsys, "baselines", "--x", data / "a.csv", "--y", data / "b.csv", "--perms", 5)
        res = json.loads(out)
        assert code == 0 and res["results"]["energy"]["statistic"] == 2.0
        jsonschema.validate(res, schema("baselines.schema.json"))

    def test_bad_bandwidth(self, data, capsys):
        assert run(capsys, "baselines", "--x", data / "a.csv", "--y", data / "b.csv", "--bandwidth", "-1")[0] == 1

    def test_unknown_baseline(self, data, capsys):
        assert run(capsys, "baselines", "--x", data / "a.csv", "--y", data / "b.csv", "--tests", "foo")[0] == 1


def test_numerical_error_exit_code(monkeypatch, capsys):
    from hks import cli
    from hks.core import NumericalError

    def boom(*a, **k):
        raise NumericalError("factorization failed")

    monkeypatch.setattr(cli, "asymptotic_null", boom)
    assert run(capsys, "null-sim", "--dist", "normal:0,1", "--k", 0)[0] == 3
