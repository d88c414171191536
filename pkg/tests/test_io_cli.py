import io as stdio
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from conftest import random_rational_model
from qadditive import io
from qadditive.analysis import OSD_INPUTS, OsdModelSpec, build_osd_model
from qadditive.cli import cli_dispatch
from qadditive.errors import DataWarning, DatasetError, FeasibilityWarning, QAdditiveError
from qadditive.model import ScalingModel, closed_form_eval, oracle_eval


def run(argv):
    buf = stdio.StringIO()
    code = cli_dispatch(argv, out=buf)
    return code, buf.getvalue()


@pytest.fixture
def d3_model(tmp_path):
    path = tmp_path / "d3.json"
    io.save_model(build_osd_model(OSD_INPUTS[3]), path)
    return path


class TestDataset:
    def test_parse(self):
        ds = io.parse_dataset("# d: 3\n# fidelity: 0.9\nN,E_total\n6,1\n36,18.648\n")
        assert list(zip(ds.N, ds.E_total)) == [(6, 1.0), (36, 18.648)]
        assert ds.metadata == {"d": 3, "fidelity": 0.9}
        assert ds.per_copy[1] == pytest.approx(0.518)

    def test_round_trip(self, tmp_path):
        ds = io.DatasetFile((1, 4, 9), (0.5, 2.25, 7.0), {"note": "x"})
        io.save_dataset(ds, tmp_path / "d.csv")
        back = io.load_dataset(tmp_path / "d.csv")
        assert back == ds and back.metadata == {"note": "x"}

    def test_empty(self):
        with pytest.raises(DatasetError, match="no data rows"):
            io.parse_dataset("N,E_total\n")
        with pytest.raises(DatasetError, match="no data rows"):
            io.parse_dataset("")

    def test_bad_value_line_number(self):
        with pytest.raises(DatasetError, match="line 2") as info:
            io.parse_dataset("N,E_total\n6,abc\n")
        assert info.value.line == 2

    @pytest.mark.parametrize("text,line", [
        ("N,E\n1,1\n", 1),
        ("N,E_total\n1,1\n1,2\n", 3),
        ("N,E_total\n0,1\n", 2),
        ("N,E_total\n2,-1\n", 2),
        ("N,E_total\n2,1,3\n", 2),
        ("N,E_total\n2,nan\n", 2),
    ])
    def test_rejects(self, text, line):
        with pytest.raises(DatasetError) as info:
            io.parse_dataset(text)
        assert info.value.line == line

    def test_decreasing_warns(self):
        with pytest.warns(DataWarning):
            ds = io.parse_dataset("N,E_total\n2,3\n4,1\n")
        assert ds.E_total == (3.0, 1.0)


class TestModelFiles:
    def test_round_trip_random(self, rng):
        for i in range(100):
            if i % 2:
                m, _ = random_rational_model(rng)
            else:
                q = rng.randint(1, 5)
                m = ScalingModel(rng.randint(2, 7), tuple(rng.uniform(0, 10) for _ in range(q)),
                                 exponents=tuple(rng.uniform(-1, 2) for _ in range(q)),
                                 notes=(f"model {i}",))
            back = io.loads_model(io.dumps_model(m))
            assert back == m
            for n in range(6):
                assert oracle_eval(back, n) == oracle_eval(m, n)

    def test_fraction_encoding(self):
        m = ScalingModel(3, (Fraction(1, 3), 2), closure=(Fraction(-7, 2), Fraction(5)))
        d = json.loads(io.dumps_model(m))
        assert d["evector"] == ["1/3", 2] and d["closure"] == ["-7/2", "5/1"]
        assert d["schema"] == "qadditive-model" and d["version"] == 1 and d["q"] == 2
        assert io.loads_model(json.dumps(d)).closure == (Fraction(-7, 2), 5)

    def test_monotone_flag(self):
        m = ScalingModel(2, (1.0, 3.0), closure=(-2, 3), monotone=True)
        assert io.model_from_dict(io.model_to_dict(m)).monotone

    @pytest.mark.parametrize("mutate", [
        lambda d: d.update(schema="other"),
        lambda d: d.update(version=2),
        lambda d: d.update(closure=[1, 2]),
        lambda d: d.pop("evector"),
        lambda d: d.update(q=5),
        lambda d: d.update(base="6"),
        lambda d: d.update(evector=[0, True, 1]),
    ])
    def test_rejects(self, mutate):
        d = io.model_to_dict(build_osd_model(OSD_INPUTS[3]))
        mutate(d)
        with pytest.raises(QAdditiveError):
            io.model_from_dict(d)

    def test_not_json(self):
        with pytest.raises(QAdditiveError):
            io.loads_model("{")
        with pytest.raises(QAdditiveError):
            io.loads_model("[1]")


class TestFormatting:
    def test_format_number(self):
        assert io.format_number(1 / 6, 6) == "0.166667"
        assert io.format_number(0.0, 6) == "0"
        assert io.format_number(2.0, 6) == "2"
        assert io.format_number(1234567.0, 3) == "1230000"
        assert io.format_number(1e-7, 2) == "0.0000001"

    def test_precision_env(self, monkeypatch):
        monkeypatch.setenv("QADD_PRECISION", "3")
        assert io.default_precision() == 3
        assert io.format_number(1 / 6) == "0.167"
        monkeypatch.setenv("QADD_PRECISION", "zero")
        with pytest.raises(QAdditiveError):
            io.default_precision()
        monkeypatch.delenv("QADD_PRECISION")
        assert io.default_precision() == 6


class TestFigureData:
    def test_d2_first_point(self):
        table = io.emit_figure_data(build_osd_model(OSD_INPUTS[2]), None, (1, 50), 6)
        lines = table.splitlines()
        assert lines[0] == "N,model_per_copy,data_per_copy"
        assert len(lines) == 51
        assert lines[6] == "6,0.166667,"

    def test_d3_with_data(self):
        ds = io.DatasetFile((6, 36), (1.0, 18.648))
        rows = io.figure_rows(build_osd_model(OSD_INPUTS[3]), ds, (1, 40))
        n, model, data = rows[35]
        assert n == 36 and model == pytest.approx(0.518, rel=1e-12) and data == pytest.approx(0.518)
        assert rows[0][2] is None
        assert io.emit_figure_data(build_osd_model(OSD_INPUTS[3]), ds, (36, 36), 6) \
            .splitlines()[1] == "36,0.518,0.518"

    def test_d4_below_limit(self):
        rows = io.figure_rows(build_osd_model(OSD_INPUTS[4]), None, (1, 30))
        assert all(c < 1.197 for _, c, _ in rows)
        assert rows[-1][1] > rows[5][1]

    def test_bad_range(self):
        with pytest.raises(QAdditiveError):
            io.figure_rows(build_osd_model(OSD_INPUTS[4]), None, (0, 3))


class TestCli:
    def test_eval(self, d3_model):
        assert run(["eval", "--model", str(d3_model), "--n", "40", "--per-copy"]) == (0, "0.533449\n")
        code, out = run(["eval", "--model", str(d3_model), "--n", "36"])
        assert code == 0 and float(out) == pytest.approx(18.648)

    def test_precision_flag_and_env(self, d3_model, monkeypatch):
        assert run(["--precision", "3", "eval", "--model", str(d3_model), "--n", "40", "--per-copy"])[1] == "0.533\n"
        monkeypatch.setenv("QADD_PRECISION", "4")
        assert run(["eval", "--model", str(d3_model), "--n", "40", "--per-copy"])[1] == "0.5334\n"

    def test_asymptote(self, tmp_path):
        p = tmp_path / "d4.json"
        io.save_model(build_osd_model(OSD_INPUTS[4]), p)
        code, out = run(["asymptote", "--model", str(p)])
        assert code == 0 and float(out) == pytest.approx(1.1975, abs=5e-4)
        io.save_model(ScalingModel(3, (1, 2), exponents=(1, 1)), p)
        assert run(["asymptote", "--model", str(p)]) == (0, "log-divergent (order 1)\n")

    def test_check_ok(self, d3_model):
        code, out = run(["check", "--model", str(d3_model)])
        assert code == 0 and "osd_consistency,ok,15.1985" in out

    def test_check_violation(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        with pytest.warns(FeasibilityWarning):
            io.save_model(build_osd_model(OsdModelSpec(6, 1.0, 3.0)), p)
        code, out = run(["check", "--model", str(p)])
        assert code == 2 and "VIOLATED" in out
        assert "violated: e3 >= (sqrt(a)+1) e2" in capsys.readouterr().err

    def test_oracle(self, tmp_path):
        p = tmp_path / "m.json"
        io.save_model(ScalingModel(2, (Fraction(1, 3), 2), closure=(-2, 3)), p)
        # E(4) = x e + y f = 16/3, E(8) = x f + y E(4) = 12
        assert run(["oracle", "--model", str(p), "--n", "4", "--exact"]) == (0, "16/3\n")
        assert run(["oracle", "--model", str(p), "--n", "4"]) == (0, "5.33333\n")
        assert run(["oracle", "--model", str(p), "--n", "8", "--exact", "--per-copy"]) == (0, "3/2\n")
        assert run(["oracle", "--model", str(p), "--n", "6"])[0] == 2

    def test_verify(self, d3_model):
        assert run(["verify", "--model", str(d3_model), "--n-max", "6"]) == (0, "ok,max_residual,0.0\n")

    def test_fit(self, tmp_path):
        data = tmp_path / "d.csv"
        data.write_text("# d: 3\nN,E_total\n6,1\n36,18.648\n")
        out_model = tmp_path / "fit.json"
        code, out = run(["fit", "--data", str(data), "--base", "6", "--q", "3", "--exponents", "1,0.5,0",
                         "--fix-e", "0=0", "--out", str(out_model)])
        assert code == 0
        assert "evector,0,1,18.648" in out
        m = io.load_model(out_model)
        assert closed_form_eval(m, 40) / 40 == pytest.approx(0.533449, abs=1e-6)

    def test_fit_bad_data(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        data.write_text("N,E_total\n6,abc\n")
        assert run(["fit", "--data", str(data), "--base", "6", "--q", "3", "--exponents", "1,0.5,0"])[0] == 2
        assert "line 2" in capsys.readouterr().err

    def test_reproduce(self, tmp_path):
        code, out = run(["reproduce", "--outdir", str(tmp_path)])
        assert code == 0
        assert out.splitlines() == ["d=2,asymptote,0.626981", "d=3,asymptote,0.856131", "d=4,asymptote,1.19747"]
        assert (tmp_path / "osd_d3.csv").read_text().splitlines()[36] == "36,0.518,"
        assert len((tmp_path / "osd_d4.csv").read_text().splitlines()) == 31
        m = io.load_model(tmp_path / "osd_d2.json")
        assert m.evector[2] == 14.58

    def test_reproduce_stdout(self):
        code, out = run(["reproduce", "--d", "3"])
        assert code == 0 and out.startswith("# d=3 a=6") and "asymptote=0.856131" in out

    @pytest.mark.parametrize("argv", [
        ["eval", "--bogus"],
        [],
        ["frobnicate"],
        ["eval", "--model", "/nonexistent.json", "--n", "3"],
        ["--precision", "0", "reproduce"],
    ])
    def test_usage_errors(self, argv):
        assert run(argv)[0] == 2

    def test_module_entry_point(self, d3_model):
        r = subprocess.run([sys.executable, "-m", "qadditive", "eval", "--model", str(d3_model),
                            "--n", "40", "--per-copy"], capture_output=True, text=True)
        assert r.returncode == 0 and r.stdout == "0.533449\n"
        r = subprocess.run([sys.executable, "-m", "qadditive", "eval", "--nope"], capture_output=True, text=True)
        assert r.returncode == 2
