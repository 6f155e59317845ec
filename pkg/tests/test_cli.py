import csv
import io
import json
from fractions import Fraction

import pytest
import yaml

from conftest import case
from nearcollision.cli import emit_table, main, run
from nearcollision.config import CASE_IDS, from_dict, load_case, load_path, loads
from nearcollision.errors import ConfigError
from nearcollision.pipeline import ResolutionReport, RunFlags


def case_dict(cid):
    return yaml.safe_load(load_case(cid).dumps())


@pytest.mark.parametrize("cid", CASE_IDS)
def test_config_round_trip(cid):
    cfg = load_case(cid)
    again = loads(cfg.dumps())
    assert again == cfg
    assert loads(again.dumps()).dumps() == cfg.dumps()


def test_generators_written_as_exact_rationals():
    text = load_case("dm1").dumps()
    assert "1185/4" in text and "-28935/8" in text
    assert load_case("dm1").generators[4] == (Fraction(1185, 4), Fraction(-28935, 8))


def test_config_errors_are_all_listed():
    data = case_dict("dm1")
    data["N"] = 1
    data["gamma"] = "-3"
    data["david"].pop("c13")
    data["generators"][0] = ["1", "not a number"]
    with pytest.raises(ConfigError) as err:
        from_dict(data)
    text = "\n".join(err.value.problems)
    assert len(err.value.problems) >= 4
    for needle in ("N=1", "gamma", "c13", "generators"):
        assert needle in text


def test_off_curve_generator_reported():
    data = case_dict("N3")
    data["generators"][0] = ["1", "1"]
    with pytest.raises(ConfigError) as err:
        from_dict(data)
    assert any("not on" in p for p in err.value.problems)


def test_missing_keys_reported():
    with pytest.raises(ConfigError) as err:
        from_dict({"case": "x"})
    assert len(err.value.problems) == 6


def write_case(tmp_path, data, name="case.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return str(p)


def test_exit_code_config(tmp_path, capsys):
    data = case_dict("dm1")
    data["gamma"] = "0"
    data["N"] = 0
    assert main([write_case(tmp_path, data), "periods"]) == 2
    err = capsys.readouterr().err
    assert "gamma" in err and "N=0" in err
    assert main([str(tmp_path / "missing.yaml")]) == 2


def test_exit_code_precision(capsys):
    assert main(["dm1", "periods", "--precision", "10"]) == 3
    assert "precision failure" in capsys.readouterr().err


def test_exit_code_precision_from_pipeline(monkeypatch):
    from nearcollision import cli
    from nearcollision.errors import PrecisionError

    def boom(*a, **k):
        raise PrecisionError("cannot decide the rounding at this precision")
    monkeypatch.setattr(cli, "run", boom)
    assert main(["dm1"]) == 3


def test_exit_code_stall(tmp_path, capsys):
    data = case_dict("dm1")
    data["david"]["c13"] = "1e-6"  # keeps the initial bound at c12 and the lattice small
    # sqrt(k2/k4) lies far above the bound, so the first step cannot improve it
    data["linear_form"]["k2"] = "1e60"
    assert main([write_case(tmp_path, data), "reduce"]) == 4
    assert "reduction stalled" in capsys.readouterr().err


def test_empty_report_table():
    rep = ResolutionReport("dm1", "search", 60, rank=5)
    assert emit_table(rep, "csv") == 'm1,m2,m3,m4,m5,P^E,P^C,"(m,n)"\r\n'
    text = emit_table(rep, "text")
    assert text.count("\n") == 4 and "P^E" in text
    with pytest.raises(ValueError):
        emit_table(rep, "html")


@pytest.fixture(scope="module")
def dm1_search():
    return run("dm1", "search", RunFlags(precision=40, mmax=2))


@pytest.fixture(scope="module")
def quartic_search():
    return run("quartic", "search", RunFlags(precision=40, mmax=2))


def test_dm1_table(dm1_search):
    rows = list(csv.reader(io.StringIO(emit_table(dm1_search, "csv"))))
    head, body = rows[0], rows[1:]
    assert head == ["m1", "m2", "m3", "m4", "m5", "P^E", "P^C", "(m,n)"]
    assert len(body) == 6
    want = {(tuple(c), f"({xy[0]}, {xy[1]})", f"({uv[0]}, {uv[1]})")
            for c, xy, uv in case("dm1").reference["rows"]}
    got = {(tuple(int(x) for x in r[:5]), r[5], r[6]) for r in body}
    assert got == want


def test_quartic_table(quartic_search):
    rows = list(csv.reader(io.StringIO(emit_table(quartic_search, "csv"))))[1:]
    assert len(rows) == 26
    want = {(f"({uv[0]}, {uv[1]})", "O" if xy is None else f"({xy[0]}, {xy[1]})")
            for _, xy, uv in case("quartic").reference["rows"]}
    assert {(r[6], r[5]) for r in rows} == want


def test_csv_quoting(quartic_search):
    text = emit_table(quartic_search, "csv")
    assert '"(15, 945)"' in text and text.endswith("\r\n")
    assert '"(5,9)"' in text
    assert list(csv.reader(io.StringIO(text)))[0][-1] == "(m,n)"


def test_text_table_alignment(dm1_search):
    lines = emit_table(dm1_search, "text").splitlines()
    assert len({len(l) for l in lines}) == 1
    assert any("(-138, -339)" in l for l in lines)


def test_N4_search_rows():
    rep = run("N4", "search", RunFlags(precision=40, mmax=3))
    found = {r.pointC for r in rep.rows}
    assert {(11, 28), (4, 3), (4, 1)} <= found
    assert rep.rows == sorted(rep.rows, key=lambda r: r.pointC)
    assert rep.verdict == "no-near-collision"


def test_reports_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert main(["N3", "search", "--mmax", "2", "--precision", "40", "--format", "json",
                     "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert data["case"] == "N3" and [3, 3] in data["solutions"]


def test_text_report_stdout(capsys):
    assert main(["quartic", "periods", "--precision", "40"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("case quartic  stage periods") and "0.0439470225250969" in out


def test_yaml_path_accepted(tmp_path):
    p = write_case(tmp_path, case_dict("N2"))
    assert load_path(p) == load_case("N2")
    assert run(p, "heights", RunFlags(precision=40)).rank == 2


def test_unknown_stage():
    with pytest.raises(ValueError):
        run("dm1", "everything")
    with pytest.raises(SystemExit):
        main(["dm1", "everything"])
