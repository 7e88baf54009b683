import csv
import io
import json

import pytest

from coupled_nls import acceptance
from coupled_nls.cli import main
from coupled_nls.errors import ConfigError, CriteriaFailed
from coupled_nls.harness import EXAMPLES, KINDS, load_config, parse_config, reproduce_all, run

SOLITON = {"kind": "soliton", "soliton": {"p": 4.0, "N": 2048, "r_max": 20.0}}
CHECK = json.dumps(EXAMPLES["check"])


# parsing -------------------------------------------------------------------------------


def test_examples_parse():
    for kind in KINDS:
        cfg = parse_config(json.dumps(EXAMPLES[kind]))
        assert cfg.kind == kind
        assert parse_config(json.dumps(cfg.normalized())).normalized() == cfg.normalized()


def test_missing_field_named():
    text = json.dumps({"kind": "ground", "problem": {"K": 2, "p": 4.0, "beta": [[1, 5], [5, 1]]}})
    with pytest.raises(ConfigError, match=r"problem\.rho"):
        parse_config(text)


def test_invalid_json_position():
    text = '{\n  "kind": "soliton", "soliton" {"p": 4}\n}'
    with pytest.raises(ConfigError, match="line 2, column"):
        parse_config(text)


def test_unknown_field():
    with pytest.raises(ConfigError, match="bogus"):
        parse_config(json.dumps(dict(SOLITON, bogus=1)))
    with pytest.raises(ConfigError, match="kind"):
        parse_config(json.dumps({"kind": "fourier"}))


@pytest.mark.parametrize("section", [{"p": "four"}, {"p": 4.0, "N": 1.5}, {"p": 4.0, "N": True}])
def test_type_errors(section):
    with pytest.raises(ConfigError):
        parse_config(json.dumps({"kind": "soliton", "soliton": section}))


def test_invalid_problem_wrapped():
    text = json.dumps({"kind": "ground", "problem": {"K": 2, "p": 4.0, "beta": [[1, 5], [4, 1]],
                                                     "rho": [1, 1]}})
    with pytest.raises(ConfigError):
        parse_config(text)


def test_check_theta_required():
    cfg = dict(EXAMPLES["check"], check={"m": 2})
    with pytest.raises(ConfigError, match="theta_m"):
        parse_config(json.dumps(cfg))


def test_overrides_and_load(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(SOLITON))
    cfg = load_config(path, {"seed": 7, "output": str(tmp_path / "o"), "plots": False})
    assert cfg.seed == 7 and not cfg.plots and cfg.output == tmp_path / "o"
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")


# runs and artifacts ---------------------------------------------------------------------


def test_soliton_run_deterministic(tmp_path):
    a = run(parse_config(json.dumps(SOLITON), {"output": str(tmp_path / "a"), "plots": False}))
    b = run(parse_config(json.dumps(SOLITON), {"output": str(tmp_path / "b"), "plots": False}))
    assert a.status == 0
    for name in ("soliton.csv", "soliton.json", "result.json"):
        assert (a.out / name).read_bytes() == (b.out / name).read_bytes()
    manifest = json.loads((a.out / "manifest.json").read_text())
    assert manifest["artifacts"] == sorted(["soliton.csv", "soliton.json", "result.json", "manifest.json"])
    assert "numpy" in manifest["versions"]
    rows = list(csv.reader(io.StringIO((a.out / "soliton.csv").read_text())))
    assert rows[0] == ["r", "value"] and len(rows) == 2049
    assert abs(a.result["w0"] - 4.337387679977) <= 1e-6


def test_check_run_reports_threshold(tmp_path):
    res = run(parse_config(CHECK, {"output": str(tmp_path), "plots": False}))
    assert "coupling threshold beta* = 0.414213562373095" in res.result["table"]
    rows = list(csv.reader(io.StringIO((tmp_path / "conditions.csv").read_text())))
    assert rows[0] == ["condition", "lhs", "rhs", "margin", "satisfied", "witness"]
    assert {r[0] for r in rows[1:]} == {"betacond", "level_condition", "uniform"}
    assert all(r[4] == "1" for r in rows[1:])


def test_spectrum_run(tmp_path):
    res = run(parse_config(json.dumps(EXAMPLES["spectrum"]), {"output": str(tmp_path), "plots": False}))
    assert res.status == 0
    assert res.result["components"][0]["ell0_count"] == 1
    assert (tmp_path / "spectrum.csv").read_text().splitlines()[0] == "component,ell,count"


def test_nonexist_run(tmp_path):
    res = run(parse_config(json.dumps(EXAMPLES["nonexist"]), {"output": str(tmp_path), "plots": False}))
    assert res.status == 0
    assert (tmp_path / "nonexistence.csv").exists()


# command line -----------------------------------------------------------------------------


def test_cli_no_plots(tmp_path, capsys):
    assert main(["soliton", "--out", str(tmp_path), "--no-plots"]) == 0
    assert not list(tmp_path.glob("*.png"))
    assert "artifacts in" in capsys.readouterr().out


def test_cli_plots(tmp_path):
    assert main(["check", "--out", str(tmp_path / "c")]) == 0
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(SOLITON))
    assert main(["soliton", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "soliton.png").stat().st_size > 0
    manifest = json.loads((tmp_path / "s" / "manifest.json").read_text())
    assert "soliton.png" in manifest["artifacts"]


def test_cli_check_prints_table(tmp_path, capsys):
    assert main(["check", "--out", str(tmp_path), "--no-plots"]) == 0
    out = capsys.readouterr().out
    assert "0.414213562373095" in out and "betacond" in out


def test_cli_print_config(tmp_path, capsys):
    assert main(["ground", "--print-config", "--out", str(tmp_path)]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["problem"]["beta"] == [[1.0, 5.0], [5.0, 1.0]]
    assert not list(tmp_path.iterdir())


def test_cli_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "ground", "problem": {"K": 2, "p": 4, "beta": [[1, 5], [5, 1]]}}))
    assert main(["ground", "--config", str(bad), "--out", str(tmp_path / "o")]) == ConfigError.exit_code
    assert "problem.rho" in capsys.readouterr().err


def test_cli_bad_criteria(capsys):
    assert main(["reproduce", "--criteria", "1,x"]) == 2
    assert main(["reproduce", "--criteria", "11"]) != 0


# acceptance harness -------------------------------------------------------------------------


def test_reproduce_detects_perturbed_constant(tmp_path):
    frozen = dict(acceptance.FROZEN, kwong_w0_p4=acceptance.FROZEN["kwong_w0_p4"] + 1e-6)
    lines = []
    with pytest.raises(CriteriaFailed) as info:
        reproduce_all(out=tmp_path, ids=[2, 9, 10], frozen=frozen, echo=lines.append)
    assert info.value.exit_code == 9
    assert "2" in str(info.value)
    assert lines[0].startswith("[FAIL]") and all(s.startswith("[PASS]") for s in lines[1:])
    rows = list(csv.reader(io.StringIO((tmp_path / "acceptance.csv").read_text())))
    assert [r[2] for r in rows[1:]] == ["0", "1", "1"]


def test_cli_reproduce_subset(tmp_path, capsys):
    assert main(["reproduce", "--criteria", "1,9", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 2 and all(s.startswith("[PASS]") for s in out)
    assert (tmp_path / "acceptance.json").exists()
