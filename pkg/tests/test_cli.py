import json
import subprocess
import sys

import pytest

from arithquandle.arith import ConfigError
from arithquandle.cli import ExperimentConfig, dumps, main, run

SMALL = {"field": "Q", "p": 5, "B": 20, "N": 2}


def test_verify_fixture():
    status, rep = run("verify", {"fixture": "F1"})
    assert status == 0
    assert rep["levels"]["3"]["size"] == 133
    assert rep["levels"]["3"]["inner"]["isomorphism"]


def test_ramified_prime_exits_2():
    status, rep = run("build", {**SMALL, "M": [2, 3, 5]})
    assert status == 2 and "ramified prime in M" in rep["error"]


@pytest.mark.parametrize("patch,field", [
    ({"p": 4}, "p:"),
    ({"N": 0}, "N:"),
    ({"field": 8}, "field:"),
    ({"frame": "odd"}, "frame:"),
    ({"seeds": [1]}, "seeds:"),
    ({"fixture": "F9"}, "fixture:"),
    ({"colour": 1}, "unknown config fields: colour"),
])
def test_config_errors_name_the_field(patch, field):
    with pytest.raises(ConfigError, match=field):
        ExperimentConfig.from_dict({**SMALL, **patch})


def test_fixture_defaults_can_be_overridden():
    cfg = ExperimentConfig.from_dict({"fixture": "F2", "N": 2})
    assert cfg.field == 5 and cfg.p == 3 and cfg.N == 2


def test_reports_are_deterministic():
    cfg = {**SMALL, "N": 3, "B": 30}
    a = dumps(run("match", cfg, seed=4)[1])
    b = dumps(run("match", cfg, seed=4)[1])
    assert a == b


def test_reconstruct_rational():
    status, rep = run("reconstruct", {**SMALL, "N": 3, "B": 50, "precision": 16})
    assert status == 0
    assert rep["p"] == 5 and rep["orbits_equal_fibers"]
    assert rep["residue_char_accuracy"].split("/")[0] == rep["residue_char_accuracy"].split("/")[1]


def test_aut_command():
    status, rep = run("aut", {"field": "Q", "p": 3, "M": [2, 5, 7], "N": 2})
    assert status == 0
    assert rep["report"]["equal"] and rep["report"]["kernel_is_translations"]


def test_galois_rejected_where_unsupported():
    status, rep = run("reconstruct", {"fixture": "F4"})
    assert status == 2 and rep["error"].startswith("galois:")


def test_main_writes_report(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SMALL))
    out = tmp_path / "out"
    assert main(["build", "--config", str(cfg), "--out", str(out)]) == 0
    written = json.loads((out / "build.json").read_text())
    assert written["tower"]["p"] == 5
    assert json.loads(capsys.readouterr().out) == written


def test_main_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    assert main(["build", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({**SMALL, "M": [5]}))
    assert main(["build", "--config", str(cfg)]) == 2
    assert "ramified prime in M" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**SMALL, "N": 1}))
    proc = subprocess.run([sys.executable, "-m", "arithquandle", "verify", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["command"] == "verify"
