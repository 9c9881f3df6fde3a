import io
import json

import pytest

from qserre.cli import canonical, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_verify_all_degenerate_truncation():
    code, text = run("verify", "--suite", "all", "-N", "0")
    assert code == 0
    assert text.strip().endswith("reports passed")
    assert "FAIL" not in text


def test_verify_condition_k_prints_identities():
    code, text = run("verify", "--suite", "condition-k", "--calculus", "4d")
    assert code == 0
    assert "closed_form_ab: (-2/3)*wm" in text
    assert "closed_form_cb: (-5/9)*w1" in text
    assert "closed_form_dc: (-8/27)*wp" in text
    assert "PASS" in text
    code2, text2 = run("condition-k", "--q", "symbolic")
    assert code2 == 0
    assert "(-q^-1)*wm" in text2 and "(-q^-3)*wp" in text2


def test_verify_json():
    code, text = run("verify", "--suite", "presentation", "--json")
    data = json.loads(text)
    assert code == 0
    assert data["schema"] == "qserre.report/1"
    assert data["status"] == "PASS"
    for rep in data["suites"]["presentation"]:
        assert set(rep) >= {"check", "status", "truncation", "scalar_mode"}


def test_table_xi():
    code, text = run("table", "--xi", "--calculus", "3d", "-N", "3")
    assert code == 0
    lines = text.splitlines()
    assert lines[2].split() == ["m=0", "1", "w1", "0"]
    assert lines[3].split() == ["m=1", "w0,", "w2", "w0^w1,", "w1^w2", "0"]
    assert lines[4].split() == ["m=2", "w0^w2", "w0^w1^w2", "0"]


def test_table_json_and_e2():
    code, text = run("table", "--xi", "--e2", "--json")
    data = json.loads(text)
    assert data["xi"]["1,1"]["generators"] == ["w0^w1", "w1^w2"]
    assert {k: v for k, v in data["e2"].items() if v} == {"0,0": 1, "0,1": 1, "2,0": 1, "2,1": 1}


def test_spectral_json_shape():
    code, text = run("spectral", "--page", "2", "--json")
    data = json.loads(text)
    assert data["page"] == 2
    assert {(b["p"], b["q"], b["zdeg"], b["dim"]) for b in data["blocks"]} == \
        {(0, 0, 0, 1), (0, 1, 0, 1), (2, 0, 0, 1), (2, 1, 0, 1)}
    (m,) = data["maps"]
    assert (m["from"]["p"], m["from"]["q"], m["to"]["p"], m["to"]["q"]) == (0, 1, 2, 0)


def test_spectral_text():
    code, text = run("spectral")
    assert code == 0
    assert "d_2: (0,1) -> (2,0) [z=0] rank 1" in text
    assert text.count("E_") == 4


def test_cohomology():
    code, text = run("cohomology", "--json")
    data = json.loads(text)
    assert data["total"] == {"0": {"0": 1}, "3": {"0": 1}}
    assert data["base"] == {"0": 1, "1": 0, "2": 1}
    assert data["fibre_generators"] == {"0": ["1"], "1": ["w1"], "2": [], "3": []}


@pytest.mark.parametrize("argv", [
    ("verify", "--suite", "spectral", "--calculus", "4d"),
    ("verify", "-N", "-1"),
    ("verify", "--q", "1"),
    ("verify", "--q", "2/0"),
    ("table", "--calculus", "4d"),
])
def test_config_errors(argv, capsys):
    code, text = run(*argv)
    assert code == 2
    assert text == ""
    assert "config error" in capsys.readouterr().err


def test_bad_suite_name_is_rejected():
    with pytest.raises(SystemExit):
        run("verify", "--suite", "nonsense")


def test_goldens_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("goldens", str(a), "--suite", "calculus", "--suite", "condition-k")[0] == 0
    assert run("goldens", str(b), "--suite", "condition-k", "--suite", "calculus")[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["calculus.json", "condition-k.json"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
        doc = json.loads((a / n).read_text())
        assert doc["schema"] == "qserre.golden/1"


def test_goldens_calculus_echo(tmp_path):
    run("goldens", str(tmp_path), "--suite", "calculus")
    pres = json.loads((tmp_path / "calculus.json").read_text())["presentations"]["3D"]
    assert pres["maurer_cartan"]["w1"] == "(3/2)*w0^w2"
    assert pres["wedge"]["w2^w0"] == "(-9/4)*w0^w2"
    assert len(pres["commutation"]) == 12


def test_goldens_empty(tmp_path):
    code, text = run("goldens", str(tmp_path / "none"))
    assert code == 0
    assert list((tmp_path / "none").iterdir()) == []


def test_canonical_keys():
    assert canonical({(1, 2): {3: None}}) == {"1,2": {"3": None}}
