import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from tauttwist.cli import main, run

GOLDEN = Path(__file__).parent / "golden"
REGISTRY = Path(__file__).resolve().parents[1] / "data" / "registry_genus2.json"


def golden(name):
    return (GOLDEN / name).read_text().rstrip("\n")


@pytest.mark.parametrize("argv,name", [
    (["stargraphs", "--g", "2", "--k", "2", "--mu", "3,1", "--format", "text"], "stargraphs_2_2_3-1.txt"),
    (["stargraphs", "--g", "2", "--k", "2", "--mu", "3,1"], "stargraphs_2_2_3-1.json"),
    (["verify-g1", "--mu", "1,-1", "--k-list", "1,2,3"], "verify_g1_1-m1.json"),
    (["pixton", "--g", "0", "--k", "1", "--mu", "-1,-1,0", "--degree", "0"], "pixton_0_1.json"),
])
def test_golden_outputs(argv, name, monkeypatch):
    monkeypatch.delenv("TAUTTWIST_REGISTRY", raising=False)
    code, out = run(argv)
    assert code == 0
    assert out == golden(name)


def test_table_rows():
    code, out = run(["stargraphs", "--g", "2", "--k", "2", "--mu", "3,1", "--format", "text"])
    rows = [line for line in out.splitlines() if "(xi_G)_*" in line]
    assert len(rows) == 4
    assert [re.search(r"(\S+) \(xi_G\)", r).group(1) for r in rows] == ["1/1", "3/1", "1/2", "1/1"]
    assert "--6--" in rows[1] and "--2,2--" in rows[3]


def test_table_notes_empty_locus():
    code, out = run(["stargraphs", "--g", "2", "--k", "2", "--mu", "3,1", "--format", "text",
                     "--registry", str(REGISTRY)])
    assert code == 0
    assert out.splitlines()[-1].endswith("(registry: empty)")


def test_verify_g1_text():
    code, out = run(["verify-g1", "--mu", "1,-1", "--k-list", "1,2,3", "--format", "text"])
    assert code == 0
    assert "k-independence: pass" in out


def test_output_is_deterministic():
    argv = ["hclass", "--g", "2", "--k", "2", "--mu", "3,1", "--registry", str(REGISTRY)]
    assert run(argv) == run(argv)


def test_negative_leading_entry():
    code, out = run(["verify-g0", "--mu", "-1,-1,0", "--k", "1"])
    assert code == 0
    assert json.loads(out)["status"] == "pass"


def test_invalid_signature_gives_error_object():
    code, out = run(["twists", "--g", "2", "--k", "2", "--mu", "3,2"])
    assert code == 2
    err = json.loads(out)["error"]
    assert err["type"] == "SignatureError"


def test_unstable_pixton_input_rejected():
    code, out = run(["pixton", "--g", "0", "--k", "1", "--mu", "-1,-1", "--degree", "0"])
    assert code == 2
    assert "not stable" in json.loads(out)["error"]["message"]


def test_registry_env_default(monkeypatch):
    monkeypatch.setenv("TAUTTWIST_REGISTRY", str(REGISTRY))
    code, out = run(["hclass", "--g", "2", "--k", "2", "--mu", "3,1"])
    assert code == 0
    assert len(json.loads(out)["terms"]) == 4


def test_registry_validate(tmp_path):
    code, out = run(["registry-validate", "--registry", str(REGISTRY)])
    assert code == 0 and json.loads(out) == {"status": "valid", "entries": 2}
    bad = json.loads(REGISTRY.read_text())
    bad["entries"][0]["key"]["g"] = 1  # ambient no longer matches the expansion
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out = run(["registry-validate", "--registry", str(path)])
    assert code == 2
    assert "error" in json.loads(out)
    code, _ = run(["registry-validate", "--registry", str(tmp_path / "missing.json")])
    assert code == 2


def test_conjecture_gap_commands():
    code, out = run(["conjecture-gap", "--g", "1", "--k", "2", "--mu", "0,0,0"])
    assert code == 0
    assert json.loads(out)["status"] in ("zero", "reduces_to_zero")
    code, out = run(["conjecture-gap", "--g", "0", "--k", "2", "--mu", "2,-3,-3", "--format", "text"])
    assert code == 0 and "zero" in out.splitlines()[0]
    code, _ = run(["conjecture-gap", "--g", "1", "--k", "2", "--mu", "0,0", "--mode", "A"])
    assert code == 2


def test_recursion_command():
    code, out = run(["recursion", "--g", "1", "--k", "2", "--mu", "1,-1"])
    assert code == 0
    assert all(lab == "fundamental" for t in json.loads(out)["terms"] for lab in t["labels"])


def test_twists_command():
    code, out = run(["twists", "--g", "2", "--k", "2", "--mu", "3,1"])
    data = json.loads(out)
    assert code == 0
    assert sorted(tuple(map(tuple, d["twists"])) for d in data) == sorted(
        [((),), ((2,),), ((6,),), ((2, 2),), ((2, 2),)])


def test_probe_command():
    code, out = run(["probe", "--mu", "2,-1,-1", "--k", "2"])
    assert code == 0
    data = json.loads(out)
    assert data["implied_constant"] == "-1/6"
    assert data["trace"]


def test_main_prints_and_returns(capsys):
    assert main(["verify-g0", "--mu", "0,-1,-1", "--k", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "pass"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tauttwist", "twists", "--g", "1", "--k", "1", "--mu", "1,-1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)


def test_unresolved_gap_is_not_a_failure():
    code, out = run(["conjecture-gap", "--g", "1", "--k", "2", "--mu", "2,-1,-1"])
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "unresolved"
    assert data["residual_opaque"]["terms"]
