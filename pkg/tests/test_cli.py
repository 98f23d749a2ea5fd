import os
import subprocess
import sys

import pytest

from dualfraisse.cli import main
from dualfraisse.core import read_structure

from helpers import FIXTURES, ROOT

S = os.path.join(FIXTURES, "structures")
C = os.path.join(FIXTURES, "classes")
G = os.path.join(FIXTURES, "groups")


def st(name):
    return os.path.join(S, name)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def fields(out):
    return dict(line.split(": ", 1) for line in out.splitlines() if ": " in line)


def test_epis_path3_onto_path2(capsys):
    code, out, _ = run(capsys, "epis", st("path3.struct"), st("path2.struct"))
    assert code == 0
    assert fields(out)["count"] == "6"


def test_epis_naive_agrees(capsys):
    _, fast, _ = run(capsys, "epis", st("cycle4.struct"), st("path2.struct"))
    _, naive, _ = run(capsys, "epis", "--naive", st("cycle4.struct"), st("path2.struct"))
    assert fast == naive


def test_epis_empty_listing_is_success(capsys):
    code, out, _ = run(capsys, "epis", st("path2.struct"), st("path3.struct"))
    assert code == 0 and fields(out)["count"] == "0"


def test_validate_fixtures(capsys):
    names = [n for n in sorted(os.listdir(S)) if n not in ("malformed.struct", "asymmetric_r.struct")]
    code, _, _ = run(capsys, "validate", *[st(n) for n in names])
    assert code == 0


def test_validate_asymmetric_r(capsys):
    code, out, _ = run(capsys, "validate", st("asymmetric_r.struct"))
    assert code == 1
    assert fields(out)["valid"] == "false"


def test_validate_malformed_reports_position(capsys):
    code, _, err = run(capsys, "validate", st("malformed.struct"))
    assert code == 2
    assert "malformed.struct:5:3" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", st("nope.struct"))
    assert code == 2 and err.startswith("error:")


def test_bad_arguments_exit_two():
    with pytest.raises(SystemExit) as info:
        main(["epis"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["--jobs", "0", "aut", st("path3.struct")])
    assert info.value.code == 2


def test_induce_and_refine(capsys, tmp_path):
    out_file = tmp_path / "q.struct"
    code, _, _ = run(capsys, "induce", st("path4.struct"), "--map", "0 1 2 0", "--out", out_file)
    assert code == 0
    Q = read_structure(out_file)
    assert Q.size == 3 and len(Q["r"]) == 6
    code, out, _ = run(capsys, "refine", st("path3.struct"), "--f", "0 0 1", "--g", "0 1 1")
    assert code == 0
    assert int(fields(out)["size"]) <= 9


def test_induce_bad_map(capsys):
    code, _, _ = run(capsys, "induce", st("path3.struct"), "--map", "0 2")
    assert code == 2


def test_iso_and_aut(capsys):
    assert run(capsys, "iso", st("path3.struct"), st("path3.struct"))[0] == 0
    assert run(capsys, "iso", st("path3.struct"), st("path4.struct"))[0] == 1
    code, out, _ = run(capsys, "aut", st("cycle4.struct"))
    assert code == 0 and fields(out)["order"] == "8"


def test_check_class_paths(capsys):
    code, out, _ = run(capsys, "check-class", os.path.join(C, "paths.class"))
    assert code == 1
    blocks = out.strip().split("\n\n")
    assert len(blocks) == 3
    hp = fields(blocks[0])
    assert hp["holds"] == "false" and hp["bounded"] == "false"
    assert "0 1 2 2" in hp["counterexample"]


def test_check_class_bounded_pap(capsys):
    code, out, _ = run(capsys, "check-class", "--axioms", "PAP", os.path.join(C, "paths.class"))
    assert code == 3
    assert fields(out)["bounded"] == "true"


def test_check_class_decorated(capsys):
    code, out, _ = run(capsys, "check-class", os.path.join(C, "decorated_path.class"))
    assert code == 0
    assert all(fields(b)["holds"] == "true" for b in out.strip().split("\n\n"))


def test_check_class_unknown_axiom(capsys):
    assert run(capsys, "check-class", "--axioms", "XYZ", os.path.join(C, "point.class"))[0] == 2


def test_build_certify_back_and_forth(capsys, tmp_path):
    manifest = os.path.join(C, "decorated_path.class")
    b1, b2 = tmp_path / "b1", tmp_path / "b2"
    for seed, b in ((1, b1), (2, b2)):
        code, out, _ = run(capsys, "build-limit", manifest, "--seed", seed, "--out", b)
        assert code == 0 and fields(out)["valid"] == "true"
        assert (b / "bonds.txt").exists() and (b / "provenance.log").exists()
    code, out, _ = run(capsys, "certify", b1, manifest, "--summary")
    assert code == 0
    f = fields(out)
    assert f["complete"] == "true" and f["recheck"] == "true"
    code, out, _ = run(capsys, "back-and-forth", b1, b2, manifest)
    assert code == 0
    f = fields(out)
    assert f["recheck"] == "true" and f["anchored"] == "true"


def test_certify_age_chain_is_inconclusive(capsys, tmp_path):
    manifest = os.path.join(C, "paths.class")
    run(capsys, "build-limit", manifest, "--mode", "age", "--depth", 3, "--out", tmp_path / "b")
    code, out, _ = run(capsys, "certify", tmp_path / "b", manifest, "--summary")
    assert code == 3 and fields(out)["complete"] == "false"


def test_certify_missing_bundle(capsys, tmp_path):
    assert run(capsys, "certify", tmp_path / "none", os.path.join(C, "point.class"))[0] == 2


def test_dualize(capsys, tmp_path):
    code, out, _ = run(capsys, "dualize", st("s_path3.struct"), "s", "--verify")
    assert code == 0 and fields(out)["equal"] == "true"
    code, _, _ = run(capsys, "dualize", st("s_path3.struct"), "missing")
    assert code == 2


def test_orbits(capsys, tmp_path):
    code, _, _ = run(capsys, "orbits", os.path.join(G, "c4.group"), "--max-arity", 2,
                     "--out", tmp_path / "o.struct")
    assert code == 0
    O = read_structure(tmp_path / "o.struct")
    assert O.size == 4
    code, out, _ = run(capsys, "verify-orbits", os.path.join(G, "d4.group"))
    assert code == 0
    assert fields(out)["aut.equal"] == "true"


def test_quotient(capsys):
    code, out, _ = run(capsys, "quotient", st("prespace_pair.struct"))
    assert code == 0
    code, out, _ = run(capsys, "quotient", st("path3.struct"))
    assert code == 1 and fields(out)["prespace"] == "false"


def test_demo_interval(capsys):
    code, out, _ = run(capsys, "demo-interval", "--depth", 4)
    assert code == 0
    f = fields(out)
    assert (f["atoms"], f["edges"], f["mesh"]) == ("16", "15", "1/16")
    assert f["limit.max_class_size"] == "2"


def test_demo_writes_report(capsys, tmp_path):
    code, out, _ = run(capsys, "demo-interval", "--depth", 3, "--out", tmp_path / "d")
    assert code == 0
    assert (tmp_path / "d" / "report.txt").read_text() == out


def test_demo_cantor(capsys):
    code, out, _ = run(capsys, "demo-cantor", "--depth", 4)
    assert code == 0
    f = fields(out)
    assert f["edges"] == "0" and f["limit.max_class_size"] == "1"


DETERMINISM_CASES = [
    ["epis", st("cycle4.struct"), st("path2.struct")],
    ["check-class", os.path.join(C, "paths.class")],
    ["build-limit", os.path.join(C, "decorated_path.class"), "--seed", "1"],
    ["verify-orbits", os.path.join(G, "s4.group")],
    ["demo-interval", "--depth", "4"],
]


@pytest.mark.parametrize("argv", DETERMINISM_CASES, ids=lambda a: a[0])
def test_deterministic_output(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_subprocess_entry_point():
    cmd = [sys.executable, "-m", "dualfraisse", "demo-interval", "--depth", "3"]
    a = subprocess.run(cmd, capture_output=True, cwd=ROOT, check=False)
    b = subprocess.run(cmd, capture_output=True, cwd=ROOT, check=False)
    assert a.returncode == 0 and a.stdout == b.stdout
    assert b"mesh: 1/8" in a.stdout


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "0.1.0" in capsys.readouterr().out


EXPECTED_VALIDATE = {"malformed.struct": 2, "asymmetric_r.struct": 1}
EXPECTED_CLASS = {"paths.class": 1}


@pytest.mark.parametrize("name", sorted(os.listdir(S)))
def test_exit_contract_structures(capsys, name):
    assert run(capsys, "validate", st(name))[0] == EXPECTED_VALIDATE.get(name, 0)


@pytest.mark.parametrize("name", sorted(os.listdir(C)))
def test_exit_contract_classes(capsys, name):
    assert run(capsys, "check-class", os.path.join(C, name))[0] == EXPECTED_CLASS.get(name, 0)


@pytest.mark.parametrize("name", sorted(os.listdir(G)))
def test_exit_contract_groups(capsys, name):
    assert run(capsys, "verify-orbits", "--max-arity", 3, os.path.join(G, name))[0] == 0
