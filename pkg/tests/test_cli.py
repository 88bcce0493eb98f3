import json
import re

import numpy as np
import pytest

from qglab import catalog, cli, hopf


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def s3_file(tmp_path):
    path = tmp_path / "c_s3.json"
    path.write_text(hopf.save(catalog.builtin("c_s3")) + "\n")
    return str(path)


@pytest.fixture()
def z2_file(tmp_path):
    path = tmp_path / "c_z2.json"
    path.write_text(hopf.save(catalog.builtin("c_z2")) + "\n")
    return str(path)


def test_examples_writes_valid_file(tmp_path, capsys):
    out = tmp_path / "group.json"
    code, _, err = run(capsys, "examples", "cg_z4", "--out", str(out))
    assert code == 0
    assert "wrote" in err
    loaded = hopf.load_path(out)
    assert hopf.validate(loaded).passed


def test_validate_pass(s3_file, capsys):
    code, out, _ = run(capsys, "validate", s3_file)
    assert code == 0
    assert "overall: pass" in out


def test_validate_json_format(s3_file, capsys):
    code, out, _ = run(capsys, "validate", s3_file, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert doc["tol"] == 1e-12


def test_validate_broken_file_names_axiom(tmp_path, capsys):
    doc = hopf.save_dict(catalog.builtin("c_z2"))
    doc["mult"][0][0][0] = [1.001, 0.0]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "validate", str(path))
    assert code == 1
    assert "validation failed" in err
    assert "NO" in out


def test_validate_missing_file_is_input_error(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/file.json")
    assert code == 2
    assert "error" in err


def test_validate_parse_error_is_input_error(tmp_path, capsys):
    path = tmp_path / "junk.json"
    path.write_text("{\"dim\": 2}")
    code, _, err = run(capsys, "validate", str(path))
    assert code == 2
    assert "mult" in err


def test_idempotents_json(s3_file, capsys):
    code, out, _ = run(capsys, "idempotents", s3_file, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["states"]) == 6
    assert doc["report"]["strategy"] == "catalog"
    for state in doc["states"]:
        assert state["haar_type"] is True
        assert set(state) == {"name", "coeffs", "q_perp", "coideal_dim",
                              "haar_type"}


def test_idempotents_deterministic_bytes(s3_file, capsys):
    args = ("idempotents", s3_file, "--format", "json", "--strategy",
            "search", "--restarts", "40", "--seed", "7")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_lattice_json_and_dot(s3_file, capsys):
    code, out, _ = run(capsys, "lattice", s3_file, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["states"]) == 6
    assert len(doc["order"]) == 6
    assert doc["dot"].startswith("digraph")

    code, out, _ = run(capsys, "lattice", s3_file, "--format", "dot")
    assert code == 0
    node = re.compile(r'^  "[^"]+" \[label="[^"]+"\];$')
    edge = re.compile(r'^  "[^"]+" -> "[^"]+";$')
    body = out.strip().splitlines()[1:-1]
    assert all(node.match(x) or edge.match(x) for x in body)


def test_lattice_out_file(s3_file, tmp_path, capsys):
    target = tmp_path / "lat.dot"
    code, out, _ = run(capsys, "lattice", s3_file, "--format", "dot",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("digraph")


def test_dual_roundtrip(s3_file, tmp_path, capsys):
    target = tmp_path / "dual.json"
    code, out, _ = run(capsys, "dual", s3_file, "--out", str(target))
    assert code == 0
    assert "comult_flip=False" in out
    dual_group = hopf.load_path(target)
    assert hopf.validate(dual_group).passed
    assert np.allclose(dual_group.mult, catalog.builtin("cg_s3").mult)


def test_dual_json_includes_w(z2_file, capsys):
    code, out, _ = run(capsys, "dual", z2_file, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["comult_flip"] is False
    assert len(doc["w"]) == 4 and len(doc["w"][0]) == 4
    assert "dual_group" in doc


def test_check_z2_passes(z2_file, capsys):
    code, out, _ = run(capsys, "check", z2_file)
    assert code == 0
    assert "overall: pass" in out


def test_check_json_format(z2_file, capsys):
    code, out, _ = run(capsys, "check", z2_file, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert all(entry["passed"] for entry in doc)
    keys = {entry["key"] for entry in doc}
    assert {"axioms", "pentagon", "support-reconstruction",
            "duality-exchange", "modular-law"} <= keys


def test_qglab_tol_env(monkeypatch, z2_file, capsys):
    monkeypatch.setenv("QGLAB_TOL", "1e-6")
    code, out, _ = run(capsys, "idempotents", z2_file, "--format", "json")
    assert code == 0  # env tolerance flows through without changing results
    assert len(json.loads(out)["states"]) == 2


def test_unknown_example_name_rejected(capsys):
    with pytest.raises(SystemExit):
        cli.main(["examples", "nope"])


def test_nonpositive_tolerance_is_input_error(z2_file, capsys):
    code, _, err = run(capsys, "validate", z2_file, "--tol", "-1")
    assert code == 2
    assert "positive" in err


def test_internal_inconsistency_maps_to_exit_3(z2_file, capsys, monkeypatch):
    from qglab import checks as checks_module
    from qglab.errors import CriteriaDisagree

    def boom(*args, **kwargs):
        raise CriteriaDisagree("forced for the exit-code contract")

    monkeypatch.setattr(checks_module, "run_all_checks", boom)
    code, _, err = run(capsys, "check", z2_file)
    assert code == 3
    assert "internal inconsistency" in err


def test_conv_tol_and_n_max_flags(s3_file, capsys):
    code, out, _ = run(capsys, "lattice", s3_file, "--format", "json",
                       "--conv-tol", "1e-10", "--n-max", "500")
    assert code == 0
    assert len(json.loads(out)["states"]) == 6
    code, _, err = run(capsys, "lattice", s3_file, "--n-max", "0")
    assert code == 2 and "n-max" in err


def test_run_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig(command="check", path=None, state_tol=-1.0)


def test_haar_less_file_works(tmp_path, capsys):
    doc = hopf.save_dict(catalog.builtin("c_s3"))
    del doc["haar"]
    path = tmp_path / "nohaar.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 0 and "overall: pass" in out
    code, out, _ = run(capsys, "idempotents", str(path), "--format", "json")
    assert code == 0 and len(json.loads(out)["states"]) == 6
