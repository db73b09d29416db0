import json

import jsonschema
import pytest
from click.testing import CliRunner
from gmpy2 import mpfr

from conftest import FIXTURES, GOLDEN
from verlinde_tools import catalog, numerics
from verlinde_tools.cli_io import (
    InputWarning,
    fdata_from_dict,
    fusion_to_dict,
    load_fusion,
    load_modular,
    main,
    modular_from_dict,
    modular_to_dict,
    report_json,
    report_markdown,
    run_verify,
    save_modular,
    schema,
)
from verlinde_tools.fb_calculus import FB_CHECK_NAMES
from verlinde_tools.modular_data import InputError
from verlinde_tools.verlinde import fusion_table


def run(*args, env=None):
    return CliRunner().invoke(main, [str(a) for a in args], env=env)


@pytest.fixture
def ising_file(tmp_path):
    path = tmp_path / "ising.json"
    assert run("gen", "ising", "-o", path).exit_code == 0
    return path


def edit_json(path, change):
    doc = json.loads(path.read_text(encoding="utf-8"))
    change(doc)
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def flipped_fdata(tmp_path, name, section, key):
    doc = json.loads((FIXTURES / f"{name}_fdata.json").read_text(encoding="utf-8"))
    for entry in doc[section]:
        if (entry["a1"], entry["a2"], entry["a3"]) == key:
            re = entry["value"]["re"]
            entry["value"]["re"] = re[1:] if re.startswith("-") else "-" + re
    path = tmp_path / f"{name}_flipped.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# ------------------------------------------------------------------- loading


def test_su2_4_round_trips(tmp_path):
    md = catalog.gen_su2(4)
    path = tmp_path / "su2_4.json"
    save_modular(md, path)
    back = load_modular(path)
    assert back.labels == md.labels and back.dual == md.dual
    assert back.h == md.h and back.c == md.c
    assert back.precision_bits == md.precision_bits and back.source == md.source
    assert all(x == y for r1, r2 in zip(back.S, md.S) for x, y in zip(r1, r2))
    assert modular_to_dict(back) == modular_to_dict(md)


def test_unknown_label_in_fdata_is_named(fibonacci):
    doc = json.loads((FIXTURES / "fibonacci_fdata.json").read_text(encoding="utf-8"))
    doc["sigma12"][0]["a2"] = "x"
    with pytest.raises(InputError, match="'x'"):
        fdata_from_dict(doc, fibonacci)


def test_theory_mismatch_is_an_input_error(ising):
    doc = json.loads((FIXTURES / "fibonacci_fdata.json").read_text(encoding="utf-8"))
    with pytest.raises(InputError, match="does not match"):
        fdata_from_dict(doc, ising)


def test_non_reduced_weight_is_normalized_with_a_warning():
    doc = modular_to_dict(catalog.gen_ising())
    doc["h"]["epsilon"] = "2/4"
    with pytest.warns(InputWarning, match="normalized to '1/2'"):
        md = modular_from_dict(doc)
    assert modular_to_dict(md)["h"]["epsilon"] == "1/2"


def test_schema_violation_names_the_pointer():
    doc = modular_to_dict(catalog.gen_ising())
    doc["S"][1][2] = {"re": 0.5, "im": "0"}
    with pytest.raises(InputError, match="/S/1/2/re"):
        modular_from_dict(doc)


def test_short_decimals_warn_once():
    doc = modular_to_dict(catalog.gen_ising())
    doc["S"][0][2]["re"] = "0.70710678"
    with pytest.warns(InputWarning, match="1 decimal strings carry fewer than 78"):
        modular_from_dict(doc)


def test_precision_order(tmp_path, monkeypatch):
    path = tmp_path / "ising.json"
    save_modular(catalog.gen_ising(precision_bits=320), path)
    monkeypatch.delenv(numerics.PRECISION_ENV_VAR, raising=False)
    assert load_modular(path).precision_bits == 320
    monkeypatch.setenv(numerics.PRECISION_ENV_VAR, "200")
    assert load_modular(path).precision_bits == 200
    assert load_modular(path, 128).precision_bits == 128


def test_fusion_file_round_trips(tmp_path, ising):
    path = tmp_path / "fusion.json"
    path.write_text(json.dumps(fusion_to_dict(fusion_table(ising))), encoding="utf-8")
    assert load_fusion(path, ising).N == fusion_table(ising).N


# ------------------------------------------------------------------ pipeline


def test_ising_without_fdata_skips_only_the_fb_checks(ising):
    report = run_verify(ising)
    assert report.ok
    skipped = [c.name for c in report.checks if c.status == "skip"]
    assert skipped == ["fusion table matches Verlinde"] + list(FB_CHECK_NAMES)


def test_fibonacci_with_fixture_passes(fibonacci, fibonacci_ft):
    report = run_verify(fibonacci, fibonacci_ft)
    assert report.ok
    assert [c.name for c in report.checks if c.status == "skip"] == ["fusion table matches Verlinde"]


def test_check_order_is_fixed(ising, ising_ft):
    names = [c.name for c in run_verify(ising, ising_ft).checks]
    assert names.index("S is invertible") < names.index("S symmetric")
    assert names.index("vacuum row nonzero") < names.index("Verlinde integrality")
    assert names.index("eigenvalue ratio") < names.index("nonnegativity")
    assert names.index("associativity") < names.index(FB_CHECK_NAMES[0])


# ----------------------------------------------------------------------- CLI


def test_verify_ising_exits_zero(ising_file):
    result = run("verify", ising_file)
    assert result.exit_code == 0, result.output
    assert "result: PASS" in result.output


def test_verify_fibonacci_with_fixture(tmp_path):
    path = tmp_path / "fib.json"
    run("gen", "fibonacci", "-o", path)
    result = run("verify", path, "--fdata", FIXTURES / "fibonacci_fdata.json")
    assert result.exit_code == 0, result.output
    assert "[fail]" not in result.output and "[skip] first Moore-Seiberg" not in result.output


def test_perturbed_s_entry_exits_one(ising_file):
    edit_json(ising_file, lambda d: d["S"][2].__setitem__(2, {"re": "0.1", "im": "0"}))
    result = run("verify", ising_file)
    assert result.exit_code == 1
    assert "[fail] S² = dual permutation" in result.output
    assert "S² not a permutation" in result.output


def test_flipped_sigma_exits_one(tmp_path, ising_file):
    bad = flipped_fdata(tmp_path, "ising", "sigma12", ("sigma", "sigma", "epsilon"))
    result = run("verify", ising_file, "--fdata", bad)
    assert result.exit_code == 1
    assert "[fail] fusing inverse symmetry" in result.output


def test_bumped_fusion_integer_exits_one(tmp_path, ising_file):
    fusion = tmp_path / "fusion.json"
    assert run("fuse", ising_file, "-o", fusion).exit_code == 0

    def bump(doc):
        doc["N"].append({"a1": "sigma", "a2": "sigma", "a3": "sigma", "n": 1})

    edit_json(fusion, bump)
    result = run("verify", ising_file, "--fusion", fusion)
    assert result.exit_code == 1
    assert "[fail] fusion table matches Verlinde" in result.output
    assert "witness (sigma, sigma, sigma)" in result.output


@pytest.mark.parametrize(
    "args",
    [
        ("verify", "missing.json"),
        ("gen", "su2"),
        ("gen", "minimal", "--p", "2", "--q", "4"),
        ("verify", "{ising}", "--precision-bits", "8"),
    ],
)
def test_input_errors_exit_two(args, ising_file):
    result = run(*(a.format(ising=ising_file) for a in args))
    assert result.exit_code == 2
    assert "error:" in result.output


def test_schema_violation_exits_two(ising_file):
    edit_json(ising_file, lambda d: d.pop("vacuum"))
    result = run("verify", ising_file)
    assert result.exit_code == 2
    assert "vacuum" in result.output


def test_warnings_reach_the_report(ising_file):
    edit_json(ising_file, lambda d: d["h"].__setitem__("epsilon", "2/4"))
    result = run("verify", ising_file)
    assert result.exit_code == 0
    assert "## Warnings" in result.output and "normalized to '1/2'" in result.output


def test_env_var_and_flag_precision(ising_file):
    env = {numerics.PRECISION_ENV_VAR: "300"}
    assert "precision: 300 bits" in run("verify", ising_file, env=env).output
    assert "precision: 200 bits" in run("verify", ising_file, "--precision-bits", 200, env=env).output


def test_fuse_writes_the_table(ising_file):
    result = run("fuse", ising_file)
    doc = json.loads(result.stdout)
    assert {"a1": "sigma", "a2": "sigma", "a3": "epsilon", "n": 1} in doc["N"]
    assert len(doc["eigenvalues"]["sigma"]) == 3


def test_catalog_list():
    out = run("catalog", "list").output
    assert "su2        --level K" in out
    assert "minimal(p=3, q=4)" in out


# ------------------------------------------------------------------- reports


def test_reports_are_byte_identical(tmp_path, ising_file):
    paths = [tmp_path / f"r{i}.md" for i in range(2)]
    for path in paths:
        assert run("verify", ising_file, "--fdata", FIXTURES / "ising_fdata.json", "--report", path).exit_code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_json_report_validates(ising, ising_ft):
    doc = json.loads(report_json(run_verify(ising, ising_ft)))
    jsonschema.validate(doc, schema("report"))
    assert all(c["residual"] == "" or len(c["residual"].split("e")[0].replace("-", "").replace(".", "")) == 30 for c in doc["checks"])


def test_unwritable_report_path_exits_two(tmp_path, ising_file):
    result = run("verify", ising_file, "--report", tmp_path / "no" / "such" / "dir.md")
    assert result.exit_code == 2


def test_ising_markdown_matches_golden(ising, ising_ft):
    text = report_markdown(run_verify(ising, ising_ft))
    golden = (GOLDEN / "ising_report.md").read_text(encoding="utf-8")
    assert text == golden
    line = next(l for l in text.splitlines() if "diagonalization (Eq. diag2)" in l)
    residual = line.split("residual ")[1]
    assert mpfr(residual) <= 1e-18
