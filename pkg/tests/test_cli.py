"""CLI behaviour against golden outputs.

Set PHASELAB_REGEN_GOLDEN=1 to rewrite the files under tests/golden/.
"""
from __future__ import annotations

import io
import json
import os
from pathlib import Path

import pytest

from phaselab.cli import main
from phaselab.dsl import load_phase
from phaselab.fixtures import fixture_path

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("PHASELAB_REGEN_GOLDEN") == "1"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def fp(name):
    return fixture_path(name)


GOLDEN_CASES = {
    "validate_max3": ("validate", fp("max3")),
    "analyze_max3": ("analyze", fp("max3")),
    "analyze_pair4": ("analyze", fp("pair4")),
    "analyze_sep4": ("analyze", fp("sep4")),
    "analyze_t1": ("analyze", fp("t1")),
    "hom_max3_lax": ("hom", fp("max3"), fp("max3"), "--mode", "lax", "--count"),
    "hom_pair4_list": ("hom", fp("pair4"), fp("pair4"), "--list"),
    "iso_max3_pair4": ("iso", fp("max3"), fp("pair4")),
    "iso_pair4_pair4": ("iso", fp("pair4"), fp("pair4")),
    "boundary_max3": ("boundary", fp("max3")),
    "boundary_pair4": ("boundary", fp("pair4")),
    "complete_pair4": ("complete", fp("pair4")),
    "collapse_max3_1": ("collapse", fp("max3"), "--depth", "1"),
    "profile_max3": ("profile", fp("max3"), "--max-size", "2"),
    "twocat_battery": ("twocat-check", fp("t1"), fp("pair4_ordered")),
    "check_rigidity_pair4": ("check", "--theorem", "RIGIDITY", fp("pair4")),
    "check_rigidity_sep4": ("check", "--theorem", "RIGIDITY", fp("sep4")),
    "check_subphase": ("check", "--theorem", "SUBPHASE", fp("t1"), fp("max3")),
    "check_gen_layers_max3": ("check", "--theorem", "GEN-LAYERS", fp("max3")),
    "mine_subphase_2": ("mine", "--theorem", "SUBPHASE", "--size", "2"),
    "mine_rigidity_2": ("mine", "--theorem", "RIGIDITY", "--size", "2"),
}


@pytest.mark.parametrize("case", sorted(GOLDEN_CASES))
def test_golden(case):
    code, out, _ = run(*GOLDEN_CASES[case])
    path = GOLDEN / f"{case}.txt"
    text = f"exit {code}\n{out}"
    if REGEN:
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(text, encoding="utf-8")
    assert text == path.read_text(encoding="utf-8")


def test_analyze_contains_depths():
    code, out, _ = run("analyze", fp("max3"))
    assert code == 0 and '"k":2' in out and '"d_gen":0' in out


def test_hom_count_default():
    assert run("hom", fp("max3"), fp("max3"), "--mode", "lax")[:2] == (0, "5\n")
    assert run("hom", fp("max3"), fp("max3"))[:2] == (0, "1\n")


def test_broken_file_reports_span(tmp_path):
    bad = tmp_path / "broken.phase"
    bad.write_text("phase B {\n  elements: a b;\n  defect: a=0 b=0;\n  op m/2 { a a = a; a b = b; b a = a; }\n}\n")
    code, out, err = run("validate", bad)
    assert code == 2 and out == ""
    assert err.startswith("MissingTuple at 4:")


def test_missing_file_and_usage_errors(tmp_path):
    assert run("validate", tmp_path / "nope.phase")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("check", "--theorem", "NOPE", fp("t1"))[0] == 2
    assert run("collapse", fp("max3"), "--depth", "5")[0] == 2


def test_budget_exit_code():
    code, _, err = run("hom", fp("pair4"), fp("pair4"), "--mode", "lax", "--budget", "2")
    assert code == 3 and "budget" in err


def test_counterexample_exit_code():
    assert run("check", "--theorem", "GEN-LAYERS", fp("max3"))[0] == 1
    assert run("check", "--theorem", "GEN-LAYERS", fp("sep4"))[0] == 0


def test_output_files(tmp_path):
    target = tmp_path / "bd.phase"
    code, out, _ = run("boundary", fp("pair4"), "-o", target)
    assert code == 0 and json.loads(out)["n"] == 3
    assert load_phase(target).n == 3
    target = tmp_path / "cpl.phase"
    code, out, _ = run("complete", fp("pair4"), "-o", target)
    assert json.loads(out)["complete"] is False
    assert load_phase(target).digest == json.loads(out)["completed_digest"]


def test_enumerate_writes_manifest(tmp_path):
    code, out, _ = run("enumerate", "--size", "2", "--max-defect", "0", "--out", tmp_path)
    assert code == 0
    assert json.loads(out) == {"count": 10, "max_defect": 0, "raw_count": 16, "size": 2}
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest["phases"]) == 10
    for entry in manifest["phases"]:
        assert load_phase(tmp_path / entry["file"]).digest == entry["digest"]


def test_mine_is_byte_identical_across_workers():
    args = ("mine", "--theorem", "LOCALIZATION", "--size", "2", "--sample", "10")
    assert run(*args, "--workers", "1")[1] == run(*args, "--workers", "4")[1]
