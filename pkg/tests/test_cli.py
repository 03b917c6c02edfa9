import io
import json
import subprocess
import sys

import jsonschema
import pytest

from fmr.cli import main
from fmr.report import load_schema


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def avg(programs_dir):
    return str(programs_dir / "t_avg.fmrprog")


def test_analyze_json(avg):
    code, out, _ = run("analyze", avg, "--target", "o=f", "--variant", "practical", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, load_schema())
    assert rep["scenarios"] == [[{"var": "i1", "mode": "l"}], [{"var": "i2", "mode": "l"}]]


def test_analyze_json_byte_stable(avg):
    outs = {run("analyze", avg, "--target", "o=f", "--format", "json")[1] for _ in range(3)}
    assert len(outs) == 1


def test_analyze_text_and_options(avg, programs_dir):
    code, out, _ = run("analyze", avg, "--target", "o=t", "--label", "ST")
    assert code == 0 and out.startswith("target o=t [ST]") and "i1=h" in out
    code, out, _ = run("analyze", str(programs_dir / "t_or.fmrprog"), "--target", "o=f")
    assert "i1=l & i2=l" in out
    code, out, _ = run("analyze", str(programs_dir / "t_or.fmrprog"), "--target", "o=f",
                       "--variant", "theoretical", "--include-uncertain", "--no-prune-match", "--format", "json")
    rep = json.loads(out)
    assert rep["options"] == {"fmb_variant": "theoretical", "include_uncertain": True, "prune_match": False}
    assert rep["scenarios"] == [[{"var": "i1", "mode": "l"}], [{"var": "i2", "mode": "l"}]]


def test_quantify(avg, tmp_path):
    data = tmp_path / "data.json"
    data.write_text(json.dumps({"i1": {"l": 1e-3}, "i2": {"l": 1e-3}}))
    code, out, _ = run("quantify", avg, "--target", "o=f", "--data", str(data), "--format", "json")
    assert code == 0
    q = json.loads(out)["quantification"]
    assert abs(q["rare_event"] - 2.0e-3) < 1e-12 and abs(q["exact"] - 1.999e-3) < 1e-12
    code, out, _ = run("quantify", avg, "--target", "o=f", "--data", str(data))
    assert "rare-event: 0.002" in out and "exact:      0.001999" in out
    code, out, _ = run("quantify", avg, "--target", "o=f", "--data", str(data), "--method", "rare_event",
                       "--format", "json")
    assert json.loads(out)["quantification"]["exact"] is None


def test_quantify_missing_data_entry(avg, tmp_path):
    data = tmp_path / "data.json"
    data.write_text(json.dumps({"i1": {"l": 1e-3}}))
    code, _, err = run("quantify", avg, "--target", "o=f", "--data", str(data))
    assert code == 1 and "i2=l" in err


def test_explain(avg):
    code, out, _ = run("explain", avg, "--target", "o=f")
    assert code == 0
    assert "{i1=l} avg1:Avg {w=l}" in out and "{w=l} cmp1:Gcom {o=f}" in out


def test_manifest(avg, programs_dir):
    man = str(programs_dir / "t_avg.manifest")
    code, out, _ = run("analyze", avg, "--manifest", man, "--format", "json")
    reps = json.loads(out)
    assert code == 0 and [r["label"] for r in reps] == ["DU", "ST"]
    for r in reps:
        jsonschema.validate(r, load_schema())
    code, out, _ = run("analyze", avg, "--manifest", man)
    assert "target o=f [DU]" in out and "target o=t [ST]" in out


def test_bad_manifest(avg, tmp_path):
    man = tmp_path / "m.txt"
    man.write_text("o=f DU\nbogus\n")
    code, _, err = run("analyze", avg, "--manifest", str(man))
    assert code == 1 and f"{man}:2:1:" in err


def test_verify_fmb():
    code, out, _ = run("verify-fmb")
    assert code == 0 and "9/9 blocks sound and complete" in out
    code, out, _ = run("verify-fmb", "And", "--format", "json")
    assert json.loads(out)["passed"] == 1


def test_verify_fmb_broken_table(tmp_path):
    p = tmp_path / "gcom.fmb"
    p.write_text("fmbtable v1\nkind Gcom : real -> bool threshold\nl -> m,f\nm -> m,t\nh -> m,t\n")
    code, out, _ = run("verify-fmb", "--fmb", str(p))
    assert code == 1 and "unsound" in out and "0/1" in out
    p.write_text("fmbtable v1\nkind Avg : real real -> real\nl l -> l\n")
    code, out, _ = run("verify-fmb", "--fmb", str(p))
    assert code == 1 and "incomplete" in out


def test_program_diagnostics(tmp_path):
    p = tmp_path / "bad.fmrprog"
    p.write_text("fmrprog v1\ninput a : real\noutput o : bool\nblock c: o = Mul(a)\n")
    code, out, err = run("analyze", str(p), "--target", "o=f")
    assert code == 1 and out == ""
    assert err.startswith(f"{p}:4:") and "unknown block kind 'Mul'" in err


def test_fmb_file_extends_catalog(tmp_path):
    tables = tmp_path / "neg.fmb"
    tables.write_text("fmbtable v1\nkind Neg : real -> real\nl -> h\nm -> m\nh -> l\n")
    prog = tmp_path / "p.fmrprog"
    prog.write_text("fmrprog v1\ninput a : real\ninternal n : real\noutput o : bool\n"
                    "block g: n = Neg(a)\nblock c: o = Gcom[K=0](n)\n")
    code, out, _ = run("analyze", str(prog), "--target", "o=f", "--fmb", str(tables))
    assert code == 0 and "a=h" in out
    tables.write_text("fmbtable v1\nkind Neg : real -> real\nl -> q\n")
    code, _, err = run("analyze", str(prog), "--target", "o=f", "--fmb", str(tables))
    assert code == 1 and f"{tables}:3:" in err


@pytest.mark.parametrize("argv", [
    ["analyze"],
    ["analyze", "PROG"],
    ["analyze", "PROG", "--target", "o"],
    ["analyze", "PROG", "--target", "o=f", "--variant", "fancy"],
    ["analyze", "/nonexistent.fmrprog", "--target", "o=f"],
    ["quantify", "PROG", "--target", "o=f"],
    ["frobnicate"],
])
def test_usage_errors(argv, avg):
    argv = [avg if a == "PROG" else a for a in argv]
    code, _, _ = run(*argv)
    assert code == 2


def test_analysis_errors(avg):
    assert run("analyze", avg, "--target", "o=h")[0] == 1
    assert run("analyze", avg, "--target", "w=l")[0] == 1
    assert run("analyze", avg, "--target", "zz=l")[0] == 1


def test_grid_delta_env_var(monkeypatch):
    monkeypatch.setenv("FMR_GRID_DELTA", "0")
    code, _, err = run("verify-fmb", "Avg")
    assert code == 1 and "FMR_GRID_DELTA" in err
    monkeypatch.setenv("FMR_GRID_DELTA", "0.125")
    assert run("verify-fmb", "Gcom")[0] == 0


def test_console_script(avg):
    proc = subprocess.run([sys.executable, "-m", "fmr.cli", "analyze", avg, "--target", "o=f"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "i1=l" in proc.stdout
