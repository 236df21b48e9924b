from __future__ import annotations

import io
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from canardkit.cli import main
from canardkit.cli.schema import validate
from canardkit.system import FIXTURES, SystemFileError, parse_system


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write


# --- system files -------------------------------------------------------------

def test_fixture_text_round_trip():
    for sys_ in FIXTURES.values():
        again = parse_system(sys_.to_text(), sys_.name)
        assert again == sys_


@pytest.mark.parametrize("text, line", [
    ("X0 = x ; 0\n", None),  # missing X1
    ("X0 = x ; 0\nX1 = 1 ; 0\nfoo = 1\n", 3),
    ("X0 = x ; 0\nX0 = y ; 0\nX1 = 1 ; 0\n", 2),
    ("X0 = x\nX1 = 1 ; 0\n", 1),
    ("X0 = x ; 0\nX1 = 1 ; 0\nweights = 1,0,4\n", 3),
    ("X0 = x ; 0\nX1 = 1 ; 0\nbox = 1,-1,0,1\n", 3),
    ("X0 = x ; 0\nX1 = 1 ; 0\nepsilon = -1\n", 3),
    ("X0 = 2x ; 0\nX1 = 1 ; 0\n", 1),
    ("just words\n", 1),
])
def test_system_file_errors(text, line):
    with pytest.raises(SystemFileError) as err:
        parse_system(text)
    assert err.value.line == line


def test_comments_and_blank_lines():
    s = parse_system("# a system\n\nX0 = x*y ; 0   # fast\nX1 = 1 ; 1/2\nepsilon = 1e-2\n")
    assert s.X0_src == ("x*y", "0") and s.epsilon == 1e-2


# --- analyze ------------------------------------------------------------------

def test_analyze_transcritical():
    code, out, _ = run("analyze", "transcritical")
    assert code == 0
    doc = json.loads(out)
    validate(doc)
    assert doc["command"] == "analyze" and doc["schema"] == 1
    (rep,) = doc["canard"]
    wedges = {b["poly"]: b["wedge"] for b in rep["branches"]}
    assert wedges == {"x + 2*y": "2", "x + y": "3/2", "x - 2*y": "0", "x - y": "1/2"}
    assert [b["poly"] for b in rep["branches"] if b["is_canard"]] == ["x - 2*y"]


def test_analyze_is_deterministic():
    a, b = run("analyze", "pitchfork")[1], run("analyze", "pitchfork")[1]
    assert a == b
    s1, s2 = run("analyze", "pitchfork", "--format", "svg")[1], run("analyze", "pitchfork", "--format", "svg")[1]
    assert s1 == s2
    ET.fromstring(s1.encode())


def test_analyze_reads_files_and_writes_out(write, tmp_path):
    path = write("t.txt", FIXTURES["transcritical"].to_text())
    out_path = tmp_path / "report.json"
    code, out, _ = run("analyze", path, "--out", str(out_path))
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["system"]["name"] == "t"


def test_analyze_assumption_violation(write):
    path = write("z.txt", "X0 = (y-x)*(y+x)*(y-x/2)*(y+x/2) ; 0\nX1 = x ; y\n")
    code, out, _ = run("analyze", path)
    assert code == 2
    doc = json.loads(out)
    assert any("X1" in w for w in doc["warnings"])


def test_analyze_even_multiplicity(write):
    path = write("e.txt", "X0 = (y-x)^2*(y+x) ; 0\nX1 = 1 ; 0\n")
    assert run("analyze", path)[0] == 2


def test_analyze_regular_system(write):
    path = write("r.txt", "X0 = y ; -x\nX1 = 1 ; 0\n")
    code, out, _ = run("analyze", path)
    assert code == 0
    assert json.loads(out)["critical_set"]["verdict"] == "not singular"


def test_missing_file_and_syntax_error(write):
    code, _, err = run("analyze", "/nonexistent/system.txt")
    assert code == 1 and "cannot read" in err
    path = write("bad.txt", "X0 = x + ; 0\nX1 = 1 ; 0\n")
    code, _, err = run("analyze", path)
    assert code == 1 and "line 1" in err


def test_usage_errors():
    assert run()[0] == 1
    assert run("analyze")[0] == 1
    assert run("simulate", "transcritical", "--q0", "1")[0] == 1


# --- blowup -------------------------------------------------------------------

@pytest.mark.parametrize("view", ["charts", "sphere", "equator", "connect"])
def test_blowup_views(view):
    code, out, _ = run("blowup", "transcritical", view)
    assert code == 0
    doc = json.loads(out)
    validate(doc)
    assert doc["blowup"]["weights"] == [1, 1, 4]


def test_blowup_equator_angles():
    doc = json.loads(run("blowup", "pitchfork", "equator")[1])
    assert len(doc["blowup"]["equator"]) == 6
    assert doc["blowup"]["division_exponent"] == 3


def test_blowup_bad_weights_structured_error():
    code, out, _ = run("blowup", "transcritical", "charts", "--weights", "1,1,1")
    assert code == 2
    doc = json.loads(out)
    assert doc["error"]["type"] == "BlowupError"
    assert doc["error"]["component"] == "u'"


def test_blowup_svg_deterministic():
    a = run("blowup", "pitchfork", "connect", "--format", "svg")[1]
    b = run("blowup", "pitchfork", "connect", "--format", "svg")[1]
    assert a == b
    root = ET.fromstring(a.encode())
    assert root.tag.endswith("svg")


# --- simulate -----------------------------------------------------------------

def test_simulate_zero_time_csv():
    code, out, _ = run("simulate", "transcritical", "--t-end", "0", "--format", "csv")
    assert code == 0 and out == "t,x,y,event\n"


def test_simulate_negative_time():
    assert run("simulate", "transcritical", "--t-end", "-1")[0] == 1


def test_simulate_metric_ratio():
    code, out, _ = run("simulate", "transcritical", "--tube", "1e-2", "--eps", "1e-3")
    assert code == 0
    sim = json.loads(out)["simulation"]
    validate(json.loads(out))
    assert sim["canard_metric"] > 0.5
    ratio = sim["metric_ratio"]
    assert ratio == "inf" or ratio >= 5
    assert [s["angle"] for s in sim["rotation_sweep"]] == [0.1, -0.1, 0.3, -0.3]


def test_simulate_euler_and_shadowing():
    code, out, _ = run("simulate", "transcritical", "--euler", "--delta", "1e-2", "--t-end", "50",
                       "--angles", "0.3", "--delta-sweep", "1e-2,5e-3")
    assert code == 0
    sim = json.loads(out)["simulation"]
    assert sim["mode"] == "euler"
    assert 1.6 <= sim["shadowing"]["ratios"][0] <= 2.4


def test_simulate_svg_and_csv():
    svg = run("simulate", "transcritical", "--t-end", "100", "--format", "svg")[1]
    ET.fromstring(svg.encode())
    csv = run("simulate", "transcritical", "--t-end", "100", "--format", "csv")[1]
    assert csv.startswith("t,x,y,event\n") and csv.count("\n") > 2


# --- circle lemma and verify-paper ------------------------------------------------

def test_circle_lemma_command():
    code, out, _ = run("circle-lemma", "--k", "1,2")
    assert code == 0
    rows = json.loads(out)["circle_lemma"]
    assert [r["k"] for r in rows] == [1, 2]
    assert abs(rows[0]["psi_star"][0] - 2.542826) < 1e-6
    assert run("circle-lemma", "--k", "0")[0] == 1


def test_verify_paper_passes(tmp_path):
    out_path = tmp_path / "v.json"
    code, out, _ = run("verify-paper", "--out", str(out_path))
    assert code == 0
    assert out.rstrip().endswith("12/12 checks passed")
    doc = json.loads(out_path.read_text())
    validate(doc)
    assert all(c["passed"] for c in doc["checks"])


def test_verify_paper_detects_perturbation(write):
    path = write("p.txt", "X0 = (y-x)*(y+x)*(y-x/2)*(y+x/2) ; 0\nX1 = 1 ; 51/100\nweights = 1,1,4\n")
    code, out, _ = run("verify-paper", "--transcritical", path)
    assert code == 1
    failed = {ln.split()[1] for ln in out.splitlines() if ln.startswith("FAIL")}
    assert "T-canard" in failed
    assert "P-canard" not in failed


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "canardkit", "circle-lemma", "--k", "1"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0
    assert json.loads(r.stdout)["command"] == "circle-lemma"


def test_hemisphere_marks_ten_equator_points():
    svg = run("blowup", "transcritical", "equator", "--format", "svg")[1]
    ns = {"s": "http://www.w3.org/2000/svg"}
    marks = [c for c in ET.fromstring(svg.encode()).findall("s:circle", ns) if c.get("r") == "4"]
    assert len(marks) == 10
