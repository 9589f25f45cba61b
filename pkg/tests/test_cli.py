import subprocess
import sys

import pytest

from tropconf.builtins import builtin_names, resolve_map, validate_builtins
from tropconf.cli import main, parse_scenario, run_scenario
from tropconf.errors import ScenarioError
from tropconf.report import CSV_HEADER, emit_table
from tropconf.ultra import differentiability_report, pl_orbit


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_builtins_validate():
    validate_builtins()
    assert {"autonomous", "ud-autonomous", "qp1-sigma0", "udp1-sigma2"} <= set(builtin_names())


def test_confine_ultra_exit_zero(capsys):
    code, out, _ = run(capsys, "confine-ultra", "--map", "ud-autonomous", "--init", "W0=3",
                       "--perturb", "W1@0", "--steps", "8")
    assert code == 0 and "verdict: confined at 3" in out


def test_confine_discrete_exit_zero(capsys):
    code, out, _ = run(capsys, "confine-discrete", "--map", "autonomous", "--perturb", "w1@-1",
                       "--free", "w0=2,3", "--steps", "8")
    assert code == 0 and "verdict: confined at 3" in out


def test_correspond_reports_divergence(capsys):
    code, out, _ = run(capsys, "correspond", "--map", "autonomous", "--init", "W0=-5/2",
                       "--lift", "W1=-1", "--steps", "6")
    assert code == 1
    assert "scalar sequence first diverges at n = 2" in out


def test_not_confined_exit_one(tmp_path, capsys):
    f = tmp_path / "m.map"
    f.write_text("vars: x, y\nx' = y\ny' = x/y^2\n")
    code, out, _ = run(capsys, "confine-discrete", "--map", str(f), "--perturb", "y@0",
                       "--free", "x=2,3", "--steps", "5")
    assert code == 1 and "not confined" in out


def test_errors_exit_two_with_position(tmp_path, capsys):
    f = tmp_path / "bad.map"
    f.write_text("vars: x\nx' = (x\n")
    code, out, err = run(capsys, "parse", str(f))
    assert code == 2 and out == ""
    assert "line 2, column 8" in err
    code, _, err = run(capsys, "confine-discrete", "--map", "autonomous", "--perturb", "q@0",
                       "--free", "x=2,3")
    assert code == 2 and "unknown coordinate" in err


def test_parse_and_trop_print_maps(capsys):
    code, out, _ = run(capsys, "trop", "udp1-sigma2")
    assert code == 0 and "Y' = max(A + T + Y, 0) - (X + 2*Y)" in out
    code, out, _ = run(capsys, "parse", "autonomous")
    assert "y' = (y + 1)/x" in out


def test_orbit_and_root_check_commands(capsys):
    code, out, _ = run(capsys, "orbit", "--map", "ud-autonomous", "--init", "X=1,Y=-2",
                       "--steps", "5", "--format", "csv")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == ",".join(CSV_HEADER) and rows[-2:] == ["5,X,,1,", "5,Y,,-2,"]
    code, out, _ = run(capsys, "lemma3", "--map", "autonomous", "--init", "W0=2", "--free", "W1",
                       "--steps", "5")
    assert code == 0 and "| 3 |" in out and "{2, -inf}" in out


def test_check_limit(capsys):
    code, out, _ = run(capsys, "check-limit", "--expr", "x + x", "--at", "x=0", "--eps", "0.1")
    assert code == 0 and "0.0693147" in out


def test_scenario_files_and_batch_order(tmp_path, capsys):
    a = tmp_path / "a.scn"
    a.write_text("# ultra\nmap = ud-autonomous\nanalysis = confine-ultra\nW0 = -2\n"
                 "perturb = W1@0\nsteps = 6\n")
    b = tmp_path / "b.scn"
    b.write_text("map = qp1\nsigma = 1\nanalysis = confine-discrete\nperturb = y@0\n"
                 "free = x=2,3\nT0 = 1\nA = 1\nQ = 2\nsteps = 6\n")
    code, out, _ = run(capsys, "run", str(a), str(b))
    assert code == 0
    assert out.index(str(a)) < out.index("confined at 4") < out.index(str(b))
    code2, out2, _ = run(capsys, "run", str(a), str(b))
    assert out2 == out


def test_determinism_across_processes(tmp_path):
    s = tmp_path / "s.scn"
    s.write_text("map = autonomous\nanalysis = lemma3\nW0 = 2\nfree = W1\nformat = csv\n")
    outs = [subprocess.run([sys.executable, "-m", "tropconf", "run", str(s)],
                           capture_output=True, check=True).stdout for _ in range(2)]
    assert outs[0] == outs[1] and outs[0].startswith(b"step,coordinate,branch,value,flag\n")


def test_batch_error_does_not_stop_others(tmp_path, capsys):
    good = tmp_path / "g.scn"
    good.write_text("map = autonomous\nanalysis = orbit\nx = 1\ny = 2\nsteps = 2\n")
    code, out, err = run(capsys, "run", str(tmp_path / "missing.scn"), str(good))
    assert code == 2 and "missing.scn" in err and "| 2 |" in out


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        parse_scenario("map = autonomous\nanalysis = dance\n")
    with pytest.raises(ScenarioError):
        parse_scenario("analysis = orbit\n")
    with pytest.raises(ScenarioError):
        parse_scenario("map = autonomous\nanalysis = orbit\nformat = xml\n")
    s = parse_scenario("map = autonomous  # eq\nanalysis = orbit\nx = 1\ny = 1\n")
    report, code = run_scenario(s)
    assert code == 0 and len(report.states) == 11


def test_empty_report_is_header_only():
    assert emit_table(None, "csv") == "step,coordinate,branch,value,flag\n"
    assert emit_table([], "csv") == "step,coordinate,branch,value,flag\n"


def test_jet_table_layout():
    phi = resolve_map("ud-autonomous")[1]
    rep = differentiability_report(phi, {"X": 3, "Y": 0}, "Y", 5)
    md = emit_table(rep, "md", shift_form=True).splitlines()
    assert md[0] == "| n | delta=0 | delta>0 | delta<0 | ND |"
    body = [line for line in md[2:] if line.startswith("| ")]
    assert len(body) == 7
    assert body[2] == "| 2 | -3 | -3 + d | -3 | ND |"
    csv_rows = emit_table(rep, "csv").splitlines()
    assert len(csv_rows) == 1 + 6 * 2 * 3
    assert "1,Y,+,-3 + d,ND" in csv_rows and "1,Y,-,-3,ND" in csv_rows


def test_root_check_nd_column(capsys):
    code, out, _ = run(capsys, "lemma3", "--map", "autonomous", "--init", "W0=2", "--free", "W1",
                       "--steps", "5")
    rows = [line.split(" | ") for line in out.splitlines() if line[:3] in {f"| {n}" for n in range(7)}]
    assert [r[3] for r in rows] == ["{}", "{-inf}", "{0}", "{2, -inf}", "{-inf}", "{}", "{-inf}"]


def test_pl_rendering_uses_exact_rationals():
    phi = resolve_map("ud-autonomous")[1]
    f = pl_orbit(phi, "Y", {"X": "7/3"}, 2)[2][1]
    assert "7/3" in str(f)


def test_init_flag_accepts_indexed_names(capsys):
    code, out, _ = run(capsys, "correspond", "--map", "udp1", "--sigma", "1",
                       "--init", "W0=-5/2,W1=-1,T0=0", "--param", "A=0,Q=1", "--steps", "4")
    assert code == 0 and "| 5 | 1 | 1 |" in out
    code, _, err = run(capsys, "orbit", "--map", "autonomous", "--init", "Z0=1")
    assert code == 2 and "'Z0'" in err


def test_unit_power_prints_plainly(capsys):
    _, out, _ = run(capsys, "trop", "qp1", "--sigma", "1")
    assert "- (X + Y)" in out
