"""Command-line behavior: schemas, determinism, exit codes."""

import json
import shutil
import subprocess
import sys

import pytest

from fgfflab.cli import main


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_verify_battery_passes(capsys):
    code, out, _err = run_cli(capsys, ["verify"])
    assert code == 0
    assert out.startswith("#schema=verify@1\n")
    lines = out.strip().split("\n")
    body = lines[2:]  # schema comment, then header
    assert body
    assert all(",PASS," in line for line in body)


def test_constants_square_lattice(capsys):
    code, out, _err = run_cli(capsys, ["constants", "--lattice", "z2"])
    assert code == 0
    assert out.startswith("#schema=constants@1\n")
    kinds = [line.split(",")[0] for line in out.strip().split("\n")[2:]]
    assert kinds == ["z2", "z2-degenerate", "z2-single-site"]
    for line in out.strip().split("\n")[2:]:
        delta = abs(float(line.split(",")[3]))
        assert delta < 1e-12


def test_constants_triangular_value(capsys):
    code, out, _err = run_cli(capsys, ["constants", "--lattice", "tri"])
    assert code == 0
    value = float(out.strip().split("\n")[2].split(",")[1])
    assert f"{value:.4f}" == "0.2241"


def test_constants_ledger_mode(capsys):
    code, out, _err = run_cli(capsys, ["constants", "--lattice", "z2", "--ledger"])
    assert code == 0
    assert out.startswith("#schema=constants-ledger@1\n")
    assert len(out.strip().split("\n")) == 2 + 8


def test_height_prob_two_routes_agree(capsys):
    code, out, _err = run_cli(
        capsys, ["height-prob", "--box", "3x3", "--points", "1,1"]
    )
    assert code == 0
    rows = out.strip().split("\n")[2:]
    vals = {r.split(",")[0]: float(r.split(",")[1]) for r in rows}
    assert vals["paths-delta"] < 1e-12
    assert 0.0 < vals["inclusion-exclusion"] < 1.0


def test_cumulants_both_paths(capsys):
    code, out, _err = run_cli(
        capsys,
        ["cumulants", "--box", "5x5", "--points", "1,1;3,3",
         "--field", "neg-degree"],
    )
    assert code == 0
    rows = out.strip().split("\n")[2:]
    assert len(rows) == 3
    delta = float(rows[-1].split(",")[3])
    assert delta < 1e-12
    assert all(r.split(",")[0] == "neg_degree" for r in rows)


def test_cumulants_single_path(capsys):
    code, out, _err = run_cli(
        capsys,
        ["cumulants", "--box", "5x5", "--points", "1,1;3,3", "--path", "closed"],
    )
    assert code == 0
    rows = out.strip().split("\n")[2:]
    assert len(rows) == 1


def test_sample_chain_is_byte_identical(capsys):
    argv = ["sample", "--box", "3x3", "--sampler", "chain",
            "--steps", "20000", "--seed", "9"]
    _code, out_a, _ = run_cli(capsys, argv)
    _code, out_b, _ = run_cli(capsys, argv)
    assert out_a == out_b
    assert out_a.startswith("#schema=sample@1\n")
    _code, out_c, _ = run_cli(capsys, argv[:-1] + ["10"])
    assert out_c != out_a


def test_sample_chain_reports_zscores(capsys):
    code, out, _err = run_cli(
        capsys,
        ["sample", "--box", "3x3", "--sampler", "chain",
         "--steps", "50000", "--seed", "2"],
    )
    assert code == 0
    header = out.strip().split("\n")[1].split(",")
    assert header == ["vertex", "coord", "freq", "stderr", "reference", "zscore"]
    rows = out.strip().split("\n")[2:]
    assert len(rows) == 9
    assert all(abs(float(r.split(",")[5])) < 5.0 for r in rows)


def test_sample_wilson(capsys):
    code, out, _err = run_cli(
        capsys,
        ["sample", "--box", "4x4", "--sampler", "wilson",
         "--steps", "5000", "--seed", "3"],
    )
    assert code == 0
    rows = out.strip().split("\n")[2:]
    assert len(rows) == 4  # interior star edges of the most central vertex
    assert all(abs(float(r.split(",")[4])) < 5.0 for r in rows)


def test_scaling_sweep_mode(capsys):
    code, out, _err = run_cli(
        capsys,
        ["scaling", "--points=-0.3,0;0.3,0", "--eps", "1/8,1/12",
         "--field", "neg-degree"],
    )
    assert code == 0
    assert out.startswith("#schema=scaling@1\n")
    rows = out.strip().split("\n")[2:]
    assert len(rows) == 2
    assert float(rows[0].split(",")[0]) > float(rows[1].split(",")[0])


def test_scaling_smeared_mode(capsys):
    code, out, _err = run_cli(
        capsys,
        ["scaling", "--bumps=-0.45,0,0.2,1;0.45,0,0.2,1", "--eps", "1/12",
         "--field", "neg-degree", "--nodes", "3"],
    )
    assert code == 0
    assert out.startswith("#schema=scaling-smeared@1\n")


def test_jsonl_format(capsys):
    code, out, _err = run_cli(
        capsys, ["constants", "--lattice", "z2", "--format", "jsonl"]
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert json.loads(lines[0]) == {"schema": "constants@1"}
    for line in lines[1:]:
        rec = json.loads(line)
        assert "kind" in rec and "value" in rec


def test_out_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "verify.csv"
    code, out, _err = run_cli(capsys, ["verify", "--out", str(target)])
    assert code == 0
    assert out == ""
    assert target.read_text().startswith("#schema=verify@1\n")


def test_usage_errors_exit_two(capsys):
    # missing required box for a hypercubic lattice
    code, _out, err = run_cli(capsys, ["height-prob", "--points", "1,1"])
    assert code == 2
    assert "usage error" in err
    # box dimension mismatch
    code, _out, err = run_cli(
        capsys, ["height-prob", "--lattice", "z3", "--box", "3x3",
                 "--points", "1,1"]
    )
    assert code == 2
    # coordinates outside the box
    code, _out, err = run_cli(
        capsys, ["height-prob", "--box", "3x3", "--points", "7,7"]
    )
    assert code == 2
    # adjacent vertices are not a good family
    code, _out, err = run_cli(
        capsys, ["cumulants", "--box", "5x5", "--points", "1,1;1,2"]
    )
    assert code == 2


def test_argparse_level_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["scaling", "--eps", "1/8"])  # neither points nor bumps
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--threads", "0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["constants", "--lattice", "honeycomb"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_console_script_entry_point():
    exe = shutil.which("fgfflab")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run(
        [exe, "--version"], capture_output=True, text=True, timeout=120
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("fgfflab ")


def test_module_invocation_matches_in_process(capsys):
    argv = ["constants", "--lattice", "z2"]
    _code, expected, _ = run_cli(capsys, argv)
    proc = subprocess.run(
        [sys.executable, "-m", "fgfflab.cli", *argv],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0
    assert proc.stdout == expected
