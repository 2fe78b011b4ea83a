# tests/test_cli.py
"""
Tests for the `nvcluster` command line.
"""
import csv
import io
import json

import pytest

from app.cli import build_parser, main
from app.services.reports import PAIRED_COLUMNS, SWEEP_COLUMNS
from tests.conftest import BENCH_DIR, TECH_FILE, cyclic_bench

S27 = str(BENCH_DIR / "s27.bench")


def _run(capsys, *argv):
    code = main([*argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.mark.integration
def test_validate_s27(capsys):
    code, out, _ = _run(capsys, "validate", S27)
    assert code == 0
    assert out.strip() == "inputs=4 outputs=1 dffs=3 gates=10 OK"


@pytest.mark.integration
def test_validate_loop_exits_2(tmp_path, capsys):
    path = tmp_path / "loop.bench"
    path.write_text(cyclic_bench(0))
    code, _, err = _run(capsys, "validate", str(path))
    assert code == 2
    assert "combinational loop" in err


@pytest.mark.integration
def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = _run(capsys, "validate", str(tmp_path / "nope.bench"))
    assert code == 2
    assert "not found" in err


@pytest.mark.integration
def test_unknown_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["synth", S27, "--frobnicate"])
    assert excinfo.value.code == 1


@pytest.mark.integration
def test_out_of_range_option_exits_1(tmp_path, capsys):
    code, _, err = _run(capsys, "simulate", S27, "--tech", str(TECH_FILE), "--out", str(tmp_path), "--jitter", "0.7")
    assert code == 1
    assert "jitter" in err


@pytest.mark.unit
def test_parser_has_every_subcommand():
    parser = build_parser()
    for command in ("validate", "libdump", "synth", "analyze", "simulate", "sweep"):
        assert parser.parse_args([command] + ([] if command in ("libdump", "sweep") else [S27])).command == command


@pytest.mark.integration
def test_libdump(capsys):
    code, out, _ = _run(capsys, "libdump", "--tech", str(TECH_FILE))
    assert code == 0
    assert "NOR2 2 table=0x1 base=3 affix=1ab inv=1" in out.splitlines()


@pytest.mark.integration
def test_synth_s27(tmp_path, capsys):
    code, out, _ = _run(capsys, "synth", S27, "--tech", str(TECH_FILE), "--out", str(tmp_path))
    assert code == 0
    assert out.strip() == "leff=2 nvff=1"
    assert (tmp_path / "s27.plan").read_text().startswith("ff=G5 kind=LEFF")
    assert "G6 = NVFF(G11)" in (tmp_path / "s27.nv.bench").read_text()


@pytest.mark.integration
def test_synth_reruns_are_byte_identical(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert _run(capsys, "synth", S27, "--tech", str(TECH_FILE), "--out", str(out))[0] == 0
    for name in ("s27.plan", "s27.nv.bench"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


@pytest.mark.integration
def test_synthesized_bench_validates(tmp_path, capsys):
    _run(capsys, "synth", S27, "--tech", str(TECH_FILE), "--out", str(tmp_path))
    code, out, _ = _run(capsys, "validate", str(tmp_path / "s27.nv.bench"), "--allow-nv")
    assert code == 0
    assert "nvffs=1 leffs=2" in out


@pytest.mark.integration
def test_analyze_json_matches_files(tmp_path, capsys):
    code, out, _ = _run(capsys, "analyze", S27, "--tech", str(TECH_FILE), "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    assert report == json.loads((tmp_path / "s27.analysis.json").read_text())
    assert report["header"]["tool"] == "nvcluster"
    assert report["header"]["tech_digest"]
    assert (report["leff"], report["nvff"]) == (2, 1)
    assert report["clustered_dvt"]["dvt"] < report["baseline_dvt"]["dvt"]
    assert "DVT reduction" in (tmp_path / "s27.analysis.txt").read_text()


@pytest.mark.integration
def test_analyze_csv_and_delta(tmp_path, capsys):
    code, out, _ = _run(
        capsys, "analyze", S27, "--tech", str(TECH_FILE), "--out", str(tmp_path), "--format", "csv", "--delta", "30",
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == SWEEP_COLUMNS
    assert rows[0]["benchmark"] == "s27"


@pytest.mark.integration
def test_simulate_is_reproducible(tmp_path, capsys):
    outputs = []
    for out in (tmp_path / "a", tmp_path / "b"):
        code, stdout, _ = _run(
            capsys, "simulate", S27, "--tech", str(TECH_FILE), "--out", str(out),
            "--trials", "1", "--seed", "7", "--horizon-ns", "1e9",
        )
        assert code == 0
        outputs.append(stdout)
        assert (out / "s27.trace.csv").read_text().startswith("start_ns,end_ns,state")
    assert outputs[0] == outputs[1]
    assert outputs[0].startswith("trials=1 seed=7 ")
    first = json.loads((tmp_path / "a" / "s27.sim.json").read_text())
    second = json.loads((tmp_path / "b" / "s27.sim.json").read_text())
    assert first == second


@pytest.mark.integration
def test_simulate_paired(tmp_path, capsys):
    code, _, _ = _run(
        capsys, "simulate", S27, "--tech", str(TECH_FILE), "--out", str(tmp_path),
        "--trials", "5", "--seed", "1", "--paired",
    )
    assert code == 0
    with open(tmp_path / "s27.paired.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == PAIRED_COLUMNS
    assert len(rows) == 5
    assert all(int(r["clustered_losses"]) <= int(r["baseline_losses"]) for r in rows)


@pytest.mark.integration
def test_simulate_paired_needs_original_circuit(tmp_path, capsys):
    _run(capsys, "synth", S27, "--tech", str(TECH_FILE), "--out", str(tmp_path))
    code, _, err = _run(
        capsys, "simulate", str(tmp_path / "s27.nv.bench"), "--allow-nv", "--tech", str(TECH_FILE),
        "--out", str(tmp_path), "--trials", "1", "--paired",
    )
    assert code == 1
    assert "--paired" in err


@pytest.mark.integration
def test_sweep(tmp_path, capsys):
    code, out, _ = _run(
        capsys, "sweep", "--tech", str(TECH_FILE), "--out", str(tmp_path), "--bench-dir", str(BENCH_DIR),
    )
    assert code == 0
    assert out == (tmp_path / "sweep.csv").read_text()
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["benchmark"] for r in rows] == sorted(p.stem for p in BENCH_DIR.glob("*.bench"))


@pytest.mark.integration
def test_sweep_empty_directory(tmp_path, capsys):
    code, _, _ = _run(capsys, "sweep", "--tech", str(TECH_FILE), "--out", str(tmp_path), "--bench-dir", str(tmp_path))
    assert code == 1
