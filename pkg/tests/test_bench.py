# tests/test_bench.py
"""
Tests for the .bench reader and writer.
"""
import pytest

from app.errors import BenchSyntaxError, NetlistValidationError
from app.services.bench import emit_bench, load_bench, parse_bench
from app.services.clustering import apply_plan, nv_cluster
from app.services.netlist import FlipFlopKind, is_isomorphic
from tests.conftest import BUNDLED_BENCHMARKS, random_netlist


@pytest.mark.unit
def test_parse_minimal_netlist():
    netlist = parse_bench("INPUT(a)\nOUTPUT(b)\nb = NOT(a)\n")
    assert netlist.counts() == {"inputs": 1, "outputs": 1, "dffs": 0, "nvffs": 0, "leffs": 0, "gates": 1}


@pytest.mark.unit
def test_parse_is_case_insensitive_on_keywords():
    netlist = parse_bench("input(a)\ninput(b)\noutput(y)\ny = nand(a, b)\nq = dff(y)\n")
    assert netlist.gates["y"].kind.value == "NAND"
    assert "q" in netlist.ffs


@pytest.mark.unit
def test_comments_and_blank_lines_ignored():
    text = "# header\n\nINPUT(a)   # the input\n\n\nOUTPUT(b)\nb = BUFF(a)  # buffer\n"
    assert parse_bench(text).counts()["gates"] == 1


@pytest.mark.unit
def test_undriven_net_reports_line():
    with pytest.raises(NetlistValidationError) as excinfo:
        parse_bench("INPUT(c)\nOUTPUT(a)\na = AND(b, c)\n")
    assert excinfo.value.line == 3
    assert "undriven net b" in str(excinfo.value)


@pytest.mark.unit
def test_duplicate_driver_reports_line():
    with pytest.raises(NetlistValidationError) as excinfo:
        parse_bench("INPUT(a)\nOUTPUT(x)\nx = NOT(a)\nx = BUFF(a)\n")
    assert excinfo.value.line == 4


@pytest.mark.unit
def test_syntax_error_reports_line_and_column():
    with pytest.raises(BenchSyntaxError) as excinfo:
        parse_bench("INPUT(a)\nOUTPUT(b)\nb = NOT(a\n")
    assert excinfo.value.line == 3
    assert excinfo.value.column == 1


@pytest.mark.unit
def test_bad_operand_column():
    with pytest.raises(BenchSyntaxError) as excinfo:
        parse_bench("INPUT(a)\nb = AND(a, x y)\n")
    assert excinfo.value.line == 2
    assert excinfo.value.column == 12


@pytest.mark.unit
def test_unsupported_gate_kind():
    with pytest.raises(NetlistValidationError) as excinfo:
        parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = MUX(a, b)\n")
    assert "unsupported gate kind MUX" in str(excinfo.value)


@pytest.mark.unit
def test_nv_lines_need_allow_nv():
    text = "INPUT(a)\nOUTPUT(q)\nq = NVFF(a)\n"
    with pytest.raises(NetlistValidationError):
        parse_bench(text)
    assert parse_bench(text, allow_nv=True).ffs["q"].kind == FlipFlopKind.NVFF


@pytest.mark.unit
def test_nv_lines_are_case_insensitive():
    netlist = parse_bench("input(a)\ninput(b)\nq = leff_1(a, b)\np = nvff(q)\n", allow_nv=True)
    assert netlist.ffs["q"].kind == FlipFlopKind.LEFF
    assert (netlist.ffs["q"].function.arity, netlist.ffs["q"].function.table) == (2, 0x1)
    assert netlist.ffs["p"].kind == FlipFlopKind.NVFF


@pytest.mark.unit
def test_load_bench_names_netlist_after_file(tmp_path):
    path = tmp_path / "tiny.bench"
    path.write_text("INPUT(a)\nOUTPUT(b)\nb = NOT(a)\n")
    assert load_bench(path).name == "tiny"


@pytest.mark.unit
def test_emit_empty_netlist():
    text = emit_bench(parse_bench("INPUT(a)\nOUTPUT(a)\n", name="wire"))
    body = [line for line in text.splitlines() if line and not line.startswith("#")]
    assert body == ["INPUT(a)", "OUTPUT(a)"]


@pytest.mark.unit
@pytest.mark.parametrize("path", BUNDLED_BENCHMARKS, ids=lambda p: p.stem)
def test_round_trip_bundled(path):
    original = load_bench(path)
    again = parse_bench(emit_bench(original), name=original.name)
    assert is_isomorphic(original, again)
    assert emit_bench(again) == emit_bench(original)


@pytest.mark.unit
@pytest.mark.parametrize("seed", range(10))
def test_round_trip_random(seed):
    original = random_netlist(seed)
    assert is_isomorphic(original, parse_bench(emit_bench(original)))


@pytest.mark.unit
def test_emit_transformed_s27(s27, library):
    """Clustered s27 writes one LEFF line per embedded flip-flop and reads back."""
    transformed = apply_plan(s27, nv_cluster(s27, library))
    text = emit_bench(transformed)
    leff_lines = [line for line in text.splitlines() if " = LEFF_" in line]
    assert len(leff_lines) == 2
    assert "# leff arity=2 table=0x1" in text
    assert "G6 = NVFF(G11)" in text

    again = parse_bench(text, name="s27", allow_nv=True)
    assert again.counts() == transformed.counts()
    assert again.ffs["G5"].function == transformed.ffs["G5"].function
    assert again.ffs["G5"].leaves == transformed.ffs["G5"].leaves
