# app/services/bench.py
"""
ISCAS-89 .bench reader and writer.

    INPUT(G0)
    OUTPUT(G17)
    G5 = DFF(G10)
    G14 = NOT(G0)

With `allow_nv=True` the reader also accepts the two lines the writer
produces for transformed netlists:

    G6 = NVFF(G11)
    # leff arity=2 table=0x1
    G5 = LEFF_1(G11, G14)
"""
import logging
import re
from pathlib import Path
from typing import Dict, List, Tuple

from ..errors import BenchSyntaxError, NetlistValidationError
from .netlist import FlipFlop, FlipFlopKind, Gate, GateKind, Netlist
from .pglib import BooleanFunction

logger = logging.getLogger(__name__)

_IDENT = r"[^\s,()=#]+"
_PORT_RE = re.compile(rf"^\s*(INPUT|OUTPUT)\s*\(\s*({_IDENT})\s*\)\s*$", re.IGNORECASE)
_ASSIGN_RE = re.compile(rf"^\s*({_IDENT})\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$")
_IDENT_RE = re.compile(rf"^{_IDENT}$")
_LEFF_RE = re.compile(r"^LEFF_([0-9A-F]+)$")


def _split_args(text: str, line_no: int, offset: int) -> List[str]:
    args: List[str] = []
    if not text.strip():
        return args
    column = offset
    for raw in text.split(","):
        arg = raw.strip()
        if not _IDENT_RE.match(arg):
            lead = len(raw) - len(raw.lstrip())
            raise BenchSyntaxError(f"bad operand {arg!r}", line_no, column + lead + 1)
        args.append(arg)
        column += len(raw) + 1
    return args


def parse_bench(text: str, name: str = "netlist", allow_nv: bool = False) -> Netlist:
    """Parse bench text into a validated Netlist."""
    inputs: List[str] = []
    outputs: List[str] = []
    gates: Dict[str, Gate] = {}
    ffs: Dict[str, FlipFlop] = {}
    defined_at: Dict[str, int] = {}
    used_at: List[Tuple[str, int]] = []

    def define(net: str, line_no: int):
        if net in defined_at:
            raise NetlistValidationError(f"net {net} has more than one driver (first driven on line {defined_at[net]})", line=line_no)
        defined_at[net] = line_no

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue

        port = _PORT_RE.match(line)
        if port:
            keyword, net = port.group(1).upper(), port.group(2)
            if keyword == "INPUT":
                define(net, line_no)
                inputs.append(net)
            else:
                outputs.append(net)
                used_at.append((net, line_no))
            continue

        assign = _ASSIGN_RE.match(line)
        if not assign:
            column = len(line) - len(line.lstrip()) + 1
            raise BenchSyntaxError(f"expected INPUT(x), OUTPUT(x) or x = KIND(...), got {line.strip()!r}", line_no, column)

        target, keyword = assign.group(1), assign.group(2)
        args = _split_args(assign.group(3), line_no, assign.start(3))
        define(target, line_no)
        used_at.extend((arg, line_no) for arg in args)
        kind = keyword.upper()

        if kind == "DFF" or (allow_nv and kind == "NVFF"):
            if len(args) != 1:
                raise NetlistValidationError(f"{kind} {target} needs exactly 1 input, has {len(args)}", line=line_no)
            ffs[target] = FlipFlop(target, d=args[0], q=target, kind=FlipFlopKind(kind))
            continue

        leff = _LEFF_RE.match(kind) if allow_nv else None
        if leff:
            try:
                function = BooleanFunction.from_hex(len(args), leff.group(1))
            except ValueError as e:
                raise NetlistValidationError(f"LEFF {target}: {e}", line=line_no) from None
            ffs[target] = FlipFlop(target, d=None, q=target, kind=FlipFlopKind.LEFF,
                                   function=function, leaves=tuple(args))
            continue

        try:
            gate_kind = GateKind(kind)
        except ValueError:
            raise NetlistValidationError(f"unsupported gate kind {keyword}", line=line_no) from None
        gates[target] = Gate(target, gate_kind, tuple(args), target)

    for net, line_no in used_at:
        if net not in defined_at:
            raise NetlistValidationError(f"undriven net {net}", line=line_no)

    netlist = Netlist(name, inputs, outputs, gates, ffs)
    counts = netlist.counts()
    logger.info(
        f"Parsed {name}: {counts['inputs']} inputs, {counts['outputs']} outputs, "
        f"{len(netlist.ffs)} flip-flops, {counts['gates']} gates"
    )
    return netlist


def load_bench(path: Path, allow_nv: bool = False) -> Netlist:
    path = Path(path)
    return parse_bench(path.read_text(), name=path.name.split(".")[0], allow_nv=allow_nv)


def emit_bench(netlist: Netlist) -> str:
    """Write a Netlist back to bench text (LEFF/NVFF use the extension lines)."""
    counts = netlist.counts()
    lines = [
        f"# {netlist.name}",
        f"# {counts['inputs']} inputs",
        f"# {counts['outputs']} outputs",
        f"# {counts['dffs']} D-type flipflops",
    ]
    if counts["nvffs"] or counts["leffs"]:
        lines.append(f"# {counts['nvffs']} NV flipflops")
        lines.append(f"# {counts['leffs']} logic-embedded flipflops")
    lines.append(f"# {counts['gates']} gates")
    lines.append("")

    lines.extend(f"INPUT({net})" for net in netlist.inputs)
    if netlist.inputs:
        lines.append("")
    lines.extend(f"OUTPUT({net})" for net in netlist.outputs)
    if netlist.outputs:
        lines.append("")

    if netlist.ffs:
        for ff in netlist.ffs.values():
            if ff.kind == FlipFlopKind.LEFF:
                fn = ff.function
                lines.append(f"# leff arity={fn.arity} table=0x{fn.hex}")
                lines.append(f"{ff.q} = LEFF_{fn.hex}({', '.join(ff.leaves)})")
            else:
                lines.append(f"{ff.q} = {ff.kind.value}({ff.d})")
        lines.append("")

    for gate in netlist.gates.values():
        lines.append(f"{gate.output} = {gate.kind.value}({', '.join(gate.inputs)})")

    return "\n".join(lines).rstrip("\n") + "\n"
