# app/services/netlist.py
"""
Gate-level netlist IR: primary I/O, combinational gates and flip-flops
connected by single-driver nets.

A Netlist is validated on construction and never mutated afterwards;
transformations build new instances.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, reduce
from operator import xor
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from ..errors import NetlistValidationError, SimulationError, UnknownElementError
from .pglib import BooleanFunction

logger = logging.getLogger(__name__)


class GateKind(str, Enum):
    AND = "AND"
    NAND = "NAND"
    OR = "OR"
    NOR = "NOR"
    NOT = "NOT"
    BUFF = "BUFF"
    XOR = "XOR"
    XNOR = "XNOR"


class FlipFlopKind(str, Enum):
    DFF = "DFF"
    NVFF = "NVFF"
    LEFF = "LEFF"


class DriverKind(str, Enum):
    INPUT = "input"
    GATE = "gate"
    FF = "ff"


SINGLE_INPUT_KINDS = frozenset({GateKind.NOT, GateKind.BUFF})

_GATE_EVAL = {
    GateKind.AND: lambda bits: int(all(bits)),
    GateKind.NAND: lambda bits: int(not all(bits)),
    GateKind.OR: lambda bits: int(any(bits)),
    GateKind.NOR: lambda bits: int(not any(bits)),
    GateKind.NOT: lambda bits: 1 - bits[0],
    GateKind.BUFF: lambda bits: bits[0],
    GateKind.XOR: lambda bits: reduce(xor, bits),
    GateKind.XNOR: lambda bits: 1 - reduce(xor, bits),
}


def evaluate_gate(kind: GateKind, bits: Sequence[int]) -> int:
    return _GATE_EVAL[kind](bits)


class Driver(NamedTuple):
    kind: DriverKind
    element: str


@dataclass(frozen=True)
class Gate:
    id: str
    kind: GateKind
    inputs: Tuple[str, ...]
    output: str


@dataclass(frozen=True)
class FlipFlop:
    """
    Register element. DFF/NVFF capture `d`; an LEFF captures `function`
    applied to `leaves` and has no d net.
    """

    id: str
    d: Optional[str]
    q: str
    kind: FlipFlopKind = FlipFlopKind.DFF
    function: Optional[BooleanFunction] = None
    leaves: Tuple[str, ...] = ()

    @property
    def fanin(self) -> Tuple[str, ...]:
        return self.leaves if self.kind == FlipFlopKind.LEFF else (self.d,)

    @property
    def is_volatile(self) -> bool:
        return self.kind == FlipFlopKind.DFF

    def capture(self, values: Mapping[str, int]) -> int:
        if self.kind == FlipFlopKind.LEFF:
            return self.function.evaluate([values[n] for n in self.leaves])
        return values[self.d]


@dataclass(frozen=True, eq=False)
class Netlist:
    name: str
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    gates: Mapping[str, Gate] = field(default_factory=dict)
    ffs: Mapping[str, FlipFlop] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "gates", dict(self.gates))
        object.__setattr__(self, "ffs", dict(self.ffs))
        self._validate()

    # ------------------------------------------------------------------
    # validation
    # ------------------------------------------------------------------
    def _validate(self) -> None:
        elements = set()
        for element in list(self.inputs) + list(self.gates) + list(self.ffs):
            if element in elements:
                raise NetlistValidationError(f"duplicate element id {element}")
            elements.add(element)

        nets = self._collect_drivers()
        object.__setattr__(self, "_nets", nets)

        for gate in self.gates.values():
            if gate.kind in SINGLE_INPUT_KINDS and len(gate.inputs) != 1:
                raise NetlistValidationError(f"{gate.kind.value} gate {gate.id} needs exactly 1 input, has {len(gate.inputs)}")
            if gate.kind not in SINGLE_INPUT_KINDS and len(gate.inputs) < 2:
                raise NetlistValidationError(f"{gate.kind.value} gate {gate.id} needs at least 2 inputs, has {len(gate.inputs)}")
            for net in gate.inputs:
                if net not in nets:
                    raise NetlistValidationError(f"undriven net {net} (input of gate {gate.id})")

        for ff in self.ffs.values():
            if ff.kind == FlipFlopKind.LEFF:
                if ff.function is None or ff.function.arity != len(ff.leaves):
                    raise NetlistValidationError(f"LEFF {ff.id} function arity does not match its {len(ff.leaves)} leaves")
            elif ff.d is None or ff.function is not None or ff.leaves:
                raise NetlistValidationError(f"{ff.kind.value} {ff.id} must have a d net and no embedded function")
            for net in ff.fanin:
                if net not in nets:
                    raise NetlistValidationError(f"undriven net {net} (input of flip-flop {ff.id})")

        for net in self.outputs:
            if net not in nets:
                raise NetlistValidationError(f"undriven net {net} (primary output)")

        try:
            cycle = nx.find_cycle(self.gate_graph)
        except nx.NetworkXNoCycle:
            return
        members = sorted({u for u, _ in cycle})
        raise NetlistValidationError(f"combinational loop through {', '.join(members)}", members=members)

    def _collect_drivers(self) -> Dict[str, Driver]:
        nets: Dict[str, Driver] = {}

        def claim(net: str, driver: Driver):
            if net in nets:
                raise NetlistValidationError(f"net {net} has more than one driver ({nets[net].element}, {driver.element})")
            nets[net] = driver

        for net in self.inputs:
            claim(net, Driver(DriverKind.INPUT, net))
        for gate in self.gates.values():
            claim(gate.output, Driver(DriverKind.GATE, gate.id))
        for ff in self.ffs.values():
            claim(ff.q, Driver(DriverKind.FF, ff.id))
        return nets

    # ------------------------------------------------------------------
    # structure
    # ------------------------------------------------------------------
    @property
    def nets(self) -> Mapping[str, Driver]:
        return self._nets

    def driver(self, net: str) -> Driver:
        try:
            return self._nets[net]
        except KeyError:
            raise UnknownElementError(f"unknown net {net}") from None

    def output_net(self, element: str) -> str:
        if element in self.gates:
            return self.gates[element].output
        if element in self.ffs:
            return self.ffs[element].q
        if element in self.inputs:
            return element
        raise UnknownElementError(f"unknown element {element}")

    @cached_property
    def gate_graph(self) -> nx.DiGraph:
        """Gate-to-gate connectivity; FFs break every edge through them."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.gates)
        for gate in self.gates.values():
            for net in gate.inputs:
                driver = self._nets.get(net)
                if driver is not None and driver.kind == DriverKind.GATE:
                    graph.add_edge(driver.element, gate.id)
        return graph

    @cached_property
    def topological_order(self) -> Tuple[str, ...]:
        return tuple(nx.lexicographical_topological_sort(self.gate_graph))

    @cached_property
    def consumers(self) -> Mapping[str, Tuple[Tuple[str, int], ...]]:
        """net -> (element id, pin) pairs of gate and FF inputs reading it."""
        pins: Dict[str, List[Tuple[str, int]]] = {}
        for gate in self.gates.values():
            for pin, net in enumerate(gate.inputs):
                pins.setdefault(net, []).append((gate.id, pin))
        for ff in self.ffs.values():
            for pin, net in enumerate(ff.fanin):
                pins.setdefault(net, []).append((ff.id, pin))
        return {net: tuple(p) for net, p in pins.items()}

    @cached_property
    def ff_output_nets(self) -> frozenset:
        return frozenset(ff.q for ff in self.ffs.values())

    def transitive_fanin(self, net: str) -> frozenset:
        """Gates reachable backwards from `net` without crossing an FF or primary input."""
        seen = set()
        stack = [net]
        while stack:
            driver = self.driver(stack.pop())
            if driver.kind != DriverKind.GATE or driver.element in seen:
                continue
            seen.add(driver.element)
            stack.extend(self.gates[driver.element].inputs)
        return frozenset(seen)

    @cached_property
    def digest(self) -> str:
        """Stable fingerprint of the structure; changes whenever any element changes."""
        h = hashlib.sha256()
        h.update(f"{self.name}|{','.join(self.inputs)}|{','.join(self.outputs)}\n".encode())
        for gate in self.gates.values():
            h.update(f"g|{gate.id}|{gate.kind.value}|{','.join(gate.inputs)}|{gate.output}\n".encode())
        for ff in self.ffs.values():
            table = f"{ff.function.arity}:{ff.function.hex}" if ff.function else "-"
            h.update(f"f|{ff.id}|{ff.kind.value}|{ff.d}|{ff.q}|{table}|{','.join(ff.leaves)}\n".encode())
        return h.hexdigest()

    def counts(self) -> Dict[str, int]:
        kinds = [ff.kind for ff in self.ffs.values()]
        return {
            "inputs": len(self.inputs),
            "outputs": len(self.outputs),
            "dffs": kinds.count(FlipFlopKind.DFF),
            "nvffs": kinds.count(FlipFlopKind.NVFF),
            "leffs": kinds.count(FlipFlopKind.LEFF),
            "gates": len(self.gates),
        }


def fanout(netlist: Netlist, element: str) -> int:
    """Input pins (gate, FF and primary-output) fed by the element's output net."""
    net = netlist.output_net(element)
    return len(netlist.consumers.get(net, ())) + netlist.outputs.count(net)


def _structure_graph(netlist: Netlist) -> nx.MultiDiGraph:
    graph = nx.MultiDiGraph()
    for net in netlist.inputs:
        graph.add_node(net, kind="INPUT")
    for gate in netlist.gates.values():
        graph.add_node(gate.id, kind=gate.kind.value)
    for ff in netlist.ffs.values():
        graph.add_node(ff.id, kind=f"{ff.kind.value}:{ff.function.hex if ff.function else ''}")
    for position, net in enumerate(netlist.outputs):
        graph.add_node(f"__out{position}", kind=f"OUTPUT{position}")
        graph.add_edge(netlist.driver(net).element, f"__out{position}", pin=0)
    for element in list(netlist.gates.values()) + list(netlist.ffs.values()):
        fanin = element.inputs if isinstance(element, Gate) else element.fanin
        for pin, net in enumerate(fanin):
            graph.add_edge(netlist.driver(net).element, element.id, pin=pin)
    return graph


def is_isomorphic(a: Netlist, b: Netlist) -> bool:
    """Same element multiset and connectivity under some id mapping."""
    if a.counts() != b.counts():
        return False
    if _same_under_identity(a, b):
        return True
    match = lambda x, y: x["kind"] == y["kind"]
    edge_match = lambda x, y: sorted(e["pin"] for e in x.values()) == sorted(e["pin"] for e in y.values())
    return nx.is_isomorphic(_structure_graph(a), _structure_graph(b), node_match=match, edge_match=edge_match)


def _same_under_identity(a: Netlist, b: Netlist) -> bool:
    return (
        a.inputs == b.inputs
        and a.outputs == b.outputs
        and dict(a.gates) == dict(b.gates)
        and dict(a.ffs) == dict(b.ffs)
    )


# ----------------------------------------------------------------------
# simulation
# ----------------------------------------------------------------------
class SimulationTrace(NamedTuple):
    outputs: List[Tuple[int, ...]]
    state: Dict[str, int]


class LogicSimulator:
    """Cycle-accurate two-valued simulator compiled once per netlist."""

    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        self._program = [
            (_GATE_EVAL[g.kind], g.inputs, g.output)
            for g in (netlist.gates[gid] for gid in netlist.topological_order)
        ]
        self._ffs = sorted(netlist.ffs.values(), key=lambda ff: ff.id)

    def initial_state(self) -> Dict[str, int]:
        return {ff.id: 0 for ff in self._ffs}

    def step(self, state: Mapping[str, int], vector: Sequence[int]) -> Tuple[Tuple[int, ...], Dict[str, int]]:
        """Settle one clock cycle; returns (primary outputs, next FF state)."""
        netlist = self.netlist
        if len(vector) != len(netlist.inputs):
            raise SimulationError(f"input vector has {len(vector)} bits, netlist has {len(netlist.inputs)} inputs")
        values: Dict[str, int] = dict(zip(netlist.inputs, (int(bool(b)) for b in vector)))
        for ff in self._ffs:
            values[ff.q] = state[ff.id]
        for fn, inputs, output in self._program:
            values[output] = fn([values[n] for n in inputs])
        outputs = tuple(values[n] for n in netlist.outputs)
        return outputs, {ff.id: ff.capture(values) for ff in self._ffs}


def simulate(
    netlist: Netlist,
    initial_state: Optional[Mapping[str, int]] = None,
    vectors: Sequence[Sequence[int]] = (),
) -> SimulationTrace:
    """Run `vectors` cycle by cycle from `initial_state` (all-zero when omitted)."""
    simulator = LogicSimulator(netlist)
    state = simulator.initial_state() if initial_state is None else dict(initial_state)
    missing = set(netlist.ffs) - set(state)
    if missing:
        raise SimulationError(f"initial state missing flip-flops: {', '.join(sorted(missing))}")
    outputs = []
    for vector in vectors:
        out, state = simulator.step(state, vector)
        outputs.append(out)
    return SimulationTrace(outputs, state)
