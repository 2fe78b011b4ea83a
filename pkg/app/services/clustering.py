# app/services/clustering.py
"""
NV-Clustering: merge each flip-flop with the logic cone feeding its D input
into a Logic-Embedded Flip-Flop (LEFF) when

  1. the cone's function is realizable by a single PG,
  2. every cone gate fans out exactly once (the sink only to the root FF),
  3. no cone gate reads a flip-flop output directly.

Flip-flops that are not merged become plain NV flip-flops.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from ..errors import ClusteringError, StalePlanError, UnknownElementError
from .netlist import DriverKind, FlipFlop, FlipFlopKind, Netlist, evaluate_gate, fanout
from .pglib import MAX_ARITY, BooleanFunction, PgLibrary, PgRealization, is_pg_realizable

logger = logging.getLogger(__name__)

_IDENTITY = BooleanFunction(1, 0b10)


@dataclass(frozen=True)
class Cone:
    """
    members are in absorption order: members[0] is the sink driving the
    root's D net, later members are deeper. function is None only when
    the sink alone has more than MAX_ARITY distinct inputs.
    """

    root: str
    members: Tuple[str, ...]
    leaves: Tuple[str, ...]
    function: Optional[BooleanFunction]

    @property
    def member_set(self) -> FrozenSet[str]:
        return frozenset(self.members)

    @property
    def sink(self) -> Optional[str]:
        return self.members[0] if self.members else None

    @property
    def is_empty(self) -> bool:
        return not self.members


@dataclass(frozen=True)
class CriteriaReport:
    single_pg: bool
    realization: Optional[PgRealization]
    fanout_ok: bool
    fanout_violation: Optional[str]
    ff_input_ok: bool
    ff_input_violation: Optional[str]

    @property
    def accepted(self) -> bool:
        return self.single_pg and self.fanout_ok and self.ff_input_ok


@dataclass(frozen=True)
class AcceptedCone:
    cone: Cone
    realization: PgRealization


@dataclass(frozen=True)
class ClusterPlan:
    accepted: Dict[str, AcceptedCone]
    residual: FrozenSet[str]
    netlist_digest: str

    @classmethod
    def empty(cls, netlist: Netlist) -> "ClusterPlan":
        """Baseline plan: every flip-flop becomes an NVFF."""
        return cls({}, frozenset(netlist.ffs), netlist.digest)

    def dump(self) -> str:
        lines = []
        for ff in sorted(set(self.accepted) | self.residual):
            entry = self.accepted.get(ff)
            if entry is None:
                lines.append(f"ff={ff} kind=NVFF gates=[] table=- leaves=[]")
                continue
            cone = entry.cone
            lines.append(
                f"ff={ff} kind=LEFF gates=[{','.join(sorted(cone.members))}] "
                f"table=0x{cone.function.hex} leaves=[{','.join(cone.leaves)}]"
            )
        return "".join(line + "\n" for line in lines)

    def summary(self) -> str:
        return f"leff={len(self.accepted)} nvff={len(self.residual)}"


# ----------------------------------------------------------------------
# cone extraction
# ----------------------------------------------------------------------
def _absorbable(netlist: Netlist, gate_id: str) -> bool:
    gate = netlist.gates[gate_id]
    return fanout(netlist, gate_id) == 1 and not any(n in netlist.ff_output_nets for n in gate.inputs)


def _leaves_of(netlist: Netlist, members: Sequence[str]) -> List[str]:
    outputs = {netlist.gates[g].output for g in members}
    return sorted({n for g in members for n in netlist.gates[g].inputs if n not in outputs})


def _cone_function(netlist: Netlist, members: Sequence[str], leaves: Sequence[str]) -> BooleanFunction:
    # deeper members come later, so reversed absorption order is topological
    program = [netlist.gates[g] for g in reversed(members)]
    sink_output = netlist.gates[members[0]].output

    def fn(bits):
        values = dict(zip(leaves, bits))
        for gate in program:
            values[gate.output] = evaluate_gate(gate.kind, [values[n] for n in gate.inputs])
        return values[sink_output]

    return BooleanFunction.from_callable(len(leaves), fn)


def _build_cone(netlist: Netlist, root: str, members: Sequence[str]) -> Cone:
    if not members:
        ff = netlist.ffs[root]
        return Cone(root, (), (ff.d,), _IDENTITY)
    leaves = _leaves_of(netlist, members)
    if len(leaves) > MAX_ARITY:
        return Cone(root, tuple(members), tuple(leaves), None)
    function = _cone_function(netlist, members, leaves)
    support = function.support()
    if len(support) < len(leaves):
        # reconvergent leaves can make a structural input irrelevant
        function = function.restrict(support)
        leaves = [leaves[v] for v in support]
    return Cone(root, tuple(members), tuple(leaves), function)


def extract_cone(netlist: Netlist, ff_id: str, max_leaves: int = 5) -> Cone:
    """
    Grow the cone feeding `ff_id` breadth-first from the D-net driver.

    A frontier driver gate is absorbed iff its fan-out is exactly 1, none of
    its inputs is a flip-flop output, and the cone stays within `max_leaves`.
    Growth only continues from a sink that itself meets the first two rules.
    """
    ff = netlist.ffs.get(ff_id)
    if ff is None:
        raise UnknownElementError(f"unknown flip-flop {ff_id}")
    if ff.kind == FlipFlopKind.LEFF:
        raise ClusteringError(f"flip-flop {ff_id} is already logic-embedded")

    driver = netlist.driver(ff.d)
    if driver.kind != DriverKind.GATE:
        return _build_cone(netlist, ff_id, ())

    members = [driver.element]
    queue = deque(members if _absorbable(netlist, driver.element) else [])
    while queue:
        gate = netlist.gates[queue.popleft()]
        for net in sorted(set(gate.inputs)):
            candidate = netlist.driver(net)
            if candidate.kind != DriverKind.GATE or candidate.element in members:
                continue
            if not _absorbable(netlist, candidate.element):
                continue
            if len(_leaves_of(netlist, members + [candidate.element])) > max_leaves:
                continue
            members.append(candidate.element)
            queue.append(candidate.element)

    cone = _build_cone(netlist, ff_id, members)
    logger.debug(f"Cone of {ff_id}: gates={list(cone.members)} leaves={list(cone.leaves)}")
    return cone


def trim_cone(netlist: Netlist, cone: Cone) -> Cone:
    """Drop the deepest (last absorbed) gate."""
    return _build_cone(netlist, cone.root, cone.members[:-1])


# ----------------------------------------------------------------------
# criteria
# ----------------------------------------------------------------------
def check_criteria(netlist: Netlist, cone: Cone, library: PgLibrary) -> CriteriaReport:
    ff = netlist.ffs.get(cone.root)
    if ff is None:
        raise ClusteringError(f"cone root {cone.root} is not a flip-flop of {netlist.name}")
    missing = [g for g in cone.members if g not in netlist.gates]
    if missing:
        raise ClusteringError(f"cone gates {', '.join(missing)} are not in {netlist.name}")
    if cone.members and netlist.gates[cone.sink].output != ff.d:
        raise ClusteringError(f"cone sink {cone.sink} does not drive the D net of {cone.root}")

    realization = None
    if cone.function is not None and cone.function.arity <= library.max_arity:
        realization = is_pg_realizable(cone.function, library)

    fanout_violation = next((g for g in cone.members if fanout(netlist, g) != 1), None)
    ff_input_violation = next(
        (g for g in cone.members if any(n in netlist.ff_output_nets for n in netlist.gates[g].inputs)),
        None,
    )
    return CriteriaReport(
        single_pg=realization is not None,
        realization=realization,
        fanout_ok=fanout_violation is None,
        fanout_violation=fanout_violation,
        ff_input_ok=ff_input_violation is None,
        ff_input_violation=ff_input_violation,
    )


# ----------------------------------------------------------------------
# planning
# ----------------------------------------------------------------------
def nv_cluster(netlist: Netlist, library: PgLibrary, max_leaves: Optional[int] = None) -> ClusterPlan:
    """Plan which flip-flops become LEFFs (with their cones) and which stay NVFFs."""
    max_leaves = library.max_arity if max_leaves is None else max_leaves
    accepted: Dict[str, AcceptedCone] = {}
    residual = set()
    claimed: Dict[str, str] = {}

    for ff_id in sorted(netlist.ffs):
        cone = extract_cone(netlist, ff_id, max_leaves)
        if cone.is_empty:
            residual.add(ff_id)
            continue

        report = check_criteria(netlist, cone, library)
        while not report.accepted and report.fanout_ok and report.ff_input_ok and len(cone.members) > 1:
            cone = trim_cone(netlist, cone)
            report = check_criteria(netlist, cone, library)

        if not report.accepted:
            logger.debug(
                f"{ff_id} stays NVFF: single_pg={report.single_pg} "
                f"fanout={report.fanout_violation} ff_input={report.ff_input_violation}"
            )
            residual.add(ff_id)
            continue

        for gate in cone.members:
            # fan-out 1 makes overlapping cones impossible
            assert gate not in claimed, f"gate {gate} claimed by {claimed.get(gate)} and {ff_id}"
            claimed[gate] = ff_id
        accepted[ff_id] = AcceptedCone(cone, report.realization)

    plan = ClusterPlan(accepted, frozenset(residual), netlist.digest)
    logger.info(f"NV-Clustering {netlist.name}: {plan.summary()} ({len(claimed)} gates absorbed)")
    return plan


def apply_plan(netlist: Netlist, plan: ClusterPlan) -> Netlist:
    """Replace accepted cones with LEFFs and turn every other flip-flop into an NVFF."""
    if plan.netlist_digest != netlist.digest:
        raise StalePlanError(f"plan was computed for a different version of {netlist.name}")
    if set(plan.accepted) | plan.residual != set(netlist.ffs) or set(plan.accepted) & plan.residual:
        raise StalePlanError("plan does not partition the netlist's flip-flops")

    absorbed = {g for entry in plan.accepted.values() for g in entry.cone.members}
    gates = {gid: gate for gid, gate in netlist.gates.items() if gid not in absorbed}
    ffs = {}
    for ff_id, ff in netlist.ffs.items():
        entry = plan.accepted.get(ff_id)
        if entry is None:
            ffs[ff_id] = FlipFlop(ff_id, d=ff.d, q=ff.q, kind=FlipFlopKind.NVFF)
        else:
            ffs[ff_id] = FlipFlop(ff_id, d=None, q=ff.q, kind=FlipFlopKind.LEFF,
                                  function=entry.cone.function, leaves=entry.cone.leaves)
    return Netlist(netlist.name, netlist.inputs, netlist.outputs, gates, ffs)
