# app/services/analysis.py
"""
Cost model, sensitive-path enumeration and Design Vulnerability Time.

Path endpoints are non-volatile registers: primary inputs (input registers),
flip-flops, and primary outputs (output registers). For every connected
(source, destination) pair the sensitive time is

    t_S = t_RD(source) + t_C + t_WR(destination)

with t_C the longest combinational delay between the pair. DVT is the sum
of t_S over all pairs.
"""
import logging
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel

from ..errors import AnalysisError
from .clustering import ClusterPlan, apply_plan, nv_cluster
from .device import write_energy_ratio
from .netlist import FlipFlopKind, Netlist
from .pglib import PgLibrary
from .techfile import TechParams

logger = logging.getLogger(__name__)

INPUT_PREFIX = "INPUT:"
OUTPUT_PREFIX = "OUTPUT:"

PATH_UNIVERSE = "all connected (source, destination) NV endpoint pairs; t_C is the worst-case delay per pair"
LOSS_MODEL = "a failure inside a pair's sensitive window loses the in-flight clock cycle only"


class CostReport(BaseModel):
    area: float = 0.0
    power: float = 0.0
    delay: float = 0.0
    energy: float = 0.0
    edp: float = 0.0
    write_energy: float = 0.0


class SensitivePath(BaseModel):
    source: str
    destination: str
    t_c: float
    t_s: float


class DvtReport(BaseModel):
    paths: List[SensitivePath]
    dvt: float


class Improvement(BaseModel):
    """Percent improvement of a candidate over a baseline; negative means worse."""

    area: float
    power: float
    delay: float
    energy: float
    edp: float


class DesignComparison(BaseModel):
    name: str
    baseline_cost: CostReport
    clustered_cost: CostReport
    baseline_dvt: DvtReport
    clustered_dvt: DvtReport
    improvement: Improvement
    dvt_reduction: float
    leff: int
    nvff: int


# ----------------------------------------------------------------------
# endpoint timing
# ----------------------------------------------------------------------
def _sources(netlist: Netlist, tech: TechParams) -> Iterator[Tuple[str, str, float]]:
    """(endpoint name, driven net, t_RD)."""
    t_rd_in = tech.port("INPUT").t_rd
    for net in netlist.inputs:
        yield f"{INPUT_PREFIX}{net}", net, t_rd_in
    for ff_id in sorted(netlist.ffs):
        ff = netlist.ffs[ff_id]
        yield ff_id, ff.q, tech.register(ff.kind).t_rd


def _destinations(netlist: Netlist, tech: TechParams) -> Iterator[Tuple[str, Tuple[str, ...], float]]:
    """(endpoint name, nets it samples, t_WR)."""
    for ff_id in sorted(netlist.ffs):
        ff = netlist.ffs[ff_id]
        yield ff_id, ff.fanin, tech.register(ff.kind).t_wr
    t_wr_out = tech.port("OUTPUT").t_wr
    for net in netlist.outputs:
        yield f"{OUTPUT_PREFIX}{net}", (net,), t_wr_out


def _arrivals(netlist: Netlist, tech: TechParams, source_net: str) -> Dict[str, float]:
    """Longest combinational delay from `source_net` to every net it reaches."""
    arrival = {source_net: 0.0}
    for gate_id in netlist.topological_order:
        gate = netlist.gates[gate_id]
        reached = [arrival[n] for n in gate.inputs if n in arrival]
        if reached:
            arrival[gate.output] = max(reached) + tech.gate(gate.kind).delay
    return arrival


def _pairs(netlist: Netlist, tech: TechParams) -> List[SensitivePath]:
    destinations = list(_destinations(netlist, tech))
    paths = []
    for source, net, t_rd in _sources(netlist, tech):
        arrival = _arrivals(netlist, tech, net)
        for destination, fanin, t_wr in destinations:
            reached = [arrival[n] for n in fanin if n in arrival]
            if not reached:
                continue
            t_c = max(reached)
            paths.append(SensitivePath(source=source, destination=destination, t_c=t_c, t_s=t_rd + t_c + t_wr))
    return paths


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------
def cost(netlist: Netlist, tech: TechParams) -> CostReport:
    area = power = write_energy = 0.0
    for gate in netlist.gates.values():
        price = tech.gate(gate.kind)
        area += price.area
        power += price.power
    for ff in netlist.ffs.values():
        price = tech.register(ff.kind)
        leaves = len(ff.leaves) if ff.kind == FlipFlopKind.LEFF else 0
        area += price.area + price.area_per_leaf * leaves
        power += price.power + price.power_per_leaf * leaves
        write_energy += price.write_energy

    delay = max((p.t_s for p in _pairs(netlist, tech)), default=0.0)
    energy = power * delay
    return CostReport(area=area, power=power, delay=delay, energy=energy, edp=energy * delay, write_energy=write_energy)


def sensitive_paths(netlist: Netlist, tech: TechParams) -> DvtReport:
    volatile = sorted(ff.id for ff in netlist.ffs.values() if ff.is_volatile)
    if volatile:
        raise AnalysisError(f"DVT is undefined with volatile flip-flops: {', '.join(volatile)}")
    paths = _pairs(netlist, tech)
    dvt = sum(p.t_s for p in paths)
    logger.debug(f"DVT {netlist.name}: {len(paths)} paths, {dvt:.4g} ns")
    return DvtReport(paths=paths, dvt=dvt)


def compare(baseline: CostReport, candidate: CostReport) -> Improvement:
    metrics = ("area", "power", "delay", "energy", "edp")
    zero = [m for m in metrics if getattr(baseline, m) <= 0]
    if zero:
        raise AnalysisError(f"baseline has non-positive {', '.join(zero)}; improvement is undefined")
    return Improvement(**{
        m: 100.0 * (getattr(baseline, m) - getattr(candidate, m)) / getattr(baseline, m)
        for m in metrics
    })


def retarget_barrier(tech: TechParams, delta: float) -> TechParams:
    """
    Technology with the MTJ barrier moved to `delta`. NV register write
    energy and power follow I_c^2, i.e. (delta / current delta)^2.
    """
    ratio = write_energy_ratio(tech.mtj.delta, delta)
    ffs = {}
    for kind, price in tech.ffs.items():
        if kind == FlipFlopKind.DFF:
            ffs[kind] = price
            continue
        ffs[kind] = price.model_copy(update={
            "write_energy": price.write_energy * ratio,
            "power": price.power * ratio,
            "power_per_leaf": price.power_per_leaf * ratio,
        })
    logger.info(f"Retargeted barrier {tech.mtj.delta} -> {delta} kT (write energy x{ratio:.3f})")
    return tech.model_copy(update={"ffs": ffs, "mtj": tech.mtj.model_copy(update={"delta": delta})})


def analyze_design(
    netlist: Netlist,
    tech: TechParams,
    library: PgLibrary,
    max_leaves: Optional[int] = None,
    plan: Optional[ClusterPlan] = None,
) -> DesignComparison:
    """All-NVFF baseline against the NV-Clustered design of the same netlist."""
    plan = nv_cluster(netlist, library, max_leaves) if plan is None else plan
    baseline = apply_plan(netlist, ClusterPlan.empty(netlist))
    clustered = apply_plan(netlist, plan)

    baseline_cost = cost(baseline, tech)
    clustered_cost = cost(clustered, tech)
    baseline_dvt = sensitive_paths(baseline, tech)
    clustered_dvt = sensitive_paths(clustered, tech)
    improvement = compare(baseline_cost, clustered_cost)
    dvt_reduction = (
        100.0 * (baseline_dvt.dvt - clustered_dvt.dvt) / baseline_dvt.dvt if baseline_dvt.dvt > 0 else 0.0
    )
    logger.info(
        f"Analyzed {netlist.name}: area {improvement.area:.1f}% power {improvement.power:.1f}% "
        f"delay {improvement.delay:.1f}% energy {improvement.energy:.1f}% dvt {dvt_reduction:.1f}%"
    )
    return DesignComparison(
        name=netlist.name,
        baseline_cost=baseline_cost,
        clustered_cost=clustered_cost,
        baseline_dvt=baseline_dvt,
        clustered_dvt=clustered_dvt,
        improvement=improvement,
        dvt_reduction=dvt_reduction,
        leff=len(plan.accepted),
        nvff=len(plan.residual),
    )
