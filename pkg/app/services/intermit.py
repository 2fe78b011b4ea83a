# app/services/intermit.py
"""
Energy-harvesting supply model and intermittent execution.

The harvester charges an ideal capacitor (V' = I/C) from 0 V to v_on, runs
the design until the voltage falls to v_off, then recharges. A design runs
clock cycles only while ON; a power failure that lands inside the sensitive
window of an in-flight endpoint-pair path loses that cycle.

Units: capacitance nF, currents uA, voltages V, times ns.
"""
import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import stats

from .. import config
from ..errors import SimulationError
from .analysis import DvtReport, sensitive_paths
from .device import NS, retention_time
from .netlist import LogicSimulator, Netlist
from .techfile import TechParams

logger = logging.getLogger(__name__)

ON = "ON"
OFF = "OFF"

# uA / nF = 1e3 V/s = 1e-6 V/ns
_SLEW_PER_NS = 1e-6

BOOTSTRAP_RESAMPLES = 1000
CONFIDENCE_LEVEL = 0.95


class HarvesterModel(BaseModel):
    capacitance_nf: float = Field(config.HARVEST_CAPACITANCE_NF, gt=0)
    harvest_ua: float = Field(config.HARVEST_CURRENT_UA, ge=0)
    load_ua: float = Field(config.LOAD_CURRENT_UA, ge=0)
    v_on: float = Field(config.HARVEST_V_ON, gt=0)
    v_off: float = Field(config.HARVEST_V_OFF, gt=0)
    v_max: float = Field(config.HARVEST_V_MAX, gt=0)

    @model_validator(mode="after")
    def _check_thresholds(self):
        if not self.v_max >= self.v_on > self.v_off > 0:
            raise ValueError(f"need v_max >= v_on > v_off > 0, got {self.v_max}, {self.v_on}, {self.v_off}")
        return self

    def slew(self, current_ua: float) -> float:
        """dV/dt [V/ns] for a net current into the capacitor."""
        return current_ua / self.capacitance_nf * _SLEW_PER_NS

    @property
    def on_duration(self) -> float:
        """Length of one ON burst [ns]; infinite when harvesting covers the load."""
        net = self.load_ua - self.harvest_ua
        return math.inf if net <= 0 else (self.v_on - self.v_off) / self.slew(net)

    @property
    def recharge_duration(self) -> float:
        """v_off -> v_on [ns]."""
        return math.inf if self.harvest_ua == 0 else (self.v_on - self.v_off) / self.slew(self.harvest_ua)


# ----------------------------------------------------------------------
# traces
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class TraceSegment:
    start: float
    end: float
    state: str

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class PowerTrace:
    segments: Tuple[TraceSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise SimulationError("power trace has no segments")
        if self.segments[0].start != 0:
            raise SimulationError(f"power trace starts at {self.segments[0].start} ns, expected 0")
        for prev, seg in zip(self.segments, self.segments[1:]):
            if seg.start != prev.end:
                raise SimulationError(f"gap or overlap at {prev.end} ns")
            if seg.state == prev.state:
                raise SimulationError(f"two consecutive {seg.state} segments at {seg.start} ns")
        for seg in self.segments:
            if seg.state not in (ON, OFF):
                raise SimulationError(f"unknown supply state {seg.state!r}")
            if not seg.end > seg.start:
                raise SimulationError(f"empty segment at {seg.start} ns")

    @property
    def horizon(self) -> float:
        return self.segments[-1].end

    @property
    def failures(self) -> List[float]:
        """Instants where the supply drops (ON followed by OFF)."""
        return [seg.end for seg in self.segments[:-1] if seg.state == ON]

    @property
    def boundaries(self) -> np.ndarray:
        return np.array([seg.end for seg in self.segments[:-1]], dtype=float)

    @classmethod
    def from_boundaries(cls, first_state: str, boundaries: Sequence[float], horizon: float) -> "PowerTrace":
        edges = [0.0, *boundaries, horizon]
        states = [first_state, OFF if first_state == ON else ON]
        return cls(tuple(
            TraceSegment(float(a), float(b), states[i % 2]) for i, (a, b) in enumerate(zip(edges, edges[1:]))
        ))


def generate_trace(model: HarvesterModel, horizon: float) -> PowerTrace:
    """Deterministic ON/OFF trace of the ideal capacitor over [0, horizon]."""
    if not horizon > 0:
        raise SimulationError(f"horizon must be positive, got {horizon}")

    boundaries: List[float] = []
    t = model.v_on / model.slew(model.harvest_ua) if model.harvest_ua > 0 else math.inf
    on = False
    while t < horizon:
        boundaries.append(t)
        on = not on
        t += model.on_duration if on else model.recharge_duration

    trace = PowerTrace.from_boundaries(OFF, boundaries, horizon)
    logger.debug(f"Generated trace: {len(trace.segments)} segments, {len(trace.failures)} failures over {horizon:.4g} ns")
    return trace


def jittered_trace(trace: PowerTrace, jitter: float, seed: int) -> PowerTrace:
    """
    Move each interior boundary uniformly within +-jitter of the shorter
    adjacent segment. With jitter < 0.5 no segment can collapse.
    """
    if not 0 <= jitter < 0.5:
        raise SimulationError(f"jitter fraction must be in [0, 0.5), got {jitter}")
    if jitter == 0 or len(trace.segments) == 1:
        return trace

    lengths = np.array([seg.length for seg in trace.segments])
    span = jitter * np.minimum(lengths[:-1], lengths[1:])
    rng = np.random.default_rng(seed)
    moved = np.sort(trace.boundaries + rng.uniform(-1.0, 1.0, size=span.size) * span)
    return PowerTrace.from_boundaries(trace.segments[0].state, moved.tolist(), trace.horizon)


def write_trace_csv(path: Path, trace: PowerTrace) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["start_ns", "end_ns", "state"])
        for seg in trace.segments:
            writer.writerow([repr(seg.start), repr(seg.end), seg.state])


def read_trace_csv(path: Path) -> PowerTrace:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    try:
        segments = [TraceSegment(float(r["start_ns"]), float(r["end_ns"]), r["state"].strip().upper()) for r in rows]
    except (KeyError, ValueError, AttributeError) as e:
        raise SimulationError(f"{path}: malformed trace row ({e})") from None
    return PowerTrace(tuple(segments))


# ----------------------------------------------------------------------
# intermittent execution
# ----------------------------------------------------------------------
class SimResult(BaseModel):
    attempted: int = 0
    committed: int = 0
    losses: int = 0
    reboots: int = 0
    lost_writes: int = 0
    sense_events: int = 0
    retention_violations: int = 0
    forward_progress: float = 0.0
    seed: int = 0
    outputs: List[List[int]] = Field(default_factory=list)


def run_intermittent(
    netlist: Netlist,
    tech: TechParams,
    trace: PowerTrace,
    workload: Optional[Sequence[Sequence[int]]] = None,
    seed: int = 0,
    dvt: Optional[DvtReport] = None,
) -> SimResult:
    """
    Execute `workload` (or free-run when None) across the ON segments of `trace`.

    Cycle k of an ON segment starting at s commits at s + (k+1)*T. At a failure
    the in-flight cycle is d ns short of its commit; every endpoint pair with
    t_S >= d loses its pending write and the cycle is discarded. Otherwise the
    cycle is simply re-run after power returns.
    """
    volatile = sorted(ff.id for ff in netlist.ffs.values() if ff.is_volatile)
    if volatile:
        raise SimulationError(f"intermittent execution needs NV flip-flops, {', '.join(volatile)} are volatile")
    period = tech.clock_period
    windows = np.array([p.t_s for p in (dvt or sensitive_paths(netlist, tech)).paths], dtype=float)
    retention_ns = retention_time(tech.mtj.delta, tech.mtj.tau0) / NS

    simulator = LogicSimulator(netlist) if workload is not None else None
    state = simulator.initial_state() if simulator else {}
    remaining = math.inf if workload is None else len(workload)
    result = SimResult(seed=seed)
    short_segments = 0

    for index, seg in enumerate(trace.segments):
        if remaining == 0:
            break
        if seg.state == OFF:
            if seg.length > retention_ns:
                result.retention_violations += 1
                if simulator:
                    state = simulator.initial_state()
            continue

        if index > 0:
            result.sense_events += 1
        if seg.length < period:
            short_segments += 1
        full = min(math.floor(seg.length / period), remaining)
        if simulator:
            for _ in range(int(full)):
                out, state = simulator.step(state, workload[result.committed])
                result.outputs.append(list(out))
                result.committed += 1
        else:
            result.committed += int(full)
        result.attempted += int(full)
        if remaining != math.inf:
            remaining -= full

        if remaining == 0 or index == len(trace.segments) - 1:
            continue
        # failure at seg.end with a cycle in flight
        to_commit = (full + 1) * period - seg.length
        lost = int(np.count_nonzero(windows >= to_commit))
        if lost:
            result.attempted += 1
            result.losses += 1
            result.reboots += 1
            result.lost_writes += lost

    if short_segments:
        logger.warning(f"{short_segments} ON segments are shorter than the {period} ns clock period")
    result.forward_progress = result.committed / result.attempted if result.attempted else 0.0
    return result


# ----------------------------------------------------------------------
# Monte-Carlo
# ----------------------------------------------------------------------
class Interval(BaseModel):
    mean: float
    low: float
    high: float


class MonteCarloResult(BaseModel):
    trials: List[SimResult]
    losses: Interval
    forward_progress: Interval
    lost_writes: Interval
    dvt: float
    seed: int


class PairedTrial(BaseModel):
    trial: int
    seed: int
    baseline_losses: int
    clustered_losses: int
    baseline_progress: float
    clustered_progress: float

    @property
    def loss_difference(self) -> int:
        return self.clustered_losses - self.baseline_losses


class PairedResult(BaseModel):
    trials: List[PairedTrial]
    baseline_losses: Interval
    clustered_losses: Interval
    loss_difference: Interval
    baseline_dvt: float
    clustered_dvt: float
    seed: int


def trial_seed(seed: int, trial: int) -> int:
    """Counter-mode child seed: the same (seed, trial) always maps to the same stream."""
    return int(np.random.SeedSequence(seed, spawn_key=(trial,)).generate_state(1)[0])


def bootstrap_interval(values: Sequence[float], seed: int) -> Interval:
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        return Interval(mean=0.0, low=0.0, high=0.0)
    mean = float(data.mean())
    if data.size < 2 or np.all(data == data[0]):
        return Interval(mean=mean, low=mean, high=mean)
    res = stats.bootstrap(
        (data,),
        np.mean,
        confidence_level=CONFIDENCE_LEVEL,
        n_resamples=BOOTSTRAP_RESAMPLES,
        batch=50,
        method="percentile",
        random_state=np.random.default_rng(seed),
    )
    return Interval(mean=mean, low=float(res.confidence_interval.low), high=float(res.confidence_interval.high))


@dataclass(frozen=True)
class _Experiment:
    """Everything a worker needs to run a batch of trials."""

    designs: Tuple[Netlist, ...]
    dvts: Tuple[DvtReport, ...]
    tech: TechParams
    base_trace: PowerTrace
    jitter: float
    seed: int
    workload: Optional[Tuple[Tuple[int, ...], ...]]


def _run_batch(experiment: _Experiment, trials: Sequence[int]) -> List[Tuple[int, List[SimResult]]]:
    rows = []
    for trial in trials:
        child = trial_seed(experiment.seed, trial)
        trace = jittered_trace(experiment.base_trace, experiment.jitter, child)
        rows.append((trial, [
            run_intermittent(design, experiment.tech, trace, experiment.workload, seed=child, dvt=dvt)
            for design, dvt in zip(experiment.designs, experiment.dvts)
        ]))
    return rows


def _chunk_list(items: Sequence[int], size: int) -> List[Sequence[int]]:
    return [items[i:i + size] for i in range(0, len(items), size)]


def _run_trials(experiment: _Experiment, trials: int, jobs: int) -> List[List[SimResult]]:
    if trials < 1:
        raise SimulationError(f"need at least one trial, got {trials}")
    batches = _chunk_list(list(range(trials)), config.TRIAL_BATCH_SIZE)
    rows: List[Tuple[int, List[SimResult]]] = []
    if jobs > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for batch_rows in pool.map(_run_batch, [experiment] * len(batches), batches):
                rows.extend(batch_rows)
    else:
        for batch in batches:
            rows.extend(_run_batch(experiment, batch))
            logger.debug(f"Finished trials {batch[0]}..{batch[-1]}")
    rows.sort(key=lambda row: row[0])
    return [results for _, results in rows]


def monte_carlo(
    netlist: Netlist,
    tech: TechParams,
    model: HarvesterModel,
    trials: int,
    seed: int,
    horizon: float,
    jitter: float,
    workload: Optional[Sequence[Sequence[int]]] = None,
    jobs: int = 1,
) -> MonteCarloResult:
    dvt = sensitive_paths(netlist, tech)
    experiment = _Experiment(
        designs=(netlist,),
        dvts=(dvt,),
        tech=tech,
        base_trace=generate_trace(model, horizon),
        jitter=jitter,
        seed=seed,
        workload=None if workload is None else tuple(tuple(v) for v in workload),
    )
    results = [row[0] for row in _run_trials(experiment, trials, jobs)]
    logger.info(f"Monte-Carlo {netlist.name}: {trials} trials, seed {seed}")
    return MonteCarloResult(
        trials=results,
        losses=bootstrap_interval([r.losses for r in results], seed),
        forward_progress=bootstrap_interval([r.forward_progress for r in results], seed),
        lost_writes=bootstrap_interval([r.lost_writes for r in results], seed),
        dvt=dvt.dvt,
        seed=seed,
    )


def paired_monte_carlo(
    baseline: Netlist,
    clustered: Netlist,
    tech: TechParams,
    model: HarvesterModel,
    trials: int,
    seed: int,
    horizon: float,
    jitter: float,
    workload: Optional[Sequence[Sequence[int]]] = None,
    jobs: int = 1,
) -> PairedResult:
    """Run both designs on the same jittered trace per trial."""
    dvts = (sensitive_paths(baseline, tech), sensitive_paths(clustered, tech))
    experiment = _Experiment(
        designs=(baseline, clustered),
        dvts=dvts,
        tech=tech,
        base_trace=generate_trace(model, horizon),
        jitter=jitter,
        seed=seed,
        workload=None if workload is None else tuple(tuple(v) for v in workload),
    )
    rows = []
    for trial, (base, clus) in enumerate(_run_trials(experiment, trials, jobs)):
        rows.append(PairedTrial(
            trial=trial,
            seed=base.seed,
            baseline_losses=base.losses,
            clustered_losses=clus.losses,
            baseline_progress=base.forward_progress,
            clustered_progress=clus.forward_progress,
        ))
    logger.info(f"Paired Monte-Carlo {clustered.name}: {trials} trials, seed {seed}")
    return PairedResult(
        trials=rows,
        baseline_losses=bootstrap_interval([r.baseline_losses for r in rows], seed),
        clustered_losses=bootstrap_interval([r.clustered_losses for r in rows], seed),
        loss_difference=bootstrap_interval([r.loss_difference for r in rows], seed),
        baseline_dvt=dvts[0].dvt,
        clustered_dvt=dvts[1].dvt,
        seed=seed,
    )
