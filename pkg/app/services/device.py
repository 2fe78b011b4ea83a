# app/services/device.py
"""
SHE-MTJ macromodel.

Analytic scaling laws (Neel-Arrhenius retention, I_c proportional to the
energy barrier, write energy proportional to I_c^2), the PCSA reference
resistance, and a fixed-step RK4 macrospin integrator of the
Landau-Lifshitz-Gilbert equation with a Slonczewski damping-like torque.

Units: barrier in kT, currents in uA, resistances in Ohm, times in ns,
fields in A/m.
"""
import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..errors import DeviceModelError

logger = logging.getLogger(__name__)

# gyromagnetic ratio times mu0 [m/(A*s)]
GAMMA_MU0 = 2.211e5
NS = 1e-9


class MtjParams(BaseModel):
    delta: float = Field(40.0, gt=0, description="energy barrier [kT]")
    i_c_ref: float = Field(100.0, gt=0, description="critical current at delta_ref [uA]")
    delta_ref: float = Field(40.0, gt=0, description="barrier the critical current is quoted at [kT]")
    r_p: float = Field(2000.0, gt=0, description="parallel resistance [Ohm]")
    r_ap: float = Field(4000.0, gt=0, description="anti-parallel resistance [Ohm]")
    r_hm: float = Field(1000.0, ge=0, description="heavy-metal path resistance [Ohm]")
    t_wr: float = Field(2.0, gt=0, description="write pulse width [ns]")
    tau0: float = Field(1.0, gt=0, description="attempt time [ns]")

    @model_validator(mode="after")
    def _check_resistances(self):
        if not self.r_ap > self.r_p:
            raise ValueError(f"r_ap ({self.r_ap}) must exceed r_p ({self.r_p})")
        return self


class LlgPhysics(BaseModel):
    alpha: float = Field(0.01, gt=0, description="Gilbert damping")
    h_k: float = Field(8.0e4, gt=0, description="anisotropy field at delta_ref [A/m]")
    torque_coefficient: float = Field(8.0, gt=0, description="spin-torque field per drive current [A/m per uA]")
    gamma: float = Field(GAMMA_MU0, gt=0, description="gamma * mu0 [m/(A*s)]")
    tilt_deg: float = Field(5.0, gt=0, lt=90, description="initial thermal tilt off the easy axis [deg]")


# ----------------------------------------------------------------------
# analytic models
# ----------------------------------------------------------------------
def retention_time(delta: float, tau0: float = 1.0) -> float:
    """Neel-Arrhenius retention tau0 * exp(delta), in seconds (tau0 in ns)."""
    if not 0 < delta <= 100:
        raise DeviceModelError(f"energy barrier {delta} kT outside (0, 100]")
    if tau0 <= 0:
        raise DeviceModelError(f"attempt time must be positive, got {tau0}")
    return tau0 * NS * math.exp(delta)


def critical_current(params: MtjParams, delta: Optional[float] = None) -> float:
    """I_c scales linearly with the barrier: i_c_ref * delta / delta_ref [uA]."""
    delta = params.delta if delta is None else delta
    if delta <= 0:
        raise DeviceModelError(f"energy barrier must be positive, got {delta}")
    return params.i_c_ref * delta / params.delta_ref


def write_energy_ratio(delta_from: float, delta_to: float) -> float:
    """E_to / E_from with E proportional to I_c^2, i.e. (delta_to / delta_from)^2."""
    if delta_from <= 0 or delta_to <= 0:
        raise DeviceModelError(f"energy barriers must be positive, got {delta_from} -> {delta_to}")
    return (delta_to / delta_from) ** 2


class ReferenceResistance(NamedTuple):
    r_low: float
    r_high: float
    r_ref: float


def reference_resistance(r_p_pg: float, r_ap_pg: float, r_hm: float) -> ReferenceResistance:
    """PCSA reference sized halfway between the PG cell's low and high read resistances."""
    if not r_ap_pg > r_p_pg > 0:
        raise DeviceModelError(f"need r_ap > r_p > 0, got r_p={r_p_pg}, r_ap={r_ap_pg}")
    if r_hm < 0:
        raise DeviceModelError(f"heavy-metal resistance must be non-negative, got {r_hm}")
    r_low = (r_p_pg + r_hm) / 2
    r_high = (r_ap_pg + r_hm) / 2
    return ReferenceResistance(r_low, r_high, (r_low + r_high) / 2)


class BarrierPoint(BaseModel):
    delta: float
    retention_s: float
    critical_current_ua: float
    write_energy_ratio: float


def barrier_tradeoff(params: MtjParams, deltas: Iterable[float]) -> List[BarrierPoint]:
    """Retention / critical current / write energy against the configured barrier."""
    return [
        BarrierPoint(
            delta=d,
            retention_s=retention_time(d, params.tau0),
            critical_current_ua=critical_current(params, d),
            write_energy_ratio=write_energy_ratio(params.delta, d),
        )
        for d in deltas
    ]


# ----------------------------------------------------------------------
# macrospin LLG
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class MacrospinState:
    m: np.ndarray
    t: float


@dataclass(frozen=True)
class SwitchingResult:
    switched: bool
    switching_time: Optional[float]
    trajectory: List[MacrospinState]
    max_norm_drift: float


# spin polarization of the heavy-metal current
_P = np.array([0.0, 0.0, -1.0])


def _llg_rhs(m: np.ndarray, h_k: float, h_s: float, alpha: float, rate: float) -> np.ndarray:
    """
    dm/dt [1/ns] for uniaxial anisotropy along z and spin polarization -z.

    (1+alpha^2) dm/dt = -g [m x H + alpha m x (m x H)]
                        -g h_s [m x (m x p) - alpha m x p]
    """
    h = np.array([0.0, 0.0, h_k * m[2]])
    mxh = np.cross(m, h)
    mxp = np.cross(m, _P)
    return -rate * (mxh + alpha * np.cross(m, mxh) + h_s * (np.cross(m, mxp) - alpha * mxp))


def _rk4_step(m: np.ndarray, dt: float, args) -> np.ndarray:
    k1 = _llg_rhs(m, *args)
    k2 = _llg_rhs(m + 0.5 * dt * k1, *args)
    k3 = _llg_rhs(m + 0.5 * dt * k2, *args)
    k4 = _llg_rhs(m + dt * k3, *args)
    return m + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def llg_switch(
    params: MtjParams,
    physics: LlgPhysics,
    current: float,
    duration: float,
    step: float,
    record_every: int = 1,
) -> SwitchingResult:
    """
    Integrate the macrospin from a tilted +z start under drive `current` [uA].

    switched: m_z crossed zero and later settled below -0.9 within `duration`.
    switching_time: first zero crossing [ns], interpolated between steps.
    """
    if duration <= 0 or step <= 0:
        raise DeviceModelError(f"duration and step must be positive, got {duration}, {step}")
    if step > duration / 100:
        raise DeviceModelError(f"step {step} ns exceeds duration/100 ({duration / 100} ns)")

    tilt = math.radians(physics.tilt_deg)
    m = np.array([math.sin(tilt), 0.0, math.cos(tilt)])
    h_k = physics.h_k * params.delta / params.delta_ref
    h_s = physics.torque_coefficient * current
    rate = physics.gamma / (1 + physics.alpha ** 2) * NS
    args = (h_k, h_s, physics.alpha, rate)

    steps = int(round(duration / step))
    trajectory = [MacrospinState(m, 0.0)]
    crossing: Optional[float] = None
    settled = False
    max_drift = 0.0

    for n in range(1, steps + 1):
        t = n * step
        nxt = _rk4_step(m, step, args)
        norm = float(np.linalg.norm(nxt))
        if not math.isfinite(norm) or norm == 0.0:
            raise DeviceModelError(f"macrospin state diverged at t={t:.4g} ns (step {step} ns too large?)")
        max_drift = max(max_drift, abs(norm - 1.0))
        nxt = nxt / norm

        if crossing is None and m[2] > 0 >= nxt[2]:
            crossing = float(t - step + step * m[2] / (m[2] - nxt[2]))
        if crossing is not None and nxt[2] < -0.9:
            settled = True

        m = nxt
        if n % record_every == 0:
            trajectory.append(MacrospinState(m, t))

    switched = crossing is not None and settled
    logger.debug(f"LLG I={current:.4g} uA: switched={switched} t_sw={crossing} max drift={max_drift:.2e}")
    return SwitchingResult(switched, crossing if switched else None, trajectory, max_drift)


def analytic_critical_current(params: MtjParams, physics: LlgPhysics) -> float:
    """Drive current at which the damping-like torque cancels damping: alpha*H_k/eta [uA]."""
    h_k = physics.h_k * params.delta / params.delta_ref
    return physics.alpha * h_k / physics.torque_coefficient


def trajectory_array(trajectory: List[MacrospinState]) -> np.ndarray:
    """(N, 4) array of t, mx, my, mz."""
    return np.column_stack(([s.t for s in trajectory], np.vstack([s.m for s in trajectory])))


def write_trajectory_csv(path: Path, trajectory: List[MacrospinState]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "mx", "my", "mz"])
        for row in trajectory_array(trajectory):
            writer.writerow([repr(float(v)) for v in row])
