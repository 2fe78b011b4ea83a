# app/services/techfile.py
"""
Technology file: flat `section.key = number` text.

    gate.NAND.area = 0.8          # um^2, uW, ns per gate kind
    ff.NVFF.t_wr = 2.0            # area, power, t_wr, t_rd, write_energy per FF kind
    ff.LEFF.area_per_leaf = 0.02  # LEFF cost grows with the embedded function's arity
    port.INPUT.t_rd = 0.1         # primary I/O modelled as NV input/output registers
    pg.MAJ3.area = 2.0            # optional PG cell costs
    device.delta = 40             # MtjParams + LlgPhysics fields
    clock.period = 10.0
"""
import hashlib
import logging
from pathlib import Path
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import TechFileError
from .device import LlgPhysics, MtjParams
from .netlist import FlipFlopKind, GateKind
from .pglib import PgCellCost

logger = logging.getLogger(__name__)

PORT_KINDS = ("INPUT", "OUTPUT")
# inputs are read at launch, outputs written at capture
_PORT_TIMES = (("INPUT", "t_rd"), ("OUTPUT", "t_wr"))


class GateCost(BaseModel):
    model_config = ConfigDict(extra="forbid")

    area: float = Field(0.0, ge=0)
    power: float = Field(0.0, ge=0)
    delay: float = Field(0.0, ge=0)


class RegisterCost(BaseModel):
    model_config = ConfigDict(extra="forbid")

    area: float = Field(0.0, ge=0)
    power: float = Field(0.0, ge=0)
    t_wr: float = Field(0.0, ge=0)
    t_rd: float = Field(0.0, ge=0)
    write_energy: float = Field(0.0, ge=0)
    area_per_leaf: float = Field(0.0, ge=0)
    power_per_leaf: float = Field(0.0, ge=0)


class TechParams(BaseModel):
    gates: Dict[GateKind, GateCost]
    ffs: Dict[FlipFlopKind, RegisterCost]
    ports: Dict[str, RegisterCost]
    pg: Dict[int, PgCellCost] = Field(default_factory=dict)
    mtj: MtjParams = Field(default_factory=MtjParams)
    physics: LlgPhysics = Field(default_factory=LlgPhysics)
    clock_period: float = Field(10.0, gt=0)
    digest: str = ""

    def gate(self, kind: GateKind) -> GateCost:
        try:
            return self.gates[kind]
        except KeyError:
            raise TechFileError(f"gate kind {kind.value} is not priced in the technology file") from None

    def register(self, kind: FlipFlopKind) -> RegisterCost:
        try:
            return self.ffs[kind]
        except KeyError:
            raise TechFileError(f"flip-flop kind {kind.value} is not priced in the technology file") from None

    def port(self, kind: str) -> RegisterCost:
        try:
            return self.ports[kind]
        except KeyError:
            raise TechFileError(f"port kind {kind} is not priced in the technology file") from None


_MTJ_KEYS = set(MtjParams.model_fields)
_PHYSICS_KEYS = set(LlgPhysics.model_fields)


def parse_tech(text: str, source: str = "<tech>") -> TechParams:
    """Parse technology text; every gate, FF and primary I/O kind must be priced."""
    gates: Dict[str, Dict[str, float]] = {}
    ffs: Dict[str, Dict[str, float]] = {}
    ports: Dict[str, Dict[str, float]] = {}
    pg: Dict[int, Dict[str, float]] = {}
    mtj: Dict[str, float] = {}
    physics: Dict[str, float] = {}
    clock_period: Optional[float] = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TechFileError(f"{source}:{line_no}: expected 'section.key = number'")
        key, value_text = (part.strip() for part in line.split("=", 1))
        try:
            value = float(value_text)
        except ValueError:
            raise TechFileError(f"{source}:{line_no}: {value_text!r} is not a number") from None
        parts = key.split(".")

        if parts[0] == "gate" and len(parts) == 3:
            gates.setdefault(parts[1].upper(), {})[parts[2]] = value
        elif parts[0] == "ff" and len(parts) == 3:
            ffs.setdefault(parts[1].upper(), {})[parts[2]] = value
        elif parts[0] == "port" and len(parts) == 3 and parts[1].upper() in PORT_KINDS:
            ports.setdefault(parts[1].upper(), {})[parts[2]] = value
        elif parts[0] == "pg" and len(parts) == 3 and parts[1].upper()[:3] == "MAJ" and parts[1][3:].isdigit():
            pg.setdefault(int(parts[1][3:]), {})[parts[2]] = value
        elif parts[0] == "device" and len(parts) == 2 and parts[1] in _MTJ_KEYS:
            mtj[parts[1]] = value
        elif parts[0] == "device" and len(parts) == 2 and parts[1] in _PHYSICS_KEYS:
            physics[parts[1]] = value
        elif key == "clock.period":
            clock_period = value
        else:
            raise TechFileError(f"{source}:{line_no}: unknown key {key}")

    unpriced_gates = [k.value for k in GateKind if k.value not in gates]
    unpriced_ffs = [k.value for k in FlipFlopKind if k.value not in ffs]
    if unpriced_gates or unpriced_ffs:
        raise TechFileError(f"{source}: unpriced kinds: {', '.join(unpriced_gates + unpriced_ffs)}")
    unpriced_ports = [f"port.{kind}.{key}" for kind, key in _PORT_TIMES if key not in ports.get(kind, {})]
    if unpriced_ports:
        raise TechFileError(f"{source}: unpriced primary I/O: {', '.join(unpriced_ports)}")

    try:
        tech = TechParams(
            gates=gates,
            ffs=ffs,
            ports=ports,
            pg={n: PgCellCost(**costs) for n, costs in pg.items()},
            mtj=MtjParams(**mtj),
            physics=LlgPhysics(**physics),
            clock_period=clock_period if clock_period is not None else 10.0,
            digest=hashlib.sha256(text.encode()).hexdigest(),
        )
    except (ValidationError, TypeError) as e:
        raise TechFileError(f"{source}: {e}") from None
    logger.debug(f"Loaded technology {source} (sha256 {tech.digest[:12]})")
    return tech


def load_tech(path: Path) -> TechParams:
    path = Path(path)
    return parse_tech(path.read_text(), source=str(path))
