# app/routes/synthesis.py
import logging
from functools import lru_cache
from typing import Optional

from fastapi import APIRouter, HTTPException, Query
from pydantic import BaseModel, Field

from .. import config
from ..errors import EXIT_INVALID_INPUT, NvClusterError
from ..services.analysis import analyze_design, retarget_barrier
from ..services.bench import emit_bench, parse_bench
from ..services.clustering import apply_plan, nv_cluster
from ..services.device import barrier_tradeoff
from ..services.pglib import PgLibrary, build_library
from ..services.reports import header
from ..services.techfile import TechParams, load_tech

logger = logging.getLogger(__name__)

router = APIRouter()


class BenchRequest(BaseModel):
    bench: str = Field(..., description="ISCAS-89 .bench text")
    name: str = "netlist"
    allow_nv: bool = False


class SynthRequest(BaseModel):
    bench: str = Field(..., description="ISCAS-89 .bench text")
    name: str = "netlist"
    max_leaves: int = Field(config.MAX_LEAVES, ge=1, le=6)
    inversion: bool = config.ENABLE_OUTPUT_INVERSION


class AnalyzeRequest(SynthRequest):
    delta: Optional[float] = Field(None, gt=0, le=100, description="retarget the MTJ barrier [kT]")


@lru_cache(maxsize=1)
def get_tech() -> TechParams:
    return load_tech(config.TECH_FILE)


@lru_cache(maxsize=2)
def get_library(inversion: bool) -> PgLibrary:
    return build_library(allow_inversion=inversion, costs=get_tech().pg)


def _to_http(e: NvClusterError) -> HTTPException:
    status = 400 if e.exit_code == EXIT_INVALID_INPUT else 422
    return HTTPException(status_code=status, detail=str(e))


@router.post("/v1/netlist/validate")
def validate_netlist(request: BenchRequest):
    """Parse and validate bench text; returns element counts."""
    try:
        netlist = parse_bench(request.bench, name=request.name, allow_nv=request.allow_nv)
    except NvClusterError as e:
        raise _to_http(e)
    return {"name": netlist.name, "counts": netlist.counts(), "ok": True}


@router.get("/v1/library")
def library(inversion: bool = Query(config.ENABLE_OUTPUT_INVERSION)):
    """The PG cell library: every function a single MAJ3/MAJ5 cell realizes."""
    cells = get_library(inversion).cells()
    return {
        "count": len(cells),
        "inversion": inversion,
        "cells": [
            {
                "name": c.name,
                "arity": c.function.arity,
                "table": f"0x{c.function.hex}",
                "base": c.realization.base,
                "affix": c.realization.pattern,
                "inverted": c.realization.inverted,
            }
            for c in cells
        ],
    }


@router.post("/v1/synth")
def synth(request: SynthRequest):
    """Run NV-Clustering; returns the plan and the transformed bench text."""
    try:
        netlist = parse_bench(request.bench, name=request.name)
        plan = nv_cluster(netlist, get_library(request.inversion), request.max_leaves)
        transformed = apply_plan(netlist, plan)
    except NvClusterError as e:
        raise _to_http(e)
    return {
        "name": netlist.name,
        "leff": len(plan.accepted),
        "nvff": len(plan.residual),
        "plan": plan.dump(),
        "bench": emit_bench(transformed),
    }


@router.post("/v1/analyze")
def analyze(request: AnalyzeRequest):
    """Cost and DVT of the all-NVFF baseline against the clustered design."""
    tech = get_tech()
    try:
        if request.delta is not None:
            tech = retarget_barrier(tech, request.delta)
        netlist = parse_bench(request.bench, name=request.name)
        comparison = analyze_design(netlist, tech, get_library(request.inversion), request.max_leaves)
    except NvClusterError as e:
        logger.error(f"Analysis of {request.name} failed: {e}", exc_info=True)
        raise _to_http(e)
    return {"header": header(tech), **comparison.model_dump()}


@router.get("/v1/device/barrier")
def device_barrier(deltas: str = Query("30,40", description="Comma-separated barriers in kT")):
    """Retention, critical current and write-energy ratio per barrier."""
    try:
        values = [float(d) for d in deltas.split(",") if d.strip()]
    except ValueError:
        raise HTTPException(status_code=400, detail=f"deltas must be numbers, got {deltas!r}")
    try:
        points = barrier_tradeoff(get_tech().mtj, values)
    except NvClusterError as e:
        raise _to_http(e)
    return {"reference_delta": get_tech().mtj.delta, "points": [p.model_dump() for p in points]}
