# app/services/reports.py
"""
Report rendering: JSON documents, aligned-column text and CSV rows.

Every report starts with the same header block so its numbers can be traced
back to the tool build and technology file that produced them.
"""
import csv
import io
import json
from typing import Any, Dict, Iterable, List, Optional

from ..version import get_version_info
from .analysis import LOSS_MODEL, PATH_UNIVERSE, CostReport, DesignComparison
from .intermit import MonteCarloResult, PairedResult
from .techfile import TechParams

SWEEP_COLUMNS = [
    "benchmark", "ffs", "leff", "nvff",
    "area_base", "area_nv", "power_base", "power_nv", "delay_base", "delay_nv",
    "energy_base", "energy_nv", "dvt_base", "dvt_nv",
    "area_pct", "power_pct", "delay_pct", "energy_pct", "edp_pct", "dvt_pct",
]

PAIRED_COLUMNS = ["trial", "seed", "baseline_losses", "clustered_losses", "baseline_progress", "clustered_progress"]


def header(tech: Optional[TechParams] = None) -> Dict[str, Any]:
    info = get_version_info(tech.digest if tech else None)
    return {
        "tool": "nvcluster",
        **info,
        "path_universe": PATH_UNIVERSE,
        "loss_model": LOSS_MODEL,
    }


def to_json(body: Dict[str, Any], tech: Optional[TechParams] = None) -> str:
    return json.dumps({"header": header(tech), **body}, indent=2, sort_keys=False) + "\n"


def _header_text(tech: Optional[TechParams]) -> List[str]:
    return [f"# {key}: {value}" for key, value in header(tech).items()]


def _cost_rows(label: str, report: CostReport) -> List[str]:
    return [
        f"{label:<10} {report.area:>12.4f} {report.power:>12.4f} {report.delay:>10.4f} "
        f"{report.energy:>12.4f} {report.edp:>12.4f} {report.write_energy:>12.4f}"
    ]


def comparison_text(comparison: DesignComparison, tech: Optional[TechParams] = None) -> str:
    imp = comparison.improvement
    lines = _header_text(tech)
    lines += [
        "",
        f"design {comparison.name}: leff={comparison.leff} nvff={comparison.nvff}",
        "",
        f"{'':<10} {'area um2':>12} {'power uW':>12} {'delay ns':>10} {'energy':>12} {'edp':>12} {'write fJ':>12}",
    ]
    lines += _cost_rows("baseline", comparison.baseline_cost)
    lines += _cost_rows("clustered", comparison.clustered_cost)
    lines += [
        "",
        f"{'improve %':<10} {imp.area:>12.2f} {imp.power:>12.2f} {imp.delay:>10.2f} {imp.energy:>12.2f} {imp.edp:>12.2f}",
        "",
        f"DVT baseline  {comparison.baseline_dvt.dvt:>12.4f} ns ({len(comparison.baseline_dvt.paths)} paths)",
        f"DVT clustered {comparison.clustered_dvt.dvt:>12.4f} ns ({len(comparison.clustered_dvt.paths)} paths)",
        f"DVT reduction {comparison.dvt_reduction:>12.2f} %",
    ]
    return "\n".join(lines) + "\n"


def comparison_row(comparison: DesignComparison) -> Dict[str, Any]:
    base, nv = comparison.baseline_cost, comparison.clustered_cost
    imp = comparison.improvement
    return {
        "benchmark": comparison.name,
        "ffs": comparison.leff + comparison.nvff,
        "leff": comparison.leff,
        "nvff": comparison.nvff,
        "area_base": base.area, "area_nv": nv.area,
        "power_base": base.power, "power_nv": nv.power,
        "delay_base": base.delay, "delay_nv": nv.delay,
        "energy_base": base.energy, "energy_nv": nv.energy,
        "dvt_base": comparison.baseline_dvt.dvt, "dvt_nv": comparison.clustered_dvt.dvt,
        "area_pct": imp.area, "power_pct": imp.power, "delay_pct": imp.delay,
        "energy_pct": imp.energy, "edp_pct": imp.edp, "dvt_pct": comparison.dvt_reduction,
    }


def to_csv(rows: Iterable[Dict[str, Any]], columns: List[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in columns})
    return buffer.getvalue()


def monte_carlo_body(result: MonteCarloResult) -> Dict[str, Any]:
    return {
        "aggregate": {
            "trials": len(result.trials),
            "seed": result.seed,
            "dvt": result.dvt,
            "losses": result.losses.model_dump(),
            "forward_progress": result.forward_progress.model_dump(),
            "lost_writes": result.lost_writes.model_dump(),
        },
        "trials": [trial.model_dump(exclude={"outputs"}) for trial in result.trials],
    }


def paired_rows(result: PairedResult) -> List[Dict[str, Any]]:
    return [trial.model_dump() for trial in result.trials]


def paired_body(result: PairedResult) -> Dict[str, Any]:
    return {
        "aggregate": {
            "trials": len(result.trials),
            "seed": result.seed,
            "baseline_dvt": result.baseline_dvt,
            "clustered_dvt": result.clustered_dvt,
            "baseline_losses": result.baseline_losses.model_dump(),
            "clustered_losses": result.clustered_losses.model_dump(),
            "loss_difference": result.loss_difference.model_dump(),
        },
    }
