# app/cli.py
"""
Command-line entry point: `python -m app <subcommand> ...`

    validate  parse and validate a .bench file
    libdump   print the PG cell library
    synth     NV-Cluster a circuit, write plan + transformed bench
    analyze   cost/DVT of baseline vs. clustered design
    simulate  Monte-Carlo intermittent execution
    sweep     analyze every bundled benchmark into one CSV

Exit codes: 0 success, 1 usage, 2 parse/validation, 3 analysis/simulation.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from . import config
from .errors import EXIT_INVALID_INPUT, EXIT_USAGE, NvClusterError
from .services import reports
from .services.analysis import analyze_design, retarget_barrier
from .services.bench import emit_bench, load_bench
from .services.clustering import ClusterPlan, apply_plan, nv_cluster
from .services.intermit import (
    HarvesterModel,
    generate_trace,
    jittered_trace,
    monte_carlo,
    paired_monte_carlo,
    trial_seed,
    write_trace_csv,
)
from .services.netlist import Netlist
from .services.pglib import PgLibrary, build_library
from .services.techfile import TechParams, load_tech

logger = logging.getLogger(__name__)

FORMATS = ("json", "text", "csv")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class RunConfig(BaseModel):
    bench: Optional[Path] = None
    tech: Path = config.TECH_FILE
    out: Path = config.OUTPUT_DIR
    bench_dir: Path = config.BENCH_DIR
    max_leaves: int = Field(config.MAX_LEAVES, ge=1, le=6)
    inversion: bool = config.ENABLE_OUTPUT_INVERSION
    trials: int = Field(config.DEFAULT_TRIALS, ge=1)
    seed: int = Field(config.DEFAULT_SEED, ge=0)
    horizon_ns: float = Field(config.DEFAULT_HORIZON_NS, gt=0)
    jitter: float = Field(config.DEFAULT_JITTER, ge=0, lt=0.5)
    jobs: int = Field(config.MAX_JOBS, ge=1)
    paired: bool = False
    format: str = "json"
    delta: Optional[float] = Field(None, gt=0, le=100)
    allow_nv: bool = False
    harvester: HarvesterModel = Field(default_factory=HarvesterModel)

    @field_validator("format")
    @classmethod
    def _known_format(cls, value: str) -> str:
        if value not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        return value

    def check_paths(self) -> None:
        """Inputs must exist before any work starts."""
        for label, path in (("bench", self.bench), ("tech", self.tech)):
            if path is not None and not path.is_file():
                raise FileNotFoundError(f"{label} file not found: {path}")

    def output_dir(self) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out


def _add_common(p: argparse.ArgumentParser, bench: bool = True) -> None:
    if bench:
        p.add_argument("bench", type=Path, help="ISCAS-89 .bench file")
    p.add_argument("--tech", type=Path, default=config.TECH_FILE, help="technology file")
    p.add_argument("--out", type=Path, default=config.OUTPUT_DIR, help="output directory")
    p.add_argument("--max-leaves", type=int, default=config.MAX_LEAVES)
    p.add_argument("--no-inversion", dest="inversion", action="store_false", default=config.ENABLE_OUTPUT_INVERSION,
                   help="PG cells without output inversion")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nvcluster", description="NV-Clustering synthesis and analysis toolchain")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse and validate a .bench file")
    p.add_argument("bench", type=Path)
    p.add_argument("--allow-nv", action="store_true", help="accept NVFF/LEFF lines")

    p = sub.add_parser("libdump", help="print the PG cell library")
    _add_common(p, bench=False)

    p = sub.add_parser("synth", help="NV-Cluster a circuit")
    _add_common(p)

    p = sub.add_parser("analyze", help="cost and DVT of baseline vs. clustered")
    _add_common(p)
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--delta", type=float, default=None, help="retarget MTJ barrier [kT]")

    p = sub.add_parser("simulate", help="Monte-Carlo intermittent execution")
    _add_common(p)
    p.add_argument("--allow-nv", action="store_true", help="input is an already transformed design")
    p.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--horizon-ns", type=float, default=config.DEFAULT_HORIZON_NS)
    p.add_argument("--jitter", type=float, default=config.DEFAULT_JITTER)
    p.add_argument("--jobs", type=int, default=config.MAX_JOBS)
    p.add_argument("--paired", action="store_true", help="also run the all-NVFF baseline on the same traces")
    p.add_argument("--capacitance-nf", type=float, default=config.HARVEST_CAPACITANCE_NF)
    p.add_argument("--harvest-ua", type=float, default=config.HARVEST_CURRENT_UA)
    p.add_argument("--load-ua", type=float, default=config.LOAD_CURRENT_UA)
    p.add_argument("--v-on", type=float, default=config.HARVEST_V_ON)
    p.add_argument("--v-off", type=float, default=config.HARVEST_V_OFF)
    p.add_argument("--v-max", type=float, default=config.HARVEST_V_MAX)

    p = sub.add_parser("sweep", help="analyze every benchmark in a directory")
    _add_common(p, bench=False)
    p.add_argument("--bench-dir", type=Path, default=config.BENCH_DIR)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields and v is not None}
    try:
        if args.command == "simulate":
            fields["harvester"] = HarvesterModel(
                capacitance_nf=args.capacitance_nf,
                harvest_ua=args.harvest_ua,
                load_ua=args.load_ua,
                v_on=args.v_on,
                v_off=args.v_off,
                v_max=args.v_max,
            )
        return RunConfig(**fields)
    except ValidationError as e:
        raise UsageError(str(e)) from None


def _load_library(run: RunConfig, tech: TechParams) -> PgLibrary:
    return build_library(allow_inversion=run.inversion, costs=tech.pg)


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    logger.info(f"Wrote {path}")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def cmd_validate(run: RunConfig) -> int:
    netlist = load_bench(run.bench, allow_nv=run.allow_nv)
    c = netlist.counts()
    ffs = f"dffs={c['dffs']}"
    if c["nvffs"] or c["leffs"]:
        ffs += f" nvffs={c['nvffs']} leffs={c['leffs']}"
    print(f"inputs={c['inputs']} outputs={c['outputs']} {ffs} gates={c['gates']} OK")
    return 0


def cmd_libdump(run: RunConfig) -> int:
    tech = load_tech(run.tech)
    sys.stdout.write(_load_library(run, tech).dump())
    return 0


def _synthesize(run: RunConfig, netlist: Netlist, tech: TechParams):
    plan = nv_cluster(netlist, _load_library(run, tech), run.max_leaves)
    return plan, apply_plan(netlist, plan)


def cmd_synth(run: RunConfig) -> int:
    tech = load_tech(run.tech)
    netlist = load_bench(run.bench)
    plan, transformed = _synthesize(run, netlist, tech)
    out = run.output_dir()
    _write(out / f"{netlist.name}.plan", plan.dump())
    _write(out / f"{netlist.name}.nv.bench", emit_bench(transformed))
    print(plan.summary())
    return 0


def _analysis_tech(run: RunConfig) -> TechParams:
    tech = load_tech(run.tech)
    return retarget_barrier(tech, run.delta) if run.delta is not None else tech


def cmd_analyze(run: RunConfig) -> int:
    tech = _analysis_tech(run)
    netlist = load_bench(run.bench)
    comparison = analyze_design(netlist, tech, _load_library(run, tech), run.max_leaves)
    out = run.output_dir()
    _write(out / f"{netlist.name}.analysis.json", reports.to_json(comparison.model_dump(), tech))
    _write(out / f"{netlist.name}.analysis.txt", reports.comparison_text(comparison, tech))
    if run.format == "json":
        sys.stdout.write(reports.to_json(comparison.model_dump(), tech))
    elif run.format == "text":
        sys.stdout.write(reports.comparison_text(comparison, tech))
    else:
        sys.stdout.write(reports.to_csv([reports.comparison_row(comparison)], reports.SWEEP_COLUMNS))
    return 0


def cmd_simulate(run: RunConfig) -> int:
    tech = load_tech(run.tech)
    source = load_bench(run.bench, allow_nv=run.allow_nv)
    if source.counts()["dffs"]:
        _, design = _synthesize(run, source, tech)
    elif run.paired:
        raise UsageError("--paired needs the original (DFF) circuit to build the baseline")
    else:
        design = source

    out = run.output_dir()
    base_trace = generate_trace(run.harvester, run.horizon_ns)
    # first trial's trace, for inspection
    write_trace_csv(out / f"{source.name}.trace.csv", jittered_trace(base_trace, run.jitter, trial_seed(run.seed, 0)))

    result = monte_carlo(design, tech, run.harvester, run.trials, run.seed, run.horizon_ns, run.jitter, jobs=run.jobs)
    _write(out / f"{source.name}.sim.json", reports.to_json(reports.monte_carlo_body(result), tech))

    if run.paired:
        baseline = apply_plan(source, ClusterPlan.empty(source))
        paired = paired_monte_carlo(
            baseline, design, tech, run.harvester, run.trials, run.seed, run.horizon_ns, run.jitter, jobs=run.jobs
        )
        _write(out / f"{source.name}.paired.csv", reports.to_csv(reports.paired_rows(paired), reports.PAIRED_COLUMNS))
        _write(out / f"{source.name}.paired.json", reports.to_json(reports.paired_body(paired), tech))

    agg = result.losses
    print(
        f"trials={run.trials} seed={run.seed} dvt={result.dvt:.4f} "
        f"losses={agg.mean:.4f} [{agg.low:.4f}, {agg.high:.4f}] "
        f"progress={result.forward_progress.mean:.6f}"
    )
    return 0


def cmd_sweep(run: RunConfig) -> int:
    tech = load_tech(run.tech)
    library = _load_library(run, tech)
    benches = sorted(run.bench_dir.glob("*.bench"))
    if not benches:
        raise UsageError(f"no .bench files in {run.bench_dir}")
    rows = []
    for path in benches:
        netlist = load_bench(path)
        if not netlist.ffs and not netlist.gates:
            logger.warning(f"Skipping {path.name}: empty circuit")
            continue
        comparison = analyze_design(netlist, tech, library, run.max_leaves)
        rows.append(reports.comparison_row(comparison))
    text = reports.to_csv(rows, reports.SWEEP_COLUMNS)
    _write(run.output_dir() / "sweep.csv", text)
    sys.stdout.write(text)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "libdump": cmd_libdump,
    "synth": cmd_synth,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else getattr(logging, config.LOG_LEVEL, logging.INFO)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        run = _run_config(args)
        run.check_paths()
        return COMMANDS[args.command](run)
    except UsageError as e:
        print(f"nvcluster: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NvClusterError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=args.verbose)
        print(f"nvcluster: error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"nvcluster: error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
