#!/usr/bin/env python3
"""
Command Line Interface
Subcommands for validating graph files, solving the resolvent, sampling paths, Monte-Carlo
estimates, the crossover-chain test and the acceptance suite
"""

import argparse
import os
import sys
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from estimation.chain_kernel import chain_kernel, ck_test
from estimation.comparison import ComparisonRow, compare
from estimation.estimators import (
    HorizonTruncationWarning, estimate_first_passage_lt, estimate_hitting_lt, estimate_resolvent
)
from graph_core.graph_parser import load_graph
from graph_core.metric_graph import GraphPoint, MetricGraph
from graph_core.tadpole_expander import expand_tadpoles
from resolvent.graph_functions import default_probe_points, optional_function
from resolvent.kernels import hitting_lt
from resolvent.resolvent_solver import check_domain, solve_resolvent
from simulation.crossover_checker import check_many
from simulation.path_export import export_paths
from simulation.paste_engine import build_process, sample_path
from utils.config import SimulationConfig
from utils.run_logger import RunLogger
from verification.reporting.report_manager import ReportManager
from verification.settings.config_manager import ConfigManager
from verification.verification_orchestrator import VerificationOrchestrator
from wentzell.wentzell_data import WentzellData, validate


EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

SIMULATE_DEFAULT_PATHS = 10
DOMAIN_TOLERANCE = 1e-8

COMMANDS = {
    "validate": "check a graph file and its Wentzell data",
    "resolvent": "solve the resolvent equation and write u samples per edge",
    "simulate": "sample paths and write path and crossover dumps",
    "hitting-lt": "Monte-Carlo hitting-time Laplace transforms (with the closed form on an edge)",
    "estimate-resolvent": "Monte-Carlo resolvent at probe points against the oracle",
    "chain-test": "Chapman-Kolmogorov test of the crossover chain",
    "verify": "run the acceptance suite and write report.csv and summary.txt",
}


def _lambda_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values or any(not v >= 0 for v in values):
        raise argparse.ArgumentTypeError(f"lambda values must be non-negative: {text!r}")
    return values


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


@dataclass
class RunConfig:
    """One command invocation: flags over SIM_* environment values over built-in defaults"""
    command: str
    graph_path: Optional[str]
    lambdas: Optional[List[float]]
    n_paths: Optional[int]
    step: Optional[float]
    horizon: Optional[float]
    seed: int
    output_dir: str
    workers: int
    settings_path: str
    f_text: Optional[str] = None
    start: Optional[str] = None
    targets: List[str] = field(default_factory=list)
    vertex: Optional[str] = None
    grid: Optional[float] = None
    write_xlsx: bool = True

    @classmethod
    def from_args(cls, args: argparse.Namespace, env: SimulationConfig) -> "RunConfig":
        # verify falls back to the verification section of the JSON settings, not to SIM_*
        fallback = (lambda value: None) if args.command == "verify" else (lambda value: value)
        paths = args.paths
        if paths is None:
            paths = SIMULATE_DEFAULT_PATHS if args.command == "simulate" else fallback(env.paths)
        config = cls(
            command=args.command,
            graph_path=args.graph,
            lambdas=args.lambdas,
            n_paths=paths,
            step=args.step if args.step is not None else fallback(env.step),
            horizon=args.horizon if args.horizon is not None else fallback(env.horizon),
            seed=args.seed if args.seed is not None else env.seed,
            output_dir=args.out or env.output_dir,
            workers=args.workers if args.workers is not None else env.workers,
            settings_path=args.config or env.settings_path,
            f_text=args.f,
            start=args.start,
            targets=args.targets or [],
            vertex=args.vertex,
            grid=args.grid,
            write_xlsx=not args.no_xlsx,
        )
        config.validate()
        return config

    def validate(self):
        problems = []
        if self.command != "verify" and not self.graph_path:
            problems.append("--graph is required")
        if self.lambdas and self.command != "chain-test" and min(self.lambdas) == 0:
            problems.append("--lambda 0 is only meaningful for chain-test")
        if self.n_paths is not None and self.n_paths < 2:
            problems.append("--paths must be at least 2")
        if self.step is not None and not 0 < self.step < 1:
            problems.append("--step must lie in (0, 1)")
        if self.horizon is not None and not self.horizon > 0:
            problems.append("--horizon must be positive")
        if self.workers < 1:
            problems.append("--workers must be at least 1")
        if self.seed < 0:
            problems.append("--seed must be non-negative")
        if self.grid is not None and not self.grid > 0:
            problems.append("--grid must be positive")
        if problems:
            raise ValueError("; ".join(problems))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph file (see GRAPH_FORMAT_GUIDE.md)")
    common.add_argument("--lambda", dest="lambdas", type=_lambda_list,
                        help="comma-separated discount rates (default: 0.5, or the verification list)")
    common.add_argument("--paths", type=int, help="number of paths (default: SIM_PATHS; simulate: 10)")
    common.add_argument("--step", type=float, help="internal-time step h (default: SIM_STEP)")
    common.add_argument("--horizon", type=float, help="time horizon T (default: SIM_HORIZON)")
    common.add_argument("--seed", type=int, help="base seed (default: SIM_SEED)")
    common.add_argument("--out", help="output directory (default: SIM_OUTPUT_DIR)")
    common.add_argument("--workers", type=int, help="worker processes (default: SIM_WORKERS)")
    common.add_argument("--f", help="function family: const[:v], bump:<edge>:<c>:<w>[:h], indicator:<edge>:<w>")
    common.add_argument("--start", help="start point: a vertex id or <edge>:<x>")
    common.add_argument("--targets", type=_name_list, help="comma-separated target vertices")
    common.add_argument("--vertex", help="start vertex of the chain test")
    common.add_argument("--grid", type=float, help="resample dumped paths on a real-time grid of this spacing")
    common.add_argument("--config", help="JSON settings file (default: SIM_SETTINGS_PATH)")
    common.add_argument("--no-xlsx", action="store_true", help="skip report.xlsx")

    parser = argparse.ArgumentParser(
        prog="start.py",
        description="Brownian motion on metric graphs with Wentzell vertex conditions")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


# ---------------------------------------------------------------------- helpers

def _lambdas(config: RunConfig) -> List[float]:
    return config.lambdas or [0.5]


def _sampling_graph(g: MetricGraph, data: WentzellData, log: Callable[[str], None]):
    """Tadpoles are expanded before sampling; returns (graph, data, point map)"""
    if not g.has_tadpoles:
        return g, data, lambda point: point
    expansion = expand_tadpoles(g, data)
    log(f"🔄 Expanded tadpoles: {expansion.graph.summary()}")
    return expansion.graph, expansion.data, expansion.map_point


def _start_point(g: MetricGraph, config: RunConfig) -> GraphPoint:
    if config.start:
        return g.parse_point(config.start)
    connected = [v for v in g.vertices if g.is_connected_vertex(v)]
    return g.vertex_point(connected[0] if connected else g.vertices[0])


def _checks_passed(rows: List[ComparisonRow], log: Callable[[str], None]) -> int:
    failed = [row for row in rows if not row.passed]
    log(f"📊 {len(rows) - len(failed)}/{len(rows)} comparisons passed")
    for row in failed:
        log(f"❌ {row.quantity}: reference {row.reference:.8g}, estimate {row.mean:.8g} (z={row.z:.3g})")
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------- commands

def cmd_validate(config: RunConfig, settings: ConfigManager, log: Callable[[str], None]) -> int:
    g, data = load_graph(config.graph_path)
    log(f"📋 {g.summary()}")
    violations = validate(data, g)
    if violations:
        for violation in violations:
            log(f"❌ {violation}")
        return EXIT_CHECK_FAILED
    sampled, sampled_data, _ = _sampling_graph(g, data, log)
    for line in build_process(sampled, sampled_data).describe():
        log(f"   {line}")
    log("✅ Graph and Wentzell data are valid")
    return EXIT_OK


def cmd_resolvent(config: RunConfig, settings: ConfigManager, log: Callable[[str], None]) -> int:
    g, data = load_graph(config.graph_path)
    f = optional_function(config.f_text, g)
    frames = []
    worst = 0.0
    for lam in _lambdas(config):
        solution = solve_resolvent(g, data, f, lam, **settings.quadrature())
        report = check_domain(solution, data, f, lam)
        worst = max(worst, report.max_residual, report.continuity_gap)
        log(f"📊 lambda={lam:g}: condition {solution.condition:.3g}, max vertex residual {report.max_residual:.2e}")
        frame = pd.DataFrame(solution.sample_rows())
        frame.insert(0, "lambda", lam)
        frames.append(frame)
        vertex_rows = pd.DataFrame({"lambda": lam, "edge_id": "", "x": 0.0, "u": list(solution.vertex_values.values()),
                                    "vertex": list(solution.vertex_values)})
        frames.append(vertex_rows)

    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "resolvent.csv")
    table = pd.concat(frames, ignore_index=True)
    table["vertex"] = table["vertex"].fillna("")
    table[["lambda", "edge_id", "x", "vertex", "u"]].to_csv(path, index=False, float_format="%.12g")
    log(f"💾 Saved resolvent samples to {path}")
    if worst > DOMAIN_TOLERANCE:
        log(f"❌ Vertex conditions violated (worst residual {worst:.2e})")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_simulate(config: RunConfig, settings: ConfigManager, log: Callable[[str], None]) -> int:
    original, data = load_graph(config.graph_path)
    g, data, map_point = _sampling_graph(original, data, log)
    spec = build_process(g, data)
    start = map_point(_start_point(original, config))
    log(f"🔄 Sampling {config.n_paths} paths from {start} (h={config.step:g}, T={config.horizon:g})")
    records = [sample_path(spec, start, config.horizon, config.step, config.seed, path_id,
                           max_crossovers=settings.max_crossovers())
               for path_id in range(config.n_paths)]
    grid = np.arange(0.0, config.horizon + config.grid / 2.0, config.grid) if config.grid else None
    for path in export_paths(records, config.output_dir, grid):
        log(f"💾 Saved {path}")

    diagnostics = check_many(records, settings.kill_epsilon_factor())
    killed = sum(record.killed for record in records)
    log(f"📊 {killed}/{len(records)} paths killed; "
        f"{sum(len(record.crossovers) for record in records)} crossovers")
    if not diagnostics.ok:
        log(f"❌ Crossover violations: {diagnostics.as_dict()}")
        return EXIT_CHECK_FAILED
    log("✅ Crossover chains are consistent")
    return EXIT_OK


def cmd_hitting_lt(config: RunConfig, settings: ConfigManager, log: Callable[[str], None]) -> int:
    original, data = load_graph(config.graph_path)
    g, data, map_point = _sampling_graph(original, data, log)
    spec = build_process(g, data)
    if not config.start:
        raise ValueError("hitting-lt needs --start")
    start = map_point(original.parse_point(config.start))
    rows = []
    for lam in _lambdas(config):
        references = {} if start.is_vertex else hitting_lt(g, start, lam)
        targets = config.targets or list(references)
        if not targets:
            raise ValueError("hitting-lt needs --targets when starting at a vertex")
        estimates = estimate_hitting_lt(spec, start, lam, targets, config.n_paths, config.horizon, config.step,
                                        config.seed, config.workers, settings.batch_size())
        total = estimate_first_passage_lt(spec, start, lam, targets, config.n_paths, config.horizon,
                                          config.step, config.seed, config.workers, settings.batch_size())
        comparable = set(targets) == set(references)
        sigma = settings.z_threshold()
        bias = settings.bias_constant("hitting_lt")
        quantities = [(f"E exp(-{lam:g} H); H = H_{v} from {start}", estimates[v], references.get(v))
                      for v in targets]
        quantities.append((f"E exp(-{lam:g} H_V) from {start}", total, sum(references.values())))
        for quantity, estimate, reference in quantities:
            if comparable:
                rows.append(compare(reference, estimate, sigma, bias, "hitting-lt", quantity))
            else:
                # no closed form for this start and target set: reported only
                rows.append(ComparisonRow("hitting-lt", quantity, float("nan"), estimate.mean, estimate.stderr,
                                          float("nan"), estimate.n, estimate.step, estimate.seed, True))
        for row in rows[-len(targets) - 1:]:
            log(f"📊 {row.quantity}: {row.mean:.6f} ± {row.stderr:.6f}"
                + (f" (closed form {row.reference:.6f})" if comparable else ""))

    ReportManager(settings, config.output_dir).write_csv(rows, "hitting_lt.csv")
    compared = [row for row in rows if not np.isnan(row.reference)]
    return _checks_passed(compared, log) if compared else EXIT_OK


def cmd_estimate_resolvent(config: RunConfig, settings: ConfigManager, log: Callable[[str], None]) -> int:
    g, data = load_graph(config.graph_path)
    f = optional_function(config.f_text, g)
    sampled, sampled_data, map_point = _sampling_graph(g, data, log)
    spec = build_process(sampled, sampled_data)
    points = [g.parse_point(config.start)] if config.start else \
        default_probe_points(g, int(settings.section("verification").get("probe_points", 5)))
    transported = expand_tadpoles(g, data).transport_function(f) if g.has_tadpoles else f
    rows = []
    for lam in _lambdas(config):
        solution = solve_resolvent(g, data, f, lam, **settings.quadrature())
        for point in points:
            estimate = estimate_resolvent(spec, map_point(point), transported, lam, config.n_paths,
                                          config.horizon, config.step, config.seed, config.workers,
                                          settings.batch_size())
            row = compare(solution.value_at(point), estimate, settings.z_threshold(),
                          settings.bias_constant("resolvent"), "estimate-resolvent",
                          f"R({lam:g}) {f.name} at {point}")
            log(f"📊 {row.quantity}: {row.mean:.6f} ± {row.stderr:.6f} (oracle {row.reference:.6f})")
            rows.append(row)
    ReportManager(settings, config.output_dir).write_csv(rows, "estimate_resolvent.csv")
    return _checks_passed(rows, log)


def cmd_chain_test(config: RunConfig, settings: ConfigManager, log: Callable[[str], None]) -> int:
    g, data = load_graph(config.graph_path)
    g, data, _ = _sampling_graph(g, data, log)
    spec = build_process(g, data)
    connected = list(spec.connected_vertices)
    if not connected:
        raise ValueError(f"{g.name} has no connected vertices (no internal edges)")
    vertex = config.vertex or connected[0]
    grid = config.lambdas or settings.chain_lambda_grid()

    kernel = chain_kernel(spec, vertex, grid, config.n_paths, config.horizon, config.step, config.seed,
                          config.workers, settings.batch_size())
    log(f"📊 First crossover from {vertex}: {kernel.histogram()}")
    report = ck_test(spec, vertex, grid, config.n_paths, config.horizon, config.step, config.seed,
                     config.workers, settings.batch_size(), threshold=settings.z_threshold())
    if report.insufficient:
        log(f"⚠️  {report.missing_second:.0%} of the two-step paths saw no second crossover; "
            f"increase --horizon")

    os.makedirs(config.output_dir, exist_ok=True)
    kernel_path = os.path.join(config.output_dir, "chain_kernel.csv")
    pd.DataFrame(kernel.laplace_table(), columns=["lambda", "K_1", "value"]).to_csv(
        kernel_path, index=False, float_format="%.10g")
    test_path = os.path.join(config.output_dir, "chain_test.csv")
    pd.DataFrame([{"lambda": r.lam, "K_2": r.target, "two_step": r.two_step, "composed": r.composed,
                   "stderr": r.stderr, "z": r.z} for r in report.rows],
                 columns=["lambda", "K_2", "two_step", "composed", "stderr", "z"]).to_csv(
        test_path, index=False, float_format="%.10g")
    log(f"💾 Saved {kernel_path} and {test_path}")

    log(f"📊 max |z| = {report.max_abs_z:.3f} (threshold {report.threshold:g})")
    if not report.passed:
        log("❌ Two-step kernel differs from the composed one-step kernels")
        return EXIT_CHECK_FAILED
    log("✅ Chapman-Kolmogorov test passed")
    return EXIT_OK


def cmd_verify(config: RunConfig, settings: ConfigManager, log: Callable[[str], None]) -> int:
    orchestrator = VerificationOrchestrator(settings, paths=config.n_paths, step=config.step,
                                            horizon=config.horizon, seed=config.seed, workers=config.workers,
                                            lambdas=config.lambdas, log=log)
    graph = data = None
    if config.graph_path:
        graph, data = load_graph(config.graph_path)
    result = orchestrator.run(graph=graph, data=data, f_text=config.f_text)

    reports = ReportManager(settings, config.output_dir)
    context = dict(result.context())
    context.update({"seed": config.seed, "paths": orchestrator.paths, "step": orchestrator.step,
                    "horizon": orchestrator.horizon, "graph": config.graph_path or "-"})
    reports.write_csv(result.rows)
    reports.write_summary(result.rows, context)
    if config.write_xlsx:
        reports.write_workbook(result.rows)
    if result.passed:
        log("✅ All acceptance checks passed")
        return EXIT_OK
    log(f"❌ {len(result.failed_rows)} acceptance checks failed")
    return EXIT_CHECK_FAILED


HANDLERS: Dict[str, Callable[[RunConfig, ConfigManager, Callable[[str], None]], int]] = {
    "validate": cmd_validate,
    "resolvent": cmd_resolvent,
    "simulate": cmd_simulate,
    "hitting-lt": cmd_hitting_lt,
    "estimate-resolvent": cmd_estimate_resolvent,
    "chain-test": cmd_chain_test,
    "verify": cmd_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one subcommand and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        config = RunConfig.from_args(args, SimulationConfig())
    except ValueError as e:
        print(f"❌ Invalid arguments: {e}")
        return EXIT_USAGE

    try:
        log = RunLogger(config.output_dir)
        settings = ConfigManager(config.settings_path)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", HorizonTruncationWarning)
            code = HANDLERS[config.command](config, settings, log)
        for warning in caught:
            if issubclass(warning.category, HorizonTruncationWarning):
                log(f"⚠️  {warning.message}")
        return code
    except OSError as e:
        print(f"❌ I/O error: {e}")
        return EXIT_IO
    except ValueError as e:
        print(f"❌ {config.command} failed: {e}")
        return EXIT_CHECK_FAILED


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
