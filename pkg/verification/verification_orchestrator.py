#!/usr/bin/env python3
"""
Verification Orchestrator
Runs the acceptance experiments: closed-form oracle values, Monte-Carlo comparisons against the
resolvent oracle, crossover-chain diagnostics and reproducibility checks
"""

import dataclasses
import math
import os
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import stats

from estimation.accumulators import Estimate, MomentAccumulator
from estimation.chain_kernel import ck_test
from estimation.comparison import (
    ComparisonRow, bonferroni_threshold, compare, exact_row, quarter_step_check
)
from estimation.estimators import (
    collect_lifetimes, estimate_first_passage_lt, estimate_hitting_lt, estimate_lifetime,
    estimate_ray_frequencies, estimate_resolvent
)
from graph_core.graph_parser import load_graph
from graph_core.metric_graph import MetricGraph
from graph_core.tadpole_expander import expand_tadpoles
from resolvent.graph_functions import constant, default_probe_points, parse_function
from resolvent.kernels import (
    dirichlet_kernel, dirichlet_kernel_closed, hitting_lt, image_terms, rate
)
from resolvent.resolvent_solver import check_domain, solve_resolvent
from simulation.crossover_checker import check_crossover, check_many, crossover_count_bound
from simulation.paste_engine import CrossoverRecord, build_process, sample_path
from simulation.rng_streams import StreamKey, experiment_seed, make_generator
from verification.settings.config_manager import ConfigManager
from wentzell.wentzell_data import VertexData, WentzellData, validate


GRAPHS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "graphs")

# functional used on the two-vertex graph
TWO_VERTEX_BUMP = "bump:i1:0.5:0.3"
TADPOLE_BUMP = "bump:t:1.0:0.5"


def reference_graph(name: str):
    """(graph, data) of one of the bundled graph files"""
    return load_graph(os.path.join(GRAPHS_DIR, f"{name}.g"))


@dataclass
class PendingComparison:
    """A Monte-Carlo comparison whose z threshold is fixed once all comparisons are known"""
    experiment_id: str
    quantity: str
    reference: float
    estimate: Estimate
    bias_constant: float = 0.0
    floor: float = 0.0


@dataclass
class VerificationResult:
    rows: List[ComparisonRow]
    threshold: float
    comparisons: int
    experiments: List[str]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failed_rows(self) -> List[ComparisonRow]:
        return [row for row in self.rows if not row.passed]

    def context(self) -> Dict[str, object]:
        return {"experiments": ", ".join(self.experiments),
                "stochastic comparisons": self.comparisons,
                "per-row z threshold": f"{self.threshold:.4f}"}


class VerificationOrchestrator:
    """Main orchestrator for the acceptance suite behind `verify`"""

    EXPERIMENTS = {
        "AC-1": "_half_line_hitting",
        "AC-2": "_interval_hitting",
        "AC-3": "_kernel_values",
        "AC-4": "_conservation",
        "AC-5": "_two_vertex_resolvent",
        "AC-6": "_walsh_weights",
        "AC-7": "_hold_kill_lifetime",
        "AC-8": "_tadpole_equivalence",
        "AC-9": "_crossover_properties",
        "AC-10": "_chain_semigroup",
        "AC-11": "_resolvent_identity",
        "AC-12": "_determinism",
    }

    def __init__(self, config_manager: ConfigManager, paths: Optional[int] = None, step: Optional[float] = None,
                 horizon: Optional[float] = None, seed: int = 7, workers: int = 1,
                 lambdas: Optional[Sequence[float]] = None, log: Callable[[str], None] = print):
        self.config_manager = config_manager
        self.verification = config_manager.section("verification")
        self.paths = int(paths or self.verification.get("paths", 20000))
        self.step = float(step or self.verification.get("step", 1e-3))
        self.horizon = float(horizon or self.verification.get("horizon", 40.0))
        self.seed = int(seed)
        self.workers = int(workers)
        self.lambdas = [float(x) for x in (lambdas or self.verification.get("lambdas", [0.5]))]
        self.batch_size = config_manager.batch_size()
        self.quadrature = config_manager.quadrature()
        self.log = log
        self.entries: List[Union[ComparisonRow, PendingComparison]] = []

    # ------------------------------------------------------------------ running

    def run(self, experiments: Optional[Sequence[str]] = None, graph: Optional[MetricGraph] = None,
            data: Optional[WentzellData] = None, f_text: Optional[str] = None) -> VerificationResult:
        """Run the selected experiments (all by default), plus the checks on `graph` when given"""
        selected = list(experiments) if experiments else list(self.EXPERIMENTS)
        unknown = [e for e in selected if e not in self.EXPERIMENTS]
        if unknown:
            raise ValueError(f"unknown experiments: {', '.join(unknown)} "
                             f"(available: {', '.join(self.EXPERIMENTS)})")
        self.entries = []

        for experiment_id in selected:
            method = getattr(self, self.EXPERIMENTS[experiment_id])
            self.log(f"🔄 {experiment_id}: {method.__doc__.strip().splitlines()[0]}")
            method(experiment_id)
        if graph is not None:
            self.log(f"🔄 G: checks on {graph.name}")
            self.graph_checks("G", graph, data, f_text)
            selected.append("G")

        return self._finalize(selected)

    def _finalize(self, experiments: List[str]) -> VerificationResult:
        pending = [e for e in self.entries if isinstance(e, PendingComparison)]
        alpha = float(self.config_manager.section("statistics").get("bonferroni_alpha", 0.0027))
        threshold = bonferroni_threshold(len(pending), alpha) if pending else self.config_manager.z_threshold()

        rows = []
        for entry in self.entries:
            if isinstance(entry, PendingComparison):
                entry = compare(entry.reference, entry.estimate, threshold, entry.bias_constant,
                                entry.experiment_id, entry.quantity, entry.floor)
            rows.append(entry)

        for experiment in experiments:
            group = [row for row in rows if row.experiment_id == experiment]
            passed = sum(row.passed for row in group)
            marker = "✅" if passed == len(group) else "❌"
            self.log(f"{marker} {experiment}: {passed}/{len(group)} checks passed")
        self.log(f"📊 {sum(r.passed for r in rows)}/{len(rows)} checks passed "
                 f"({len(pending)} stochastic comparisons at |z| <= {threshold:.3f})")
        return VerificationResult(rows=rows, threshold=threshold, comparisons=len(pending),
                                  experiments=experiments)

    # ------------------------------------------------------------------ helpers

    def _seed(self, experiment_id: str, salt: int = 0) -> int:
        index = list(self.EXPERIMENTS).index(experiment_id) if experiment_id in self.EXPERIMENTS else 99
        return experiment_seed(self.seed, 1000 * (index + 1) + salt)

    def _horizon_for(self, lam: float) -> float:
        """Long enough that exp(-lambda T) is negligible"""
        return max(self.horizon, 20.0 / lam) if lam > 0 else self.horizon

    def _expect(self, experiment_id: str, quantity: str, reference: float, estimate: Estimate,
                bias: str = "", floor: float = 0.0):
        self.entries.append(PendingComparison(experiment_id, quantity, float(reference), estimate,
                                              self.config_manager.bias_constant(bias), floor))

    def _exact(self, experiment_id: str, quantity: str, reference: float, value: float, tolerance: float):
        self.entries.append(exact_row(experiment_id, quantity, reference, value, tolerance))

    def _flag(self, experiment_id: str, quantity: str, value: float, passed: bool, reference: float = 0.0,
              n_paths: int = 0, h: float = 0.0, seed: int = 0, z: float = 0.0):
        self.entries.append(ComparisonRow(experiment_id=experiment_id, quantity=quantity,
                                          reference=float(reference), mean=float(value), stderr=0.0, z=z,
                                          n_paths=n_paths, h=h, seed=seed, passed=bool(passed)))

    def _mc(self, **overrides) -> Dict:
        options = dict(n_paths=self.paths, step=self.step, workers=self.workers, batch_size=self.batch_size)
        options.update(overrides)
        return options

    # ------------------------------------------------------------------ experiments

    def _half_line_hitting(self, eid: str):
        """hitting Laplace transform from x = 1 on a half line"""
        g, data = reference_graph("half_line")
        spec = build_process(g, data)
        lam = 0.5
        start = g.point("e", 1.0)
        reference = hitting_lt(g, start, lam)["v"]
        estimate = estimate_hitting_lt(spec, start, lam, ["v"], horizon=self._horizon_for(lam),
                                       seed=self._seed(eid), **self._mc())["v"]
        self._expect(eid, "E exp(-0.5 H_v) from e:1", reference, estimate, "hitting_lt", floor=5e-3)

    def _interval_hitting(self, eid: str):
        """per-endpoint hitting Laplace transforms from the middle of the unit interval"""
        g, data = reference_graph("interval")
        spec = build_process(g, data)
        lam = 0.5
        start = g.point("i1", 0.5)
        references = hitting_lt(g, start, lam)
        horizon = self._horizon_for(lam)
        seed = self._seed(eid)

        coarse = estimate_hitting_lt(spec, start, lam, list(references), horizon=horizon, seed=seed, **self._mc())
        for v, reference in references.items():
            self._expect(eid, f"E exp(-0.5 H); H = H_{v}", reference, coarse[v], "hitting_lt")

        total = estimate_first_passage_lt(spec, start, lam, list(references), horizon=horizon, seed=seed,
                                          **self._mc())
        self._expect(eid, "E exp(-0.5 S_1)", sum(references.values()), total, "hitting_lt")

        if self.verification.get("repeat_at_quarter_step", True):
            fine_step = self.step / 4.0
            fine = estimate_hitting_lt(spec, start, lam, list(references), horizon=horizon, seed=seed,
                                       **self._mc(step=fine_step))
            for v, reference in references.items():
                self._expect(eid, f"E exp(-0.5 H); H = H_{v} at h/4", reference, fine[v], "hitting_lt")
                check = quarter_step_check(reference, coarse[v], fine[v])
                self._flag(eid, f"bias at h/4 shrinks; {v}", check.bias_fine, check.passed,
                           reference=check.bias_coarse, n_paths=self.paths, h=fine_step, seed=seed)

    def _kernel_values(self, eid: str):
        """Dirichlet kernel values, symmetry, vanishing at endpoints and series truncation"""
        tail = self.config_manager.tail_target()
        external = dirichlet_kernel(math.inf, 0.5, 1.0, 2.0)
        self._exact(eid, "external kernel lambda=0.5 x=1 y=2", math.exp(-1.0) - math.exp(-3.0), external, 1e-10)
        internal = dirichlet_kernel(1.0, 0.5, 0.5, 0.5, terms=image_terms(1.0, 0.5, tail))
        self._exact(eid, "internal kernel a=1 lambda=0.5 x=y=0.5", math.tanh(0.5), internal, 1e-10)

        rng = make_generator(StreamKey(self._seed(eid), 0, 0))
        count = int(self.verification.get("kernel_property_samples", 1000))
        asymmetry = vanishing = closed_gap = truncation = 0.0
        for _ in range(count):
            length = rng.uniform(0.2, 3.0)
            lam = rng.uniform(0.05, 5.0)
            x, y = rng.uniform(0.0, length, 2)
            terms = image_terms(length, lam, tail)
            kxy = dirichlet_kernel(length, lam, x, y, terms)
            asymmetry = max(asymmetry, abs(kxy - dirichlet_kernel(length, lam, y, x, terms)))
            closed_gap = max(closed_gap, abs(kxy - dirichlet_kernel_closed(length, lam, x, y)))
            truncation = max(truncation, abs(kxy - dirichlet_kernel(length, lam, x, y, 2 * terms)))
            vanishing = max(vanishing, abs(dirichlet_kernel(length, lam, 0.0, y, terms)),
                            abs(dirichlet_kernel(length, lam, x, length, terms)))

            u, w = rng.uniform(0.0, 5.0, 2)
            asymmetry = max(asymmetry, abs(dirichlet_kernel(math.inf, lam, u, w)
                                           - dirichlet_kernel(math.inf, lam, w, u)))
            vanishing = max(vanishing, abs(dirichlet_kernel(math.inf, lam, 0.0, w)))

        self._exact(eid, f"kernel symmetry, max gap over {count} draws", 0.0, asymmetry, 1e-12)
        self._exact(eid, f"kernel at an endpoint, max over {count} draws", 0.0, vanishing, 0.0)
        self._exact(eid, "image series vs closed form, max gap", 0.0, closed_gap, 1e-10)
        self._exact(eid, "image series, doubling the terms, max change", 0.0, truncation, 1e-10)

    def _conservation(self, eid: str):
        """no killing: lambda R_lambda 1 = 1 for the oracle and the sampler"""
        g, data = reference_graph("interval")
        spec = build_process(g, data)
        one = constant(1.0)
        paths = min(self.paths, int(self.verification.get("conservation_paths", 200)))
        for lam in self.lambdas:
            solution = solve_resolvent(g, data, one, lam, **self.quadrature)
            worst = max(abs(lam * row["u"] - 1.0) for row in solution.sample_rows())
            self._exact(eid, f"oracle lambda R 1 - 1, lambda={lam:g}", 0.0, worst, 1e-8)

            horizon = self._horizon_for(lam)
            estimate = estimate_resolvent(spec, g.point("i1", 0.25), one, lam, horizon=horizon,
                                          seed=self._seed(eid, int(lam * 1000)), **self._mc(n_paths=paths))
            self._expect(eid, f"R 1 at i1:0.25, lambda={lam:g}", 1.0 / lam, estimate, "resolvent",
                         floor=math.exp(-lam * horizon) / lam)

    def _two_vertex_resolvent(self, eid: str):
        """Monte-Carlo resolvent against the oracle on the two-vertex graph"""
        g, data = reference_graph("two_vertex")
        f = parse_function(TWO_VERTEX_BUMP, g)
        lam = 0.5
        solution = solve_resolvent(g, data, f, lam, **self.quadrature)
        report = check_domain(solution, data, f, lam)
        self._exact(eid, "vertex condition residual", 0.0, report.max_residual, 1e-8)

        spec = build_process(g, data)
        horizon = self._horizon_for(lam)
        probes = default_probe_points(g, int(self.verification.get("probe_points", 5)))
        for i, point in enumerate(probes):
            estimate = estimate_resolvent(spec, point, f, lam, horizon=horizon, seed=self._seed(eid, i),
                                          **self._mc())
            self._expect(eid, f"R f at {point}", solution.value_at(point), estimate, "resolvent")

        # edge interiors owned by the other endpoint: same process in law
        point = g.point("i1", 0.5)
        for attachment in ("initial", "final"):
            other = build_process(g, data, attachment=attachment)
            estimate = estimate_resolvent(other, point, f, lam, horizon=horizon,
                                          seed=self._seed(eid, 100 + len(attachment)), **self._mc())
            self._expect(eid, f"R f at {point}, {attachment} attachment", solution.value_at(point),
                         estimate, "resolvent")

    def _walsh_weights(self, eid: str):
        """Walsh ray-selection frequencies at a three-ray star"""
        g, data = reference_graph("walsh_star")
        spec = build_process(g, data)
        seed = self._seed(eid)
        paths = max(self.paths // 10, 100)
        horizon = float(self.verification.get("walsh_horizon", 4.0))
        frequencies = estimate_ray_frequencies(spec, "v", paths, horizon, self.step, seed,
                                               self.workers, self.batch_size)
        total = frequencies.total
        for ray, (p, q) in enumerate(zip(frequencies.frequencies, frequencies.expected)):
            stderr = math.sqrt(q * (1.0 - q) / max(total, 1))
            estimate = Estimate(float(p), stderr, total, seed, self.step, f"ray {ray}")
            self._expect(eid, f"selection frequency of ray {ray}", q, estimate)

    def _hold_kill_lifetime(self, eid: str):
        """exponential hold-and-kill at rate a/c"""
        g, data = reference_graph("hold_kill")
        spec = build_process(g, data)
        hold_rate = spec.regimes["v"].hold_rate
        start = g.vertex_point("v")
        horizon = max(self.horizon, 25.0 / hold_rate)

        estimate = estimate_lifetime(spec, start, self.paths, horizon, self.step, self._seed(eid),
                                     self.workers, self.batch_size)
        self._expect(eid, "mean lifetime", 1.0 / hold_rate, estimate, "lifetime")

        seed = self._seed(eid, 1)
        sample = collect_lifetimes(spec, start, self.paths, horizon, self.step, seed,
                                   self.workers, self.batch_size)
        result = stats.kstest(sample.lifetimes[sample.killed], "expon", args=(0.0, 1.0 / hold_rate))
        self._flag(eid, f"KS p-value against Exp({hold_rate:g})", result.pvalue, result.pvalue >= 0.01,
                   reference=0.01, n_paths=self.paths, h=self.step, seed=seed, z=float(result.statistic))

    def _tadpole_equivalence(self, eid: str):
        """direct tadpole solve against the solve on the expanded graph"""
        g, data = reference_graph("tadpole")
        f = parse_function(TADPOLE_BUMP, g)
        lam = 0.5
        direct = solve_resolvent(g, data, f, lam, **self.quadrature)
        expansion = expand_tadpoles(g, data)
        expanded = solve_resolvent(expansion.graph, expansion.data, expansion.transport_function(f), lam,
                                   **self.quadrature)

        count = int(self.verification.get("tadpole_grid_points", 50))
        length = g.edge_length("t")
        points = [g.point("t", x) for x in np.linspace(0.0, length, count // 2 + 2)[1:-1]]
        points += [g.point("e", x) for x in np.linspace(0.0, 5.0, count - len(points) + 1)[1:]]
        points.append(g.vertex_point("v"))
        gap = max(abs(direct.value_at(p) - expanded.value_at(expansion.map_point(p))) for p in points)
        self._exact(eid, f"tadpole vs expanded solve, max gap on {len(points)} points", 0.0, gap, 1e-8)

    def _crossover_properties(self, eid: str):
        """crossover chain diagnostics and fault injection"""
        count = int(self.verification.get("crossover_check_paths", 10000))
        factor = self.config_manager.kill_epsilon_factor()
        seed = self._seed(eid)
        for name, start_text in (("interval", "i1:0.3"), ("two_vertex", "i1:0.5")):
            g, data = reference_graph(name)
            spec = build_process(g, data)
            start = g.parse_point(start_text)
            horizon = 5.0
            records = [sample_path(spec, start, horizon, self.step, seed, path_id,
                                   max_crossovers=self.config_manager.max_crossovers())
                       for path_id in range(count)]
            diagnostics = check_many(records, factor)
            self._exact(eid, f"{name}: S_n not increasing", 0, diagnostics.strict_increase, 0)
            self._exact(eid, f"{name}: Y(S_n) != K_n", 0, diagnostics.position, 0)
            self._exact(eid, f"{name}: other crossover violations", 0,
                        diagnostics.total - diagnostics.strict_increase - diagnostics.position, 0)
            most = max((len(record.crossovers) for record in records), default=0)
            bound = crossover_count_bound(g, horizon)
            self._flag(eid, f"{name}: most crossovers up to T={horizon:g}", most, most < bound, reference=bound,
                       n_paths=count, h=self.step, seed=seed)

            injected = detected = 0
            for record in records:
                if len(record.crossovers) < 2:
                    continue
                injected += 1
                if check_crossover(swap_first_crossovers(record), factor).strict_increase > 0:
                    detected += 1
            self._flag(eid, f"{name}: swapped S_1, S_2 detected", detected,
                       injected > 0 and detected == injected, reference=injected, n_paths=count,
                       h=self.step, seed=seed)

    def _chain_semigroup(self, eid: str):
        """two-step crossover kernel against the composed one-step kernels"""
        g, data = reference_graph("two_vertex")
        spec = build_process(g, data)
        grid = self.config_manager.chain_lambda_grid()
        horizon = float(self.verification.get("chain_horizon", self.horizon))
        seed = self._seed(eid)
        report = ck_test(spec, "v1", grid, self.paths, horizon, self.step, seed, self.workers, self.batch_size)
        if report.insufficient:
            self.log(f"⚠️  {eid}: {report.missing_second:.0%} of the two-step paths saw no second crossover")
        for row in report.rows:
            estimate = Estimate(row.two_step, row.stderr, self.paths, seed, self.step, "two-step")
            self._expect(eid, f"two-step vs composed, lambda={row.lam:g}, K_2={row.target}",
                         row.composed, estimate, "chain")

        control_spec = build_process(g, _stickier(data, "v2"))
        control = ck_test(spec, "v1", grid, self.paths, horizon, self.step, self._seed(eid, 1), self.workers,
                          self.batch_size, two_step_spec=control_spec)
        self._flag(eid, "mismatched control, max |z|", control.max_abs_z,
                   control.max_abs_z > self.config_manager.z_threshold(),
                   reference=self.config_manager.z_threshold(), n_paths=self.paths, h=self.step, seed=seed)

    def _resolvent_identity(self, eid: str):
        """R_lambda f - R_mu f = (mu - lambda) R_lambda R_mu f"""
        g, data = reference_graph("two_vertex")
        f = parse_function(TWO_VERTEX_BUMP, g)
        lam, mu = 0.5, 2.0
        r_lam = solve_resolvent(g, data, f, lam, **self.quadrature)
        r_mu = solve_resolvent(g, data, f, mu, **self.quadrature)
        nested = solve_resolvent(g, data, r_mu.as_graph_function(), lam, **self.quadrature)
        points = default_probe_points(g, int(self.verification.get("identity_grid_points", 20)))
        gap = max(abs(r_lam.value_at(p) - r_mu.value_at(p) - (mu - lam) * nested.value_at(p)) for p in points)
        self._exact(eid, f"resolvent identity, max gap on {len(points)} points", 0.0, gap, 1e-6)

    def _determinism(self, eid: str):
        """bit-identical estimates for any worker count; merge associativity"""
        g, data = reference_graph("two_vertex")
        spec = build_process(g, data)
        f = parse_function(TWO_VERTEX_BUMP, g)
        lam = 0.5
        paths = min(self.paths, 2000)
        batch = max(paths // 8, 1)
        seed = self._seed(eid)
        estimates = [estimate_resolvent(spec, g.point("i1", 0.5), f, lam, paths, self._horizon_for(lam),
                                        self.step, seed, workers, batch)
                     for workers in (1, 4, 8)]
        identical = all(e.mean == estimates[0].mean and e.stderr == estimates[0].stderr for e in estimates)
        self._flag(eid, "identical estimate for 1, 4 and 8 workers", 0.0 if identical else 1.0, identical,
                   n_paths=paths, h=self.step, seed=seed)

        self._exact(eid, "accumulator merge, max relative change", 0.0, merge_discrepancy(seed), 1e-12)

    # ------------------------------------------------------------------ user graph

    def graph_checks(self, eid: str, g: MetricGraph, data: WentzellData, f_text: Optional[str] = None):
        """Oracle and Monte-Carlo checks on a user-supplied graph"""
        violations = validate(data, g)
        self._exact(eid, "Wentzell data violations", 0, len(violations), 0)
        if violations:
            for violation in violations:
                self.log(f"❌ {violation}")
            return

        f = parse_function(f_text, g) if f_text else constant(1.0)
        if g.has_tadpoles:
            self.log(f"🔄 Expanding tadpoles of {g.name}")
            expansion = expand_tadpoles(g, data)
            g, data, f = expansion.graph, expansion.data, expansion.transport_function(f)
        for lam in self.lambdas:
            solution = solve_resolvent(g, data, f, lam, **self.quadrature)
            report = check_domain(solution, data, f, lam)
            self._exact(eid, f"vertex condition residual, lambda={lam:g}", 0.0, report.max_residual, 1e-8)
            self._exact(eid, f"continuity gap, lambda={lam:g}", 0.0, report.continuity_gap, 1e-8)
            if data.killing_free() and not f.pieces:
                worst = max(abs(lam * row["u"] - f.default) for row in solution.sample_rows())
                self._exact(eid, f"oracle lambda R 1 - 1, lambda={lam:g}", 0.0, worst, 1e-8)

        spec = build_process(g, data)
        lam = self.lambdas[0]
        horizon = self._horizon_for(lam)
        for i, edge in enumerate(g.internal_edges[:3]):
            start = g.point(edge.id, edge.length / 2.0)
            references = hitting_lt(g, start, lam)
            seed = self._seed(eid, i)
            estimates = estimate_hitting_lt(spec, start, lam, list(references), horizon=horizon, seed=seed,
                                            **self._mc())
            for v, reference in references.items():
                self._expect(eid, f"E exp(-{lam:g} H); H = H_{v} from {start}", reference, estimates[v],
                             "hitting_lt")
            total = estimate_first_passage_lt(spec, start, lam, list(references), horizon=horizon,
                                              seed=seed, **self._mc())
            self._expect(eid, f"E exp(-{lam:g} S_1) from {start}", sum(references.values()), total, "hitting_lt")

        for i, edge in enumerate(g.external_edges[:3]):
            start = g.point(edge.id, 1.0)
            estimate = estimate_hitting_lt(spec, start, lam, [edge.vertex], horizon=horizon,
                                           seed=self._seed(eid, 10 + i), **self._mc())[edge.vertex]
            self._expect(eid, f"E exp(-{lam:g} H_{edge.vertex}) from {start}", math.exp(-rate(lam)), estimate,
                         "hitting_lt")

        solution = solve_resolvent(g, data, f, lam, **self.quadrature)
        for i, point in enumerate(default_probe_points(g, int(self.verification.get("probe_points", 5)))):
            estimate = estimate_resolvent(spec, point, f, lam, horizon=horizon, seed=self._seed(eid, 20 + i),
                                          **self._mc())
            self._expect(eid, f"R f at {point}, lambda={lam:g}", solution.value_at(point), estimate, "resolvent")

        count = min(int(self.verification.get("crossover_check_paths", 10000)), self.paths)
        start = default_probe_points(g, 1)[0]
        records = [sample_path(spec, start, 5.0, self.step, self._seed(eid, 30), path_id,
                               max_crossovers=self.config_manager.max_crossovers())
                   for path_id in range(count)]
        diagnostics = check_many(records, self.config_manager.kill_epsilon_factor())
        self._exact(eid, f"crossover violations over {count} paths", 0, diagnostics.total, 0)


def swap_first_crossovers(record):
    """Copy of a path record with S_1 and S_2 exchanged"""
    crossovers = record.crossovers
    times = list(crossovers.times)
    times[0], times[1] = times[1], times[0]
    corrupted = CrossoverRecord(origin=crossovers.origin, times=times, vertices=list(crossovers.vertices),
                                terminal=crossovers.terminal)
    return dataclasses.replace(record, crossovers=corrupted)


def merge_discrepancy(seed: int, count: int = 4000, width: int = 3) -> float:
    """Largest relative difference in mean and stderr between one accumulator and merged pieces"""
    rng = make_generator(StreamKey(seed, 0, 1))
    values = rng.standard_normal((count, width)) * np.array([1.0, 10.0, 0.1]) + np.array([0.5, -3.0, 2.0])
    whole = MomentAccumulator(width)
    whole.add_many(values)

    cuts = np.sort(rng.choice(np.arange(1, count), size=5, replace=False))
    pieces = []
    for chunk in np.split(values, cuts):
        accumulator = MomentAccumulator(width)
        accumulator.add_many(chunk)
        pieces.append(accumulator)
    left = pieces[0]
    for piece in pieces[1:]:
        left = left.merge(piece)
    right = pieces[-1]
    for piece in reversed(pieces[:-1]):
        right = piece.merge(right)

    worst = 0.0
    for merged in (left, right):
        for ours, theirs in ((merged.mean, whole.mean), (merged.stderr, whole.stderr)):
            worst = max(worst, float(np.max(np.abs(ours - theirs) / np.maximum(np.abs(theirs), 1e-300))))
    return worst


def _stickier(data: WentzellData, vertex: str) -> WentzellData:
    """Same flux directions at `vertex` with most of the weight moved to stickiness"""
    d = data[vertex]
    total_b = d.total_b
    shrink = 0.25
    b = {port: value * shrink for port, value in d.b.items()}
    changed = VertexData(a=d.a, b=b, c=d.c + total_b * (1.0 - shrink))
    return data.with_vertex(vertex, changed)
