#!/usr/bin/env python3
"""
Tests for accumulators, oracle comparison, path functionals, Monte-Carlo estimators and the
crossover chain kernel
"""

import math
import os
import sys
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from graph_core.graph_parser import parse_graph
from graph_core.metric_graph import GraphPoint
from estimation.accumulators import Estimate, MomentAccumulator
from estimation.chain_kernel import chain_kernel, ck_test
from estimation.comparison import (
    REPORT_COLUMNS, bonferroni_threshold, compare, exact_row, quarter_step_check
)
from estimation.estimators import (
    HorizonTruncationWarning, check_horizon, collect_lifetimes, estimate_first_passage_lt,
    estimate_hitting_lt, estimate_lifetime, estimate_ray_frequencies, estimate_resolvent
)
from estimation.parallel_runner import MonteCarloJob, batch_bounds, run_job
from estimation.path_functionals import ChainTransform, DiscountedIntegral, HittingTransform, labels_for
from resolvent.graph_functions import bump, constant
from resolvent.kernels import hitting_lt
from resolvent.resolvent_solver import solve_resolvent
from simulation.paste_engine import CEMETERY, build_process, sample_path
from tests.test_data import HALF_LINE_HITTING, INTERVAL_DOC, INTERVAL_MIDPOINT_FIRST_PASSAGE, PATH3_DOC

STEP = 1e-3
SIGMA = 4.0

samples = st.lists(st.floats(min_value=-100.0, max_value=100.0), min_size=2, max_size=40)


@pytest.mark.unit
class TestMomentAccumulator:
    """Test streaming moments and their pairwise merge"""

    def test_matches_numpy(self):
        values = np.array([1.0, 4.0, 2.5, -3.0, 7.0])
        acc = MomentAccumulator()
        acc.add_many(values)
        assert acc.n == 5
        assert acc.mean[0] == pytest.approx(values.mean())
        assert acc.variance[0] == pytest.approx(values.var(ddof=1))
        assert acc.stderr[0] == pytest.approx(values.std(ddof=1) / math.sqrt(5))

    def test_covariance(self):
        acc = MomentAccumulator(2)
        acc.add_many([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        assert acc.covariance[0, 1] == pytest.approx(2.0)

    @given(samples, samples)
    @settings(max_examples=100, deadline=None)
    def test_merge_matches_sequential(self, left, right):
        a, b, whole = MomentAccumulator(), MomentAccumulator(), MomentAccumulator()
        a.add_many(left)
        b.add_many(right)
        whole.add_many(left + right)
        merged = a.merge(b)
        assert merged.n == whole.n
        assert merged.mean[0] == pytest.approx(whole.mean[0], abs=1e-9)
        assert merged.variance[0] == pytest.approx(whole.variance[0], rel=1e-9, abs=1e-9)

    def test_merge_with_empty(self):
        acc = MomentAccumulator()
        acc.add_many([1.0, 2.0, 3.0])
        merged = MomentAccumulator().merge(acc)
        assert merged.mean[0] == pytest.approx(2.0)
        assert merged.n == 3

    def test_merge_width_mismatch(self):
        with pytest.raises(ValueError):
            MomentAccumulator(1).merge(MomentAccumulator(2))

    def test_estimate_needs_two_samples(self):
        acc = MomentAccumulator()
        acc.add(1.0)
        assert np.isnan(acc.variance[0])
        with pytest.raises(ValueError):
            acc.estimate()

    def test_estimates_labels(self):
        acc = MomentAccumulator(2)
        acc.add_many([[0.0, 1.0], [1.0, 3.0]])
        first, second = acc.estimates(seed=4, step=0.01, labels=["a", "b"])
        assert (first.label, second.label) == ("a", "b")
        assert second.mean == pytest.approx(2.0)
        assert second.seed == 4


@pytest.mark.unit
class TestComparison:
    """Test oracle comparison rows and thresholds"""

    def test_z_scores(self):
        estimate = Estimate(mean=1.1, stderr=0.05, n=100, seed=1, step=STEP)
        assert estimate.z(1.0) == pytest.approx(2.0)
        exact = Estimate(mean=1.0, stderr=0.0, n=100, seed=1, step=STEP)
        assert exact.z(1.0) == 0.0
        assert exact.z(2.0) == -1e12

    def test_compare_within_sigma(self):
        row = compare(1.0, Estimate(1.1, 0.05, 100, 1, STEP), experiment_id="X", quantity="q")
        assert row.passed
        assert row.tolerance == pytest.approx(0.15)
        assert compare(1.0, Estimate(1.2, 0.05, 100, 1, STEP)).passed is False

    def test_compare_bias_and_floor(self):
        estimate = Estimate(1.2, 0.01, 100, 1, 0.1)
        assert compare(1.0, estimate, bias_constant=1.0).passed
        assert compare(1.0, Estimate(1.2, 0.01, 100, 1, STEP), floor=0.25).passed

    def test_compare_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            compare(1.0, Estimate(1.0, 0.1, 10, 1, STEP), sigma=0.0)

    def test_row_columns(self):
        row = compare(1.0, Estimate(1.0, 0.1, 10, 3, STEP, label="lbl"), experiment_id="AC-1")
        as_row = row.as_row()
        assert list(as_row) == REPORT_COLUMNS
        assert as_row["quantity"] == "lbl"
        assert as_row["pass"] is True

    def test_exact_row(self):
        assert exact_row("AC-3", "kernel", 1.0, 1.0 + 1e-12, 1e-10).passed
        assert not exact_row("AC-3", "kernel", 1.0, 1.1, 1e-10).passed

    def test_bonferroni_threshold(self):
        assert bonferroni_threshold(1) == pytest.approx(3.0, abs=1e-3)
        assert bonferroni_threshold(50) > bonferroni_threshold(10) > bonferroni_threshold(1)
        assert bonferroni_threshold(0) == bonferroni_threshold(1)

    def test_quarter_step_check(self):
        coarse = Estimate(1.02, 0.001, 1000, 1, STEP)
        assert quarter_step_check(1.0, coarse, Estimate(1.005, 0.001, 1000, 1, STEP / 4)).passed
        assert not quarter_step_check(1.0, coarse, Estimate(1.02, 0.001, 1000, 1, STEP / 4)).passed


@pytest.mark.unit
class TestPathFunctionals:
    """Test functionals evaluated on single paths"""

    def test_discounted_integral_while_held(self, hold_kill_spec):
        record = sample_path(hold_kill_spec, GraphPoint(vertex="v"), 1000.0, STEP, seed=2)
        value = DiscountedIntegral(constant(1.0), 0.5)(record)[0]
        assert value == pytest.approx((1.0 - math.exp(-0.5 * record.lifetime)) / 0.5, rel=1e-12)

    def test_hitting_transform(self, interval_spec):
        record = sample_path(interval_spec, GraphPoint(vertex="v1"), 50.0, STEP, seed=2, halt_on=["v2"])
        values = HittingTransform(["v1", "v2"], 0.5)(record)
        assert values[0] == 0.0
        assert values[1] == pytest.approx(math.exp(-0.5 * record.halt_time))

    def test_chain_transform_layout(self, interval_spec):
        record = sample_path(interval_spec, GraphPoint(vertex="v1"), 100.0, STEP, seed=2, max_crossovers=2)
        functional = ChainTransform(["v1", "v2"], [0.5, 1.0], order=2)
        values = functional(record)
        assert len(values) == functional.width == 5
        s2 = record.crossovers.times[1]
        assert values[0] == pytest.approx(math.exp(-0.5 * s2))
        assert values[2] == pytest.approx(math.exp(-1.0 * s2))
        assert values[1] == values[3] == 0.0
        assert values[4] == 1.0
        assert labels_for(functional)[0] == "lambda=0.5,K=v1"


@pytest.mark.unit
class TestParallelRunner:
    """Test batching and merging of Monte-Carlo jobs"""

    def test_batch_bounds(self):
        assert batch_bounds(25, 10) == [(0, 0, 10), (1, 10, 20), (2, 20, 25)]

    def test_rejects_bad_sizes(self, interval_spec):
        job = MonteCarloJob(spec=interval_spec, start=GraphPoint(vertex="v1"),
                            functional=DiscountedIntegral(constant(1.0), 2.0), horizon=1.0, step=0.01, seed=1)
        with pytest.raises(ValueError):
            run_job(job, 0)
        with pytest.raises(ValueError):
            run_job(job, 4, workers=0)

    def test_batch_size_does_not_change_values(self, interval_spec):
        job = MonteCarloJob(spec=interval_spec, start=GraphPoint(vertex="v1"),
                            functional=DiscountedIntegral(constant(1.0), 2.0), horizon=1.0, step=0.01,
                            seed=1, collect=True)
        one = run_job(job, 12, batch_size=12)
        three = run_job(job, 12, batch_size=4)
        np.testing.assert_array_equal(one.values, three.values)
        assert three.batches == 3
        assert one.accumulator.mean[0] == pytest.approx(three.accumulator.mean[0], abs=1e-12)

    @pytest.mark.integration
    def test_worker_count_does_not_change_result(self, interval_spec):
        start = interval_spec.graph.point("i1", 0.3)
        kwargs = dict(lam=0.5, targets=["v1", "v2"], n_paths=40, horizon=40.0, step=STEP, seed=9, batch_size=10)
        serial = estimate_hitting_lt(interval_spec, start, workers=1, **kwargs)
        parallel = estimate_hitting_lt(interval_spec, start, workers=2, **kwargs)
        for v in ("v1", "v2"):
            assert serial[v].mean == parallel[v].mean
            assert serial[v].stderr == parallel[v].stderr


@pytest.mark.unit
class TestEstimators:
    """Test the Monte-Carlo estimators against closed forms"""

    def test_hitting_lt_on_interval(self, interval_spec):
        start = interval_spec.graph.point("i1", 0.5)
        estimates = estimate_hitting_lt(interval_spec, start, 0.5, ["v1", "v2"], n_paths=1000,
                                        horizon=40.0, step=STEP, seed=3)
        exact = hitting_lt(interval_spec.graph, start, 0.5)
        for v in ("v1", "v2"):
            assert compare(exact[v], estimates[v], sigma=SIGMA, bias_constant=0.5).passed

    def test_first_passage_on_interval(self, interval_spec):
        start = interval_spec.graph.point("i1", 0.5)
        estimate = estimate_first_passage_lt(interval_spec, start, 0.5, ["v1", "v2"], n_paths=1000,
                                             horizon=40.0, step=STEP, seed=4)
        assert compare(INTERVAL_MIDPOINT_FIRST_PASSAGE, estimate, sigma=SIGMA, bias_constant=0.5).passed

    def test_stderr_shrinks_like_inverse_root_n(self, interval_spec):
        start = interval_spec.graph.point("i1", 0.5)
        small, large = (estimate_first_passage_lt(interval_spec, start, 0.5, ["v1", "v2"], n_paths=n,
                                                  horizon=40.0, step=2e-3, seed=10) for n in (500, 2000))
        assert small.stderr / large.stderr == pytest.approx(2.0, rel=0.2)

    def test_hitting_lt_on_half_line(self, half_line_spec):
        start = half_line_spec.graph.point("e", 1.0)
        estimate = estimate_hitting_lt(half_line_spec, start, 0.5, ["v"], n_paths=500, horizon=40.0,
                                       step=STEP, seed=5)["v"]
        assert compare(HALF_LINE_HITTING, estimate, sigma=SIGMA, bias_constant=0.5).passed

    def test_hitting_lt_from_target(self, interval_spec):
        estimate = estimate_hitting_lt(interval_spec, GraphPoint(vertex="v1"), 0.5, ["v1"], n_paths=4,
                                       horizon=40.0, step=STEP, seed=5)["v1"]
        assert estimate.mean == 1.0
        assert estimate.stderr == 0.0

    def test_bad_targets(self, interval_spec):
        start = GraphPoint(vertex="v1")
        with pytest.raises(ValueError, match="empty"):
            estimate_hitting_lt(interval_spec, start, 0.5, [], 4, 40.0, STEP, 1)
        with pytest.raises(ValueError, match="unknown"):
            estimate_first_passage_lt(interval_spec, start, 0.5, ["w"], 4, 40.0, STEP, 1)

    def test_resolvent_conservation(self, interval_spec):
        estimate = estimate_resolvent(interval_spec, interval_spec.graph.point("i1", 0.2), constant(1.0), 2.0,
                                      n_paths=20, horizon=10.0, step=STEP, seed=6)
        assert estimate.mean == pytest.approx(0.5 * (1.0 - math.exp(-20.0)), abs=1e-4)

    def test_resolvent_rejects_bad_lambda(self, interval_spec):
        with pytest.raises(ValueError):
            estimate_resolvent(interval_spec, GraphPoint(vertex="v1"), constant(1.0), 0.0, 2, 10.0, STEP, 1)

    def test_short_horizon_warns(self, interval_spec):
        with pytest.warns(HorizonTruncationWarning):
            estimate_resolvent(interval_spec, GraphPoint(vertex="v1"), constant(1.0), 0.5,
                               n_paths=2, horizon=1.0, step=0.01, seed=1)

    def test_short_horizon_allowed(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert check_horizon(0.5, 1.0, allow_short_horizon=True) is False
            assert check_horizon(0.5, 40.0) is True

    def test_lifetime(self, hold_kill_spec):
        estimate = estimate_lifetime(hold_kill_spec, GraphPoint(vertex="v"), n_paths=2000, horizon=100.0,
                                     step=STEP, seed=7)
        assert abs(estimate.mean - 4.0) <= SIGMA * estimate.stderr

    def test_lifetime_censoring_warns(self, hold_kill_spec):
        with pytest.warns(HorizonTruncationWarning):
            estimate_lifetime(hold_kill_spec, GraphPoint(vertex="v"), n_paths=50, horizon=0.5, step=STEP, seed=7)

    def test_collect_lifetimes(self, hold_kill_spec):
        sample = collect_lifetimes(hold_kill_spec, GraphPoint(vertex="v"), n_paths=30, horizon=200.0,
                                   step=STEP, seed=8)
        assert sample.lifetimes.shape == (30,)
        assert sample.censored == 0
        assert np.all(sample.lifetimes > 0)

    def test_ray_frequencies(self, walsh_spec):
        frequencies = estimate_ray_frequencies(walsh_spec, "v", n_paths=300, horizon=1.0, step=STEP, seed=9)
        assert frequencies.total > 1000
        assert frequencies.counts.sum() == frequencies.total
        np.testing.assert_allclose(frequencies.expected, [0.5, 0.3, 0.2])
        assert np.all(np.abs(frequencies.z_scores) < 4.5)
        assert [row["ray"] for row in frequencies.rows()] == [0, 1, 2]


@pytest.mark.integration
class TestStickyKillingResolvent:
    """Monte-Carlo resolvent on a graph with sticky and killing vertices against the oracle"""

    @pytest.mark.parametrize("point_text", ["v1", "i1:0.5", "v2"])
    def test_matches_solver(self, two_vertex, two_vertex_spec, point_text):
        g, data = two_vertex
        f = bump(g, "i1", 0.5, 0.3)
        point = g.parse_point(point_text)
        exact = solve_resolvent(g, data, f, 0.5).value_at(point)
        estimate = estimate_resolvent(two_vertex_spec, point, f, 0.5, n_paths=1500, horizon=40.0,
                                      step=2e-3, seed=21)
        assert abs(estimate.z(exact)) <= SIGMA


@pytest.mark.unit
class TestChainKernel:
    """Test the empirical crossover kernel and the two-step consistency test"""

    def test_interval_kernel(self, interval_spec):
        kernel = chain_kernel(interval_spec, "v1", [0.0, 0.5], n_paths=100, horizon=20.0, step=STEP, seed=1)
        assert kernel.n == 100
        assert kernel.histogram() == {"v1": 0, "v2": 100, CEMETERY: 0}
        assert kernel.mass() == 1.0
        assert kernel.laplace(0.0)["v2"] == pytest.approx(1.0)
        assert kernel.laplace(0.5)["v1"] == 0.0
        assert 0.0 < kernel.laplace(0.5)["v2"] < 1.0
        assert len(kernel.laplace_table()) == 4

    def test_mass_column(self):
        """At lambda = 0 both sides are crossover probabilities"""
        spec = build_process(*parse_graph(PATH3_DOC))
        report = ck_test(spec, "v1", [0.0, 0.5], n_paths=400, horizon=30.0, step=2e-3, seed=4,
                         threshold=SIGMA)
        mass = [row for row in report.rows if row.lam == 0.0]
        assert [row.target for row in mass] == ["v1", "v2", "v3"]
        assert sum(row.two_step for row in mass) == pytest.approx(1.0)
        assert sum(row.composed for row in mass) == pytest.approx(1.0)
        assert mass[1].two_step == 0.0 and mass[1].composed == 0.0
        assert abs(mass[0].two_step - 0.3) <= SIGMA * math.sqrt(0.3 * 0.7 / 400)
        assert report.missing_second == 0.0
        assert report.passed

    def test_unconnected_vertex(self, half_line_spec):
        with pytest.raises(ValueError, match="not a connected vertex"):
            chain_kernel(half_line_spec, "v", [0.5], n_paths=2, horizon=1.0, step=STEP, seed=1)

    def test_consistent_process_passes(self, interval_spec):
        report = ck_test(interval_spec, "v1", [0.5, 1.0], n_paths=200, horizon=20.0, step=STEP, seed=2,
                         threshold=SIGMA)
        assert len(report.rows) == 4
        assert not report.insufficient
        assert report.passed

    def test_mismatched_process_fails(self, interval_spec):
        g, data = parse_graph(INTERVAL_DOC.replace("iedge i1 v1 v2 1.0", "iedge i1 v1 v2 2.0"))
        longer = build_process(g, data)
        report = ck_test(interval_spec, "v1", [0.5], n_paths=200, horizon=20.0, step=STEP, seed=2,
                         two_step_spec=longer, threshold=SIGMA)
        assert not report.passed
        assert report.max_abs_z > SIGMA
