"""
Tests for the annealing solver and the opposition-based localizer.
"""
import math
import os
import sys
import unittest
from unittest.mock import patch

import numpy as np

# Add the parent directory to the path so we can import our modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.model.geometry import Bounds, Position
from src.model.path_loss import PathLossParams
from src.model.scenario import Scenario, generate_measurements, ml_cost
from src.baselines.grid_oracle import grid_oracle
from src.solver.annealing import (
    FINAL_STEP_RATIO,
    acceptance_probability,
    anneal,
    propose_neighbor,
    step_at,
    step_size,
)
from src.solver.config import FIXED, INIT_LLS, STEP_CONSTANT, SaaConfig, TemperaturePolicy
from src.solver.obl import (
    Branch,
    branch_streams,
    localize,
    localize_single,
    oppose,
    random_initial,
)
from src.utils.errors import InputValidationError

BOX = Bounds.square(40.0)


class ScriptedRng:
    """Stand-in random stream returning preset values."""

    def __init__(self, uniforms=None, randoms=None):
        self.uniforms = list(uniforms or [])
        self.randoms = list(randoms or [])

    def uniform(self, low=0.0, high=1.0, size=None):
        return np.asarray(self.uniforms.pop(0), dtype=float)

    def random(self, size=None):
        value = self.randoms.pop(0)
        return np.asarray(value, dtype=float) if size is not None else float(value)

    def integers(self, low, high=None, size=None):
        return 0


def noisy_instance(seed, sigma=2.0, n_anchors=10):
    rng = np.random.default_rng(seed)
    anchors = tuple(Position(*xy) for xy in rng.random((n_anchors, 2)) * 40.0)
    scenario = Scenario(anchors, PathLossParams(sigma=sigma), BOX)
    truth = Position(*rng.random(2) * 40.0)
    return scenario, truth, generate_measurements(scenario, truth, rng)


class TestObl(unittest.TestCase):
    """Test cases for random starts and opposite points."""

    def test_random_initial_corners_and_center(self):
        """Test r = (0,0), (1,1) and (0.5,0.5)."""
        self.assertEqual(random_initial(BOX, ScriptedRng(randoms=[[0.0, 0.0]])), Position(0.0, 0.0))
        self.assertEqual(random_initial(BOX, ScriptedRng(randoms=[[1.0, 1.0]])), Position(40.0, 40.0))
        self.assertEqual(random_initial(BOX, ScriptedRng(randoms=[[0.5, 0.5]])), Position(20.0, 20.0))

    def test_random_initial_inside_bounds(self):
        """Test that random starts stay in the box."""
        rng = np.random.default_rng(0)
        box = Bounds(Position(-5.0, 10.0), Position(3.0, 12.0))
        for _ in range(200):
            self.assertTrue(box.contains(random_initial(box, rng)))

    def test_oppose_examples(self):
        """Test reflection, center fixed point, and corners."""
        self.assertEqual(oppose(Position(10, 30), BOX), Position(30, 10))
        self.assertEqual(oppose(Position(20, 20), BOX), Position(20, 20))
        self.assertEqual(oppose(Position(0, 40), BOX), Position(40, 0))

    def test_oppose_involution(self):
        """Test that opposing twice returns the point, up to rounding, and stays in bounds."""
        rng = np.random.default_rng(1)
        for xy in rng.random((200, 2)) * 40.0:
            point = Position(*xy)
            opposite = oppose(point, BOX)
            self.assertTrue(BOX.contains(opposite))
            twice = oppose(opposite, BOX)
            self.assertAlmostEqual(twice.x1, point.x1, delta=1e-12)
            self.assertAlmostEqual(twice.x2, point.x2, delta=1e-12)

    def test_oppose_non_integer_bounds(self):
        """Test that opposite points of boundary points stay inside a box with inexact edges."""
        box = Bounds(Position(0.1, 0.1), Position(0.7, 0.7))
        for point in (Position(0.7, 0.7), Position(0.1, 0.7), Position(0.7, 0.1), Position(0.1, 0.1)):
            opposite = oppose(point, box)
            self.assertTrue(box.contains(opposite))
            self.assertAlmostEqual(opposite.x1, 0.8 - point.x1, delta=1e-12)
            self.assertAlmostEqual(opposite.x2, 0.8 - point.x2, delta=1e-12)


class TestMetropolis(unittest.TestCase):
    """Test cases for the acceptance rule."""

    def test_examples(self):
        """Test downhill moves and analytic values."""
        self.assertEqual(acceptance_probability(-1.0, 5.0), 1.0)
        self.assertEqual(acceptance_probability(0.0, 5.0), 1.0)
        self.assertAlmostEqual(acceptance_probability(3.0 * 2.0, 2.0, k=3.0), math.exp(-1.0), places=12)
        self.assertAlmostEqual(acceptance_probability(2.0 * 7.0, 7.0), math.exp(-2.0), places=12)

    def test_monotonicity(self):
        """Test non-increasing in delta and non-decreasing in temperature."""
        deltas = np.linspace(0.0, 50.0, 101)
        by_delta = [acceptance_probability(d, 4.0) for d in deltas]
        self.assertTrue(all(a >= b for a, b in zip(by_delta, by_delta[1:])))
        temperatures = np.linspace(0.1, 100.0, 101)
        by_temperature = [acceptance_probability(3.0, t) for t in temperatures]
        self.assertTrue(all(a <= b for a, b in zip(by_temperature, by_temperature[1:])))
        for p in by_delta + by_temperature + [acceptance_probability(1e6, 1e-6)]:
            self.assertGreater(p, 0.0)
            self.assertLessEqual(p, 1.0)

    def test_invalid_temperature(self):
        """Test that T and k must be positive."""
        with self.assertRaises(InputValidationError):
            acceptance_probability(1.0, 0.0)
        with self.assertRaises(InputValidationError):
            acceptance_probability(1.0, 1.0, k=0.0)


class TestProposeNeighbor(unittest.TestCase):
    """Test cases for neighbour proposals."""

    def test_examples(self):
        """Test zero perturbation, clamping, and plain arithmetic."""
        step = (16.0, 16.0)
        self.assertEqual(propose_neighbor(Position(7, 9), step, BOX, ScriptedRng(uniforms=[[0, 0]])), Position(7, 9))
        self.assertEqual(propose_neighbor(Position(39, 39), step, BOX, ScriptedRng(uniforms=[[1, 1]])),
                         Position(40, 40))
        self.assertEqual(propose_neighbor(Position(20, 20), step, BOX, ScriptedRng(uniforms=[[-0.5, 0.25]])),
                         Position(12, 24))

    def test_consumes_two_uniforms(self):
        """Test that one proposal uses exactly two uniform draws."""
        rng = np.random.default_rng(3)
        reference = np.random.default_rng(3)
        propose_neighbor(Position(5, 5), (4.0, 4.0), BOX, rng)
        reference.uniform(size=2)
        self.assertEqual(rng.random(), reference.random())

    def test_stays_in_bounds(self):
        """Test that proposals are clamped into the box."""
        rng = np.random.default_rng(4)
        for _ in range(500):
            point = propose_neighbor(Position(*rng.random(2) * 40.0), (30.0, 30.0), BOX, rng)
            self.assertTrue(BOX.contains(point))

    def test_rejects_non_positive_step(self):
        """Test step validation."""
        with self.assertRaises(InputValidationError):
            propose_neighbor(Position(5, 5), (0.0, 1.0), BOX, np.random.default_rng(0))


class TestSaaConfig(unittest.TestCase):
    """Test cases for solver configuration."""

    def test_defaults(self):
        """Test the recommended operating point."""
        config = SaaConfig()
        self.assertEqual((config.epsilon, config.lambda_, config.n_max, config.k), (0.9, 0.4, 500, 1.0))

    def test_validation(self):
        """Test the parameter ranges."""
        for bad in ({"epsilon": 1.0}, {"epsilon": 0.0}, {"lambda_": 0.0}, {"lambda_": 1.5},
                    {"n_max": 0}, {"k": -1.0}, {"init": "grid"}, {"step_schedule": "linear"}):
            with self.assertRaises(InputValidationError):
                SaaConfig(**bad)

    def test_dict_round_trip(self):
        """Test the JSON form, including a fixed temperature policy."""
        config = SaaConfig(epsilon=0.8, lambda_=0.3, n_max=250, t0_policy=TemperaturePolicy(FIXED, 12.5), seed=7,
                           step_schedule=STEP_CONSTANT)
        self.assertEqual(SaaConfig.from_dict(config.to_dict()), config)

    def test_partial_dict_keeps_defaults(self):
        """Test that absent keys fall back to the defaults."""
        config = SaaConfig.from_dict({"n_max": 50})
        self.assertEqual(config.n_max, 50)
        self.assertEqual(config.epsilon, 0.9)

    def test_unknown_key(self):
        """Test that unknown keys are rejected."""
        with self.assertRaises(InputValidationError):
            SaaConfig.from_dict({"temperature": 3})

    def test_step_scale(self):
        """Test that the proposal half-width is lambda times the box span."""
        np.testing.assert_allclose(step_size(BOX, SaaConfig(lambda_=0.4)), [16.0, 16.0])

    def test_shrinking_schedule(self):
        """Test that the step starts at lambda times the span and decays to the final ratio."""
        config = SaaConfig(lambda_=0.4, n_max=500)
        steps = [step_at(BOX, config, j)[0] for j in range(1, config.n_max + 1)]
        self.assertAlmostEqual(steps[0], 16.0, places=12)
        self.assertAlmostEqual(steps[-1], 16.0 * FINAL_STEP_RATIO, places=12)
        self.assertTrue(all(later < earlier for earlier, later in zip(steps, steps[1:])))
        self.assertAlmostEqual(steps[250] / steps[0], FINAL_STEP_RATIO ** (250 / 499), places=12)

    def test_constant_schedule(self):
        """Test that the constant schedule keeps the first step throughout."""
        config = SaaConfig(lambda_=0.25, n_max=50, step_schedule=STEP_CONSTANT)
        for j in (1, 25, 50):
            np.testing.assert_allclose(step_at(BOX, config, j), [10.0, 10.0])

    def test_schedule_ignores_epsilon(self):
        """Test that the step depends on the iteration count only."""
        for j in (1, 100, 500):
            np.testing.assert_array_equal(
                step_at(BOX, SaaConfig(epsilon=0.5), j), step_at(BOX, SaaConfig(epsilon=0.99), j)
            )

    def test_schedule_rejects_iteration_zero(self):
        """Test that iterations are counted from one."""
        with self.assertRaises(InputValidationError):
            step_at(BOX, SaaConfig(), 0)


class TestAnneal(unittest.TestCase):
    """Test cases for one annealing branch."""

    def setUp(self):
        self.scenario, self.truth, self.meas = noisy_instance(31)
        self.config = SaaConfig(n_max=300)

    def test_single_iteration_without_movement(self):
        """Test that a zero move returns the start and its cost."""
        x0 = Position(13.0, 27.0)
        best, cost = anneal(x0, self.scenario, self.meas, SaaConfig(n_max=1), ScriptedRng(uniforms=[[0, 0]]))
        self.assertEqual(best, x0)
        self.assertEqual(cost, ml_cost(x0, self.scenario, self.meas))

    def test_never_worse_than_start(self):
        """Test best-so-far tracking over many seeds."""
        for seed in range(30):
            rng = np.random.default_rng(seed)
            x0 = random_initial(BOX, rng)
            best, cost = anneal(x0, self.scenario, self.meas, self.config, rng)
            self.assertLessEqual(cost, ml_cost(x0, self.scenario, self.meas))
            self.assertAlmostEqual(cost, ml_cost(best, self.scenario, self.meas), places=9)
            self.assertTrue(BOX.contains(best))

    def test_seeded_determinism(self):
        """Test bitwise-identical results for identical seeds."""
        x0 = Position(3.0, 35.0)
        first = anneal(x0, self.scenario, self.meas, self.config, np.random.default_rng(99))
        second = anneal(x0, self.scenario, self.meas, self.config, np.random.default_rng(99))
        self.assertEqual(first, second)

    def test_geometric_cooling(self):
        """Test that the temperature at iteration j is T0 * epsilon^(j-1)."""
        trace = []
        anneal(Position(1.0, 1.0), self.scenario, self.meas, self.config, np.random.default_rng(5), trace=trace)
        self.assertEqual(len(trace), self.config.n_max + 1)
        t0 = trace[0].temperature
        self.assertEqual(t0, max(trace[0].cost, 1.0))
        for point in trace[1:]:
            expected = t0 * self.config.epsilon ** (point.iteration - 1)
            self.assertLess(abs(point.temperature - expected), 1e-12 * expected)

    def test_fixed_temperature_policy(self):
        """Test that a fixed policy sets T0."""
        config = SaaConfig(n_max=5, t0_policy=TemperaturePolicy(FIXED, 3.5))
        trace = []
        anneal(Position(1.0, 1.0), self.scenario, self.meas, config, np.random.default_rng(5), trace=trace)
        self.assertEqual(trace[0].temperature, 3.5)

    def test_small_epsilon_long_run(self):
        """Test that temperature underflow does not break a long, fast-cooling run."""
        config = SaaConfig(epsilon=0.2, n_max=800)
        _, cost = anneal(Position(1.0, 1.0), self.scenario, self.meas, config, np.random.default_rng(2))
        self.assertTrue(math.isfinite(cost))

    def test_moves_toward_truth_without_noise(self):
        """Test that noise-free runs end closer to the target than they start."""
        scenario, truth, meas = noisy_instance(77, sigma=0.0)
        closer = 0
        runs = 200
        for seed in range(runs):
            rng = np.random.default_rng(seed)
            x0 = random_initial(BOX, rng)
            best, _ = anneal(x0, scenario, meas, SaaConfig(), rng)
            closer += best.distance_to(truth) < x0.distance_to(truth)
        self.assertGreaterEqual(closer, 0.95 * runs)

    def test_rejects_start_outside_bounds(self):
        """Test the start-point precondition."""
        with self.assertRaises(InputValidationError):
            anneal(Position(41.0, 1.0), self.scenario, self.meas, self.config, np.random.default_rng(0))


class TestLocalize(unittest.TestCase):
    """Test cases for the two-start localizer."""

    def setUp(self):
        self.scenario, self.truth, self.meas = noisy_instance(12)
        self.config = SaaConfig(n_max=200)

    def test_tie_goes_to_original(self):
        """Test that equal branch costs select the original branch."""
        with patch("src.solver.obl.anneal", side_effect=[(Position(1, 1), 4.0), (Position(2, 2), 4.0)]):
            report = localize(self.scenario, self.meas, self.config, np.random.default_rng(0))
        self.assertEqual(report.winning_branch, Branch.ORIGINAL)
        self.assertEqual(report.estimate, Position(1, 1))

    def test_lower_cost_wins(self):
        """Test minimum selection between the branches."""
        with patch("src.solver.obl.anneal", side_effect=[(Position(1, 1), 5.0), (Position(2, 2), 3.2)]):
            report = localize(self.scenario, self.meas, self.config, np.random.default_rng(0))
        self.assertEqual(report.winning_branch, Branch.OPPOSING)
        self.assertEqual(report.estimate, Position(2, 2))
        self.assertEqual(report.cost, 3.2)
        self.assertEqual(report.branch_costs, (5.0, 3.2))

    def test_report_invariants(self):
        """Test cost = min(branch costs) and estimate within bounds."""
        for seed in range(20):
            report = localize(self.scenario, self.meas, self.config, np.random.default_rng(seed))
            self.assertEqual(report.cost, min(report.branch_costs))
            self.assertTrue(BOX.contains(report.estimate))

    def test_seeded_determinism(self):
        """Test identical reports from identical seeds, with and without an explicit stream."""
        first = localize(self.scenario, self.meas, self.config.with_overrides(seed=8))
        second = localize(self.scenario, self.meas, self.config.with_overrides(seed=8))
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_branches_reproducible_in_isolation(self):
        """Test that each branch can be replayed on its own derived stream."""
        rng = np.random.default_rng(44)
        report = localize(self.scenario, self.meas, self.config, rng)

        replay = np.random.default_rng(44)
        start = random_initial(BOX, replay)
        original_rng, opposing_rng = branch_streams(int(replay.integers(0, 2 ** 63 - 1)))
        # opposing branch first: order of execution must not matter
        opposing = anneal(oppose(start, BOX), self.scenario, self.meas, self.config, opposing_rng)
        original = anneal(start, self.scenario, self.meas, self.config, original_rng)
        self.assertEqual(report.branch_costs, (original[1], opposing[1]))
        self.assertEqual(report.branch_estimates, (original[0], opposing[0]))

    def test_single_start_matches_original_branch(self):
        """Test that the single-start ablation equals the original branch."""
        report = localize(self.scenario, self.meas, self.config, np.random.default_rng(6))
        estimate, cost = localize_single(self.scenario, self.meas, self.config, np.random.default_rng(6))
        self.assertEqual((estimate, cost), (report.branch_estimates[0], report.branch_costs[0]))

    def test_trace_recorded(self):
        """Test that both branches are traced when requested."""
        report = localize(self.scenario, self.meas, self.config, np.random.default_rng(1), record_trace=True)
        frame = report.trace_frame()
        self.assertEqual(list(frame.columns), ["branch", "iteration", "x1", "x2", "cost", "temperature"])
        self.assertEqual(len(frame), 2 * (self.config.n_max + 1))
        self.assertEqual(set(frame["branch"]), {"original", "opposing"})

    def test_lls_start(self):
        """Test the least-squares initial solution option."""
        config = self.config.with_overrides(init="lls")
        report = localize(self.scenario, self.meas, config, np.random.default_rng(3))
        self.assertEqual(report.cost, min(report.branch_costs))
        self.assertTrue(BOX.contains(report.estimate))

    def test_zero_noise_accuracy(self):
        """Test the median error on noise-free instances."""
        errors = []
        for seed in range(100):
            scenario, truth, meas = noisy_instance(1000 + seed, sigma=0.0)
            report = localize(scenario, meas, SaaConfig(), np.random.default_rng(seed))
            errors.append(report.estimate.distance_to(truth))
        self.assertLessEqual(float(np.median(errors)), 0.5)

    def test_close_to_grid_oracle(self):
        """Test that the solver cost lands within 5% of the exhaustive minimum on most instances."""
        close = 0
        runs = 30
        for seed in range(runs):
            scenario, _, meas = noisy_instance(2000 + seed)
            report = localize(scenario, meas, SaaConfig(), np.random.default_rng(seed))
            _, oracle_cost = grid_oracle(scenario, meas)
            close += report.cost <= 1.05 * oracle_cost + 1e-9
        self.assertGreaterEqual(close, 0.8 * runs)

    def test_shrinking_beats_constant_step(self):
        """Test that narrowing the proposal box lowers the final cost on average."""
        shrinking, constant = [], []
        for seed in range(20):
            scenario, _, meas = noisy_instance(3000 + seed)
            shrinking.append(localize(scenario, meas, SaaConfig(), np.random.default_rng(seed)).cost)
            constant.append(localize(scenario, meas, SaaConfig(step_schedule=STEP_CONSTANT),
                                     np.random.default_rng(seed)).cost)
        self.assertLess(np.mean(shrinking), np.mean(constant))

    def test_lls_start_outside_anchor_hull(self):
        """Test an LLS start clamped to a small box with inexact edges."""
        box = Bounds(Position(0.1, 0.1), Position(0.7, 0.7))
        scenario = Scenario((Position(0.1, 0.1), Position(0.7, 0.1), Position(0.1, 0.7)),
                            PathLossParams(sigma=0.0), box)
        meas = generate_measurements(scenario, Position(5.0, 5.0), np.random.default_rng(0))
        config = SaaConfig(n_max=50, init=INIT_LLS)
        report = localize(scenario, meas, config, np.random.default_rng(1))
        self.assertTrue(box.contains(report.estimate))
        self.assertTrue(all(box.contains(estimate) for estimate in report.branch_estimates))


if __name__ == "__main__":
    unittest.main()
